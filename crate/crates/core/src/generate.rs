//! Seeded instance generators: random families, small named patterns, and
//! the two hardness reductions.

use std::f64::consts::{FRAC_PI_2, TAU};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Box3, ClassTag, Direction, Disk, GeometricInstance, Point, Point2, Point3, Rect, Region, Triangle};
use crate::rng::{self, stream};

/// Relative jitter applied to every generated coordinate.
pub const JITTER: f64 = 1e-9;
/// Angular width of one class arc in the matching reduction, in degrees.
pub const CLASS_ARC_DEG: f64 = 4.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeneratorKind {
    RandomDisks,
    RandomRects,
    RandomBoxes,
    RandomFatTriangles,
    Flower,
    K3Segments,
    TriMatchingHard,
    GraphIsHard,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphInput {
    pub vertices: usize,
    pub edges: Vec<[usize; 2]>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorSpec {
    pub kind: GeneratorKind,
    #[serde(default = "default_regions")]
    pub n_regions: usize,
    #[serde(default = "default_points")]
    pub n_points: usize,
    #[serde(default = "default_caps")]
    pub cap_range: [u32; 2],
    #[serde(default = "default_weights")]
    pub weight_range: [f64; 2],
    /// Radius or side length range for the random families.
    #[serde(default = "default_extent")]
    pub extent_range: [f64; 2],
    #[serde(default = "default_fatness")]
    pub fatness_bound: f64,
    /// Overrides the family's usual direction.
    #[serde(default)]
    pub direction: Option<Direction>,
    /// Input for `tri_matching_hard`: triples `(a, b, c)` over three classes.
    #[serde(default)]
    pub triples: Option<Vec<[usize; 3]>>,
    /// Input for `graph_is_hard`.
    #[serde(default)]
    pub graph: Option<GraphInput>,
    pub seed: u64,
}

fn default_regions() -> usize {
    10
}
fn default_points() -> usize {
    20
}
fn default_caps() -> [u32; 2] {
    [1, 1]
}
fn default_weights() -> [f64; 2] {
    [1.0, 1.0]
}
fn default_extent() -> [f64; 2] {
    [0.1, 0.3]
}
fn default_fatness() -> f64 {
    4.0
}

impl GeneratorSpec {
    pub fn new(kind: GeneratorKind, seed: u64) -> Self {
        GeneratorSpec {
            kind,
            n_regions: default_regions(),
            n_points: default_points(),
            cap_range: default_caps(),
            weight_range: default_weights(),
            extent_range: default_extent(),
            fatness_bound: default_fatness(),
            direction: None,
            triples: None,
            graph: None,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidConfig(msg.into()));
        let [clo, chi] = self.cap_range;
        if clo == 0 || clo > chi {
            return bad("cap_range must satisfy 1 <= lo <= hi");
        }
        let [wlo, whi] = self.weight_range;
        if !(wlo >= 0.0 && wlo <= whi && whi.is_finite()) {
            return bad("weight_range must satisfy 0 <= lo <= hi");
        }
        let [elo, ehi] = self.extent_range;
        if !(elo > 0.0 && elo <= ehi && ehi.is_finite()) {
            return bad("extent_range must satisfy 0 < lo <= hi");
        }
        // An equilateral triangle has fatness 2/sqrt(3).
        if !(self.fatness_bound > 1.2) {
            return bad("fatness_bound must exceed 1.2");
        }
        Ok(())
    }
}

pub fn generate_instance(spec: &GeneratorSpec) -> Result<GeometricInstance<f64>> {
    spec.validate()?;
    let mut g = Gen { spec, rng: rng::rng(spec.seed, stream::GENERATOR, 0), jitter: rng::rng(spec.seed, stream::JITTER, 0) };
    match spec.kind {
        GeneratorKind::RandomDisks => g.random(Direction::PackRegions, ClassTag::Disk, 2, |g| {
            let c = g.planar();
            let r = g.extent();
            Ok(Region::Disk(Disk::new(c, r)?))
        }),
        GeneratorKind::RandomRects => g.random(Direction::PackRegions, ClassTag::Generic, 2, |g| {
            let min = g.planar();
            let max = Point2::new(min.x + g.extent(), min.y + g.extent());
            Ok(Region::Rect(Rect::new(min, max)?))
        }),
        GeneratorKind::RandomBoxes => g.random(Direction::PackRegions, ClassTag::Generic, 3, |g| {
            let min = g.spatial();
            let max = Point3::new(min.x + g.extent(), min.y + g.extent(), min.z + g.extent());
            Ok(Region::Box(Box3::new(min, max)?))
        }),
        GeneratorKind::RandomFatTriangles => g.random(Direction::PackPoints, ClassTag::FatTriangle, 2, Gen::fat_triangle),
        GeneratorKind::Flower => g.flower(),
        GeneratorKind::K3Segments => g.k3_segments(),
        GeneratorKind::TriMatchingHard => g.tri_matching(),
        GeneratorKind::GraphIsHard => g.graph_is(),
    }
}

struct Gen<'a> {
    spec: &'a GeneratorSpec,
    rng: ChaCha8Rng,
    jitter: ChaCha8Rng,
}

impl Gen<'_> {
    fn planar(&mut self) -> Point2<f64> {
        Point2::new(self.rng.gen(), self.rng.gen())
    }

    fn spatial(&mut self) -> Point3<f64> {
        Point3::new(self.rng.gen(), self.rng.gen(), self.rng.gen())
    }

    fn extent(&mut self) -> f64 {
        let [lo, hi] = self.spec.extent_range;
        if lo == hi { lo } else { self.rng.gen_range(lo..hi) }
    }

    fn weight(&mut self) -> f64 {
        let [lo, hi] = self.spec.weight_range;
        if lo == hi { lo } else { self.rng.gen_range(lo..hi) }
    }

    fn capacity(&mut self) -> f64 {
        let [lo, hi] = self.spec.cap_range;
        self.rng.gen_range(lo..=hi) as f64
    }

    fn wiggle(&mut self, scale: f64) -> f64 {
        self.jitter.gen_range(-1.0..=1.0) * JITTER * scale
    }

    fn jittered(&mut self, p: Point2<f64>) -> Point2<f64> {
        Point2::new(p.x + self.wiggle(1.0), p.y + self.wiggle(1.0))
    }

    fn random(
        &mut self,
        default: Direction,
        class: ClassTag,
        dim: usize,
        mut region: impl FnMut(&mut Self) -> Result<Region<f64>>,
    ) -> Result<GeometricInstance<f64>> {
        let direction = self.spec.direction.unwrap_or(default);
        let regions = (0..self.spec.n_regions).map(|_| region(self)).collect::<Result<Vec<_>>>()?;
        let points: Vec<Point<f64>> = (0..self.spec.n_points)
            .map(|_| match dim {
                2 => {
                    let p = self.planar();
                    Point::Planar(self.jittered(p))
                }
                _ => {
                    let p = self.spatial();
                    Point::Spatial(Point3::new(p.x + self.wiggle(1.0), p.y + self.wiggle(1.0), p.z + self.wiggle(1.0)))
                }
            })
            .collect();
        let (point_values, region_values) = match direction {
            Direction::PackRegions => {
                let caps = (0..points.len()).map(|_| self.capacity()).collect();
                (caps, (0..regions.len()).map(|_| self.weight()).collect())
            }
            Direction::PackPoints => {
                let weights = (0..points.len()).map(|_| self.weight()).collect();
                (weights, (0..regions.len()).map(|_| self.capacity()).collect())
            }
        };
        GeometricInstance::new(direction, points, point_values, regions, region_values, class)
    }

    /// Perturbed equilateral triangle, resampled until its fatness fits.
    fn fat_triangle(&mut self) -> Result<Region<f64>> {
        let c = self.planar();
        let s = self.extent();
        for _ in 0..1000 {
            let theta: f64 = self.rng.gen_range(0.0..TAU);
            let v: Vec<Point2<f64>> = (0..3)
                .map(|i| {
                    let a = theta + i as f64 * TAU / 3.0 + self.rng.gen_range(-0.6..0.6);
                    let r = s * self.rng.gen_range(0.6..1.0);
                    Point2::new(c.x + r * a.cos(), c.y + r * a.sin())
                })
                .collect();
            if let Ok(t) = Triangle::new(v[0].clone(), v[1].clone(), v[2].clone()) {
                if t.fatness() <= self.spec.fatness_bound {
                    return Ok(Region::Triangle(t));
                }
            }
        }
        Err(Error::InvalidConfig(format!("could not sample a triangle with fatness <= {}", self.spec.fatness_bound)))
    }

    /// `n_regions` disks sharing one central point whose capacity admits all
    /// of them.
    fn flower(&mut self) -> Result<GeometricInstance<f64>> {
        let n = self.spec.n_regions.max(2);
        let regions = (0..n)
            .map(|i| {
                let a = TAU * i as f64 / n as f64;
                Ok(Region::Disk(Disk::new(Point2::new(0.5 * a.cos(), 0.5 * a.sin()), 0.6)?))
            })
            .collect::<Result<Vec<_>>>()?;
        let center = self.jittered(Point2::new(0.0, 0.0));
        let weights = (0..n).map(|_| self.weight()).collect();
        GeometricInstance::new(Direction::PackRegions, vec![Point::Planar(center)], vec![n as f64], regions, weights, ClassTag::Disk)
    }

    /// Three thin triangles standing in for pairwise crossing segments, with a
    /// unit-capacity point at each crossing.
    fn k3_segments(&mut self) -> Result<GeometricInstance<f64>> {
        let corners = [Point2::new(0.0, 0.0), Point2::new(1.0, 0.0), Point2::new(0.5, 3f64.sqrt() / 2.0)];
        let centroid = Point2::new(0.5, 3f64.sqrt() / 6.0);
        let delta = 0.01;
        let regions = (0..3)
            .map(|i| {
                let (a, b) = (&corners[i], &corners[(i + 1) % 3]);
                let (dx, dy) = (b.x - a.x, b.y - a.y);
                let (mx, my) = ((a.x + b.x) / 2.0, (a.y + b.y) / 2.0);
                // Unit normal pointing away from the centroid.
                let (mut nx, mut ny) = (-dy, dx);
                if nx * (mx - centroid.x) + ny * (my - centroid.y) < 0.0 {
                    (nx, ny) = (-nx, -ny);
                }
                let p = |t: f64, h: f64| Point2::new(a.x + t * dx + h * nx, a.y + t * dy + h * ny);
                Ok(Region::Triangle(Triangle::new(p(-0.1, -delta), p(1.1, -delta), p(0.5, 10.0 * delta))?))
            })
            .collect::<Result<Vec<_>>>()?;
        let points = corners.iter().map(|c| Point::Planar(self.jittered(c.clone()))).collect();
        let weights = (0..3).map(|_| self.weight()).collect();
        GeometricInstance::new(Direction::PackRegions, points, vec![1.0; 3], regions, weights, ClassTag::Generic)
    }

    /// One point per class element on the unit circle, classes on arcs 120
    /// degrees apart, and one inscribed triangle per triple.
    fn tri_matching(&mut self) -> Result<GeometricInstance<f64>> {
        let triples = self
            .spec
            .triples
            .as_ref()
            .ok_or_else(|| Error::InvalidInstance("tri_matching_hard needs `triples`".into()))?;
        let mut sizes = [0usize; 3];
        for t in triples {
            for c in 0..3 {
                sizes[c] = sizes[c].max(t[c] + 1);
            }
        }
        let mut index = [0usize; 3];
        let mut points = Vec::new();
        for c in 0..3 {
            index[c] = points.len();
            let base = FRAC_PI_2 + c as f64 * TAU / 3.0;
            let step = CLASS_ARC_DEG.to_radians() / sizes[c].max(2) as f64;
            for i in 0..sizes[c] {
                let a = base + i as f64 * step + self.wiggle(1.0);
                points.push(Point2::new(a.cos(), a.sin()));
            }
        }
        let regions = triples
            .iter()
            .map(|t| {
                let v = |c: usize| points[index[c] + t[c]].clone();
                Ok(Region::Triangle(Triangle::new(v(0), v(1), v(2))?))
            })
            .collect::<Result<Vec<_>>>()?;
        let n = points.len();
        let m = regions.len();
        GeometricInstance::new(
            Direction::PackRegions,
            points.into_iter().map(Point::Planar).collect(),
            vec![1.0; n],
            regions,
            vec![1.0; m],
            ClassTag::FatTriangle,
        )
    }

    /// Graph vertices on a quarter of the unit circle and one equilateral
    /// triangle per edge, based on the chord and pointing inwards.
    fn graph_is(&mut self) -> Result<GeometricInstance<f64>> {
        let graph = self.spec.graph.as_ref().ok_or_else(|| Error::InvalidInstance("graph_is_hard needs `graph`".into()))?;
        let n = graph.vertices;
        for &[u, v] in &graph.edges {
            if u == v || u >= n || v >= n {
                return Err(Error::InvalidInstance(format!("bad edge ({u}, {v}) for {n} vertices")));
            }
        }
        let points: Vec<Point2<f64>> = (0..n)
            .map(|i| {
                let a = FRAC_PI_2 * (i as f64 + 0.5) / n as f64 + self.wiggle(1.0);
                Point2::new(a.cos(), a.sin())
            })
            .collect();
        let regions = graph
            .edges
            .iter()
            .map(|&[u, v]| {
                let (a, b) = (&points[u], &points[v]);
                let (mx, my) = ((a.x + b.x) / 2.0, (a.y + b.y) / 2.0);
                let h = 3f64.sqrt() / 2.0;
                // The midpoint is never the origin, so the inward direction exists.
                let len = (mx * mx + my * my).sqrt();
                let chord = ((b.x - a.x).powi(2) + (b.y - a.y).powi(2)).sqrt();
                let apex = Point2::new(mx - h * chord * mx / len, my - h * chord * my / len);
                Ok(Region::Triangle(Triangle::new(a.clone(), b.clone(), apex)?))
            })
            .collect::<Result<Vec<_>>>()?;
        let m = regions.len();
        let weights = (0..n).map(|_| self.weight()).collect();
        GeometricInstance::new(
            Direction::PackPoints,
            points.into_iter().map(Point::Planar).collect(),
            weights,
            regions,
            vec![1.0; m],
            ClassTag::FatTriangle,
        )
    }
}
