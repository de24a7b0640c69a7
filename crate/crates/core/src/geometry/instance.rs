//! Geometric instances, their JSON form, and compilation into hypergraphs.

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use super::{Box3, Disk, Point, Point2, Point3, Rect, Region, Triangle};
use crate::error::{Error, Result};
use crate::hypergraph::{Hyperedge, Hypergraph};
use crate::scalar::{Field, Scalar};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// Regions carry weights, points carry capacities.
    PackRegions,
    /// Points carry weights, regions carry capacities.
    PackPoints,
}

/// Region class, used only to pick the union-complexity factor `gamma`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassTag {
    Disk,
    PseudoDisk,
    SimilarFat,
    FatTriangle,
    #[default]
    Generic,
}

impl ClassTag {
    pub fn gamma(self, t: f64) -> f64 {
        match self {
            ClassTag::Disk | ClassTag::PseudoDisk | ClassTag::SimilarFat => 1.0,
            ClassTag::FatTriangle => t.max(2.0).log2().ceil().clamp(1.0, 5.0),
            ClassTag::Generic => t.max(1.0),
        }
    }
}

/// A packing instance. `point_values` and `region_values` hold weights on
/// the packed side and positive integer capacities on the other side.
#[derive(Clone, Debug, PartialEq)]
pub struct GeometricInstance<T> {
    pub direction: Direction,
    pub points: Vec<Point<T>>,
    pub point_values: Vec<f64>,
    pub regions: Vec<Region<T>>,
    pub region_values: Vec<f64>,
    pub class: ClassTag,
}

/// Output of [`GeometricInstance::build_hypergraph`]. `vertex_source[v]` and
/// `edge_source[e]` index back into the instance's regions or points.
#[derive(Clone, Debug)]
pub struct Built<S> {
    pub hypergraph: Hypergraph<S>,
    pub vertex_source: Vec<usize>,
    pub edge_source: Vec<usize>,
}

fn as_capacity(v: f64) -> Result<u32> {
    if v >= 1.0 && v.fract() == 0.0 && v <= u32::MAX as f64 {
        Ok(v as u32)
    } else {
        Err(Error::InvalidInstance(format!("capacity {v} is not a positive integer")))
    }
}

impl<T: Field> GeometricInstance<T> {
    pub fn new(
        direction: Direction,
        points: Vec<Point<T>>,
        point_values: Vec<f64>,
        regions: Vec<Region<T>>,
        region_values: Vec<f64>,
        class: ClassTag,
    ) -> Result<Self> {
        let inst = GeometricInstance { direction, points, point_values, regions, region_values, class };
        inst.validate()?;
        Ok(inst)
    }

    pub fn validate(&self) -> Result<()> {
        if self.points.len() != self.point_values.len() || self.regions.len() != self.region_values.len() {
            return Err(Error::InvalidInstance("value count does not match item count".into()));
        }
        let (weights, caps) = match self.direction {
            Direction::PackRegions => (&self.region_values, &self.point_values),
            Direction::PackPoints => (&self.point_values, &self.region_values),
        };
        if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
            return Err(Error::InvalidInstance(format!("weight {w} is not finite and nonnegative")));
        }
        for &c in caps {
            as_capacity(c)?;
        }
        Ok(())
    }

    /// Weights of the packed side.
    pub fn weights(&self) -> &[f64] {
        match self.direction {
            Direction::PackRegions => &self.region_values,
            Direction::PackPoints => &self.point_values,
        }
    }

    pub fn map<U: Field>(&self, f: impl Fn(&T) -> U) -> GeometricInstance<U> {
        GeometricInstance {
            direction: self.direction,
            points: self.points.iter().map(|p| p.map(&f)).collect(),
            point_values: self.point_values.clone(),
            regions: self.regions.iter().map(|r| r.map(&f)).collect(),
            region_values: self.region_values.clone(),
            class: self.class,
        }
    }

    /// Copy with exact rational coordinates.
    pub fn to_exact(&self) -> GeometricInstance<crate::scalar::Rational> {
        self.map(|v| v.to_rational())
    }

    /// Indices of the regions containing point `p`.
    pub fn regions_containing(&self, p: usize) -> Result<Vec<usize>> {
        let mut out = Vec::new();
        for (i, r) in self.regions.iter().enumerate() {
            if r.contains(&self.points[p])? {
                out.push(i);
            }
        }
        Ok(out)
    }

    /// Indices of the points inside region `r`.
    pub fn points_inside(&self, r: usize) -> Result<Vec<usize>> {
        let mut out = Vec::new();
        for (i, p) in self.points.iter().enumerate() {
            if self.regions[r].contains(p)? {
                out.push(i);
            }
        }
        Ok(out)
    }

    pub fn build_hypergraph<S: Scalar>(&self) -> Result<Built<S>> {
        self.validate()?;
        let (sets, sources, caps, count): (Vec<Vec<usize>>, usize, &[f64], usize) = match self.direction {
            Direction::PackRegions => (
                (0..self.points.len()).map(|p| self.regions_containing(p)).collect::<Result<_>>()?,
                self.points.len(),
                &self.point_values,
                self.regions.len(),
            ),
            Direction::PackPoints => (
                (0..self.regions.len()).map(|r| self.points_inside(r)).collect::<Result<_>>()?,
                self.regions.len(),
                &self.region_values,
                self.points.len(),
            ),
        };
        debug_assert_eq!(sets.len(), sources);
        let mut edges = Vec::new();
        let mut edge_source = Vec::new();
        for (src, set) in sets.into_iter().enumerate() {
            if !set.is_empty() {
                edges.push(Hyperedge::new(set, as_capacity(caps[src])?));
                edge_source.push(src);
            }
        }
        let weights = self.weights().iter().map(|&w| S::from_float(w)).collect();
        Ok(Built { hypergraph: Hypergraph::new(weights, edges)?, vertex_source: (0..count).collect(), edge_source })
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PointJson {
    x: f64,
    y: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    z: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    cap: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    w: Option<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RegionJson {
    kind: String,
    params: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    cap: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    w: Option<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceJson {
    direction: Direction,
    points: Vec<PointJson>,
    regions: Vec<RegionJson>,
    #[serde(default)]
    class: ClassTag,
}

fn value_of(w: Option<f64>, cap: Option<f64>, weighted: bool, what: &str) -> Result<f64> {
    let (key, got) = if weighted { ("w", w) } else { ("cap", cap) };
    got.ok_or_else(|| Error::InvalidInstance(format!("{what} is missing \"{key}\"")))
}

fn region_from_json(r: &RegionJson) -> Result<Region<f64>> {
    let p = &r.params;
    let want = match r.kind.as_str() {
        "disk" | "halfspace" => 3,
        "rect" | "ray" => 4,
        "box" | "triangle" => 6,
        other => return Err(Error::InvalidInstance(format!("unknown region kind {other:?}"))),
    };
    if p.len() != want {
        return Err(Error::InvalidInstance(format!("{} takes {want} params, got {}", r.kind, p.len())));
    }
    if p.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInstance("non-finite region parameter".into()));
    }
    Ok(match r.kind.as_str() {
        "disk" => Region::Disk(Disk::new(Point2::new(p[0], p[1]), p[2])?),
        "rect" => Region::Rect(Rect::new(Point2::new(p[0], p[1]), Point2::new(p[2], p[3]))?),
        "box" => Region::Box(Box3::new(Point3::new(p[0], p[1], p[2]), Point3::new(p[3], p[4], p[5]))?),
        "triangle" => Region::Triangle(Triangle::new(
            Point2::new(p[0], p[1]),
            Point2::new(p[2], p[3]),
            Point2::new(p[4], p[5]),
        )?),
        "halfspace" => Region::Halfspace3 { a: p[0], b: p[1], c: p[2] },
        _ => Region::VerticalRay3 { apex: Point3::new(p[0], p[1], p[2]), up: p[3] >= 0.0 },
    })
}

fn region_to_json(r: &Region<f64>) -> (String, Vec<f64>) {
    let (kind, params) = match r {
        Region::Disk(d) => ("disk", vec![d.center.x, d.center.y, d.radius]),
        Region::Rect(r) => ("rect", vec![r.min.x, r.min.y, r.max.x, r.max.y]),
        Region::Box(b) => ("box", vec![b.min.x, b.min.y, b.min.z, b.max.x, b.max.y, b.max.z]),
        Region::Triangle(t) => ("triangle", t.v.iter().flat_map(|p| [p.x, p.y]).collect()),
        Region::Halfspace3 { a, b, c } => ("halfspace", vec![*a, *b, *c]),
        Region::VerticalRay3 { apex, up } => ("ray", vec![apex.x, apex.y, apex.z, if *up { 1.0 } else { -1.0 }]),
    };
    (kind.to_string(), params)
}

fn strip_unknown(value: &mut Value) {
    const TOP: [&str; 4] = ["direction", "points", "regions", "class"];
    const POINT: [&str; 5] = ["x", "y", "z", "cap", "w"];
    const REGION: [&str; 4] = ["kind", "params", "cap", "w"];
    fn keep(obj: &mut Map<String, Value>, allowed: &[&str], at: &str) {
        obj.retain(|k, _| {
            let ok = allowed.contains(&k.as_str());
            if !ok {
                log::warn!("ignoring unknown key {k:?} in {at}");
            }
            ok
        });
    }
    let Some(top) = value.as_object_mut() else { return };
    keep(top, &TOP, "instance");
    for (list, allowed) in [("points", &POINT[..]), ("regions", &REGION[..])] {
        if let Some(items) = top.get_mut(list).and_then(Value::as_array_mut) {
            for item in items.iter_mut().filter_map(Value::as_object_mut) {
                keep(item, allowed, list);
            }
        }
    }
}

impl GeometricInstance<f64> {
    /// Parses the instance JSON. Unknown keys are errors when `strict` and
    /// are dropped with a warning otherwise.
    pub fn from_json(text: &str, strict: bool) -> Result<Self> {
        let mut value: Value = serde_json::from_str(text)?;
        if !strict {
            strip_unknown(&mut value);
        }
        let raw: InstanceJson = serde_json::from_value(value)?;
        let points_weighted = raw.direction == Direction::PackPoints;
        let mut points = Vec::with_capacity(raw.points.len());
        let mut point_values = Vec::with_capacity(raw.points.len());
        for p in &raw.points {
            if !(p.x.is_finite() && p.y.is_finite() && p.z.is_none_or(f64::is_finite)) {
                return Err(Error::InvalidInstance("non-finite point coordinate".into()));
            }
            points.push(match p.z {
                Some(z) => Point::Spatial(Point3::new(p.x, p.y, z)),
                None => Point::Planar(Point2::new(p.x, p.y)),
            });
            point_values.push(value_of(p.w, p.cap, points_weighted, "point")?);
        }
        let mut regions = Vec::with_capacity(raw.regions.len());
        let mut region_values = Vec::with_capacity(raw.regions.len());
        for r in &raw.regions {
            regions.push(region_from_json(r)?);
            region_values.push(value_of(r.w, r.cap, !points_weighted, "region")?);
        }
        GeometricInstance::new(raw.direction, points, point_values, regions, region_values, raw.class)
    }

    pub fn to_json(&self) -> String {
        let points_weighted = self.direction == Direction::PackPoints;
        let split = |v: f64, weighted: bool| if weighted { (Some(v), None) } else { (None, Some(v)) };
        let raw = InstanceJson {
            direction: self.direction,
            points: self
                .points
                .iter()
                .zip(&self.point_values)
                .map(|(p, &v)| {
                    let (w, cap) = split(v, points_weighted);
                    match p {
                        Point::Planar(q) => PointJson { x: q.x, y: q.y, z: None, cap, w },
                        Point::Spatial(q) => PointJson { x: q.x, y: q.y, z: Some(q.z), cap, w },
                    }
                })
                .collect(),
            regions: self
                .regions
                .iter()
                .zip(&self.region_values)
                .map(|(r, &v)| {
                    let (kind, params) = region_to_json(r);
                    let (w, cap) = split(v, !points_weighted);
                    RegionJson { kind, params, cap, w }
                })
                .collect(),
            class: self.class,
        };
        serde_json::to_string_pretty(&raw).expect("instance serializes")
    }
}
