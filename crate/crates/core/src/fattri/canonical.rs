//! Canonical regions for fat triangles, by desk-scale enumeration.
//!
//! A region is the point set of a homothet of one of a few fixed shapes.
//! With the edge normals `n_i` of a shape, a homothet is
//! `{p : n_i . p <= b_i for all i}`. Shrinking it onto its points shows that
//! its point set is realized with every `b_i` taken from a member, so for
//! fixed `b_0, b_1` the realizable sets are prefixes in the order of `n_2 . p`.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{Point2, Triangle};
use crate::scalar::Scalar;

pub const DESK_LIMIT: usize = 400;
pub const MAX_COVER_PIECES: usize = 9;
pub const DEFAULT_ROTATIONS: usize = 8;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FatRegion {
    pub family: usize,
    /// Sorted point indices.
    pub members: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FatCover {
    /// Regions whose members together are exactly the query's points.
    Covered(Vec<FatRegion>),
    /// No cover with at most [`MAX_COVER_PIECES`] regions was found.
    NotCovered,
    /// The query holds more than `k` points.
    TooManyPoints,
}

#[derive(Clone, Debug)]
pub struct CanonicalFatRegions<T> {
    points: Vec<Point2<T>>,
    k: usize,
    /// Per family, the coordinates `n_i . p` of every point.
    coords: Vec<Vec<[f64; 3]>>,
}

fn base_shapes() -> [[(f64, f64); 3]; 2] {
    let h = 3f64.sqrt() / 2.0;
    [[(0.0, 0.0), (1.0, 0.0), (0.0, 1.0)], [(0.0, 0.0), (1.0, 0.0), (0.5, h)]]
}

/// Outward edge normals of every shape family with fatness at most
/// `alpha_max`, each at `rotations` evenly spaced angles.
pub fn shape_families(alpha_max: f64, rotations: usize) -> Vec<[[f64; 2]; 3]> {
    let mut out = Vec::new();
    for shape in base_shapes() {
        let [a, b, c] = shape.map(|(x, y)| Point2::new(x, y));
        if Triangle::new(a, b, c).expect("fixed shape").fatness() > alpha_max {
            continue;
        }
        for r in 0..rotations {
            let (s, co) = (std::f64::consts::TAU * r as f64 / rotations as f64).sin_cos();
            let v = shape.map(|(x, y)| (co * x - s * y, s * x + co * y));
            // Counter-clockwise vertices, so the outward normal of edge
            // (p, q) is the direction of (q - p) turned clockwise.
            out.push(std::array::from_fn(|i| {
                let (p, q) = (v[(i + 1) % 3], v[(i + 2) % 3]);
                [q.1 - p.1, p.0 - q.0]
            }));
        }
    }
    out
}

impl<T: Scalar> CanonicalFatRegions<T> {
    pub fn new(points: Vec<Point2<T>>, k: usize, alpha_max: f64) -> Result<Self> {
        Self::with_rotations(points, k, alpha_max, DEFAULT_ROTATIONS)
    }

    pub fn with_rotations(points: Vec<Point2<T>>, k: usize, alpha_max: f64, rotations: usize) -> Result<Self> {
        if points.len() > DESK_LIMIT {
            return Err(Error::TooLarge(format!("{} points exceed the desk-scale limit of {DESK_LIMIT}", points.len())));
        }
        if k == 0 || rotations == 0 {
            return Err(Error::InvalidConfig("canonical fat regions need k >= 1 and rotations >= 1".into()));
        }
        let families = shape_families(alpha_max, rotations);
        if families.is_empty() {
            return Err(Error::InvalidConfig(format!("no shape family has fatness at most {alpha_max}")));
        }
        let coords = families
            .iter()
            .map(|normals| {
                points
                    .iter()
                    .map(|p| {
                        let (x, y) = (p.x.as_f64(), p.y.as_f64());
                        normals.map(|n| n[0] * x + n[1] * y)
                    })
                    .collect()
            })
            .collect();
        Ok(CanonicalFatRegions { points, k, coords })
    }

    pub fn points(&self) -> &[Point2<T>] {
        &self.points
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn families(&self) -> usize {
        self.coords.len()
    }

    /// Points with `u_0 <= b_0` and `u_1 <= b_1`, ordered by `u_2`.
    fn wedge(&self, family: usize, a: usize, b: usize) -> Vec<usize> {
        let u = &self.coords[family];
        let (b0, b1) = (u[a][0], u[b][1]);
        let mut wedge: Vec<usize> = (0..self.points.len()).filter(|&p| u[p][0] <= b0 && u[p][1] <= b1).collect();
        wedge.sort_by(|&p, &q| u[p][2].total_cmp(&u[q][2]).then(p.cmp(&q)));
        wedge
    }

    /// Every distinct region with at most `k` points.
    pub fn regions(&self) -> Vec<FatRegion> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        let n = self.points.len();
        for family in 0..self.coords.len() {
            for a in 0..n {
                for b in 0..n {
                    let wedge = self.wedge(family, a, b);
                    for len in 1..=wedge.len().min(self.k) {
                        let mut members = wedge[..len].to_vec();
                        members.sort_unstable();
                        if seen.insert(members.clone()) {
                            out.push(FatRegion { family, members });
                        }
                    }
                }
            }
        }
        out
    }

    pub fn points_in(&self, query: &Triangle<T>) -> Vec<usize> {
        (0..self.points.len()).filter(|&p| query.contains(&self.points[p])).collect()
    }

    /// Greedy cover of the query's points by maximal regions inside it.
    pub fn cover(&self, query: &Triangle<T>) -> FatCover {
        let inside = self.points_in(query);
        if inside.len() > self.k {
            return FatCover::TooManyPoints;
        }
        let mut in_query = vec![false; self.points.len()];
        inside.iter().for_each(|&p| in_query[p] = true);
        let mut seen = BTreeSet::new();
        let mut candidates = Vec::new();
        for family in 0..self.coords.len() {
            for &a in &inside {
                for &b in &inside {
                    let members: Vec<usize> = self.wedge(family, a, b).into_iter().take_while(|&p| in_query[p]).collect();
                    let mut members = members;
                    members.sort_unstable();
                    if !members.is_empty() && seen.insert(members.clone()) {
                        candidates.push(FatRegion { family, members });
                    }
                }
            }
        }
        let mut uncovered: BTreeSet<usize> = inside.iter().copied().collect();
        let mut chosen = Vec::new();
        while !uncovered.is_empty() {
            if chosen.len() == MAX_COVER_PIECES {
                return FatCover::NotCovered;
            }
            let best = candidates
                .iter()
                .enumerate()
                .max_by_key(|(i, c)| (c.members.iter().filter(|p| uncovered.contains(p)).count(), usize::MAX - i));
            match best {
                Some((_, c)) if c.members.iter().any(|p| uncovered.contains(p)) => {
                    c.members.iter().for_each(|p| {
                        uncovered.remove(p);
                    });
                    chosen.push(c.clone());
                }
                _ => return FatCover::NotCovered,
            }
        }
        FatCover::Covered(chosen)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_fat(rng: &mut ChaCha8Rng, alpha: f64) -> Triangle<f64> {
        loop {
            let (cx, cy) = (rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0));
            let r = rng.gen_range(0.05..0.5);
            let v: [Point2<f64>; 3] = std::array::from_fn(|_| {
                let a = rng.gen_range(0.0..std::f64::consts::TAU);
                Point2::new(cx + r * a.cos(), cy + r * a.sin())
            });
            if let Ok(t) = Triangle::new(v[0].clone(), v[1].clone(), v[2].clone()) {
                if t.fatness() <= alpha {
                    return t;
                }
            }
        }
    }

    #[test]
    fn families_by_fatness() {
        assert_eq!(shape_families(4.0, 8).len(), 16);
        assert_eq!(shape_families(1.5, 8).len(), 8);
        assert!(CanonicalFatRegions::<f64>::new(vec![], 1, 1.0).is_err());
    }

    #[test]
    fn homothet_membership_matches_geometry() {
        // The right-isosceles family at rotation 0 with b = (1, 0, 0) is the
        // triangle (0,0), (1,0), (0,1); edge i is opposite vertex i.
        let normals = shape_families(4.0, 8)[0];
        let t = Triangle::new(Point2::new(0.0, 0.0), Point2::new(1.0, 0.0), Point2::new(0.0, 1.0)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..1000 {
            let p = Point2::new(rng.gen_range(-0.5..1.5), rng.gen_range(-0.5..1.5));
            let u = normals.map(|n| n[0] * p.x + n[1] * p.y);
            let bound = [1.0, 0.0, 0.0];
            let inside = (0..3).all(|i| u[i] <= bound[i]);
            assert_eq!(inside, t.contains(&p), "{p:?} {u:?}");
        }
    }

    #[test]
    fn singleton() {
        let set = CanonicalFatRegions::new(vec![Point2::new(0.5, 0.5)], 1, 4.0).unwrap();
        assert_eq!(set.regions(), vec![FatRegion { family: 0, members: vec![0] }]);
        let t = Triangle::new(Point2::new(0.0, 0.0), Point2::new(1.0, 0.0), Point2::new(0.5, 1.0)).unwrap();
        assert_eq!(set.cover(&t), FatCover::Covered(vec![FatRegion { family: 0, members: vec![0] }]));
    }

    #[test]
    fn random_queries_are_covered_exactly() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let pts: Vec<Point2<f64>> = (0..10).map(|_| Point2::new(rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0))).collect();
        let set = CanonicalFatRegions::new(pts, 3, 4.0).unwrap();
        let all: BTreeSet<Vec<usize>> = set.regions().into_iter().map(|r| r.members).collect();
        let mut tested = 0;
        while tested < 200 {
            let q = random_fat(&mut rng, 4.0);
            let want = set.points_in(&q);
            if want.len() > 3 {
                assert_eq!(set.cover(&q), FatCover::TooManyPoints);
                continue;
            }
            tested += 1;
            let FatCover::Covered(pieces) = set.cover(&q) else { panic!("query not covered") };
            assert!(pieces.len() <= MAX_COVER_PIECES);
            let mut got: Vec<usize> = pieces.iter().flat_map(|r| r.members.iter().copied()).collect();
            got.sort_unstable();
            got.dedup();
            assert_eq!(got, want);
            for r in &pieces {
                assert!(all.contains(&r.members));
            }
        }
    }

    #[test]
    fn desk_limit() {
        let pts = vec![Point2::new(0.0, 0.0); DESK_LIMIT + 1];
        assert!(matches!(CanonicalFatRegions::new(pts, 1, 4.0), Err(Error::TooLarge(_))));
    }
}
