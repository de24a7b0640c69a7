//! Geometric primitives and closed-set containment.
//!
//! Containment is exact for every region kind: boxes compare coordinates,
//! triangles use exact orientation signs, disks and halfspaces use the
//! filtered exact polynomial signs of [`Field`].

mod instance;
mod lifting;

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Field;

pub use instance::{Built, ClassTag, Direction, GeometricInstance};
pub use lifting::{dual_plane_of_point, dual_point_of_plane, lift_and_dualize, lift_point, ray_crosses_plane, Lifted};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Point2<T> {
    pub x: T,
    pub y: T,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Point3<T> {
    pub x: T,
    pub y: T,
    pub z: T,
}

impl<T> Point2<T> {
    pub fn new(x: T, y: T) -> Self {
        Point2 { x, y }
    }
}

impl<T> Point3<T> {
    pub fn new(x: T, y: T, z: T) -> Self {
        Point3 { x, y, z }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Point<T> {
    Planar(Point2<T>),
    Spatial(Point3<T>),
}

impl<T: Field> Point<T> {
    pub fn planar(&self) -> Option<&Point2<T>> {
        match self {
            Point::Planar(p) => Some(p),
            Point::Spatial(_) => None,
        }
    }

    pub fn spatial(&self) -> Option<&Point3<T>> {
        match self {
            Point::Spatial(p) => Some(p),
            Point::Planar(_) => None,
        }
    }

    pub fn map<U: Field>(&self, f: impl Fn(&T) -> U) -> Point<U> {
        match self {
            Point::Planar(p) => Point::Planar(Point2::new(f(&p.x), f(&p.y))),
            Point::Spatial(p) => Point::Spatial(Point3::new(f(&p.x), f(&p.y), f(&p.z))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Disk<T> {
    pub center: Point2<T>,
    pub radius: T,
}

/// Closed axis-parallel rectangle.
#[derive(Clone, Debug, PartialEq)]
pub struct Rect<T> {
    pub min: Point2<T>,
    pub max: Point2<T>,
}

/// Closed axis-parallel box.
#[derive(Clone, Debug, PartialEq)]
pub struct Box3<T> {
    pub min: Point3<T>,
    pub max: Point3<T>,
}

/// Closed non-degenerate triangle.
#[derive(Clone, Debug, PartialEq)]
pub struct Triangle<T> {
    pub v: [Point2<T>; 3],
}

#[derive(Clone, Debug, PartialEq)]
pub enum Region<T> {
    Disk(Disk<T>),
    Rect(Rect<T>),
    Box(Box3<T>),
    Triangle(Triangle<T>),
    /// `z <= a x + b y + c`.
    Halfspace3 { a: T, b: T, c: T },
    /// Vertical ray from `apex`, upwards when `up`.
    VerticalRay3 { apex: Point3<T>, up: bool },
}

impl<T: Field> Disk<T> {
    pub fn new(center: Point2<T>, radius: T) -> Result<Self> {
        if !(radius > T::zero()) {
            return Err(Error::InvalidInstance("disk radius must be positive".into()));
        }
        Ok(Disk { center, radius })
    }

    pub fn contains(&self, p: &Point2<T>) -> bool {
        T::disk_sign([&p.x, &p.y], [&self.center.x, &self.center.y], &self.radius) != Ordering::Greater
    }
}

impl<T: Field> Rect<T> {
    pub fn new(min: Point2<T>, max: Point2<T>) -> Result<Self> {
        if !(min.x <= max.x && min.y <= max.y) {
            return Err(Error::InvalidInstance("rectangle corners out of order".into()));
        }
        Ok(Rect { min, max })
    }

    pub fn contains(&self, p: &Point2<T>) -> bool {
        self.min.x <= p.x && p.x <= self.max.x && self.min.y <= p.y && p.y <= self.max.y
    }
}

impl<T: Field> Box3<T> {
    pub fn new(min: Point3<T>, max: Point3<T>) -> Result<Self> {
        if !(min.x <= max.x && min.y <= max.y && min.z <= max.z) {
            return Err(Error::InvalidInstance("box corners out of order".into()));
        }
        Ok(Box3 { min, max })
    }

    pub fn contains(&self, p: &Point3<T>) -> bool {
        self.min.x <= p.x
            && p.x <= self.max.x
            && self.min.y <= p.y
            && p.y <= self.max.y
            && self.min.z <= p.z
            && p.z <= self.max.z
    }
}

fn orient<T: Field>(a: &Point2<T>, b: &Point2<T>, c: &Point2<T>) -> Ordering {
    T::orient2d([&a.x, &a.y], [&b.x, &b.y], [&c.x, &c.y])
}

impl<T: Field> Triangle<T> {
    pub fn new(a: Point2<T>, b: Point2<T>, c: Point2<T>) -> Result<Self> {
        if orient(&a, &b, &c) == Ordering::Equal {
            return Err(Error::InvalidInstance("degenerate triangle".into()));
        }
        Ok(Triangle { v: [a, b, c] })
    }

    pub fn contains(&self, p: &Point2<T>) -> bool {
        let [a, b, c] = &self.v;
        let s = [orient(a, b, p), orient(b, c, p), orient(c, a, p)];
        !(s.contains(&Ordering::Greater) && s.contains(&Ordering::Less))
    }

    /// Longest edge over the height onto it, i.e. `L^2 / |2 * area|`.
    pub fn fatness(&self) -> T {
        let [a, b, c] = &self.v;
        let sq = |p: &Point2<T>, q: &Point2<T>| {
            let dx = q.x.clone() - p.x.clone();
            let dy = q.y.clone() - p.y.clone();
            dx.clone() * dx + dy.clone() * dy
        };
        let longest = [sq(a, b), sq(b, c), sq(c, a)]
            .into_iter()
            .fold(T::zero(), |m, l| if l > m { l } else { m });
        let cross = (b.x.clone() - a.x.clone()) * (c.y.clone() - a.y.clone())
            - (b.y.clone() - a.y.clone()) * (c.x.clone() - a.x.clone());
        let area2 = if cross < T::zero() { -cross } else { cross };
        longest / area2
    }

    pub fn map<U: Field>(&self, f: impl Fn(&T) -> U) -> Triangle<U> {
        Triangle { v: self.v.clone().map(|p| Point2::new(f(&p.x), f(&p.y))) }
    }
}

/// Convenience wrapper for [`Triangle::fatness`].
pub fn triangle_fatness<T: Field>(t: &Triangle<T>) -> T {
    t.fatness()
}

impl<T: Field> Region<T> {
    pub fn contains(&self, p: &Point<T>) -> Result<bool> {
        let mismatch = || Error::InvalidInstance("region and point dimensions differ".into());
        Ok(match self {
            Region::Disk(d) => d.contains(p.planar().ok_or_else(mismatch)?),
            Region::Rect(r) => r.contains(p.planar().ok_or_else(mismatch)?),
            Region::Triangle(t) => t.contains(p.planar().ok_or_else(mismatch)?),
            Region::Box(b) => b.contains(p.spatial().ok_or_else(mismatch)?),
            Region::Halfspace3 { a, b, c } => {
                let q = p.spatial().ok_or_else(mismatch)?;
                T::plane_sign([&q.x, &q.y, &q.z], a, b, c) != Ordering::Less
            }
            Region::VerticalRay3 { apex, up } => {
                let q = p.spatial().ok_or_else(mismatch)?;
                q.x == apex.x && q.y == apex.y && if *up { q.z >= apex.z } else { q.z <= apex.z }
            }
        })
    }

    pub fn is_planar(&self) -> bool {
        matches!(self, Region::Disk(_) | Region::Rect(_) | Region::Triangle(_))
    }

    pub fn map<U: Field>(&self, f: impl Fn(&T) -> U) -> Region<U> {
        let p2 = |p: &Point2<T>| Point2::new(f(&p.x), f(&p.y));
        let p3 = |p: &Point3<T>| Point3::new(f(&p.x), f(&p.y), f(&p.z));
        match self {
            Region::Disk(d) => Region::Disk(Disk { center: p2(&d.center), radius: f(&d.radius) }),
            Region::Rect(r) => Region::Rect(Rect { min: p2(&r.min), max: p2(&r.max) }),
            Region::Box(b) => Region::Box(Box3 { min: p3(&b.min), max: p3(&b.max) }),
            Region::Triangle(t) => Region::Triangle(t.map(&f)),
            Region::Halfspace3 { a, b, c } => Region::Halfspace3 { a: f(a), b: f(b), c: f(c) },
            Region::VerticalRay3 { apex, up } => Region::VerticalRay3 { apex: p3(apex), up: *up },
        }
    }
}

/// Closed containment of `p` in `r`; errors on a dimension mismatch.
pub fn region_contains<T: Field>(r: &Region<T>, p: &Point<T>) -> Result<bool> {
    r.contains(p)
}

/// Histogram of depths over the distinct containment signatures of `samples`.
pub fn count_faces_by_depth<T: Field>(regions: &[Region<T>], samples: &[Point<T>]) -> Result<BTreeMap<usize, usize>> {
    let mut signatures: BTreeSet<Vec<usize>> = BTreeSet::new();
    for p in samples {
        let mut sig = Vec::new();
        for (i, r) in regions.iter().enumerate() {
            if r.contains(p)? {
                sig.push(i);
            }
        }
        signatures.insert(sig);
    }
    let mut hist = BTreeMap::new();
    for sig in signatures {
        *hist.entry(sig.len()).or_insert(0) += 1;
    }
    Ok(hist)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;
    use proptest::prelude::*;

    fn p2(x: f64, y: f64) -> Point<f64> {
        Point::Planar(Point2::new(x, y))
    }

    fn unit_disk() -> Region<f64> {
        Region::Disk(Disk::new(Point2::new(0.0, 0.0), 1.0).unwrap())
    }

    #[test]
    fn containment_examples() {
        assert!(unit_disk().contains(&p2(0.0, 0.0)).unwrap());
        assert!(unit_disk().contains(&p2(1.0, 0.0)).unwrap());
        let t = Region::Triangle(Triangle::new(Point2::new(0.0, 0.0), Point2::new(1.0, 0.0), Point2::new(0.0, 1.0)).unwrap());
        assert!(!t.contains(&p2(0.7, 0.7)).unwrap());
        assert!(t.contains(&p2(0.5, 0.5)).unwrap());
        assert!(t.contains(&p2(0.0, 0.0)).unwrap());
        assert!(unit_disk().contains(&Point::Spatial(Point3::new(0.0, 0.0, 0.0))).is_err());
    }

    #[test]
    fn invariants_rejected() {
        assert!(Disk::new(Point2::new(0.0, 0.0), 0.0).is_err());
        assert!(Rect::new(Point2::new(1.0, 0.0), Point2::new(0.0, 1.0)).is_err());
        assert!(Triangle::new(Point2::new(0.0, 0.0), Point2::new(1.0, 1.0), Point2::new(2.0, 2.0)).is_err());
    }

    #[test]
    fn fatness_examples() {
        let s3 = 3f64.sqrt();
        let eq = Triangle::<f64>::new(Point2::new(0.0, 0.0), Point2::new(1.0, 0.0), Point2::new(0.5, s3 / 2.0)).unwrap();
        assert!((eq.fatness() - 2.0 / s3).abs() < 1e-12_f64);
        let right = Triangle::<f64>::new(Point2::new(0.0, 0.0), Point2::new(1.0, 0.0), Point2::new(0.0, 1.0)).unwrap();
        assert!((right.fatness() - 2.0).abs() < 1e-12);
        let sliver = Triangle::<f64>::new(Point2::new(0.0, 0.0), Point2::new(1.0, 0.0), Point2::new(0.5, 1e-3)).unwrap();
        assert!((sliver.fatness() - 1000.0).abs() < 1e-6);
        let exact = right.map(|v| Rational::from_float(*v).unwrap());
        assert_eq!(exact.fatness(), Rational::from_integer(2.into()));
    }

    #[test]
    fn face_depths() {
        let a = Region::Disk(Disk::new(Point2::new(0.0, 0.0), 1.0).unwrap());
        let b = Region::Disk(Disk::new(Point2::new(5.0, 0.0), 1.0).unwrap());
        let c = Region::Disk(Disk::new(Point2::new(1.0, 0.0), 1.0).unwrap());
        let samples = vec![p2(0.0, 0.0), p2(5.0, 0.0), p2(10.0, 10.0), p2(0.1, 0.1)];
        let hist = count_faces_by_depth(&[a.clone(), b], &samples).unwrap();
        assert_eq!(hist, BTreeMap::from([(0, 1), (1, 2)]));
        let samples = vec![p2(-0.5, 0.0), p2(0.5, 0.0), p2(1.5, 0.0), p2(10.0, 0.0)];
        let hist = count_faces_by_depth(&[a, c], &samples).unwrap();
        assert_eq!(hist, BTreeMap::from([(0, 1), (1, 2), (2, 1)]));
    }

    proptest! {
        #[test]
        fn fatness_is_similarity_invariant(
            pts in proptest::array::uniform6(-10.0f64..10.0),
            angle in 0.0f64..6.3, scale in 0.1f64..10.0, dx in -5.0f64..5.0, dy in -5.0f64..5.0,
        ) {
            let tri = Triangle::new(Point2::new(pts[0], pts[1]), Point2::new(pts[2], pts[3]), Point2::new(pts[4], pts[5]));
            prop_assume!(tri.is_ok());
            let tri = tri.unwrap();
            prop_assume!(tri.fatness() < 1e4);
            let (s, c) = angle.sin_cos();
            let moved = Triangle {
                v: tri.v.clone().map(|p| Point2::new(scale * (c * p.x - s * p.y) + dx, scale * (s * p.x + c * p.y) + dy)),
            };
            let (a, b) = (tri.fatness(), moved.fatness());
            prop_assert!((a - b).abs() <= 1e-9 * a.max(1.0) * 1e3, "{} vs {}", a, b);
        }
    }
}
