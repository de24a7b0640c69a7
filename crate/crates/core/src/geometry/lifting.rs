//! Paraboloid lifting of disks and points, and point/plane duality.
//!
//! Run on a rational instance (see [`GeometricInstance::to_exact`]) every
//! step is exact, so incidences survive both stages unchanged.

use std::cmp::Ordering;

use super::{Direction, GeometricInstance, Point, Point2, Point3, Region};
use crate::error::{Error, Result};
use crate::scalar::Field;

/// Both stages of the transform. `lifted` keeps the input's direction with
/// 3D points and halfspaces; `dual` swaps the roles of points and regions.
#[derive(Clone, Debug)]
pub struct Lifted<T> {
    pub lifted: GeometricInstance<T>,
    pub dual: GeometricInstance<T>,
}

impl<T: Field> Lifted<T> {
    /// Upward rays from the dual points. The ray from point `i` crosses dual
    /// plane `j` exactly when dual region `j` contains point `i`.
    pub fn dual_rays(&self) -> Vec<Region<T>> {
        self.dual
            .points
            .iter()
            .filter_map(|p| p.spatial().cloned())
            .map(|apex| Region::VerticalRay3 { apex, up: true })
            .collect()
    }
}

pub fn lift_point<T: Field>(p: &Point2<T>) -> Point3<T> {
    let z = p.x.clone() * p.x.clone() + p.y.clone() * p.y.clone();
    Point3::new(p.x.clone(), p.y.clone(), z)
}

/// The plane `z = a x + b y + c` maps to the point `(a, b, -c)`.
pub fn dual_point_of_plane<T: Field>(a: &T, b: &T, c: &T) -> Point3<T> {
    Point3::new(a.clone(), b.clone(), -c.clone())
}

/// The point `(a, b, c)` maps to the plane `z = a x + b y - c`, returned as
/// its coefficients.
pub fn dual_plane_of_point<T: Field>(p: &Point3<T>) -> (T, T, T) {
    (p.x.clone(), p.y.clone(), -p.z.clone())
}

/// Whether the vertical ray from `apex` meets the plane `z = a x + b y + c`.
pub fn ray_crosses_plane<T: Field>(apex: &Point3<T>, up: bool, a: &T, b: &T, c: &T) -> bool {
    let s = T::plane_sign([&apex.x, &apex.y, &apex.z], a, b, c);
    if up {
        s != Ordering::Less
    } else {
        s != Ordering::Greater
    }
}

pub fn lift_and_dualize<T: Field>(inst: &GeometricInstance<T>) -> Result<Lifted<T>> {
    inst.validate()?;
    let mut points = Vec::with_capacity(inst.points.len());
    for p in &inst.points {
        let q = p.planar().ok_or_else(|| Error::InvalidInstance("lifting needs planar points".into()))?;
        points.push(lift_point(q));
    }
    let mut planes = Vec::with_capacity(inst.regions.len());
    for r in &inst.regions {
        let Region::Disk(d) = r else {
            return Err(Error::InvalidInstance("lifting needs disks only".into()));
        };
        let two = T::one() + T::one();
        let (cx, cy, r) = (d.center.x.clone(), d.center.y.clone(), d.radius.clone());
        let c = r.clone() * r - cx.clone() * cx.clone() - cy.clone() * cy.clone();
        planes.push((two.clone() * cx, two * cy, c));
    }
    let lifted = GeometricInstance {
        direction: inst.direction,
        points: points.iter().cloned().map(Point::Spatial).collect(),
        point_values: inst.point_values.clone(),
        regions: planes.iter().map(|(a, b, c)| Region::Halfspace3 { a: a.clone(), b: b.clone(), c: c.clone() }).collect(),
        region_values: inst.region_values.clone(),
        class: inst.class,
    };
    let dual = GeometricInstance {
        direction: match inst.direction {
            Direction::PackRegions => Direction::PackPoints,
            Direction::PackPoints => Direction::PackRegions,
        },
        points: planes.iter().map(|(a, b, c)| Point::Spatial(dual_point_of_plane(a, b, c))).collect(),
        point_values: inst.region_values.clone(),
        regions: points
            .iter()
            .map(|q| {
                let (a, b, c) = dual_plane_of_point(q);
                Region::Halfspace3 { a, b, c }
            })
            .collect(),
        region_values: inst.point_values.clone(),
        class: inst.class,
    };
    Ok(Lifted { lifted, dual })
}

#[cfg(test)]
mod tests {
    use super::super::{ClassTag, Disk};
    use super::*;
    use crate::scalar::Rational;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn single(p: (f64, f64), c: (f64, f64), r: f64) -> GeometricInstance<f64> {
        GeometricInstance::new(
            Direction::PackPoints,
            vec![Point::Planar(Point2::new(p.0, p.1))],
            vec![1.0],
            vec![Region::Disk(Disk::new(Point2::new(c.0, c.1), r).unwrap())],
            vec![1.0],
            ClassTag::Disk,
        )
        .unwrap()
    }

    #[test]
    fn origin_in_unit_disk() {
        let l = lift_and_dualize(&single((0.0, 0.0), (0.0, 0.0), 1.0)).unwrap();
        assert_eq!(l.lifted.points[0], Point::Spatial(Point3::new(0.0, 0.0, 0.0)));
        assert_eq!(l.lifted.regions[0], Region::Halfspace3 { a: 0.0, b: 0.0, c: 1.0 });
        assert!(l.lifted.regions[0].contains(&l.lifted.points[0]).unwrap());
        assert_eq!(l.dual.direction, Direction::PackRegions);
    }

    #[test]
    fn duality_formula() {
        assert_eq!(dual_plane_of_point(&Point3::new(1.0, 2.0, 3.0)), (1.0, 2.0, -3.0));
        assert_eq!(dual_point_of_plane(&1.0, &2.0, &-3.0), Point3::new(1.0, 2.0, 3.0));
    }

    #[test]
    fn boundary_point_stays_on_plane() {
        let l = lift_and_dualize(&single((3.0, 4.0), (0.0, 0.0), 5.0)).unwrap();
        let Point::Spatial(q) = &l.lifted.points[0] else { panic!() };
        let Region::Halfspace3 { a, b, c } = &l.lifted.regions[0] else { panic!() };
        assert_eq!(<f64 as Field>::plane_sign([&q.x, &q.y, &q.z], a, b, c), Ordering::Equal);
        assert!(l.dual.regions[0].contains(&l.dual.points[0]).unwrap());
    }

    #[test]
    fn rejects_non_disks() {
        let mut inst = single((0.0, 0.0), (0.0, 0.0), 1.0);
        inst.regions[0] = Region::Halfspace3 { a: 0.0, b: 0.0, c: 0.0 };
        assert!(lift_and_dualize(&inst).is_err());
    }

    #[test]
    fn exact_incidence_is_preserved() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..2_000 {
            let inst = single(
                (rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)),
                (rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)),
                rng.gen_range(0.1..2.0),
            );
            let want = inst.regions[0].contains(&inst.points[0]).unwrap();
            let l = lift_and_dualize::<Rational>(&inst.to_exact()).unwrap();
            assert_eq!(l.lifted.regions[0].contains(&l.lifted.points[0]).unwrap(), want);
            assert_eq!(l.dual.regions[0].contains(&l.dual.points[0]).unwrap(), want);
            let Region::Halfspace3 { a, b, c } = &l.dual.regions[0] else { panic!() };
            let Region::VerticalRay3 { apex, up } = &l.dual_rays()[0] else { panic!() };
            assert_eq!(ray_crosses_plane(apex, *up, a, b, c), want);
        }
    }
}
