//! Numeric traits shared by the geometric and numerical modules.
//!
//! [`Field`] is what coordinates need: an ordered field with exact sign
//! predicates. Float types answer the predicates with a floating-point filter
//! and fall back to rationals when the filter cannot decide. [`Scalar`] adds
//! the `Float` operations used by the LP and the rounding code.

use std::cmp::Ordering;
use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::Neg;

use num_rational::BigRational;
use num_traits::{Float, Num, ToPrimitive};

/// Arbitrary-precision rational, used for exact predicates and exact lifting.
pub type Rational = BigRational;

pub trait Field: Clone + Debug + PartialOrd + Num + Neg<Output = Self> + Send + Sync + 'static {
    /// Conversion from `f64`; exact for `f64` and rationals, rounding for `f32`.
    fn from_float(v: f64) -> Self;
    fn as_f64(&self) -> f64;
    /// Exact conversion. Panics on non-finite floats.
    fn to_rational(&self) -> Rational;

    /// Sign of the orientation determinant of (a, b, c). `Greater` means
    /// counter-clockwise.
    fn orient2d(a: [&Self; 2], b: [&Self; 2], c: [&Self; 2]) -> Ordering {
        let det = (b[0].clone() - a[0].clone()) * (c[1].clone() - a[1].clone())
            - (b[1].clone() - a[1].clone()) * (c[0].clone() - a[0].clone());
        sign(&det)
    }

    /// Sign of `(px - cx)^2 + (py - cy)^2 - r^2`.
    fn disk_sign(p: [&Self; 2], c: [&Self; 2], r: &Self) -> Ordering {
        let dx = p[0].clone() - c[0].clone();
        let dy = p[1].clone() - c[1].clone();
        sign(&(dx.clone() * dx + dy.clone() * dy - r.clone() * r.clone()))
    }

    /// Sign of `a*px + b*py + c - pz`, i.e. `Greater` when p is strictly
    /// below the plane `z = a x + b y + c`.
    fn plane_sign(p: [&Self; 3], a: &Self, b: &Self, c: &Self) -> Ordering {
        let v = a.clone() * p[0].clone() + b.clone() * p[1].clone() + c.clone() - p[2].clone();
        sign(&v)
    }
}

/// Floating-point scalar for numerical code.
pub trait Scalar: Field + Float + Sum + Display + Default {}

impl Scalar for f32 {}
impl Scalar for f64 {}

fn sign<T: Field>(v: &T) -> Ordering {
    v.partial_cmp(&T::zero()).unwrap_or(Ordering::Equal)
}

fn exact(v: f64) -> Rational {
    Rational::from_float(v).expect("non-finite coordinate")
}

/// Decides the sign of `value` if it exceeds `bound`, otherwise defers to the
/// exact evaluation.
fn filtered(value: f64, bound: f64, exact_sign: impl FnOnce() -> Ordering) -> Ordering {
    if value > bound {
        Ordering::Greater
    } else if value < -bound {
        Ordering::Less
    } else {
        exact_sign()
    }
}

// Generous relative error bound for the few-operation polynomials below.
const FILTER: f64 = 32.0 * f64::EPSILON;

impl Field for f64 {
    fn from_float(v: f64) -> Self {
        v
    }
    fn as_f64(&self) -> f64 {
        *self
    }
    fn to_rational(&self) -> Rational {
        exact(*self)
    }

    fn orient2d(a: [&Self; 2], b: [&Self; 2], c: [&Self; 2]) -> Ordering {
        let det = robust::orient2d(
            robust::Coord { x: *a[0], y: *a[1] },
            robust::Coord { x: *b[0], y: *b[1] },
            robust::Coord { x: *c[0], y: *c[1] },
        );
        det.partial_cmp(&0.0).unwrap_or(Ordering::Equal)
    }

    fn disk_sign(p: [&Self; 2], c: [&Self; 2], r: &Self) -> Ordering {
        let dx = p[0] - c[0];
        let dy = p[1] - c[1];
        let value = dx * dx + dy * dy - r * r;
        let mag = (p[0].abs() + c[0].abs()).powi(2) + (p[1].abs() + c[1].abs()).powi(2) + r * r;
        filtered(value, FILTER * mag, || {
            <Rational as Field>::disk_sign(
                [&exact(*p[0]), &exact(*p[1])],
                [&exact(*c[0]), &exact(*c[1])],
                &exact(*r),
            )
        })
    }

    fn plane_sign(p: [&Self; 3], a: &Self, b: &Self, c: &Self) -> Ordering {
        let value = a * p[0] + b * p[1] + c - p[2];
        let mag = (a * p[0]).abs() + (b * p[1]).abs() + c.abs() + p[2].abs();
        filtered(value, FILTER * mag, || {
            <Rational as Field>::plane_sign(
                [&exact(*p[0]), &exact(*p[1]), &exact(*p[2])],
                &exact(*a),
                &exact(*b),
                &exact(*c),
            )
        })
    }
}

// f32 inputs widen to f64 exactly, so the f64 predicates stay exact.
impl Field for f32 {
    fn from_float(v: f64) -> Self {
        v as f32
    }
    fn as_f64(&self) -> f64 {
        *self as f64
    }
    fn to_rational(&self) -> Rational {
        exact(*self as f64)
    }

    fn orient2d(a: [&Self; 2], b: [&Self; 2], c: [&Self; 2]) -> Ordering {
        let w = |p: [&f32; 2]| [*p[0] as f64, *p[1] as f64];
        let (a, b, c) = (w(a), w(b), w(c));
        <f64 as Field>::orient2d([&a[0], &a[1]], [&b[0], &b[1]], [&c[0], &c[1]])
    }

    fn disk_sign(p: [&Self; 2], c: [&Self; 2], r: &Self) -> Ordering {
        let (px, py, cx, cy, r) = (*p[0] as f64, *p[1] as f64, *c[0] as f64, *c[1] as f64, *r as f64);
        <f64 as Field>::disk_sign([&px, &py], [&cx, &cy], &r)
    }

    fn plane_sign(p: [&Self; 3], a: &Self, b: &Self, c: &Self) -> Ordering {
        let q = [*p[0] as f64, *p[1] as f64, *p[2] as f64];
        <f64 as Field>::plane_sign([&q[0], &q[1], &q[2]], &(*a as f64), &(*b as f64), &(*c as f64))
    }
}

impl Field for Rational {
    fn from_float(v: f64) -> Self {
        exact(v)
    }
    fn as_f64(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
    fn to_rational(&self) -> Rational {
        self.clone()
    }
}
