//! Trace coordinates on the moduli space of cusped hyperbolic tori.
//!
//! A marked punctured torus is described by the traces `(x, y, z)` of a
//! generator pair `A`, `B` and of their product `AB`. Because the commutator
//! is parabolic with trace `-2`, the Fricke relation collapses to the
//! Markoff equation `x² + y² + z² = xyz`.

use std::cmp::Ordering;
use std::fmt;
use std::ops::Mul;

use rug::{Float, Integer};

use crate::error::{Error, Result};

/// Default working mantissa width.
pub const DEFAULT_PRECISION: u32 = 256;
/// Smallest mantissa width accepted for a [`ModuliPoint`].
pub const MIN_PRECISION: u32 = 64;
/// Default relative tolerance on the Markoff residual.
pub const DEFAULT_RTOL: f64 = 1e-12;

/// Scalar type carried through the trace recursion.
///
/// Integer seeds run the recursion exactly; everything else uses MPFR floats
/// at the moduli point's precision.
pub(crate) trait TraceScalar: Clone + Send + Sync {
    /// `a * b - c`
    fn mul_sub(a: &Self, b: &Self, c: &Self) -> Self;
    fn to_float(&self, prec: u32) -> Float;
    fn cmp_float(&self, bound: &Float) -> Ordering;
    fn at_least(&self, other: &Self) -> bool;
}

impl TraceScalar for Integer {
    fn mul_sub(a: &Self, b: &Self, c: &Self) -> Self {
        let mut r = Integer::from(a * b);
        r -= c;
        r
    }

    fn to_float(&self, prec: u32) -> Float {
        Float::with_val(prec, self)
    }

    fn cmp_float(&self, bound: &Float) -> Ordering {
        self.partial_cmp(bound).unwrap_or(Ordering::Greater)
    }

    fn at_least(&self, other: &Self) -> bool {
        self >= other
    }
}

impl TraceScalar for Float {
    fn mul_sub(a: &Self, b: &Self, c: &Self) -> Self {
        Float::with_val(a.prec(), a.mul_sub_ref(b, c))
    }

    fn to_float(&self, prec: u32) -> Float {
        Float::with_val(prec, self)
    }

    fn cmp_float(&self, bound: &Float) -> Ordering {
        self.partial_cmp(bound).unwrap_or(Ordering::Greater)
    }

    fn at_least(&self, other: &Self) -> bool {
        self >= other
    }
}

/// Traces of `A`, `B` and `AB` for a marked generator pair.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceTriple {
    pub x: Float,
    pub y: Float,
    pub z: Float,
}

impl TraceTriple {
    pub fn new(x: Float, y: Float, z: Float) -> Self {
        TraceTriple { x, y, z }
    }

    pub fn from_f64(x: f64, y: f64, z: f64, prec: u32) -> Self {
        TraceTriple {
            x: Float::with_val(prec, x),
            y: Float::with_val(prec, y),
            z: Float::with_val(prec, z),
        }
    }

    pub fn prec(&self) -> u32 {
        self.x.prec().max(self.y.prec()).max(self.z.prec())
    }

    /// `x² + y² + z² - xyz`
    pub fn markoff_residual(&self) -> Float {
        let prec = self.prec();
        let mut r = Float::with_val(prec, self.x.square_ref());
        r += Float::with_val(prec, self.y.square_ref());
        r += Float::with_val(prec, self.z.square_ref());
        r -= self.product();
        r
    }

    /// `|x² + y² + z² - xyz| / (xyz)`
    pub fn relative_residual(&self) -> Float {
        let mut r = self.markoff_residual();
        r.abs_mut();
        r / self.product()
    }

    fn product(&self) -> Float {
        let xy = Float::with_val(self.prec(), &self.x * &self.y);
        xy * &self.z
    }

    pub fn min(&self) -> &Float {
        let mut m = &self.x;
        if self.y < *m {
            m = &self.y;
        }
        if self.z < *m {
            m = &self.z;
        }
        m
    }

    pub fn to_array(&self) -> [Float; 3] {
        [self.x.clone(), self.y.clone(), self.z.clone()]
    }
}

impl fmt::Display for TraceTriple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({}, {}, {})",
            self.x.to_f64(),
            self.y.to_f64(),
            self.z.to_f64()
        )
    }
}

/// A validated point of moduli space in trace coordinates.
#[derive(Debug, Clone)]
pub struct ModuliPoint {
    triple: TraceTriple,
    exact: Option<[Integer; 3]>,
    precision_bits: u32,
}

pub(crate) enum Seeds<'a> {
    Exact(&'a [Integer; 3]),
    Real([Float; 3]),
}

impl ModuliPoint {
    /// The modular torus, traces `(3, 3, 3)`.
    ///
    /// It is generated by `[[1, 1], [1, 2]]` and `[[1, -1], [-1, 2]]`; see
    /// [`Mat2::modular_generators`].
    pub fn modular(precision_bits: u32) -> Self {
        let three = Integer::from(3);
        ModuliPoint::from_integers(three.clone(), three.clone(), three, precision_bits)
            .expect("(3, 3, 3) is a valid Markoff triple")
    }

    pub fn from_integers(x: Integer, y: Integer, z: Integer, precision_bits: u32) -> Result<Self> {
        let f = |v: &Integer| Float::with_val(precision_bits.max(MIN_PRECISION), v);
        validate_triple(&f(&x), &f(&y), &f(&z), DEFAULT_RTOL, precision_bits)
    }

    pub fn from_i64(x: i64, y: i64, z: i64, precision_bits: u32) -> Result<Self> {
        ModuliPoint::from_integers(x.into(), y.into(), z.into(), precision_bits)
    }

    pub fn from_f64(x: f64, y: f64, z: f64, precision_bits: u32) -> Result<Self> {
        let t = TraceTriple::from_f64(x, y, z, precision_bits.max(MIN_PRECISION));
        validate_triple(&t.x, &t.y, &t.z, DEFAULT_RTOL, precision_bits)
    }

    pub fn triple(&self) -> &TraceTriple {
        &self.triple
    }

    pub fn precision_bits(&self) -> u32 {
        self.precision_bits
    }

    /// The integer triple when the point has exact integer traces.
    pub fn exact_triple(&self) -> Option<&[Integer; 3]> {
        self.exact.as_ref()
    }

    pub(crate) fn seeds(&self) -> Seeds<'_> {
        match &self.exact {
            Some(e) => Seeds::Exact(e),
            None => Seeds::Real(self.triple.to_array()),
        }
    }
}

/// Checks hyperbolicity and the Markoff relation, returning a moduli point.
///
/// Hyperbolicity is checked first, so `(2, 3, 3)` reports
/// [`Error::NonHyperbolicTrace`] even though it also violates the relation.
/// Triples of integers satisfying the relation exactly are flagged for exact
/// integer recursion.
pub fn validate_triple(
    x: &Float,
    y: &Float,
    z: &Float,
    rtol: f64,
    precision_bits: u32,
) -> Result<ModuliPoint> {
    if precision_bits < MIN_PRECISION {
        return Err(Error::InvalidArgument(format!(
            "precision_bits must be at least {MIN_PRECISION}, got {precision_bits}"
        )));
    }
    if rtol.is_nan() || rtol < 0.0 {
        return Err(Error::InvalidArgument("rtol must be non-negative".into()));
    }
    for v in [x, y, z] {
        if !v.is_finite() {
            return Err(Error::InvalidArgument(
                "trace coordinates must be finite".into(),
            ));
        }
    }
    for v in [x, y, z] {
        if *v <= 2 {
            return Err(Error::NonHyperbolicTrace { value: v.to_f64() });
        }
    }
    let triple = TraceTriple::new(
        Float::with_val(precision_bits, x),
        Float::with_val(precision_bits, y),
        Float::with_val(precision_bits, z),
    );

    let ints = [x, y, z].map(|v| v.to_integer().filter(|_| v.is_integer()));
    if let [Some(a), Some(b), Some(c)] = ints {
        let lhs = Integer::from(&a * &a) + Integer::from(&b * &b) + Integer::from(&c * &c);
        let rhs = Integer::from(&a * &b) * &c;
        if lhs == rhs {
            return Ok(ModuliPoint {
                triple,
                exact: Some([a, b, c]),
                precision_bits,
            });
        }
    }

    let residual = triple.relative_residual();
    if residual > rtol {
        return Err(Error::MarkoffViolation {
            residual: residual.to_f64(),
            rtol,
        });
    }
    Ok(ModuliPoint {
        triple,
        exact: None,
        precision_bits,
    })
}

/// A hyperbolic length. Zero only in the parabolic limit.
#[derive(Debug, Clone, PartialEq, PartialOrd)]
pub struct LengthValue(Float);

impl LengthValue {
    pub fn new(value: Float) -> Result<Self> {
        if value.is_nan() || value < 0 {
            return Err(Error::InvalidArgument("length must be non-negative".into()));
        }
        Ok(LengthValue(value))
    }

    pub fn value(&self) -> &Float {
        &self.0
    }

    pub fn into_inner(self) -> Float {
        self.0
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64()
    }
}

impl fmt::Display for LengthValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0.to_f64())
    }
}

/// `2·arccosh(t/2)`, the translation length of an element with trace `t`.
pub fn trace_to_length(t: &Float) -> Result<LengthValue> {
    if t.is_nan() || *t < 2 {
        return Err(Error::TraceTooSmall { value: t.to_f64() });
    }
    let half = Float::with_val(t.prec(), t / 2u32);
    let mut l = half.acosh();
    l *= 2u32;
    Ok(LengthValue(l))
}

/// `2·cosh(l/2)`
pub fn length_to_trace(l: &LengthValue) -> Float {
    let half = Float::with_val(l.0.prec(), &l.0 / 2u32);
    half.cosh() * 2u32
}

/// A real 2×2 matrix of determinant one.
#[derive(Debug, Clone, PartialEq)]
pub struct Mat2 {
    pub a: Float,
    pub b: Float,
    pub c: Float,
    pub d: Float,
}

impl Mat2 {
    /// Builds a matrix, rejecting determinants further than `rtol` from 1.
    pub fn new(a: Float, b: Float, c: Float, d: Float, rtol: f64) -> Result<Self> {
        let m = Mat2 { a, b, c, d };
        let mut err = m.det() - 1u32;
        err.abs_mut();
        if err > rtol {
            return Err(Error::NotUnimodular {
                det: m.det().to_f64(),
            });
        }
        Ok(m)
    }

    pub fn from_f64(entries: [f64; 4], prec: u32) -> Result<Self> {
        let f = |v: f64| Float::with_val(prec, v);
        Mat2::new(
            f(entries[0]),
            f(entries[1]),
            f(entries[2]),
            f(entries[3]),
            1e-12,
        )
    }

    pub fn identity(prec: u32) -> Self {
        Mat2 {
            a: Float::with_val(prec, 1),
            b: Float::new(prec),
            c: Float::new(prec),
            d: Float::with_val(prec, 1),
        }
    }

    /// The generators `[[1, 1], [1, 2]]` and `[[1, -1], [-1, 2]]` of the
    /// modular torus group.
    pub fn modular_generators(prec: u32) -> (Mat2, Mat2) {
        let a = Mat2::from_f64([1.0, 1.0, 1.0, 2.0], prec).expect("det 1");
        let b = Mat2::from_f64([1.0, -1.0, -1.0, 2.0], prec).expect("det 1");
        (a, b)
    }

    pub fn prec(&self) -> u32 {
        self.a.prec()
    }

    pub fn trace(&self) -> Float {
        Float::with_val(self.prec(), &self.a + &self.d)
    }

    pub fn det(&self) -> Float {
        let ad = Float::with_val(self.prec(), &self.a * &self.d);
        let bc = Float::with_val(self.prec(), &self.b * &self.c);
        ad - bc
    }

    /// Inverse of a determinant-one matrix (the adjugate).
    pub fn inverse(&self) -> Mat2 {
        Mat2 {
            a: self.d.clone(),
            b: -self.b.clone(),
            c: -self.c.clone(),
            d: self.a.clone(),
        }
    }

    pub fn neg(&self) -> Mat2 {
        Mat2 {
            a: -self.a.clone(),
            b: -self.b.clone(),
            c: -self.c.clone(),
            d: -self.d.clone(),
        }
    }
}

impl Mul for &Mat2 {
    type Output = Mat2;

    fn mul(self, rhs: &Mat2) -> Mat2 {
        let p = self.prec().max(rhs.prec());
        let dot = |x1: &Float, y1: &Float, x2: &Float, y2: &Float| {
            let mut r = Float::with_val(p, x1 * y1);
            r += x2 * y2;
            r
        };
        Mat2 {
            a: dot(&self.a, &rhs.a, &self.b, &rhs.c),
            b: dot(&self.a, &rhs.b, &self.b, &rhs.d),
            c: dot(&self.c, &rhs.a, &self.d, &rhs.c),
            d: dot(&self.c, &rhs.b, &self.d, &rhs.d),
        }
    }
}

/// `tr(A B A⁻¹ B⁻¹) + 2`, which vanishes exactly when the commutator is the
/// parabolic `-2` class.
pub fn fricke_residual(a: &Mat2, b: &Mat2) -> Float {
    let ab = a * b;
    let comm = &(&ab * &a.inverse()) * &b.inverse();
    comm.trace() + 2u32
}

/// Lifts a moduli point to an explicit generator pair.
///
/// `A = diag(λ, 1/λ)` with `λ > 1`, `λ + 1/λ = x`, and
/// `B = [[s, 1], [s·d - 1, d]]` with `s = (z - y/λ)/(λ - 1/λ)`, `d = y - s`.
pub fn lift_to_matrices(m: &ModuliPoint) -> Result<(Mat2, Mat2)> {
    let prec = m.precision_bits();
    let TraceTriple { x, y, z } = m.triple();
    let disc = Float::with_val(prec, x.square_ref()) - 4u32;
    if disc <= 0 {
        return Err(Error::DegenerateLift);
    }
    let root = disc.sqrt();
    let lambda = Float::with_val(prec, x + &root) / 2u32;
    let inv = Float::with_val(prec, 1u32 / &lambda);
    let spread = Float::with_val(prec, &lambda - &inv);
    if spread.is_zero() {
        return Err(Error::DegenerateLift);
    }
    let y_over = Float::with_val(prec, y / &lambda);
    let s = Float::with_val(prec, z - &y_over) / &spread;
    let d = Float::with_val(prec, y - &s);
    let c = Float::with_val(prec, &s * &d) - 1u32;
    let a_mat = Mat2 {
        a: lambda,
        b: Float::new(prec),
        c: Float::new(prec),
        d: inv,
    };
    let b_mat = Mat2 {
        a: s,
        b: Float::with_val(prec, 1),
        c,
        d,
    };
    Ok((a_mat, b_mat))
}

/// Which neighbouring triple to move to in the Markoff tree.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Left,
    Right,
}

/// One step down the Markoff tree.
///
/// `Left` maps `(x, y, z)` to `(x, z, xz - y)`, `Right` to `(z, y, yz - x)`.
pub fn markoff_child(t: &TraceTriple, which: Branch) -> TraceTriple {
    let TraceTriple { x, y, z } = t;
    match which {
        Branch::Left => TraceTriple::new(
            x.clone(),
            z.clone(),
            <Float as TraceScalar>::mul_sub(x, z, y),
        ),
        Branch::Right => TraceTriple::new(
            z.clone(),
            y.clone(),
            <Float as TraceScalar>::mul_sub(y, z, x),
        ),
    }
}

/// Integer version of [`markoff_child`].
pub fn markoff_child_exact(t: &[Integer; 3], which: Branch) -> [Integer; 3] {
    let [x, y, z] = t;
    match which {
        Branch::Left => [
            x.clone(),
            z.clone(),
            <Integer as TraceScalar>::mul_sub(x, z, y),
        ],
        Branch::Right => [
            z.clone(),
            y.clone(),
            <Integer as TraceScalar>::mul_sub(y, z, x),
        ],
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(v: f64) -> Float {
        Float::with_val(DEFAULT_PRECISION, v)
    }

    #[test]
    fn validate_accepts_modular() {
        let m = validate_triple(&f(3.0), &f(3.0), &f(3.0), DEFAULT_RTOL, 256).unwrap();
        assert!(m.exact_triple().is_some());
        assert!(m.triple().markoff_residual().is_zero());
    }

    #[test]
    fn validate_rejects_bad_triples() {
        let err = validate_triple(&f(3.0), &f(3.0), &f(5.0), DEFAULT_RTOL, 256).unwrap_err();
        assert_eq!(err.kind(), "MarkoffViolation");
        let err = validate_triple(&f(2.0), &f(6.0), &f(6.0), DEFAULT_RTOL, 256).unwrap_err();
        assert_eq!(err.kind(), "NonHyperbolicTrace");
        let err = validate_triple(&f(2.0), &f(3.0), &f(3.0), DEFAULT_RTOL, 256).unwrap_err();
        assert_eq!(err.kind(), "NonHyperbolicTrace");
        let err = validate_triple(&f(3.0), &f(3.0), &f(3.0), DEFAULT_RTOL, 32).unwrap_err();
        assert_eq!(err.kind(), "InvalidArgument");
    }

    #[test]
    fn validate_accepts_rounded_real_triple() {
        // z from the quadratic in double precision
        let (x, y) = (3.5f64, 4.25f64);
        let z = (x * y + (x * x * y * y - 4.0 * x * x - 4.0 * y * y).sqrt()) / 2.0;
        let m = validate_triple(&f(x), &f(y), &f(z), DEFAULT_RTOL, 256).unwrap();
        assert!(m.exact_triple().is_none());
    }

    #[test]
    fn fricke_residual_examples() {
        let (a, b) = Mat2::modular_generators(256);
        assert!(fricke_residual(&a, &b).is_zero());
        let id = Mat2::identity(256);
        assert_eq!(fricke_residual(&id, &id), 4);
    }

    #[test]
    fn trace_length_examples() {
        assert!(trace_to_length(&f(2.0)).unwrap().value().is_zero());
        // 2·arccosh(3/2) = 2·ln((3 + √5)/2), 2·arccosh(3) = 2·ln(3 + 2√2)
        let l3 = trace_to_length(&f(3.0)).unwrap().to_f64();
        assert!((l3 - 2.0 * ((3.0 + 5f64.sqrt()) / 2.0).ln()).abs() < 1e-15);
        assert!((l3 - 1.924_847_300_2).abs() < 1e-10);
        let l6 = trace_to_length(&f(6.0)).unwrap().to_f64();
        assert!((l6 - 2.0 * (3.0 + 8f64.sqrt()).ln()).abs() < 1e-14);
        assert!((l6 - 3.525_494_348_0).abs() < 1e-10);
        assert_eq!(
            trace_to_length(&f(1.5)).unwrap_err().kind(),
            "TraceTooSmall"
        );
    }

    #[test]
    fn length_to_trace_examples() {
        let zero = LengthValue::new(f(0.0)).unwrap();
        assert_eq!(length_to_trace(&zero), 2);
        let l = LengthValue::new(f(1.924_847_300_2)).unwrap();
        let t = length_to_trace(&l);
        assert!((t.to_f64() - 3.0).abs() < 1e-9);
    }

    #[test]
    fn lift_reproduces_traces() {
        for (x, y, z) in [(3, 3, 3), (3, 3, 6), (3, 6, 15)] {
            let m = ModuliPoint::from_integers(x.into(), y.into(), z.into(), 256).unwrap();
            let (a, b) = lift_to_matrices(&m).unwrap();
            let ab = &a * &b;
            assert!((a.trace().to_f64() - x as f64).abs() < 1e-12);
            assert!((b.trace().to_f64() - y as f64).abs() < 1e-12);
            assert!((ab.trace().to_f64() - z as f64).abs() < 1e-12 * z as f64);
            assert!((a.det().to_f64() - 1.0).abs() < 1e-12);
            assert!((b.det().to_f64() - 1.0).abs() < 1e-12);
            assert!(fricke_residual(&a, &b).to_f64().abs() < 1e-12);
            assert!(a.a > 1);
        }
    }

    #[test]
    fn markoff_children() {
        let t = |x: u32, y: u32, z: u32| [Integer::from(x), Integer::from(y), Integer::from(z)];
        assert_eq!(markoff_child_exact(&t(3, 3, 3), Branch::Left), t(3, 3, 6));
        assert_eq!(markoff_child_exact(&t(3, 3, 6), Branch::Left), t(3, 6, 15));
        assert_eq!(
            markoff_child_exact(&t(3, 6, 15), Branch::Right),
            t(15, 6, 87)
        );

        let r = markoff_child(&TraceTriple::from_f64(3.0, 6.0, 15.0, 256), Branch::Right);
        assert_eq!(r, TraceTriple::from_f64(15.0, 6.0, 87.0, 256));
        assert!(r.markoff_residual().is_zero());
    }

    #[test]
    fn mat_inverse_and_det() {
        let (a, _) = Mat2::modular_generators(128);
        let id = &a * &a.inverse();
        assert_eq!(id, Mat2::identity(128));
        assert_eq!(
            Mat2::from_f64([1.0, 2.0, 3.0, 4.0], 128)
                .unwrap_err()
                .kind(),
            "NotUnimodular"
        );
    }
}
