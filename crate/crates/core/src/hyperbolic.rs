//! Axes of hyperbolic isometries of the upper half-plane and the angles
//! between them.
//!
//! Ideal points are kept in homogeneous form `(n, d)` so that `∞ = (1, 0)`
//! needs no special casing in cross-ratios.

use std::fmt;

use rug::Float;

use crate::error::{Error, Result};
use crate::norm::length_of_trace;
use crate::trace::{lift_to_matrices, LengthValue, Mat2, ModuliPoint};

/// A point of `ℝ ∪ {∞}`.
#[derive(Debug, Clone, PartialEq)]
pub enum ExtendedReal {
    Finite(Float),
    Infinity,
}

impl ExtendedReal {
    pub fn to_f64(&self) -> f64 {
        match self {
            ExtendedReal::Finite(v) => v.to_f64(),
            ExtendedReal::Infinity => f64::INFINITY,
        }
    }

    fn from_homogeneous(h: &Homogeneous) -> Self {
        if h.d.is_zero() {
            ExtendedReal::Infinity
        } else {
            ExtendedReal::Finite(Float::with_val(h.n.prec(), &h.n / &h.d))
        }
    }
}

impl fmt::Display for ExtendedReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtendedReal::Finite(v) => write!(f, "{}", v.to_f64()),
            ExtendedReal::Infinity => f.write_str("∞"),
        }
    }
}

#[derive(Debug, Clone)]
struct Homogeneous {
    n: Float,
    d: Float,
}

impl Homogeneous {
    fn det(&self, o: &Homogeneous) -> Float {
        let prec = self.n.prec();
        Float::with_val(prec, &self.n * &o.d) - Float::with_val(prec, &o.n * &self.d)
    }
}

/// The invariant geodesic of a hyperbolic isometry.
#[derive(Debug, Clone)]
pub struct GeodesicAxis {
    /// Repelling fixed point.
    pub fixed_minus: ExtendedReal,
    /// Attracting fixed point.
    pub fixed_plus: ExtendedReal,
    pub translation_length: LengthValue,
    minus: Homogeneous,
    plus: Homogeneous,
}

impl GeodesicAxis {
    /// Whether `re + i·im` lies on the axis, to absolute tolerance `tol`.
    pub fn contains(&self, re: &Float, im: &Float, tol: f64) -> bool {
        let prec = re.prec();
        match (&self.fixed_minus, &self.fixed_plus) {
            (ExtendedReal::Finite(e), ExtendedReal::Infinity)
            | (ExtendedReal::Infinity, ExtendedReal::Finite(e)) => {
                Float::with_val(prec, re - e).abs() <= tol
            }
            (ExtendedReal::Finite(e1), ExtendedReal::Finite(e2)) => {
                let center = Float::with_val(prec, e1 + e2) / 2u32;
                let radius = Float::with_val(prec, e1 - e2).abs() / 2u32;
                let dx = Float::with_val(prec, re - &center);
                let dist = Float::with_val(prec, dx.hypot_ref(im));
                (dist - radius).abs() <= tol
            }
            (ExtendedReal::Infinity, ExtendedReal::Infinity) => false,
        }
    }
}

/// Fixed points and translation length of a hyperbolic matrix.
///
/// The fixed points of `w ↦ (aw + b)/(cw + d)` are the eigenvectors of the
/// matrix; the attracting one belongs to the eigenvalue of larger modulus.
pub fn axis_of(mat: &Mat2) -> Result<GeodesicAxis> {
    let prec = mat.prec();
    let tr = mat.trace();
    if Float::with_val(prec, tr.abs_ref()) <= 2 {
        return Err(Error::NotHyperbolic { trace: tr.to_f64() });
    }
    let m = if tr < 0 { mat.neg() } else { mat.clone() };
    let tr = m.trace();
    let disc = Float::with_val(prec, tr.square_ref()) - 4u32;
    let root = disc.sqrt();
    let mu_plus = Float::with_val(prec, &tr + &root) / 2u32;
    let mu_minus = Float::with_val(prec, &tr - &root) / 2u32;
    let eigen = |mu: &Float| {
        // (b, μ - a) and (μ - d, c) span the same line; keep the larger one.
        let v1 = Homogeneous {
            n: m.b.clone(),
            d: Float::with_val(prec, mu - &m.a),
        };
        let v2 = Homogeneous {
            n: Float::with_val(prec, mu - &m.d),
            d: m.c.clone(),
        };
        let size = |h: &Homogeneous| {
            let a = Float::with_val(prec, h.n.abs_ref());
            let b = Float::with_val(prec, h.d.abs_ref());
            if a > b {
                a
            } else {
                b
            }
        };
        if size(&v1) >= size(&v2) {
            v1
        } else {
            v2
        }
    };
    let plus = eigen(&mu_plus);
    let minus = eigen(&mu_minus);
    Ok(GeodesicAxis {
        fixed_minus: ExtendedReal::from_homogeneous(&minus),
        fixed_plus: ExtendedReal::from_homogeneous(&plus),
        translation_length: LengthValue::new(length_of_trace(&tr))?,
        minus,
        plus,
    })
}

/// Angle between two crossing axes and the point where they cross.
#[derive(Debug, Clone)]
pub struct IntersectionAngle {
    /// In `(0, π)`, measured between the axes oriented from repelling to
    /// attracting fixed point.
    pub theta: Float,
    pub cos_theta: Float,
    pub sin_theta: Float,
    /// `(re, im)` with `im > 0`.
    pub crossing_point: (Float, Float),
}

/// Angle at which the axes of `m1` and `m2` cross.
///
/// With the cross-ratio `X = [a₁, r₂; r₁, a₂]` of the ideal endpoints, the
/// axes cross exactly when `X < 0`, and then `cos θ = (1 + X)/(X - 1)`.
/// With positive traces this agrees with
/// `cos θ = (tr(M₁M₂) - tr M₁·tr M₂/2) / (2 sinh(ℓ₁/2) sinh(ℓ₂/2))`.
pub fn intersection_angle(m1: &Mat2, m2: &Mat2) -> Result<IntersectionAngle> {
    let ax1 = axis_of(m1)?;
    let ax2 = axis_of(m2)?;
    let prec = m1.prec().max(m2.prec());
    let (r1, a1) = (&ax1.minus, &ax1.plus);
    let (r2, a2) = (&ax2.minus, &ax2.plus);
    let num = a1.det(r2) * r1.det(a2);
    let den = a1.det(a2) * r1.det(r2);
    if den.is_zero() {
        return Err(Error::DisjointAxes);
    }
    let x = num / den;
    if x >= 0 {
        return Err(Error::DisjointAxes);
    }
    let one_minus = Float::with_val(prec, 1u32 - &x);
    let cos_theta = Float::with_val(prec, &x + 1u32) / Float::with_val(prec, -&one_minus);
    let sin_theta = Float::with_val(prec, -&x).sqrt() * 2u32 / &one_minus;
    let theta = Float::with_val(prec, sin_theta.atan2_ref(&cos_theta));

    // Normalise with G: r₁ ↦ 0, a₁ ↦ ∞, preserving orientation.
    let mut g = [
        r1.d.clone(),
        Float::with_val(prec, -&r1.n),
        a1.d.clone(),
        Float::with_val(prec, -&a1.n),
    ];
    let mut det_g = Float::with_val(prec, &g[0] * &g[3]) - Float::with_val(prec, &g[1] * &g[2]);
    if det_g < 0 {
        g[2] = Float::with_val(prec, -&g[2]);
        g[3] = Float::with_val(prec, -&g[3]);
        det_g = -det_g;
    }
    let apply = |h: &Homogeneous| {
        let n = Float::with_val(prec, &g[0] * &h.n) + Float::with_val(prec, &g[1] * &h.d);
        let d = Float::with_val(prec, &g[2] * &h.n) + Float::with_val(prec, &g[3] * &h.d);
        (n, d)
    };
    // p'·q' for the images of r₂, a₂; negative since the axes cross
    let (pn, pd) = apply(r2);
    let (qn, qd) = apply(a2);
    let prod = Float::with_val(prec, &pn * &qn) / Float::with_val(prec, &pd * &qd);
    let h = Float::with_val(prec, -prod).sqrt();
    // G⁻¹ = [[g3, -g1], [-g2, g0]] / det applied to i·h
    let (alpha, beta, gamma, delta) = (
        &g[3],
        Float::with_val(prec, -&g[1]),
        Float::with_val(prec, -&g[2]),
        &g[0],
    );
    let h2 = Float::with_val(prec, h.square_ref());
    let den =
        Float::with_val(prec, delta.square_ref()) + Float::with_val(prec, gamma.square_ref()) * &h2;
    let re =
        (Float::with_val(prec, &beta * delta) + Float::with_val(prec, alpha * &gamma) * &h2) / &den;
    let im = det_g * h / den;

    Ok(IntersectionAngle {
        theta,
        cos_theta,
        sin_theta,
        crossing_point: (re, im),
    })
}

/// `cos θ` from traces alone:
/// `(tr(M₁M₂) - tr M₁·tr M₂/2) / (2 sinh(ℓ₁/2) sinh(ℓ₂/2))`.
pub fn trace_angle_cosine(m1: &Mat2, m2: &Mat2) -> Result<Float> {
    let prec = m1.prec().max(m2.prec());
    let (t1, t2) = (m1.trace(), m2.trace());
    for t in [&t1, &t2] {
        if Float::with_val(prec, t.abs_ref()) <= 2 {
            return Err(Error::NotHyperbolic { trace: t.to_f64() });
        }
    }
    let t12 = (m1 * m2).trace();
    let num = t12 - Float::with_val(prec, &t1 * &t2) / 2u32;
    // 2 sinh(ℓ/2) = √(t² - 4)
    let s1 = (Float::with_val(prec, t1.square_ref()) - 4u32).sqrt();
    let s2 = (Float::with_val(prec, t2.square_ref()) - 4u32).sqrt();
    Ok(num * 2u32 / (s1 * s2))
}

/// Both forms of the identity `sinh·sinh·sin θ = 1` at a moduli point.
#[derive(Debug, Clone)]
pub struct SinIdentityReport {
    /// `|sinh(ℓα/2)·sinh(ℓβ/2)·sin θ - 1|`
    pub half_length_residual: Float,
    /// `|sinh(ℓα)·sinh(ℓβ)·sin θ - 1|`; not expected to vanish.
    pub full_length_residual: Float,
    pub theta: Float,
}

/// Evaluates the identity on the generator axes of the lifted pair.
pub fn sin_identity_report(m: &ModuliPoint) -> Result<SinIdentityReport> {
    let (a, b) = lift_to_matrices(m)?;
    let ang = intersection_angle(&a, &b)?;
    let prec = m.precision_bits();
    let la = axis_of(&a)?.translation_length.into_inner();
    let lb = axis_of(&b)?.translation_length.into_inner();
    let residual = |sa: Float, sb: Float| {
        let mut r = sa * sb * &ang.sin_theta - 1u32;
        r.abs_mut();
        r
    };
    let half = residual(
        Float::with_val(prec, &la / 2u32).sinh(),
        Float::with_val(prec, &lb / 2u32).sinh(),
    );
    let full = residual(la.sinh(), lb.sinh());
    Ok(SinIdentityReport {
        half_length_residual: half,
        full_length_residual: full,
        theta: ang.theta,
    })
}

/// `|sinh(ℓα/2)·sinh(ℓβ/2)·sin θ - 1|` for the generators of `m`.
pub fn sin_identity_residual(m: &ModuliPoint) -> Result<Float> {
    Ok(sin_identity_report(m)?.half_length_residual)
}

#[cfg(test)]
mod tests {
    use super::*;

    const PREC: u32 = 256;

    fn mat(e: [f64; 4]) -> Mat2 {
        Mat2::from_f64(e, PREC).unwrap()
    }

    #[test]
    fn diagonal_axis() {
        let ax = axis_of(&mat([4.0, 0.0, 0.0, 0.25])).unwrap();
        assert_eq!(ax.fixed_plus, ExtendedReal::Infinity);
        assert_eq!(ax.fixed_minus.to_f64(), 0.0);
        assert!((ax.translation_length.to_f64() - 2.0 * 4f64.ln()).abs() < 1e-14);
        let ax = axis_of(&mat([0.25, 0.0, 0.0, 4.0])).unwrap();
        assert_eq!(ax.fixed_minus, ExtendedReal::Infinity);
    }

    #[test]
    fn modular_generator_axis() {
        let (a, _) = Mat2::modular_generators(PREC);
        let ax = axis_of(&a).unwrap();
        let s5 = 5f64.sqrt();
        let mut ends = [ax.fixed_minus.to_f64(), ax.fixed_plus.to_f64()];
        ends.sort_by(f64::total_cmp);
        assert!((ends[0] - (-1.0 - s5) / 2.0).abs() < 1e-14);
        assert!((ends[1] - (-1.0 + s5) / 2.0).abs() < 1e-14);
        assert!((ax.translation_length.to_f64() - 1.924_847_3).abs() < 1e-7);
        // attracting point of w ↦ (w + 1)/(w + 2)
        assert!((ax.fixed_plus.to_f64() - ends[1]).abs() < 1e-14);
    }

    #[test]
    fn not_hyperbolic() {
        let err = axis_of(&mat([1.0, 1.0, 0.0, 1.0])).unwrap_err();
        assert_eq!(err.kind(), "NotHyperbolic");
    }

    #[test]
    fn modular_angle() {
        let (a, b) = Mat2::modular_generators(PREC);
        let ang = intersection_angle(&a, &b).unwrap();
        assert!((ang.cos_theta.to_f64() + 0.6).abs() < 1e-15);
        assert!((ang.sin_theta.to_f64() - 0.8).abs() < 1e-15);
        let tc = trace_angle_cosine(&a, &b).unwrap();
        assert!((tc.to_f64() + 0.6).abs() < 1e-15);
        let (re, im) = &ang.crossing_point;
        assert!(*im > 0);
        assert!(axis_of(&a).unwrap().contains(re, im, 1e-30));
        assert!(axis_of(&b).unwrap().contains(re, im, 1e-30));
    }

    #[test]
    fn right_angle() {
        // axes 0→∞ and -1→1 meet at i, tr(M1M2) = tr M1·tr M2 / 2
        let m1 = mat([2.0, 0.0, 0.0, 0.5]);
        let (c, s) = (1.25f64, 0.75f64);
        let m2 = mat([c, s, s, c]);
        let ang = intersection_angle(&m1, &m2).unwrap();
        assert!((ang.theta.to_f64() - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
        assert!(trace_angle_cosine(&m1, &m2).unwrap().to_f64().abs() < 1e-15);
        assert!((ang.crossing_point.0.to_f64()).abs() < 1e-15);
        assert!((ang.crossing_point.1.to_f64() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn disjoint_axes() {
        // 0→∞ and the axis with endpoints 1, 2
        let m1 = mat([2.0, 0.0, 0.0, 0.5]);
        let a = (3.0 + 5f64.sqrt()) / 2.0;
        let m2 = mat([a, -2.0, 1.0, a - 3.0]);
        assert_eq!(
            intersection_angle(&m1, &m2).unwrap_err(),
            Error::DisjointAxes
        );
    }

    #[test]
    fn modular_identity() {
        let m = ModuliPoint::modular(PREC);
        let r = sin_identity_report(&m).unwrap();
        assert!(r.half_length_residual < 1e-70);
        assert!(r.full_length_residual > 1);
        let m = ModuliPoint::from_integers(3.into(), 3.into(), 6.into(), PREC).unwrap();
        assert!(sin_identity_residual(&m).unwrap() < 1e-10);
    }
}
