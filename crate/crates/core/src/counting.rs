//! Counting simple closed geodesics by length.
//!
//! Primitive classes of norm at most `L` are the primitive lattice points of
//! `L·B`, so their number grows like `Area(B)·L²/ζ(2)`.

use rug::float::Constant;
use rug::Float;

use crate::error::{Error, Result};
use crate::farey::{count_classes, EnumerationConfig, E1, E2};
use crate::moduli::systole;
use crate::norm::{area_interval, boundary_refine, length_of_trace};
use crate::trace::{lift_to_matrices, Mat2, ModuliPoint};

/// `π²/6` at the given precision.
pub fn zeta2(prec: u32) -> Float {
    let pi = Float::with_val(prec, Constant::Pi);
    Float::with_val(prec, pi.square_ref()) / 6u32
}

fn check_length(l: f64) -> Result<()> {
    if l > 0.0 && l.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "L must be positive, got {l}"
        )))
    }
}

/// `2·cosh(L/2)`, the largest trace of a geodesic of length at most `L`.
fn trace_bound(l: f64, prec: u32) -> Float {
    let half = Float::with_val(prec, l) / 2u32;
    half.cosh() * 2u32
}

/// Smallest integer `R` with every class of norm at most `L` inside
/// `max(|p|, |q|) <= R`, from the circumscribed polygon of the unit ball.
pub fn height_radius(m: &ModuliPoint, l: f64) -> Result<i64> {
    check_length(l)?;
    // one refinement round bounds every chord-extension triangle
    let ball = boundary_refine(m, f64::MAX)?;
    let r = ball.sup_norm_bound() * l;
    r.ceil()
        .to_integer()
        .and_then(|i| i.to_i64())
        .ok_or_else(|| Error::InvalidArgument(format!("L = {l} is too large to count")))
}

/// Enumeration depth that reaches every class of norm at most `L`.
///
/// A class of height `h` sits at Stern–Brocot depth below `2h`; descending
/// nodes on the way to the shortest geodesics have traces below the seeds.
fn depth_cap(m: &ModuliPoint, l: f64) -> Result<usize> {
    let t = m.triple();
    let prec = m.precision_bits();
    let diff = Float::with_val(prec, &t.x * &t.y) - &t.z;
    let mut seed_max = t.x.clone();
    for v in [&t.y, &t.z, &diff] {
        if *v > seed_max {
            seed_max = v.clone();
        }
    }
    let seed_len = length_of_trace(&seed_max).to_f64();
    let r = height_radius(m, l.max(seed_len))?;
    Ok((2 * r as usize + 64).max(64))
}

/// Number of oriented primitive classes with `ℓ <= L`. Ties count.
pub fn count_primitive(m: &ModuliPoint, l: f64) -> Result<u64> {
    check_length(l)?;
    let cfg = EnumerationConfig {
        depth_cap: depth_cap(m, l)?,
    };
    Ok(2 * count_classes(m, &trace_bound(l, m.precision_bits()), cfg)?)
}

/// Number of nonzero lattice points `h` with `ℓ(h) <= L`:
/// `Σ_k N(L/k)` over `k <= L / sys`.
pub fn count_total(m: &ModuliPoint, l: f64) -> Result<u64> {
    check_length(l)?;
    let sys = systole(m)?.systole_length.to_f64();
    let kmax = (l / sys).floor() as u64;
    let mut total = 0;
    for k in 1..=kmax {
        total += count_primitive(m, l / k as f64)?;
    }
    Ok(total)
}

/// Independent count of oriented primitive classes with `ℓ <= L` and
/// `max(|p|, |q|) <= cap`.
///
/// Traces come from products of the lifted generator matrices along
/// Christoffel words, built with the standard factorisation
/// `w(a + b) = w(a)·w(b)`; no trace recursion or pruning is involved.
pub fn brute_force_count(m: &ModuliPoint, l: f64, cap: i64) -> Result<u64> {
    check_length(l)?;
    let required = height_radius(m, l)?;
    if cap < required {
        return Err(Error::CapTooSmall { cap, required });
    }
    let prec = m.precision_bits();
    let bound = trace_bound(l, prec);
    let (a, b) = lift_to_matrices(m)?;
    let within = |mat: &Mat2| Float::with_val(prec, mat.trace().abs_ref()) <= bound;

    let mut count = within(&a) as u64 + within(&b) as u64;
    // Word order: lower-slope factor first; reflecting p ↦ -p swaps A for A⁻¹.
    let roots = [(E1, a.clone(), E2, b.clone()), (-E1, a.inverse(), E2, b)];
    for (lc, lm, rc, rm) in roots {
        let mut stack = vec![(lc, lm, rc, rm)];
        while let Some((lc, lm, rc, rm)) = stack.pop() {
            let mc = lc + rc;
            if mc.height() > cap {
                continue;
            }
            let mm = &lm * &rm;
            count += within(&mm) as u64;
            stack.push((lc, lm, mc, mm.clone()));
            stack.push((mc, mm, rc, rm));
        }
    }
    Ok(2 * count)
}

/// One row of the counting report.
#[derive(Debug, Clone)]
pub struct CountReport {
    pub length: f64,
    pub primitive_count: u64,
    pub total_count: u64,
    /// `Area·L²/ζ(2)` with the midpoint of the certified area interval.
    pub predicted: f64,
    pub residual: f64,
    pub area_interval_used: (f64, f64),
}

impl CountReport {
    pub fn residual_per_l_log_l(&self) -> f64 {
        self.residual / (self.length * self.length.ln())
    }

    pub fn residual_per_l(&self) -> f64 {
        self.residual / self.length
    }

    /// `N(L)/L²`
    pub fn density(&self) -> f64 {
        self.primitive_count as f64 / (self.length * self.length)
    }

    /// `Area/ζ(2)` for both ends of the area interval.
    pub fn predicted_density(&self, prec: u32) -> (f64, f64) {
        let z = zeta2(prec).to_f64();
        (self.area_interval_used.0 / z, self.area_interval_used.1 / z)
    }
}

/// Counts against the quadratic law for each `L`.
pub fn asymptotic_report(m: &ModuliPoint, lengths: &[f64], eps: f64) -> Result<Vec<CountReport>> {
    if lengths.is_empty() {
        return Err(Error::InvalidArgument("no lengths given".into()));
    }
    for &l in lengths {
        check_length(l)?;
    }
    let prec = m.precision_bits();
    let area = area_interval(m, eps)?;
    let mid = (area.0 + area.1) / 2.0;
    let z = zeta2(prec).to_f64();
    lengths
        .iter()
        .map(|&l| {
            let primitive_count = count_primitive(m, l)?;
            let total_count = count_total(m, l)?;
            let predicted = mid * l * l / z;
            Ok(CountReport {
                length: l,
                primitive_count,
                total_count,
                predicted,
                residual: primitive_count as f64 - predicted,
                area_interval_used: area,
            })
        })
        .collect()
}
