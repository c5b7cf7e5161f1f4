//! Experiments across moduli space: the symmetric cusp family, systoles by
//! Markoff reduction, seeded random sampling and area along paths.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rug::Float;

use crate::error::{Error, Result};
use crate::hyperbolic::intersection_angle;
use crate::norm::{boundary_refine, length_of_trace};
use crate::trace::{
    lift_to_matrices, validate_triple, LengthValue, ModuliPoint, TraceTriple, DEFAULT_RTOL,
};

/// Cap on decreasing moves in [`systole`].
pub const REDUCTION_STEP_CAP: usize = 10_000;

/// Member of the symmetric cusp family with `ℓ(γ) = s`:
/// `x = 2cosh(s/2)`, `y = z = x/√(x - 2)`.
pub fn cusp_point(s: f64, precision_bits: u32) -> Result<ModuliPoint> {
    if !(s > 0.0 && s.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "s must be positive, got {s}"
        )));
    }
    let prec = precision_bits.max(crate::trace::MIN_PRECISION);
    let half = Float::with_val(prec, s) / 2u32;
    let x = half.clone().cosh() * 2u32;
    // x - 2 = 4·sinh²(s/4), without cancellation
    let root = Float::with_val(prec, &half / 2u32).sinh() * 2u32;
    let y = Float::with_val(prec, &x / &root);
    validate_triple(&x, &y, &y, DEFAULT_RTOL, precision_bits)
}

/// Outcome of Markoff reduction.
#[derive(Debug, Clone)]
pub struct SystoleReport {
    pub reduced_triple: TraceTriple,
    pub systole_length: LengthValue,
    pub reduction_steps: usize,
}

impl SystoleReport {
    /// Lengths of the two shortest simple geodesics `γ`, `γ′`.
    pub fn shortest_pair(&self) -> (Float, Float) {
        let mut t = self.reduced_triple.to_array();
        t.sort_by(|a, b| a.partial_cmp(b).expect("finite traces"));
        (length_of_trace(&t[0]), length_of_trace(&t[1]))
    }
}

/// Shortest closed geodesic length, by repeatedly replacing the largest
/// coordinate `w` with `u·v - w` while that strictly decreases it.
pub fn systole(m: &ModuliPoint) -> Result<SystoleReport> {
    let mut t = m.triple().to_array();
    let prec = m.precision_bits();
    let rel = Float::with_val(prec, 1e-30);
    let mut steps = 0;
    loop {
        let big = (0..3)
            .max_by(|&i, &j| t[i].partial_cmp(&t[j]).expect("finite traces"))
            .expect("three coordinates");
        let (u, v) = (&t[(big + 1) % 3], &t[(big + 2) % 3]);
        let replaced = Float::with_val(prec, u * v) - &t[big];
        let decrease = Float::with_val(prec, &t[big] - &replaced);
        if decrease <= Float::with_val(prec, &rel * &t[big]) {
            break;
        }
        if steps == REDUCTION_STEP_CAP {
            return Err(Error::ReductionDiverged { steps });
        }
        t[big] = replaced;
        steps += 1;
    }
    let [x, y, z] = t;
    let reduced = TraceTriple::new(x, y, z);
    let systole_length = LengthValue::new(length_of_trace(reduced.min()))?;
    Ok(SystoleReport {
        reduced_triple: reduced,
        systole_length,
        reduction_steps: steps,
    })
}

/// Chart for random moduli points: `x`, `y` uniform in
/// `[2 + delta, x_max]`, `z` the larger Markoff root.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplingChart {
    pub delta: f64,
    pub x_max: f64,
}

impl Default for SamplingChart {
    fn default() -> Self {
        SamplingChart {
            delta: 0.05,
            x_max: 12.0,
        }
    }
}

/// The `index`-th point of the stream keyed by `seed`.
///
/// Each index draws from its own ChaCha stream, so points can be generated
/// in any order or in parallel with identical results.
pub fn random_moduli_point(
    seed: u64,
    index: u64,
    chart: SamplingChart,
    precision_bits: u32,
) -> Result<ModuliPoint> {
    if !(chart.delta > 0.0 && chart.x_max > 2.0 + chart.delta) {
        return Err(Error::InvalidArgument("empty sampling chart".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let prec = precision_bits.max(crate::trace::MIN_PRECISION);
    loop {
        let x: f64 = rng.gen_range(2.0 + chart.delta..=chart.x_max);
        let y: f64 = rng.gen_range(2.0 + chart.delta..=chart.x_max);
        if x * x * y * y < 4.0 * (x * x + y * y) {
            continue;
        }
        let (fx, fy) = (Float::with_val(prec, x), Float::with_val(prec, y));
        let xy = Float::with_val(prec, &fx * &fy);
        let disc = Float::with_val(prec, xy.square_ref())
            - Float::with_val(prec, fx.square_ref()) * 4u32
            - Float::with_val(prec, fy.square_ref()) * 4u32;
        if disc < 0 {
            continue;
        }
        let z = (xy + disc.sqrt()) / 2u32;
        return validate_triple(&fx, &fy, &z, DEFAULT_RTOL, precision_bits);
    }
}

#[derive(Debug, Clone)]
pub struct SystoleSample {
    pub index: u64,
    pub triple: [f64; 3],
    pub systole: f64,
    pub steps: usize,
}

#[derive(Debug, Clone)]
pub struct IsosystolicReport {
    pub samples: Vec<SystoleSample>,
    pub max_systole: f64,
    /// `2·arccosh(3/2)`, the systole of the modular torus.
    pub modular_systole: f64,
}

impl IsosystolicReport {
    pub fn within(&self, tol: f64) -> bool {
        self.max_systole <= self.modular_systole + tol
    }
}

/// Systoles of `n` seeded random moduli points.
pub fn isosystolic_sample(
    n: usize,
    seed: u64,
    chart: SamplingChart,
    precision_bits: u32,
) -> Result<IsosystolicReport> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    let samples = (0..n as u64)
        .into_par_iter()
        .map(|index| {
            let m = random_moduli_point(seed, index, chart, precision_bits)?;
            let r = systole(&m)?;
            let t = m.triple();
            Ok(SystoleSample {
                index,
                triple: [t.x.to_f64(), t.y.to_f64(), t.z.to_f64()],
                systole: r.systole_length.to_f64(),
                steps: r.reduction_steps,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let max_systole = samples.iter().map(|s| s.systole).fold(f64::MIN, f64::max);
    let modular = systole(&ModuliPoint::modular(precision_bits))?;
    Ok(IsosystolicReport {
        samples,
        max_systole,
        modular_systole: modular.systole_length.to_f64(),
    })
}

/// One point of the cusp family.
#[derive(Debug, Clone)]
pub struct CuspRow {
    pub s: f64,
    pub len_gamma: f64,
    pub len_gamma_prime: f64,
    /// `ℓ(γ′) / (2|log s|)`
    pub ratio: f64,
    /// `ℓ(γ′) / |log s|`
    pub ratio_unit: f64,
    /// Crossing angle of the axes of `γ` and `γ′`.
    pub angle: f64,
}

/// Length of `γ′` and the `γ`–`γ′` angle along the cusp family.
pub fn cusp_asymptotics(s_values: &[f64], precision_bits: u32) -> Result<Vec<CuspRow>> {
    if s_values.is_empty() {
        return Err(Error::InvalidArgument("no s values".into()));
    }
    s_values
        .par_iter()
        .map(|&s| {
            let m = cusp_point(s, precision_bits)?;
            let t = m.triple();
            let lg = length_of_trace(&t.x).to_f64();
            let lgp = length_of_trace(&t.y).to_f64();
            let (a, b) = lift_to_matrices(&m)?;
            let angle = intersection_angle(&a, &b)?.theta.to_f64();
            let log_s = s.ln().abs();
            Ok(CuspRow {
                s,
                len_gamma: lg,
                len_gamma_prime: lgp,
                ratio: lgp / (2.0 * log_s),
                ratio_unit: lgp / log_s,
                angle,
            })
        })
        .collect()
}

/// Certified area at one point of a path.
#[derive(Debug, Clone, Copy)]
pub struct PathAreaRow {
    pub area_lower: f64,
    pub area_upper: f64,
    pub len_gamma: f64,
    pub len_gamma_prime: f64,
    /// `1 / (ℓ(γ)·ℓ(γ′))` for the two shortest simple geodesics.
    pub systole_bound: f64,
}

#[derive(Debug, Clone)]
pub struct PathAreaReport {
    pub rows: Vec<PathAreaRow>,
    /// Second differences of the interval midpoints.
    pub second_differences: Vec<f64>,
}

/// Area intervals along a path of moduli points.
pub fn area_along_path(path: &[ModuliPoint], eps: f64) -> Result<PathAreaReport> {
    if path.is_empty() {
        return Err(Error::InvalidArgument("empty path".into()));
    }
    let rows = path
        .par_iter()
        .map(|m| {
            let (lo, hi) = boundary_refine(m, eps)?.area_interval();
            let (lg, lgp) = systole(m)?.shortest_pair();
            let (lg, lgp) = (lg.to_f64(), lgp.to_f64());
            Ok(PathAreaRow {
                area_lower: lo,
                area_upper: hi,
                len_gamma: lg,
                len_gamma_prime: lgp,
                systole_bound: 1.0 / (lg * lgp),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mids: Vec<f64> = rows
        .iter()
        .map(|r| (r.area_lower + r.area_upper) / 2.0)
        .collect();
    let second_differences = mids.windows(3).map(|w| w[2] - 2.0 * w[1] + w[0]).collect();
    Ok(PathAreaReport {
        rows,
        second_differences,
    })
}
