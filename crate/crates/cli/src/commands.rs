use torus_norm::counting::{asymptotic_report, brute_force_count, count_primitive, height_radius};
use torus_norm::farey::{random_class_pairs, visit_nodes};
use torus_norm::hyperbolic::{intersection_angle, sin_identity_report, trace_angle_cosine};
use torus_norm::moduli::{
    area_along_path, cusp_asymptotics, cusp_point, isosystolic_sample, random_moduli_point,
    systole, SamplingChart,
};
use torus_norm::norm::{boundary_refine, triangle_margin};
use torus_norm::trace::{fricke_residual, lift_to_matrices, TraceTriple, DEFAULT_RTOL};
use torus_norm::ModuliPoint;

use crate::output::{num, Cell, Table};
use crate::{CliError, CountArgs, Format, Global, ScanArgs};

const DEFAULT_VERIFY_N: usize = 100;
const DEFAULT_SCAN_N: usize = 1000;
const ANGLE_TOL: f64 = 1e-10;
const ORACLE_LENGTHS: [f64; 2] = [4.0, 8.0];
const TRIANGLE_PAIRS: usize = 1000;
const TRIANGLE_HEIGHT: i64 = 12;
const REDUCTION_STEPS: usize = 200;

/// What a command produced: the report body and lines for standard error.
pub struct Outcome {
    pub body: String,
    pub summary: Vec<String>,
    pub failed: bool,
}

impl Outcome {
    fn new(body: String) -> Self {
        Outcome {
            body,
            summary: Vec::new(),
            failed: false,
        }
    }
}

fn render(table: &Table, format: Format) -> String {
    match format {
        Format::Json => table.to_json(),
        _ => table.to_csv(),
    }
}

fn parse_moduli(arg: &str, g: &Global) -> Result<ModuliPoint, CliError> {
    let prec = g.precision_bits;
    match arg {
        "modular" => Ok(ModuliPoint::modular(prec)),
        "random" => Ok(random_moduli_point(
            g.seed,
            0,
            SamplingChart::default(),
            prec,
        )?),
        triple => {
            let parts: Vec<&str> = triple.split(',').map(str::trim).collect();
            if parts.len() != 3 {
                return Err(CliError::Usage(format!(
                    "--moduli expects `modular`, `random` or `x,y,z`, got `{triple}`"
                )));
            }
            if let Ok(ints) = parts
                .iter()
                .map(|p| p.parse::<i64>())
                .collect::<Result<Vec<_>, _>>()
            {
                return Ok(ModuliPoint::from_i64(ints[0], ints[1], ints[2], prec)?);
            }
            let reals = parts
                .iter()
                .map(|p| p.parse::<f64>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| CliError::Usage(format!("bad trace coordinate: {e}")))?;
            Ok(ModuliPoint::from_f64(reals[0], reals[1], reals[2], prec)?)
        }
    }
}

fn triple_meta(table: &mut Table, m: &ModuliPoint) {
    let TraceTriple { x, y, z } = m.triple();
    table.meta("x", x.to_f64());
    table.meta("y", y.to_f64());
    table.meta("z", z.to_f64());
    table.meta("precision_bits", m.precision_bits() as i64);
}

pub fn ball(g: &Global) -> Result<Outcome, CliError> {
    let m = parse_moduli(&g.moduli, g)?;
    let approx = boundary_refine(&m, g.eps)?;
    let (lo, hi) = approx.area_interval();
    let mut table = Table::new("ball", &["p", "q", "x", "y", "norm"]);
    triple_meta(&mut table, &m);
    table.meta("eps", g.eps);
    table.meta("area_lower", lo);
    table.meta("area_upper", hi);
    let mut points = Vec::with_capacity(approx.vertices.len());
    for v in &approx.vertices {
        let (x, y) = v.point.to_f64();
        points.push((x, y));
        table.push(vec![
            v.class.p().into(),
            v.class.q().into(),
            x.into(),
            y.into(),
            v.length.to_f64().into(),
        ]);
    }
    let body = match g.format {
        Format::Svg => table.to_svg(&points),
        f => render(&table, f),
    };
    let mut out = Outcome::new(body);
    out.summary.push(format!(
        "area in [{}, {}] with eps {} from {} vertices",
        num(lo),
        num(hi),
        num(g.eps),
        approx.vertices.len()
    ));
    Ok(out)
}

pub fn count(g: &Global, args: &CountArgs) -> Result<Outcome, CliError> {
    if let Some(bad) = args.lengths.iter().find(|l| !(**l > 0.0 && l.is_finite())) {
        return Err(CliError::Usage(format!(
            "--L values must be positive, got {bad}"
        )));
    }
    let m = parse_moduli(&g.moduli, g)?;
    let reports = asymptotic_report(&m, &args.lengths, g.eps)?;
    let div = if args.unoriented { 2 } else { 1 };
    let mut table = Table::new(
        "count",
        &[
            "L",
            "primitive",
            "total",
            "predicted",
            "residual",
            "residual_per_LlogL",
        ],
    );
    triple_meta(&mut table, &m);
    table.meta("oriented", if args.unoriented { "no" } else { "yes" });
    if let Some(r) = reports.first() {
        table.meta("area_lower", r.area_interval_used.0);
        table.meta("area_upper", r.area_interval_used.1);
    }
    let mut out_summary = Vec::new();
    let mut failed = false;
    for r in &reports {
        let d = div as f64;
        table.push(vec![
            r.length.into(),
            (r.primitive_count / div).into(),
            (r.total_count / div).into(),
            (r.predicted / d).into(),
            (r.residual / d).into(),
            (r.residual_per_l_log_l() / d).into(),
        ]);
        if args.oracle {
            let cap = height_radius(&m, r.length)?;
            let bf = brute_force_count(&m, r.length, cap)?;
            if bf == r.primitive_count {
                out_summary.push(format!(
                    "oracle L={}: brute force {} agrees (cap {cap})",
                    num(r.length),
                    bf / div
                ));
            } else {
                failed = true;
                out_summary.push(format!(
                    "oracle L={}: MISMATCH brute force {} vs enumeration {}",
                    num(r.length),
                    bf / div,
                    r.primitive_count / div
                ));
            }
        }
    }
    let mut out = Outcome::new(render(&table, g.format));
    out.summary = out_summary;
    out.failed = failed;
    Ok(out)
}

struct Check {
    name: &'static str,
    /// `None` for informational rows.
    passed: Option<bool>,
    value: f64,
}

fn worst(values: impl Iterator<Item = f64>) -> f64 {
    values.fold(0.0, f64::max)
}

pub fn verify(g: &Global) -> Result<Outcome, CliError> {
    let points: Vec<ModuliPoint> = if g.moduli == "random" {
        let n = g.n.unwrap_or(DEFAULT_VERIFY_N);
        if n == 0 {
            return Err(CliError::Usage("--n must be at least 1".into()));
        }
        (0..n as u64)
            .map(|i| random_moduli_point(g.seed, i, SamplingChart::default(), g.precision_bits))
            .collect::<Result<_, _>>()?
    } else {
        vec![parse_moduli(&g.moduli, g)?]
    };

    let mut markoff = Vec::new();
    let mut fricke = Vec::new();
    let mut half = Vec::new();
    let mut full = Vec::new();
    let mut angle_gap = Vec::new();
    let mut steps = Vec::new();
    let mut oracle_ok = true;
    let mut oracle_checked = 0u64;
    for m in &points {
        markoff.push(m.triple().relative_residual().to_f64());
        visit_nodes(m, 6, |node| {
            let (a, b, c) = &node.triple;
            let t = TraceTriple::new(a.clone(), b.clone(), c.clone());
            markoff.push(t.relative_residual().to_f64());
        });
        let (a, b) = lift_to_matrices(m)?;
        fricke.push(fricke_residual(&a, &b).to_f64().abs());
        let id = sin_identity_report(m)?;
        half.push(id.half_length_residual.to_f64());
        full.push(id.full_length_residual.to_f64());
        let cos_x = intersection_angle(&a, &b)?.cos_theta.to_f64();
        let cos_t = trace_angle_cosine(&a, &b)?.to_f64();
        angle_gap.push((cos_x - cos_t).abs());
        steps.push(systole(m)?.reduction_steps as f64);
        for l in ORACLE_LENGTHS {
            let cap = height_radius(m, l)?;
            let bf = brute_force_count(m, l, cap)?;
            oracle_ok &= bf == count_primitive(m, l)?;
            oracle_checked += 1;
        }
    }

    let per_point = (TRIANGLE_PAIRS / points.len()).max(10);
    let pairs = random_class_pairs(g.seed, per_point, TRIANGLE_HEIGHT);
    let mut min_margin = f64::INFINITY;
    let mut all_positive = true;
    let mut unresolved = 0usize;
    for m in &points {
        for (u, v) in &pairs {
            match triangle_margin(m, (u.p(), u.q()), (v.p(), v.q())) {
                Ok(margin) => {
                    all_positive &= margin > 0;
                    min_margin = min_margin.min(margin.to_f64());
                }
                Err(torus_norm::Error::PrecisionExhausted(_)) => {
                    all_positive = false;
                    unresolved += 1;
                }
                Err(e) => return Err(e.into()),
            }
        }
    }

    let markoff_max = worst(markoff.into_iter());
    let fricke_max = worst(fricke.into_iter());
    let half_max = worst(half.into_iter());
    let full_max = worst(full.into_iter());
    let angle_max = worst(angle_gap.into_iter());
    let steps_max = worst(steps.into_iter());
    let checks = [
        Check {
            name: "markoff_relation",
            passed: Some(markoff_max <= DEFAULT_RTOL),
            value: markoff_max,
        },
        Check {
            name: "fricke_commutator",
            passed: Some(fricke_max <= g.tol),
            value: fricke_max,
        },
        Check {
            name: "sinh_identity_half_length",
            passed: Some(half_max <= g.tol),
            value: half_max,
        },
        Check {
            name: "sinh_identity_full_length",
            passed: None,
            value: full_max,
        },
        Check {
            name: "angle_cross_ratio_vs_trace",
            passed: Some(angle_max <= ANGLE_TOL),
            value: angle_max,
        },
        Check {
            name: "strict_triangle_min_margin",
            passed: Some(all_positive),
            value: min_margin,
        },
        Check {
            name: "reduction_steps_max",
            passed: Some(steps_max <= REDUCTION_STEPS as f64),
            value: steps_max,
        },
        Check {
            name: "oracle_equivalence",
            passed: Some(oracle_ok),
            value: oracle_checked as f64,
        },
    ];

    let mut table = Table::new("verify", &["check", "status", "value"]);
    table.meta("points", points.len() as i64);
    table.meta("seed", g.seed as i64);
    table.meta("moduli", g.moduli.as_str());
    let mut failed = false;
    let mut summary = Vec::new();
    for c in &checks {
        let status = match c.passed {
            Some(true) => "PASS",
            Some(false) => "FAIL",
            None => "INFO",
        };
        failed |= c.passed == Some(false);
        summary.push(format!("{status} {} {}", c.name, num(c.value)));
        table.push(vec![Cell::from(c.name), Cell::from(status), c.value.into()]);
    }
    if unresolved > 0 {
        summary.push(format!(
            "{unresolved} triangle margins were below the working precision; raise --precision-bits"
        ));
    }
    let mut out = Outcome::new(render(&table, g.format));
    out.summary = summary;
    out.failed = failed;
    Ok(out)
}

pub fn scan(g: &Global, args: &ScanArgs) -> Result<Outcome, CliError> {
    if args.cusp {
        scan_cusp(g, args)
    } else {
        scan_systole(g)
    }
}

fn scan_cusp(g: &Global, args: &ScanArgs) -> Result<Outcome, CliError> {
    if let Some(bad) = args.s.iter().find(|s| !(**s > 0.0 && s.is_finite())) {
        return Err(CliError::Usage(format!(
            "--s values must be positive, got {bad}"
        )));
    }
    let rows = cusp_asymptotics(&args.s, g.precision_bits)?;
    let path = args
        .s
        .iter()
        .map(|&s| cusp_point(s, g.precision_bits))
        .collect::<Result<Vec<_>, _>>()?;
    let areas = area_along_path(&path, g.eps)?;
    let mut table = Table::new(
        "scan-cusp",
        &[
            "s",
            "len_gamma",
            "len_gamma_prime",
            "ratio",
            "angle",
            "area_lower",
            "area_upper",
        ],
    );
    table.meta("eps", g.eps);
    table.meta("precision_bits", g.precision_bits as i64);
    let mut summary = Vec::new();
    for (r, a) in rows.iter().zip(&areas.rows) {
        table.push(vec![
            r.s.into(),
            r.len_gamma.into(),
            r.len_gamma_prime.into(),
            r.ratio.into(),
            r.angle.into(),
            a.area_lower.into(),
            a.area_upper.into(),
        ]);
        summary.push(format!(
            "s={}: area_lower {} vs 1/(len_gamma*len_gamma_prime) {}",
            num(r.s),
            num(a.area_lower),
            num(a.systole_bound)
        ));
    }
    let mut out = Outcome::new(render(&table, g.format));
    out.summary = summary;
    Ok(out)
}

fn scan_systole(g: &Global) -> Result<Outcome, CliError> {
    let n = g.n.unwrap_or(DEFAULT_SCAN_N);
    if n == 0 {
        return Err(CliError::Usage("--n must be at least 1".into()));
    }
    let report = isosystolic_sample(n, g.seed, SamplingChart::default(), g.precision_bits)?;
    let mut table = Table::new("scan-systole", &["index", "x", "y", "z", "systole"]);
    table.meta("seed", g.seed as i64);
    table.meta("max_systole", report.max_systole);
    table.meta("modular_systole", report.modular_systole);
    for s in &report.samples {
        table.push(vec![
            (s.index as i64).into(),
            s.triple[0].into(),
            s.triple[1].into(),
            s.triple[2].into(),
            s.systole.into(),
        ]);
    }
    let mut out = Outcome::new(render(&table, g.format));
    out.summary.push(format!(
        "max systole {} over {n} samples; modular torus {}",
        num(report.max_systole),
        num(report.modular_systole)
    ));
    Ok(out)
}
