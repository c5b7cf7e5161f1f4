//! Library results against independent computations.

use std::collections::BTreeSet;

use rug::{Float, Integer};
use torus_norm::counting::{brute_force_count, count_primitive, count_total, height_radius, zeta2};
use torus_norm::farey::{class_trace, class_trace_exact, collect_classes, EnumerationConfig};
use torus_norm::hyperbolic::{intersection_angle, sin_identity_report, trace_angle_cosine};
use torus_norm::moduli::{cusp_point, random_moduli_point, systole, SamplingChart};
use torus_norm::norm::{area_interval, boundary_refine, class_length};
use torus_norm::trace::{lift_to_matrices, trace_to_length, Mat2};
use torus_norm::{ModuliPoint, PrimitiveClass};

const PREC: u32 = 256;

fn modular() -> ModuliPoint {
    ModuliPoint::modular(PREC)
}

fn random_points(seed: u64, n: u64) -> Vec<ModuliPoint> {
    (0..n)
        .map(|i| random_moduli_point(seed, i, SamplingChart::default(), PREC).unwrap())
        .collect()
}

type IMat = [[i128; 2]; 2];

fn imul(x: &IMat, y: &IMat) -> IMat {
    let mut r = [[0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            r[i][j] = x[i][0] * y[0][j] + x[i][1] * y[1][j];
        }
    }
    r
}

/// Upper Christoffel word of `(p, q)` with `|p|` horizontal and `q` vertical
/// steps, `q >= 0`. A cyclic conjugate of the lower word.
fn upper_word(p: i64, q: i64) -> Vec<bool> {
    let (p, q) = (p.unsigned_abs() as i64, q);
    let n = p + q;
    let ceil = |i: i64| (i * q + n - 1) / n;
    (1..=n).map(|i| ceil(i) > ceil(i - 1)).collect()
}

/// Exact modular-torus trace from integer matrix products.
fn modular_trace_oracle(p: i64, q: i64) -> i128 {
    let a: IMat = [[1, 1], [1, 2]];
    let a_inv: IMat = [[2, -1], [-1, 1]];
    let b: IMat = [[1, -1], [-1, 2]];
    let h = if p >= 0 { a } else { a_inv };
    let mut acc: IMat = [[1, 0], [0, 1]];
    for up in upper_word(p, q) {
        acc = imul(&acc, if up { &b } else { &h });
    }
    (acc[0][0] + acc[1][1]).abs()
}

/// Markoff numbers up to `max`, from the integer tree of `x² + y² + z² = 3xyz`.
fn markoff_numbers(max: u64) -> BTreeSet<u64> {
    let mut out = BTreeSet::from([1, 2]);
    let mut stack = vec![(1u64, 2u64, 5u64)];
    while let Some((x, y, z)) = stack.pop() {
        if z > max {
            continue;
        }
        out.insert(z);
        stack.push((x, z, 3 * x * z - y));
        stack.push((y, z, 3 * y * z - x));
    }
    out
}

#[test]
fn modular_traces_match_integer_products() {
    let m = modular();
    for p in -12i64..=12 {
        for q in 0i64..=12 {
            let Ok(c) = PrimitiveClass::new(p, q) else {
                continue;
            };
            if q == 0 && p < 0 {
                continue;
            }
            let exact = class_trace_exact(&m, c).unwrap();
            assert_eq!(exact, Integer::from(modular_trace_oracle(p, q)), "{c}");
        }
    }
}

#[test]
fn modular_traces_are_three_times_markoff_numbers() {
    let m = modular();
    let mut found = BTreeSet::new();
    for p in 0i64..=40 {
        for q in 0i64..=40 {
            if let Ok(c) = PrimitiveClass::new(p, q) {
                let t = class_trace_exact(&m, c).unwrap();
                assert!(t.is_divisible_u(3));
                let v = (t / 3u32).to_u64().unwrap();
                if v <= 5000 {
                    found.insert(v);
                }
            }
        }
    }
    assert_eq!(found, markoff_numbers(5000));
}

#[test]
fn known_small_traces() {
    let m = modular();
    let t = |p, q| class_trace_exact(&m, PrimitiveClass::new(p, q).unwrap()).unwrap();
    assert_eq!(t(1, 0), 3);
    assert_eq!(t(2, 1), 6);
    assert_eq!(t(3, 1), 15);
    assert_eq!(t(3, 2), 15);
    assert_eq!(t(4, 1), 39);
    assert_eq!(t(5, 3), 87);
    assert_eq!(t(-1, 1), 6);
}

#[test]
fn random_traces_match_matrix_words() {
    for m in random_points(21, 5) {
        let (a, b) = lift_to_matrices(&m).unwrap();
        let a_inv = a.inverse();
        for p in -7i64..=7 {
            for q in 1i64..=7 {
                let Ok(c) = PrimitiveClass::new(p, q) else {
                    continue;
                };
                let h = if p >= 0 { &a } else { &a_inv };
                let mut acc = Mat2::identity(PREC);
                for up in upper_word(p, q) {
                    acc = &acc * if up { &b } else { h };
                }
                let want = Float::with_val(PREC, acc.trace().abs_ref());
                let got = class_trace(&m, c);
                let rel = Float::with_val(PREC, &got - &want).abs() / &want;
                assert!(rel < 1e-60, "{c}: {got} vs {want}");
            }
        }
    }
}

#[test]
fn modular_systole_and_lengths() {
    let m = modular();
    let s = systole(&m).unwrap().systole_length.to_f64();
    let want = 2.0 * 1.5f64.acosh();
    assert!((s - want).abs() < 1e-15);
    let l = class_length(&m, PrimitiveClass::new(2, 1).unwrap()).to_f64();
    assert!((l - 2.0 * 3f64.acosh()).abs() < 1e-14);
}

#[test]
fn modular_angle_and_identity() {
    let (a, b) = lift_to_matrices(&modular()).unwrap();
    let cos = intersection_angle(&a, &b).unwrap().cos_theta.to_f64();
    assert!((cos.abs() - 0.6).abs() < 1e-30);
    assert!((trace_angle_cosine(&a, &b).unwrap().to_f64() - cos).abs() < 1e-30);
    // (√5/2)²·(4/5) = 1 exactly
    let r = sin_identity_report(&modular()).unwrap();
    assert!(r.half_length_residual.to_f64() < 1e-70);
    assert!(r.full_length_residual.to_f64() > 0.1);
}

#[test]
fn sin_identity_on_random_points() {
    for m in random_points(2024, 100) {
        let r = sin_identity_report(&m).unwrap();
        assert!(r.half_length_residual.to_f64() <= 1e-9, "{}", m.triple());
    }
}

#[test]
fn conjugation_preserves_angles() {
    let p = Mat2::from_f64([2.0, 3.0, 1.0, 2.0], PREC).unwrap();
    let pi = p.inverse();
    for m in random_points(5, 10) {
        let (a, b) = lift_to_matrices(&m).unwrap();
        let ca = &(&p * &a) * &pi;
        let cb = &(&p * &b) * &pi;
        let t1 = intersection_angle(&a, &b).unwrap().theta;
        let t2 = intersection_angle(&ca, &cb).unwrap().theta;
        assert!(Float::with_val(PREC, &t1 - &t2).abs() < 1e-50);
    }
}

#[test]
fn cusp_family_stays_on_surface() {
    for s in [1.0, 0.1, 1e-3, 1e-6] {
        let m = cusp_point(s, PREC).unwrap();
        let r = m.triple().relative_residual().to_f64();
        assert!(r < 1e-60, "s = {s}: {r}");
        let sys = systole(&m).unwrap().systole_length.to_f64();
        assert!(
            (sys - s).abs() <= 1e-12 * s.max(1.0),
            "s = {s}: systole {sys}"
        );
    }
}

/// Primitive lattice points `(p, q)` with `ℓ <= L` by direct scan of a box.
fn box_count(m: &ModuliPoint, l: f64, r: i64) -> u64 {
    let bound = Float::with_val(PREC, l);
    let mut n = 0;
    for p in -r..=r {
        for q in -r..=r {
            if let Ok(c) = PrimitiveClass::new(p, q) {
                if trace_to_length(&class_trace(m, c)).unwrap().into_inner() <= bound {
                    n += 1;
                }
            }
        }
    }
    n
}

#[test]
fn counts_agree_with_box_scan() {
    let mut points = vec![modular()];
    points.extend(random_points(9, 3));
    for m in &points {
        for l in [3.0, 6.0, 9.0] {
            let r = height_radius(m, l).unwrap();
            assert_eq!(
                count_primitive(m, l).unwrap(),
                box_count(m, l, r),
                "L = {l}"
            );
        }
    }
}

#[test]
fn oracle_equivalence_up_to_twelve() {
    let mut points = vec![modular()];
    points.extend(random_points(3, 10));
    for m in &points {
        for l in [2.0, 5.0, 8.0, 12.0] {
            let cap = height_radius(m, l).unwrap();
            assert_eq!(
                brute_force_count(m, l, cap).unwrap(),
                count_primitive(m, l).unwrap(),
                "{} at L = {l}",
                m.triple()
            );
        }
    }
}

#[test]
fn brute_force_with_generous_cap() {
    let m = modular();
    assert_eq!(
        brute_force_count(&m, 12.0, 400).unwrap(),
        count_primitive(&m, 12.0).unwrap()
    );
}

#[test]
fn total_count_by_multiples() {
    // nonzero lattice points: every primitive class times k with k·ℓ <= L
    let m = modular();
    let l = 15.0;
    let bound = Float::with_val(PREC, 2.0 * (l / 2.0f64).cosh());
    let classes = collect_classes(&m, &bound, EnumerationConfig::default()).unwrap();
    let mut total = 0u64;
    for (c, _) in &classes {
        let len = class_length(&m, *c).to_f64();
        total += (l / len).floor() as u64;
    }
    assert_eq!(count_total(&m, l).unwrap(), 2 * total);
}

#[test]
fn modular_area_value() {
    let (lo, hi) = area_interval(&modular(), 1e-3).unwrap();
    assert!(lo <= 0.891803166 && 0.891803167 <= hi);
    assert!(hi - lo <= 1e-3);
}

#[test]
fn area_matches_lattice_density() {
    let m = modular();
    let (lo, hi) = boundary_refine(&m, 0.005).unwrap().area_interval();
    let l = 150.0;
    let density = count_primitive(&m, l).unwrap() as f64 / (l * l);
    let z = zeta2(PREC).to_f64();
    assert!(density > 0.97 * lo / z && density < 1.03 * hi / z);
}
