//! The length norm on `H₁(T, ℝ)` and certified geometry of its unit ball.
//!
//! Every primitive class `c` contributes the boundary point `c / ℓ(c)`.
//! The ball is convex, so consecutive boundary points give an inscribed
//! polygon, and extending the chords on either side of an edge traps the
//! boundary arc over that edge in a triangle. Together these bracket the
//! area and the norm of any real vector.

use std::cmp::Ordering;

use rayon::prelude::*;
use rug::float::Round;
use rug::ops::Pow;
use rug::{Float, Integer};

use crate::error::{Error, Result};
use crate::farey::{class_trace, farey_neighbor, gcd, root_pairs, Pair, PrimitiveClass, E1, E2};
use crate::trace::{trace_to_length, LengthValue, ModuliPoint, TraceScalar};

/// Largest Stern–Brocot depth explored by [`norm_of_vector`].
pub const VECTOR_DEPTH_CAP: usize = 2000;
/// Default vertex budget for [`boundary_refine`].
pub const DEFAULT_MAX_VERTICES: usize = 1 << 18;
/// Largest Farey step tried by [`corner_exterior_angle`].
pub const CORNER_STEP_CAP: usize = 4096;
/// Extra convergents beyond the sampled ones used to place the support line.
const FLATNESS_EXTRA: usize = 6;

/// A point of the real homology plane.
#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    pub x: Float,
    pub y: Float,
}

impl Point {
    pub fn new(x: Float, y: Float) -> Self {
        Point { x, y }
    }

    /// `c / len`
    pub fn of_class(c: PrimitiveClass, len: &Float) -> Self {
        let prec = len.prec();
        Point {
            x: Float::with_val(prec, c.p()) / len,
            y: Float::with_val(prec, c.q()) / len,
        }
    }

    fn prec(&self) -> u32 {
        self.x.prec()
    }

    pub fn cross(&self, o: &Point) -> Float {
        let prec = self.prec();
        let xy = Float::with_val(prec, &self.x * &o.y);
        xy - Float::with_val(prec, &self.y * &o.x)
    }

    pub fn dot(&self, o: &Point) -> Float {
        let prec = self.prec();
        let xx = Float::with_val(prec, &self.x * &o.x);
        xx + Float::with_val(prec, &self.y * &o.y)
    }

    fn sub(&self, o: &Point) -> Point {
        let prec = self.prec();
        Point {
            x: Float::with_val(prec, &self.x - &o.x),
            y: Float::with_val(prec, &self.y - &o.y),
        }
    }

    fn add_scaled(&self, d: &Point, t: &Float) -> Point {
        let prec = self.prec();
        Point {
            x: Float::with_val(prec, &d.x * t) + &self.x,
            y: Float::with_val(prec, &d.y * t) + &self.y,
        }
    }

    fn neg(&self) -> Point {
        Point {
            x: Float::with_val(self.prec(), -&self.x),
            y: Float::with_val(self.prec(), -&self.y),
        }
    }

    /// `max(|x|, |y|)`
    pub fn sup_norm(&self) -> Float {
        let ax = Float::with_val(self.prec(), self.x.abs_ref());
        let ay = Float::with_val(self.prec(), self.y.abs_ref());
        if ax >= ay {
            ax
        } else {
            ay
        }
    }

    pub fn to_f64(&self) -> (f64, f64) {
        (self.x.to_f64(), self.y.to_f64())
    }
}

/// `2·arccosh(t/2)` for a trace already known to be at least 2.
pub(crate) fn length_of_trace(t: &Float) -> Float {
    let mut h = Float::with_val(t.prec(), t / 2u32);
    h.acosh_mut();
    h * 2u32
}

/// Length of the simple geodesic in a primitive class.
pub fn class_length(m: &ModuliPoint, c: PrimitiveClass) -> Float {
    length_of_trace(&class_trace(m, c))
}

/// `ℓ(h)` for an integer class: `gcd · ℓ(h / gcd)`.
pub fn norm_of_class(m: &ModuliPoint, h: (i64, i64)) -> Result<LengthValue> {
    let (p, q) = h;
    if p == 0 && q == 0 {
        return Err(Error::ZeroClass);
    }
    let g = gcd(p, q);
    let c = PrimitiveClass::new(p / g, q / g)?;
    let len = trace_to_length(&class_trace(m, c))?;
    LengthValue::new(len.into_inner() * g)
}

/// `ℓ(u) + ℓ(v) - ℓ(u + v)`, positive for non-proportional classes.
///
/// For Farey neighbours the margin decays like `exp(-ℓ)`, so it is computed
/// without subtracting lengths: with `D = t(u - v) - 2cosh((ℓu - ℓv)/2)`,
/// `sinh(margin/4) = D / (4·sinh((ℓu + ℓv + ℓ(u + v))/4))`. On the Markoff
/// surface `D = (R - T)/2 = 8/(R + T)` with `R = √((t(u)² - 4)(t(v)² - 4))`
/// and `T = t(u + v) - t(u - v)`, since `R² - T² = 16`.
/// Other pairs are subtracted directly; a result within rounding of zero is
/// reported as [`Error::PrecisionExhausted`].
pub fn triangle_margin(m: &ModuliPoint, u: (i64, i64), v: (i64, i64)) -> Result<Float> {
    let prec = m.precision_bits();
    let lu = norm_of_class(m, u)?.into_inner();
    let lv = norm_of_class(m, v)?.into_inner();
    let luv = norm_of_class(m, (u.0 + v.0, u.1 + v.1))?.into_inner();
    let det = u.0 * v.1 - u.1 * v.0;
    if det.abs() == 1 {
        let trace = |(p, q): (i64, i64)| PrimitiveClass::new(p, q).map(|c| class_trace(m, c));
        let (tu, tv) = (trace(u)?, trace(v)?);
        let t_sum = trace((u.0 + v.0, u.1 + v.1))?;
        let t_diff = trace((u.0 - v.0, u.1 - v.1))?;
        let r = (Float::with_val(prec, tu.square_ref()) - 4u32)
            * (Float::with_val(prec, tv.square_ref()) - 4u32);
        let r = r.sqrt();
        let t = t_sum - t_diff;
        let d = if t >= 0 {
            Float::with_val(prec, 8u32) / (r + t)
        } else {
            (r - t) / 2u32
        };
        let sum = Float::with_val(prec, &lu + &lv) + &luv;
        let s = d / ((sum / 4u32).sinh() * 4u32);
        return Ok(s.asinh() * 4u32);
    }
    let scale = Float::with_val(prec, &lu + &lv);
    let margin = Float::with_val(prec, &scale - &luv);
    let resolution = scale >> (prec as i32 - 8);
    if Float::with_val(prec, margin.abs_ref()) <= resolution && det != 0 {
        return Err(unresolved(u, v));
    }
    Ok(margin)
}

fn unresolved(u: (i64, i64), v: (i64, i64)) -> Error {
    Error::PrecisionExhausted(format!(
        "triangle margin of {u:?}, {v:?} is below the working precision"
    ))
}

/// A bracketed value of the norm at a real vector.
#[derive(Debug, Clone)]
pub struct NormEstimate {
    pub value: Float,
    pub lower: Float,
    pub upper: Float,
    /// Tree depth at which the bracket closed.
    pub steps: usize,
}

/// Gauge of `v` with respect to the far sides of the chord-extension
/// triangle over the edge `pa`, `pb`.
///
/// `pd` is a boundary point before `pa` and `pe` one after `pb`. By
/// convexity the boundary arc between `pa` and `pb` lies inside the triangle
/// cut out by the chord and the extensions of `pd pa` and `pe pb`, so the
/// returned gauge is a lower bound on the norm. Returns zero when the
/// extensions do not meet on the outer side.
fn chord_extension_gauge(v: &Point, pa: &Point, pb: &Point, pd: &Point, pe: &Point) -> Float {
    let prec = v.prec();
    let zero = Float::new(prec);
    let Some((t, _)) = apex_parameters(pa, pb, pd, pe) else {
        return zero;
    };
    let d1 = pa.sub(pd);
    let d2 = pb.sub(pe);
    let apex = pa.add_scaled(&d1, &t);
    let (p1, d) = if apex.cross(v) >= 0 {
        (pb, d2)
    } else {
        (pa, d1)
    };
    let den = p1.cross(&d);
    if den.is_zero() {
        return zero;
    }
    let g = v.cross(&d) / den;
    if g > 0 {
        g
    } else {
        zero
    }
}

/// Parameters `(t, s)` of the apex `pa + t·(pa - pd) = pb + s·(pb - pe)`,
/// or `None` when the extensions diverge.
fn apex_parameters(pa: &Point, pb: &Point, pd: &Point, pe: &Point) -> Option<(Float, Float)> {
    let d1 = pa.sub(pd);
    let d2 = pb.sub(pe);
    let r = pb.sub(pa);
    let den = d1.cross(&d2);
    if den.is_zero() {
        return None;
    }
    let t = r.cross(&d2) / &den;
    let s = r.cross(&d1) / &den;
    if t < 0 || s < 0 {
        return None;
    }
    Some((t, s))
}

/// Area of the chord-extension triangle, `None` when unbounded.
fn triangle_area(pa: &Point, pb: &Point, pd: &Point, pe: &Point) -> Option<Float> {
    let (t, _) = apex_parameters(pa, pb, pd, pe)?;
    let d1 = pa.sub(pd);
    let r = pb.sub(pa);
    let mut a = d1.cross(&r) * t;
    a.abs_mut();
    Some(a / 2u32)
}

fn triangle_apex(pa: &Point, pb: &Point, pd: &Point, pe: &Point) -> Option<Point> {
    let (t, _) = apex_parameters(pa, pb, pd, pe)?;
    Some(pa.add_scaled(&pa.sub(pd), &t))
}

/// `ℓ(v)` within `tol`, by descending the Farey tree toward the direction of
/// `v`.
///
/// With `v = α·a + β·b` for the current Farey pair, `α·ℓ(a) + β·ℓ(b)` is an
/// upper bound and the chord-extension triangle over `a/ℓ(a)`, `b/ℓ(b)` gives
/// a lower bound.
pub fn norm_of_vector(m: &ModuliPoint, v: (f64, f64), tol: f64) -> Result<NormEstimate> {
    let (vx, vy) = v;
    if !(vx.is_finite() && vy.is_finite()) {
        return Err(Error::InvalidArgument("vector must be finite".into()));
    }
    if vx == 0.0 && vy == 0.0 {
        return Err(Error::ZeroClass);
    }
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidArgument("tol must be positive".into()));
    }
    let prec = m.precision_bits();
    // Inputs are doubles; a wide scratch precision keeps every det exact.
    let wide = prec.max(192);
    let (vx, vy) = if vy < 0.0 || (vy == 0.0 && vx < 0.0) {
        (-vx, -vy)
    } else {
        (vx, vy)
    };
    let exact = |c: PrimitiveClass, coord: f64, unit: i64| {
        let len = class_length(m, c);
        let value = Float::with_val(prec, coord / unit as f64) * len;
        Ok(NormEstimate {
            lower: value.clone(),
            upper: value.clone(),
            value,
            steps: 0,
        })
    };
    if vy == 0.0 {
        return exact(E1, vx, 1);
    }
    if vx == 0.0 {
        return exact(E2, vy, 1);
    }

    let fv = Point::new(Float::with_val(wide, vx), Float::with_val(wide, vy));
    let det_with = |c: PrimitiveClass| -> Float {
        let cp = Point::new(Float::with_val(wide, c.p()), Float::with_val(wide, c.q()));
        cp.cross(&fv)
    };
    let seeds = m.triple().to_array();
    let [q1, q2] = root_pairs(&seeds);
    let mut pair: Pair<Float> = if vx > 0.0 { q1 } else { q2 };
    let v_prec = Point::new(Float::with_val(prec, vx), Float::with_val(prec, vy));
    let tol_f = Float::with_val(prec, tol);

    for depth in 0..VECTOR_DEPTH_CAP {
        let (la, lb) = (length_of_trace(&pair.ta), length_of_trace(&pair.tb));
        let alpha = Float::with_val(prec, -det_with(pair.b));
        let beta = Float::with_val(prec, det_with(pair.a));
        let upper = Float::with_val(prec, &alpha * &la) + Float::with_val(prec, &beta * &lb);

        let pa = Point::of_class(pair.a, &la);
        let pb = Point::of_class(pair.b, &lb);
        let pd = Point::of_class(pair.a - pair.b, &length_of_trace(&pair.tdiff));
        let pe = pd.neg();
        let gauge = chord_extension_gauge(&v_prec, &pa, &pb, &pd, &pe);
        let lower = if gauge > upper { upper.clone() } else { gauge };
        if Float::with_val(prec, &upper - &lower) <= tol_f {
            let value = Float::with_val(prec, &upper + &lower) / 2u32;
            return Ok(NormEstimate {
                value,
                lower,
                upper,
                steps: depth,
            });
        }

        let a = pair.a;
        let b = pair.b;
        if a.p().checked_add(b.p()).is_none() || a.q().checked_add(b.q()).is_none() {
            break;
        }
        let med = pair.mediant();
        let tm = pair.mediant_trace();
        match det_with(med).cmp0() {
            Some(Ordering::Equal) => {
                let len = length_of_trace(&tm);
                let value = Float::with_val(prec, vx / med.p() as f64) * len;
                return Ok(NormEstimate {
                    lower: value.clone(),
                    upper: value.clone(),
                    value,
                    steps: depth + 1,
                });
            }
            Some(Ordering::Greater) => pair = pair.right(tm),
            _ => pair = pair.left(tm),
        }
    }
    Err(Error::NonConvergence {
        what: "norm_of_vector",
        steps: VECTOR_DEPTH_CAP,
    })
}

/// A boundary vertex `class / ℓ(class)` of the unit ball.
#[derive(Debug, Clone)]
pub struct BoundaryVertex {
    pub class: PrimitiveClass,
    pub point: Point,
    pub length: Float,
}

/// Certified polygonal approximation of the unit ball.
#[derive(Debug, Clone)]
pub struct BallApproximation {
    /// Boundary vertices in counter-clockwise order starting at `(1, 0)`,
    /// covering the full circle.
    pub vertices: Vec<BoundaryVertex>,
    /// Apex of the chord-extension triangle over each edge
    /// `vertices[i] → vertices[i + 1]` (cyclically).
    pub apexes: Vec<Point>,
    pub area_lower: Float,
    pub area_upper: Float,
    pub refinement_eps: f64,
}

impl BallApproximation {
    /// `(area_lower, area_upper)` rounded outward to doubles.
    pub fn area_interval(&self) -> (f64, f64) {
        (
            self.area_lower.to_f64_round(Round::Down),
            self.area_upper.to_f64_round(Round::Up),
        )
    }

    /// Upper bound on `max(|x|, |y|)` over the ball: the largest coordinate
    /// of the circumscribed polygon.
    pub fn sup_norm_bound(&self) -> Float {
        let mut best = Float::new(self.area_upper.prec());
        for p in self
            .vertices
            .iter()
            .map(|v| &v.point)
            .chain(self.apexes.iter())
        {
            let s = p.sup_norm();
            if s > best {
                best = s;
            }
        }
        best
    }
}

struct UpperVertex {
    class: PrimitiveClass,
    trace: Float,
    point: Point,
}

/// Upper-half vertices `U_0 = (1,0)/ℓ … U_n = (-1,0)/ℓ` viewed as the full
/// antipodally symmetric cycle `U_0 … U_{n-1}, -U_0 … -U_{n-1}`.
struct Polygon {
    verts: Vec<UpperVertex>,
    /// `diffs[i]` is the trace of `c_i - c_{i+1}`.
    diffs: Vec<Float>,
}

impl Polygon {
    fn n(&self) -> usize {
        self.verts.len() - 1
    }

    fn cyc(&self, i: isize) -> Point {
        let n = self.n() as isize;
        let j = i.rem_euclid(2 * n);
        if j < n {
            self.verts[j as usize].point.clone()
        } else {
            self.verts[(j - n) as usize].point.neg()
        }
    }

    /// Edge `i` with its outer neighbours: `(U_{i-1}, U_i, U_{i+1}, U_{i+2})`.
    fn edge(&self, i: usize) -> [Point; 4] {
        let i = i as isize;
        [
            self.cyc(i - 1),
            self.cyc(i),
            self.cyc(i + 1),
            self.cyc(i + 2),
        ]
    }

    fn is_strictly_convex(&self) -> bool {
        (0..self.n() as isize).all(|j| {
            let (a, b, c) = (self.cyc(j - 1), self.cyc(j), self.cyc(j + 1));
            b.sub(&a).cross(&c.sub(&b)) > 0
        })
    }

    fn areas(&self) -> Vec<Option<Float>> {
        (0..self.n())
            .into_par_iter()
            .map(|i| {
                let [d, a, b, e] = self.edge(i);
                triangle_area(&a, &b, &d, &e)
            })
            .collect()
    }

    fn split(&mut self, marks: &[bool]) {
        let prec = self.verts[0].trace.prec();
        let mut verts = Vec::with_capacity(self.verts.len() * 2);
        let mut diffs = Vec::with_capacity(self.diffs.len() * 2);
        let old_verts = std::mem::take(&mut self.verts);
        let old_diffs = std::mem::take(&mut self.diffs);
        let last = old_verts.len() - 1;
        let mut iter = old_verts.into_iter().enumerate().peekable();
        while let Some((i, v)) = iter.next() {
            if i == last {
                verts.push(v);
                break;
            }
            let next = &iter.peek().expect("edge has an end").1;
            if marks[i] {
                let class = v.class + next.class;
                let trace = <Float as TraceScalar>::mul_sub(&v.trace, &next.trace, &old_diffs[i]);
                let point = Point::of_class(class, &length_of_trace(&trace));
                diffs.push(Float::with_val(prec, &next.trace));
                diffs.push(Float::with_val(prec, &v.trace));
                verts.push(v);
                verts.push(UpperVertex {
                    class,
                    trace,
                    point,
                });
            } else {
                diffs.push(old_diffs[i].clone());
                verts.push(v);
            }
        }
        self.verts = verts;
        self.diffs = diffs;
    }
}

/// Refines the inscribed boundary polygon until the certified area gap is at
/// most `eps`.
pub fn boundary_refine(m: &ModuliPoint, eps: f64) -> Result<BallApproximation> {
    boundary_refine_with_budget(m, eps, DEFAULT_MAX_VERTICES)
}

/// [`boundary_refine`] with an explicit cap on the number of upper-half
/// vertices.
///
/// Refinement proceeds in rounds with thresholds `2^-r`; round `r` splits
/// every edge whose triangle area exceeds the threshold until none does.
/// Rounds do not depend on `eps`, so a smaller `eps` only continues the same
/// sequence of nested polygons and the interval shrinks monotonically.
pub fn boundary_refine_with_budget(
    m: &ModuliPoint,
    eps: f64,
    max_vertices: usize,
) -> Result<BallApproximation> {
    if eps.is_nan() || eps <= 0.0 {
        return Err(Error::InvalidArgument("eps must be positive".into()));
    }
    let prec = m.precision_bits();
    let t = m.triple();
    let vertex = |class: PrimitiveClass, trace: &Float| UpperVertex {
        class,
        trace: trace.clone(),
        point: Point::of_class(class, &length_of_trace(trace)),
    };
    let mut poly = Polygon {
        verts: vec![vertex(E1, &t.x), vertex(E2, &t.y), vertex(-E1, &t.x)],
        diffs: vec![
            <Float as TraceScalar>::mul_sub(&t.x, &t.y, &t.z),
            t.z.clone(),
        ],
    };
    let eps_f = Float::with_val(prec, eps);
    let max_rounds = prec.saturating_sub(20);

    for round in 1..=max_rounds {
        let tau = Float::with_val(prec, Float::u_exp(1, -(round as i32)));
        let areas = loop {
            if !poly.is_strictly_convex() {
                return Err(Error::PrecisionExhausted(format!(
                    "boundary polygon lost convexity at {} vertices",
                    poly.verts.len()
                )));
            }
            let areas = poly.areas();
            let marks: Vec<bool> = areas
                .iter()
                .map(|a| a.as_ref().is_none_or(|a| *a > tau))
                .collect();
            let splits = marks.iter().filter(|&&b| b).count();
            if splits == 0 {
                break areas;
            }
            if poly.verts.len() + splits > max_vertices {
                return Err(Error::PrecisionExhausted(format!(
                    "vertex budget of {max_vertices} exhausted"
                )));
            }
            poly.split(&marks);
        };

        let n = poly.n();
        let mut lower = Float::new(prec);
        for i in 0..n {
            lower += poly.verts[i].point.cross(&poly.verts[i + 1].point);
        }
        let mut gap = Float::new(prec);
        for a in &areas {
            gap += a.as_ref().expect("all triangles bounded after the round");
        }
        gap *= 2u32;
        let scale = if lower > 1 {
            lower.clone()
        } else {
            Float::with_val(prec, 1)
        };
        let slack =
            scale * Float::with_val(prec, Float::u_exp(1, -((prec - 10) as i32))) * (2 * n as u32);
        let width = Float::with_val(prec, &gap + &slack);
        if width <= eps_f {
            let area_lower = Float::with_val(prec, &lower - &slack);
            let area_upper = Float::with_val(prec, &lower + &width);
            return Ok(finish(&poly, area_lower, area_upper, eps));
        }
    }
    Err(Error::PrecisionExhausted(format!(
        "area gap did not reach {eps} within {max_rounds} rounds"
    )))
}

fn finish(poly: &Polygon, area_lower: Float, area_upper: Float, eps: f64) -> BallApproximation {
    let n = poly.n();
    let mut vertices = Vec::with_capacity(2 * n);
    for sign in [1i64, -1] {
        for v in &poly.verts[..n] {
            let (class, point) = if sign > 0 {
                (v.class, v.point.clone())
            } else {
                (-v.class, v.point.neg())
            };
            vertices.push(BoundaryVertex {
                class,
                point,
                length: length_of_trace(&v.trace),
            });
        }
    }
    let apexes = (0..2 * n)
        .map(|i| {
            let i = i as isize;
            let (d, a, b, e) = (
                poly.cyc(i - 1),
                poly.cyc(i),
                poly.cyc(i + 1),
                poly.cyc(i + 2),
            );
            triangle_apex(&a, &b, &d, &e).expect("all triangles bounded")
        })
        .collect();
    BallApproximation {
        vertices,
        apexes,
        area_lower,
        area_upper,
        refinement_eps: eps,
    }
}

/// Certified `(lower, upper)` bounds on the area of the unit ball with
/// `upper - lower <= eps`.
pub fn area_interval(m: &ModuliPoint, eps: f64) -> Result<(f64, f64)> {
    Ok(boundary_refine(m, eps)?.area_interval())
}

/// Exterior angle of the unit ball at a rational boundary point.
#[derive(Debug, Clone)]
pub struct CornerReport {
    pub class: PrimitiveClass,
    pub exterior_angle: f64,
    /// `max(|p|, |q|)`
    pub height: i64,
    pub converged: bool,
    /// Farey step `k` of the approximants `k·c ± u` at convergence.
    pub steps: usize,
}

/// Exterior angle at `c / ℓ(c)`.
///
/// With `u` a Farey neighbour of `c`, the classes `k·c + u` and `k·c - u`
/// approach `c` from either side; the chords from `c / ℓ(c)` to their
/// boundary points converge to the one-sided tangents. `k` grows until the
/// angle changes by at most `tol` relative to its value.
pub fn corner_exterior_angle(m: &ModuliPoint, c: PrimitiveClass, tol: f64) -> Result<CornerReport> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidArgument("tol must be positive".into()));
    }
    let prec = m.precision_bits();
    let u = farey_neighbor(c);
    let tc = class_trace(m, c);
    let pc = Point::of_class(c, &length_of_trace(&tc));
    let tu = class_trace(m, u);
    // trace(k·c ± u) for k - 1 and k; t(w + c) + t(w - c) = t(w)·t(c)
    let mut plus = (tu.clone(), class_trace(m, c + u));
    let mut minus = (tu, class_trace(m, c - u));
    let tol_f = Float::with_val(prec, tol);
    let mut prev: Option<Float> = None;

    for k in 1..=CORNER_STEP_CAP as i64 {
        let wp = PrimitiveClass::new_unchecked(k * c.p() + u.p(), k * c.q() + u.q());
        let wm = PrimitiveClass::new_unchecked(k * c.p() - u.p(), k * c.q() - u.q());
        let tp = pc
            .sub(&Point::of_class(wp, &length_of_trace(&plus.1)))
            .neg();
        let tm = pc.sub(&Point::of_class(wm, &length_of_trace(&minus.1)));
        // angle between the forward tangent and the reversed backward one
        let mut cr = tp.cross(&tm);
        cr.abs_mut();
        let angle = cr.atan2(&tp.dot(&tm));
        if let Some(p) = &prev {
            let mut diff = Float::with_val(prec, &angle - p);
            diff.abs_mut();
            if k >= 3 && diff <= Float::with_val(prec, &tol_f * &angle) {
                return Ok(CornerReport {
                    class: c,
                    exterior_angle: angle.to_f64(),
                    height: c.height(),
                    converged: true,
                    steps: k as usize,
                });
            }
        }
        prev = Some(angle);
        plus = (
            plus.1.clone(),
            <Float as TraceScalar>::mul_sub(&tc, &plus.1, &plus.0),
        );
        minus = (
            minus.1.clone(),
            <Float as TraceScalar>::mul_sub(&tc, &minus.1, &minus.0),
        );
    }
    Err(Error::NonConvergence {
        what: "corner_exterior_angle",
        steps: CORNER_STEP_CAP,
    })
}

/// Least-squares line through `(x, y)` points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

pub fn linear_fit(points: &[(f64, f64)]) -> LinearFit {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = points.iter().map(|p| (p.1 - my).powi(2)).sum();
    let slope = sxy / sxx;
    LinearFit {
        slope,
        intercept: my - slope * mx,
        r_squared: if syy == 0.0 {
            1.0
        } else {
            sxy * sxy / (sxx * syy)
        },
    }
}

/// `(a + b·√d) / c` with integer coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QuadraticIrrational {
    pub a: i64,
    pub b: i64,
    pub d: i64,
    pub c: i64,
}

impl QuadraticIrrational {
    pub fn new(a: i64, b: i64, d: i64, c: i64) -> Result<Self> {
        if c == 0 {
            return Err(Error::InvalidArgument("denominator must be nonzero".into()));
        }
        if d < 0 {
            return Err(Error::InvalidArgument(
                "radicand must be non-negative".into(),
            ));
        }
        Ok(QuadraticIrrational { a, b, d, c })
    }

    /// `(1 + √5) / 2`
    pub fn golden() -> Self {
        QuadraticIrrational {
            a: 1,
            b: 1,
            d: 5,
            c: 2,
        }
    }

    pub fn is_rational(&self) -> bool {
        self.b == 0 || Integer::from(self.d).is_perfect_square()
    }

    pub fn to_float(&self, prec: u32) -> Float {
        let root = Float::with_val(prec, self.d).sqrt() * self.b;
        (root + self.a) / self.c
    }

    /// The first `n` partial quotients, computed exactly.
    pub fn partial_quotients(&self, n: usize) -> Result<Vec<Integer>> {
        if self.is_rational() {
            return Err(Error::RationalSlope);
        }
        // Write the number as (P + √D) / Q with Q | D - P².
        let sign = self.b.signum();
        let mut p = Integer::from(self.a * sign);
        let mut q = Integer::from(self.c * sign);
        let mut d = Integer::from(self.b) * self.b * self.d;
        if !(&d - Integer::from(&p * &p)).is_divisible(&q) {
            let qa = Integer::from(q.abs_ref());
            p *= &qa;
            d *= Integer::from(&qa * &qa);
            q *= qa;
        }
        let r = Integer::from(d.sqrt_ref());
        let mut out = Vec::with_capacity(n);
        for _ in 0..n {
            // floor((P + √D) / Q) from floor(√D); √D is irrational
            let ai = if q > 0 {
                Integer::from(&p + &r).div_rem_floor(q.clone()).0
            } else {
                (-Integer::from(&p + &r) - 1u32)
                    .div_rem_floor(Integer::from(-&q))
                    .0
            };
            let next_p = Integer::from(&ai * &q) - &p;
            let next_q = (&d - Integer::from(&next_p * &next_p)) / &q;
            out.push(ai);
            p = next_p;
            q = next_q;
        }
        Ok(out)
    }
}

impl std::fmt::Display for QuadraticIrrational {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({} + {}·√{}) / {}", self.a, self.b, self.d, self.c)
    }
}

/// Local graph of the boundary near an irrational boundary point.
#[derive(Debug, Clone)]
pub struct FlatnessReport {
    pub slope: QuadraticIrrational,
    pub order_checked: u32,
    /// `(x, f(x))` at the convergent classes, shallowest first.
    pub samples: Vec<(f64, f64)>,
    /// Smallest `|x|` at which `f(x) <= |x|^N` fails; infinite if none does.
    pub delta: f64,
    pub passed: bool,
}

/// Probes flatness of order `order` at the boundary point of slope `slope`.
///
/// Samples are the boundary points of the continued-fraction convergent
/// classes `(k_n, h_n)`. The reference line runs through the boundary points
/// of two deeper convergents and stands in for the support line; `x` is the
/// coordinate along it from the point of the given slope and `f(x)` the
/// inward distance from it. The probe passes when at least half of the
/// samples have `|x|` below the first failure.
pub fn flatness_probe(
    m: &ModuliPoint,
    slope: QuadraticIrrational,
    order: u32,
    depth: usize,
) -> Result<FlatnessReport> {
    if order < 2 {
        return Err(Error::InvalidArgument("order must be at least 2".into()));
    }
    if depth == 0 {
        return Err(Error::InvalidArgument("depth must be positive".into()));
    }
    let prec = m.precision_bits();
    let quotients = slope.partial_quotients(depth + FLATNESS_EXTRA + 1)?;
    let overflow = || Error::PrecisionExhausted("convergent exceeds 64-bit range".into());

    let (mut h, mut h_prev) = (1i64, 0i64);
    let (mut k, mut k_prev) = (0i64, 1i64);
    let mut points = Vec::with_capacity(quotients.len());
    for a in &quotients {
        let a = a.to_i64().ok_or_else(overflow)?;
        let hn = a
            .checked_mul(h)
            .and_then(|v| v.checked_add(h_prev))
            .ok_or_else(overflow)?;
        let kn = a
            .checked_mul(k)
            .and_then(|v| v.checked_add(k_prev))
            .ok_or_else(overflow)?;
        (h_prev, h) = (h, hn);
        (k_prev, k) = (k, kn);
        let class = PrimitiveClass::new(k, h)?;
        points.push(Point::of_class(class, &class_length(m, class)));
    }

    let qa = &points[depth + FLATNESS_EXTRA - 1];
    let qb = &points[depth + FLATNESS_EXTRA];
    let dir = qb.sub(qa);
    let ray = Point::new(Float::with_val(prec, 1), slope.to_float(prec));
    let t = qa.cross(&dir) / ray.cross(&dir);
    let foot = Point::new(
        Float::with_val(prec, &ray.x * &t),
        Float::with_val(prec, &ray.y * &t),
    );
    let norm = Float::with_val(prec, dir.dot(&dir)).sqrt();
    let tangent = Point::new(
        Float::with_val(prec, &dir.x / &norm),
        Float::with_val(prec, &dir.y / &norm),
    );
    // unit normal pointing away from the origin
    let mut normal = Point::new(Float::with_val(prec, -&tangent.y), tangent.x.clone());
    if normal.dot(&foot) < 0 {
        normal = normal.neg();
    }

    let mut samples = Vec::with_capacity(depth);
    let mut raw = Vec::with_capacity(depth);
    for q in &points[..depth] {
        let rel = q.sub(&foot);
        let x = tangent.dot(&rel);
        let f = Float::with_val(prec, -normal.dot(&rel));
        samples.push((x.to_f64(), f.to_f64()));
        raw.push((x, f));
    }

    let noise = Float::with_val(prec, Float::u_exp(1, -((prec - 20) as i32)));
    let deepest = Float::with_val(prec, raw[depth - 1].0.abs_ref()).pow(order);
    if deepest < noise {
        return Err(Error::PrecisionExhausted(format!(
            "|x|^{order} at depth {depth} is below the working precision"
        )));
    }

    let mut delta: Option<Float> = None;
    for (x, f) in &raw {
        let ax = Float::with_val(prec, x.abs_ref());
        if *f > Float::with_val(prec, (&ax).pow(order)) && delta.as_ref().is_none_or(|d| ax < *d) {
            delta = Some(ax);
        }
    }
    let below = raw
        .iter()
        .filter(|(x, _)| {
            delta
                .as_ref()
                .is_none_or(|d| Float::with_val(prec, x.abs_ref()) < *d)
        })
        .count();
    let passed = below >= depth.div_ceil(2);
    Ok(FlatnessReport {
        slope,
        order_checked: order,
        samples,
        delta: delta.map_or(f64::INFINITY, |d| d.to_f64()),
        passed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::farey::christoffel_word;
    use crate::trace::Mat2;

    fn modular() -> ModuliPoint {
        ModuliPoint::modular(256)
    }

    /// Length from the Christoffel word evaluated on explicit generators.
    fn oracle_length(c: (i64, i64)) -> f64 {
        let (a, b) = Mat2::modular_generators(256);
        let w = christoffel_word(PrimitiveClass::new(c.0, c.1).unwrap());
        let t = w.evaluate(&a, &b).trace().to_f64().abs();
        2.0 * (t / 2.0).acosh()
    }

    #[test]
    fn norm_of_class_examples() {
        let m = modular();
        let l10 = norm_of_class(&m, (1, 0)).unwrap().to_f64();
        assert!((l10 - 2.0 * 1.5f64.acosh()).abs() < 1e-14);
        assert!((l10 - 1.924_847_300_2).abs() < 1e-10);
        let l20 = norm_of_class(&m, (2, 0)).unwrap().to_f64();
        assert!((l20 - 3.849_694_600_5).abs() < 1e-10);
        let l21 = norm_of_class(&m, (2, 1)).unwrap().to_f64();
        assert!((l21 - oracle_length((2, 1))).abs() < 1e-12);
        assert!((l21 - 3.525_494_348_0).abs() < 1e-10);
        assert_eq!(norm_of_class(&m, (0, 0)).unwrap_err(), Error::ZeroClass);
    }

    #[test]
    fn norm_matches_word_oracle() {
        let m = modular();
        for c in [(3, 1), (3, 2), (5, 3), (-4, 7), (2, -5), (-1, -1)] {
            let l = norm_of_class(&m, c).unwrap().to_f64();
            assert!((l - oracle_length(c)).abs() < 1e-9 * l, "{c:?}");
        }
    }

    #[test]
    fn norm_of_vector_rational_and_homogeneous() {
        let m = modular();
        let e = norm_of_vector(&m, (2.0, 1.0), 1e-9).unwrap();
        assert!((e.value.to_f64() - 3.525_494_348_0).abs() < 1e-9);
        let v = norm_of_vector(&m, (0.3, 0.7), 1e-9).unwrap().value.to_f64();
        let v2 = norm_of_vector(&m, (0.6, 1.4), 1e-9).unwrap().value.to_f64();
        assert!((v2 - 2.0 * v).abs() < 2e-9);
        let neg = norm_of_vector(&m, (-0.3, -0.7), 1e-9)
            .unwrap()
            .value
            .to_f64();
        assert_eq!(neg, v);
    }

    #[test]
    fn norm_of_vector_golden_bracket() {
        let m = modular();
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        let e = norm_of_vector(&m, (phi, 1.0), 1e-6).unwrap();
        assert!(Float::with_val(256, &e.upper - &e.lower) <= 1e-6);
        let fib = [(1, 1), (2, 1), (3, 2), (5, 3), (8, 5), (13, 8)];
        let mut gaps = Vec::new();
        for (p, q) in fib {
            // ℓ(p, q) / q → ℓ(φ, 1) along the convergents
            let per_unit = oracle_length((p, q)) / q as f64;
            gaps.push((per_unit - e.value.to_f64()).abs());
        }
        for w in gaps.windows(2) {
            assert!(w[1] < w[0]);
        }
    }

    #[test]
    fn boundary_refine_modular() {
        let m = modular();
        let ball = boundary_refine(&m, 0.01).unwrap();
        let (lo, hi) = ball.area_interval();
        assert!(hi - lo <= 0.01);
        // inscribed Farey polygon limit
        assert!(lo <= 0.891_803_166 && 0.891_803_166 <= hi, "{lo} {hi}");
        let l = 2.0 * 1.5f64.acosh();
        assert!(lo >= 2.0 / (l * l));
        for v in &ball.vertices {
            let (x, y) = v.point.to_f64();
            let len = v.length.to_f64();
            assert!((x * len - v.class.p() as f64).abs() < 1e-12);
            assert!((y * len - v.class.q() as f64).abs() < 1e-12);
        }
        for w in ball.vertices.windows(2) {
            assert_eq!(w[0].class.cmp_angle(&w[1].class), Ordering::Less);
        }
    }

    #[test]
    fn refinement_is_nested() {
        let m = modular();
        let coarse = boundary_refine(&m, 0.5).unwrap();
        let fine = boundary_refine(&m, 0.01).unwrap();
        assert!(fine.vertices.len() > coarse.vertices.len());
        assert!(fine.area_lower >= coarse.area_lower);
        assert!(fine.area_upper <= coarse.area_upper);
    }

    #[test]
    fn vertex_budget_exhaustion() {
        let err = boundary_refine_with_budget(&modular(), 1e-6, 16).unwrap_err();
        assert_eq!(err.kind(), "PrecisionExhausted");
    }

    #[test]
    fn neighbour_margin_matches_wide_subtraction() {
        let wide = ModuliPoint::modular(2048);
        let m = modular();
        for (u, v) in [
            ((12, 11), (11, 10)),
            ((1, 0), (0, 1)),
            ((34, 21), (21, 13)),
            ((-5, 3), (2, -1)),
        ] {
            let direct = {
                let lu = norm_of_class(&wide, u).unwrap().into_inner();
                let lv = norm_of_class(&wide, v).unwrap().into_inner();
                let luv = norm_of_class(&wide, (u.0 + v.0, u.1 + v.1))
                    .unwrap()
                    .into_inner();
                lu + lv - luv
            };
            let stable = triangle_margin(&m, u, v).unwrap();
            assert!(stable > 0);
            let rel = Float::with_val(2048, &direct - &stable).abs() / &direct;
            assert!(rel < 1e-70, "{u:?} {v:?}: {rel}");
        }
    }

    #[test]
    fn unresolved_margin_is_reported() {
        let m = ModuliPoint::modular(64);
        let err = triangle_margin(&m, (61, 41), (177, 119)).unwrap_err();
        assert_eq!(err.kind(), "PrecisionExhausted");
    }

    #[test]
    fn corner_symmetry_and_positivity() {
        let m = modular();
        let c21 = corner_exterior_angle(&m, PrimitiveClass::new(2, 1).unwrap(), 1e-9).unwrap();
        let c12 = corner_exterior_angle(&m, PrimitiveClass::new(1, 2).unwrap(), 1e-9).unwrap();
        assert!(c21.converged);
        assert!((c21.exterior_angle - c12.exterior_angle).abs() < 1e-9);
        let c10 = corner_exterior_angle(&m, E1, 1e-9).unwrap();
        assert!(c10.exterior_angle > 0.0 && c10.exterior_angle < std::f64::consts::PI);
    }

    #[test]
    fn golden_partial_quotients() {
        let q = QuadraticIrrational::golden().partial_quotients(8).unwrap();
        assert!(q.iter().all(|a| *a == 1));
        // √2 = [1; 2, 2, ...], (3 - √7)/2 = 0.177… = [0; 5, 1, 1, ...]
        let s2 = QuadraticIrrational::new(0, 1, 2, 1)
            .unwrap()
            .partial_quotients(4)
            .unwrap();
        assert_eq!(s2, [1, 2, 2, 2].map(Integer::from));
        let neg = QuadraticIrrational::new(3, -1, 7, 2)
            .unwrap()
            .partial_quotients(3)
            .unwrap();
        assert_eq!(neg[0], 0);
        let x = (3.0 - 7f64.sqrt()) / 2.0;
        assert_eq!(neg[1], (1.0 / x).floor() as i64);
        assert_eq!(
            QuadraticIrrational::new(1, 1, 4, 1)
                .unwrap()
                .partial_quotients(2)
                .unwrap_err(),
            Error::RationalSlope
        );
    }

    #[test]
    fn linear_fit_exact_line() {
        let fit = linear_fit(&[(0.0, 1.0), (1.0, 3.0), (2.0, 5.0)]);
        assert!((fit.slope - 2.0).abs() < 1e-12);
        assert!((fit.intercept - 1.0).abs() < 1e-12);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
    }
}
