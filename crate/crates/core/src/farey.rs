//! Stern–Brocot enumeration of primitive homology classes.
//!
//! Primitive classes up to sign are the vertices of two Farey trees: one
//! spanning the first quadrant between `(1, 0)` and `(0, 1)`, one spanning
//! the second quadrant between `(0, 1)` and `(-1, 0)`. Along an edge pair of
//! Farey neighbours `a`, `b` (with `det(a, b) = 1`) the traces obey
//! `t(a + b) + t(a - b) = t(a)·t(b)`, so every trace follows from the three
//! seeds `t(1, 0) = x`, `t(0, 1) = y`, `t(1, 1) = z`.
//!
//! Word convention: `(1, 0) ↦ A`, `(0, 1) ↦ B`, `(1, 1) ↦ AB`.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Neg, Sub};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rug::{Float, Integer};

use crate::error::{Error, Result};
use crate::trace::{Mat2, ModuliPoint, Seeds, TraceScalar};

/// Default cap on Stern–Brocot depth for [`enumerate_classes`].
pub const DEFAULT_DEPTH_CAP: usize = 64;

/// Subtrees shallower than this are counted in parallel.
const PARALLEL_SPLIT_DEPTH: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PrimitiveClass {
    p: i64,
    q: i64,
}

impl PrimitiveClass {
    pub fn new(p: i64, q: i64) -> Result<Self> {
        if p == 0 && q == 0 {
            return Err(Error::ZeroClass);
        }
        if gcd(p, q) != 1 {
            return Err(Error::NotPrimitive { p, q });
        }
        Ok(PrimitiveClass { p, q })
    }

    pub(crate) const fn new_unchecked(p: i64, q: i64) -> Self {
        PrimitiveClass { p, q }
    }

    pub fn p(&self) -> i64 {
        self.p
    }

    pub fn q(&self) -> i64 {
        self.q
    }

    /// `max(|p|, |q|)`
    pub fn height(&self) -> i64 {
        self.p.abs().max(self.q.abs())
    }

    /// `p·q' - q·p'`; positive when `other` is counter-clockwise of `self`.
    pub fn det(&self, other: &PrimitiveClass) -> i64 {
        self.p * other.q - self.q * other.p
    }

    /// Representative of `±self` in the upper half plane
    /// (`q > 0`, or `q = 0` and `p > 0`).
    pub fn canonical(self) -> Self {
        if self.q < 0 || (self.q == 0 && self.p < 0) {
            -self
        } else {
            self
        }
    }

    /// Compares polar angles in `[0, 2π)` exactly.
    pub fn cmp_angle(&self, other: &PrimitiveClass) -> Ordering {
        let half = |c: &PrimitiveClass| {
            if c.q > 0 || (c.q == 0 && c.p > 0) {
                0
            } else {
                1
            }
        };
        half(self)
            .cmp(&half(other))
            .then_with(|| 0.cmp(&self.det(other)))
    }
}

impl fmt::Display for PrimitiveClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.p, self.q)
    }
}

impl Add for PrimitiveClass {
    type Output = PrimitiveClass;
    fn add(self, o: PrimitiveClass) -> PrimitiveClass {
        PrimitiveClass::new_unchecked(self.p + o.p, self.q + o.q)
    }
}

impl Sub for PrimitiveClass {
    type Output = PrimitiveClass;
    fn sub(self, o: PrimitiveClass) -> PrimitiveClass {
        PrimitiveClass::new_unchecked(self.p - o.p, self.q - o.q)
    }
}

impl Neg for PrimitiveClass {
    type Output = PrimitiveClass;
    fn neg(self) -> PrimitiveClass {
        PrimitiveClass::new_unchecked(-self.p, -self.q)
    }
}

pub fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.unsigned_abs(), b.unsigned_abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a as i64
}

/// A Farey neighbour `u` of `c` with `det(c, u) = 1`.
pub fn farey_neighbor(c: PrimitiveClass) -> PrimitiveClass {
    // extended Euclid on (p, q): find s, t with p·t - q·s = 1
    let (mut old_r, mut r) = (c.p, c.q);
    let (mut old_s, mut s) = (1i64, 0i64);
    let (mut old_t, mut t) = (0i64, 1i64);
    while r != 0 {
        let k = old_r.div_euclid(r);
        (old_r, r) = (r, old_r - k * r);
        (old_s, s) = (s, old_s - k * s);
        (old_t, t) = (t, old_t - k * t);
    }
    // old_s·p + old_t·q = old_r = ±1
    let sign = old_r.signum();
    // det(c, u) = p·u_q - q·u_p; take u = (-old_t, old_s)·sign
    PrimitiveClass::new_unchecked(-old_t * sign, old_s * sign)
}

/// The two Farey parents of an interior first-quadrant class, sorted by `(p, q)`.
pub fn farey_parents(c: PrimitiveClass) -> Result<(PrimitiveClass, PrimitiveClass)> {
    if c.p < 1 || c.q < 1 || (c.p == 1 && c.q == 1) {
        return Err(Error::NotInTree { p: c.p, q: c.q });
    }
    let mut u = farey_neighbor(c);
    // shift u by multiples of c into the box 0 <= u <= c
    let k = if c.p >= c.q {
        u.p.div_euclid(c.p)
    } else {
        u.q.div_euclid(c.q)
    };
    u = PrimitiveClass::new_unchecked(u.p - k * c.p, u.q - k * c.q);
    let v = c - u;
    Ok(if (u.p, u.q) <= (v.p, v.q) {
        (u, v)
    } else {
        (v, u)
    })
}

/// A pair of Farey neighbours `a`, `b` (`det(a, b) = 1`) with their traces and
/// the trace of `a - b`.
#[derive(Clone, Debug)]
pub(crate) struct Pair<T> {
    pub a: PrimitiveClass,
    pub b: PrimitiveClass,
    pub ta: T,
    pub tb: T,
    pub tdiff: T,
}

impl<T: TraceScalar> Pair<T> {
    pub fn mediant(&self) -> PrimitiveClass {
        self.a + self.b
    }

    pub fn mediant_trace(&self) -> T {
        T::mul_sub(&self.ta, &self.tb, &self.tdiff)
    }

    /// `(a, a + b)`
    pub fn left(&self, tm: T) -> Pair<T> {
        Pair {
            a: self.a,
            b: self.mediant(),
            ta: self.ta.clone(),
            tb: tm,
            tdiff: self.tb.clone(),
        }
    }

    /// `(a + b, b)`
    pub fn right(&self, tm: T) -> Pair<T> {
        Pair {
            a: self.mediant(),
            b: self.b,
            ta: tm,
            tb: self.tb.clone(),
            tdiff: self.ta.clone(),
        }
    }
}

pub(crate) const E1: PrimitiveClass = PrimitiveClass::new_unchecked(1, 0);
pub(crate) const E2: PrimitiveClass = PrimitiveClass::new_unchecked(0, 1);

/// Root pairs of the first- and second-quadrant trees.
pub(crate) fn root_pairs<T: TraceScalar>(seeds: &[T; 3]) -> [Pair<T>; 2] {
    let [x, y, z] = seeds;
    [
        Pair {
            a: E1,
            b: E2,
            ta: x.clone(),
            tb: y.clone(),
            tdiff: T::mul_sub(x, y, z),
        },
        Pair {
            a: E2,
            b: -E1,
            ta: y.clone(),
            tb: x.clone(),
            tdiff: z.clone(),
        },
    ]
}

fn trace_generic<T: TraceScalar>(seeds: &[T; 3], c: PrimitiveClass) -> T {
    let c = c.canonical();
    if c == E1 {
        return seeds[0].clone();
    }
    if c == E2 {
        return seeds[1].clone();
    }
    let [q1, q2] = root_pairs(seeds);
    let mut pair = if c.p > 0 { q1 } else { q2 };
    loop {
        let m = pair.mediant();
        let tm = pair.mediant_trace();
        if m == c {
            return tm;
        }
        pair = if m.det(&c) > 0 {
            pair.right(tm)
        } else {
            pair.left(tm)
        };
    }
}

/// Trace of the simple closed geodesic in class `c` (sign ignored).
pub fn class_trace(m: &ModuliPoint, c: PrimitiveClass) -> Float {
    let prec = m.precision_bits();
    match m.seeds() {
        Seeds::Exact(s) => trace_generic(s, c).to_float(prec),
        Seeds::Real(s) => trace_generic(&s, c),
    }
}

/// Exact integer trace, when the moduli point has integer traces.
pub fn class_trace_exact(m: &ModuliPoint, c: PrimitiveClass) -> Option<Integer> {
    m.exact_triple().map(|s| trace_generic(s, c))
}

/// A vertex of the Stern–Brocot tree: Farey neighbours and their mediant.
#[derive(Debug, Clone)]
pub struct FareyNode {
    pub left: PrimitiveClass,
    pub right: PrimitiveClass,
    pub mediant: PrimitiveClass,
    /// `(t(left), t(right), t(mediant))`
    pub triple: (Float, Float, Float),
    /// `t(left - right)`, the other root of the Markoff quadratic.
    pub difference_trace: Float,
    pub depth: usize,
}

impl FareyNode {
    fn from_pair<T: TraceScalar>(pair: &Pair<T>, tm: &T, depth: usize, prec: u32) -> Self {
        FareyNode {
            left: pair.a,
            right: pair.b,
            mediant: pair.mediant(),
            triple: (
                pair.ta.to_float(prec),
                pair.tb.to_float(prec),
                tm.to_float(prec),
            ),
            difference_trace: pair.tdiff.to_float(prec),
            depth,
        }
    }

    /// True when the mediant is the larger root, i.e. every descendant has a
    /// larger trace.
    pub fn is_ascending(&self) -> bool {
        self.triple.2 >= self.difference_trace
    }
}

/// Visits every tree node with `depth <= max_depth` in both quadrants,
/// depth-first, first quadrant first.
pub fn visit_nodes(m: &ModuliPoint, max_depth: usize, mut visit: impl FnMut(&FareyNode)) {
    fn go<T: TraceScalar>(
        seeds: &[T; 3],
        max_depth: usize,
        prec: u32,
        visit: &mut dyn FnMut(&FareyNode),
    ) {
        for root in root_pairs(seeds) {
            let mut stack = vec![(root, 0usize)];
            while let Some((pair, depth)) = stack.pop() {
                let tm = pair.mediant_trace();
                visit(&FareyNode::from_pair(&pair, &tm, depth, prec));
                if depth < max_depth {
                    stack.push((pair.right(tm.clone()), depth + 1));
                    stack.push((pair.left(tm), depth + 1));
                }
            }
        }
    }
    let prec = m.precision_bits();
    match m.seeds() {
        Seeds::Exact(s) => go(s, max_depth, prec, &mut visit),
        Seeds::Real(s) => go(&s, max_depth, prec, &mut visit),
    }
}

/// Locates the tree node whose mediant is `c`.
pub fn node_of(m: &ModuliPoint, c: PrimitiveClass) -> Result<FareyNode> {
    fn go<T: TraceScalar>(seeds: &[T; 3], c: PrimitiveClass, prec: u32) -> Option<FareyNode> {
        let [q1, q2] = root_pairs(seeds);
        let mut pair = if c.p > 0 { q1 } else { q2 };
        let mut depth = 0;
        loop {
            let m = pair.mediant();
            let tm = pair.mediant_trace();
            if m == c {
                return Some(FareyNode::from_pair(&pair, &tm, depth, prec));
            }
            pair = if m.det(&c) > 0 {
                pair.right(tm)
            } else {
                pair.left(tm)
            };
            depth += 1;
        }
    }
    let c = c.canonical();
    if c.q == 0 || c.p == 0 {
        return Err(Error::NotInTree { p: c.p, q: c.q });
    }
    let prec = m.precision_bits();
    Ok(match m.seeds() {
        Seeds::Exact(s) => go(s, c, prec),
        Seeds::Real(s) => go(&s, c, prec),
    }
    .expect("descent reaches every interior class"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Letter {
    A,
    B,
    AInv,
    BInv,
}

impl Letter {
    fn inverse(self) -> Letter {
        match self {
            Letter::A => Letter::AInv,
            Letter::B => Letter::BInv,
            Letter::AInv => Letter::A,
            Letter::BInv => Letter::B,
        }
    }
}

/// A word in `A`, `B` and their inverses. Displayed with lowercase letters
/// for inverses.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChristoffelWord {
    pub letters: Vec<Letter>,
}

impl ChristoffelWord {
    /// Multiplies out the word with `A`, `B` substituted.
    pub fn evaluate(&self, a: &Mat2, b: &Mat2) -> Mat2 {
        let (ai, bi) = (a.inverse(), b.inverse());
        let mut acc = Mat2::identity(a.prec());
        for l in &self.letters {
            let g = match l {
                Letter::A => a,
                Letter::B => b,
                Letter::AInv => &ai,
                Letter::BInv => &bi,
            };
            acc = &acc * g;
        }
        acc
    }

    pub fn count(&self, letter: Letter) -> usize {
        self.letters.iter().filter(|&&l| l == letter).count()
    }
}

impl fmt::Display for ChristoffelWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.letters {
            f.write_str(match l {
                Letter::A => "A",
                Letter::B => "B",
                Letter::AInv => "a",
                Letter::BInv => "b",
            })?;
        }
        Ok(())
    }
}

/// Lower Christoffel word of the class.
///
/// First-quadrant classes use `A`, `B`; second-quadrant classes replace `A`
/// with `A⁻¹`; lower-half classes are the inverse word of their negation.
pub fn christoffel_word(c: PrimitiveClass) -> ChristoffelWord {
    let canon = c.canonical();
    let (p, q) = (canon.p.unsigned_abs(), canon.q.unsigned_abs());
    let horizontal = if canon.p >= 0 {
        Letter::A
    } else {
        Letter::AInv
    };
    let n = p + q;
    let mut letters = Vec::with_capacity(n as usize);
    for i in 1..=n {
        let up = (i * q) / n > ((i - 1) * q) / n;
        letters.push(if up { Letter::B } else { horizontal });
    }
    if canon != c {
        letters.reverse();
        for l in &mut letters {
            *l = l.inverse();
        }
    }
    ChristoffelWord { letters }
}

/// `count` seeded pairs of non-proportional primitive classes with
/// coordinates in `[-max_height, max_height]`.
pub fn random_class_pairs(
    seed: u64,
    count: usize,
    max_height: i64,
) -> Vec<(PrimitiveClass, PrimitiveClass)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let class = |rng: &mut ChaCha8Rng| loop {
        let p = rng.gen_range(-max_height..=max_height);
        let q = rng.gen_range(-max_height..=max_height);
        if let Ok(c) = PrimitiveClass::new(p, q) {
            return c;
        }
    };
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let (u, v) = (class(&mut rng), class(&mut rng));
        if u.det(&v) != 0 {
            out.push((u, v));
        }
    }
    out
}

#[derive(Debug, Clone, Copy)]
pub struct EnumerationConfig {
    pub depth_cap: usize,
}

impl Default for EnumerationConfig {
    fn default() -> Self {
        EnumerationConfig {
            depth_cap: DEFAULT_DEPTH_CAP,
        }
    }
}

/// Receives classes from [`enumerate_classes`].
pub trait ClassVisitor {
    fn visit(&mut self, class: PrimitiveClass, trace: &Float);

    /// Called for each mediant whose subtree was cut because its trace
    /// exceeds the bound.
    fn pruned(&mut self, _class: PrimitiveClass, _trace: &Float) {}
}

impl<F: FnMut(PrimitiveClass, &Float)> ClassVisitor for F {
    fn visit(&mut self, class: PrimitiveClass, trace: &Float) {
        self(class, trace)
    }
}

/// Streams every primitive class (one per ± pair, in the closed first and
/// open second quadrant) whose trace is `<= trace_bound`. Returns how many
/// were yielded.
///
/// A subtree is pruned only where its mediant is the larger root of the
/// Markoff quadratic; the finitely many descending nodes on the way to the
/// systole are always explored, so markings that are far from reduced are
/// still enumerated completely.
pub fn enumerate_classes(
    m: &ModuliPoint,
    trace_bound: &Float,
    cfg: EnumerationConfig,
    visitor: &mut dyn ClassVisitor,
) -> Result<usize> {
    fn go<T: TraceScalar>(
        seeds: &[T; 3],
        bound: &Float,
        cfg: EnumerationConfig,
        prec: u32,
        visitor: &mut dyn ClassVisitor,
    ) -> Result<usize> {
        let mut yielded = 0;
        for (class, t) in [(E1, &seeds[0]), (E2, &seeds[1])] {
            if t.cmp_float(bound) != Ordering::Greater {
                visitor.visit(class, &t.to_float(prec));
                yielded += 1;
            }
        }
        for root in root_pairs(seeds) {
            let mut stack = vec![(root, 0usize)];
            while let Some((pair, depth)) = stack.pop() {
                let tm = pair.mediant_trace();
                let within = tm.cmp_float(bound) != Ordering::Greater;
                let ascending = tm.at_least(&pair.tdiff);
                if within {
                    visitor.visit(pair.mediant(), &tm.to_float(prec));
                    yielded += 1;
                } else if ascending {
                    visitor.pruned(pair.mediant(), &tm.to_float(prec));
                    continue;
                }
                if depth >= cfg.depth_cap {
                    return Err(Error::DepthExceeded { cap: cfg.depth_cap });
                }
                stack.push((pair.right(tm.clone()), depth + 1));
                stack.push((pair.left(tm), depth + 1));
            }
        }
        Ok(yielded)
    }
    let prec = m.precision_bits();
    match m.seeds() {
        Seeds::Exact(s) => go(s, trace_bound, cfg, prec, visitor),
        Seeds::Real(s) => go(&s, trace_bound, cfg, prec, visitor),
    }
}

/// Materialised form of [`enumerate_classes`].
pub fn collect_classes(
    m: &ModuliPoint,
    trace_bound: &Float,
    cfg: EnumerationConfig,
) -> Result<Vec<(PrimitiveClass, Float)>> {
    let mut out = Vec::new();
    enumerate_classes(m, trace_bound, cfg, &mut |c: PrimitiveClass, t: &Float| {
        out.push((c, t.clone()))
    })?;
    Ok(out)
}

/// Number of classes [`enumerate_classes`] would yield, counted with
/// subtrees split across threads. The result does not depend on scheduling.
pub fn count_classes(m: &ModuliPoint, trace_bound: &Float, cfg: EnumerationConfig) -> Result<u64> {
    fn subtree<T: TraceScalar>(
        pair: Pair<T>,
        depth: usize,
        bound: &Float,
        cap: usize,
    ) -> Result<u64> {
        let tm = pair.mediant_trace();
        let within = tm.cmp_float(bound) != Ordering::Greater;
        if !within && tm.at_least(&pair.tdiff) {
            return Ok(0);
        }
        if depth >= cap {
            return Err(Error::DepthExceeded { cap });
        }
        let (l, r) = (pair.left(tm.clone()), pair.right(tm));
        let (cl, cr) = if depth < PARALLEL_SPLIT_DEPTH {
            rayon::join(
                || subtree(l, depth + 1, bound, cap),
                || subtree(r, depth + 1, bound, cap),
            )
        } else {
            (
                subtree(l, depth + 1, bound, cap),
                subtree(r, depth + 1, bound, cap),
            )
        };
        Ok(within as u64 + cl? + cr?)
    }
    fn go<T: TraceScalar>(seeds: &[T; 3], bound: &Float, cap: usize) -> Result<u64> {
        let axes = seeds[..2]
            .iter()
            .filter(|t| t.cmp_float(bound) != Ordering::Greater)
            .count() as u64;
        let [q1, q2] = root_pairs(seeds);
        let (a, b) = rayon::join(|| subtree(q1, 0, bound, cap), || subtree(q2, 0, bound, cap));
        Ok(axes + a? + b?)
    }
    match m.seeds() {
        Seeds::Exact(s) => go(s, trace_bound, cfg.depth_cap),
        Seeds::Real(s) => go(&s, trace_bound, cfg.depth_cap),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pc(p: i64, q: i64) -> PrimitiveClass {
        PrimitiveClass::new(p, q).unwrap()
    }

    #[test]
    fn class_validation() {
        assert_eq!(PrimitiveClass::new(0, 0).unwrap_err(), Error::ZeroClass);
        assert_eq!(
            PrimitiveClass::new(4, 2).unwrap_err(),
            Error::NotPrimitive { p: 4, q: 2 }
        );
        assert!(PrimitiveClass::new(-3, 2).is_ok());
    }

    #[test]
    fn parents_examples() {
        assert_eq!(farey_parents(pc(2, 1)).unwrap(), (pc(1, 0), pc(1, 1)));
        let (u, v) = farey_parents(pc(5, 2)).unwrap();
        assert_eq!((u, v), (pc(2, 1), pc(3, 1)));
        assert_eq!(u.det(&v), -1);
        assert_eq!(
            farey_parents(pc(1, 1)).unwrap_err(),
            Error::NotInTree { p: 1, q: 1 }
        );
        assert!(farey_parents(pc(1, 0)).is_err());
        assert!(farey_parents(pc(-2, 1)).is_err());
    }

    #[test]
    fn parents_sum_and_unimodular() {
        for p in 1..40 {
            for q in 1..40 {
                if gcd(p, q) != 1 || (p, q) == (1, 1) {
                    continue;
                }
                let (u, v) = farey_parents(pc(p, q)).unwrap();
                assert_eq!(u + v, pc(p, q));
                assert_eq!(u.det(&v).abs(), 1);
                assert!(u.p >= 0 && u.q >= 0 && v.p >= 0 && v.q >= 0);
            }
        }
    }

    #[test]
    fn neighbor_is_unimodular() {
        for (p, q) in [(1, 0), (0, 1), (5, 2), (-3, 7), (13, -8), (-1, -1)] {
            let c = pc(p, q);
            assert_eq!(c.det(&farey_neighbor(c)), 1, "{c}");
        }
    }

    #[test]
    fn modular_traces() {
        let m = ModuliPoint::modular(256);
        assert_eq!(class_trace(&m, pc(2, 1)), 6);
        assert_eq!(class_trace(&m, pc(5, 2)), 87);
        assert_eq!(class_trace(&m, pc(1, -1)), 6);
        assert_eq!(class_trace(&m, pc(-1, 1)), 6);
        assert_eq!(class_trace(&m, pc(-2, -1)), 6);
        assert_eq!(class_trace_exact(&m, pc(3, 2)), Some(Integer::from(15)));
    }

    #[test]
    fn christoffel_examples() {
        assert_eq!(christoffel_word(pc(1, 0)).to_string(), "A");
        assert_eq!(christoffel_word(pc(0, 1)).to_string(), "B");
        assert_eq!(christoffel_word(pc(1, 1)).to_string(), "AB");
        assert_eq!(christoffel_word(pc(2, 1)).to_string(), "AAB");
        assert_eq!(christoffel_word(pc(-1, 1)).to_string(), "aB");
        assert_eq!(christoffel_word(pc(-2, -1)).to_string(), "baa");
        let w = christoffel_word(pc(5, 3));
        assert_eq!((w.count(Letter::A), w.count(Letter::B)), (5, 3));
    }

    #[test]
    fn christoffel_matrix_oracle_modular() {
        let (a, b) = Mat2::modular_generators(256);
        let w = christoffel_word(pc(2, 1));
        assert_eq!(w.evaluate(&a, &b).trace(), 6);
        let w = christoffel_word(pc(5, 2));
        assert_eq!(w.evaluate(&a, &b).trace(), 87);
        let ab_inv = &a * &b.inverse();
        assert_eq!(ab_inv.trace(), 6);
    }

    #[test]
    fn enumerate_small_bounds() {
        let m = ModuliPoint::modular(256);
        let bound = |v: u32| Float::with_val(256, v);
        let mut got = collect_classes(&m, &bound(3), Default::default()).unwrap();
        got.sort_by(|a, b| a.0.cmp_angle(&b.0));
        let classes: Vec<_> = got.iter().map(|(c, _)| (c.p, c.q)).collect();
        assert_eq!(classes, vec![(1, 0), (1, 1), (0, 1)]);
        assert!(got.iter().all(|(_, t)| *t == 3));

        let mut got = collect_classes(&m, &bound(6), Default::default()).unwrap();
        got.sort_by(|a, b| a.0.cmp_angle(&b.0));
        let classes: Vec<_> = got.iter().map(|(c, _)| (c.p, c.q)).collect();
        assert_eq!(
            classes,
            vec![(1, 0), (2, 1), (1, 1), (1, 2), (0, 1), (-1, 1)]
        );

        assert!(collect_classes(&m, &bound(2), Default::default())
            .unwrap()
            .is_empty());
    }

    #[test]
    fn enumerate_depth_cap() {
        let m = ModuliPoint::modular(256);
        // (k, 1) has trace ~ 2.618^k; 1e40 needs depth ~ 95
        let bound = Float::with_val(256, 1e40);
        let err = collect_classes(&m, &bound, Default::default()).unwrap_err();
        assert_eq!(err, Error::DepthExceeded { cap: 64 });
        let ok = collect_classes(&m, &bound, EnumerationConfig { depth_cap: 200 });
        assert!(ok.is_ok());
    }

    #[test]
    fn count_matches_collect() {
        let m = ModuliPoint::modular(256);
        let bound = Float::with_val(256, 1e12);
        let cfg = EnumerationConfig { depth_cap: 200 };
        let n = collect_classes(&m, &bound, cfg).unwrap().len() as u64;
        assert_eq!(count_classes(&m, &bound, cfg).unwrap(), n);
    }

    #[test]
    fn unreduced_marking_is_enumerated_completely() {
        // (3, 6, 3) is the modular torus with a skewed marking; (2, 1) has
        // trace 3 below the descending root.
        let m = ModuliPoint::from_integers(3.into(), 6.into(), 3.into(), 256).unwrap();
        let got = collect_classes(&m, &Float::with_val(256, 3), Default::default()).unwrap();
        assert_eq!(got.len(), 3);
        let n6 = collect_classes(&m, &Float::with_val(256, 6), Default::default())
            .unwrap()
            .len();
        assert_eq!(n6, 6);
    }
}
