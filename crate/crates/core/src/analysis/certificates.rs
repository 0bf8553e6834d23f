//! Constructive versions of the collapse arguments for trees, diamonds and
//! Laakso graphs under a uniformly convex operator.
//!
//! Each extractor follows its induction literally and returns the vertices
//! it selects together with the evaluated inequality
//! `lhs ≤ bound · rhs`.

use serde::Serialize;

use super::report::{factorization_report, FactorizationReport};
use crate::bitgraphs::{laakso_gadget, Family, MetricGraph};
use crate::bitstring::BitString;
use crate::embeddings::Embedding;
use crate::error::{argument, Error, Result};
use crate::spaces::{DeltaProvider, NormedOperator};

/// Relative slack for hypothesis checks and for the final inequality.
pub const CERTIFICATE_RTOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Pick {
    Y,
    Z,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MidpointChoice {
    pub pick: Pick,
    /// `min{‖x+y‖, ‖x+z‖}`.
    pub norm: f64,
    pub delta: f64,
    /// `2(1 − δ(1/2D))`.
    pub bound: f64,
    pub holds: bool,
}

/// For `x, y, z ∈ B_X` with `‖(Ay − Az)/2‖ ≥ 1/D`, picks whichever of
/// `y, z` gives the smaller `‖x + ·‖` and checks it against
/// `2(1 − δ(1/2D))`. Ties pick `y`.
pub fn midpoint_selector(
    x: &[f64],
    y: &[f64],
    z: &[f64],
    op: &NormedOperator,
    d: f64,
    delta: &dyn DeltaProvider,
) -> Result<MidpointChoice> {
    let dom = op.domain();
    if !(d >= 1.0) {
        return Err(argument(format!("D must be at least 1, got {d}")));
    }
    for (name, v) in [("x", x), ("y", y), ("z", z)] {
        let n = dom.norm(v)?;
        if n > 1.0 + CERTIFICATE_RTOL {
            return Err(Error::Precondition(format!("‖{name}‖ = {n} > 1")));
        }
    }
    let half: Vec<f64> = y.iter().zip(z).map(|(a, b)| (a - b) / 2.0).collect();
    let sep = op.codomain().eval(&op.apply(&half)?);
    if sep < (1.0 - CERTIFICATE_RTOL) / d {
        return Err(Error::Precondition(format!(
            "‖(Ay − Az)/2‖ = {sep} < 1/D = {}",
            1.0 / d
        )));
    }
    let sum = |w: &[f64]| dom.eval(&x.iter().zip(w).map(|(a, b)| a + b).collect::<Vec<_>>());
    let (ny, nz) = (sum(y), sum(z));
    let (pick, norm) = if nz < ny { (Pick::Z, nz) } else { (Pick::Y, ny) };
    let delta_value = delta.delta(1.0 / (2.0 * d));
    let bound = 2.0 * (1.0 - delta_value);
    Ok(MidpointChoice {
        pick,
        norm,
        delta: delta_value,
        bound,
        holds: norm <= bound * (1.0 + CERTIFICATE_RTOL),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CollapseCertificate {
    pub family: Family,
    /// Induction depth: the graph is `B_{2^n}`, `D_n` or `L_n`.
    pub n: usize,
    /// `(t_0, t_1)` for trees, `(b, t)` for diamonds, `(0…0, 1…1)` for
    /// Laakso graphs.
    pub endpoints: [BitString; 2],
    /// Final adjacent pair `(s, s')`; absent for trees.
    pub adjacent_pair: Option<[BitString; 2]>,
    /// Pair selected at each induction stage, coarsest first.
    pub trail: Vec<[BitString; 2]>,
    #[serde(rename = "D")]
    pub d: f64,
    pub delta_argument: f64,
    pub delta_used: f64,
    pub delta_provider: String,
    pub delta_exact: bool,
    pub bound: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

impl CollapseCertificate {
    /// `lhs ≤ bound · rhs` up to [`CERTIFICATE_RTOL`].
    pub fn check(&self) -> bool {
        self.lhs <= self.bound * self.rhs * (1.0 + CERTIFICATE_RTOL)
    }
}

/// Verifies `‖A‖ ≤ 1`, `‖f(s)−f(t)‖ ≤ d(s,t)` and
/// `‖Af(s)−Af(t)‖ ≥ d(s,t)/D` on every pair.
pub fn check_two_sided(
    g: &MetricGraph,
    f: &Embedding,
    op: &NormedOperator,
    d: f64,
) -> Result<FactorizationReport> {
    if !(d >= 1.0) || !d.is_finite() {
        return Err(argument(format!("D must be finite and at least 1, got {d}")));
    }
    let norm = op.operator_norm();
    if norm.lower > 1.0 + CERTIFICATE_RTOL {
        return Err(Error::Precondition(format!("‖A‖ ≥ {} > 1", norm.lower)));
    }
    let r = factorization_report(g, f, op)?;
    if r.lip > 1.0 + CERTIFICATE_RTOL {
        let [s, t] = &r.witness_upper;
        return Err(Error::Precondition(format!(
            "‖f({s:?}) − f({t:?})‖ exceeds d by the factor {}",
            r.lip
        )));
    }
    if r.colip < (1.0 - CERTIFICATE_RTOL) / d {
        let [s, t] = &r.witness_lower;
        return Err(Error::Precondition(format!(
            "‖Af({s:?}) − Af({t:?})‖ / d = {} < 1/D = {}",
            r.colip,
            1.0 / d
        )));
    }
    Ok(r)
}

fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn scale(v: Vec<f64>, s: f64) -> Vec<f64> {
    v.into_iter().map(|x| x * s).collect()
}

fn ordered(a: BitString, b: BitString) -> [BitString; 2] {
    if a <= b {
        [a, b]
    } else {
        [b, a]
    }
}

/// The candidate with the largest norm; ties go to the smaller pair.
fn pick_max(cands: Vec<([BitString; 2], f64)>) -> ([BitString; 2], f64) {
    cands
        .into_iter()
        .reduce(|best, c| {
            if c.1 > best.1 || (c.1 == best.1 && c.0 < best.0) {
                c
            } else {
                best
            }
        })
        .expect("nonempty candidate list")
}

struct TreeRun<'a> {
    f: &'a Embedding,
    op: &'a NormedOperator,
    d: f64,
    delta: &'a dyn DeltaProvider,
    one_minus: f64,
    trail: Vec<[BitString; 2]>,
}

impl TreeRun<'_> {
    fn img(&self, s: &BitString) -> Result<&[f64]> {
        self.f.image_of(s)
    }

    /// One step of the base case: among `a⌢0`, `a⌢1` below `a`, the child
    /// `c` minimizing `‖f(c) − f(r)‖`, through the midpoint observation on
    /// vectors rescaled by `1/scale`.
    fn choose(&self, r: &BitString, a: &BitString, c0: &BitString, c1: &BitString, scale_by: f64) -> Result<BitString> {
        let inv = 1.0 / scale_by;
        let fa = self.img(a)?;
        let x = scale(sub(fa, self.img(r)?), inv);
        let y = scale(sub(self.img(c0)?, fa), inv);
        let z = scale(sub(self.img(c1)?, fa), inv);
        let choice = midpoint_selector(&x, &y, &z, self.op, self.d, self.delta)?;
        Ok(match choice.pick {
            Pick::Y => c0.clone(),
            Pick::Z => c1.clone(),
        })
    }

    /// Leaves `(t_0, t_1)` of the subtree of depth `2^n` under `r`, with
    /// first new bits 0 and 1.
    fn claim(&mut self, n: usize, r: &BitString) -> Result<(BitString, BitString)> {
        let out = if n == 1 {
            let (r0, r1) = (r.push(0), r.push(1));
            let t0 = self.choose(r, &r0, &r0.push(0), &r0.push(1), 1.0)?;
            let t1 = self.choose(r, &r1, &r1.push(0), &r1.push(1), 1.0)?;
            (t0, t1)
        } else {
            let (s0, s1) = self.claim(n - 1, r)?;
            let scale_by = (1usize << (n - 1)) as f64 * self.one_minus.powi(n as i32 - 1);
            let mut picked = Vec::with_capacity(2);
            for s in [&s0, &s1] {
                let (a0, a1) = self.claim(n - 1, s)?;
                picked.push(self.choose(r, s, &a0, &a1, scale_by)?);
            }
            let t1 = picked.pop().unwrap();
            (picked.pop().unwrap(), t1)
        };
        if r.is_empty() {
            self.trail.push([out.0.clone(), out.1.clone()]);
        }
        Ok(out)
    }
}

fn finish(
    family: Family,
    n: usize,
    endpoints: [BitString; 2],
    adjacent_pair: Option<[BitString; 2]>,
    trail: Vec<[BitString; 2]>,
    d: f64,
    arg: f64,
    delta: &dyn DeltaProvider,
    bound: f64,
    lhs: f64,
    rhs: f64,
) -> CollapseCertificate {
    let mut c = CollapseCertificate {
        family,
        n,
        endpoints,
        adjacent_pair,
        trail,
        d,
        delta_argument: arg,
        delta_used: delta.delta(arg),
        delta_provider: delta.label(),
        delta_exact: delta.is_exact(),
        bound,
        lhs,
        rhs,
        holds: false,
    };
    c.holds = c.check();
    c
}

fn delta_factor(delta: &dyn DeltaProvider, arg: f64) -> Result<f64> {
    let v = delta.delta(arg);
    if !(0.0..=1.0).contains(&v) {
        return Err(argument(format!("δ({arg}) = {v} lies outside [0, 1]")));
    }
    Ok(1.0 - v)
}

/// Leaves `t_0 ≻ (0)`, `t_1 ≻ (1)` of `B_{2^n}` with
/// `‖f(t_i) − f(∅)‖ ≤ 2^n (1−δ)^n`, `δ = δ(1/2D)`.
pub fn tree_collapse_certificate(
    f: &Embedding,
    op: &NormedOperator,
    d: f64,
    delta: &dyn DeltaProvider,
) -> Result<CollapseCertificate> {
    let g = f.graph();
    if g.family() != Family::Tree {
        return Err(argument(format!("expected a tree, got a {} graph", g.family())));
    }
    let depth = g.n();
    if depth < 2 || !depth.is_power_of_two() {
        return Err(argument(format!(
            "tree depth {depth} is not of the form 2^n with n ≥ 1"
        )));
    }
    let n = depth.trailing_zeros() as usize;
    check_two_sided(g, f, op, d)?;
    let arg = 1.0 / (2.0 * d);
    let one_minus = delta_factor(delta, arg)?;
    let mut run = TreeRun {
        f,
        op,
        d,
        delta,
        one_minus,
        trail: Vec::new(),
    };
    let root = BitString::empty();
    let (t0, t1) = run.claim(n, &root)?;
    let f0 = f.image_of(&root)?;
    let dom = op.domain();
    let lhs = dom
        .distance(f.image_of(&t0)?, f0)
        .max(dom.distance(f.image_of(&t1)?, f0));
    let bound = (1usize << n) as f64 * one_minus.powi(n as i32);
    let trail = run.trail;
    Ok(finish(Family::Tree, n, [t0, t1], None, trail, d, arg, delta, bound, lhs, 1.0))
}

/// Adjacent `s, s'` in `D_n` with
/// `‖f(t) − f(b)‖ ≤ 2^n (1−δ)^n ‖f(s) − f(s')‖`, `δ = δ(1/D)`.
pub fn diamond_collapse_certificate(
    f: &Embedding,
    op: &NormedOperator,
    d: f64,
    delta: &dyn DeltaProvider,
) -> Result<CollapseCertificate> {
    let g = f.graph();
    if g.family() != Family::Diamond || g.n() == 0 {
        return Err(argument("expected a diamond graph D_n with n ≥ 1"));
    }
    let n = g.n();
    check_two_sided(g, f, op, d)?;
    let arg = 1.0 / d;
    let one_minus = delta_factor(delta, arg)?;
    let dom = op.domain();
    // φ_k = 2^{k−n} f∘d^{n−k} on D_k.
    let phi_distance = |k: usize, a: &BitString, b: &BitString| -> Result<f64> {
        let rep = 1usize << (n - k);
        let fa = f.image_of(&a.repeat_each(rep))?;
        let fb = f.image_of(&b.repeat_each(rep))?;
        Ok(dom.distance(fa, fb) / rep as f64)
    };

    let mut trail = Vec::with_capacity(n);
    let mut pair: Option<[BitString; 2]> = None;
    for k in 1..=n {
        // The copy of D_1 between the doubled previous pair.
        let (bottom, j) = match &pair {
            None => (BitString::constant(0, 2), 0),
            Some([u, v]) => {
                let j = (0..u.len()).find(|&i| u.bit(i) != v.bit(i)).expect("adjacent pair");
                let low = if u.bit(j) == 0 { u } else { v };
                (low.doubling(), j)
            }
        };
        let left = bottom.flipped(2 * j + 1);
        let right = bottom.flipped(2 * j);
        let top = left.flipped(2 * j);
        let mut cands = Vec::with_capacity(4);
        for (a, b) in [(&bottom, &left), (&bottom, &right), (&left, &top), (&right, &top)] {
            cands.push((ordered(a.clone(), b.clone()), phi_distance(k, a, b)?));
        }
        let (chosen, _) = pick_max(cands);
        trail.push(chosen.clone());
        pair = Some(chosen);
    }
    let [s, s2] = pair.expect("n ≥ 1");
    let len = 1usize << n;
    let (b, t) = (BitString::constant(0, len), BitString::constant(1, len));
    let lhs = dom.distance(f.image_of(&t)?, f.image_of(&b)?);
    let rhs = dom.distance(f.image_of(&s)?, f.image_of(&s2)?);
    let bound = (1usize << n) as f64 * one_minus.powi(n as i32);
    Ok(finish(Family::Diamond, n, [b, t], Some([s, s2]), trail, d, arg, delta, bound, lhs, rhs))
}

/// Adjacent `s, s'` in `L_n` with
/// `‖f(1) − f(0)‖ ≤ 4^n (1−δ)^n ‖f(s) − f(s')‖`.
///
/// Uses `δ = δ(1/2D)`: in the base case the vectors `f(1100)`, `f(0101)`
/// have norm up to 2, so normalizing them only guarantees a separation of
/// `1/2D`.
pub fn laakso_collapse_certificate(
    f: &Embedding,
    op: &NormedOperator,
    d: f64,
    delta: &dyn DeltaProvider,
) -> Result<CollapseCertificate> {
    let g = f.graph();
    if g.family() != Family::Laakso || g.n() == 0 {
        return Err(argument("expected a Laakso graph L_n with n ≥ 1"));
    }
    let n = g.n();
    check_two_sided(g, f, op, d)?;
    let arg = 1.0 / (2.0 * d);
    let one_minus = delta_factor(delta, arg)?;
    let dom = op.domain();
    let phi_distance = |k: usize, a: &BitString, b: &BitString| -> Result<f64> {
        let rep = 1usize << (2 * (n - k));
        let fa = f.image_of(&a.repeat_each(rep))?;
        let fb = f.image_of(&b.repeat_each(rep))?;
        Ok(dom.distance(fa, fb) / rep as f64)
    };

    let mut trail = Vec::with_capacity(2 * n);
    let mut pair: Option<[BitString; 2]> = None;
    for k in 1..=n {
        let (low, high) = match &pair {
            None => (BitString::constant(0, 1), BitString::constant(1, 1)),
            Some([u, v]) => {
                let j = (0..u.len()).find(|&i| u.bit(i) != v.bit(i)).expect("adjacent pair");
                if u.bit(j) == 0 {
                    (u.clone(), v.clone())
                } else {
                    (v.clone(), u.clone())
                }
            }
        };
        // Rows 1111, 1101, 1100, 0101, 0100, 0000 of the gadget copy.
        let rows = laakso_gadget(&low, &high);
        let (top, upper, u, v, lower, bottom) = (&rows[0], &rows[1], &rows[2], &rows[3], &rows[4], &rows[5]);
        let mut cands = Vec::with_capacity(4);
        for (a, b) in [(bottom, u), (bottom, v), (u, top), (v, top)] {
            cands.push((ordered(a.clone(), b.clone()), phi_distance(k, a, b)?));
        }
        let ([a, b], _) = pick_max(cands);
        trail.push([a.clone(), b.clone()]);
        let mid = if a == *bottom || b == *bottom { lower } else { upper };
        let halves = vec![
            (ordered(a.clone(), mid.clone()), phi_distance(k, &a, mid)?),
            (ordered(mid.clone(), b.clone()), phi_distance(k, mid, &b)?),
        ];
        let (chosen, _) = pick_max(halves);
        trail.push(chosen.clone());
        pair = Some(chosen);
    }
    let [s, s2] = pair.expect("n ≥ 1");
    let len = 1usize << (2 * n);
    let (zero, one) = (BitString::constant(0, len), BitString::constant(1, len));
    let lhs = dom.distance(f.image_of(&one)?, f.image_of(&zero)?);
    let rhs = dom.distance(f.image_of(&s)?, f.image_of(&s2)?);
    let bound = (1usize << (2 * n)) as f64 * one_minus.powi(n as i32);
    Ok(finish(Family::Laakso, n, [zero, one], Some([s, s2]), trail, d, arg, delta, bound, lhs, rhs))
}

/// Dispatches on the embedding's graph family.
pub fn collapse_certificate(
    f: &Embedding,
    op: &NormedOperator,
    d: f64,
    delta: &dyn DeltaProvider,
) -> Result<CollapseCertificate> {
    match f.graph().family() {
        Family::Tree => tree_collapse_certificate(f, op, d, delta),
        Family::Diamond => diamond_collapse_certificate(f, op, d, delta),
        Family::Laakso => laakso_collapse_certificate(f, op, d, delta),
        other => Err(argument(format!("no collapse argument for {other} graphs"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bitgraphs::{build_diamond, build_laakso};
    use crate::embeddings::{
        bourgain_tree_embedding, coordinate_embedding, l1_unit_node_vectors, random_sign_node_vectors,
    };
    use crate::spaces::{AnalyticL2Delta, ConstantDelta, NormedSpace};
    use std::sync::Arc;

    fn bs(s: &str) -> BitString {
        s.parse().unwrap()
    }

    #[test]
    fn selector_example() {
        let op = NormedOperator::identity(&NormedSpace::l2(2));
        let c = midpoint_selector(&[1.0, 0.0], &[0.0, 1.0], &[0.0, -1.0], &op, 1.0, &AnalyticL2Delta).unwrap();
        assert_eq!(c.pick, Pick::Y);
        assert!((c.norm - 2f64.sqrt()).abs() < 1e-15);
        assert!((c.bound - 3f64.sqrt()).abs() < 1e-15);
        assert!(c.holds);
    }

    #[test]
    fn selector_preconditions() {
        let op = NormedOperator::identity(&NormedSpace::l2(2));
        let e = midpoint_selector(&[1.0, 0.0], &[0.0, 1.0], &[0.0, 1.0], &op, 1.0, &AnalyticL2Delta);
        assert!(matches!(e, Err(Error::Precondition(m)) if m.contains("Ay − Az")));
        let zero = [0.0, 0.0];
        assert!(matches!(
            midpoint_selector(&zero, &zero, &zero, &op, 1.0, &AnalyticL2Delta),
            Err(Error::Precondition(_))
        ));
        let e = midpoint_selector(&[2.0, 0.0], &[0.0, 1.0], &[0.0, -1.0], &op, 1.0, &AnalyticL2Delta);
        assert!(matches!(e, Err(Error::Precondition(m)) if m.contains("‖x‖")));
    }

    #[test]
    fn tree_in_l1_first_terms() {
        let (space, ys) = l1_unit_node_vectors(2);
        let f = bourgain_tree_embedding(2, &ys, &space).unwrap();
        let op = NormedOperator::identity(&space);
        let c = tree_collapse_certificate(&f, &op, 1.0, &ConstantDelta(0.0)).unwrap();
        assert_eq!(c.n, 1);
        assert_eq!(c.endpoints[0].bit(0), 0);
        assert_eq!(c.endpoints[1].bit(0), 1);
        assert_eq!(c.endpoints[0].len(), 2);
        assert_eq!(c.bound, 2.0);
        assert!(c.holds);
    }

    #[test]
    fn tree_random_signs_in_l2() {
        let l2 = NormedSpace::l2(8);
        let ys = random_sign_node_vectors(4, &l2, 3);
        let f = bourgain_tree_embedding(4, &ys, &l2).unwrap();
        let op = NormedOperator::identity(&l2);
        let r = factorization_report(f.graph(), &f, &op).unwrap();
        let f = f.scaled(1.0 / r.lip);
        let d = r.distortion.unwrap() * (1.0 + 1e-12);
        let c = tree_collapse_certificate(&f, &op, d, &AnalyticL2Delta).unwrap();
        assert_eq!(c.n, 2);
        assert!(c.holds, "{c:?}");
        assert_eq!(c.trail.len(), 2);
    }

    #[test]
    fn square_diamond_is_tight() {
        let g = Arc::new(build_diamond(1).unwrap());
        let l2 = NormedSpace::l2(2);
        let f = coordinate_embedding(g, &l2).unwrap();
        let op = NormedOperator::identity(&l2);
        let c = diamond_collapse_certificate(&f, &op, 2f64.sqrt(), &AnalyticL2Delta).unwrap();
        assert!((c.lhs - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(c.rhs, 1.0);
        assert!((c.bound - 2f64.sqrt()).abs() < 1e-12);
        assert!(c.holds);
        assert_eq!(c.adjacent_pair, Some([bs("00"), bs("01")]));
    }

    #[test]
    fn diamond_two_follows_doubling() {
        let g = Arc::new(build_diamond(2).unwrap());
        let l1 = NormedSpace::l1(4);
        let f = coordinate_embedding(g.clone(), &l1).unwrap();
        let op = NormedOperator::identity(&l1);
        let r = factorization_report(&g, &f, &op).unwrap();
        assert_eq!((r.lip, r.colip), (1.0, 0.5));
        let c = diamond_collapse_certificate(&f, &op, 2.0, &ConstantDelta(0.0)).unwrap();
        assert_eq!(c.trail.len(), 2);
        let [u, v] = &c.trail[0];
        let [s, t] = &c.trail[1];
        // The refined pair lies between the doubled coarse pair.
        for w in [s, t] {
            for i in 0..4 {
                let (lo, hi) = (u.doubling().bit(i).min(v.doubling().bit(i)), u.doubling().bit(i).max(v.doubling().bit(i)));
                assert!(lo <= w.bit(i) && w.bit(i) <= hi);
            }
        }
        assert_eq!(s.hamming(t).unwrap(), 1);
        assert!(c.holds);
    }

    #[test]
    fn hypothesis_failure_is_reported() {
        let g = Arc::new(build_diamond(1).unwrap());
        let l2 = NormedSpace::l2(2);
        let f = coordinate_embedding(g, &l2).unwrap().scaled(2.0);
        let op = NormedOperator::identity(&l2);
        assert!(matches!(
            diamond_collapse_certificate(&f, &op, 2.0, &AnalyticL2Delta),
            Err(Error::Precondition(_))
        ));
    }

    /// An `L_1 → ℓ_2^2` map with `D = √2` that pushes `f(0000)` and
    /// `f(1111)` apart by `2 + √2`.
    fn opened_laakso() -> Embedding {
        let g = Arc::new(build_laakso(1).unwrap());
        let c = 0.5f64.sqrt();
        let place = |s: &str| -> Vec<f64> {
            match s {
                "0000" => vec![0.0, 0.0],
                "0100" => vec![1.0, 0.0],
                "1100" => vec![1.0 + c, c],
                "0101" => vec![1.0 + c, -c],
                "1101" => vec![1.0 + 2.0 * c, 0.0],
                "1111" => vec![2.0 + 2.0 * c, 0.0],
                _ => unreachable!(),
            }
        };
        let vectors = g.vertices().iter().map(|v| place(&v.to_string())).collect();
        Embedding::new(g, NormedSpace::l2(2), vectors).unwrap()
    }

    #[test]
    fn laakso_needs_the_halved_argument() {
        let f = opened_laakso();
        let op = NormedOperator::identity(f.space());
        let r = factorization_report(f.graph(), &f, &op).unwrap();
        let d = r.distortion.unwrap();
        assert!(r.lip <= 1.0 + 1e-15 && (d - 2f64.sqrt()).abs() < 1e-12);
        let lhs = 2.0 + 2f64.sqrt();
        // With δ(1/D) every adjacent pair would have to satisfy
        // ‖f(1111) − f(0000)‖ ≤ 4(1 − δ(1/D)) · 1, which fails here.
        assert!(lhs > 4.0 * (1.0 - AnalyticL2Delta.delta(1.0 / d)));
        let c = laakso_collapse_certificate(&f, &op, d * (1.0 + 1e-12), &AnalyticL2Delta).unwrap();
        assert!((c.delta_argument - 1.0 / (2.0 * d)).abs() < 1e-12);
        assert!(c.holds, "{c:?}");
    }

    #[test]
    fn laakso_trail_steps_are_adjacent() {
        let g = Arc::new(build_laakso(2).unwrap());
        let l1 = NormedSpace::l1(16);
        let f = coordinate_embedding(g.clone(), &l1).unwrap();
        let op = NormedOperator::identity(&l1);
        let r = factorization_report(&g, &f, &op).unwrap();
        let c = laakso_collapse_certificate(&f.scaled(1.0 / r.lip), &op, r.distortion.unwrap() * 1.0000001, &ConstantDelta(0.0)).unwrap();
        assert_eq!(c.trail.len(), 4);
        let [s, t] = c.adjacent_pair.clone().unwrap();
        assert!(g.has_edge(g.index_of(&s).unwrap(), g.index_of(&t).unwrap()));
        assert!(c.holds);
    }
}
