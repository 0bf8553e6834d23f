//! The operator modulus of convexity
//! `δ(ε) = 1 − sup{‖(x₁+x₂)/2‖ : x₁, x₂ ∈ B_X, ‖(Ax₁−Ax₂)/2‖ ≥ ε}`.

use std::collections::HashMap;
use std::sync::Mutex;

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use super::{restart_rng, NormedOperator, SearchBudget};
use crate::error::{argument, Error, Result};

/// Relative slack applied to the separation so rounding cannot push a
/// candidate below the constraint.
const SEPARATION_SLACK: f64 = 1e-12;

/// Largest domain dimension for which all signed basis pairs are tried.
const BASIS_PAIR_DIM_LIMIT: usize = 32;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModulusEstimate {
    pub eps: f64,
    /// Upper estimate of `δ(ε)`: the search can only under-estimate the
    /// supremum.
    pub delta: f64,
    /// Largest feasible midpoint norm found.
    pub sup_midpoint: f64,
    /// The feasible pair attaining `sup_midpoint`; `None` when no feasible
    /// pair exists or none was found, in which case `delta = 1`.
    pub witness: Option<(Vec<f64>, Vec<f64>)>,
}

#[derive(Clone)]
struct Candidate {
    score: f64,
    x1: Vec<f64>,
    x2: Vec<f64>,
}

struct Problem<'a> {
    op: &'a NormedOperator,
    eps: f64,
}

impl Problem<'_> {
    /// Scores `(x₁, x₂)` if it is feasible as evaluated.
    fn check_pair(&self, x1: Vec<f64>, x2: Vec<f64>) -> Option<Candidate> {
        let dom = self.op.domain();
        if dom.eval(&x1) > 1.0 || dom.eval(&x2) > 1.0 {
            return None;
        }
        let half_diff: Vec<f64> = x1.iter().zip(&x2).map(|(a, b)| (a - b) / 2.0).collect();
        if self.op.codomain().eval(&self.op.apply_unchecked(&half_diff)) < self.eps {
            return None;
        }
        let mid: Vec<f64> = x1.iter().zip(&x2).map(|(a, b)| (a + b) / 2.0).collect();
        Some(Candidate {
            score: dom.eval(&mid),
            x1,
            x2,
        })
    }

    /// Half-difference along `dir` scaled to separation `ε`, midpoint along
    /// `u` pushed as far as both endpoints stay in the ball.
    fn evaluate(&self, dir: &[f64], u: &[f64]) -> Option<Candidate> {
        let dom = self.op.domain();
        let sep = self.op.codomain().eval(&self.op.apply_unchecked(dir));
        if sep == 0.0 || !sep.is_finite() {
            return None;
        }
        let scale = self.eps / sep * (1.0 + SEPARATION_SLACK);
        let h: Vec<f64> = dir.iter().map(|x| x * scale).collect();
        if dom.eval(&h) > 1.0 {
            return None;
        }
        let nu = dom.eval(u);
        let unit: Vec<f64> = if nu > 0.0 {
            u.iter().map(|x| x / nu).collect()
        } else {
            vec![0.0; u.len()]
        };
        let endpoints = |t: f64| {
            let x1: Vec<f64> = unit.iter().zip(&h).map(|(a, b)| t * a + b).collect();
            let x2: Vec<f64> = unit.iter().zip(&h).map(|(a, b)| t * a - b).collect();
            (x1, x2)
        };
        let inside = |t: f64| {
            let (x1, x2) = endpoints(t);
            dom.eval(&x1) <= 1.0 && dom.eval(&x2) <= 1.0
        };
        // max(‖tu+h‖, ‖tu−h‖) is convex in t, at most 1 at t = 0 and at
        // least t − ‖h‖ ≥ 1 at t = 2.
        let (mut lo, mut hi) = (0.0f64, 2.0f64);
        for _ in 0..64 {
            let mid = 0.5 * (lo + hi);
            if inside(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let (x1, x2) = endpoints(lo);
        self.check_pair(x1, x2)
    }

    fn basis_pairs(&self) -> Option<Candidate> {
        let dom = self.op.domain();
        let m = dom.dim();
        if m > BASIS_PAIR_DIM_LIMIT {
            return None;
        }
        let unit = |j: usize, sign: f64| {
            let mut e = vec![0.0; m];
            e[j] = 1.0;
            let n = dom.eval(&e);
            e[j] = sign / n;
            e
        };
        let mut best: Option<Candidate> = None;
        for i in 0..m {
            for j in 0..m {
                for (si, sj) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
                    if let Some(c) = self.check_pair(unit(i, si), unit(j, sj)) {
                        if best.as_ref().map_or(true, |b| c.score > b.score) {
                            best = Some(c);
                        }
                    }
                }
            }
        }
        // Midpoint along e_i, difference along e_j: exact in ℓ∞.
        for i in 0..m {
            for j in (0..m).filter(|&j| j != i) {
                if let Some(c) = self.evaluate(&unit(j, 1.0), &unit(i, 1.0)) {
                    if best.as_ref().map_or(true, |b| c.score > b.score) {
                        best = Some(c);
                    }
                }
            }
        }
        best
    }

    fn local_search(&self, budget: SearchBudget, seed: u64, restart: u64) -> Option<Candidate> {
        let m = self.op.domain().dim();
        let mut rng = restart_rng(seed, restart);
        let gauss = |rng: &mut rand_chacha::ChaCha8Rng| -> Vec<f64> {
            (0..m).map(|_| rng.sample(StandardNormal)).collect()
        };
        let mut state = None;
        let mut steps = 0;
        while state.is_none() && steps < budget.steps {
            let (d, u) = (gauss(&mut rng), gauss(&mut rng));
            if let Some(c) = self.evaluate(&d, &u) {
                state = Some((d, u, c));
            }
            steps += 1;
        }
        let (mut dir, mut u, mut best) = state?;
        let mut sigma = 0.3;
        for _ in steps..budget.steps {
            let nd = dir.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-300);
            let nu = u.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-300);
            let cd: Vec<f64> = dir
                .iter()
                .map(|x| x / nd + sigma * rng.sample::<f64, _>(StandardNormal))
                .collect();
            let cu: Vec<f64> = u
                .iter()
                .map(|x| x / nu + sigma * rng.sample::<f64, _>(StandardNormal))
                .collect();
            match self.evaluate(&cd, &cu) {
                Some(c) if c.score > best.score => {
                    dir = cd;
                    u = cu;
                    best = c;
                    sigma = (sigma * 2.0).min(1.0);
                }
                _ => {
                    sigma *= 0.84;
                    if sigma < 1e-10 {
                        sigma = 1e-10;
                    }
                }
            }
        }
        Some(best)
    }
}

/// Multi-start estimate of `δ(ε)` for an operator with `‖A‖ ≤ 1`.
///
/// Every reported midpoint norm comes from a pair that is feasible as
/// evaluated, so `delta` errs on the high side. An empty constraint set
/// gives `δ = 1`.
pub fn modulus_of_convexity(
    op: &NormedOperator,
    eps: f64,
    budget: SearchBudget,
    seed: u64,
) -> Result<ModulusEstimate> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(argument(format!("ε must be positive and finite, got {eps}")));
    }
    let norm = op.operator_norm();
    if norm.lower > 1.0 + 1e-9 {
        return Err(Error::Precondition(format!(
            "operator norm is at least {} > 1; normalize the operator first",
            norm.lower
        )));
    }
    let empty = ModulusEstimate {
        eps,
        delta: 1.0,
        sup_midpoint: 0.0,
        witness: None,
    };
    // sup ‖A(x₁−x₂)/2‖ over the ball is ‖A‖.
    if eps > norm.upper {
        return Ok(empty);
    }
    let problem = Problem { op, eps };
    let structured = problem.basis_pairs();
    let searched = (0..budget.restarts as u64)
        .into_par_iter()
        .map(|r| (r, problem.local_search(budget, seed, r)))
        .filter_map(|(r, c)| c.map(|c| (r, c)))
        .reduce_with(|a, b| {
            if b.1.score > a.1.score || (b.1.score == a.1.score && b.0 < a.0) {
                b
            } else {
                a
            }
        })
        .map(|(_, c)| c);
    let best = match (structured, searched) {
        (Some(a), Some(b)) => Some(if b.score > a.score { b } else { a }),
        (a, b) => a.or(b),
    };
    Ok(match best {
        None => empty,
        Some(c) => ModulusEstimate {
            eps,
            delta: (1.0 - c.score).max(0.0),
            sup_midpoint: c.score,
            witness: Some((c.x1, c.x2)),
        },
    })
}

/// Source of `δ(ε)` values for the collapse certificates and the
/// lower-bound solver.
pub trait DeltaProvider: Send + Sync {
    fn delta(&self, eps: f64) -> f64;

    fn label(&self) -> String;

    /// `true` when `delta` is the true modulus; numerical providers return
    /// upper estimates, which can make certificate bounds too optimistic.
    fn is_exact(&self) -> bool;
}

/// `δ(ε) = 1 − √(1 − ε²)` for the identity on a Hilbert space; `δ = 1`
/// past `ε = 1` where the constraint set is empty.
#[derive(Debug, Clone, Copy, Default)]
pub struct AnalyticL2Delta;

impl DeltaProvider for AnalyticL2Delta {
    fn delta(&self, eps: f64) -> f64 {
        if eps >= 1.0 {
            1.0
        } else if eps <= 0.0 {
            0.0
        } else {
            1.0 - (1.0 - eps * eps).sqrt()
        }
    }

    fn label(&self) -> String {
        "l2-analytic".into()
    }

    fn is_exact(&self) -> bool {
        true
    }
}

/// The same `δ` for every `ε`; `ConstantDelta(0.0)` models spaces such as
/// ℓ_1 with no uniform convexity.
#[derive(Debug, Clone, Copy)]
pub struct ConstantDelta(pub f64);

impl DeltaProvider for ConstantDelta {
    fn delta(&self, _eps: f64) -> f64 {
        self.0
    }

    fn label(&self) -> String {
        format!("constant:{}", self.0)
    }

    fn is_exact(&self) -> bool {
        true
    }
}

/// Memoized [`modulus_of_convexity`] for a fixed operator.
pub struct NumericalDelta {
    op: NormedOperator,
    budget: SearchBudget,
    seed: u64,
    cache: Mutex<HashMap<u64, f64>>,
}

impl NumericalDelta {
    pub fn new(op: NormedOperator, budget: SearchBudget, seed: u64) -> Self {
        Self {
            op,
            budget,
            seed,
            cache: Mutex::new(HashMap::new()),
        }
    }
}

impl DeltaProvider for NumericalDelta {
    fn delta(&self, eps: f64) -> f64 {
        if let Some(&d) = self.cache.lock().unwrap().get(&eps.to_bits()) {
            return d;
        }
        let d = modulus_of_convexity(&self.op, eps, self.budget, self.seed)
            .map(|m| m.delta)
            .unwrap_or(0.0);
        self.cache.lock().unwrap().insert(eps.to_bits(), d);
        d
    }

    fn label(&self) -> String {
        format!("numerical(seed={})", self.seed)
    }

    fn is_exact(&self) -> bool {
        false
    }
}
