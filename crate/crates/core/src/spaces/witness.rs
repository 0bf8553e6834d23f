//! Separated basic sequences: the convex-hull distance `ψ` from the origin
//! and the basis constant `c` of a finite family of vectors.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{restart_rng, NormedSpace, SearchBudget};
use crate::error::{argument, Result};

const SEPARATION_RTOL: f64 = 1e-6;
const SEPARATION_MAX_ITERS: usize = 5_000;
const INDEPENDENCE_RTOL: f64 = 1e-10;

/// Result of minimizing `‖Σ λ_i y_i‖` over the probability simplex.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvexSeparation {
    /// Norm at `weights`; an upper estimate of the minimum.
    pub psi: f64,
    /// Certified lower bound `min_i ⟨s, y_i⟩` for the best norming
    /// functional `s` seen.
    pub lower: f64,
    pub weights: Vec<f64>,
    pub iterations: usize,
}

fn check_family(vectors: &[Vec<f64>], space: &NormedSpace) -> Result<()> {
    if vectors.is_empty() {
        return Err(argument("vector list is empty"));
    }
    for (i, v) in vectors.iter().enumerate() {
        if v.len() != space.dim() {
            return Err(argument(format!(
                "vector {i} has dimension {}, space has dimension {}",
                v.len(),
                space.dim()
            )));
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(argument(format!("vector {i} has a non-finite entry")));
        }
    }
    Ok(())
}

fn combine(vectors: &[Vec<f64>], weights: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; vectors[0].len()];
    for (v, &w) in vectors.iter().zip(weights) {
        if w != 0.0 {
            for (o, x) in out.iter_mut().zip(v) {
                *o += w * x;
            }
        }
    }
    out
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Minimizes a convex function on `[0, hi]` by golden-section search.
fn golden_section(hi: f64, f: impl Fn(f64) -> f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let (mut a, mut b) = (0.0, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..90 {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    let mut best = if fc <= fd { (c, fc) } else { (d, fd) };
    for t in [0.0, hi] {
        let ft = f(t);
        if ft < best.1 {
            best = (t, ft);
        }
    }
    best
}

/// `min_{λ ∈ Δ} ‖Σ λ_i y_i‖` by Frank–Wolfe with away steps and exact line
/// search, falling back to pairwise mass transfers where the norm is not
/// differentiable. Stops once the gap to the certified lower bound is below
/// a relative `10⁻⁶`.
pub fn convex_separation(vectors: &[Vec<f64>], space: &NormedSpace) -> Result<ConvexSeparation> {
    check_family(vectors, space)?;
    let k = vectors.len();
    let objective = |w: &[f64]| space.eval(&combine(vectors, w));
    let mut weights = vec![1.0 / k as f64; k];
    let mut value = objective(&weights);
    let mut lower = 0.0f64;
    let mut iterations = 0;

    // Moves mass `γ ≤ γ_max` along `dir` with the best exact step.
    let line = |w: &[f64], dir: &[f64], gmax: f64| {
        let probe = |g: f64| {
            let t: Vec<f64> = w.iter().zip(dir).map(|(a, d)| a + g * d).collect();
            objective(&t)
        };
        let (g, fg) = golden_section(gmax, probe);
        let t: Vec<f64> = w.iter().zip(dir).map(|(a, d)| (a + g * d).max(0.0)).collect();
        (t, fg)
    };

    while iterations < SEPARATION_MAX_ITERS {
        iterations += 1;
        let point = combine(vectors, &weights);
        let s = space.subgradient(&point);
        let grads: Vec<f64> = vectors.iter().map(|y| dot(&s, y)).collect();
        // ‖Σ μ_i y_i‖ ≥ Σ μ_i ⟨s, y_i⟩ / ‖s‖_* ≥ min_i ⟨s, y_i⟩ / ‖s‖_*.
        let dual = space.dual_norm(&s);
        if dual > 0.0 {
            let certified = grads.iter().cloned().fold(f64::INFINITY, f64::min) / dual;
            lower = lower.max(certified);
        }
        if value <= f64::MIN_POSITIVE || value - lower <= SEPARATION_RTOL * value {
            break;
        }

        let fw = (0..k).min_by(|&a, &b| grads[a].total_cmp(&grads[b])).unwrap();
        let away = (0..k)
            .filter(|&i| weights[i] > 0.0)
            .max_by(|&a, &b| grads[a].total_cmp(&grads[b]))
            .unwrap();
        let mut best: Option<(Vec<f64>, f64)> = None;
        let consider = |best: &mut Option<(Vec<f64>, f64)>, cand: (Vec<f64>, f64)| {
            if cand.1 < value && best.as_ref().map_or(true, |b| cand.1 < b.1) {
                *best = Some(cand);
            }
        };

        let mut dir: Vec<f64> = weights.iter().map(|w| -w).collect();
        dir[fw] += 1.0;
        consider(&mut best, line(&weights, &dir, 1.0));
        if weights[away] < 1.0 {
            let dir: Vec<f64> = (0..k)
                .map(|i| weights[i] - if i == away { 1.0 } else { 0.0 })
                .collect();
            let gmax = weights[away] / (1.0 - weights[away]);
            consider(&mut best, line(&weights, &dir, gmax));
        }
        if best.is_none() {
            for i in 0..k {
                for j in 0..k {
                    if i == j || weights[i] == 0.0 {
                        continue;
                    }
                    let mut dir = vec![0.0; k];
                    dir[i] = -1.0;
                    dir[j] = 1.0;
                    consider(&mut best, line(&weights, &dir, weights[i]));
                }
            }
        }
        match best {
            Some((w, _)) => {
                let total: f64 = w.iter().sum();
                weights = w.into_iter().map(|x| x / total).collect();
                value = objective(&weights);
            }
            None => break,
        }
    }
    Ok(ConvexSeparation {
        psi: value,
        lower: lower.min(value),
        weights,
        iterations,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BasisConstantEstimate {
    /// Largest ratio found; a lower bound on the basis constant.
    pub c: f64,
    /// Length of the prefix attaining `c`.
    pub prefix: usize,
    pub coefficients: Vec<f64>,
}

fn prefix_ratio(vectors: &[Vec<f64>], space: &NormedSpace, a: &[f64]) -> (f64, usize) {
    let dim = space.dim();
    let mut partial = vec![0.0; dim];
    let mut prefixes = Vec::with_capacity(a.len());
    for (v, &c) in vectors.iter().zip(a) {
        for (p, x) in partial.iter_mut().zip(v) {
            *p += c * x;
        }
        prefixes.push(space.eval(&partial));
    }
    let whole = prefixes[prefixes.len() - 1];
    if whole == 0.0 {
        return (0.0, 0);
    }
    let (m, best) = prefixes[..prefixes.len() - 1]
        .iter()
        .enumerate()
        .fold((0, 0.0), |acc, (i, &p)| if p > acc.1 { (i + 1, p) } else { acc });
    (best / whole, m)
}

/// Lower bound on `sup_{m<k, a} ‖Σ_{i≤m} a_i y_i‖ / ‖Σ_i a_i y_i‖` by
/// multi-start hill climbing; at least 1 since `a = e_1` attains 1.
pub fn basis_constant(
    vectors: &[Vec<f64>],
    space: &NormedSpace,
    budget: SearchBudget,
    seed: u64,
) -> Result<BasisConstantEstimate> {
    check_family(vectors, space)?;
    let k = vectors.len();
    if k > space.dim() {
        return Err(argument(format!(
            "{k} vectors in dimension {} are linearly dependent",
            space.dim()
        )));
    }
    let m = DMatrix::from_fn(space.dim(), k, |r, c| vectors[c][r]);
    let sv = m.singular_values();
    let (smax, smin) = (sv.max(), sv.min());
    if !(smin > INDEPENDENCE_RTOL * smax) {
        return Err(argument("vectors are linearly dependent"));
    }
    let mut trivial = vec![0.0; k];
    trivial[0] = 1.0;
    let base = BasisConstantEstimate {
        c: 1.0,
        prefix: 1.min(k - 1),
        coefficients: trivial,
    };
    if k == 1 {
        return Ok(base);
    }

    let climb = |restart: u64| {
        let mut rng = restart_rng(seed, restart);
        let mut a: Vec<f64> = (0..k).map(|_| rng.sample(StandardNormal)).collect();
        let (mut val, mut pre) = prefix_ratio(vectors, space, &a);
        let mut sigma = 0.5;
        for _ in 0..budget.steps {
            let scale = a.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-300);
            let cand: Vec<f64> = a
                .iter()
                .map(|x| x / scale + sigma * rng.sample::<f64, _>(StandardNormal))
                .collect();
            let (v, p) = prefix_ratio(vectors, space, &cand);
            if v > val {
                a = cand;
                val = v;
                pre = p;
                sigma = (sigma * 2.0).min(1.0);
            } else {
                sigma = (sigma * 0.84).max(1e-12);
            }
        }
        (restart, val, pre, a)
    };
    let best = (0..budget.restarts as u64)
        .into_par_iter()
        .map(climb)
        .reduce_with(|x, y| if y.1 > x.1 || (y.1 == x.1 && y.0 < x.0) { y } else { x });
    Ok(match best {
        Some((_, c, prefix, coefficients)) if c > 1.0 => BasisConstantEstimate {
            c,
            prefix,
            coefficients,
        },
        _ => base,
    })
}

/// A family `(y_i)` whose convex hull stays at distance `ψ` from the origin
/// and whose basis constant is at most `c`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparatedBasisWitness {
    pub vectors: Vec<Vec<f64>>,
    pub psi: f64,
    pub c: f64,
}

impl SeparatedBasisWitness {
    /// Takes `ψ` from the certified side of [`convex_separation`] and `c`
    /// from [`basis_constant`].
    pub fn compute(
        vectors: Vec<Vec<f64>>,
        space: &NormedSpace,
        budget: SearchBudget,
        seed: u64,
    ) -> Result<Self> {
        let sep = convex_separation(&vectors, space)?;
        let basis = basis_constant(&vectors, space, budget, seed)?;
        Ok(Self {
            vectors,
            psi: sep.lower,
            c: basis.c,
        })
    }

    /// Re-derives both constants and checks the stated ones against them.
    pub fn validate(&self, space: &NormedSpace, budget: SearchBudget, seed: u64) -> Result<()> {
        if !(self.psi > 0.0) {
            return Err(argument(format!("ψ must be positive, got {}", self.psi)));
        }
        if !(self.c >= 1.0) {
            return Err(argument(format!("c must be at least 1, got {}", self.c)));
        }
        let sep = convex_separation(&self.vectors, space)?;
        if sep.psi < self.psi * (1.0 - SEPARATION_RTOL) {
            return Err(argument(format!(
                "a convex combination has norm {} < ψ = {}",
                sep.psi, self.psi
            )));
        }
        let basis = basis_constant(&self.vectors, space, budget, seed)?;
        if basis.c > self.c * (1.0 + 1e-9) {
            return Err(argument(format!(
                "basis constant is at least {} > c = {}",
                basis.c, self.c
            )));
        }
        Ok(())
    }
}
