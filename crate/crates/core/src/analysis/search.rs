//! Heuristic minimization of the distortion of vertex placements.

use std::sync::Arc;

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use super::report::{factorization_report, FactorizationReport};
use crate::bitgraphs::MetricGraph;
use crate::embeddings::Embedding;
use crate::error::{argument, Error, Result};
use crate::metrics::{bfs_from, GraphMetric};
use crate::spaces::{restart_rng, NormedOperator, NormedSpace, SearchBudget};

const BETA_START: f64 = 5.0;
const BETA_END: f64 = 1e4;
const ARMIJO: f64 = 1e-4;

#[derive(Debug, Clone)]
pub struct SearchResult {
    /// Best placement, scaled so that its Lipschitz constant is at most 1.
    pub embedding: Embedding,
    pub report: FactorizationReport,
    /// Restart that produced the placement.
    pub restart: usize,
}

struct Objective<'a> {
    space: &'a NormedSpace,
    pairs: Vec<(usize, usize, f64)>,
    n: usize,
    m: usize,
}

struct Eval {
    value: f64,
    distortion: f64,
    grad: Option<Vec<f64>>,
}

impl Objective<'_> {
    fn log_ratios(&self, x: &[f64]) -> Option<(Vec<f64>, Vec<Vec<f64>>)> {
        let m = self.m;
        let mut logs = Vec::with_capacity(self.pairs.len());
        let mut diffs = Vec::with_capacity(self.pairs.len());
        for &(i, j, d) in &self.pairs {
            let diff: Vec<f64> = (0..m).map(|k| x[i * m + k] - x[j * m + k]).collect();
            let norm = self.space.eval(&diff);
            if !(norm > 0.0) || !norm.is_finite() {
                return None;
            }
            logs.push(norm.ln() - d.ln());
            diffs.push(diff);
        }
        Some((logs, diffs))
    }

    /// Smoothed `log max ratio − log min ratio` at temperature `beta`.
    fn eval(&self, x: &[f64], beta: f64, want_grad: bool) -> Option<Eval> {
        let (logs, diffs) = self.log_ratios(x)?;
        let hi = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lo = logs.iter().cloned().fold(f64::INFINITY, f64::min);
        let up: Vec<f64> = logs.iter().map(|l| (beta * (l - hi)).exp()).collect();
        let down: Vec<f64> = logs.iter().map(|l| (-beta * (l - lo)).exp()).collect();
        let (su, sd): (f64, f64) = (up.iter().sum(), down.iter().sum());
        let value = hi + su.ln() / beta - lo + sd.ln() / beta;
        let grad = want_grad.then(|| {
            let mut g = vec![0.0; self.n * self.m];
            for (p, &(i, j, _)) in self.pairs.iter().enumerate() {
                let w = up[p] / su - down[p] / sd;
                if w == 0.0 {
                    continue;
                }
                let s = self.space.subgradient(&diffs[p]);
                let norm = (logs[p] + self.pairs[p].2.ln()).exp();
                for k in 0..self.m {
                    let c = w * s[k] / norm;
                    g[i * self.m + k] += c;
                    g[j * self.m + k] -= c;
                }
            }
            g
        });
        Some(Eval {
            value,
            distortion: (hi - lo).exp(),
            grad,
        })
    }

    fn max_log_ratio(&self, x: &[f64]) -> Option<f64> {
        self.log_ratios(x)
            .map(|(l, _)| l.into_iter().fold(f64::NEG_INFINITY, f64::max))
    }
}

/// Puts every vertex on a line at its distance from a peripheral vertex;
/// exact for paths. Colliding vertices are separated by a small
/// perturbation in the remaining coordinates.
fn line_init(g: &MetricGraph, m: usize, rng: &mut impl Rng) -> Vec<f64> {
    let first = bfs_from(g, 0);
    let far = (0..g.order())
        .max_by_key(|&v| (first[v].unwrap_or(0), std::cmp::Reverse(v)))
        .unwrap_or(0);
    let dist = bfs_from(g, far);
    let n = g.order();
    let mut x = vec![0.0; n * m];
    let mut seen = std::collections::HashSet::new();
    let mut collide = false;
    for v in 0..n {
        let d = dist[v].unwrap_or(0);
        x[v * m] = d as f64;
        collide |= !seen.insert(d);
    }
    if collide {
        for v in 0..n {
            for k in 0..m {
                x[v * m + k] += 1e-2 * rng.sample::<f64, _>(StandardNormal);
            }
        }
    }
    x
}

fn run_restart(
    obj: &Objective<'_>,
    g: &MetricGraph,
    budget: SearchBudget,
    seed: u64,
    restart: usize,
) -> Option<(f64, Vec<f64>)> {
    let (n, m) = (obj.n, obj.m);
    let mut rng = restart_rng(seed, restart as u64);
    let mut x: Vec<f64> = if restart == 0 {
        line_init(g, m, &mut rng)
    } else {
        (0..n * m).map(|_| rng.sample(StandardNormal)).collect()
    };
    let first = obj.eval(&x, BETA_START, false)?;
    let mut best = (first.distortion, x.clone());
    let steps = budget.steps.max(1);
    let mut eta = 0.1;
    for step in 0..steps {
        let t = if steps == 1 { 1.0 } else { step as f64 / (steps - 1) as f64 };
        let beta = BETA_START * (BETA_END / BETA_START).powf(t);
        let cur = match obj.eval(&x, beta, true) {
            Some(e) => e,
            None => break,
        };
        let grad = cur.grad.unwrap();
        let gnorm2: f64 = grad.iter().map(|v| v * v).sum();
        if gnorm2 == 0.0 {
            break;
        }
        let mut accepted = false;
        for _ in 0..40 {
            let cand: Vec<f64> = x.iter().zip(&grad).map(|(a, b)| a - eta * b).collect();
            if let Some(e) = obj.eval(&cand, beta, false) {
                if e.distortion < best.0 {
                    best = (e.distortion, cand.clone());
                }
                if e.value <= cur.value - ARMIJO * eta * gnorm2 {
                    x = cand;
                    accepted = true;
                    break;
                }
            }
            eta *= 0.5;
        }
        if !accepted {
            eta = 0.1;
            continue;
        }
        eta *= 1.5;
        // Distortion is scale invariant; keep the largest ratio at 1.
        if let Some(h) = obj.max_log_ratio(&x) {
            let s = (-h).exp();
            x.iter_mut().for_each(|v| *v *= s);
        }
    }
    Some(best)
}

/// Multi-start smoothed gradient descent over placements of `g` in
/// `target`. Restart 0 starts from a line placement, the others from
/// Gaussian noise; the result is reproducible for a fixed seed.
pub fn distortion_search(
    g: &MetricGraph,
    target: &NormedSpace,
    budget: SearchBudget,
    seed: u64,
) -> Result<SearchResult> {
    if target.lp_exponent().is_none() {
        return Err(argument("distortion search needs an l_p target"));
    }
    if g.order() < 2 {
        return Err(argument("distortion search needs at least two vertices"));
    }
    let metric = GraphMetric::for_graph(g)?;
    let n = g.order();
    let pairs = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .map(|(i, j)| (i, j, metric.distance(i, j) as f64))
        .collect();
    let obj = Objective {
        space: target,
        pairs,
        n,
        m: target.dim(),
    };
    let best = (0..budget.restarts.max(1))
        .into_par_iter()
        .filter_map(|r| run_restart(&obj, g, budget, seed, r).map(|(d, x)| (r, d, x)))
        .reduce_with(|a, b| if b.1 < a.1 || (b.1 == a.1 && b.0 < a.0) { b } else { a })
        .ok_or_else(|| Error::Precondition("no restart produced an injective placement".into()))?;
    let (restart, _, x) = best;
    let m = target.dim();
    let vectors: Vec<Vec<f64>> = (0..n).map(|v| x[v * m..(v + 1) * m].to_vec()).collect();
    let graph = Arc::new(g.clone());
    let raw = Embedding::new(graph, target.clone(), vectors)?;
    let id = NormedOperator::identity(target);
    let first = factorization_report(g, &raw, &id)?;
    let mut factor = 1.0 / first.lip;
    loop {
        let embedding = raw.scaled(factor);
        let report = factorization_report(g, &embedding, &id)?;
        if report.lip <= 1.0 {
            return Ok(SearchResult {
                embedding,
                report,
                restart,
            });
        }
        factor *= 1.0 - f64::EPSILON;
    }
}
