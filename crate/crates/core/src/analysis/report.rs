//! Lipschitz and co-Lipschitz constants of `A∘f` on a graph.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bitgraphs::MetricGraph;
use crate::bitstring::BitString;
use crate::embeddings::Embedding;
use crate::error::{argument, Result};
use crate::metrics::GraphMetric;
use crate::spaces::{restart_rng, NormedOperator};

/// Above this many vertex pairs the scan samples.
pub const DEFAULT_SAMPLE_THRESHOLD: u64 = 10_000_000;
pub const DEFAULT_SAMPLE_SIZE: u64 = 1_000_000;
const SAMPLE_CHUNK: u64 = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScanMode {
    Exhaustive,
    Sampled,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReportOptions {
    pub sample_threshold: u64,
    pub sample_size: u64,
    pub seed: u64,
}

impl Default for ReportOptions {
    fn default() -> Self {
        Self {
            sample_threshold: DEFAULT_SAMPLE_THRESHOLD,
            sample_size: DEFAULT_SAMPLE_SIZE,
            seed: 0,
        }
    }
}

/// `lip = max ‖f(s)−f(t)‖/d(s,t)` and `colip = min ‖Af(s)−Af(t)‖/d(s,t)`
/// with the pairs attaining them. `D = lip/colip` is `None` when some pair
/// collapses under `A∘f`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorizationReport {
    pub lip: f64,
    pub colip: f64,
    #[serde(rename = "D")]
    pub distortion: Option<f64>,
    pub witness_upper: [BitString; 2],
    pub witness_lower: [BitString; 2],
    pub mode: ScanMode,
    pub pairs: u64,
    pub seed: u64,
}

#[derive(Clone, Copy)]
struct Extremes {
    up: (f64, usize, usize),
    lo: (f64, usize, usize),
}

impl Extremes {
    fn merge(self, other: Self) -> Self {
        // Ties go to the smaller pair so the reduction order is irrelevant.
        let up = if other.up.0 > self.up.0
            || (other.up.0 == self.up.0 && (other.up.1, other.up.2) < (self.up.1, self.up.2))
        {
            other.up
        } else {
            self.up
        };
        let lo = if other.lo.0 < self.lo.0
            || (other.lo.0 == self.lo.0 && (other.lo.1, other.lo.2) < (self.lo.1, self.lo.2))
        {
            other.lo
        } else {
            self.lo
        };
        Self { up, lo }
    }

    fn single(i: usize, j: usize, up: f64, lo: f64) -> Self {
        let (i, j) = (i.min(j), i.max(j));
        Self {
            up: (up, i, j),
            lo: (lo, i, j),
        }
    }
}

struct Scan<'a> {
    f: &'a Embedding,
    images: Vec<Vec<f64>>,
    op: &'a NormedOperator,
    metric: GraphMetric<'a>,
}

impl Scan<'_> {
    fn ratios(&self, i: usize, j: usize) -> (f64, f64) {
        let d = self.metric.distance(i, j) as f64;
        let up = self.f.distance(i, j) / d;
        let lo = self.op.codomain().distance(&self.images[i], &self.images[j]) / d;
        (up, lo)
    }
}

fn check_inputs(g: &MetricGraph, f: &Embedding, op: &NormedOperator) -> Result<()> {
    if f.graph() != g {
        return Err(argument("embedding is defined on a different graph"));
    }
    if f.space() != op.domain() {
        return Err(argument("embedding space differs from the operator's domain"));
    }
    if g.order() < 2 {
        return Err(argument("a report needs at least two vertices"));
    }
    Ok(())
}

pub fn factorization_report(g: &MetricGraph, f: &Embedding, op: &NormedOperator) -> Result<FactorizationReport> {
    factorization_report_with(g, f, op, ReportOptions::default())
}

/// Scans every vertex pair, or a seeded uniform sample of
/// `opts.sample_size` pairs once there are more than
/// `opts.sample_threshold`.
pub fn factorization_report_with(
    g: &MetricGraph,
    f: &Embedding,
    op: &NormedOperator,
    opts: ReportOptions,
) -> Result<FactorizationReport> {
    check_inputs(g, f, op)?;
    let n = g.order();
    let scan = Scan {
        f,
        images: f.vectors().par_iter().map(|x| op.apply_unchecked(x)).collect(),
        op,
        metric: GraphMetric::for_graph(g)?,
    };
    let total = (n as u64) * (n as u64 - 1) / 2;
    let (ext, mode, pairs) = if total <= opts.sample_threshold {
        let ext = (0..n - 1)
            .into_par_iter()
            .map(|i| {
                (i + 1..n)
                    .map(|j| {
                        let (up, lo) = scan.ratios(i, j);
                        Extremes::single(i, j, up, lo)
                    })
                    .reduce(Extremes::merge)
                    .unwrap()
            })
            .reduce_with(Extremes::merge)
            .unwrap();
        (ext, ScanMode::Exhaustive, total)
    } else {
        let chunks = opts.sample_size.div_ceil(SAMPLE_CHUNK).max(1);
        let ext = (0..chunks)
            .into_par_iter()
            .map(|c| {
                let mut rng = restart_rng(opts.seed, c);
                let count = SAMPLE_CHUNK.min(opts.sample_size.max(1) - c * SAMPLE_CHUNK);
                (0..count)
                    .map(|_| {
                        let i = rng.gen_range(0..n);
                        let mut j = rng.gen_range(0..n - 1);
                        if j >= i {
                            j += 1;
                        }
                        let (up, lo) = scan.ratios(i.min(j), i.max(j));
                        Extremes::single(i, j, up, lo)
                    })
                    .reduce(Extremes::merge)
                    .unwrap()
            })
            .reduce_with(Extremes::merge)
            .unwrap();
        (ext, ScanMode::Sampled, opts.sample_size.max(1))
    };
    let name = |i: usize, j: usize| [g.vertex(i).clone(), g.vertex(j).clone()];
    let (lip, colip) = (ext.up.0, ext.lo.0);
    Ok(FactorizationReport {
        lip,
        colip,
        distortion: (colip > 0.0).then(|| lip / colip),
        witness_upper: name(ext.up.1, ext.up.2),
        witness_lower: name(ext.lo.1, ext.lo.2),
        mode,
        pairs,
        seed: opts.seed,
    })
}

/// Recomputes `(‖f(s)−f(t)‖/d, ‖Af(s)−Af(t)‖/d)` for one pair by the same
/// arithmetic as the scan.
pub fn pair_ratios(
    g: &MetricGraph,
    f: &Embedding,
    op: &NormedOperator,
    s: &BitString,
    t: &BitString,
) -> Result<(f64, f64)> {
    check_inputs(g, f, op)?;
    let (i, j) = (g.require_index(s)?, g.require_index(t)?);
    if i == j {
        return Err(argument("pair ratios need two distinct vertices"));
    }
    let (i, j) = (i.min(j), i.max(j));
    let metric = GraphMetric::for_graph(g)?;
    let d = metric.distance(i, j) as f64;
    let up = f.distance(i, j) / d;
    let lo = op
        .codomain()
        .distance(&op.apply_unchecked(f.image(i)), &op.apply_unchecked(f.image(j)))
        / d;
    Ok((up, lo))
}
