//! Two-sided check of a glued tree embedding.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::report::ScanMode;
use crate::bitstring::BitString;
use crate::embeddings::GluedEmbedding;
use crate::error::{argument, Result};
use crate::metrics::tree_distance;
use crate::spaces::restart_rng;

const SAMPLE_CHUNK: u64 = 10_000;
const RATIO_RTOL: f64 = 1e-12;

/// Extreme ratios `‖f(s) − f(t)‖ / d(s,t)` over the checked pairs, tested
/// against `[1/(48 D), 1]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BaudierCheck {
    pub depth: usize,
    pub mode: ScanMode,
    pub pairs: u64,
    pub seed: Option<u64>,
    #[serde(rename = "D")]
    pub d: f64,
    pub lower_constant: f64,
    pub min_ratio: f64,
    pub max_ratio: f64,
    pub witness_min: [BitString; 2],
    pub witness_max: [BitString; 2],
    pub holds: bool,
}

type Extreme = (f64, BitString, BitString);

fn node(index: u64) -> BitString {
    let len = 63 - (index + 1).leading_zeros() as usize;
    BitString::from_value(index + 1 - (1 << len), len)
}

fn ratio(f: &GluedEmbedding, s: &BitString, t: &BitString) -> Result<f64> {
    Ok(f.distance(s, t)? / tree_distance(s, t) as f64)
}

fn merge(a: (Extreme, Extreme), b: (Extreme, Extreme)) -> (Extreme, Extreme) {
    let key = |e: &Extreme| (e.1.clone(), e.2.clone());
    let lo = if b.0 .0 < a.0 .0 || (b.0 .0 == a.0 .0 && key(&b.0) < key(&a.0)) { b.0 } else { a.0 };
    let hi = if b.1 .0 > a.1 .0 || (b.1 .0 == a.1 .0 && key(&b.1) < key(&a.1)) { b.1 } else { a.1 };
    (lo, hi)
}

fn single(s: BitString, t: BitString, r: f64) -> (Extreme, Extreme) {
    let (s, t) = if s <= t { (s, t) } else { (t, s) };
    ((r, s.clone(), t.clone()), (r, s, t))
}

fn finish(
    f: &GluedEmbedding,
    depth: usize,
    mode: ScanMode,
    pairs: u64,
    seed: Option<u64>,
    (lo, hi): (Extreme, Extreme),
) -> BaudierCheck {
    let d = f.plan().d();
    let lower_constant = 1.0 / (48.0 * d);
    BaudierCheck {
        depth,
        mode,
        pairs,
        seed,
        d,
        lower_constant,
        min_ratio: lo.0,
        max_ratio: hi.0,
        holds: lo.0 >= lower_constant * (1.0 - RATIO_RTOL) && hi.0 <= 1.0 + RATIO_RTOL,
        witness_min: [lo.1, lo.2],
        witness_max: [hi.1, hi.2],
    }
}

fn check_depth(f: &GluedEmbedding, depth: usize) -> Result<()> {
    if depth == 0 || depth > f.depth() {
        return Err(argument(format!(
            "depth {depth} outside 1..={} covered by the plan",
            f.depth()
        )));
    }
    Ok(())
}

/// Every pair of distinct nodes of length at most `depth`.
pub fn baudier_check_exhaustive(f: &GluedEmbedding, depth: usize) -> Result<BaudierCheck> {
    check_depth(f, depth)?;
    let count = (1u64 << (depth + 1)) - 1;
    let ext = (0..count - 1)
        .into_par_iter()
        .map(|i| {
            let s = node(i);
            (i + 1..count)
                .map(|j| {
                    let t = node(j);
                    let r = ratio(f, &s, &t)?;
                    Ok(single(s.clone(), t, r))
                })
                .reduce(|a: Result<_>, b| Ok(merge(a?, b?)))
                .unwrap()
        })
        .reduce_with(|a, b| Ok(merge(a?, b?)))
        .unwrap()?;
    Ok(finish(f, depth, ScanMode::Exhaustive, count * (count - 1) / 2, None, ext))
}

/// `samples` pairs of distinct nodes drawn uniformly from those of length
/// at most `depth`.
pub fn baudier_check_sampled(f: &GluedEmbedding, depth: usize, samples: u64, seed: u64) -> Result<BaudierCheck> {
    check_depth(f, depth)?;
    if samples == 0 {
        return Err(argument("sample count must be positive"));
    }
    let count = (1u64 << (depth + 1)) - 1;
    let chunks = samples.div_ceil(SAMPLE_CHUNK);
    let ext = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = restart_rng(seed, c);
            let size = SAMPLE_CHUNK.min(samples - c * SAMPLE_CHUNK);
            (0..size)
                .map(|_| {
                    let i = rng.gen_range(0..count);
                    let mut j = rng.gen_range(0..count - 1);
                    if j >= i {
                        j += 1;
                    }
                    let (s, t) = (node(i), node(j));
                    let r = ratio(f, &s, &t)?;
                    Ok(single(s, t, r))
                })
                .reduce(|a: Result<_>, b| Ok(merge(a?, b?)))
                .unwrap()
        })
        .reduce_with(|a, b| Ok(merge(a?, b?)))
        .unwrap()?;
    Ok(finish(f, depth, ScanMode::Sampled, samples, Some(seed), ext))
}
