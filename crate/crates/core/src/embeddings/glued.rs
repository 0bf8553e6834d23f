//! Gluing per-block tree embeddings along the level partition into one map
//! of a deep binary tree.

use std::ops::Range;
use std::sync::Arc;

use super::{bourgain_tree_embedding, l1_unit_node_vectors, require_family, tree_index, Embedding};
use crate::analysis::factorization_report;
use crate::bitgraphs::{baudier_partition_capped, build_binary_tree_capped, Family, LevelPartition};
use crate::bitstring::BitString;
use crate::error::{argument, check_cap, Error, Result};
use crate::spaces::{lp_norm, NormedOperator, NormedSpace};

/// Deepest partition level for glued plans. Level 3 covers the tree to
/// depth 14; level 4 would need a block embedding of `B_16`.
pub const DEFAULT_GLUED_LEVEL_CAP: usize = 3;

/// Largest `vertices × dimension` product [`GluedEmbedding::materialize`]
/// will allocate.
const MATERIALIZE_LIMIT: usize = 50_000_000;

/// Block embeddings `f_i: B_{2^level} → E_i` on disjoint coordinate ranges
/// of one `ℓ_p` space. Blocks on the same level share one piece.
#[derive(Debug, Clone)]
pub struct GluedEmbeddingPlan {
    partition: LevelPartition,
    pieces: Vec<Arc<Embedding>>,
    offsets: Vec<usize>,
    dim: usize,
    p: f64,
    kappa: f64,
    d: f64,
}

impl GluedEmbeddingPlan {
    /// Checks the pieces and measures their common two-sided constant `D`.
    ///
    /// `pieces[l - 1]` must embed `B_{2^l}` into an `ℓ_p` space (one `p` for
    /// all levels), send `∅` to 0 and be 1-Lipschitz.
    pub fn new(partition: LevelPartition, pieces: Vec<Embedding>) -> Result<Self> {
        if pieces.len() != partition.max_level {
            return Err(argument(format!(
                "{} block embeddings for {} partition levels",
                pieces.len(),
                partition.max_level
            )));
        }
        let p = pieces[0]
            .space()
            .lp_exponent()
            .ok_or_else(|| argument("block embeddings must target an l_p space"))?;
        let mut d = 1.0f64;
        for (l, piece) in pieces.iter().enumerate() {
            let level = l + 1;
            let g = piece.graph();
            require_family(g, Family::Tree)?;
            if g.n() != 1 << level {
                return Err(argument(format!(
                    "level {level} block embedding is on B_{}, expected B_{}",
                    g.n(),
                    1 << level
                )));
            }
            if piece.space().lp_exponent() != Some(p) {
                return Err(argument("block embeddings must share one l_p exponent"));
            }
            if piece.image(0).iter().any(|&x| x != 0.0) {
                return Err(argument(format!("level {level} block embedding does not send ∅ to 0")));
            }
            let id = NormedOperator::identity(piece.space());
            let report = factorization_report(g, piece, &id)?;
            if report.lip > 1.0 + 1e-9 {
                return Err(Error::Precondition(format!(
                    "level {level} block embedding has Lipschitz constant {} > 1",
                    report.lip
                )));
            }
            if report.distortion.is_none() {
                return Err(Error::Precondition(format!(
                    "level {level} block embedding is not injective"
                )));
            }
            d = d.max(1.0 / report.colip);
        }
        let mut offsets = Vec::with_capacity(partition.blocks.len());
        let mut dim = 0;
        for block in &partition.blocks {
            offsets.push(dim);
            dim += pieces[block.level - 1].space().dim();
        }
        Ok(Self {
            partition,
            pieces: pieces.into_iter().map(Arc::new).collect(),
            offsets,
            dim,
            p,
            kappa: 1.0,
            d,
        })
    }

    /// Isometric Bourgain pieces with disjoint `ℓ_1` unit node vectors,
    /// so `D = 1`.
    pub fn bourgain_l1(max_level: usize) -> Result<Self> {
        Self::bourgain_l1_capped(max_level, DEFAULT_GLUED_LEVEL_CAP)
    }

    pub fn bourgain_l1_capped(max_level: usize, cap: usize) -> Result<Self> {
        check_cap("glued partition level", max_level, cap, "--level-cap")?;
        let partition = baudier_partition_capped(max_level, cap)?;
        let pieces = (1..=max_level)
            .map(|level| {
                let n = 1 << level;
                let (space, ys) = l1_unit_node_vectors(n);
                bourgain_tree_embedding(n, &ys, &space)
            })
            .collect::<Result<_>>()?;
        Self::new(partition, pieces)
    }

    pub fn partition(&self) -> &LevelPartition {
        &self.partition
    }

    pub fn piece(&self, level: usize) -> &Embedding {
        &self.pieces[level - 1]
    }

    pub fn block_embedding(&self, block: usize) -> Result<&Embedding> {
        let b = self
            .partition
            .block(block)
            .ok_or_else(|| argument(format!("no block {block}")))?;
        Ok(self.piece(b.level))
    }

    /// Coordinates carrying block `block`.
    pub fn block_support(&self, block: usize) -> Result<Range<usize>> {
        let start = *self
            .offsets
            .get(block.wrapping_sub(1))
            .ok_or_else(|| argument(format!("no block {block}")))?;
        Ok(start..start + self.block_embedding(block)?.space().dim())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn exponent(&self) -> f64 {
        self.p
    }

    /// Norm of the block projections; 1 for disjoint coordinate blocks.
    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    /// Common two-sided constant of the block embeddings.
    pub fn d(&self) -> f64 {
        self.d
    }

    pub fn space(&self) -> Result<NormedSpace> {
        NormedSpace::lp(self.dim.max(1), self.p)
    }
}

/// The glued map `f(s) = Σ_i f_{j_i}(s_i)`, `f(∅) = 0`, evaluated block by
/// block without forming full-length vectors.
#[derive(Debug, Clone)]
pub struct GluedEmbedding {
    plan: GluedEmbeddingPlan,
}

pub fn baudier_glued_embedding(plan: &GluedEmbeddingPlan) -> GluedEmbedding {
    GluedEmbedding { plan: plan.clone() }
}

impl GluedEmbedding {
    pub fn plan(&self) -> &GluedEmbeddingPlan {
        &self.plan
    }

    /// Deepest node length covered.
    pub fn depth(&self) -> usize {
        self.plan.partition.depth()
    }

    /// Nonzero blocks of `f(s)` as `(block index, f_{j_i}(s_i))`, in
    /// increasing block order.
    pub fn image_blocks(&self, s: &BitString) -> Result<Vec<(usize, &[f64])>> {
        if s.is_empty() {
            return Ok(Vec::new());
        }
        if s.len() > self.depth() {
            return Err(argument(format!(
                "{s:?} is deeper than the plan's depth {}",
                self.depth()
            )));
        }
        let pieces = self.plan.partition.decompose(s)?;
        Ok(pieces
            .into_iter()
            .map(|piece| {
                let level = self.plan.partition.block(piece.block).expect("decomposed block").level;
                (piece.block, self.plan.piece(level).image(tree_index(&piece.bits)))
            })
            .collect())
    }

    /// `‖f(s) − f(t)‖` from the block images.
    pub fn distance(&self, s: &BitString, t: &BitString) -> Result<f64> {
        let (a, b) = (self.image_blocks(s)?, self.image_blocks(t)?);
        let mut norms = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() || j < b.len() {
            let (ka, kb) = (a.get(i).map(|x| x.0), b.get(j).map(|x| x.0));
            let block = match (ka, kb) {
                (Some(x), Some(y)) => x.min(y),
                (Some(x), None) => x,
                (None, Some(y)) => y,
                (None, None) => unreachable!(),
            };
            let space = self.plan.block_embedding(block)?.space();
            let norm = match (ka == Some(block), kb == Some(block)) {
                (true, true) => space.distance(a[i].1, b[j].1),
                (true, false) => space.eval(a[i].1),
                _ => space.eval(b[j].1),
            };
            norms.push(norm);
            if ka == Some(block) {
                i += 1;
            }
            if kb == Some(block) {
                j += 1;
            }
        }
        Ok(lp_norm(norms.into_iter(), self.plan.p))
    }

    /// `f(s)` as a full-length vector.
    pub fn image(&self, s: &BitString) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.plan.dim];
        for (block, x) in self.image_blocks(s)? {
            let range = self.plan.block_support(block)?;
            out[range].copy_from_slice(x);
        }
        Ok(out)
    }

    /// The glued map on `B_depth` as an ordinary [`Embedding`].
    pub fn materialize(&self) -> Result<Embedding> {
        let depth = self.depth();
        let vertices = (1usize << (depth + 1)) - 1;
        check_cap(
            "glued embedding entries",
            vertices.saturating_mul(self.plan.dim),
            MATERIALIZE_LIMIT,
            "a smaller partition level",
        )?;
        let graph = Arc::new(build_binary_tree_capped(depth, depth)?);
        let vectors = graph
            .vertices()
            .iter()
            .map(|s| self.image(s))
            .collect::<Result<_>>()?;
        Embedding::new(graph, self.plan.space()?, vectors)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::tree_distance;

    fn bs(s: &str) -> BitString {
        s.parse().unwrap()
    }

    #[test]
    fn plan_layout() {
        let plan = GluedEmbeddingPlan::bourgain_l1(2).unwrap();
        assert_eq!(plan.dim(), 6 + 4 * 30);
        assert_eq!(plan.d(), 1.0);
        assert_eq!(plan.kappa(), 1.0);
        assert_eq!(plan.block_support(1).unwrap(), 0..6);
        assert_eq!(plan.block_support(2).unwrap(), 6..36);
        assert_eq!(plan.block_support(5).unwrap(), 96..126);
        assert!(plan.block_support(6).is_err());
        assert!(GluedEmbeddingPlan::bourgain_l1(4).is_err());
    }

    #[test]
    fn single_piece_node() {
        let plan = GluedEmbeddingPlan::bourgain_l1(2).unwrap();
        let f = baudier_glued_embedding(&plan);
        let blocks = f.image_blocks(&bs("0")).unwrap();
        assert_eq!(blocks.len(), 1);
        assert_eq!(blocks[0].0, 1);
        assert_eq!(blocks[0].1, plan.piece(1).image_of(&bs("0")).unwrap());
        assert!(f.image_blocks(&BitString::empty()).unwrap().is_empty());
    }

    #[test]
    fn length_five_uses_two_blocks() {
        let plan = GluedEmbeddingPlan::bourgain_l1(2).unwrap();
        let f = baudier_glued_embedding(&plan);
        let s = bs("10110");
        let blocks = f.image_blocks(&s).unwrap();
        assert_eq!(blocks.len(), 2);
        let full = f.image(&s).unwrap();
        let support: Vec<usize> = (0..full.len()).filter(|&i| full[i] != 0.0).collect();
        // Block 1 holds the nodes 1 and 10; block 2 + 2 = 4 is anchored at 10.
        assert_eq!(blocks[1].0, 4);
        assert!(support.iter().all(|&i| i < 6 || plan.block_support(4).unwrap().contains(&i)));
        assert!(f.image_blocks(&bs("0101010")).is_err());
    }

    #[test]
    fn sparse_and_dense_distances_agree() {
        let plan = GluedEmbeddingPlan::bourgain_l1(2).unwrap();
        let f = baudier_glued_embedding(&plan);
        let e = f.materialize().unwrap();
        let g = e.graph();
        for i in (0..g.order()).step_by(5) {
            for j in (0..g.order()).step_by(3) {
                let sparse = f.distance(g.vertex(i), g.vertex(j)).unwrap();
                assert!((sparse - e.distance(i, j)).abs() < 1e-12);
                assert!(sparse <= tree_distance(g.vertex(i), g.vertex(j)) as f64 + 1e-12);
            }
        }
    }
}
