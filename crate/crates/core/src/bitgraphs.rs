//! Binary trees, diamond graphs and Laakso graphs realized on bit strings,
//! plus the level/block partition of the infinite tree used for gluing.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};

use crate::bitstring::BitString;
use crate::error::{argument, check_cap, Error, Result};
use crate::metrics::DistanceMatrix;

pub const DEFAULT_TREE_DEPTH_CAP: usize = 20;
pub const DEFAULT_DIAMOND_CAP: usize = 7;
pub const DEFAULT_LAAKSO_CAP: usize = 4;
pub const DEFAULT_PARTITION_LEVEL_CAP: usize = 4;

/// Graph family tag carried through serialization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Tree,
    Diamond,
    Laakso,
    Custom,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Family::Tree => "tree",
            Family::Diamond => "diamond",
            Family::Laakso => "laakso",
            Family::Custom => "custom",
        };
        f.write_str(s)
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tree" => Ok(Family::Tree),
            "diamond" => Ok(Family::Diamond),
            "laakso" => Ok(Family::Laakso),
            "custom" => Ok(Family::Custom),
            other => Err(argument(format!("unknown graph family {other:?}"))),
        }
    }
}

/// Upper limits on the generation index of each family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Caps {
    pub tree_depth: usize,
    pub diamond: usize,
    pub laakso: usize,
    pub partition_level: usize,
}

impl Default for Caps {
    fn default() -> Self {
        Self {
            tree_depth: DEFAULT_TREE_DEPTH_CAP,
            diamond: DEFAULT_DIAMOND_CAP,
            laakso: DEFAULT_LAAKSO_CAP,
            partition_level: DEFAULT_PARTITION_LEVEL_CAP,
        }
    }
}

#[derive(Serialize, Deserialize)]
struct GraphRepr {
    family: Family,
    n: usize,
    vertices: Vec<BitString>,
    edges: Vec<[usize; 2]>,
}

/// A connected simple graph whose vertices are bit strings, kept in
/// canonical (shortlex) order with edges `(i, j)`, `i < j`, sorted.
#[derive(Clone, Serialize, Deserialize)]
#[serde(try_from = "GraphRepr", into = "GraphRepr")]
pub struct MetricGraph {
    family: Family,
    n: usize,
    vertices: Vec<BitString>,
    edges: Vec<(usize, usize)>,
    index: HashMap<BitString, usize>,
    adjacency: Vec<Vec<usize>>,
    pub(crate) distance_cache: OnceLock<Arc<DistanceMatrix>>,
}

impl TryFrom<GraphRepr> for MetricGraph {
    type Error = Error;

    fn try_from(r: GraphRepr) -> Result<Self> {
        let edges = r.edges.into_iter().map(|[a, b]| (a, b)).collect();
        MetricGraph::new(r.family, r.n, r.vertices, edges)
    }
}

impl From<MetricGraph> for GraphRepr {
    fn from(g: MetricGraph) -> Self {
        GraphRepr {
            family: g.family,
            n: g.n,
            edges: g.edges.iter().map(|&(a, b)| [a, b]).collect(),
            vertices: g.vertices,
        }
    }
}

impl PartialEq for MetricGraph {
    fn eq(&self, other: &Self) -> bool {
        self.family == other.family
            && self.n == other.n
            && self.vertices == other.vertices
            && self.edges == other.edges
    }
}

impl fmt::Debug for MetricGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MetricGraph")
            .field("family", &self.family)
            .field("n", &self.n)
            .field("vertices", &self.vertices.len())
            .field("edges", &self.edges.len())
            .finish()
    }
}

impl MetricGraph {
    /// Canonicalizes and validates a vertex/edge list.
    ///
    /// Vertices are sorted shortlex and edges re-indexed accordingly.
    /// Rejects duplicates, self-loops, dangling indices and disconnected
    /// graphs; diamond and Laakso graphs must additionally live on one
    /// string length with every edge a Hamming edge.
    pub fn new(
        family: Family,
        n: usize,
        vertices: Vec<BitString>,
        edges: Vec<(usize, usize)>,
    ) -> Result<Self> {
        if vertices.is_empty() {
            return Err(Error::Structural("graph has no vertices".into()));
        }
        let count = vertices.len();
        for &(a, b) in &edges {
            if a >= count || b >= count {
                return Err(Error::Structural(format!(
                    "edge ({a}, {b}) references a vertex outside 0..{count}"
                )));
            }
            if a == b {
                return Err(Error::Structural(format!("self-loop at vertex {a}")));
            }
        }

        let mut order: Vec<usize> = (0..count).collect();
        order.sort_by(|&a, &b| vertices[a].cmp(&vertices[b]));
        let mut position = vec![0usize; count];
        for (new, &old) in order.iter().enumerate() {
            position[old] = new;
        }
        let sorted: Vec<BitString> = order.iter().map(|&i| vertices[i].clone()).collect();
        if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::Structural(format!("duplicate vertex {:?}", w[0])));
        }

        let mut canon: Vec<(usize, usize)> = edges
            .iter()
            .map(|&(a, b)| {
                let (a, b) = (position[a], position[b]);
                (a.min(b), a.max(b))
            })
            .collect();
        canon.sort_unstable();
        canon.dedup();

        if matches!(family, Family::Diamond | Family::Laakso) {
            let len = sorted[0].len();
            if let Some(v) = sorted.iter().find(|v| v.len() != len) {
                return Err(Error::Structural(format!(
                    "{family} vertex {v:?} has length {} instead of {len}",
                    v.len()
                )));
            }
            for &(a, b) in &canon {
                if sorted[a].hamming(&sorted[b])? != 1 {
                    return Err(Error::Structural(format!(
                        "edge {:?}-{:?} is not a Hamming edge",
                        sorted[a], sorted[b]
                    )));
                }
            }
        }

        let mut adjacency = vec![Vec::new(); count];
        for &(a, b) in &canon {
            adjacency[a].push(b);
            adjacency[b].push(a);
        }
        let index = sorted
            .iter()
            .enumerate()
            .map(|(i, v)| (v.clone(), i))
            .collect();

        let graph = Self {
            family,
            n,
            vertices: sorted,
            edges: canon,
            index,
            adjacency,
            distance_cache: OnceLock::new(),
        };
        graph.check_connected()?;
        Ok(graph)
    }

    fn check_connected(&self) -> Result<()> {
        let mut seen = vec![false; self.order()];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        while let Some(v) = queue.pop_front() {
            for &w in &self.adjacency[v] {
                if !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
        match seen.iter().position(|&s| !s) {
            None => Ok(()),
            Some(u) => Err(Error::Structural(format!(
                "graph is disconnected: {:?} unreachable from {:?}",
                self.vertices[u], self.vertices[0]
            ))),
        }
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn order(&self) -> usize {
        self.vertices.len()
    }

    pub fn vertices(&self) -> &[BitString] {
        &self.vertices
    }

    pub fn vertex(&self, i: usize) -> &BitString {
        &self.vertices[i]
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.adjacency[i]
    }

    pub fn index_of(&self, v: &BitString) -> Option<usize> {
        self.index.get(v).copied()
    }

    pub fn require_index(&self, v: &BitString) -> Result<usize> {
        self.index_of(v)
            .ok_or_else(|| argument(format!("{v:?} is not a vertex of this {} graph", self.family)))
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.adjacency[a].contains(&b)
    }

    pub fn to_json(&self) -> Result<serde_json::Value> {
        Ok(serde_json::to_value(self)?)
    }
}

/// The binary tree `B_n`: all strings of length at most `n`, each nonempty
/// node joined to its parent.
pub fn build_binary_tree(n: usize) -> Result<MetricGraph> {
    build_binary_tree_capped(n, DEFAULT_TREE_DEPTH_CAP)
}

pub fn build_binary_tree_capped(n: usize, cap: usize) -> Result<MetricGraph> {
    check_cap("tree depth", n, cap, "--tree-cap")?;
    let mut vertices = Vec::with_capacity((1usize << (n + 1)) - 1);
    for len in 0..=n {
        for value in 0..(1u64 << len) {
            vertices.push(BitString::from_value(value, len));
        }
    }
    // Node s sits at index 2^|s| - 1 + value(s).
    let edges = (1..vertices.len())
        .map(|i| {
            let len = vertices[i].len();
            let parent = (1usize << (len - 1)) - 1 + (vertices[i].value() >> 1) as usize;
            (parent, i)
        })
        .collect();
    MetricGraph::new(Family::Tree, n, vertices, edges)
}

/// All index pairs at Hamming distance exactly one.
pub fn hamming_edges(vertices: &[BitString]) -> Result<Vec<(usize, usize)>> {
    let Some(first) = vertices.first() else {
        return Ok(Vec::new());
    };
    let len = first.len();
    if let Some(v) = vertices.iter().find(|v| v.len() != len) {
        return Err(argument(format!(
            "hamming_edges needs equal lengths: {v:?} has length {} instead of {len}",
            v.len()
        )));
    }
    let mut index = HashMap::with_capacity(vertices.len());
    for (i, v) in vertices.iter().enumerate() {
        if index.insert(v.clone(), i).is_some() {
            return Err(argument(format!("duplicate vertex {v:?}")));
        }
    }
    let mut edges = Vec::new();
    for (i, v) in vertices.iter().enumerate() {
        for k in 0..len {
            if let Some(&j) = index.get(&v.flipped(k)) {
                if i < j {
                    edges.push((i, j));
                }
            }
        }
    }
    edges.sort_unstable();
    Ok(edges)
}

fn differing_coordinate(s: &BitString, t: &BitString) -> usize {
    s.bits()
        .iter()
        .zip(t.bits())
        .position(|(a, b)| a != b)
        .expect("edge endpoints differ")
}

/// The diamond graph `D_n` inside `{0,1}^{2^n}`.
pub fn build_diamond(n: usize) -> Result<MetricGraph> {
    build_diamond_capped(n, DEFAULT_DIAMOND_CAP)
}

pub fn build_diamond_capped(n: usize, cap: usize) -> Result<MetricGraph> {
    check_cap("diamond generation", n, cap, "--diamond-cap")?;
    let mut vertices = vec![BitString::constant(0, 1), BitString::constant(1, 1)];
    let mut edges = vec![(0usize, 1usize)];
    for _ in 0..n {
        // Each edge (s, t) of D_k differing at coordinate j is replaced by
        // the 4-cycle d(s), d(s)+e_{2j}, d(s)+e_{2j+1}, d(t).
        let mut next: Vec<BitString> = vertices.iter().map(BitString::doubling).collect();
        for &(a, b) in &edges {
            let j = differing_coordinate(&vertices[a], &vertices[b]);
            let base = vertices[a].doubling();
            next.push(base.flipped(2 * j));
            next.push(base.flipped(2 * j + 1));
        }
        next.sort();
        edges = hamming_edges(&next)?;
        vertices = next;
    }
    MetricGraph::new(Family::Diamond, n, vertices, edges)
}

/// Patterns of the six gadget rows, top to bottom, and their adjacencies.
pub const LAAKSO_GADGET_ROWS: [[u8; 4]; 6] = [
    [1, 1, 1, 1],
    [1, 1, 0, 1],
    [1, 1, 0, 0],
    [0, 1, 0, 1],
    [0, 1, 0, 0],
    [0, 0, 0, 0],
];
pub const LAAKSO_GADGET_EDGES: [(usize, usize); 6] = [(0, 1), (1, 2), (1, 3), (2, 4), (3, 4), (4, 5)];

/// The Laakso graph `L_n` inside `{0,1}^{4^n}`; edges are the union of the
/// gadget edges.
pub fn build_laakso(n: usize) -> Result<MetricGraph> {
    build_laakso_capped(n, DEFAULT_LAAKSO_CAP)
}

pub fn build_laakso_capped(n: usize, cap: usize) -> Result<MetricGraph> {
    check_cap("Laakso generation", n, cap, "--laakso-cap")?;
    let mut vertices = vec![BitString::constant(0, 1), BitString::constant(1, 1)];
    let mut edges = vec![(0usize, 1usize)];
    for _ in 0..n {
        let mut index: HashMap<BitString, usize> = HashMap::new();
        let mut next_vertices = Vec::new();
        let mut next_edges = Vec::new();
        for &(a, b) in &edges {
            let (s, t) = if vertices[a].bit(differing_coordinate(&vertices[a], &vertices[b])) == 0 {
                (&vertices[a], &vertices[b])
            } else {
                (&vertices[b], &vertices[a])
            };
            let ids: Vec<usize> = laakso_gadget(s, t)
                .into_iter()
                .map(|v| {
                    *index.entry(v.clone()).or_insert_with(|| {
                        next_vertices.push(v);
                        next_vertices.len() - 1
                    })
                })
                .collect();
            next_edges.extend(LAAKSO_GADGET_EDGES.iter().map(|&(x, y)| (ids[x], ids[y])));
        }
        let g = MetricGraph::new(Family::Custom, 0, next_vertices, next_edges)?;
        vertices = g.vertices.clone();
        edges = g.edges.clone();
    }
    MetricGraph::new(Family::Laakso, n, vertices, edges)
}

/// The six vertices replacing the edge `s = u⌢0⌢v`, `t = u⌢1⌢v`, in row
/// order (`q(t)` first, `q(s)` last).
pub fn laakso_gadget(s: &BitString, t: &BitString) -> Vec<BitString> {
    let j = differing_coordinate(s, t);
    let u = s.slice(0, j).quadrupling();
    let v = s.slice(j + 1, s.len()).quadrupling();
    LAAKSO_GADGET_ROWS
        .iter()
        .map(|row| {
            let mid = BitString::from_vec_unchecked(row.to_vec());
            u.concat(&mid).concat(&v)
        })
        .collect()
}

/// Comparison of gadget edges with induced Hamming edges on a Laakso graph.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InducedEdgeDiagnostic {
    pub gadget_edges: usize,
    pub induced_edges: usize,
    /// Hamming-adjacent vertex pairs that no gadget joins.
    pub extra_induced: Vec<(BitString, BitString)>,
    /// Gadget edges that are not Hamming edges.
    pub non_hamming: Vec<(BitString, BitString)>,
}

pub fn laakso_induced_edge_diagnostic(g: &MetricGraph) -> Result<InducedEdgeDiagnostic> {
    let induced = hamming_edges(g.vertices())?;
    let gadget: HashSet<(usize, usize)> = g.edges().iter().copied().collect();
    let induced_set: HashSet<(usize, usize)> = induced.iter().copied().collect();
    let name = |&(a, b): &(usize, usize)| (g.vertex(a).clone(), g.vertex(b).clone());
    Ok(InducedEdgeDiagnostic {
        gadget_edges: g.edges().len(),
        induced_edges: induced.len(),
        extra_induced: induced.iter().filter(|e| !gadget.contains(e)).map(name).collect(),
        non_hamming: g.edges().iter().filter(|e| !induced_set.contains(e)).map(name).collect(),
    })
}

/// `r_n = 2^n - 1`.
pub fn level_start(n: usize) -> usize {
    (1usize << n) - 1
}

/// The unique `n` with `r_n ≤ |s| < r_{n+1}`.
pub fn level_of(s: &BitString) -> usize {
    level_of_len(s.len())
}

pub fn level_of_len(len: usize) -> usize {
    (usize::BITS - 1 - (len + 1).leading_zeros()) as usize
}

/// One block `S_i` of the level partition: the nodes of level `n` extending
/// the anchor `t_i` (a maximal node of level `n - 1`).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Block {
    pub index: usize,
    pub level: usize,
    pub anchor: BitString,
}

impl Block {
    /// Extensions `t_i⌢u` with `1 ≤ |u| ≤ 2^level`.
    pub fn member_count(&self) -> usize {
        (1usize << ((1usize << self.level) + 1)) - 2
    }

    /// Tails `u` (nonempty nodes of `B_{2^level}`) in shortlex order.
    pub fn tails(&self) -> impl Iterator<Item = BitString> {
        let depth = 1usize << self.level;
        (1..=depth).flat_map(|len| (0..(1u64 << len)).map(move |v| BitString::from_value(v, len)))
    }

    pub fn members(&self) -> impl Iterator<Item = BitString> + '_ {
        self.tails().map(move |u| self.anchor.concat(&u))
    }

    pub fn contains(&self, s: &BitString) -> bool {
        level_of(s) == self.level && self.anchor.is_proper_prefix_of(s)
    }
}

/// Partition of the tree levels `Λ_1..Λ_max_level` into blocks. Members are
/// enumerated on demand: level 4 alone has 2^31 of them.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelPartition {
    pub max_level: usize,
    /// Cumulative block counts, `q[0] = 0`.
    pub q: Vec<usize>,
    pub blocks: Vec<Block>,
}

pub fn baudier_partition(max_level: usize) -> Result<LevelPartition> {
    baudier_partition_capped(max_level, DEFAULT_PARTITION_LEVEL_CAP)
}

pub fn baudier_partition_capped(max_level: usize, cap: usize) -> Result<LevelPartition> {
    if max_level == 0 {
        return Err(argument("partition needs max_level ≥ 1"));
    }
    check_cap("partition level", max_level, cap, "--level-cap")?;
    let mut q = vec![0usize];
    let mut blocks = Vec::new();
    for level in 1..=max_level {
        let anchor_len = level_start(level) - 1;
        let count = 1usize << anchor_len;
        let start = *q.last().unwrap();
        for value in 0..count {
            blocks.push(Block {
                index: start + value + 1,
                level,
                anchor: BitString::from_value(value as u64, anchor_len),
            });
        }
        q.push(start + count);
    }
    Ok(LevelPartition {
        max_level,
        q,
        blocks,
    })
}

/// A piece `s_i` of a decomposition together with its block index `j_i`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Piece {
    pub bits: BitString,
    pub block: usize,
}

impl LevelPartition {
    /// Deepest tree level covered: `r_{max_level+1} - 1`.
    pub fn depth(&self) -> usize {
        level_start(self.max_level + 1) - 1
    }

    pub fn block(&self, index: usize) -> Option<&Block> {
        index.checked_sub(1).and_then(|i| self.blocks.get(i))
    }

    /// Index of the block at `level` anchored at `anchor`.
    pub fn block_index(&self, level: usize, anchor: &BitString) -> Result<usize> {
        if level == 0 || level > self.max_level {
            return Err(argument(format!(
                "level {level} outside the partition range 1..={}",
                self.max_level
            )));
        }
        if anchor.len() != level_start(level) - 1 {
            return Err(argument(format!(
                "anchor {anchor:?} does not have length {}",
                level_start(level) - 1
            )));
        }
        Ok(self.q[level - 1] + 1 + anchor.value() as usize)
    }

    /// The block containing a nonempty node.
    pub fn block_of(&self, s: &BitString) -> Result<usize> {
        if s.is_empty() {
            return Err(argument("the root carries no block"));
        }
        let level = level_of(s);
        self.block_index(level, &s.prefix(level_start(level) - 1)?)
    }

    /// Cuts `s ≠ ∅` into `s_1⌢…⌢s_n` with `s_1⌢…⌢s_i` maximal in `Λ_i`
    /// for `i < n`.
    pub fn decompose(&self, s: &BitString) -> Result<Vec<Piece>> {
        if s.is_empty() {
            return Err(argument("cannot decompose the empty sequence"));
        }
        let n = level_of(s);
        if n > self.max_level {
            return Err(argument(format!(
                "{s:?} lies on level {n}, beyond the partition's {}",
                self.max_level
            )));
        }
        (1..=n)
            .map(|i| {
                let start = level_start(i) - 1;
                let end = if i < n { level_start(i + 1) - 1 } else { s.len() };
                Ok(Piece {
                    bits: s.slice(start, end),
                    block: self.block_index(i, &s.prefix(start)?)?,
                })
            })
            .collect()
    }
}
