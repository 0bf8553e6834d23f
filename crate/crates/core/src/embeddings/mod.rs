//! Explicit maps of the graph families into normed spaces.

mod glued;

pub use glued::{baudier_glued_embedding, GluedEmbedding, GluedEmbeddingPlan, DEFAULT_GLUED_LEVEL_CAP};

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use rand::Rng;
use serde::ser::SerializeMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::bitgraphs::{build_binary_tree_capped, Family, MetricGraph, DEFAULT_TREE_DEPTH_CAP};
use crate::bitstring::BitString;
use crate::error::{argument, Result};
use crate::spaces::{restart_rng, NormedSpace};

/// Slack allowed on `‖x_i‖ ≤ 1` for supplied vectors.
const UNIT_BALL_SLACK: f64 = 1e-9;

/// A map from the vertices of a graph into a normed space, stored as one
/// vector per vertex in the graph's vertex order.
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    graph: Arc<MetricGraph>,
    space: NormedSpace,
    vectors: Vec<Vec<f64>>,
}

impl Embedding {
    pub fn new(graph: Arc<MetricGraph>, space: NormedSpace, vectors: Vec<Vec<f64>>) -> Result<Self> {
        if vectors.len() != graph.order() {
            return Err(argument(format!(
                "{} images for a graph with {} vertices",
                vectors.len(),
                graph.order()
            )));
        }
        for (i, v) in vectors.iter().enumerate() {
            if v.len() != space.dim() {
                return Err(argument(format!(
                    "image of {:?} has dimension {}, space has dimension {}",
                    graph.vertex(i),
                    v.len(),
                    space.dim()
                )));
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(argument(format!("image of {:?} is not finite", graph.vertex(i))));
            }
        }
        Ok(Self {
            graph,
            space,
            vectors,
        })
    }

    pub fn graph(&self) -> &MetricGraph {
        &self.graph
    }

    pub fn graph_arc(&self) -> &Arc<MetricGraph> {
        &self.graph
    }

    pub fn space(&self) -> &NormedSpace {
        &self.space
    }

    pub fn vectors(&self) -> &[Vec<f64>] {
        &self.vectors
    }

    pub fn image(&self, i: usize) -> &[f64] {
        &self.vectors[i]
    }

    pub fn image_of(&self, v: &BitString) -> Result<&[f64]> {
        Ok(&self.vectors[self.graph.require_index(v)?])
    }

    /// `‖f(v_i) − f(v_j)‖`.
    pub fn distance(&self, i: usize, j: usize) -> f64 {
        self.space.distance(&self.vectors[i], &self.vectors[j])
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            graph: self.graph.clone(),
            space: self.space.clone(),
            vectors: self
                .vectors
                .iter()
                .map(|v| v.iter().map(|x| x * factor).collect())
                .collect(),
        }
    }

    pub fn to_json(&self) -> Result<serde_json::Value> {
        Ok(serde_json::to_value(self)?)
    }
}

struct ImageMap<'a>(&'a Embedding);

impl Serialize for ImageMap<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let e = self.0;
        let mut map = s.serialize_map(Some(e.vectors.len()))?;
        for (v, x) in e.graph.vertices().iter().zip(&e.vectors) {
            map.serialize_entry(&v.to_string(), x)?;
        }
        map.end()
    }
}

impl Serialize for Embedding {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(3))?;
        map.serialize_entry("graph", &*self.graph)?;
        map.serialize_entry("space", &self.space)?;
        map.serialize_entry("map", &ImageMap(self))?;
        map.end()
    }
}

#[derive(Deserialize)]
struct EmbeddingRepr {
    graph: MetricGraph,
    space: NormedSpace,
    map: HashMap<String, Vec<f64>>,
}

impl<'de> Deserialize<'de> for Embedding {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let mut r = EmbeddingRepr::deserialize(d)?;
        let mut vectors = Vec::with_capacity(r.graph.order());
        for v in r.graph.vertices() {
            let key = v.to_string();
            let x = r
                .map
                .remove(&key)
                .ok_or_else(|| D::Error::custom(format!("map has no image for vertex \"{key}\"")))?;
            vectors.push(x);
        }
        if let Some(extra) = r.map.keys().next() {
            return Err(D::Error::custom(format!("map has an image for unknown vertex \"{extra}\"")));
        }
        Embedding::new(Arc::new(r.graph), r.space, vectors).map_err(D::Error::custom)
    }
}

fn check_unit_ball(space: &NormedSpace, vectors: impl Iterator<Item = (String, Vec<f64>)>) -> Result<()> {
    for (name, v) in vectors {
        let n = space.norm(&v)?;
        if n > 1.0 + UNIT_BALL_SLACK {
            return Err(argument(format!("vector {name} has norm {n} > 1")));
        }
    }
    Ok(())
}

/// `f(k_1, …, k_m) = Σ k_i x_i` on a graph of equal-length bit strings.
pub fn js_vertex_embedding(
    graph: Arc<MetricGraph>,
    basis: &[Vec<f64>],
    space: &NormedSpace,
) -> Result<Embedding> {
    let len = graph.vertex(0).len();
    if let Some(v) = graph.vertices().iter().find(|v| v.len() != len) {
        return Err(argument(format!(
            "vertices have different lengths ({} and {})",
            len,
            v.len()
        )));
    }
    if basis.len() != len {
        return Err(argument(format!(
            "{} basis vectors for vertex strings of length {len}",
            basis.len()
        )));
    }
    check_unit_ball(
        space,
        basis.iter().enumerate().map(|(i, x)| (format!("x_{}", i + 1), x.clone())),
    )?;
    let vectors = graph
        .vertices()
        .iter()
        .map(|v| {
            let mut out = vec![0.0; space.dim()];
            for (bit, x) in v.bits().iter().zip(basis) {
                if *bit == 1 {
                    for (o, xi) in out.iter_mut().zip(x) {
                        *o += xi;
                    }
                }
            }
            out
        })
        .collect();
    Embedding::new(graph, space.clone(), vectors)
}

/// Position of a node in the shortlex order of `B_n`.
pub fn tree_index(s: &BitString) -> usize {
    (1usize << s.len()) - 1 + s.value() as usize
}

/// `f(s) = Σ_{∅ ≺ u ⪯ s} y_u` on `B_n`.
pub fn bourgain_tree_embedding(
    n: usize,
    node_vectors: &BTreeMap<BitString, Vec<f64>>,
    space: &NormedSpace,
) -> Result<Embedding> {
    let graph = Arc::new(build_binary_tree_capped(n, DEFAULT_TREE_DEPTH_CAP.max(n))?);
    let mut vectors: Vec<Vec<f64>> = Vec::with_capacity(graph.order());
    for (i, s) in graph.vertices().iter().enumerate() {
        match s.parent() {
            None => vectors.push(vec![0.0; space.dim()]),
            Some(parent) => {
                let y = node_vectors
                    .get(s)
                    .ok_or_else(|| argument(format!("no node vector for {s:?}")))?;
                if y.len() != space.dim() {
                    return Err(argument(format!(
                        "node vector for {s:?} has dimension {}, space has {}",
                        y.len(),
                        space.dim()
                    )));
                }
                let n = space.norm(y)?;
                if n > 1.0 + UNIT_BALL_SLACK {
                    return Err(argument(format!("node vector for {s:?} has norm {n} > 1")));
                }
                // Shortlex order puts every parent before its children.
                let base = &vectors[tree_index(&parent)];
                let v = base.iter().zip(y).map(|(a, b)| a + b).collect();
                debug_assert_eq!(tree_index(s), i);
                vectors.push(v);
            }
        }
    }
    Embedding::new(graph, space.clone(), vectors)
}

/// Distinct unit vectors `y_u = e_u` of `ℓ_1^{2^{n+1}−2}`, one per nonempty
/// node of `B_n`.
pub fn l1_unit_node_vectors(n: usize) -> (NormedSpace, BTreeMap<BitString, Vec<f64>>) {
    let dim = (1usize << (n + 1)) - 2;
    let map = (1..=n)
        .flat_map(|len| (0..(1u64 << len)).map(move |v| BitString::from_value(v, len)))
        .map(|u| {
            let mut e = vec![0.0; dim];
            e[tree_index(&u) - 1] = 1.0;
            (u, e)
        })
        .collect();
    (NormedSpace::l1(dim.max(1)), map)
}

/// Independent uniformly random sign vectors, scaled to unit norm in
/// `space`, one per nonempty node of `B_n`.
pub fn random_sign_node_vectors(n: usize, space: &NormedSpace, seed: u64) -> BTreeMap<BitString, Vec<f64>> {
    let mut rng = restart_rng(seed, 0);
    let mut out = BTreeMap::new();
    for len in 1..=n {
        for v in 0..(1u64 << len) {
            let y: Vec<f64> = (0..space.dim())
                .map(|_| if rng.gen::<bool>() { 1.0 } else { -1.0 })
                .collect();
            let norm = space.eval(&y);
            out.insert(BitString::from_value(v, len), y.iter().map(|x| x / norm).collect());
        }
    }
    out
}

/// Identity placement `f(s) = s ∈ ℝ^m` of equal-length bit strings.
pub fn coordinate_embedding(graph: Arc<MetricGraph>, space: &NormedSpace) -> Result<Embedding> {
    let vectors = graph
        .vertices()
        .iter()
        .map(|v| v.bits().iter().map(|&b| b as f64).collect())
        .collect();
    Embedding::new(graph, space.clone(), vectors)
}

pub(crate) fn require_family(g: &MetricGraph, family: Family) -> Result<()> {
    if g.family() != family {
        return Err(argument(format!("expected a {family} graph, got {}", g.family())));
    }
    Ok(())
}
