//! Exact graph distances.

use std::collections::{HashMap, VecDeque};
use std::io::Write;
use std::sync::{Arc, Mutex};

use rayon::prelude::*;
use serde::Serialize;

use crate::bitgraphs::{Family, MetricGraph};
use crate::bitstring::BitString;
use crate::error::{argument, Error, Result};

/// Above this many vertices distances are answered per source.
pub const FULL_MATRIX_VERTEX_LIMIT: usize = 20_000;

/// Symmetric matrix of hop counts. Entries fit in `u16` because only
/// connected graphs below [`FULL_MATRIX_VERTEX_LIMIT`] are stored in full.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistanceMatrix {
    order: usize,
    entries: Vec<u16>,
}

impl DistanceMatrix {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn get(&self, i: usize, j: usize) -> u32 {
        self.entries[i * self.order + j] as u32
    }

    pub fn row(&self, i: usize) -> &[u16] {
        &self.entries[i * self.order..(i + 1) * self.order]
    }

    pub fn to_rows(&self) -> Vec<Vec<i64>> {
        (0..self.order)
            .map(|i| self.row(i).iter().map(|&d| d as i64).collect())
            .collect()
    }

    pub fn diameter(&self) -> u32 {
        self.entries.iter().copied().max().unwrap_or(0) as u32
    }

    /// Writes a header row of vertex strings followed by the integer rows.
    pub fn write_csv<W: Write>(&self, vertices: &[BitString], out: &mut W) -> std::io::Result<()> {
        let header: Vec<String> = vertices.iter().map(ToString::to_string).collect();
        writeln!(out, "{}", header.join(","))?;
        for i in 0..self.order {
            let row: Vec<String> = self.row(i).iter().map(ToString::to_string).collect();
            writeln!(out, "{}", row.join(","))?;
        }
        Ok(())
    }

    pub fn check(&self) -> MetricReport {
        check_metric(&self.to_rows()).expect("distance matrices are square")
    }
}

/// Single-source hop counts; `None` marks unreachable vertices.
pub fn bfs_from(g: &MetricGraph, source: usize) -> Vec<Option<u32>> {
    let mut dist = vec![None; g.order()];
    dist[source] = Some(0);
    let mut queue = VecDeque::from([source]);
    while let Some(v) = queue.pop_front() {
        let next = dist[v].unwrap() + 1;
        for &w in g.neighbors(v) {
            if dist[w].is_none() {
                dist[w] = Some(next);
                queue.push_back(w);
            }
        }
    }
    dist
}

fn bfs_row(g: &MetricGraph, source: usize) -> Result<Vec<u32>> {
    bfs_from(g, source)
        .into_iter()
        .enumerate()
        .map(|(j, d)| {
            d.ok_or_else(|| {
                Error::Structural(format!(
                    "no path between {:?} and {:?}",
                    g.vertex(source),
                    g.vertex(j)
                ))
            })
        })
        .collect()
}

/// All-pairs hop counts by one BFS per source, run in parallel.
pub fn bfs_distances(g: &MetricGraph) -> Result<DistanceMatrix> {
    let order = g.order();
    if order > FULL_MATRIX_VERTEX_LIMIT {
        return Err(Error::Resource {
            what: "vertex count for a full distance matrix",
            requested: order,
            cap: FULL_MATRIX_VERTEX_LIMIT,
            flag: "per-source queries",
        });
    }
    let rows: Vec<Vec<u32>> = (0..order)
        .into_par_iter()
        .map(|i| bfs_row(g, i))
        .collect::<Result<_>>()?;
    let mut entries = Vec::with_capacity(order * order);
    for row in rows {
        entries.extend(row.into_iter().map(|d| d as u16));
    }
    Ok(DistanceMatrix { order, entries })
}

impl MetricGraph {
    /// Cached full distance matrix.
    pub fn distances(&self) -> Result<Arc<DistanceMatrix>> {
        if let Some(m) = self.distance_cache.get() {
            return Ok(m.clone());
        }
        let m = Arc::new(bfs_distances(self)?);
        Ok(self.distance_cache.get_or_init(|| m).clone())
    }
}

/// Graph distance in the infinite binary tree.
pub fn tree_distance(s: &BitString, t: &BitString) -> usize {
    s.len() + t.len() - 2 * s.common_prefix_len(t)
}

/// Pairwise distance lookup for a graph, choosing the cheapest exact route:
/// the closed form on trees, a cached full matrix on small graphs, and
/// memoized per-source BFS otherwise.
pub enum GraphMetric<'a> {
    Tree(&'a MetricGraph),
    Full(Arc<DistanceMatrix>),
    PerSource {
        graph: &'a MetricGraph,
        rows: Mutex<HashMap<usize, Arc<Vec<u32>>>>,
    },
}

impl<'a> GraphMetric<'a> {
    pub fn for_graph(g: &'a MetricGraph) -> Result<Self> {
        if g.family() == Family::Tree {
            Ok(GraphMetric::Tree(g))
        } else if g.order() <= FULL_MATRIX_VERTEX_LIMIT {
            Ok(GraphMetric::Full(g.distances()?))
        } else {
            Ok(GraphMetric::PerSource {
                graph: g,
                rows: Mutex::new(HashMap::new()),
            })
        }
    }

    pub fn distance(&self, i: usize, j: usize) -> u32 {
        match self {
            GraphMetric::Tree(g) => tree_distance(g.vertex(i), g.vertex(j)) as u32,
            GraphMetric::Full(m) => m.get(i, j),
            GraphMetric::PerSource { graph, rows } => {
                let (src, dst) = (i.min(j), i.max(j));
                let cached = rows.lock().unwrap().get(&src).cloned();
                let row = match cached {
                    Some(r) => r,
                    None => {
                        // Graphs reaching here passed the connectivity check.
                        let r = Arc::new(bfs_row(graph, src).expect("connected graph"));
                        rows.lock().unwrap().insert(src, r.clone());
                        r
                    }
                };
                row[dst]
            }
        }
    }
}

/// A violated metric axiom with its witnesses.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MetricViolation {
    NonzeroDiagonal { i: usize, value: i64 },
    Negative { i: usize, j: usize, value: i64 },
    ZeroOffDiagonal { i: usize, j: usize },
    Asymmetric { i: usize, j: usize },
    Triangle { a: usize, b: usize, c: usize },
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct MetricReport {
    pub violations: Vec<MetricViolation>,
}

impl MetricReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Lists every violated metric axiom; a triangle violation is reported as
/// `(a, b, c)` with `d(a,c) > d(a,b) + d(b,c)`.
pub fn check_metric(rows: &[Vec<i64>]) -> Result<MetricReport> {
    let n = rows.len();
    if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != n) {
        return Err(argument(format!(
            "matrix is not square: row {i} has {} entries, expected {n}",
            r.len()
        )));
    }
    let mut violations = Vec::new();
    for i in 0..n {
        if rows[i][i] != 0 {
            violations.push(MetricViolation::NonzeroDiagonal {
                i,
                value: rows[i][i],
            });
        }
        for j in 0..n {
            if i == j {
                continue;
            }
            let d = rows[i][j];
            if d < 0 {
                violations.push(MetricViolation::Negative { i, j, value: d });
            } else if d == 0 && i < j {
                violations.push(MetricViolation::ZeroOffDiagonal { i, j });
            }
            if i < j && d != rows[j][i] {
                violations.push(MetricViolation::Asymmetric { i, j });
            }
        }
    }
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                if rows[a][c] > rows[a][b] + rows[b][c] {
                    violations.push(MetricViolation::Triangle { a, b, c });
                }
            }
        }
    }
    Ok(MetricReport { violations })
}
