use std::collections::BTreeSet;

use opfactor::bitgraphs::{build_binary_tree, build_diamond, build_laakso};
use opfactor::metrics::bfs_from;
use opfactor::{BitString, Family, MetricGraph};
use proptest::prelude::*;

type Bits = Vec<u8>;

fn hamming(a: &[u8], b: &[u8]) -> usize {
    a.iter().zip(b).filter(|(x, y)| x != y).count()
}

fn cube(len: usize) -> Vec<Bits> {
    (0..1u64 << len)
        .map(|m| (0..len).map(|i| ((m >> (len - 1 - i)) & 1) as u8).collect())
        .collect()
}

fn double(t: &[u8]) -> Bits {
    t.iter().flat_map(|&b| [b, b]).collect()
}

fn hamming_pairs(set: &BTreeSet<Bits>) -> Vec<(Bits, Bits)> {
    let mut out = Vec::new();
    for a in set {
        for b in set {
            if a < b && hamming(a, b) == 1 {
                out.push((a.clone(), b.clone()));
            }
        }
    }
    out
}

/// Diamond vertex sets by scanning the whole cube: a new vertex is a string
/// one flip away from both doubled endpoints of an edge of the previous
/// generation, i.e. it lies between them.
fn diamond_oracle(n: usize) -> BTreeSet<Bits> {
    let mut set: BTreeSet<Bits> = [vec![0], vec![1]].into();
    for k in 0..n {
        let edges: Vec<(Bits, Bits)> = hamming_pairs(&set)
            .into_iter()
            .map(|(a, b)| (double(&a), double(&b)))
            .collect();
        let between: BTreeSet<Bits> = cube(1 << (k + 1))
            .into_iter()
            .filter(|s| edges.iter().any(|(a, b)| hamming(s, a) == 1 && hamming(s, b) == 1))
            .collect();
        set = set.iter().map(|t| double(t)).chain(between).collect();
    }
    set
}

/// Keeping every string one flip away from any doubled vertex.
fn neighbourhood_reading(n: usize) -> BTreeSet<Bits> {
    let mut set: BTreeSet<Bits> = [vec![0], vec![1]].into();
    for k in 0..n {
        let doubled: Vec<Bits> = set.iter().map(|t| double(t)).collect();
        let near: BTreeSet<Bits> = cube(1 << (k + 1))
            .into_iter()
            .filter(|s| doubled.iter().any(|t| hamming(s, t) == 1))
            .collect();
        set = doubled.into_iter().chain(near).collect();
    }
    set
}

fn laakso_oracle(n: usize) -> (BTreeSet<Bits>, BTreeSet<(Bits, Bits)>) {
    let q = |s: &[u8]| -> Bits { s.iter().flat_map(|&b| [b; 4]).collect() };
    let rows: [[u8; 4]; 6] = [
        [1, 1, 1, 1],
        [1, 1, 0, 1],
        [1, 1, 0, 0],
        [0, 1, 0, 1],
        [0, 1, 0, 0],
        [0, 0, 0, 0],
    ];
    let adjacent = [(0, 1), (1, 2), (1, 3), (2, 4), (3, 4), (4, 5)];
    let mut verts: BTreeSet<Bits> = [vec![0], vec![1]].into();
    let mut edges: BTreeSet<(Bits, Bits)> = [(vec![0], vec![1])].into();
    for _ in 0..n {
        let mut nv: BTreeSet<Bits> = verts.iter().map(|s| q(s)).collect();
        let mut ne = BTreeSet::new();
        for (s, t) in &edges {
            let j = (0..s.len()).find(|&i| s[i] != t[i]).unwrap();
            let (u, v) = (&s[..j], &s[j + 1..]);
            let gadget: Vec<Bits> = rows
                .iter()
                .map(|r| [q(u), r.to_vec(), q(v)].concat())
                .collect();
            nv.extend(gadget.iter().cloned());
            for &(a, b) in &adjacent {
                let (x, y) = (gadget[a].clone(), gadget[b].clone());
                ne.insert(if x < y { (x, y) } else { (y, x) });
            }
        }
        verts = nv;
        edges = ne;
    }
    (verts, edges)
}

fn vertex_set(g: &MetricGraph) -> BTreeSet<Bits> {
    g.vertices().iter().map(|v| v.bits().to_vec()).collect()
}

fn edge_set(g: &MetricGraph) -> BTreeSet<(Bits, Bits)> {
    g.edges()
        .iter()
        .map(|&(a, b)| {
            let (x, y) = (g.vertex(a).bits().to_vec(), g.vertex(b).bits().to_vec());
            if x < y {
                (x, y)
            } else {
                (y, x)
            }
        })
        .collect()
}

fn dist(g: &MetricGraph, a: &BitString, b: &BitString) -> u32 {
    bfs_from(g, g.index_of(a).unwrap())[g.index_of(b).unwrap()].unwrap()
}

#[test]
fn diamond_matches_cube_oracle() {
    for n in 0..=3 {
        let g = build_diamond(n).unwrap();
        let oracle = diamond_oracle(n);
        assert_eq!(vertex_set(&g), oracle, "D_{n}");
        let induced: BTreeSet<_> = hamming_pairs(&oracle).into_iter().collect();
        assert_eq!(edge_set(&g), induced, "E(D_{n})");
    }
}

// The neighbourhood reading agrees up to D_2 and then adds strings such as
// 00010011 that sit next to a doubled vertex but inside no doubled edge.
#[test]
fn neighbourhood_reading_overshoots_from_three() {
    for n in 0..=2 {
        assert_eq!(neighbourhood_reading(n), diamond_oracle(n));
    }
    assert_eq!(neighbourhood_reading(3).len(), 76);
    assert_eq!(diamond_oracle(3).len(), 44);
}

#[test]
fn laakso_matches_gadget_oracle() {
    for n in 0..=3 {
        let g = build_laakso(n).unwrap();
        let (verts, edges) = laakso_oracle(n);
        assert_eq!(vertex_set(&g), verts, "L_{n}");
        assert_eq!(edge_set(&g), edges, "E(L_{n})");
    }
}

#[test]
fn family_sizes() {
    for n in 0..=5u32 {
        let g = build_diamond(n as usize).unwrap();
        assert_eq!(g.order() as u64, 2 + 2 * (4u64.pow(n) - 1) / 3);
        assert_eq!(g.edges().len() as u64, 4u64.pow(n));
    }
    for n in 0..=4u32 {
        let g = build_laakso(n as usize).unwrap();
        assert_eq!(g.order() as u64, 2 + 4 * (6u64.pow(n) - 1) / 5);
        assert_eq!(g.edges().len() as u64, 6u64.pow(n));
    }
    for n in 0..=8u32 {
        let g = build_binary_tree(n as usize).unwrap();
        assert_eq!(g.order() as u64, 2u64.pow(n + 1) - 1);
        assert_eq!(g.family(), Family::Tree);
    }
}

#[test]
fn endpoint_distances() {
    for n in 0..=4 {
        let g = build_diamond(n).unwrap();
        let len = 1 << n;
        let d = dist(&g, &BitString::constant(0, len), &BitString::constant(1, len));
        assert_eq!(d, 1 << n);
    }
    for n in 0..=3 {
        let g = build_laakso(n).unwrap();
        let len = 1 << (2 * n);
        let d = dist(&g, &BitString::constant(0, len), &BitString::constant(1, len));
        assert_eq!(d, 1 << (2 * n));
    }
}

#[test]
fn doubling_and_quadrupling_scale_distances() {
    for n in 0..=2 {
        let small = build_diamond(n).unwrap();
        let big = build_diamond(n + 1).unwrap();
        let ms = small.distances().unwrap();
        let mb = big.distances().unwrap();
        for i in 0..small.order() {
            for j in 0..small.order() {
                let (a, b) = (small.vertex(i).doubling(), small.vertex(j).doubling());
                let (x, y) = (big.index_of(&a).unwrap(), big.index_of(&b).unwrap());
                assert_eq!(mb.get(x, y), 2 * ms.get(i, j));
            }
        }
    }
    for n in 0..=1 {
        let small = build_laakso(n).unwrap();
        let big = build_laakso(n + 1).unwrap();
        let ms = small.distances().unwrap();
        let mb = big.distances().unwrap();
        for i in 0..small.order() {
            for j in 0..small.order() {
                let (a, b) = (small.vertex(i).quadrupling(), small.vertex(j).quadrupling());
                let (x, y) = (big.index_of(&a).unwrap(), big.index_of(&b).unwrap());
                assert_eq!(mb.get(x, y), 4 * ms.get(i, j));
            }
        }
    }
}

#[test]
fn distance_matrices_are_metrics() {
    for g in [
        build_diamond(3).unwrap(),
        build_laakso(2).unwrap(),
        build_binary_tree(5).unwrap(),
    ] {
        assert!(g.distances().unwrap().check().is_valid());
    }
}

// |D_4| = 172 and |L_2| = 30.
proptest! {
    #[test]
    fn hamming_never_exceeds_graph_distance(
        i in 0..172usize, j in 0..172usize
    ) {
        let g = build_diamond(4).unwrap();
        let h = g.vertex(i).hamming(g.vertex(j)).unwrap();
        prop_assert!(h as u32 <= g.distances().unwrap().get(i, j));
    }

    #[test]
    fn laakso_hamming_never_exceeds_graph_distance(
        i in 0..30usize, j in 0..30usize
    ) {
        let g = build_laakso(2).unwrap();
        let h = g.vertex(i).hamming(g.vertex(j)).unwrap();
        prop_assert!(h as u32 <= g.distances().unwrap().get(i, j));
    }

    #[test]
    fn tree_distance_is_symmetric_and_triangular(
        a in proptest::collection::vec(0u8..2, 0..10),
        b in proptest::collection::vec(0u8..2, 0..10),
        c in proptest::collection::vec(0u8..2, 0..10),
    ) {
        use opfactor::metrics::tree_distance;
        let (a, b, c) = (
            BitString::from_bits(&a).unwrap(),
            BitString::from_bits(&b).unwrap(),
            BitString::from_bits(&c).unwrap(),
        );
        prop_assert_eq!(tree_distance(&a, &b), tree_distance(&b, &a));
        prop_assert!(tree_distance(&a, &c) <= tree_distance(&a, &b) + tree_distance(&b, &c));
        prop_assert_eq!(tree_distance(&a, &a), 0);
    }

    #[test]
    fn doubling_doubles_hamming(
        a in proptest::collection::vec(0u8..2, 1..32),
        flips in proptest::collection::vec(any::<bool>(), 32),
    ) {
        let s = BitString::from_bits(&a).unwrap();
        let t: Vec<u8> = a.iter().zip(&flips).map(|(&x, &f)| x ^ f as u8).collect();
        let t = BitString::from_bits(&t).unwrap();
        let h = s.hamming(&t).unwrap();
        prop_assert_eq!(s.doubling().hamming(&t.doubling()).unwrap(), 2 * h);
        prop_assert_eq!(s.quadrupling().hamming(&t.quadrupling()).unwrap(), 4 * h);
    }
}

#[test]
fn laakso_gadget_edges_are_the_induced_hamming_edges() {
    use opfactor::bitgraphs::laakso_induced_edge_diagnostic;
    for n in 0..=4 {
        let d = laakso_induced_edge_diagnostic(&build_laakso(n).unwrap()).unwrap();
        assert!(d.non_hamming.is_empty(), "L_{n}: {:?}", d.non_hamming);
        assert!(d.extra_induced.is_empty(), "L_{n}: {} extra", d.extra_induced.len());
    }
}
