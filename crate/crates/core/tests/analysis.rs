use std::sync::Arc;

use opfactor::analysis::{collapse_certificate, factorization_report, lower_bound_solve};
use opfactor::bitgraphs::{build_binary_tree, build_diamond, build_laakso};
use opfactor::embeddings::{baudier_glued_embedding, GluedEmbeddingPlan};
use opfactor::spaces::{basis_constant, convex_separation, modulus_of_convexity, AnalyticL2Delta};
use opfactor::{Embedding, Family, MetricGraph, NormedOperator, NormedSpace, SearchBudget};
use proptest::prelude::*;

fn small_budget() -> SearchBudget {
    SearchBudget { restarts: 8, steps: 200 }
}

fn embedding(g: MetricGraph, dim: usize, flat: &[f64]) -> Embedding {
    let vectors = flat.chunks(dim).take(g.order()).map(<[f64]>::to_vec).collect();
    Embedding::new(Arc::new(g), NormedSpace::l2(dim), vectors).unwrap()
}

fn coords(n: usize) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(-1.0f64..1.0, n)
}

/// Rescales to Lipschitz constant at most 1 and returns the measured `D`.
fn normalize(f: &Embedding) -> Option<(Embedding, f64)> {
    let id = NormedOperator::identity(f.space());
    let r = factorization_report(f.graph(), f, &id).unwrap();
    if r.colip < 1e-6 {
        return None;
    }
    let g = f.scaled(1.0 / r.lip);
    let r = factorization_report(g.graph(), &g, &id).unwrap();
    let g = if r.lip > 1.0 { g.scaled(1.0 / r.lip) } else { g };
    let d = factorization_report(g.graph(), &g, &id).unwrap().distortion?;
    Some((g, d * (1.0 + 1e-12)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn distortion_is_scale_invariant(xs in coords(24), k in 0.01f64..100.0) {
        let f = embedding(build_diamond(2).unwrap(), 2, &xs);
        let id = NormedOperator::identity(f.space());
        let a = factorization_report(f.graph(), &f, &id).unwrap();
        let g = f.scaled(k);
        let b = factorization_report(g.graph(), &g, &id).unwrap();
        prop_assert!((b.lip - k * a.lip).abs() <= 1e-9 * k * a.lip);
        if let (Some(da), Some(db)) = (a.distortion, b.distortion) {
            prop_assert!((da - db).abs() <= 1e-9 * da);
            prop_assert!(da >= 1.0);
        }
    }

    #[test]
    fn diamond_certificates_hold(xs in coords(36)) {
        let f = embedding(build_diamond(2).unwrap(), 3, &xs);
        if let Some((g, d)) = normalize(&f) {
            let c = collapse_certificate(&g, &NormedOperator::identity(g.space()), d, &AnalyticL2Delta).unwrap();
            prop_assert!(c.holds && c.check());
        }
    }

    #[test]
    fn laakso_certificates_hold(xs in coords(30)) {
        let f = embedding(build_laakso(1).unwrap(), 3, &xs);
        if let Some((g, d)) = normalize(&f) {
            let c = collapse_certificate(&g, &NormedOperator::identity(g.space()), d, &AnalyticL2Delta).unwrap();
            prop_assert!(c.holds && c.check());
        }
    }

    #[test]
    fn tree_certificates_hold(xs in coords(62)) {
        let f = embedding(build_binary_tree(4).unwrap(), 2, &xs);
        if let Some((g, d)) = normalize(&f) {
            let c = collapse_certificate(&g, &NormedOperator::identity(g.space()), d, &AnalyticL2Delta).unwrap();
            prop_assert!(c.holds && c.check());
        }
    }

    // The nearest point of a segment to the origin, in closed form.
    #[test]
    fn separation_of_two_vectors(a in coords(3), b in coords(3)) {
        let diff: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x - y).collect();
        let dd: f64 = diff.iter().map(|x| x * x).sum();
        prop_assume!(dd > 1e-6);
        let t = (-b.iter().zip(&diff).map(|(x, y)| x * y).sum::<f64>() / dd).clamp(0.0, 1.0);
        let exact = b.iter().zip(&diff).map(|(x, y)| (x + t * y).powi(2)).sum::<f64>().sqrt();
        let sep = convex_separation(&[a, b], &NormedSpace::l2(3)).unwrap();
        prop_assert!(sep.lower <= exact + 1e-9);
        prop_assert!(sep.psi >= exact - 1e-9);
        prop_assert!(sep.psi - exact <= 1e-6 * exact.max(1e-3));
    }

    // For two vectors in a Hilbert space the basis constant is 1/sin of
    // their angle.
    #[test]
    fn basis_constant_of_two_vectors(a in coords(2), b in coords(2)) {
        let cross = (a[0] * b[1] - a[1] * b[0]).abs();
        let (na, nb) = (a[0].hypot(a[1]), b[0].hypot(b[1]));
        prop_assume!(na > 0.1 && nb > 0.1 && cross > 0.05 * na * nb);
        let exact = na * nb / cross;
        let est = basis_constant(&[a, b], &NormedSpace::l2(2), small_budget(), 3).unwrap();
        prop_assert!(est.c <= exact * (1.0 + 1e-9));
        prop_assert!(est.c >= exact * (1.0 - 1e-3));
    }
}

#[test]
fn l2_modulus_is_monotone_and_never_below_the_formula() {
    let op = NormedOperator::identity(&NormedSpace::l2(3));
    let mut prev = 0.0;
    for k in 1..=19 {
        let eps = k as f64 / 20.0;
        let m = modulus_of_convexity(&op, eps, small_budget(), 1).unwrap();
        let exact = 1.0 - (1.0 - eps * eps).sqrt();
        assert!(m.delta >= exact - 1e-9, "ε = {eps}: {} < {exact}", m.delta);
        assert!(m.delta >= prev - 1e-3);
        assert!((0.0..=1.0).contains(&m.delta));
        prev = m.delta;
    }
}

#[test]
fn flat_spaces_have_zero_modulus() {
    for space in [NormedSpace::l1(3), NormedSpace::linf(3)] {
        let op = NormedOperator::identity(&space);
        for eps in [0.2, 0.6, 0.95] {
            assert_eq!(modulus_of_convexity(&op, eps, small_budget(), 0).unwrap().delta, 0.0);
        }
    }
}

#[test]
fn modulus_beyond_the_operator_norm_is_one() {
    let s = NormedSpace::l2(2);
    let op = NormedOperator::diagonal(&s, &[0.5, 0.25]).unwrap();
    let m = modulus_of_convexity(&op, 0.75, small_budget(), 0).unwrap();
    assert_eq!(m.delta, 1.0);
    assert!(m.witness.is_none());
}

#[test]
fn bounds_grow_with_n_and_sit_below_the_square() {
    for family in [Family::Tree, Family::Diamond, Family::Laakso] {
        let mut prev = 1.0;
        for n in 1..6 {
            let d = lower_bound_solve(family, n, &AnalyticL2Delta).unwrap();
            assert!(d > prev, "{family} n = {n}");
            prev = d;
        }
    }
    // The unit square realizes √2 for D_1, so nothing better is claimed.
    let d1 = lower_bound_solve(Family::Diamond, 1, &AnalyticL2Delta).unwrap();
    assert!(d1 <= 2f64.sqrt() + 1e-15);
}

#[test]
fn embeddings_round_trip_through_json() {
    let f = embedding(build_laakso(1).unwrap(), 2, &(0..12).map(|i| i as f64 / 7.0).collect::<Vec<_>>());
    let back: Embedding = serde_json::from_value(f.to_json().unwrap()).unwrap();
    assert_eq!(back.vectors(), f.vectors());
    assert_eq!(back.graph().vertices(), f.graph().vertices());
}

#[test]
fn glued_distances_match_materialized_vectors() {
    let plan = GluedEmbeddingPlan::bourgain_l1(2).unwrap();
    let f = baudier_glued_embedding(&plan);
    let m = f.materialize().unwrap();
    let g = m.graph();
    for i in (0..g.order()).step_by(3) {
        for j in (0..g.order()).step_by(5) {
            let sparse = f.distance(g.vertex(i), g.vertex(j)).unwrap();
            assert!((sparse - m.distance(i, j)).abs() <= 1e-12);
        }
    }
}
