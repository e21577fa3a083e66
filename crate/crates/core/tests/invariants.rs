//! Property tests for the library's cross-cutting invariants: symmetry and
//! idempotence of the signature algebra, exactness of the closed-form moment
//! transport maps, and the combinatorial/numerical helpers they rest on.

use momentsig::algebra;
use momentsig::basis::{count_monomials, MonomialBasis};
use momentsig::cloud::PointCloud;
use momentsig::hierarchy::{
    flatten_symmetric, moment_rotation_map, moment_translation_map, reconstruct,
    FlatSignature,
};
use momentsig::mlp::pairwise_sum;
use momentsig::signature::{FitConfig, Signature};
use momentsig::stream::attention_score;
use nalgebra::DMatrix;
use proptest::prelude::*;

/// A small full-rank-ish random cloud in the plane; fits are cheap and the
/// resulting signatures exercise nontrivial null spaces.
fn planar_cloud(points: &[(f64, f64)]) -> PointCloud {
    let pts = points.iter().map(|&(x, y)| vec![x, y]).collect();
    PointCloud::new(2, pts).expect("planar cloud")
}

fn fit_planar(points: &[(f64, f64)]) -> Signature {
    Signature::fit(&planar_cloud(points), &FitConfig::degree(2)).expect("fit")
}

fn coord() -> impl Strategy<Value = f64> {
    (-100i32..=100).prop_map(|v| v as f64 / 40.0)
}

fn planar_points() -> impl Strategy<Value = Vec<(f64, f64)>> {
    proptest::collection::vec((coord(), coord()), 4..10)
}

fn moments() -> impl Strategy<Value = [f64; 5]> {
    [coord(), coord(), coord(), coord(), coord()]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn similarity_is_symmetric(a in planar_points(), b in planar_points()) {
        let (sa, sb) = (fit_planar(&a), fit_planar(&b));
        let ab = algebra::similarity(&sa, &sb).unwrap();
        let ba = algebra::similarity(&sb, &sa).unwrap();
        prop_assert!((ab.f_overlap - ba.f_overlap).abs() < 1e-9);
        prop_assert!((ab.t_overlap - ba.t_overlap).abs() < 1e-9);
    }

    #[test]
    fn self_similarity_counts_the_null_space(a in planar_points()) {
        let sa = fit_planar(&a);
        let s = algebra::similarity(&sa, &sa).unwrap();
        prop_assert!(
            (s.t_overlap - sa.null_rank() as f64).abs() < 1e-8,
            "self T-overlap {} vs null rank {}",
            s.t_overlap,
            sa.null_rank()
        );
    }

    #[test]
    fn every_signature_contains_itself(a in planar_points()) {
        let sa = fit_planar(&a);
        prop_assert!(algebra::subset_check(&sa, &sa, 1e-6).unwrap());
    }

    #[test]
    fn membership_scores_are_nonnegative(a in planar_points(), px in coord(), py in coord()) {
        let sa = fit_planar(&a);
        prop_assert!(sa.membership_score(&[px, py]).unwrap() >= 0.0);
    }

    #[test]
    fn attention_is_symmetric_and_bounded(
        a in proptest::collection::vec(coord(), 1..8),
        b in proptest::collection::vec(coord(), 1..8),
    ) {
        prop_assume!(a.len() == b.len());
        prop_assume!(a.iter().any(|v| *v != 0.0) && b.iter().any(|v| *v != 0.0));
        let ab = attention_score(&a, &b).unwrap();
        let ba = attention_score(&b, &a).unwrap();
        prop_assert!((ab - ba).abs() < 1e-12);
        prop_assert!((-1.0..=1.0).contains(&ab));
    }

    #[test]
    fn flatten_and_reconstruct_round_trip(vals in proptest::collection::vec(coord(), 1..6)) {
        // Build a symmetric matrix from an outer product plus a diagonal.
        let n = vals.len();
        let v = nalgebra::DVector::from_vec(vals);
        let m = &v * v.transpose() + DMatrix::identity(n, n);
        let flat = FlatSignature { vector: flatten_symmetric(&m), source_id: "t".into(), projection: None };
        let back = reconstruct(&flat).unwrap();
        prop_assert!((&back - &m).amax() < 1e-12);
    }

    #[test]
    fn rotations_compose_additively(m in moments(), a in coord(), b in coord()) {
        let two_step = moment_rotation_map(&moment_rotation_map(&m, a), b);
        let one_step = moment_rotation_map(&m, a + b);
        for (x, y) in two_step.iter().zip(&one_step) {
            prop_assert!((x - y).abs() < 1e-9, "{x} vs {y}");
        }
    }

    #[test]
    fn rotation_by_zero_is_identity(m in moments()) {
        let id = moment_rotation_map(&m, 0.0);
        for (x, y) in id.iter().zip(&m) {
            prop_assert!((x - y).abs() < 1e-15);
        }
    }

    #[test]
    fn translations_compose_additively(
        m in moments(),
        u1 in coord(), v1 in coord(), u2 in coord(), v2 in coord(),
    ) {
        let two_step = moment_translation_map(&moment_translation_map(&m, u1, v1), u2, v2);
        let one_step = moment_translation_map(&m, u1 + u2, v1 + v2);
        for (x, y) in two_step.iter().zip(&one_step) {
            prop_assert!((x - y).abs() < 1e-8, "{x} vs {y}");
        }
    }

    #[test]
    fn basis_length_matches_the_binomial_count(dim in 1usize..6, degree in 0u32..5) {
        let basis = MonomialBasis::new(dim, degree).unwrap();
        prop_assert_eq!(basis.len() as u128, count_monomials(dim, degree).unwrap());
    }

    #[test]
    fn pairwise_sum_matches_naive_summation(xs in proptest::collection::vec(coord(), 0..40)) {
        let naive: f64 = xs.iter().sum();
        prop_assert!((pairwise_sum(&xs) - naive).abs() < 1e-9);
    }
}

#[test]
fn intersection_is_commutative() {
    // Two curved concepts; the intersection projector must not depend on
    // argument order.
    let a = fit_planar(&[
        (1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0), (0.6, 0.8), (0.8, -0.6),
    ]);
    let b = fit_planar(&[
        (0.0, 0.0), (1.0, 1.0), (2.0, 4.0), (-1.0, 1.0), (-2.0, 4.0), (0.5, 0.25),
    ]);
    let opts = algebra::IntersectOptions::default();
    let ab = algebra::complement(&algebra::intersect(&a, &b, &opts).unwrap());
    let ba = algebra::complement(&algebra::intersect(&b, &a, &opts).unwrap());
    assert!((&ab - &ba).amax() < 1e-8, "intersection depends on order");
}
