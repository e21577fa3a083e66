//! Projector algebra over signatures: complements, overlap similarity,
//! intersections, subset tests, and dictionary discovery.
//!
//! With `F = I − T` the complement projector of a signature, concepts
//! combine through linear algebra alone: the Frobenius product `F₁.F₂`
//! measures shared structure, the alternating-projection limit of `F₁, F₂`
//! projects onto `range(F₁) ∩ range(F₂)` (the intersection concept), and
//! containment of concepts is the projector identity `F_O F_V = F_V`.

use log::warn;
use nalgebra::DMatrix;

use crate::signature::Signature;
use crate::{Error, Result};

/// Default round-to-round Frobenius tolerance for alternating projections.
pub const INTERSECT_TOL: f64 = 1e-10;

/// Default iteration budget for alternating projections.
pub const INTERSECT_MAX_ITER: usize = 10_000;

/// Default Frobenius distance under which two projectors count as one concept.
pub const DEDUP_THRESHOLD: f64 = 1e-3;

/// Default tolerance for [`subset_check`].
pub const SUBSET_TOL: f64 = 1e-6;

/// Overlap of two signatures: Frobenius inner products of the null
/// projectors (`t_overlap`) and of their complements (`f_overlap`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Similarity {
    pub t_overlap: f64,
    pub f_overlap: f64,
}

/// Options for [`intersect`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntersectOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for IntersectOptions {
    fn default() -> Self {
        IntersectOptions { tol: INTERSECT_TOL, max_iter: INTERSECT_MAX_ITER }
    }
}

/// Options for [`discover_dictionary`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DictionaryOptions {
    pub intersect: IntersectOptions,
    pub dedup_threshold: f64,
    pub subset_tol: f64,
}

impl Default for DictionaryOptions {
    fn default() -> Self {
        DictionaryOptions {
            intersect: IntersectOptions::default(),
            dedup_threshold: DEDUP_THRESHOLD,
            subset_tol: SUBSET_TOL,
        }
    }
}

/// Materialise the complement projector `F = I − T = RRᵀ`.
pub fn complement(sig: &Signature) -> DMatrix<f64> {
    sig.range() * sig.range().transpose()
}

fn require_same_space(a: &Signature, b: &Signature, what: &str) -> Result<()> {
    if !a.same_space(b) {
        return Err(Error::Incompatible(format!(
            "{what} needs signatures over one feature space (same basis and projection)"
        )));
    }
    Ok(())
}

/// Frobenius overlaps `T₁.T₂` and `F₁.F₂`, computed from range bases without
/// materialising any `m × m` projector:
/// `F₁.F₂ = ‖R₁ᵀR₂‖²_F` and `T₁.T₂ = m − r₁ − r₂ + F₁.F₂`.
pub fn similarity(a: &Signature, b: &Signature) -> Result<Similarity> {
    require_same_space(a, b, "similarity")?;
    let cross = a.range().transpose() * b.range();
    let f_overlap = cross.norm_squared();
    let m = a.feature_dim() as f64;
    let r1 = a.range().ncols() as f64;
    let r2 = b.range().ncols() as f64;
    let t_overlap = (m - r1 - r2 + f_overlap).max(0.0);
    Ok(Similarity { t_overlap, f_overlap })
}

/// For single-equation concepts (null rank 1 on both sides), the squared
/// cosine `(c₁·c₂)²` of the unit coefficient vectors — identical to
/// `similarity(..).t_overlap` in this case.
pub fn coefficient_similarity(a: &Signature, b: &Signature) -> Result<f64> {
    require_same_space(a, b, "coefficient similarity")?;
    if a.null_rank() != 1 || b.null_rank() != 1 {
        return Err(Error::Incompatible(format!(
            "not a single-equation manifold: null ranks are {} and {}",
            a.null_rank(),
            b.null_rank()
        )));
    }
    let ca = a.null_space_basis();
    let cb = b.null_space_basis();
    let dot = (ca.column(0).transpose() * cb.column(0))[(0, 0)];
    Ok(dot * dot)
}

/// Signature of the intersection concept via symmetric alternating
/// projections: from `P = I`, repeat `P ← F₁PF₁`, `P ← F₂PF₂` until the
/// round-to-round change is below `tol`; eigenvalues of the limit are
/// rounded to {0, 1} at 0.5 to produce the intersection projector `F_∩`,
/// and the result has `T = I − F_∩` with the projector itself standing in
/// for the moment. Eigenvalues still inside (0.2, 0.8) at convergence are
/// reported as an ill-separated intersection warning.
pub fn intersect(a: &Signature, b: &Signature, opts: &IntersectOptions) -> Result<Signature> {
    require_same_space(a, b, "intersection")?;
    let m = a.feature_dim();
    let fa = complement(a);
    let fb = complement(b);
    let mut p = DMatrix::identity(m, m);
    let mut residual = f64::INFINITY;
    let mut converged = false;
    let mut iterations = 0;
    for it in 0..opts.max_iter {
        let next = &fb * (&fa * &p * &fa) * &fb;
        residual = (&next - &p).norm();
        p = next;
        iterations = it + 1;
        if residual <= opts.tol {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NoConvergence {
            routine: "alternating projections".into(),
            iterations,
            residual,
        });
    }
    // Round the limit's spectrum to a projector; flag ill-separated modes.
    let sym = (&p + p.transpose()) * 0.5;
    let eig = sym.clone().symmetric_eigen();
    let murky = eig
        .eigenvalues
        .iter()
        .filter(|&&l| l > 0.2 && l < 0.8)
        .count();
    if murky > 0 {
        warn!(
            "intersection has {murky} eigenvalue(s) in (0.2, 0.8); rounding at 0.5 may be unreliable"
        );
    }
    let sig = Signature::from_complement_projector(a.basis().clone(), sym, a.epsilon())?;
    Ok(sig.inherit_projection(a))
}

/// Whether the concept of `inner` is contained in the concept of `outer`:
/// `‖F_O F_V − F_V‖_F ≤ tol`, computed as `‖R_O(R_OᵀR_V) − R_V‖_F`.
pub fn subset_check(outer: &Signature, inner: &Signature, tol: f64) -> Result<bool> {
    require_same_space(outer, inner, "subset check")?;
    let cross = outer.range().transpose() * inner.range();
    let diff = outer.range() * cross - inner.range();
    Ok(diff.norm() <= tol)
}

/// One round of pairwise intersections over the inputs, returning the
/// minimal concepts found (atoms).
///
/// Pairs whose alternating projections fail to converge are skipped with a
/// warning. Intersections with an empty complement range (no concept left)
/// are discarded. The surviving pool — deduplicated inputs plus new
/// intersections — is filtered to its minimal elements: concepts with no
/// strictly smaller concept in the pool. Re-invoke on the result to descend
/// further levels of a concept hierarchy.
pub fn discover_dictionary(sigs: &[Signature], opts: &DictionaryOptions) -> Result<Vec<Signature>> {
    let first = sigs
        .first()
        .ok_or_else(|| Error::InvalidInput("dictionary discovery needs at least one signature".into()))?;
    for (i, s) in sigs.iter().enumerate() {
        require_same_space(first, s, "dictionary discovery")?;
        let _ = i;
    }
    let mut pool: Vec<Signature> = Vec::new();
    for s in sigs {
        if !pool.iter().any(|t| projector_distance(t, s) <= opts.dedup_threshold) {
            pool.push(s.clone());
        }
    }
    if pool.len() < 2 {
        return Ok(pool);
    }
    let inputs = pool.clone();
    for i in 0..inputs.len() {
        for j in (i + 1)..inputs.len() {
            match intersect(&inputs[i], &inputs[j], &opts.intersect) {
                Ok(cand) => {
                    if cand.range().ncols() == 0 {
                        continue; // nothing survives this intersection
                    }
                    if !pool
                        .iter()
                        .any(|t| projector_distance(t, &cand) <= opts.dedup_threshold)
                    {
                        pool.push(cand);
                    }
                }
                Err(Error::NoConvergence { iterations, residual, .. }) => {
                    warn!(
                        "skipping intersection of inputs {i} and {j}: no convergence after {iterations} iterations (residual {residual:.3e})"
                    );
                }
                Err(other) => return Err(other),
            }
        }
    }
    // Keep concepts with no strictly smaller concept in the pool.
    let mut minimal = Vec::new();
    for (i, s) in pool.iter().enumerate() {
        let mut is_minimal = true;
        for (j, t) in pool.iter().enumerate() {
            if i == j || projector_distance(s, t) <= opts.dedup_threshold {
                continue;
            }
            if subset_check(s, t, opts.subset_tol)? {
                is_minimal = false;
                break;
            }
        }
        if is_minimal {
            minimal.push(s.clone());
        }
    }
    Ok(minimal)
}

/// Frobenius distance between two signatures' complement projectors,
/// computed from range bases: `‖F_a − F_b‖²_F = r_a + r_b − 2‖R_aᵀR_b‖²_F`.
fn projector_distance(a: &Signature, b: &Signature) -> f64 {
    let cross = a.range().transpose() * b.range();
    let d2 = a.range().ncols() as f64 + b.range().ncols() as f64 - 2.0 * cross.norm_squared();
    d2.max(0.0).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::MonomialBasis;
    use crate::cloud::PointCloud;
    use crate::signature::{FitConfig, DEFAULT_EPSILON};
    use nalgebra::DVector;

    /// Homogeneous degree-1 signature of a coordinate subspace of R³ spanned
    /// by the axes in `kept`.
    fn axis_subspace_sig(kept: &[usize]) -> Signature {
        let pts: Vec<Vec<f64>> = (0..30)
            .map(|i| {
                let mut p = vec![0.0; 3];
                for (slot, &axis) in kept.iter().enumerate() {
                    p[axis] = ((i * (slot + 3)) as f64 * 0.713).sin() * 2.0 + 0.1;
                }
                p
            })
            .collect();
        let cloud = PointCloud::new(3, pts).unwrap();
        Signature::fit(&cloud, &FitConfig::degree(1).homogeneous()).unwrap()
    }

    /// Rank-1 signature from a single coefficient vector over basis (2, 2).
    fn line_product_sig(coeff: &[f64]) -> Signature {
        let basis = MonomialBasis::new(2, 2).unwrap();
        Signature::from_null_vectors(&basis, &[DVector::from_column_slice(coeff)], DEFAULT_EPSILON)
            .unwrap()
    }

    #[test]
    fn complement_of_full_rank_is_identity() {
        let cloud = crate::generators::uniform_box_cloud(2, 20, 1.0, 1).unwrap();
        let sig = Signature::fit(&cloud, &FitConfig::degree(1)).unwrap();
        assert_eq!(sig.null_rank(), 0);
        let f = complement(&sig);
        assert!((f - DMatrix::identity(3, 3)).amax() < 1e-10);
    }

    #[test]
    fn complement_of_a_plane_is_its_coordinate_projector() {
        let sig = axis_subspace_sig(&[0, 1]);
        let f = complement(&sig);
        let want = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 1.0, 0.0]));
        assert!((f - want).amax() < 1e-10);
        assert!(
            (complement(&sig).trace() - (sig.feature_dim() - sig.null_rank()) as f64).abs() < 1e-10
        );
    }

    #[test]
    fn self_similarity_counts_null_rank() {
        let sig = line_product_sig(&[0.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
        let s = similarity(&sig, &sig).unwrap();
        assert!((s.t_overlap - sig.null_rank() as f64).abs() < 1e-12);
    }

    #[test]
    fn coordinate_planes_share_one_axis() {
        let xy = axis_subspace_sig(&[0, 1]);
        let xz = axis_subspace_sig(&[0, 2]);
        let s = similarity(&xy, &xz).unwrap();
        assert!((s.f_overlap - 1.0).abs() < 1e-10, "F overlap {}", s.f_overlap);
        // Identity T₁.T₂ = F₁.F₂ + m − r₁ − r₂.
        assert!((s.t_overlap - (s.f_overlap + 3.0 - 2.0 - 2.0)).abs() < 1e-12);
    }

    #[test]
    fn similarity_is_symmetric_and_demands_one_space() {
        let a = axis_subspace_sig(&[0, 1]);
        let b = axis_subspace_sig(&[1, 2]);
        let s1 = similarity(&a, &b).unwrap();
        let s2 = similarity(&b, &a).unwrap();
        assert!((s1.f_overlap - s2.f_overlap).abs() < 1e-12);
        assert!((s1.t_overlap - s2.t_overlap).abs() < 1e-12);
        let other_basis = line_product_sig(&[0.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
        assert!(similarity(&a, &other_basis).is_err());
    }

    #[test]
    fn coefficient_similarity_matches_t_overlap_for_single_equations() {
        let a = line_product_sig(&[0.0, 0.0, 0.0, 1.0, 0.0, -1.0]);
        let b = line_product_sig(&[0.0, 0.0, 0.0, 1.0, 1.0, 0.0]);
        let c = coefficient_similarity(&a, &b).unwrap();
        let t = similarity(&a, &b).unwrap().t_overlap;
        assert!((c - t).abs() < 1e-12, "coefficient {c} vs t-overlap {t}");
    }

    #[test]
    fn identical_coefficients_score_one_orthogonal_score_zero() {
        let basis = MonomialBasis::without_constant(2, 1).unwrap();
        let x_axis = Signature::from_null_vectors(
            &basis,
            &[DVector::from_vec(vec![0.0, 1.0])],
            DEFAULT_EPSILON,
        )
        .unwrap();
        let y_axis = Signature::from_null_vectors(
            &basis,
            &[DVector::from_vec(vec![1.0, 0.0])],
            DEFAULT_EPSILON,
        )
        .unwrap();
        assert!((coefficient_similarity(&x_axis, &x_axis).unwrap() - 1.0).abs() < 1e-15);
        assert!(coefficient_similarity(&x_axis, &y_axis).unwrap().abs() < 1e-15);
    }

    #[test]
    fn coefficient_similarity_rejects_higher_null_rank() {
        let multi = axis_subspace_sig(&[0]);
        assert_eq!(multi.null_rank(), 2);
        let err = coefficient_similarity(&multi, &multi).unwrap_err();
        assert!(err.to_string().contains("single-equation"));
    }

    #[test]
    fn intersecting_a_signature_with_itself_changes_nothing() {
        let sig = axis_subspace_sig(&[0, 1]);
        let cap = intersect(&sig, &sig, &IntersectOptions::default()).unwrap();
        assert!((cap.null_projector() - sig.null_projector()).norm() <= 1e-10);
    }

    #[test]
    fn coordinate_planes_intersect_in_their_common_axis() {
        let xy = axis_subspace_sig(&[0, 1]);
        let xz = axis_subspace_sig(&[0, 2]);
        let cap = intersect(&xy, &xz, &IntersectOptions::default()).unwrap();
        let f = complement(&cap);
        let want = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 0.0, 0.0]));
        assert!((f - want).amax() < 1e-8, "intersection should be the x₁-axis");
    }

    #[test]
    fn union_concept_intersection_recovers_the_shared_line() {
        // (x-axis ∪ y-axis) ∩ (x-axis ∪ diagonal) leaves the x-axis concept.
        let a = line_product_sig(&[0.0, 0.0, 0.0, 0.0, 1.0, 0.0]); // x₁x₂
        let b = line_product_sig(&[0.0, 0.0, 0.0, 0.0, 1.0, -1.0]); // x₂(x₁−x₂)
        let cap = intersect(&a, &b, &IntersectOptions::default()).unwrap();
        for t in [-2.0, -0.5, 0.3, 1.7] {
            assert!(cap.membership_score(&[t, 0.0]).unwrap() <= 1e-8, "x-axis point {t}");
        }
        let s1 = cap.membership_score(&[0.0, 0.5]).unwrap();
        let s2 = cap.membership_score(&[1.0, 1.0]).unwrap();
        assert!(s1 >= 1e-3, "(0, 0.5) scored {s1}");
        assert!(s2 >= 1e-3, "(1, 1) scored {s2}");
    }

    #[test]
    fn intersection_is_commutative_and_monotone() {
        let a = line_product_sig(&[0.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
        let b = line_product_sig(&[0.0, 0.0, 0.0, 1.0, 0.0, -1.0]);
        let ab = intersect(&a, &b, &IntersectOptions::default()).unwrap();
        let ba = intersect(&b, &a, &IntersectOptions::default()).unwrap();
        assert!((complement(&ab) - complement(&ba)).norm() <= 1e-8);
        // range(F_∩) inside each input range: F_i F_∩ = F_∩.
        for side in [&a, &b] {
            let f = complement(side);
            let fc = complement(&ab);
            assert!((&f * &fc - &fc).norm() <= 1e-8);
        }
    }

    #[test]
    fn exhausted_iteration_budget_reports_residual() {
        let a = axis_subspace_sig(&[0, 1]);
        // Nearly parallel plane: rotate the xy-plane slightly about the x-axis.
        let eps = 1e-3;
        let pts: Vec<Vec<f64>> = (0..30)
            .map(|i| {
                let u = (i as f64 * 0.37).sin() * 2.0 + 0.1;
                let v = (i as f64 * 0.91).cos() * 2.0 + 0.1;
                vec![u, v, eps * v]
            })
            .collect();
        let tilted = Signature::fit(
            &PointCloud::new(3, pts).unwrap(),
            &FitConfig::degree(1).homogeneous(),
        )
        .unwrap();
        let err = intersect(&a, &tilted, &IntersectOptions { tol: 1e-14, max_iter: 2 }).unwrap_err();
        match err {
            Error::NoConvergence { residual, iterations, .. } => {
                assert_eq!(iterations, 2);
                assert!(residual > 1e-14);
            }
            other => panic!("expected NoConvergence, got {other}"),
        }
    }

    #[test]
    fn subset_check_agrees_with_hand_projectors() {
        let xy = axis_subspace_sig(&[0, 1]);
        let x = axis_subspace_sig(&[0]);
        let y = axis_subspace_sig(&[1]);
        assert!(subset_check(&xy, &xy, SUBSET_TOL).unwrap());
        assert!(subset_check(&xy, &x, SUBSET_TOL).unwrap(), "x-axis sits inside the xy-plane");
        assert!(!subset_check(&x, &xy, SUBSET_TOL).unwrap(), "a plane is not inside a line");
        assert!(!subset_check(&y, &x, SUBSET_TOL).unwrap(), "orthogonal axes");
    }

    #[test]
    fn dictionary_of_pairwise_unions_yields_the_three_lines() {
        // Lines U: x₂=0, V: x₁=0, W: x₁=x₂; inputs are the pairwise unions.
        let uv = line_product_sig(&[0.0, 0.0, 0.0, 0.0, 1.0, 0.0]); // x₁x₂
        let uw = line_product_sig(&[0.0, 0.0, 0.0, 0.0, 1.0, -1.0]); // x₂(x₁−x₂)
        let vw = line_product_sig(&[0.0, 0.0, 0.0, 1.0, -1.0, 0.0]); // x₁(x₁−x₂)
        let atoms = discover_dictionary(
            &[uv.clone(), uw.clone(), vw.clone()],
            &DictionaryOptions::default(),
        )
        .unwrap();
        assert_eq!(atoms.len(), 3, "expected one atom per line");
        // Each atom should vanish on exactly one of the lines.
        let on_line = |sig: &Signature, dir: [f64; 2]| -> bool {
            [-1.5, 0.4, 2.0]
                .iter()
                .all(|&t| sig.membership_score(&[t * dir[0], t * dir[1]]).unwrap() <= 1e-8)
        };
        let dirs = [[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]];
        let mut matched = [false; 3];
        for atom in &atoms {
            let hits: Vec<usize> = dirs
                .iter()
                .enumerate()
                .filter(|(_, d)| on_line(atom, **d))
                .map(|(i, _)| i)
                .collect();
            assert_eq!(hits.len(), 1, "atom should cover exactly one line, got {hits:?}");
            matched[hits[0]] = true;
        }
        assert!(matched.iter().all(|&m| m), "all three lines recovered");
    }

    #[test]
    fn dictionary_passes_single_and_duplicate_inputs_through() {
        let sig = line_product_sig(&[0.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
        let single = discover_dictionary(std::slice::from_ref(&sig), &DictionaryOptions::default())
            .unwrap();
        assert_eq!(single.len(), 1);
        let dup = discover_dictionary(&[sig.clone(), sig.clone()], &DictionaryOptions::default())
            .unwrap();
        assert_eq!(dup.len(), 1);
    }

    #[test]
    fn constructed_subspace_overlap_dominates_intersection_dimension() {
        // U₁ = span{e1..e5}, U₂ = span{e1,e2,e3,e6,e7} in R^10: overlap dim 3.
        let mk = |axes: &[usize], seed: u64| {
            let basis: Vec<Vec<f64>> = axes
                .iter()
                .map(|&ax| {
                    let mut e = vec![0.0; 10];
                    e[ax] = 1.0;
                    e
                })
                .collect();
            let spec = crate::generators::ManifoldSpec::new(crate::generators::Shape::Subspace {
                basis,
                offset: vec![0.0; 10],
            });
            let cloud = crate::generators::sample(&spec, 40, seed).unwrap();
            Signature::fit(&cloud, &FitConfig::degree(1).homogeneous()).unwrap()
        };
        let u1 = mk(&[0, 1, 2, 3, 4], 21);
        let u2 = mk(&[0, 1, 2, 5, 6], 22);
        let s = similarity(&u1, &u2).unwrap();
        assert!(s.f_overlap >= 3.0 - 1e-6, "F overlap {} below intersection dim", s.f_overlap);
    }
}
