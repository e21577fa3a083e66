//! Named, seeded end-to-end experiments with frozen tolerances.
//!
//! Each experiment reruns one headline result of the library — exact null
//! vectors, Monte-Carlo similarity statistics, concept intersection and
//! dictionary recovery, hierarchical and transform-family concepts, the
//! streaming learner, and MLP moment recovery — and reports every measured
//! value next to the bound it must satisfy. The acceptance suite and the
//! CLI `repro` subcommand both run these functions, so a published number
//! is always reproducible from the command line with the same seed.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::algebra::{self, DictionaryOptions, IntersectOptions, SUBSET_TOL};
use crate::basis::MonomialBasis;
use crate::cloud::PointCloud;
use crate::generators::{self, ManifoldSpec, Shape, TransformFamily};
use crate::hierarchy::{self, Level2Config, RotationConfig};
use crate::mlp::{self, RandomMlp};
use crate::projection::{target_dim, ProjectionRecord, RandomProjection};
use crate::seeding;
use crate::signature::{FitConfig, Signature, DEFAULT_EPSILON};
use crate::stats;
use crate::stream::{self, Stack, StackConfig};
use crate::{Error, Result};

/// One measured quantity and the bound it must satisfy.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub constraint: String,
    pub pass: bool,
}

impl Check {
    fn le(name: &str, value: f64, bound: f64) -> Check {
        Check {
            name: name.into(),
            value,
            constraint: format!("≤ {bound:.3e}"),
            pass: value <= bound,
        }
    }

    fn ge(name: &str, value: f64, bound: f64) -> Check {
        Check {
            name: name.into(),
            value,
            constraint: format!("≥ {bound:.3e}"),
            pass: value >= bound,
        }
    }

    fn in_band(name: &str, value: f64, lo: f64, hi: f64) -> Check {
        Check {
            name: name.into(),
            value,
            constraint: format!("∈ [{lo:.3}, {hi:.3}]"),
            pass: (lo..=hi).contains(&value),
        }
    }

    fn equals(name: &str, value: f64, want: f64) -> Check {
        Check {
            name: name.into(),
            value,
            constraint: format!("== {want}"),
            pass: value == want,
        }
    }

    /// A measured value reported for context, with no bound of its own.
    fn recorded(name: &str, value: f64) -> Check {
        Check { name: name.into(), value, constraint: "recorded".into(), pass: true }
    }

    fn boolean(name: &str, ok: bool, constraint: &str) -> Check {
        Check {
            name: name.into(),
            value: if ok { 1.0 } else { 0.0 },
            constraint: constraint.into(),
            pass: ok,
        }
    }
}

/// Result of one named experiment.
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentReport {
    pub id: String,
    pub seed: u64,
    /// Wall-clock time; excluded from serialization so that reruns with the
    /// same seed produce byte-identical JSON.
    #[serde(skip)]
    pub elapsed_ms: u128,
    pub checks: Vec<Check>,
    pub pass: bool,
}

impl ExperimentReport {
    /// One human-readable pass/fail line per check.
    pub fn lines(&self) -> Vec<String> {
        let mut out = Vec::with_capacity(self.checks.len() + 1);
        for c in &self.checks {
            out.push(format!(
                "  [{}] {}: {:.6e} {}",
                if c.pass { "pass" } else { "FAIL" },
                c.name,
                c.value,
                c.constraint
            ));
        }
        out.push(format!(
            "{}: {} ({} checks, {} ms)",
            self.id,
            if self.pass { "PASS" } else { "FAIL" },
            self.checks.len(),
            self.elapsed_ms
        ));
        out
    }
}

/// Every experiment id, in suite order.
pub const EXPERIMENTS: &[&str] = &[
    "circle-exact",
    "subspace-overlap",
    "similarity-statistics",
    "intersection",
    "dictionary",
    "circle-concept",
    "rotation-family",
    "motion-concept",
    "monotonicity",
    "random-projection",
    "residual-decay",
    "stream",
    "mlp-recovery",
    "memorization",
];

/// Run one experiment by id.
pub fn run(id: &str, seed: u64) -> Result<ExperimentReport> {
    let start = std::time::Instant::now();
    let checks = match id {
        "circle-exact" => circle_exact(seed)?,
        "subspace-overlap" => subspace_overlap(seed)?,
        "similarity-statistics" => similarity_statistics(seed)?,
        "intersection" => intersection(seed)?,
        "dictionary" => dictionary(seed)?,
        "circle-concept" => circle_concept(seed)?,
        "rotation-family" => rotation_family(seed)?,
        "motion-concept" => motion_concept(seed)?,
        "monotonicity" => monotonicity(seed)?,
        "random-projection" => random_projection(seed)?,
        "residual-decay" => residual_decay(seed)?,
        "stream" => stream_experiment(seed)?,
        "mlp-recovery" => mlp_recovery(seed)?,
        "memorization" => memorization(seed)?,
        other => {
            return Err(Error::InvalidInput(format!(
                "unknown experiment '{other}'; known: {}",
                EXPERIMENTS.join(", ")
            )))
        }
    };
    let pass = checks.iter().all(|c| c.pass);
    Ok(ExperimentReport {
        id: id.into(),
        seed,
        elapsed_ms: start.elapsed().as_millis(),
        checks,
        pass,
    })
}

/// Run the whole suite in order.
pub fn run_all(seed: u64) -> Result<Vec<ExperimentReport>> {
    EXPERIMENTS.iter().map(|id| run(id, seed)).collect()
}

// ---- 1: exact circle signature ----------------------------------------

fn circle_exact(_seed: u64) -> Result<Vec<Check>> {
    let angles: Vec<f64> = (0..50)
        .map(|i| std::f64::consts::FRAC_PI_4 * i as f64 / 49.0)
        .collect();
    let arc = generators::circle_points_at_angles([0.0, 0.0], 1.0, &angles)?;
    let sig = Signature::fit(&arc, &FitConfig::degree(2))?;
    let mut checks = vec![Check::equals("null-rank", sig.null_rank() as f64, 1.0)];

    // Null vector vs the circle polynomial x² + y² − 1 in graded order.
    let v = sig.null_space_basis().column(0).into_owned();
    let target = DVector::from_vec(vec![-1.0, 0.0, 0.0, 1.0, 0.0, 1.0]) / 3.0_f64.sqrt();
    checks.push(Check::ge("null-vector-cosine", v.dot(&target).abs(), 0.999));

    let held_angles: Vec<f64> = (0..100).map(|i| std::f64::consts::TAU * i as f64 / 100.0).collect();
    let held = generators::circle_points_at_angles([0.0, 0.0], 1.0, &held_angles)?;
    let worst = held
        .points()
        .iter()
        .map(|p| sig.membership_score(p))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    checks.push(Check::le("held-out-max-score", worst, 1e-10));

    let outside = sig.membership_score(&[2.0, 0.0])?;
    checks.push(Check::in_band("score-at-(2,0)", outside, 3.0 - 1e-6, 3.0 + 1e-6));
    Ok(checks)
}

// ---- 2: subspace overlap statistics ------------------------------------

/// Signature of a k-dim linear subspace of R^d from an orthonormal basis,
/// over degree-1 homogeneous features (where the complement projector is
/// exactly `QQᵀ`).
fn subspace_signature(q: &DMatrix<f64>) -> Result<Signature> {
    let basis = MonomialBasis::without_constant(q.nrows(), 1)?;
    Signature::from_complement_projector(basis, q * q.transpose(), DEFAULT_EPSILON)
}

fn random_orthonormal(d: usize, k: usize, rng: &mut impl Rng) -> DMatrix<f64> {
    let g = DMatrix::from_fn(d, k, |_, _| StandardNormal.sample(rng));
    g.qr().q()
}

fn subspace_overlap(seed: u64) -> Result<Vec<Check>> {
    let (d, k, trials) = (50, 3, 200);
    let mut rng = seeding::rng_for(seed, "repro-subspace-overlap");
    let mut overlaps = Vec::with_capacity(trials);
    for _ in 0..trials {
        let a = subspace_signature(&random_orthonormal(d, k, &mut rng))?;
        let b = subspace_signature(&random_orthonormal(d, k, &mut rng))?;
        overlaps.push(algebra::similarity(&a, &b)?.f_overlap);
    }
    let mut checks = vec![Check::in_band(
        "mean-f-overlap",
        stats::mean(&overlaps),
        0.13,
        0.23,
    )];

    // Constructed subspaces sharing exactly j axes.
    for j in 1..=k {
        let mut qa = DMatrix::zeros(d, k);
        let mut qb = DMatrix::zeros(d, k);
        for c in 0..j {
            qa[(c, c)] = 1.0;
            qb[(c, c)] = 1.0;
        }
        // Disjoint axis completions keep the extra directions orthogonal.
        for c in j..k {
            qa[(k + c, c)] = 1.0;
            qb[(2 * k + c, c)] = 1.0;
        }
        let sim = algebra::similarity(&subspace_signature(&qa)?, &subspace_signature(&qb)?)?;
        checks.push(Check::ge(
            &format!("known-intersection-dim-{j}"),
            sim.f_overlap,
            j as f64 - 1e-6,
        ));
    }
    Ok(checks)
}

// ---- 3: similarity statistics from the closed-form corollaries ---------

/// Hyperplane signature `a·x + b = 0` in the degree-1-with-constant basis.
fn hyperplane_signature(a: &DVector<f64>, b: f64) -> Result<Signature> {
    let d = a.len();
    let basis = MonomialBasis::new(d, 1)?;
    let mut v = DVector::zeros(d + 1);
    v[0] = b;
    for i in 0..d {
        v[1 + i] = a[i];
    }
    Signature::from_null_vectors(&basis, &[v], DEFAULT_EPSILON)
}

/// Sphere signature `‖x − c‖² = ρ²` in the degree-2 basis of R³.
fn sphere_signature(basis: &MonomialBasis, c: &[f64; 3], rho: f64) -> Result<Signature> {
    // Graded order for (3, 2): [1, x₁, x₂, x₃, x₁², x₁x₂, x₁x₃, x₂², x₂x₃, x₃²].
    let mut v = DVector::zeros(10);
    v[0] = c.iter().map(|z| z * z).sum::<f64>() - rho * rho;
    for i in 0..3 {
        v[1 + i] = -2.0 * c[i];
    }
    v[4] = 1.0;
    v[7] = 1.0;
    v[9] = 1.0;
    Signature::from_null_vectors(basis, &[v], DEFAULT_EPSILON)
}

fn similarity_statistics(seed: u64) -> Result<Vec<Check>> {
    let trials = 500;
    let mut checks = Vec::new();
    let mut rng = seeding::rng_for(seed, "repro-similarity");

    for d in [10usize, 50] {
        let mut sims = Vec::with_capacity(trials);
        let mut parallel = Vec::with_capacity(trials);
        for _ in 0..trials {
            let a1 = DVector::from_fn(d, |_, _| StandardNormal.sample(&mut rng));
            let a2 = DVector::from_fn(d, |_, _| StandardNormal.sample(&mut rng));
            let (b1, b2): (f64, f64) =
                (StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng));
            // Random lines pass through the origin, so the d normal
            // coefficients carry all the randomness and the population mean
            // is exactly 1/d (an offset coordinate would shift it to
            // 1/(d+1), off-centre for the ±3·stderr band).
            let s1 = hyperplane_signature(&a1, 0.0)?;
            let s2 = hyperplane_signature(&a2, 0.0)?;
            sims.push(algebra::coefficient_similarity(&s1, &s2)?);
            // Parallel lines share the normal and differ in Gaussian offsets.
            let p1 = hyperplane_signature(&a1, b1)?;
            let p2 = hyperplane_signature(&a1, b2)?;
            parallel.push(algebra::coefficient_similarity(&p1, &p2)?);
        }
        let mean = stats::mean(&sims);
        let band = 3.0 * stats::stderr_of_mean(&sims);
        let target = 1.0 / d as f64;
        checks.push(Check::in_band(
            &format!("random-lines-mean-d{d}"),
            mean,
            target - band,
            target + band,
        ));
        checks.push(Check::ge(
            &format!("parallel-lines-mean-d{d}"),
            stats::mean(&parallel),
            1.0 - 5.0 / d as f64,
        ));
    }

    let basis = MonomialBasis::new(3, 2)?;
    let mut worst_concentric: f64 = 0.0;
    let mut sphere_sims = Vec::with_capacity(trials);
    for _ in 0..trials {
        let c1 = [(); 3].map(|_| StandardNormal.sample(&mut rng));
        let c2 = [(); 3].map(|_| StandardNormal.sample(&mut rng));
        let (r1, r2): (f64, f64) =
            (StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng));
        // Two constructions of the same sphere: similarity is exactly 1
        // (identical concepts, zero Monte-Carlo spread).
        let sa = sphere_signature(&basis, &c1, r1)?;
        let sb = sphere_signature(&basis, &c1, r1)?;
        worst_concentric =
            worst_concentric.max((algebra::coefficient_similarity(&sa, &sb)? - 1.0).abs());
        // Independent spheres.
        let sc = sphere_signature(&basis, &c2, r2)?;
        sphere_sims.push(algebra::coefficient_similarity(&sa, &sc)?);
    }
    checks.push(Check::le("concentric-spheres-deviation", worst_concentric, 1e-12));
    checks.push(Check::in_band(
        "random-spheres-mean",
        stats::mean(&sphere_sims),
        0.15,
        0.25,
    ));
    Ok(checks)
}

// ---- 4: intersection operator ------------------------------------------

fn intersection(seed: u64) -> Result<Vec<Check>> {
    // Planes x₃ = 0 and x₂ = 0 over homogeneous linear features.
    let plane = |keep: [usize; 2], seed| -> Result<Signature> {
        let e = |i| {
            let mut v = vec![0.0; 3];
            v[i] = 1.0;
            v
        };
        let spec = ManifoldSpec::new(Shape::Subspace {
            basis: vec![e(keep[0]), e(keep[1])],
            offset: vec![0.0; 3],
        });
        let cloud = generators::sample(&spec, 40, seed)?;
        Signature::fit(&cloud, &FitConfig::degree(1).homogeneous())
    };
    let s12 = plane([0, 1], seed ^ 0x51)?; // x₃ = 0
    let s13 = plane([0, 2], seed ^ 0x52)?; // x₂ = 0
    let cap = algebra::intersect(&s12, &s13, &IntersectOptions::default())?;
    let f = algebra::complement(&cap);
    let want = DMatrix::from_fn(3, 3, |i, j| if i == 0 && j == 0 { 1.0 } else { 0.0 });
    let mut checks = vec![Check::le("planes-f-projector-error", (&f - &want).amax(), 1e-8)];

    // Union concepts: (x-axis ∪ y-axis) ∩ (x-axis ∪ diagonal).
    let line = |dir: [f64; 2]| {
        ManifoldSpec::new(Shape::Subspace { basis: vec![dir.to_vec()], offset: vec![0.0; 2] })
    };
    let union = |a: ManifoldSpec, b: ManifoldSpec, seed| -> Result<Signature> {
        let spec = ManifoldSpec::new(Shape::Union { members: vec![a, b] });
        let cloud = generators::sample(&spec, 120, seed)?;
        Signature::fit(&cloud, &FitConfig::degree(2))
    };
    let axes = union(line([1.0, 0.0]), line([0.0, 1.0]), seed ^ 0x53)?;
    let diag = union(line([1.0, 0.0]), line([1.0, 1.0]), seed ^ 0x54)?;
    let common = algebra::intersect(&axes, &diag, &IntersectOptions::default())?;
    let on = [[0.7, 0.0], [-1.3, 0.0], [0.25, 0.0]]
        .iter()
        .map(|p| common.membership_score(p))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    checks.push(Check::le("x-axis-max-score", on, 1e-8));
    checks.push(Check::ge("probe-(1,1)-score", common.membership_score(&[1.0, 1.0])?, 1e-3));
    checks.push(Check::ge(
        "probe-(0,0.5)-score",
        common.membership_score(&[0.0, 0.5])?,
        1e-3,
    ));
    Ok(checks)
}

// ---- 5: dictionary discovery -------------------------------------------

fn dictionary(seed: u64) -> Result<Vec<Check>> {
    // Three lines through the origin and their pairwise union concepts.
    let dirs = [[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]];
    let line = |d: [f64; 2]| {
        ManifoldSpec::new(Shape::Subspace { basis: vec![d.to_vec()], offset: vec![0.0; 2] })
    };
    let mut unions = Vec::new();
    let mut s = seed;
    for (i, j) in [(0, 1), (0, 2), (1, 2)] {
        let spec = ManifoldSpec::new(Shape::Union { members: vec![line(dirs[i]), line(dirs[j])] });
        s = s.wrapping_add(1);
        let cloud = generators::sample(&spec, 120, s)?;
        unions.push(Signature::fit(&cloud, &FitConfig::degree(2))?);
    }
    let atoms = algebra::discover_dictionary(&unions, &DictionaryOptions::default())?;
    let mut checks = vec![Check::equals("atom-count", atoms.len() as f64, 3.0)];

    // 99-point probe grid along the three lines (kept away from the shared
    // origin, where every line's atom vanishes) plus one generic point.
    let mut probes: Vec<(usize, Vec<f64>)> = Vec::new();
    for (li, d) in dirs.iter().enumerate() {
        let norm = (d[0] * d[0] + d[1] * d[1]).sqrt();
        for t in 0..33i32 {
            let c = if t < 17 { -2.0 + 0.1 * t as f64 } else { 0.4 + 0.1 * (t - 17) as f64 };
            probes.push((li, vec![c * d[0] / norm, c * d[1] / norm]));
        }
    }
    probes.push((usize::MAX, vec![0.9, -0.4]));
    // Each atom must vanish on exactly one line and reject the rest.
    let mut matched_lines = Vec::new();
    let mut worst_on: f64 = 0.0;
    let mut worst_off = f64::INFINITY;
    for atom in &atoms {
        let mut on_line = [true; 3];
        for (li, p) in &probes {
            let score = atom.membership_score(p)?;
            if *li < 3 && score > 1e-8 {
                on_line[*li] = false;
            }
        }
        let line_idx = on_line.iter().position(|&b| b);
        if let Some(li) = line_idx {
            matched_lines.push(li);
            for (pj, p) in &probes {
                let score = atom.membership_score(p)?;
                if *pj == li {
                    worst_on = worst_on.max(score);
                } else {
                    worst_off = worst_off.min(score);
                }
            }
        }
    }
    matched_lines.sort_unstable();
    matched_lines.dedup();
    checks.push(Check::equals("lines-covered", matched_lines.len() as f64, 3.0));
    checks.push(Check::le("on-line-max-score", worst_on, 1e-8));
    checks.push(Check::ge("off-line-min-score", worst_off, 1e-3));
    Ok(checks)
}

// ---- 6: circle concept at level 2 --------------------------------------

fn circle_concept_scores(seed: u64) -> Result<(f64, f64)> {
    let radii = [0.5, 0.7, 0.9, 1.1, 1.4, 1.6, 1.8, 2.0];
    let circle = |r: f64, s: u64| -> Result<Signature> {
        let spec = ManifoldSpec::new(Shape::Circle { center: [0.0, 0.0], radius: r });
        let cloud = generators::sample(&spec, 60, s)?;
        Signature::fit(&cloud, &FitConfig::degree(2))
    };
    let sigs: Vec<Signature> = radii
        .iter()
        .enumerate()
        .map(|(i, &r)| circle(r, seed.wrapping_add(i as u64)))
        .collect::<Result<_>>()?;
    let concept =
        hierarchy::signature_of_signatures(&sigs, &Level2Config::default().with_epsilon(1e-6))?;
    let held = circle(1.2, seed.wrapping_add(100))?;
    let member = hierarchy::level2_score(&concept, &held)?;
    let line_spec = ManifoldSpec::new(Shape::Segment {
        start: vec![-1.5, 0.7],
        end: vec![1.5, 0.7],
    });
    let line_cloud = generators::sample(&line_spec, 60, seed.wrapping_add(200))?;
    let line_sig = Signature::fit(&line_cloud, &FitConfig::degree(2))?;
    let line = hierarchy::level2_score(&concept, &line_sig)?;
    Ok((member, line))
}

fn circle_concept(seed: u64) -> Result<Vec<Check>> {
    let (member, line) = circle_concept_scores(seed)?;
    let mut checks = vec![
        Check::le("held-out-circle-score", member, 1e-6),
        Check::ge("line-score", line, 1e-2),
    ];
    // Median order-of-magnitude separation across 20 reseeds.
    let mut separations = Vec::new();
    for i in 0..20 {
        let (m, l) = circle_concept_scores(seed.wrapping_add(1000 * (i + 1)))?;
        separations.push((l / m.max(1e-30)).log10());
    }
    checks.push(Check::ge(
        "median-separation-orders",
        stats::median(&separations),
        3.0,
    ));
    Ok(checks)
}

// ---- 7: rotation family -------------------------------------------------

fn rectangle_cloud(width: f64, height: f64, n: usize, seed: u64) -> Result<PointCloud> {
    let spec = generators::rectangle([0.0, 0.0], width, height)?;
    let cloud = generators::sample(&spec, n, seed)?;
    PointCloud::new(2, cloud.points().to_vec())
}

fn rotation_family(seed: u64) -> Result<Vec<Check>> {
    // Exact map against brute-force rotation of a sampled cloud.
    let cloud = generators::uniform_box_cloud(2, 40, 1.2, seed ^ 0x71)?;
    let m0 = hierarchy::planar_degree2_moments(&cloud)?;
    let mut map_err: f64 = 0.0;
    for theta in [-2.4, -0.9, 0.3, 1.7] {
        let mapped = hierarchy::moment_rotation_map(&m0, theta);
        let rotated =
            generators::transform_family(&cloud, TransformFamily::Rotation, &[vec![theta]])?
                .remove(0);
        let brute = hierarchy::planar_degree2_moments(&rotated)?;
        for (a, b) in mapped.iter().zip(&brute) {
            map_err = map_err.max((a - b).abs());
        }
    }
    let mut checks = vec![Check::le("exact-map-vs-brute-force", map_err, 1e-12)];

    // Taylor error against the cubic envelope on |θ| ≤ 0.3.
    let mut worst_excess: f64 = 0.0;
    for i in 1..=30 {
        let theta = 0.01 * i as f64;
        for t in [theta, -theta] {
            let exact = hierarchy::moment_rotation_map(&m0, t);
            let taylor = hierarchy::moment_rotation_map_taylor(&m0, t);
            let err = exact
                .iter()
                .zip(&taylor)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            worst_excess = worst_excess.max(err / (2.0 * t.abs().powi(3)));
        }
    }
    checks.push(Check::le("taylor-error-over-cubic-bound", worst_excess, 1.0));

    // Rotation-invariant concept separates new same-object angles from a
    // different object at the matcher threshold τ = 1e-5.
    let base = rectangle_cloud(2.0, 1.0, 160, seed ^ 0x72)?;
    let angles: Vec<f64> =
        (0..52).map(|i| std::f64::consts::TAU * i as f64 / 52.0).collect();
    let config = RotationConfig::default();
    let concept = hierarchy::rotation_invariant_signature(&base, &angles, &config)?;
    let held = hierarchy::rotation_family_signatures(&base, &[0.41], &config.level1)?;
    let same = hierarchy::level2_score(&concept, &held[0])?;
    checks.push(Check::le("same-object-new-angle", same, 1e-5));
    let other = rectangle_cloud(1.44, 0.63, 160, seed ^ 0x73)?;
    let other_sig = hierarchy::rotation_family_signatures(&other, &[0.41], &config.level1)?;
    let diff = hierarchy::level2_score(&concept, &other_sig[0])?;
    checks.push(Check::ge("different-object", diff, 1e-4));
    Ok(checks)
}

// ---- 8: motion concept ---------------------------------------------------

fn motion_concept(_seed: u64) -> Result<Vec<Check>> {
    let vx: Vec<Vec<f64>> = vec![vec![1.0], vec![0.0], vec![0.0]];
    let vy: Vec<Vec<f64>> = vec![vec![0.0], vec![1.0], vec![0.0]];
    let times: Vec<f64> = (0..6).map(|i| 0.35 * i as f64).collect();
    let sig_of = |initial: &[f64], v: &[Vec<f64>]| -> Result<Signature> {
        let clouds = generators::trajectory_cloud(&[initial.to_vec()], v, &times)?;
        Signature::fit(&clouds[0], &FitConfig::degree(1).homogeneous())
    };
    let a = sig_of(&[0.0, 0.0, 0.0], &vx)?;
    let b = sig_of(&[0.0, 1.0, 0.0], &vx)?;
    let velocity = hierarchy::velocity_signature(&[a, b], &IntersectOptions::default())?;
    let third = sig_of(&[0.4, -0.7, 0.3], &vx)?;
    let same = algebra::subset_check(&third, &velocity, SUBSET_TOL)?;
    let orthogonal = sig_of(&[0.4, -0.7, 0.3], &vy)?;
    let different = algebra::subset_check(&orthogonal, &velocity, SUBSET_TOL)?;
    Ok(vec![
        Check::boolean("same-velocity-subset", same, "subset_check == true"),
        Check::boolean("orthogonal-velocity-subset", !different, "subset_check == false"),
    ])
}

// ---- 9: membership monotonicity -----------------------------------------

fn monotonicity_deltas() -> Vec<f64> {
    (1..=10).map(|i| 0.1 * i as f64).collect()
}

fn offset_medians(
    sig: &Signature,
    base: &[f64],
    deltas: &[f64],
    seed: u64,
) -> Result<Vec<f64>> {
    let d = base.len();
    let mut rng = seeding::rng_for(seed, "repro-monotonicity-offsets");
    // Common random directions across the Δ grid: each direction traces one
    // score-vs-distance curve, so the medians compare like against like
    // instead of resampling fresh offsets per Δ.
    let directions: Vec<Vec<f64>> = (0..200)
        .map(|_| {
            let u: Vec<f64> = (0..d).map(|_| StandardNormal.sample(&mut rng)).collect();
            let norm = u.iter().map(|v| v * v).sum::<f64>().sqrt();
            u.into_iter().map(|v| v / norm).collect()
        })
        .collect();
    let mut medians = Vec::with_capacity(deltas.len());
    for &delta in deltas {
        let mut scores = Vec::with_capacity(directions.len());
        for u in &directions {
            let probe: Vec<f64> =
                base.iter().zip(u).map(|(b, ui)| b + delta * ui).collect();
            scores.push(sig.membership_score(&probe)?);
        }
        medians.push(stats::median(&scores));
    }
    Ok(medians)
}

fn monotonicity(seed: u64) -> Result<Vec<Check>> {
    let deltas = monotonicity_deltas();
    let mut checks = Vec::new();

    let circle_spec = ManifoldSpec::new(Shape::Circle { center: [0.0, 0.0], radius: 1.0 });
    let circle_cloud = generators::sample(&circle_spec, 80, seed ^ 0x91)?;
    let circle_sig = Signature::fit(&circle_cloud, &FitConfig::degree(2))?;
    let circle_medians = offset_medians(&circle_sig, &[1.0, 0.0], &deltas, seed ^ 0x92)?;

    // Degree-2 polynomial image of a 2-dim latent space in R^10.
    let mut rng = seeding::rng_for(seed ^ 0x93, "repro-monotonicity-generator");
    let coefficients: Vec<Vec<generators::PolyTerm>> = (0..10)
        .map(|_| {
            // Constant + linear + quadratic terms in (z₁, z₂).
            [
                vec![0, 0], vec![1, 0], vec![0, 1], vec![2, 0], vec![1, 1], vec![0, 2],
            ]
            .into_iter()
            .map(|e: Vec<u32>| generators::PolyTerm {
                exponents: e,
                coeff: rng.gen_range(-0.8..0.8),
            })
            .collect()
        })
        .collect();
    let gen_spec = ManifoldSpec::new(Shape::PolyGenerator {
        latent_dim: 2,
        degree: 2,
        coefficients: coefficients.clone(),
    });
    let gen_cloud = generators::sample(&gen_spec, 220, seed ^ 0x94)?;
    let gen_sig = Signature::fit(&gen_cloud, &FitConfig::degree(2))?;
    // Base point: the generator's image of the latent origin (the constant
    // terms), guaranteed on-manifold.
    let base: Vec<f64> = coefficients.iter().map(|terms| terms[0].coeff).collect();
    let gen_medians = offset_medians(&gen_sig, &base, &deltas, seed ^ 0x95)?;

    for (name, medians) in [("circle", circle_medians), ("generator", gen_medians)] {
        let strict = medians.windows(2).all(|w| w[1] > w[0]);
        checks.push(Check::boolean(
            &format!("{name}-medians-strictly-increasing"),
            strict,
            "strictly increasing over Δ grid",
        ));
        checks.push(Check::ge(
            &format!("{name}-spearman"),
            stats::spearman(&deltas, &medians),
            0.99,
        ));
    }
    Ok(checks)
}

// ---- 10: random projection ----------------------------------------------

/// Quadratic curve t ↦ a + b·t + c·t² in R^50 with bounded coefficients.
fn quadratic_curve_points(n: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = seeding::rng_for(seed, "repro-projection-curve");
    let coeff: Vec<[f64; 3]> =
        (0..50).map(|_| [(); 3].map(|_| rng.gen_range(-0.7..0.7))).collect();
    (0..n)
        .map(|i| {
            let t = -1.0 + 2.0 * i as f64 / (n.max(2) - 1) as f64;
            coeff.iter().map(|c| c[0] + c[1] * t + c[2] * t * t).collect()
        })
        .collect()
}

fn random_projection(seed: u64) -> Result<Vec<Check>> {
    let out_dim = target_dim(1, 0.05, 0.5)?;
    let mut checks = vec![Check::equals("target-dim", out_dim as f64, 128.0)];

    let pts = quadratic_curve_points(30, seed ^ 0xa1);
    let cloud = PointCloud::new(50, pts.clone())?;
    let mut seed_pass = 0usize;
    let trials = 40;
    for t in 0..trials {
        let record = ProjectionRecord {
            seed: seed.wrapping_add(t),
            in_dim: 50,
            out_dim,
        };
        let proj = RandomProjection::from_record(record)?;
        let projected = proj.project_cloud(&cloud)?;
        let mut ok = true;
        'pairs: for i in 0..pts.len() {
            for j in (i + 1)..pts.len() {
                let orig: f64 = pts[i]
                    .iter()
                    .zip(&pts[j])
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt();
                let new: f64 = projected.points()[i]
                    .iter()
                    .zip(&projected.points()[j])
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt();
                let ratio = new / orig;
                if !(0.5..=1.5).contains(&ratio) {
                    ok = false;
                    break 'pairs;
                }
            }
        }
        seed_pass += ok as usize;
    }
    checks.push(Check::ge(
        "distortion-pass-fraction",
        seed_pass as f64 / trials as f64,
        0.95,
    ));

    // Membership separation survives projection: fit on projected features.
    let record = ProjectionRecord { seed: seed ^ 0xa2, in_dim: 50, out_dim };
    let config = FitConfig::degree(2).with_projection(record);
    let sig = Signature::fit(&cloud, &config)?;
    let held = quadratic_curve_points(41, seed ^ 0xa1); // same curve, denser grid
    let on = held
        .iter()
        .map(|p| sig.membership_score(p))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    checks.push(Check::le("on-curve-max-score", on, 1e-6));
    let mut rng = seeding::rng_for(seed ^ 0xa3, "repro-projection-off");
    let mut off = f64::INFINITY;
    for p in held.iter().take(20) {
        let mut q: Vec<f64> = p.clone();
        let u: Vec<f64> = (0..50).map(|_| StandardNormal.sample(&mut rng)).collect();
        let norm = u.iter().map(|v| v * v).sum::<f64>().sqrt();
        for (qi, ui) in q.iter_mut().zip(&u) {
            *qi += 0.5 * ui / norm;
        }
        off = off.min(sig.membership_score(&q)?);
    }
    checks.push(Check::ge("off-curve-min-score", off, 1e-2));
    Ok(checks)
}

// ---- 11: residual decay over level-2 degree -----------------------------

fn residual_decay(seed: u64) -> Result<Vec<Check>> {
    let base = rectangle_cloud(2.0, 1.0, 160, seed ^ 0xb1)?;
    let angles: Vec<f64> =
        (0..52).map(|i| std::f64::consts::TAU * i as f64 / 52.0).collect();
    let level1 = FitConfig::degree(4);
    let members = hierarchy::rotation_family_signatures(&base, &angles, &level1)?;
    let held_angles: Vec<f64> = (0..21).map(|i| 0.05 + 0.29 * i as f64).collect();
    let held = hierarchy::rotation_family_signatures(&base, &held_angles, &level1)?;
    let mut residuals = Vec::new();
    for degree in [1u32, 2, 3] {
        let config = Level2Config::default().with_degree(degree);
        let concept = hierarchy::signature_of_signatures(&members, &config)?;
        let mut worst: f64 = 0.0;
        for h in &held {
            worst = worst.max(hierarchy::level2_score(&concept, h)?);
        }
        // Floor at 1e-10 so machine-noise ordering cannot flip the trend.
        residuals.push(worst.max(1e-10));
    }
    Ok(vec![
        Check::recorded("residual-degree-1", residuals[0]),
        Check::le("residual-degree-2", residuals[1], residuals[0]),
        Check::le("residual-degree-3", residuals[2], residuals[1]),
    ])
}

// ---- 12: streaming architecture -----------------------------------------

fn stream_experiment(seed: u64) -> Result<Vec<Check>> {
    let (d, k, n) = (20, 2, 300);
    let mut rng = seeding::rng_for(seed, "repro-stream-subspaces");
    let bases: Vec<DMatrix<f64>> = (0..3).map(|_| random_orthonormal(d, k, &mut rng)).collect();
    let mut prng = seeding::rng_for(seed, "repro-stream-points");
    let pts: Vec<(usize, Vec<f64>)> = (0..n)
        .map(|i| {
            let s = i % 3;
            let coeffs = DVector::from_fn(k, |_, _| prng.gen_range(0.25..1.75));
            (s, (&bases[s] * coeffs).as_slice().to_vec())
        })
        .collect();

    let mut stack = Stack::new(StackConfig::default())?;
    let warmup = stack.layer(0).config().warmup();
    let mut label_of_step = vec![usize::MAX];
    let mut purities = Vec::new();
    for (label, p) in &pts {
        let report = stack.step(p)?;
        label_of_step.push(*label);
        if report.step > warmup {
            if let Some(head) = report.layers[0].heads.first() {
                let same = head
                    .selected
                    .iter()
                    .filter(|(s, _)| label_of_step[*s as usize] == *label)
                    .count();
                purities.push(same as f64 / head.selected.len() as f64);
            }
        }
    }
    let mut checks = vec![Check::ge("top-k-purity", stats::mean(&purities), 0.95)];

    let dict_len = stack.layer(0).dictionary().len();
    checks.push(Check::ge("dictionary-entries", dict_len as f64, 3.0));
    let offline: Vec<DVector<f64>> = (0..3)
        .map(|s| {
            let mine: Vec<Vec<f64>> =
                pts.iter().filter(|(l, _)| *l == s).map(|(_, p)| p.clone()).collect();
            let cloud = PointCloud::new(d, mine)?;
            let sig = Signature::fit(&cloud, &FitConfig::degree(1).homogeneous())?;
            Ok(hierarchy::flatten_symmetric(&sig.eps_projector()))
        })
        .collect::<Result<_>>()?;
    let mut worst_entry_cosine = f64::INFINITY;
    let mut claimed = [false; 3];
    for e in stack.layer(0).dictionary() {
        let (best_s, best_c) = offline
            .iter()
            .enumerate()
            .map(|(s, f)| {
                Ok((s, stream::centered_attention_score(&e.flat, f, 1)?))
            })
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .expect("three offline flats");
        worst_entry_cosine = worst_entry_cosine.min(best_c);
        claimed[best_s] = true;
    }
    checks.push(Check::ge("entry-to-offline-cosine", worst_entry_cosine, 0.9));
    checks.push(Check::boolean(
        "all-subspaces-claimed",
        claimed.iter().all(|&c| c),
        "every latent subspace owns a dictionary entry",
    ));

    for (_, p) in &pts {
        stack.step(p)?;
    }
    checks.push(Check::equals(
        "replay-new-entries",
        (stack.layer(0).dictionary().len() - dict_len) as f64,
        0.0,
    ));
    Ok(checks)
}

// ---- 13: MLP moment recovery --------------------------------------------

fn mlp_recovery(seed: u64) -> Result<Vec<Check>> {
    let cal = mlp::calibrate(5, seed ^ 0xd1)?;
    let mut checks = vec![
        Check::le("calibration-residual-stage-1", cal.residual1, 1e-6),
        Check::le("calibration-residual-stage-2", cal.residual2, 1e-6),
    ];

    // M recovery on whitened data at d = 5, 2·10⁵ units.
    let mut rng = seeding::rng_for(seed ^ 0xd2, "repro-mlp-cloud");
    let mut cloud = PointCloud::new(
        5,
        (0..120)
            .map(|_| (0..5).map(|_| StandardNormal.sample(&mut rng)).collect())
            .collect(),
    )?;
    cloud.whiten()?;
    let m = mlp::raw_moment(&cloud)?;
    let mut net = RandomMlp::new(5, 200_000, seed ^ 0xd3)?;
    net.calibrate(seed ^ 0xd1)?;
    let rec = net.recover_moment(&cloud)?;
    checks.push(Check::le(
        "moment-relative-error",
        (&rec - &m).norm() / m.norm(),
        0.05,
    ));

    // M² recovery for diag(4, 1) at 5·10⁵ units.
    let a = 2.0 * std::f64::consts::SQRT_2;
    let b = std::f64::consts::SQRT_2;
    let axis_cloud = PointCloud::new(
        2,
        vec![vec![a, 0.0], vec![-a, 0.0], vec![0.0, b], vec![0.0, -b]],
    )?;
    let m2 = {
        let mm = mlp::raw_moment(&axis_cloud)?;
        &mm * &mm
    };
    let mut net2 = RandomMlp::new(2, 500_000, seed ^ 0xd4)?;
    net2.calibrate(seed ^ 0xd1)?;
    let rec2 = net2.recover_moment_squared(&axis_cloud)?;
    checks.push(Check::le(
        "moment-squared-relative-error",
        (&rec2 - &m2).norm() / m2.norm(),
        0.10,
    ));

    // Doubling the unit count shrinks the error like 1/√units. The small
    // net reuses the large net's first half, so each reseed compares a
    // nested pair and the ratio concentrates instead of mixing two
    // independent noise draws.
    let box_cloud = generators::uniform_box_cloud(3, 80, 1.0, seed ^ 0xd5)?;
    let target = mlp::raw_moment(&box_cloud)?;
    let mut small = Vec::new();
    let mut large = Vec::new();
    for i in 0..20 {
        let big = RandomMlp::new(3, 4000, seed.wrapping_add(300 + i))?;
        let half = RandomMlp::from_weights(big.weights().rows(0, 2000).into_owned())?;
        for (mut n, out) in [(half, &mut small), (big, &mut large)] {
            n.calibrate(seed ^ 0xd1)?;
            out.push((n.recover_moment(&box_cloud)? - &target).norm());
        }
    }
    checks.push(Check::in_band(
        "doubling-error-ratio",
        stats::median(&small) / stats::median(&large),
        1.2,
        1.7,
    ));
    Ok(checks)
}

// ---- 14: memorization ----------------------------------------------------

fn memorization(seed: u64) -> Result<Vec<Check>> {
    let mut rng = seeding::rng_for(seed, "repro-memorization");
    let pts: Vec<Vec<f64>> =
        (0..3).map(|_| (0..2).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
    let cloud = PointCloud::new(2, pts.clone())?;
    let sig = Signature::fit(&cloud, &FitConfig::degree(6))?;
    let mut checks = vec![Check::equals("basis-size", sig.feature_dim() as f64, 28.0)];
    let worst_on = pts
        .iter()
        .map(|p| sig.membership_score(p))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    checks.push(Check::le("stored-points-max-score", worst_on, 1e-9));
    let mut worst_off = f64::INFINITY;
    for p in &pts {
        for _ in 0..10 {
            let u: Vec<f64> = (0..2).map(|_| StandardNormal.sample(&mut rng)).collect();
            let norm = u.iter().map(|v| v * v).sum::<f64>().sqrt();
            let r = rng.gen_range(0.5..1.0);
            let probe: Vec<f64> =
                p.iter().zip(&u).map(|(b, ui)| b + r * ui / norm).collect();
            worst_off = worst_off.min(sig.membership_score(&probe)?);
        }
    }
    checks.push(Check::ge("distant-probes-min-score", worst_off, 1e-3));
    Ok(checks)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_experiment_is_rejected() {
        assert!(run("no-such-thing", 0).is_err());
    }

    #[test]
    fn experiment_list_is_complete_and_distinct() {
        assert_eq!(EXPERIMENTS.len(), 14);
        let mut ids: Vec<_> = EXPERIMENTS.to_vec();
        ids.sort_unstable();
        ids.dedup();
        assert_eq!(ids.len(), 14);
    }

    #[test]
    fn reports_serialize_and_format() {
        let report = run("memorization", 0).unwrap();
        assert!(report.pass, "memorization failed: {:?}", report.checks);
        let json = serde_json::to_string(&report).unwrap();
        assert!(json.contains("\"id\":\"memorization\""));
        let lines = report.lines();
        assert!(lines.last().unwrap().contains("PASS"));
    }
}
