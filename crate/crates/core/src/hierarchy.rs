//! Signatures of signatures.
//!
//! A family of related concepts (concentric circles, rotations of one
//! object, segments of one figure) yields a family of null projectors; each
//! projector, flattened to its upper triangle, is a *point* in a flat space,
//! and the family traces out a manifold there. Fitting a signature to those
//! points produces a level-2 concept whose membership test recognises
//! whether a new signature belongs to the family.
//!
//! The module also carries the closed-form maps describing how planar
//! degree-2 moments transform under rotation and translation (exact and
//! Taylor/linearised forms), which explain why transform families trace
//! low-degree manifolds in flat space.

use nalgebra::{DMatrix, DVector};

use crate::algebra::{intersect, IntersectOptions};
use crate::cloud::PointCloud;
use crate::generators::{transform_family, TransformFamily};
use crate::projection::ProjectionRecord;
use crate::signature::{FitConfig, Signature};
use crate::{Error, Result};

/// Default ε for level-2 rank decisions: transformed families are only
/// approximately algebraic after projection/truncation.
pub const LEVEL2_DEFAULT_EPSILON: f64 = 1e-4;

/// Default dimension flats are randomly projected to when they are larger.
pub const LEVEL2_DEFAULT_PROJECTION_DIM: usize = 40;

/// Length of the upper-triangle flattening of an `m × m` symmetric matrix.
pub fn flat_dim(m: usize) -> usize {
    m * (m + 1) / 2
}

/// A signature's null projector flattened to a vector (upper triangle,
/// row-major, diagonal included), ready to act as a level-2 point.
#[derive(Debug, Clone, PartialEq)]
pub struct FlatSignature {
    pub vector: DVector<f64>,
    pub source_id: String,
    /// Set when `vector` has already been pushed through a level-2 projection
    /// (reconstruction is then no longer possible).
    pub projection: Option<ProjectionRecord>,
}

/// Flatten a signature's null projector.
pub fn flatten(sig: &Signature, source_id: impl Into<String>) -> FlatSignature {
    let t = sig.null_projector();
    FlatSignature {
        vector: flatten_symmetric(&t),
        source_id: source_id.into(),
        projection: None,
    }
}

/// Upper-triangle (row-major, diagonal included) flattening.
pub fn flatten_symmetric(t: &DMatrix<f64>) -> DVector<f64> {
    let m = t.nrows();
    let mut v = DVector::zeros(flat_dim(m));
    let mut k = 0;
    for i in 0..m {
        for j in i..m {
            v[k] = t[(i, j)];
            k += 1;
        }
    }
    v
}

/// Rebuild the symmetric matrix behind a flat. Errors when the flat was
/// projected (information is gone) or its length is not triangular.
pub fn reconstruct(flat: &FlatSignature) -> Result<DMatrix<f64>> {
    if let Some(p) = &flat.projection {
        return Err(Error::InvalidInput(format!(
            "flat was projected to {} dimensions; the projector cannot be reconstructed",
            p.out_dim
        )));
    }
    let len = flat.vector.len();
    // Solve m(m+1)/2 = len.
    let m = (((8 * len + 1) as f64).sqrt() as usize).saturating_sub(1) / 2;
    if flat_dim(m) != len {
        return Err(Error::InvalidInput(format!(
            "flat length {len} is not a triangular number"
        )));
    }
    let mut t = DMatrix::zeros(m, m);
    let mut k = 0;
    for i in 0..m {
        for j in i..m {
            t[(i, j)] = flat.vector[k];
            t[(j, i)] = flat.vector[k];
            k += 1;
        }
    }
    Ok(t)
}

/// Configuration of a level-2 fit over flattened signatures.
#[derive(Debug, Clone, PartialEq)]
pub struct Level2Config {
    pub degree: u32,
    pub epsilon: f64,
    /// Flats longer than this are randomly projected down to it.
    pub projection_dim: usize,
    pub projection_seed: u64,
}

impl Default for Level2Config {
    fn default() -> Self {
        Level2Config {
            degree: 2,
            epsilon: LEVEL2_DEFAULT_EPSILON,
            projection_dim: LEVEL2_DEFAULT_PROJECTION_DIM,
            projection_seed: 0,
        }
    }
}

impl Level2Config {
    pub fn with_degree(mut self, degree: u32) -> Self {
        self.degree = degree;
        self
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }

    /// The fit configuration this level-2 setup induces for a given flat length.
    pub fn fit_config(&self, flat_len: usize) -> FitConfig {
        let projection = (flat_len > self.projection_dim).then_some(ProjectionRecord {
            seed: self.projection_seed,
            in_dim: flat_len,
            out_dim: self.projection_dim,
        });
        FitConfig {
            degree: self.degree,
            epsilon: self.epsilon,
            projection,
            include_constant: true,
        }
    }
}

/// Fit a level-2 signature over the flattened projectors of a family.
///
/// All input signatures must share one feature space. Their flats become a
/// point cloud in `R^{m(m+1)/2}` (projected down when longer than the
/// configured dimension) and an ordinary signature is fitted at the level-2
/// degree.
pub fn signature_of_signatures(sigs: &[Signature], config: &Level2Config) -> Result<Signature> {
    if sigs.len() < 2 {
        return Err(Error::InvalidInput(
            "signature-of-signatures needs at least two member signatures".into(),
        ));
    }
    let first = &sigs[0];
    for s in &sigs[1..] {
        if !first.same_space(s) {
            return Err(Error::Incompatible(
                "level-2 members must share one basis and projection".into(),
            ));
        }
    }
    let flats: Vec<Vec<f64>> = sigs
        .iter()
        .map(|s| flatten(s, "").vector.as_slice().to_vec())
        .collect();
    let flat_len = flats[0].len();
    let cloud = PointCloud::new(flat_len, flats)?;
    Signature::fit(&cloud, &config.fit_config(flat_len))
}

/// Score a candidate signature against a level-2 concept: flatten it and run
/// the level-2 membership test (any level-2 projection is applied inside).
pub fn level2_score(level2: &Signature, candidate: &Signature) -> Result<f64> {
    let flat = flatten(candidate, "");
    level2.membership_score(flat.vector.as_slice())
}

// ---- planar degree-2 moment maps --------------------------------------

/// First and second planar moments `(M_x, M_y, M_x², M_y², M_xy)` of a 2-d cloud.
pub fn planar_degree2_moments(cloud: &PointCloud) -> Result<[f64; 5]> {
    if cloud.dim() != 2 {
        return Err(Error::DimensionMismatch {
            context: "planar moments".into(),
            expected: 2,
            got: cloud.dim(),
        });
    }
    if cloud.is_empty() {
        return Err(Error::InvalidInput("moments of an empty cloud".into()));
    }
    let n = cloud.len() as f64;
    let mut m = [0.0; 5];
    for p in cloud.points() {
        let (x, y) = (p[0], p[1]);
        m[0] += x;
        m[1] += y;
        m[2] += x * x;
        m[3] += y * y;
        m[4] += x * y;
    }
    for v in &mut m {
        *v /= n;
    }
    Ok(m)
}

/// Exact moment map under the planar rotation
/// `x′ = x cosθ + y sinθ, y′ = −x sinθ + y cosθ`.
pub fn moment_rotation_map(m: &[f64; 5], theta: f64) -> [f64; 5] {
    let (s, c) = theta.sin_cos();
    let [mx, my, mxx, myy, mxy] = *m;
    [
        mx * c + my * s,
        -mx * s + my * c,
        mxx * c * c + 2.0 * mxy * c * s + myy * s * s,
        mxx * s * s - 2.0 * mxy * c * s + myy * c * c,
        (myy - mxx) * c * s + mxy * (c * c - s * s),
    ]
}

/// Taylor coefficients of the rotation map at θ = 0: value, first and second
/// derivatives `(a₀, a₁, a₂)`, so the order-2 approximation is
/// `a₀ + θ·a₁ + (θ²/2)·a₂`.
pub fn rotation_taylor_coefficients(m: &[f64; 5]) -> ([f64; 5], [f64; 5], [f64; 5]) {
    let [mx, my, mxx, myy, mxy] = *m;
    let a0 = *m;
    let a1 = [my, -mx, 2.0 * mxy, -2.0 * mxy, myy - mxx];
    let a2 = [
        -mx,
        -my,
        2.0 * (myy - mxx),
        2.0 * (mxx - myy),
        -4.0 * mxy,
    ];
    (a0, a1, a2)
}

/// Order-2 Taylor approximation of the rotation map; error is O(θ³).
pub fn moment_rotation_map_taylor(m: &[f64; 5], theta: f64) -> [f64; 5] {
    let (a0, a1, a2) = rotation_taylor_coefficients(m);
    let mut out = [0.0; 5];
    for i in 0..5 {
        out[i] = a0[i] + theta * a1[i] + 0.5 * theta * theta * a2[i];
    }
    out
}

/// Exact moment map under the translation `(x, y) ↦ (x + u, y + v)`.
pub fn moment_translation_map(m: &[f64; 5], u: f64, v: f64) -> [f64; 5] {
    let [mx, my, mxx, myy, mxy] = *m;
    [
        mx + u,
        my + v,
        mxx + 2.0 * mx * u + u * u,
        myy + 2.0 * my * v + v * v,
        mxy + mx * v + my * u + u * v,
    ]
}

/// Linearised translation map: drops the quadratic remainder `(u², v², uv)`.
pub fn moment_translation_map_linear(m: &[f64; 5], u: f64, v: f64) -> [f64; 5] {
    let [mx, my, mxx, myy, mxy] = *m;
    [
        mx + u,
        my + v,
        mxx + 2.0 * mx * u,
        myy + 2.0 * my * v,
        mxy + mx * v + my * u,
    ]
}

// ---- transform-family and motion concepts -----------------------------

/// Level-1 and level-2 settings for a rotation-family concept.
#[derive(Debug, Clone, PartialEq)]
pub struct RotationConfig {
    pub level1: FitConfig,
    pub level2: Level2Config,
}

impl Default for RotationConfig {
    fn default() -> Self {
        RotationConfig {
            level1: FitConfig::degree(4),
            level2: Level2Config::default(),
        }
    }
}

/// Rotation-invariant concept of a planar object: fit a signature for each
/// rotated copy of the base cloud, then the signature of those signatures.
/// Membership of a new rotation's signature is ≈ 0.
pub fn rotation_invariant_signature(
    base: &PointCloud,
    angles: &[f64],
    config: &RotationConfig,
) -> Result<Signature> {
    if angles.len() < 8 {
        return Err(Error::InvalidInput(format!(
            "rotation grids need at least 8 angles, got {}",
            angles.len()
        )));
    }
    let sigs = rotation_family_signatures(base, angles, &config.level1)?;
    signature_of_signatures(&sigs, &config.level2)
}

/// Signatures of each rotated copy of the base cloud.
pub fn rotation_family_signatures(
    base: &PointCloud,
    angles: &[f64],
    level1: &FitConfig,
) -> Result<Vec<Signature>> {
    let params: Vec<Vec<f64>> = angles.iter().map(|&t| vec![t]).collect();
    let rotated = transform_family(base, TransformFamily::Rotation, &params)?;
    rotated.iter().map(|c| Signature::fit(c, level1)).collect()
}

/// Velocity concept of a group of trajectories: the intersection of their
/// signatures. With 1-appended coordinates, parallel trajectory flats share
/// exactly the velocity direction. Symmetric in its inputs; intersecting a
/// further same-velocity trajectory leaves it unchanged.
pub fn velocity_signature(sigs: &[Signature], opts: &IntersectOptions) -> Result<Signature> {
    if sigs.len() < 2 {
        return Err(Error::InvalidInput(
            "velocity concept needs at least two trajectory signatures".into(),
        ));
    }
    let mut acc = intersect(&sigs[0], &sigs[1], opts)?;
    for s in &sigs[2..] {
        acc = intersect(&acc, s, opts)?;
    }
    Ok(acc)
}
