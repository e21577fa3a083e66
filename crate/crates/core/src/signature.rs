//! Moment matrices and null-space concept signatures.
//!
//! The second moment of an embedded cloud, `M(X) = (1/N) Σ φ(x_i)φ(x_i)ᵀ`,
//! has a null space spanned by the coefficient vectors of every polynomial
//! (within the basis) that vanishes on the cloud. The orthogonal projector
//! `T` onto that null space is the cloud's signature: `φ(x)ᵀ T φ(x) = 0`
//! exactly when `x` satisfies all of those polynomial relations, and grows
//! with the distance from the concept otherwise.
//!
//! Signatures are stored spectrally — eigenvalues plus an orthonormal basis
//! `R` of the *range* of `M` — rather than as dense `m × m` projectors, so
//! membership scoring is `O(m · rank)` and high-dimensional feature spaces
//! stay affordable. `T = I − RRᵀ` is materialised only on demand.
//!
//! Fitting picks between two equivalent eigendecompositions: the `m × m`
//! moment matrix when the feature dimension is the smaller side, or the
//! `N × N` Gram matrix `K = ΦᵀΦ/N` when points are scarcer than features
//! (eigenvectors map back through `u = Φw/√(Nλ)`), so cost is always
//! `O(min(m, N)³)`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::basis::MonomialBasis;
use crate::cloud::PointCloud;
use crate::projection::{ProjectionRecord, RandomProjection};
use crate::{Error, Result};

/// Default threshold for the ε-relaxed projector.
pub const DEFAULT_EPSILON: f64 = 1e-6;

/// Absolute floor of the zero-eigenvalue tolerance.
pub const ZERO_TOL_ABS: f64 = 1e-10;

/// Relative factor of the zero-eigenvalue tolerance (times the top eigenvalue).
pub const ZERO_TOL_REL: f64 = 1e-8;

/// Scale-free tolerance below which an eigenvalue counts as zero.
pub fn zero_tolerance(top_eigenvalue: f64) -> f64 {
    ZERO_TOL_ABS.max(ZERO_TOL_REL * top_eigenvalue.max(0.0))
}

/// Second moment matrix of an embedded cloud, `m × m`, tied to its basis.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentMatrix {
    basis: MonomialBasis,
    entries: DMatrix<f64>,
}

impl MomentMatrix {
    /// Wrap precomputed entries; checks shape, symmetry, and near-PSD-ness.
    pub fn new(basis: MonomialBasis, entries: DMatrix<f64>) -> Result<Self> {
        let m = basis.len();
        if entries.nrows() != m || entries.ncols() != m {
            return Err(Error::DimensionMismatch {
                context: "moment matrix".into(),
                expected: m,
                got: entries.nrows().max(entries.ncols()),
            });
        }
        let scale = entries.amax().max(1e-300);
        let asym = (&entries - entries.transpose()).amax();
        if asym > 1e-12 * scale {
            return Err(Error::Numeric(format!(
                "moment matrix asymmetry {asym:.3e} exceeds 1e-12 relative"
            )));
        }
        Ok(MomentMatrix { basis, entries })
    }

    pub fn basis(&self) -> &MonomialBasis {
        &self.basis
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn trace(&self) -> f64 {
        self.entries.trace()
    }
}

/// `M(X) = (1/N) Σ φ(x_i)φ(x_i)ᵀ` over the given basis.
pub fn moment_matrix(cloud: &PointCloud, basis: &MonomialBasis) -> Result<MomentMatrix> {
    if cloud.is_empty() {
        return Err(Error::InvalidInput("moment matrix of an empty cloud".into()));
    }
    if basis.dim() != cloud.dim() {
        return Err(Error::DimensionMismatch {
            context: "moment matrix basis".into(),
            expected: basis.dim(),
            got: cloud.dim(),
        });
    }
    let phi = basis.embed_cloud(cloud.points())?;
    let mut m = &phi * phi.transpose();
    m /= cloud.len() as f64;
    // Exact symmetry despite floating-point summation order.
    let sym = (&m + m.transpose()) * 0.5;
    MomentMatrix::new(basis.clone(), sym)
}

/// Rank-one point signature `S(x) = φ(x)φ(x)ᵀ`.
pub fn point_signature(point: &[f64], basis: &MonomialBasis) -> Result<DMatrix<f64>> {
    let phi = basis.embed(point)?;
    Ok(&phi * phi.transpose())
}

/// Fitting configuration: embedding degree, ε threshold, optional projection,
/// and whether the constant monomial participates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitConfig {
    pub degree: u32,
    pub epsilon: f64,
    pub projection: Option<ProjectionRecord>,
    pub include_constant: bool,
}

impl FitConfig {
    pub fn degree(degree: u32) -> Self {
        FitConfig {
            degree,
            epsilon: DEFAULT_EPSILON,
            projection: None,
            include_constant: true,
        }
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }

    pub fn with_projection(mut self, record: ProjectionRecord) -> Self {
        self.projection = Some(record);
        self
    }

    pub fn homogeneous(mut self) -> Self {
        self.include_constant = false;
        self
    }
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig::degree(2)
    }
}

/// A concept signature: spectrum of the moment matrix plus orthonormal bases
/// of its range (`R`) and ε-retained range (`R_ε`, a prefix of `R`'s span).
///
/// `T = I − RRᵀ` projects onto the null space; `T_ε = I − R_ε R_εᵀ` relaxes
/// the rank decision to eigenvalues above `max(ε, zero_tolerance)`, so
/// `range(T) ⊆ range(T_ε)` always holds.
#[derive(Debug, Clone)]
pub struct Signature {
    basis: MonomialBasis,
    epsilon: f64,
    /// Eigenvalues of `M`, descending, length `m` (zeros padded past the rank).
    eigenvalues: Vec<f64>,
    /// Orthonormal basis of range(M), `m × rank`, column `j` ↔ `eigenvalues[j]`
    /// when `spectrum_paired`.
    range: DMatrix<f64>,
    /// Columns of `range` kept by the ε threshold (always the leading ones
    /// when the spectrum is paired).
    eps_range: DMatrix<f64>,
    /// Orthonormal basis of the null space when cheaply available.
    null_basis: Option<DMatrix<f64>>,
    /// Whether `range` columns are aligned with `eigenvalues` (lost after
    /// deserialisation, which stores only the projector).
    spectrum_paired: bool,
    projection: Option<RandomProjection>,
}

impl Signature {
    // ---- constructors -------------------------------------------------

    /// Fit a signature to a cloud: optional projection → embedding → moment
    /// spectrum → projectors.
    pub fn fit(cloud: &PointCloud, config: &FitConfig) -> Result<Self> {
        if cloud.is_empty() {
            return Err(Error::InvalidInput("cannot fit a signature to an empty cloud".into()));
        }
        if config.degree == 0 {
            return Err(Error::InvalidInput("fit degree must be ≥ 1".into()));
        }
        let projection = config
            .projection
            .map(RandomProjection::from_record)
            .transpose()?;
        let working;
        let cloud_ref = match &projection {
            Some(p) => {
                working = p.project_cloud(cloud)?;
                &working
            }
            None => cloud,
        };
        let basis = if config.include_constant {
            MonomialBasis::new(cloud_ref.dim(), config.degree)?
        } else {
            MonomialBasis::without_constant(cloud_ref.dim(), config.degree)?
        };
        let phi = basis.embed_cloud(cloud_ref.points())?;
        let spec = if basis.len() <= cloud_ref.len() {
            dense_spectrum(&phi)?
        } else {
            gram_spectrum(&phi)?
        };
        Ok(Self::from_spectrum(basis, config.epsilon, spec, projection))
    }

    /// Signature from a moment matrix (dense eigendecomposition).
    pub fn from_moment(moment: &MomentMatrix, epsilon: f64) -> Result<Self> {
        let spec = spectrum_of_moment(moment.entries())?;
        Ok(Self::from_spectrum(moment.basis().clone(), epsilon, spec, None))
    }

    /// Signature of the concept *defined by* coefficient vectors: the given
    /// vectors (orthonormalised) span the null space; the moment is the
    /// complement projector. Used to build exact signatures of known
    /// polynomial families without sampling points.
    pub fn from_null_vectors(
        basis: &MonomialBasis,
        null_vectors: &[DVector<f64>],
        epsilon: f64,
    ) -> Result<Self> {
        let m = basis.len();
        for (i, v) in null_vectors.iter().enumerate() {
            if v.len() != m {
                return Err(Error::DimensionMismatch {
                    context: format!("null vector {i}"),
                    expected: m,
                    got: v.len(),
                });
            }
        }
        if null_vectors.is_empty() {
            // Null space is trivial: the signature of "everything".
            return Self::from_complement_projector(
                basis.clone(),
                DMatrix::identity(m, m),
                epsilon,
            );
        }
        let mut stacked = DMatrix::zeros(m, null_vectors.len());
        for (j, v) in null_vectors.iter().enumerate() {
            stacked.set_column(j, v);
        }
        let n_basis = orthonormal_columns(&stacked, 1e-12)?;
        let f = DMatrix::identity(m, m) - &n_basis * n_basis.transpose();
        Self::from_complement_projector(basis.clone(), f, epsilon)
    }

    /// Signature whose null projector is `I − F` for a given (near-)projector
    /// `F`; eigenvalues of `F` are rounded to {0, 1} at 0.5. The moment is
    /// the projector itself, so all retained eigenvalues are 1.
    pub fn from_complement_projector(
        basis: MonomialBasis,
        f: DMatrix<f64>,
        epsilon: f64,
    ) -> Result<Self> {
        let m = basis.len();
        if f.nrows() != m || f.ncols() != m {
            return Err(Error::DimensionMismatch {
                context: "complement projector".into(),
                expected: m,
                got: f.nrows().max(f.ncols()),
            });
        }
        let sym = (&f + f.transpose()) * 0.5;
        let eig = sym.symmetric_eigen();
        let mut idx: Vec<usize> = (0..m).collect();
        idx.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
        let kept: Vec<usize> = idx.iter().copied().filter(|&i| eig.eigenvalues[i] > 0.5).collect();
        let mut range = DMatrix::zeros(m, kept.len());
        for (j, &i) in kept.iter().enumerate() {
            range.set_column(j, &eig.eigenvectors.column(i));
        }
        let mut null_basis = DMatrix::zeros(m, m - kept.len());
        for (j, &i) in idx.iter().filter(|&&i| eig.eigenvalues[i] <= 0.5).enumerate() {
            null_basis.set_column(j, &eig.eigenvectors.column(i));
        }
        let mut eigenvalues = vec![0.0; m];
        eigenvalues[..kept.len()].fill(1.0);
        Ok(Signature {
            basis,
            epsilon,
            eigenvalues,
            eps_range: range.clone(),
            range,
            null_basis: Some(null_basis),
            spectrum_paired: true,
            projection: None,
        })
    }

    fn from_spectrum(
        basis: MonomialBasis,
        epsilon: f64,
        spec: Spectrum,
        projection: Option<RandomProjection>,
    ) -> Self {
        let cut = epsilon.max(zero_tolerance(spec.eigenvalues.first().copied().unwrap_or(0.0)));
        let keep_eps = spec
            .eigenvalues
            .iter()
            .take(spec.range.ncols())
            .take_while(|&&l| l > cut)
            .count();
        let eps_range = spec.range.columns(0, keep_eps).into_owned();
        Signature {
            basis,
            epsilon,
            eigenvalues: spec.eigenvalues,
            range: spec.range,
            eps_range,
            null_basis: spec.null_basis,
            spectrum_paired: true,
            projection,
        }
    }

    // ---- accessors ----------------------------------------------------

    pub fn basis(&self) -> &MonomialBasis {
        &self.basis
    }

    /// Feature dimension `m`.
    pub fn feature_dim(&self) -> usize {
        self.basis.len()
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Eigenvalues of the moment matrix, descending, length `m`.
    pub fn singular_values(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Dimension of the null space (rank of `T`).
    pub fn null_rank(&self) -> usize {
        self.feature_dim() - self.range.ncols()
    }

    /// Dimension spanned by eigenvalues ≤ ε (rank of `T_ε`); ≥ `null_rank`.
    pub fn eps_rank(&self) -> usize {
        self.feature_dim() - self.eps_range.ncols()
    }

    /// Orthonormal basis of range(M) = range of the complement projector.
    pub fn range(&self) -> &DMatrix<f64> {
        &self.range
    }

    /// Orthonormal basis of the ε-retained range (prefix of the full range).
    pub fn eps_range(&self) -> &DMatrix<f64> {
        &self.eps_range
    }

    pub fn projection(&self) -> Option<&RandomProjection> {
        self.projection.as_ref()
    }

    /// Carry another signature's projection record onto this one (used when
    /// deriving a signature algebraically from inputs that share a space).
    pub(crate) fn inherit_projection(mut self, source: &Signature) -> Self {
        self.projection = source.projection.clone();
        self
    }

    /// Whether two signatures live in the same feature space (same basis and
    /// same projection identity), so their projectors can be combined.
    pub fn same_space(&self, other: &Signature) -> bool {
        self.basis == other.basis
            && self.projection.as_ref().map(|p| p.record())
                == other.projection.as_ref().map(|p| p.record())
    }

    // ---- projectors and scores ----------------------------------------

    /// Materialise the null projector `T = I − RRᵀ` (`m × m`).
    pub fn null_projector(&self) -> DMatrix<f64> {
        let m = self.feature_dim();
        DMatrix::identity(m, m) - &self.range * self.range.transpose()
    }

    /// Materialise the relaxed projector `T_ε = I − R_ε R_εᵀ` (`m × m`).
    pub fn eps_projector(&self) -> DMatrix<f64> {
        let m = self.feature_dim();
        DMatrix::identity(m, m) - &self.eps_range * self.eps_range.transpose()
    }

    /// Orthonormal basis of the null space, computing it if the fit path did
    /// not retain one (O(m³) in that case).
    pub fn null_space_basis(&self) -> DMatrix<f64> {
        if let Some(nb) = &self.null_basis {
            return nb.clone();
        }
        let t = self.null_projector();
        let eig = t.symmetric_eigen();
        let m = self.feature_dim();
        let kept: Vec<usize> = (0..m).filter(|&i| eig.eigenvalues[i] > 0.5).collect();
        let mut nb = DMatrix::zeros(m, kept.len());
        for (j, &i) in kept.iter().enumerate() {
            nb.set_column(j, &eig.eigenvectors.column(i));
        }
        nb
    }

    /// Reconstruct the moment matrix `R diag(λ) Rᵀ`. Only available while
    /// the eigenvalue/eigenvector pairing is known (not after loading from
    /// JSON, which stores the projector alone).
    pub fn moment(&self) -> Result<DMatrix<f64>> {
        if !self.spectrum_paired {
            return Err(Error::Numeric(
                "moment matrix is not reconstructible from a deserialised signature".into(),
            ));
        }
        let r = self.range.ncols();
        let lam = DVector::from_iterator(r, self.eigenvalues[..r].iter().copied());
        Ok(&self.range * DMatrix::from_diagonal(&lam) * self.range.transpose())
    }

    /// Embed a raw point into this signature's feature space, applying the
    /// internal projection when one is recorded.
    pub fn embed_point(&self, point: &[f64]) -> Result<DVector<f64>> {
        match &self.projection {
            Some(p) => {
                let projected = p.project_point(point)?;
                self.basis.embed(&projected)
            }
            None => self.basis.embed(point),
        }
    }

    /// Membership score `φ(x)ᵀ T φ(x) = ‖φ‖² − ‖Rᵀφ‖²`: zero on the concept,
    /// growing with distance from it. Clamped at 0 against rounding.
    pub fn membership_score(&self, point: &[f64]) -> Result<f64> {
        let phi = self.embed_point(point)?;
        Ok(residual_score(&phi, &self.range))
    }

    /// Membership score against the relaxed projector `T_ε`.
    pub fn membership_score_eps(&self, point: &[f64]) -> Result<f64> {
        let phi = self.embed_point(point)?;
        Ok(residual_score(&phi, &self.eps_range))
    }

    /// Score of an already-embedded feature vector against `T`.
    pub fn feature_score(&self, phi: &DVector<f64>) -> Result<f64> {
        if phi.len() != self.feature_dim() {
            return Err(Error::DimensionMismatch {
                context: "feature vector".into(),
                expected: self.feature_dim(),
                got: phi.len(),
            });
        }
        Ok(residual_score(phi, &self.range))
    }

    // ---- serialisation ------------------------------------------------

    /// Write as JSON to a file.
    pub fn save_json_path<P: AsRef<std::path::Path>>(&self, path: P) -> Result<()> {
        let file = std::fs::File::create(path)?;
        serde_json::to_writer_pretty(file, self)?;
        Ok(())
    }

    /// Read from a JSON file.
    pub fn load_json_path<P: AsRef<std::path::Path>>(path: P) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Ok(serde_json::from_reader(std::io::BufReader::new(file))?)
    }
}

/// `‖φ‖² − ‖Bᵀφ‖²` clamped at zero: the quadratic form of `I − BBᵀ`.
fn residual_score(phi: &DVector<f64>, basis: &DMatrix<f64>) -> f64 {
    let total = phi.norm_squared();
    let explained = (basis.transpose() * phi).norm_squared();
    (total - explained).max(0.0)
}

struct Spectrum {
    eigenvalues: Vec<f64>,
    range: DMatrix<f64>,
    null_basis: Option<DMatrix<f64>>,
}

/// Eigendecompose `M = ΦΦᵀ/N` directly (preferred when `m ≤ N`).
fn dense_spectrum(phi: &DMatrix<f64>) -> Result<Spectrum> {
    let n = phi.ncols();
    let mut m = phi * phi.transpose();
    m /= n as f64;
    let sym = (&m + m.transpose()) * 0.5;
    spectrum_of_moment(&sym)
}

fn spectrum_of_moment(m: &DMatrix<f64>) -> Result<Spectrum> {
    let dim = m.nrows();
    let eig = m.clone().symmetric_eigen();
    let mut idx: Vec<usize> = (0..dim).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let eigenvalues: Vec<f64> = idx.iter().map(|&i| eig.eigenvalues[i].max(0.0)).collect();
    let tol = zero_tolerance(eigenvalues[0]);
    let rank = eigenvalues.iter().take_while(|&&l| l > tol).count();
    let mut range = DMatrix::zeros(dim, rank);
    for (j, &i) in idx[..rank].iter().enumerate() {
        range.set_column(j, &eig.eigenvectors.column(i));
    }
    let mut null_basis = DMatrix::zeros(dim, dim - rank);
    for (j, &i) in idx[rank..].iter().enumerate() {
        null_basis.set_column(j, &eig.eigenvectors.column(i));
    }
    Ok(Spectrum {
        eigenvalues,
        range,
        null_basis: Some(null_basis),
    })
}

/// Eigendecompose the Gram matrix `K = ΦᵀΦ/N` and map eigenvectors back
/// (preferred when `m > N`); identical spectrum and range, `O(N³)`.
fn gram_spectrum(phi: &DMatrix<f64>) -> Result<Spectrum> {
    let m = phi.nrows();
    let n = phi.ncols();
    let mut k = phi.transpose() * phi;
    k /= n as f64;
    let sym = (&k + k.transpose()) * 0.5;
    let eig = sym.symmetric_eigen();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let mut eigenvalues: Vec<f64> = idx.iter().map(|&i| eig.eigenvalues[i].max(0.0)).collect();
    let tol = zero_tolerance(eigenvalues[0]);
    let rank = eigenvalues.iter().take_while(|&&l| l > tol).count();
    let mut range = DMatrix::zeros(m, rank);
    for (j, &i) in idx[..rank].iter().enumerate() {
        let lam = eig.eigenvalues[i];
        let u = phi * eig.eigenvectors.column(i) / (n as f64 * lam).sqrt();
        range.set_column(j, &u);
    }
    eigenvalues.resize(m, 0.0);
    Ok(Spectrum {
        eigenvalues,
        range,
        null_basis: None,
    })
}

/// Orthonormal basis of the column space via SVD, dropping singular values
/// below `tol` (relative to the largest).
pub(crate) fn orthonormal_columns(mat: &DMatrix<f64>, tol: f64) -> Result<DMatrix<f64>> {
    let svd = mat.clone().svd(true, false);
    let u = svd
        .u
        .ok_or_else(|| Error::Numeric("SVD did not produce U".into()))?;
    let top = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let rank = svd
        .singular_values
        .iter()
        .take_while(|&&s| s > tol * top.max(1e-300))
        .count();
    Ok(u.columns(0, rank).into_owned())
}

// ---- JSON schema ------------------------------------------------------

/// On-disk form: full row-major projector(s) plus spectrum metadata.
#[derive(Debug, Serialize, Deserialize)]
struct SignatureJson {
    basis: MonomialBasis,
    epsilon: f64,
    singular_values: Vec<f64>,
    null_rank: usize,
    eps_rank: usize,
    /// Null projector `T`, row-major, length `m²`.
    #[serde(rename = "T")]
    t: Vec<f64>,
    /// Relaxed projector, present only when it differs from `T`.
    #[serde(rename = "T_eps", default, skip_serializing_if = "Option::is_none")]
    t_eps: Option<Vec<f64>>,
    projection: Option<ProjectionRecord>,
}

impl Serialize for Signature {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let t = self.null_projector();
        let t_eps = if self.eps_rank() != self.null_rank() {
            Some(self.eps_projector().transpose().as_slice().to_vec())
        } else {
            None
        };
        SignatureJson {
            basis: self.basis.clone(),
            epsilon: self.epsilon,
            singular_values: self.eigenvalues.clone(),
            null_rank: self.null_rank(),
            eps_rank: self.eps_rank(),
            // nalgebra stores column-major; transpose first to emit row-major.
            t: t.transpose().as_slice().to_vec(),
            t_eps,
            projection: self.projection.as_ref().map(|p| p.record()),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Signature {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as DeError;
        let raw = SignatureJson::deserialize(deserializer)?;
        Signature::from_json_parts(raw).map_err(D::Error::custom)
    }
}

impl Signature {
    fn from_json_parts(raw: SignatureJson) -> Result<Self> {
        let m = raw.basis.len();
        if raw.t.len() != m * m {
            return Err(Error::DimensionMismatch {
                context: "serialised projector T".into(),
                expected: m * m,
                got: raw.t.len(),
            });
        }
        if raw.singular_values.len() != m {
            return Err(Error::DimensionMismatch {
                context: "serialised singular values".into(),
                expected: m,
                got: raw.singular_values.len(),
            });
        }
        let t = DMatrix::from_row_slice(m, m, &raw.t);
        let (range, null_basis) = split_projector(&t)?;
        if m - range.ncols() != raw.null_rank {
            return Err(Error::Numeric(format!(
                "serialised null_rank {} disagrees with projector rank {}",
                raw.null_rank,
                m - range.ncols()
            )));
        }
        let eps_range = match &raw.t_eps {
            Some(te) => {
                if te.len() != m * m {
                    return Err(Error::DimensionMismatch {
                        context: "serialised projector T_eps".into(),
                        expected: m * m,
                        got: te.len(),
                    });
                }
                let t_eps = DMatrix::from_row_slice(m, m, te);
                split_projector(&t_eps)?.0
            }
            None => range.clone(),
        };
        if m - eps_range.ncols() != raw.eps_rank {
            return Err(Error::Numeric(format!(
                "serialised eps_rank {} disagrees with projector rank {}",
                raw.eps_rank,
                m - eps_range.ncols()
            )));
        }
        let projection = raw
            .projection
            .map(RandomProjection::from_record)
            .transpose()?;
        Ok(Signature {
            basis: raw.basis,
            epsilon: raw.epsilon,
            eigenvalues: raw.singular_values,
            range,
            eps_range,
            null_basis: Some(null_basis),
            spectrum_paired: false,
            projection,
        })
    }
}

/// Split a (near-)projector `T` into orthonormal bases of its complement
/// (eigenvalue < 0.5 side) and of itself (eigenvalue > 0.5 side).
fn split_projector(t: &DMatrix<f64>) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let m = t.nrows();
    let sym = (t + t.transpose()) * 0.5;
    let eig = sym.symmetric_eigen();
    let on: Vec<usize> = (0..m).filter(|&i| eig.eigenvalues[i] > 0.5).collect();
    let off: Vec<usize> = (0..m).filter(|&i| eig.eigenvalues[i] <= 0.5).collect();
    let mut range = DMatrix::zeros(m, off.len());
    for (j, &i) in off.iter().enumerate() {
        range.set_column(j, &eig.eigenvectors.column(i));
    }
    let mut null_basis = DMatrix::zeros(m, on.len());
    for (j, &i) in on.iter().enumerate() {
        null_basis.set_column(j, &eig.eigenvectors.column(i));
    }
    Ok((range, null_basis))
}
