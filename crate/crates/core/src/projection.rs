//! Seeded Gaussian random projections for dimension reduction.
//!
//! A projection is stored by `(seed, in_dim, out_dim)` only; the `out × in`
//! matrix of i.i.d. `N(0, 1/out)` entries is regenerated deterministically,
//! so serialised signatures stay small and reruns are byte-identical.

use nalgebra::{DMatrix, DVector};
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::cloud::PointCloud;
use crate::seeding;
use crate::{Error, Result};

/// Default multiplicative constant in the target-dimension bound.
pub const DEFAULT_C_JL: f64 = 8.0;

/// Reserved seed that forces the identity map (square projections only).
/// Lets pipelines be exercised end-to-end with projection boilerplate in
/// place but no actual distortion.
pub const IDENTITY_SEED: u64 = u64::MAX;

/// Serialisable identity of a projection: everything needed to rebuild it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProjectionRecord {
    pub seed: u64,
    pub in_dim: usize,
    pub out_dim: usize,
}

/// A random linear map `A: R^in → R^out` with Gaussian entries scaled by
/// `1/√out`, so `E‖Ax‖² = ‖x‖²`.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomProjection {
    record: ProjectionRecord,
    matrix: DMatrix<f64>,
}

/// Output dimension sufficient for distortion `ε` with failure probability
/// `δ` on a `k`-dimensional family: `ceil(c · (k + ln(1/δ)) / ε²)`.
pub fn target_dim_with_constant(k: usize, delta: f64, eps: f64, c_jl: f64) -> Result<usize> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidInput(format!(
            "distortion must lie in (0,1), got {eps}"
        )));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidInput(format!(
            "failure probability must lie in (0,1), got {delta}"
        )));
    }
    if k == 0 {
        return Err(Error::InvalidInput("family dimension must be ≥ 1".into()));
    }
    let m = (c_jl * (k as f64 + (1.0 / delta).ln()) / (eps * eps)).ceil();
    if !m.is_finite() || m > usize::MAX as f64 {
        return Err(Error::Overflow {
            what: "projection target dimension".into(),
        });
    }
    Ok(m as usize)
}

/// [`target_dim_with_constant`] with the default constant.
pub fn target_dim(k: usize, delta: f64, eps: f64) -> Result<usize> {
    target_dim_with_constant(k, delta, eps, DEFAULT_C_JL)
}

impl RandomProjection {
    /// Build the projection for a `(seed, dims)` triple.
    pub fn new(in_dim: usize, out_dim: usize, seed: u64) -> Result<Self> {
        Self::from_record(ProjectionRecord { seed, in_dim, out_dim })
    }

    /// The identity map on `R^dim`, via the reserved seed.
    pub fn identity(dim: usize) -> Result<Self> {
        Self::new(dim, dim, IDENTITY_SEED)
    }

    /// Rebuild a projection from its stored identity.
    pub fn from_record(record: ProjectionRecord) -> Result<Self> {
        if record.in_dim == 0 || record.out_dim == 0 {
            return Err(Error::InvalidInput("projection dimensions must be positive".into()));
        }
        let matrix = if record.seed == IDENTITY_SEED && record.in_dim == record.out_dim {
            DMatrix::identity(record.out_dim, record.in_dim)
        } else {
            let mut rng = seeding::rng_for(record.seed, "random-projection");
            let scale = 1.0 / (record.out_dim as f64).sqrt();
            // Row-major fill order is part of the serialisation contract.
            let mut m = DMatrix::zeros(record.out_dim, record.in_dim);
            for r in 0..record.out_dim {
                for c in 0..record.in_dim {
                    let g: f64 = StandardNormal.sample(&mut rng);
                    m[(r, c)] = g * scale;
                }
            }
            m
        };
        Ok(RandomProjection { record, matrix })
    }

    pub fn in_dim(&self) -> usize {
        self.record.in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.record.out_dim
    }

    pub fn record(&self) -> ProjectionRecord {
        self.record
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// Map one point.
    pub fn project_point(&self, point: &[f64]) -> Result<Vec<f64>> {
        if point.len() != self.record.in_dim {
            return Err(Error::DimensionMismatch {
                context: "projected point".into(),
                expected: self.record.in_dim,
                got: point.len(),
            });
        }
        let v = DVector::from_column_slice(point);
        Ok((&self.matrix * v).as_slice().to_vec())
    }

    /// Map a whole cloud, preserving labels.
    pub fn project_cloud(&self, cloud: &PointCloud) -> Result<PointCloud> {
        if cloud.dim() != self.record.in_dim {
            return Err(Error::DimensionMismatch {
                context: "projected cloud".into(),
                expected: self.record.in_dim,
                got: cloud.dim(),
            });
        }
        let points = cloud
            .points()
            .iter()
            .map(|p| self.project_point(p))
            .collect::<Result<Vec<_>>>()?;
        PointCloud::with_labels(
            self.record.out_dim,
            points,
            cloud.labels().map(|ls| ls.to_vec()),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn target_dim_matches_worked_values() {
        assert_eq!(target_dim(1, 0.5, 1.0 - 1e-12).unwrap(), 14);
        assert_eq!(target_dim(2, 0.01, 0.5).unwrap(), 212);
        assert_eq!(target_dim(1, 0.05, 0.5).unwrap(), 128);
    }

    #[test]
    fn halving_distortion_quadruples_dimension() {
        let coarse = target_dim_with_constant(5, 0.01, 0.2, 8.0).unwrap();
        let fine = target_dim_with_constant(5, 0.01, 0.1, 8.0).unwrap();
        // ceil(4y) ≤ 4·ceil(y) ≤ ceil(4y) + 3: ratio is 4 up to ceiling slack.
        assert!(fine <= 4 * coarse && 4 * coarse <= fine + 3, "{fine} vs 4×{coarse}");
    }

    #[test]
    fn target_dim_rejects_out_of_range_parameters() {
        assert!(target_dim(1, 0.5, 0.0).is_err());
        assert!(target_dim(1, 0.5, 1.0).is_err());
        assert!(target_dim(1, 0.0, 0.5).is_err());
        assert!(target_dim(0, 0.5, 0.5).is_err());
    }

    #[test]
    fn regeneration_from_record_is_exact() {
        let p = RandomProjection::new(10, 4, 99).unwrap();
        let q = RandomProjection::from_record(p.record()).unwrap();
        assert_eq!(p.matrix(), q.matrix());
    }

    #[test]
    fn identity_hook_passes_points_through() {
        let p = RandomProjection::identity(3).unwrap();
        let x = vec![1.5, -2.0, 0.25];
        assert_eq!(p.project_point(&x).unwrap(), x);
    }

    #[test]
    fn zero_maps_to_zero() {
        let p = RandomProjection::new(6, 3, 1).unwrap();
        let z = p.project_point(&[0.0; 6]).unwrap();
        assert!(z.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn scaling_preserves_expected_norm() {
        // Average ‖Ax‖²/‖x‖² over many seeds concentrates near 1.
        let x = vec![3.0, -1.0, 2.0, 0.5, -2.5];
        let mut rng = crate::seeding::rng(42);
        let mut ratios = Vec::new();
        for _ in 0..300 {
            let seed: u64 = rng.gen();
            let p = RandomProjection::new(5, 24, seed).unwrap();
            let y = p.project_point(&x).unwrap();
            let ny: f64 = y.iter().map(|v| v * v).sum();
            let nx: f64 = x.iter().map(|v| v * v).sum();
            ratios.push(ny / nx);
        }
        let mean = crate::stats::mean(&ratios);
        assert!((mean - 1.0).abs() < 0.05, "mean norm ratio {mean}");
    }

    #[test]
    fn distances_on_a_curve_are_roughly_preserved() {
        // 1-d curve in R^50 → R^20: pairwise distance ratios within (1 ± 0.5).
        let n = 200;
        let d = 50;
        let pts: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                let t = i as f64 / n as f64 * 2.0 - 1.0;
                (0..d).map(|j| (t * (j as f64 + 1.0) * 0.37).sin()).collect()
            })
            .collect();
        let p = RandomProjection::new(d, 20, 7).unwrap();
        let proj: Vec<Vec<f64>> = pts.iter().map(|x| p.project_point(x).unwrap()).collect();
        let dist = |a: &[f64], b: &[f64]| -> f64 {
            a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
        };
        for i in 0..n {
            for j in (i + 1)..n {
                let d0 = dist(&pts[i], &pts[j]);
                if d0 < 1e-9 {
                    continue;
                }
                let r = dist(&proj[i], &proj[j]) / d0;
                assert!(r > 0.5 && r < 1.5, "pair ({i},{j}) distorted by {r}");
            }
        }
    }

    #[test]
    fn cloud_projection_preserves_labels() {
        let cloud = PointCloud::with_labels(
            4,
            vec![vec![1.0, 0.0, 0.0, 0.0], vec![0.0, 1.0, 0.0, 0.0]],
            Some(vec!["p".into(), "q".into()]),
        )
        .unwrap();
        let p = RandomProjection::new(4, 2, 3).unwrap();
        let out = p.project_cloud(&cloud).unwrap();
        assert_eq!(out.dim(), 2);
        assert_eq!(out.labels().unwrap(), cloud.labels().unwrap());
    }
}
