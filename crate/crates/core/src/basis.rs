//! Monomial feature bases in graded-lexicographic order.
//!
//! A basis over `R^d` up to total degree `ℓ` lists every monomial
//! `x^α = x_1^{α_1} ⋯ x_d^{α_d}` with `|α| ≤ ℓ`, ordered by total degree and,
//! within a degree, by descending lexicographic exponent (so `x_1²` precedes
//! `x_1 x_2` precedes `x_2²`). The constant monomial comes first; bases can
//! also be built without it for strictly-positive-degree features.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Default cap on the number of monomials a basis may contain.
pub const DEFAULT_MAX_BASIS_SIZE: usize = 50_000;

/// Exponent vector of a single monomial; `exponents[i]` is the power of `x_{i+1}`.
pub type MultiIndex = Vec<u32>;

/// Serialised form of a basis: the monomial list is regenerated on load.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct BasisSpec {
    dim: usize,
    max_degree: u32,
    order: String,
    include_constant: bool,
}

/// A monomial basis over `R^dim` up to `max_degree`, in graded-lex order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BasisSpec", into = "BasisSpec")]
pub struct MonomialBasis {
    dim: usize,
    max_degree: u32,
    include_constant: bool,
    monomials: Vec<MultiIndex>,
}

impl From<MonomialBasis> for BasisSpec {
    fn from(b: MonomialBasis) -> Self {
        BasisSpec {
            dim: b.dim,
            max_degree: b.max_degree,
            order: "grlex".to_string(),
            include_constant: b.include_constant,
        }
    }
}

impl TryFrom<BasisSpec> for MonomialBasis {
    type Error = Error;

    fn try_from(spec: BasisSpec) -> Result<Self> {
        if spec.order != "grlex" {
            return Err(Error::InvalidInput(format!(
                "unsupported monomial order {:?} (only \"grlex\" is supported)",
                spec.order
            )));
        }
        if spec.include_constant {
            MonomialBasis::new(spec.dim, spec.max_degree)
        } else {
            MonomialBasis::without_constant(spec.dim, spec.max_degree)
        }
    }
}

impl MonomialBasis {
    /// Full basis of all monomials of total degree `0 ..= max_degree`.
    pub fn new(dim: usize, max_degree: u32) -> Result<Self> {
        Self::with_cap(dim, max_degree, true, DEFAULT_MAX_BASIS_SIZE)
    }

    /// Basis of monomials of total degree `1 ..= max_degree` (constant dropped).
    pub fn without_constant(dim: usize, max_degree: u32) -> Result<Self> {
        Self::with_cap(dim, max_degree, false, DEFAULT_MAX_BASIS_SIZE)
    }

    /// Build with an explicit size cap; errors instead of allocating past it.
    pub fn with_cap(
        dim: usize,
        max_degree: u32,
        include_constant: bool,
        cap: usize,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidInput(
                "monomial basis needs at least one variable".into(),
            ));
        }
        let full = count_monomials(dim, max_degree)?;
        let size = if include_constant { full } else { full - 1 };
        if size > cap as u128 {
            return Err(Error::BasisTooLarge {
                dim,
                degree: max_degree,
                size,
                cap,
            });
        }
        let mut monomials = Vec::with_capacity(size as usize);
        let lo = if include_constant { 0 } else { 1 };
        for degree in lo..=max_degree {
            push_degree(dim, degree, &mut monomials);
        }
        debug_assert_eq!(monomials.len() as u128, size);
        Ok(MonomialBasis {
            dim,
            max_degree,
            include_constant,
            monomials,
        })
    }

    /// Ambient point dimension `d`.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Maximum total degree `ℓ`.
    pub fn max_degree(&self) -> u32 {
        self.max_degree
    }

    /// Whether the constant monomial is included.
    pub fn include_constant(&self) -> bool {
        self.include_constant
    }

    /// Number of monomials (the feature dimension `m`).
    pub fn len(&self) -> usize {
        self.monomials.len()
    }

    /// True when the basis is empty (never the case for valid constructions).
    pub fn is_empty(&self) -> bool {
        self.monomials.is_empty()
    }

    /// The ordered exponent vectors.
    pub fn monomials(&self) -> &[MultiIndex] {
        &self.monomials
    }

    /// Position of an exponent vector in this basis, if present.
    pub fn position(&self, exponents: &[u32]) -> Option<usize> {
        self.monomials.iter().position(|m| m == exponents)
    }

    /// Evaluate the feature map `φ(x)`: one entry per monomial, basis order.
    pub fn embed(&self, point: &[f64]) -> Result<DVector<f64>> {
        if point.len() != self.dim {
            return Err(Error::DimensionMismatch {
                context: "embed point".into(),
                expected: self.dim,
                got: point.len(),
            });
        }
        // Per-coordinate power table: powers[i][e] = x_i^e for e = 0..=ℓ.
        let deg = self.max_degree as usize;
        let mut powers = vec![1.0f64; self.dim * (deg + 1)];
        for (i, &x) in point.iter().enumerate() {
            let row = &mut powers[i * (deg + 1)..(i + 1) * (deg + 1)];
            for e in 1..=deg {
                row[e] = row[e - 1] * x;
            }
        }
        let mut out = DVector::zeros(self.monomials.len());
        for (j, mono) in self.monomials.iter().enumerate() {
            let mut v = 1.0;
            for (i, &e) in mono.iter().enumerate() {
                if e > 0 {
                    v *= powers[i * (deg + 1) + e as usize];
                }
            }
            out[j] = v;
        }
        Ok(out)
    }

    /// Embed a whole cloud: returns the `m × N` matrix with `φ(x_i)` as columns.
    pub fn embed_cloud(&self, points: &[Vec<f64>]) -> Result<DMatrix<f64>> {
        let m = self.len();
        let n = points.len();
        let mut phi = DMatrix::zeros(m, n);
        for (i, p) in points.iter().enumerate() {
            let col = self.embed(p)?;
            phi.set_column(i, &col);
        }
        Ok(phi)
    }
}

/// Total number of monomials of degree `0 ..= max_degree` in `dim` variables:
/// `binomial(dim + max_degree, max_degree)`.
pub fn count_monomials(dim: usize, max_degree: u32) -> Result<u128> {
    binomial(
        (dim as u128)
            .checked_add(max_degree as u128)
            .ok_or_else(|| Error::Overflow {
                what: "dim + max_degree".into(),
            })?,
        max_degree as u128,
    )
}

/// Degree bound `r^k` sufficient to implicitize the image of a degree-`r`
/// polynomial map of `k` latent parameters: eliminating each parameter can
/// multiply degrees by at most `r`.
pub fn required_degree(latent_dim: u32, generator_degree: u32) -> Result<u32> {
    generator_degree
        .checked_pow(latent_dim)
        .ok_or_else(|| Error::Overflow {
            what: format!("required degree {generator_degree}^{latent_dim}"),
        })
}

/// Number of samples that always suffices to pin down the signature of the
/// image of a degree-`r` map from `k` latent dimensions into `R^s`: the size
/// of the monomial basis at the required degree, `binomial(r^k + s, s)`.
pub fn sample_size_bound(latent_dim: u32, generator_degree: u32, ambient_dim: usize) -> Result<u64> {
    let degree = required_degree(latent_dim, generator_degree)? as u128;
    let n = degree
        .checked_add(ambient_dim as u128)
        .ok_or_else(|| Error::Overflow {
            what: "degree + ambient dim".into(),
        })?;
    let b = binomial(n, ambient_dim as u128)?;
    u64::try_from(b).map_err(|_| Error::Overflow {
        what: format!("sample size bound binomial({n}, {ambient_dim})"),
    })
}

/// Binomial coefficient with overflow checking.
pub fn binomial(n: u128, k: u128) -> Result<u128> {
    if k > n {
        return Ok(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc
            .checked_mul(n - i)
            .ok_or_else(|| Error::Overflow {
                what: format!("binomial({n}, {k})"),
            })?
            / (i + 1);
    }
    Ok(acc)
}

/// Append all degree-`degree` exponent vectors in descending lex order.
fn push_degree(dim: usize, degree: u32, out: &mut Vec<MultiIndex>) {
    let mut current = vec![0u32; dim];
    fill_rest(&mut current, 0, degree, out);
}

fn fill_rest(current: &mut MultiIndex, pos: usize, remaining: u32, out: &mut Vec<MultiIndex>) {
    if pos + 1 == current.len() {
        current[pos] = remaining;
        out.push(current.clone());
        current[pos] = 0;
        return;
    }
    for e in (0..=remaining).rev() {
        current[pos] = e;
        fill_rest(current, pos + 1, remaining - e, out);
        current[pos] = 0;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basis_2_2_lists_six_monomials_in_graded_lex_order() {
        let b = MonomialBasis::new(2, 2).unwrap();
        let expected: Vec<MultiIndex> = vec![
            vec![0, 0],
            vec![1, 0],
            vec![0, 1],
            vec![2, 0],
            vec![1, 1],
            vec![0, 2],
        ];
        assert_eq!(b.monomials(), expected.as_slice());
    }

    #[test]
    fn basis_3_2_has_ten_monomials() {
        let b = MonomialBasis::new(3, 2).unwrap();
        assert_eq!(b.len(), 10);
        assert_eq!(b.monomials()[0], vec![0, 0, 0]);
        assert_eq!(b.monomials()[1], vec![1, 0, 0]);
        assert_eq!(b.monomials()[4], vec![2, 0, 0]);
        assert_eq!(b.monomials()[9], vec![0, 0, 2]);
    }

    #[test]
    fn without_constant_drops_only_the_constant() {
        let full = MonomialBasis::new(2, 2).unwrap();
        let pos = MonomialBasis::without_constant(2, 2).unwrap();
        assert_eq!(pos.len(), full.len() - 1);
        assert_eq!(pos.monomials(), &full.monomials()[1..]);
    }

    #[test]
    fn embed_evaluates_each_monomial() {
        let b = MonomialBasis::new(2, 2).unwrap();
        let phi = b.embed(&[2.0, 3.0]).unwrap();
        let expected = [1.0, 2.0, 3.0, 4.0, 6.0, 9.0];
        for (i, &e) in expected.iter().enumerate() {
            assert_eq!(phi[i], e, "monomial {i}");
        }
    }

    #[test]
    fn embed_rejects_wrong_dimension() {
        let b = MonomialBasis::new(2, 2).unwrap();
        assert!(b.embed(&[1.0]).is_err());
    }

    #[test]
    fn embed_cloud_columns_match_single_embeds() {
        let b = MonomialBasis::new(3, 3).unwrap();
        let pts = vec![vec![1.0, -2.0, 0.5], vec![0.0, 0.0, 0.0], vec![3.0, 1.0, 1.0]];
        let phi = b.embed_cloud(&pts).unwrap();
        assert_eq!(phi.nrows(), b.len());
        assert_eq!(phi.ncols(), 3);
        for (i, p) in pts.iter().enumerate() {
            let col = b.embed(p).unwrap();
            assert_eq!(phi.column(i), col.column(0), "cloud column {i}");
        }
    }

    #[test]
    fn count_matches_binomial_formula() {
        assert_eq!(count_monomials(2, 2).unwrap(), 6);
        assert_eq!(count_monomials(3, 2).unwrap(), 10);
        assert_eq!(count_monomials(128, 2).unwrap(), 8385);
        assert_eq!(count_monomials(1, 6).unwrap(), 7);
    }

    #[test]
    fn size_cap_is_enforced() {
        let err = MonomialBasis::with_cap(10, 10, true, 100).unwrap_err();
        match err {
            Error::BasisTooLarge { size, cap, .. } => {
                assert_eq!(size, 184_756);
                assert_eq!(cap, 100);
            }
            other => panic!("expected BasisTooLarge, got {other:?}"),
        }
    }

    #[test]
    fn required_degree_is_generator_degree_to_the_latent_dim() {
        assert_eq!(required_degree(1, 2).unwrap(), 2);
        assert_eq!(required_degree(2, 3).unwrap(), 9);
        assert_eq!(required_degree(3, 2).unwrap(), 8);
        assert!(required_degree(200, 10).is_err());
    }

    #[test]
    fn sample_size_bound_matches_enumerated_basis_sizes() {
        // One latent parameter, linear generator, plane: degree 1 basis in R².
        assert_eq!(sample_size_bound(1, 1, 2).unwrap(), 3);
        // One latent parameter, quadratic generator, plane: degree 2 basis in R².
        assert_eq!(sample_size_bound(1, 2, 2).unwrap(), 6);
        // Two latent parameters, quadratic generator: degree 4 basis in R².
        assert_eq!(sample_size_bound(2, 2, 2).unwrap(), 15);
    }

    #[test]
    fn serde_round_trip_preserves_order_and_flags() {
        let b = MonomialBasis::without_constant(3, 4).unwrap();
        let json = serde_json::to_string(&b).unwrap();
        assert!(json.contains("\"grlex\""));
        let back: MonomialBasis = serde_json::from_str(&json).unwrap();
        assert_eq!(back, b);
    }

    #[test]
    fn serde_rejects_unknown_order() {
        let json = r#"{"dim":2,"max_degree":2,"order":"lex","include_constant":true}"#;
        assert!(serde_json::from_str::<MonomialBasis>(&json.to_string()).is_err());
    }

    #[test]
    fn binomial_checks_overflow() {
        assert_eq!(binomial(6, 3).unwrap(), 20);
        assert_eq!(binomial(5, 0).unwrap(), 1);
        assert_eq!(binomial(3, 5).unwrap(), 0);
        assert!(binomial(u128::MAX, 40).is_err());
    }
}
