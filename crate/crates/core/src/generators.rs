//! Seeded synthetic concept sampling: subspaces, circles, spheres, polynomial
//! generators, unions (rectangles, stick figures), trajectories, and
//! rotated/translated families.
//!
//! Every sampler is a pure function of `(spec, n, seed)`; noiseless samples
//! satisfy their defining polynomial equations to machine precision.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::cloud::PointCloud;
use crate::seeding;
use crate::{Error, Result};

/// One monomial term of a polynomial generator coordinate: `coeff · z^exponents`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolyTerm {
    pub exponents: Vec<u32>,
    pub coeff: f64,
}

/// Parameter sub-range restricting where on the manifold samples are drawn.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Region {
    /// Angle interval for circles (radians; `start < end`).
    AngleInterval { start: f64, end: f64 },
    /// Per-latent-coordinate box for subspaces, generators, segments, trajectories.
    CoefficientBox { ranges: Vec<(f64, f64)> },
}

/// Transform families for parameterised cloud motion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransformFamily {
    Rotation,
    Translation,
}

/// Geometric shape of a concept.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Shape {
    /// Affine subspace `offset + span(basis)`.
    Subspace { basis: Vec<Vec<f64>>, offset: Vec<f64> },
    /// Circle in the plane.
    Circle { center: [f64; 2], radius: f64 },
    /// Sphere in `R^d` with `d = center.len()`.
    Sphere { center: Vec<f64>, radius: f64 },
    /// Image of `G: R^k → R^d`, each output coordinate a polynomial in `z`.
    PolyGenerator {
        latent_dim: usize,
        degree: u32,
        coefficients: Vec<Vec<PolyTerm>>,
    },
    /// Union of member concepts; sampled points carry the member index label.
    Union { members: Vec<ManifoldSpec> },
    /// Line segment between two points.
    Segment { start: Vec<f64>, end: Vec<f64> },
    /// Trajectory `p + ∫₀ᵗ v(s) ds` with a constant 1 coordinate appended;
    /// `velocity[c]` lists ascending-power coefficients of coordinate `c`.
    Trajectory { initial: Vec<f64>, velocity: Vec<Vec<f64>> },
    /// A base concept carried through a parameterised transform; each sample
    /// applies an independently drawn parameter to a random base point.
    Transform {
        base: Box<ManifoldSpec>,
        base_n: usize,
        family: TransformFamily,
        ranges: Vec<(f64, f64)>,
    },
}

/// A sampleable concept: shape, additive noise scale, optional region.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifoldSpec {
    pub shape: Shape,
    #[serde(default)]
    pub noise_sigma: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub region: Option<Region>,
}

impl ManifoldSpec {
    /// Noise-free spec with full-support region.
    pub fn new(shape: Shape) -> Self {
        ManifoldSpec { shape, noise_sigma: 0.0, region: None }
    }

    pub fn with_noise(mut self, sigma: f64) -> Self {
        self.noise_sigma = sigma;
        self
    }

    pub fn with_region(mut self, region: Region) -> Self {
        self.region = Some(region);
        self
    }

    /// Ambient dimension of sampled points.
    pub fn dim(&self) -> Result<usize> {
        match &self.shape {
            Shape::Subspace { offset, .. } => Ok(offset.len()),
            Shape::Circle { .. } => Ok(2),
            Shape::Sphere { center, .. } => Ok(center.len()),
            Shape::PolyGenerator { coefficients, .. } => Ok(coefficients.len()),
            Shape::Union { members } => {
                let first = members
                    .first()
                    .ok_or_else(|| Error::InvalidInput("union has no members".into()))?;
                first.dim()
            }
            Shape::Segment { start, .. } => Ok(start.len()),
            // Trajectories append the constant 1 coordinate.
            Shape::Trajectory { initial, .. } => Ok(initial.len() + 1),
            Shape::Transform { base, .. } => base.dim(),
        }
    }

    /// Validate invariants: positive radii, consistent dimensions, nonempty
    /// regions, degree bounds.
    pub fn validate(&self) -> Result<()> {
        if !(self.noise_sigma >= 0.0) {
            return Err(Error::InvalidInput(format!(
                "noise sigma must be nonnegative, got {}",
                self.noise_sigma
            )));
        }
        if let Some(region) = &self.region {
            match region {
                Region::AngleInterval { start, end } => {
                    if !(end > start) {
                        return Err(Error::InvalidInput("empty angle interval".into()));
                    }
                    if !matches!(self.shape, Shape::Circle { .. }) {
                        return Err(Error::InvalidInput(
                            "angle-interval regions apply to circles only".into(),
                        ));
                    }
                }
                Region::CoefficientBox { ranges } => {
                    if ranges.is_empty() || ranges.iter().any(|(lo, hi)| !(hi >= lo)) {
                        return Err(Error::InvalidInput("empty coefficient box".into()));
                    }
                    let k = self.latent_dim()?;
                    if ranges.len() != k {
                        return Err(Error::DimensionMismatch {
                            context: "coefficient box".into(),
                            expected: k,
                            got: ranges.len(),
                        });
                    }
                }
            }
        }
        match &self.shape {
            Shape::Subspace { basis, offset } => {
                if basis.is_empty() {
                    return Err(Error::InvalidInput("subspace needs at least one basis vector".into()));
                }
                for (i, b) in basis.iter().enumerate() {
                    if b.len() != offset.len() {
                        return Err(Error::DimensionMismatch {
                            context: format!("subspace basis vector {i}"),
                            expected: offset.len(),
                            got: b.len(),
                        });
                    }
                }
            }
            Shape::Circle { radius, .. } => {
                if !(*radius > 0.0) {
                    return Err(Error::InvalidInput(format!("circle radius must be positive, got {radius}")));
                }
            }
            Shape::Sphere { center, radius } => {
                if !(*radius > 0.0) {
                    return Err(Error::InvalidInput(format!("sphere radius must be positive, got {radius}")));
                }
                if center.is_empty() {
                    return Err(Error::InvalidInput("sphere center must be nonempty".into()));
                }
            }
            Shape::PolyGenerator { latent_dim, degree, coefficients } => {
                if *latent_dim == 0 {
                    return Err(Error::InvalidInput("generator latent dimension must be ≥ 1".into()));
                }
                if *degree == 0 {
                    return Err(Error::InvalidInput("generator degree must be ≥ 1".into()));
                }
                if coefficients.is_empty() {
                    return Err(Error::InvalidInput("generator has no output coordinates".into()));
                }
                for (c, terms) in coefficients.iter().enumerate() {
                    for term in terms {
                        if term.exponents.len() != *latent_dim {
                            return Err(Error::DimensionMismatch {
                                context: format!("generator coordinate {c} term exponents"),
                                expected: *latent_dim,
                                got: term.exponents.len(),
                            });
                        }
                        let total: u32 = term.exponents.iter().sum();
                        if total > *degree {
                            return Err(Error::InvalidInput(format!(
                                "generator coordinate {c} has a degree-{total} term above the declared degree {degree}"
                            )));
                        }
                    }
                }
            }
            Shape::Union { members } => {
                if members.is_empty() {
                    return Err(Error::InvalidInput("union has no members".into()));
                }
                let d = self.dim()?;
                for (i, m) in members.iter().enumerate() {
                    m.validate()?;
                    if m.dim()? != d {
                        return Err(Error::DimensionMismatch {
                            context: format!("union member {i}"),
                            expected: d,
                            got: m.dim()?,
                        });
                    }
                }
            }
            Shape::Segment { start, end } => {
                if start.len() != end.len() {
                    return Err(Error::DimensionMismatch {
                        context: "segment endpoints".into(),
                        expected: start.len(),
                        got: end.len(),
                    });
                }
                if start == end {
                    return Err(Error::InvalidInput("segment endpoints coincide".into()));
                }
            }
            Shape::Trajectory { initial, velocity } => {
                if velocity.len() != initial.len() {
                    return Err(Error::DimensionMismatch {
                        context: "trajectory velocity coordinates".into(),
                        expected: initial.len(),
                        got: velocity.len(),
                    });
                }
                if velocity.iter().all(|c| c.is_empty()) {
                    return Err(Error::InvalidInput("trajectory velocity is empty".into()));
                }
            }
            Shape::Transform { base, base_n, family, ranges } => {
                base.validate()?;
                if *base_n == 0 {
                    return Err(Error::InvalidInput("transform base sample count must be ≥ 1".into()));
                }
                let want = match family {
                    TransformFamily::Rotation => 1,
                    TransformFamily::Translation => 2,
                };
                if ranges.len() != want {
                    return Err(Error::DimensionMismatch {
                        context: "transform parameter ranges".into(),
                        expected: want,
                        got: ranges.len(),
                    });
                }
                if ranges.iter().any(|(lo, hi)| !(hi >= lo)) {
                    return Err(Error::InvalidInput("empty transform parameter range".into()));
                }
                if base.dim()? < 2 {
                    return Err(Error::InvalidInput("transforms act on 2-d positions".into()));
                }
            }
        }
        Ok(())
    }

    /// Number of latent parameters the region box must cover.
    fn latent_dim(&self) -> Result<usize> {
        match &self.shape {
            Shape::Subspace { basis, .. } => Ok(basis.len()),
            Shape::PolyGenerator { latent_dim, .. } => Ok(*latent_dim),
            Shape::Segment { .. } | Shape::Trajectory { .. } => Ok(1),
            _ => Err(Error::InvalidInput(
                "coefficient-box regions apply to subspaces, generators, segments, and trajectories".into(),
            )),
        }
    }
}

/// Draw `n` points from the spec; deterministic per `(spec, n, seed)`.
pub fn sample(spec: &ManifoldSpec, n: usize, seed: u64) -> Result<PointCloud> {
    if n == 0 {
        return Err(Error::InvalidInput("sample count must be ≥ 1".into()));
    }
    spec.validate()?;
    let mut rng = seeding::rng_for(seed, "manifold-sample");
    let mut cloud = sample_inner(spec, n, &mut rng)?;
    if spec.noise_sigma > 0.0 {
        let mut noise_rng = seeding::rng_for(seed, "manifold-noise");
        let dim = cloud.dim();
        let noisy: Vec<Vec<f64>> = cloud
            .points()
            .iter()
            .map(|p| {
                p.iter()
                    .map(|&v| v + spec.noise_sigma * sample_normal(&mut noise_rng))
                    .collect()
            })
            .collect();
        cloud = PointCloud::with_labels(dim, noisy, cloud.labels().map(|l| l.to_vec()))?;
    }
    Ok(cloud)
}

fn sample_normal<R: Rng>(rng: &mut R) -> f64 {
    StandardNormal.sample(rng)
}

fn box_ranges(spec: &ManifoldSpec, k: usize) -> Vec<(f64, f64)> {
    match &spec.region {
        Some(Region::CoefficientBox { ranges }) => ranges.clone(),
        _ => vec![(-1.0, 1.0); k],
    }
}

fn sample_inner<R: Rng>(spec: &ManifoldSpec, n: usize, rng: &mut R) -> Result<PointCloud> {
    match &spec.shape {
        Shape::Subspace { basis, offset } => {
            let k = basis.len();
            let ranges = box_ranges(spec, k);
            let d = offset.len();
            let pts = (0..n)
                .map(|_| {
                    let mut x = offset.clone();
                    for (b, (lo, hi)) in basis.iter().zip(&ranges) {
                        let c = rng.gen_range(*lo..=*hi);
                        for (xi, bi) in x.iter_mut().zip(b) {
                            *xi += c * bi;
                        }
                    }
                    x
                })
                .collect();
            PointCloud::new(d, pts)
        }
        Shape::Circle { center, radius } => {
            let (start, end) = match &spec.region {
                Some(Region::AngleInterval { start, end }) => (*start, *end),
                _ => (0.0, std::f64::consts::TAU),
            };
            let pts = (0..n)
                .map(|_| {
                    let theta = rng.gen_range(start..=end);
                    vec![center[0] + radius * theta.cos(), center[1] + radius * theta.sin()]
                })
                .collect();
            PointCloud::new(2, pts)
        }
        Shape::Sphere { center, radius } => {
            let d = center.len();
            let pts = (0..n)
                .map(|_| {
                    // Uniform direction: normalised Gaussian.
                    let g: Vec<f64> = (0..d).map(|_| sample_normal(rng)).collect();
                    let norm = g.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-300);
                    center
                        .iter()
                        .zip(&g)
                        .map(|(c, gi)| c + radius * gi / norm)
                        .collect()
                })
                .collect();
            PointCloud::new(d, pts)
        }
        Shape::PolyGenerator { latent_dim, coefficients, .. } => {
            let ranges = box_ranges(spec, *latent_dim);
            let d = coefficients.len();
            let pts = (0..n)
                .map(|_| {
                    let z: Vec<f64> = ranges.iter().map(|(lo, hi)| rng.gen_range(*lo..=*hi)).collect();
                    coefficients
                        .iter()
                        .map(|terms| evaluate_terms(terms, &z))
                        .collect()
                })
                .collect();
            PointCloud::new(d, pts)
        }
        Shape::Union { members } => {
            let d = spec.dim()?;
            let mut pts = Vec::with_capacity(n);
            let mut labels = Vec::with_capacity(n);
            for _ in 0..n {
                let pick = rng.gen_range(0..members.len());
                // One fresh point from the chosen member, reusing this stream.
                let sub = sample_inner(&members[pick], 1, rng)?;
                pts.push(sub.points()[0].clone());
                labels.push(pick.to_string());
            }
            PointCloud::with_labels(d, pts, Some(labels))
        }
        Shape::Segment { start, end } => {
            let ranges = box_ranges(spec, 1);
            let (lo, hi) = (ranges[0].0.max(0.0), ranges[0].1.min(1.0));
            let pts = (0..n)
                .map(|_| {
                    let t = rng.gen_range(lo..=hi);
                    start.iter().zip(end).map(|(s, e)| s + t * (e - s)).collect()
                })
                .collect();
            PointCloud::new(start.len(), pts)
        }
        Shape::Trajectory { initial, velocity } => {
            let ranges = box_ranges(spec, 1);
            let times: Vec<f64> = (0..n).map(|_| rng.gen_range(ranges[0].0..=ranges[0].1)).collect();
            let clouds = trajectory_cloud(std::slice::from_ref(initial), velocity, &times)?;
            Ok(clouds.into_iter().next().expect("one initial point was given"))
        }
        Shape::Transform { base, base_n, family, ranges } => {
            let base_cloud = sample_inner(base, *base_n, rng)?;
            let d = base_cloud.dim();
            let pts = (0..n)
                .map(|_| {
                    let p = &base_cloud.points()[rng.gen_range(0..base_cloud.len())];
                    let params: Vec<f64> =
                        ranges.iter().map(|(lo, hi)| rng.gen_range(*lo..=*hi)).collect();
                    apply_transform(p, *family, &params)
                })
                .collect::<Result<Vec<_>>>()?;
            PointCloud::new(d, pts)
        }
    }
}

fn evaluate_terms(terms: &[PolyTerm], z: &[f64]) -> f64 {
    terms
        .iter()
        .map(|t| {
            t.coeff
                * t.exponents
                    .iter()
                    .zip(z)
                    .map(|(&e, &zi)| zi.powi(e as i32))
                    .product::<f64>()
        })
        .sum()
}

/// Axis-aligned rectangle boundary as a union of its four edge segments
/// (bottom, top, left, right). Errors on non-positive sides.
pub fn rectangle(center: [f64; 2], width: f64, height: f64) -> Result<ManifoldSpec> {
    if !(width > 0.0 && height > 0.0) {
        return Err(Error::InvalidInput(format!(
            "rectangle sides must be positive, got {width} × {height}"
        )));
    }
    let (cx, cy) = (center[0], center[1]);
    let (hw, hh) = (width / 2.0, height / 2.0);
    let seg = |a: [f64; 2], b: [f64; 2]| {
        ManifoldSpec::new(Shape::Segment { start: a.to_vec(), end: b.to_vec() })
    };
    Ok(ManifoldSpec::new(Shape::Union {
        members: vec![
            seg([cx - hw, cy - hh], [cx + hw, cy - hh]),
            seg([cx - hw, cy + hh], [cx + hw, cy + hh]),
            seg([cx - hw, cy - hh], [cx - hw, cy + hh]),
            seg([cx + hw, cy - hh], [cx + hw, cy + hh]),
        ],
    }))
}

/// A six-part planar figure (circular head, torso, two arms, two legs),
/// shipped as a named union for hierarchy demos.
pub fn stick_figure() -> ManifoldSpec {
    let seg = |a: [f64; 2], b: [f64; 2]| {
        ManifoldSpec::new(Shape::Segment { start: a.to_vec(), end: b.to_vec() })
    };
    ManifoldSpec::new(Shape::Union {
        members: vec![
            ManifoldSpec::new(Shape::Circle { center: [0.0, 1.4], radius: 0.25 }),
            seg([0.0, 1.15], [0.0, 0.2]),
            seg([0.0, 0.9], [-0.6, 0.5]),
            seg([0.0, 0.9], [0.6, 0.5]),
            seg([0.0, 0.2], [-0.45, -0.8]),
            seg([0.0, 0.2], [0.45, -0.8]),
        ],
    })
}

/// Deterministic circle samples at explicit angles (quadrature hook).
pub fn circle_points_at_angles(center: [f64; 2], radius: f64, angles: &[f64]) -> Result<PointCloud> {
    if !(radius > 0.0) {
        return Err(Error::InvalidInput(format!("circle radius must be positive, got {radius}")));
    }
    let pts = angles
        .iter()
        .map(|t| vec![center[0] + radius * t.cos(), center[1] + radius * t.sin()])
        .collect();
    PointCloud::new(2, pts)
}

/// Uniform cloud in the box `[−half_width, half_width]^dim` (generic filler).
pub fn uniform_box_cloud(dim: usize, n: usize, half_width: f64, seed: u64) -> Result<PointCloud> {
    if dim == 0 || n == 0 {
        return Err(Error::InvalidInput("box cloud needs positive dim and count".into()));
    }
    let mut rng = seeding::rng_for(seed, "uniform-box");
    let pts = (0..n)
        .map(|_| (0..dim).map(|_| rng.gen_range(-half_width..=half_width)).collect())
        .collect();
    PointCloud::new(dim, pts)
}

/// Trajectories of several objects sharing one velocity law: object `i`'s
/// cloud is `{ p_i + ∫₀ᵗ v(s) ds : t ∈ t_samples }` with a constant 1
/// coordinate appended, which turns shared-velocity trajectories into
/// parallel affine flats.
///
/// `velocity[c]` holds ascending-power coefficients of coordinate `c`;
/// requires `t_samples.len() ≥ degree(v) + 2` so the flat is determined.
pub fn trajectory_cloud(
    initial_points: &[Vec<f64>],
    velocity: &[Vec<f64>],
    t_samples: &[f64],
) -> Result<Vec<PointCloud>> {
    if initial_points.is_empty() {
        return Err(Error::InvalidInput("no initial points given".into()));
    }
    let d = initial_points[0].len();
    if velocity.len() != d {
        return Err(Error::DimensionMismatch {
            context: "velocity coordinates".into(),
            expected: d,
            got: velocity.len(),
        });
    }
    let v_degree = velocity.iter().map(|c| c.len().saturating_sub(1)).max().unwrap_or(0);
    if t_samples.len() < v_degree + 2 {
        return Err(Error::InvalidInput(format!(
            "need at least degree(v)+2 = {} time samples, got {}",
            v_degree + 2,
            t_samples.len()
        )));
    }
    // Antiderivative of each coordinate polynomial, zero constant term.
    let displacement: Vec<Vec<f64>> = velocity
        .iter()
        .map(|coeffs| {
            let mut anti = vec![0.0];
            anti.extend(coeffs.iter().enumerate().map(|(p, c)| c / (p as f64 + 1.0)));
            anti
        })
        .collect();
    initial_points
        .iter()
        .map(|p| {
            if p.len() != d {
                return Err(Error::DimensionMismatch {
                    context: "initial point".into(),
                    expected: d,
                    got: p.len(),
                });
            }
            let pts: Vec<Vec<f64>> = t_samples
                .iter()
                .map(|&t| {
                    let mut x: Vec<f64> = p
                        .iter()
                        .zip(&displacement)
                        .map(|(pi, anti)| pi + eval_poly(anti, t))
                        .collect();
                    x.push(1.0);
                    x
                })
                .collect();
            PointCloud::new(d + 1, pts)
        })
        .collect()
}

fn eval_poly(coeffs: &[f64], t: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * t + c)
}

/// Apply a planar transform to one point; coordinates past the first two are
/// carried through unchanged.
fn apply_transform(point: &[f64], family: TransformFamily, params: &[f64]) -> Result<Vec<f64>> {
    if point.len() < 2 {
        return Err(Error::InvalidInput("transforms act on 2-d positions".into()));
    }
    let (x, y) = (point[0], point[1]);
    let mut out = point.to_vec();
    match family {
        TransformFamily::Rotation => {
            let theta = *params.first().ok_or_else(|| {
                Error::InvalidInput("rotation needs one parameter".into())
            })?;
            out[0] = x * theta.cos() + y * theta.sin();
            out[1] = -x * theta.sin() + y * theta.cos();
        }
        TransformFamily::Translation => {
            if params.len() != 2 {
                return Err(Error::InvalidInput("translation needs two parameters".into()));
            }
            out[0] = x + params[0];
            out[1] = y + params[1];
        }
    }
    Ok(out)
}

/// One transformed copy of the base cloud per parameter vector (rotation:
/// `[θ]`; translation: `[u, v]`). Labels pass through.
pub fn transform_family(
    base: &PointCloud,
    family: TransformFamily,
    params: &[Vec<f64>],
) -> Result<Vec<PointCloud>> {
    params
        .iter()
        .map(|p| {
            let pts = base
                .points()
                .iter()
                .map(|x| apply_transform(x, family, p))
                .collect::<Result<Vec<_>>>()?;
            PointCloud::with_labels(base.dim(), pts, base.labels().map(|l| l.to_vec()))
        })
        .collect()
}
