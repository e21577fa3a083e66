//! Point clouds: validated collections of `R^d` samples with optional labels,
//! CSV round-tripping, and simple conditioning transforms.

use std::io::{Read, Write};
use std::path::Path;

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::{Error, Result};

/// A finite sample of points in `R^d`, optionally labelled.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    dim: usize,
    points: Vec<Vec<f64>>,
    labels: Option<Vec<String>>,
}

impl PointCloud {
    /// Build an unlabelled cloud, validating shape and finiteness.
    pub fn new(dim: usize, points: Vec<Vec<f64>>) -> Result<Self> {
        Self::with_labels(dim, points, None)
    }

    /// Build a cloud with one label per point.
    pub fn with_labels(
        dim: usize,
        points: Vec<Vec<f64>>,
        labels: Option<Vec<String>>,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidInput("point dimension must be positive".into()));
        }
        for (i, p) in points.iter().enumerate() {
            if p.len() != dim {
                return Err(Error::DimensionMismatch {
                    context: format!("point {i}"),
                    expected: dim,
                    got: p.len(),
                });
            }
            if let Some(bad) = p.iter().find(|v| !v.is_finite()) {
                return Err(Error::InvalidInput(format!(
                    "point {i} contains a non-finite coordinate {bad}"
                )));
            }
        }
        if let Some(ls) = &labels {
            if ls.len() != points.len() {
                return Err(Error::DimensionMismatch {
                    context: "labels".into(),
                    expected: points.len(),
                    got: ls.len(),
                });
            }
        }
        Ok(PointCloud { dim, points, labels })
    }

    /// Ambient dimension `d`.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of points `N`.
    pub fn len(&self) -> usize {
        self.points.len()
    }

    /// True when the cloud holds no points.
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// The points themselves.
    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    /// Per-point labels, if any.
    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    /// Append a point (and label, when the cloud is labelled).
    pub fn push(&mut self, point: Vec<f64>, label: Option<String>) -> Result<()> {
        if point.len() != self.dim {
            return Err(Error::DimensionMismatch {
                context: "pushed point".into(),
                expected: self.dim,
                got: point.len(),
            });
        }
        if point.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("pushed point has a non-finite coordinate".into()));
        }
        match (&mut self.labels, label) {
            (Some(ls), Some(l)) => ls.push(l),
            (Some(_), None) => {
                return Err(Error::InvalidInput(
                    "cloud is labelled; pushed point needs a label".into(),
                ))
            }
            (None, Some(_)) => {
                return Err(Error::InvalidInput(
                    "cloud is unlabelled; cannot push a labelled point".into(),
                ))
            }
            (None, None) => {}
        }
        self.points.push(point);
        Ok(())
    }

    /// Mean of the points; errors on an empty cloud.
    pub fn centroid(&self) -> Result<Vec<f64>> {
        if self.is_empty() {
            return Err(Error::InvalidInput("centroid of an empty cloud".into()));
        }
        let mut c = vec![0.0; self.dim];
        for p in &self.points {
            for (ci, &pi) in c.iter_mut().zip(p) {
                *ci += pi;
            }
        }
        let n = self.points.len() as f64;
        c.iter_mut().for_each(|v| *v /= n);
        Ok(c)
    }

    /// Largest Euclidean norm over the points (0 for an empty cloud).
    pub fn max_norm(&self) -> f64 {
        self.points
            .iter()
            .map(|p| p.iter().map(|v| v * v).sum::<f64>().sqrt())
            .fold(0.0, f64::max)
    }

    /// Scale every point by `1 / max_norm` so the cloud fits in the unit
    /// ball. Identity on the zero cloud. Improves conditioning of high-degree
    /// embeddings without moving the origin.
    pub fn rescale_to_unit_ball(&mut self) {
        let r = self.max_norm();
        if r > 0.0 {
            for p in &mut self.points {
                p.iter_mut().for_each(|v| *v /= r);
            }
        }
    }

    /// Centre the cloud and apply inverse-square-root covariance scaling so
    /// the transformed sample has identity covariance (directions with
    /// near-zero variance are left unscaled). This is a conditioning
    /// transform: it changes which polynomials vanish, so fit signatures on
    /// either the raw or the whitened cloud consistently.
    pub fn whiten(&mut self) -> Result<()> {
        if self.len() < 2 {
            return Ok(());
        }
        let c = self.centroid()?;
        let n = self.len() as f64;
        let mut cov = DMatrix::zeros(self.dim, self.dim);
        for p in &self.points {
            let v = DVector::from_iterator(self.dim, p.iter().zip(&c).map(|(a, b)| a - b));
            cov += &v * v.transpose();
        }
        cov /= n;
        let eig = SymmetricEigen::new(cov);
        let max_ev = eig.eigenvalues.iter().cloned().fold(0.0, f64::max);
        let floor = (max_ev * 1e-12).max(f64::MIN_POSITIVE);
        // W = V diag(λ^{-1/2}) Vᵀ with degenerate directions passed through.
        let inv_sqrt = DVector::from_iterator(
            self.dim,
            eig.eigenvalues
                .iter()
                .map(|&l| if l > floor { 1.0 / l.sqrt() } else { 1.0 }),
        );
        let w = &eig.eigenvectors * DMatrix::from_diagonal(&inv_sqrt) * eig.eigenvectors.transpose();
        for p in &mut self.points {
            let v = DVector::from_iterator(self.dim, p.iter().zip(&c).map(|(a, b)| a - b));
            let t = &w * v;
            p.copy_from_slice(t.as_slice());
        }
        Ok(())
    }

    /// Split a labelled cloud into (label, sub-cloud) groups in first-seen order.
    pub fn split_by_label(&self) -> Result<Vec<(String, PointCloud)>> {
        let labels = self
            .labels
            .as_ref()
            .ok_or_else(|| Error::InvalidInput("cloud has no labels to split by".into()))?;
        let mut order: Vec<String> = Vec::new();
        for l in labels {
            if !order.contains(l) {
                order.push(l.clone());
            }
        }
        order
            .into_iter()
            .map(|l| {
                let pts: Vec<Vec<f64>> = self
                    .points
                    .iter()
                    .zip(labels)
                    .filter(|(_, pl)| **pl == l)
                    .map(|(p, _)| p.clone())
                    .collect();
                Ok((l.clone(), PointCloud::new(self.dim, pts)?))
            })
            .collect()
    }

    /// Read a cloud from CSV with header `x1,…,xd[,label]`.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
        let headers = rdr.headers()?.clone();
        let mut dim = headers.len();
        let mut labelled = false;
        if headers.iter().last() == Some("label") {
            labelled = true;
            dim -= 1;
        }
        if dim == 0 {
            return Err(Error::InvalidInput("csv has no coordinate columns".into()));
        }
        for (i, h) in headers.iter().take(dim).enumerate() {
            let expected = format!("x{}", i + 1);
            if h != expected {
                return Err(Error::InvalidInput(format!(
                    "csv column {i} is named {h:?}, expected {expected:?}"
                )));
            }
        }
        let mut points = Vec::new();
        let mut labels: Vec<String> = Vec::new();
        for (row_idx, record) in rdr.records().enumerate() {
            let record = record?;
            let expected_fields = dim + usize::from(labelled);
            if record.len() != expected_fields {
                return Err(Error::InvalidInput(format!(
                    "csv row {row_idx} has {} fields, expected {expected_fields}",
                    record.len()
                )));
            }
            let mut p = Vec::with_capacity(dim);
            for (col, field) in record.iter().take(dim).enumerate() {
                let v: f64 = field.trim().parse().map_err(|_| {
                    Error::InvalidInput(format!(
                        "csv row {row_idx}, column {col}: {field:?} is not a number"
                    ))
                })?;
                p.push(v);
            }
            if labelled {
                labels.push(record[dim].to_string());
            }
            points.push(p);
        }
        PointCloud::with_labels(dim, points, labelled.then_some(labels))
    }

    /// Read a cloud from a CSV file.
    pub fn read_csv_path<P: AsRef<Path>>(path: P) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Self::read_csv(file)
    }

    /// Write the cloud as CSV with header `x1,…,xd[,label]`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        let mut header: Vec<String> = (1..=self.dim).map(|i| format!("x{i}")).collect();
        if self.labels.is_some() {
            header.push("label".into());
        }
        wtr.write_record(&header)?;
        for (i, p) in self.points.iter().enumerate() {
            let mut row: Vec<String> = p.iter().map(|v| format!("{v:?}")).collect();
            if let Some(ls) = &self.labels {
                row.push(ls[i].clone());
            }
            wtr.write_record(&row)?;
        }
        wtr.flush()?;
        Ok(())
    }

    /// Write the cloud to a CSV file.
    pub fn write_csv_path<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        let file = std::fs::File::create(path)?;
        self.write_csv(file)
    }
}
