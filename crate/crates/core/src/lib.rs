//! Moment-matrix concept signatures for point clouds.
//!
//! A point cloud `X = {x_1, …, x_N} ⊂ R^d` is embedded through a monomial
//! feature map `φ` and summarised by its second moment matrix
//! `M(X) = (1/N) Σ φ(x_i)φ(x_i)ᵀ`. The null space of `M(X)` encodes every
//! polynomial relation the cloud satisfies, so the orthogonal projector onto
//! that null space acts as a *signature* of the concept the cloud samples:
//! membership of a new point is tested by how strongly its feature vector is
//! annihilated by the projector.
//!
//! The crate provides:
//!
//! - [`basis`]: graded-lexicographic monomial bases and feature embeddings;
//! - [`cloud`]: point clouds, CSV I/O, normalisation helpers;
//! - [`signature`]: fitting signatures from clouds (dense and Gram paths),
//!   membership scoring, serialisation;
//! - [`projection`]: seeded Gaussian dimension reduction with
//!   distortion-controlled target dimensions;
//! - [`algebra`]: complement, similarity, intersection, subset tests and
//!   dictionary discovery on signatures;
//! - [`generators`]: seeded synthetic clouds (subspaces, curves, circles,
//!   spheres, rectangles, stick figures, trajectories);
//! - [`hierarchy`]: signatures of signatures — flattening projectors of a
//!   transformed family and fitting a second-level signature, plus closed
//!   form moment maps for planar rotations and translations;
//! - [`stream`]: an online attention stack that groups incoming points into
//!   concepts and accumulates per-layer concept dictionaries;
//! - [`mlp`]: recovery of first and second moment information from the
//!   activation statistics of a random square-activation layer, with
//!   self-calibrating combination coefficients;
//! - [`repro`]: the named, seeded experiments exercised by the acceptance
//!   test suite and the `repro` CLI subcommand.

pub mod algebra;
pub mod basis;
pub mod cloud;
pub mod generators;
pub mod hierarchy;
pub mod mlp;
pub mod projection;
pub mod repro;
pub mod seeding;
pub mod signature;
pub mod stats;
pub mod stream;

mod error;

pub use error::Error;

/// Convenience result alias used across the crate.
pub type Result<T> = std::result::Result<T, Error>;
