//! Data-assimilating solver for the Laplace and Poisson equations.
//!
//! A small tanh network learns a boundary function; the interior solution is
//! reconstructed through a Monte Carlo boundary-integral representation, with
//! point sources handled in closed form — so the reconstruction satisfies the
//! PDE by construction while fitting scattered, noisy observations. The crate
//! also carries a finite-difference reference solver and a collocation-based
//! PINN baseline for controlled comparisons, plus a CLI harness for dataset
//! generation, training, evaluation, benchmark sweeps and well-data
//! ingestion.

pub mod cli;
pub mod error;
pub mod fd;
pub mod field;
pub mod geometry;
pub mod kernels;
pub mod network;
pub mod pibi;
pub mod pinn;
pub mod training;

pub use error::{Error, Result};
pub use field::{mae, max_abs_error, FieldGrid, GridSpec};
pub use geometry::{boundary_measure, enlarge, sample_boundary, BoundarySample, BoxDomain, SamplingMode};
pub use kernels::{fundamental_solution, grad_y_fundamental, normal_derivative_g, Point};
pub use network::MlpParams;
pub use pibi::{layer_potential_sum, source_potential, PibiModel, PointSourceSet};
