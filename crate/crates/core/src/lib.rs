//! Sliced-Wasserstein distances between empirical point clouds and a
//! sliced-Wasserstein autoencoder trainer.
//!
//! The numeric core is generic over [`Scalar`] (`f32` or `f64`); the
//! `*64` / `*32` aliases below fix the element type. Exact small-instance
//! optimal transport ([`ot::exact_wasserstein_small`]) is included as an
//! oracle for the sort-based and sliced estimators.
//!
//! ```
//! use swae::{ot, sampling, CostExponent, PointCloud64, RngSeed};
//!
//! let a = PointCloud64::from_rows(&[[0.0, 0.0], [1.0, 0.0]]).unwrap();
//! let b = PointCloud64::from_rows(&[[0.0, 1.0], [1.0, 1.0]]).unwrap();
//! let mut rng = RngSeed(7).stream(0);
//! let thetas = sampling::sample_unit_sphere(128, 2, &mut rng).unwrap();
//! let sw = ot::sliced_wasserstein(&a, &b, &thetas, CostExponent::Two).unwrap();
//! let exact = ot::exact_wasserstein_small(&a, &b, CostExponent::Two).unwrap();
//! assert!(sw <= exact);
//! ```

pub mod cloud;
pub mod error;
pub mod linalg;
pub mod nn;
pub mod ot;
pub mod sampling;
pub mod scalar;
pub mod train;

pub use cloud::{PointCloud, ProjectionSet};
pub use error::{Error, Result};
pub use linalg::Matrix;
pub use ot::{CostExponent, SortedPairing};
pub use sampling::{PriorKind, PriorSpec, RngSeed};
pub use scalar::Scalar;
pub use train::{LossReport, TrainConfig, TrainRecord};

pub type PointCloud64 = PointCloud<f64>;
pub type PointCloud32 = PointCloud<f32>;
pub type ProjectionSet64 = ProjectionSet<f64>;
pub type ProjectionSet32 = ProjectionSet<f32>;
pub type Matrix64 = Matrix<f64>;
pub type Matrix32 = Matrix<f32>;
pub type Network64 = nn::DenseNetwork<f64>;
pub type Network32 = nn::DenseNetwork<f32>;
pub type TrainRecord64 = TrainRecord<f64>;
