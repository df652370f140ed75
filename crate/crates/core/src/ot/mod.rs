//! Exact and sliced Wasserstein distances between equal-mass empirical clouds.
//!
//! Every distance here returns the *p-th power* of the Wasserstein distance
//! (`W_p^p`), which is the quantity the training objective uses. Call
//! [`pth_root`] when the metric itself is needed.
//!
//! For the quadratic cost the sliced distance is bounded by the exact one,
//! `SW_2 <= W_2`; a reverse bound `W_2 <= a * SW_2^b` with `b = 1 / (2(d + 1))`
//! also holds on compact sets but its constant is not tracked here.

mod assignment;
mod divergence;
mod one_d;
mod sliced;

pub use assignment::{
    exact_wasserstein_small, exact_wasserstein_small_with_cap, min_cost_assignment,
    DEFAULT_EXACT_CAP,
};
pub use divergence::{js_divergence_1d, reconstruction_cost, Grid};
pub use one_d::{quantile_wasserstein_1d, sort_indices, wasserstein_1d, SortedPairing};
pub use sliced::{
    project, sliced_wasserstein, sliced_wasserstein_estimate, sliced_wasserstein_gradient,
    SlicedEstimate,
};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Exponent `p` of the ground cost `|x - y|^p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum CostExponent {
    One,
    #[default]
    Two,
}

impl CostExponent {
    pub fn from_int(p: u32) -> Result<Self> {
        match p {
            1 => Ok(Self::One),
            2 => Ok(Self::Two),
            _ => Err(Error::InvalidArgument(format!(
                "cost exponent must be 1 or 2, got {p}"
            ))),
        }
    }

    pub fn as_int(self) -> u32 {
        match self {
            Self::One => 1,
            Self::Two => 2,
        }
    }

    /// `|diff|^p` for a scalar difference.
    #[inline]
    pub fn scalar_cost<T: Scalar>(self, diff: T) -> T {
        match self {
            Self::One => diff.abs(),
            Self::Two => diff * diff,
        }
    }

    /// `||x - y||^p` for two points.
    #[inline]
    pub fn point_cost<T: Scalar>(self, x: &[T], y: &[T]) -> T {
        let sq: T = x.iter().zip(y).map(|(&a, &b)| (a - b) * (a - b)).sum();
        match self {
            Self::One => sq.sqrt(),
            Self::Two => sq,
        }
    }
}

/// Converts a `W_p^p` value into the metric `W_p`.
pub fn pth_root<T: Scalar>(value: T, p: CostExponent) -> T {
    match p {
        CostExponent::One => value,
        CostExponent::Two => value.sqrt(),
    }
}

pub(crate) fn check_same_shape<T: Scalar>(
    context: &'static str,
    a: &crate::PointCloud<T>,
    b: &crate::PointCloud<T>,
) -> Result<()> {
    if a.d() != b.d() {
        return Err(Error::DimensionMismatch {
            context,
            expected: a.d(),
            actual: b.d(),
        });
    }
    if a.n() != b.n() {
        return Err(Error::CountMismatch {
            context,
            left: a.n(),
            right: b.n(),
        });
    }
    Ok(())
}
