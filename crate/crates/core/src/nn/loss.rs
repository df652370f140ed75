use std::fmt;
use std::str::FromStr;

use crate::error::{invalid, Error, Result};
use crate::linalg::Matrix;
use crate::scalar::Scalar;

/// Reconstruction loss between a batch and its reconstruction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ReconLoss {
    /// Mean over samples of `||x - y||^2`.
    #[default]
    Squared,
    /// Mean over all elements of `|x - y|`.
    L1,
    /// Mean over all elements of binary cross-entropy; needs `y` in `(0, 1)`.
    Bce,
    /// `Bce + L1`, both with unit weight.
    BcePlusL1,
}

impl fmt::Display for ReconLoss {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ReconLoss::Squared => "squared",
            ReconLoss::L1 => "l1",
            ReconLoss::Bce => "bce",
            ReconLoss::BcePlusL1 => "bce_plus_l1",
        })
    }
}

impl FromStr for ReconLoss {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "squared" => Ok(ReconLoss::Squared),
            "l1" => Ok(ReconLoss::L1),
            "bce" => Ok(ReconLoss::Bce),
            "bce_plus_l1" => Ok(ReconLoss::BcePlusL1),
            other => invalid(format!("unknown reconstruction loss {other:?}")),
        }
    }
}

impl ReconLoss {
    pub fn needs_unit_interval(self) -> bool {
        matches!(self, ReconLoss::Bce | ReconLoss::BcePlusL1)
    }
}

/// Loss value and its gradient with respect to the reconstruction `y`.
pub fn recon_loss_and_grad<T: Scalar>(
    x: &Matrix<T>,
    y: &Matrix<T>,
    kind: ReconLoss,
) -> Result<(T, Matrix<T>)> {
    if x.rows() != y.rows() || x.cols() != y.cols() {
        return Err(Error::DimensionMismatch {
            context: "reconstruction loss",
            expected: x.rows() * x.cols(),
            actual: y.rows() * y.cols(),
        });
    }
    if x.rows() == 0 || x.cols() == 0 {
        return Err(Error::Empty("reconstruction batch"));
    }
    if kind.needs_unit_interval() {
        if let Some(v) = y
            .as_slice()
            .iter()
            .find(|&&v| !(v > T::zero() && v < T::one()))
        {
            return invalid(format!(
                "cross-entropy needs reconstructions in (0, 1), found {v}; end the decoder in a sigmoid"
            ));
        }
        if let Some(v) = x
            .as_slice()
            .iter()
            .find(|&&v| !(v >= T::zero() && v <= T::one()))
        {
            return invalid(format!("cross-entropy needs targets in [0, 1], found {v}"));
        }
    }

    let samples = T::of_usize(x.rows());
    let elements = T::of_usize(x.rows() * x.cols());
    let mut grad = Matrix::zeros(x.rows(), x.cols());
    let mut loss = T::zero();
    let two = T::of(2.0);
    let use_sq = kind == ReconLoss::Squared;
    let use_l1 = matches!(kind, ReconLoss::L1 | ReconLoss::BcePlusL1);
    let use_bce = kind.needs_unit_interval();

    for ((g, &xv), &yv) in grad
        .as_mut_slice()
        .iter_mut()
        .zip(x.as_slice())
        .zip(y.as_slice())
    {
        let diff = yv - xv;
        if use_sq {
            loss = loss + diff * diff / samples;
            *g = *g + two * diff / samples;
        }
        if use_l1 {
            loss = loss + diff.abs() / elements;
            *g = *g + sign(diff) / elements;
        }
        if use_bce {
            let one_minus = T::one() - yv;
            loss = loss - (xv * yv.ln() + (T::one() - xv) * one_minus.ln()) / elements;
            *g = *g + (-xv / yv + (T::one() - xv) / one_minus) / elements;
        }
    }
    Ok((loss, grad))
}

fn sign<T: Scalar>(v: T) -> T {
    if v == T::zero() {
        T::zero()
    } else {
        v.signum()
    }
}
