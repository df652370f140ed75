use std::cmp::Ordering;

use super::CostExponent;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Indices that sort `values` ascending. Ties keep their original order.
pub fn sort_indices<T: Scalar>(values: &[T]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&i, &j| values[i].partial_cmp(&values[j]).unwrap_or(Ordering::Equal));
    idx
}

/// Monotone matching of two equal-size projected samples: rank `m` of `a`
/// is paired with rank `m` of `b`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SortedPairing {
    pub idx_a: Vec<usize>,
    pub idx_b: Vec<usize>,
}

impl SortedPairing {
    pub fn new<T: Scalar>(a: &[T], b: &[T]) -> Result<Self> {
        check_1d(a, b)?;
        Ok(Self {
            idx_a: sort_indices(a),
            idx_b: sort_indices(b),
        })
    }

    pub fn len(&self) -> usize {
        self.idx_a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.idx_a.is_empty()
    }

    /// `(i, j)` index pairs in rank order.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.idx_a.iter().copied().zip(self.idx_b.iter().copied())
    }
}

fn check_1d<T: Scalar>(a: &[T], b: &[T]) -> Result<()> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Empty("1d sample"));
    }
    if a.len() != b.len() {
        return Err(Error::CountMismatch {
            context: "wasserstein_1d",
            left: a.len(),
            right: b.len(),
        });
    }
    if !a.iter().chain(b).all(|v| v.is_finite()) {
        return Err(Error::NonFinite("1d sample".into()));
    }
    Ok(())
}

/// `W_p^p` between two equal-size 1D empirical measures:
/// `(1/N) sum_m |a_(m) - b_(m)|^p` over the ascending order statistics.
pub fn wasserstein_1d<T: Scalar>(a: &[T], b: &[T], p: CostExponent) -> Result<T> {
    let pairing = SortedPairing::new(a, b)?;
    Ok(paired_cost(a, b, &pairing, p))
}

pub(crate) fn paired_cost<T: Scalar>(
    a: &[T],
    b: &[T],
    pairing: &SortedPairing,
    p: CostExponent,
) -> T {
    let sum: T = pairing
        .pairs()
        .map(|(i, j)| p.scalar_cost(a[i] - b[j]))
        .sum();
    sum / T::of_usize(a.len())
}

/// Midpoint-rule `W_p^p` between two 1D laws given by their quantile functions:
/// `(1/M) sum_m c(Fa^-1(t_m), Fb^-1(t_m))` with `t_m = (2m - 1) / 2M`.
pub fn quantile_wasserstein_1d<T, FA, FB>(
    inv_cdf_a: FA,
    inv_cdf_b: FB,
    m_points: usize,
    p: CostExponent,
) -> Result<T>
where
    T: Scalar,
    FA: Fn(T) -> T,
    FB: Fn(T) -> T,
{
    if m_points == 0 {
        return Err(Error::InvalidArgument(
            "quantile rule needs at least one point".into(),
        ));
    }
    let m_total = T::of_usize(m_points);
    let two = T::of(2.0);
    let mut sum = T::zero();
    for m in 1..=m_points {
        let tau = (two * T::of_usize(m) - T::one()) / (two * m_total);
        sum = sum + p.scalar_cost(inv_cdf_a(tau) - inv_cdf_b(tau));
    }
    Ok(sum / m_total)
}
