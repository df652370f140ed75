use rayon::prelude::*;

use super::one_d::{paired_cost, SortedPairing};
use super::{check_same_shape, CostExponent};
use crate::cloud::{unit_tolerance, PointCloud, ProjectionSet};
use crate::error::{Error, Result};
use crate::linalg::{dot, norm, Matrix};
use crate::scalar::Scalar;

/// Radon slice of an empirical cloud: `<direction, x_m>` for every sample, in order.
pub fn project<T: Scalar>(cloud: &PointCloud<T>, direction: &[T]) -> Result<Vec<T>> {
    if direction.len() != cloud.d() {
        return Err(Error::DimensionMismatch {
            context: "project",
            expected: cloud.d(),
            actual: direction.len(),
        });
    }
    let n = norm(direction);
    if (n - T::one()).abs() > unit_tolerance::<T>(1e-9) {
        return Err(Error::NotUnit {
            index: 0,
            norm: n.as_f64(),
        });
    }
    Ok(project_unchecked(cloud, direction))
}

pub(crate) fn project_unchecked<T: Scalar>(cloud: &PointCloud<T>, direction: &[T]) -> Vec<T> {
    cloud
        .points()
        .iter_rows()
        .map(|x| dot(x, direction))
        .collect()
}

fn check_sliced<T: Scalar>(
    a: &PointCloud<T>,
    b: &PointCloud<T>,
    thetas: &ProjectionSet<T>,
) -> Result<()> {
    check_same_shape("sliced_wasserstein", a, b)?;
    if thetas.d() != a.d() {
        return Err(Error::DimensionMismatch {
            context: "sliced_wasserstein directions",
            expected: a.d(),
            actual: thetas.d(),
        });
    }
    Ok(())
}

/// Monte-Carlo sliced-Wasserstein estimate with its per-direction terms.
#[derive(Debug, Clone)]
pub struct SlicedEstimate<T> {
    /// Mean of the per-direction `W_p^p` values.
    pub value: T,
    /// Standard error of the mean, from the sample variance across directions.
    /// Zero when only one direction was used.
    pub std_error: T,
    pub per_direction: Vec<T>,
}

/// Per-direction 1D `W_p^p` values plus their mean and standard error.
///
/// Directions are evaluated in parallel and reduced in a fixed order, so the
/// result does not depend on the thread count.
pub fn sliced_wasserstein_estimate<T: Scalar>(
    a: &PointCloud<T>,
    b: &PointCloud<T>,
    thetas: &ProjectionSet<T>,
    p: CostExponent,
) -> Result<SlicedEstimate<T>> {
    check_sliced(a, b, thetas)?;
    let per_direction: Vec<T> = (0..thetas.len())
        .into_par_iter()
        .map(|l| {
            let theta = thetas.direction(l);
            let pa = project_unchecked(a, theta);
            let pb = project_unchecked(b, theta);
            let pairing = SortedPairing {
                idx_a: super::sort_indices(&pa),
                idx_b: super::sort_indices(&pb),
            };
            paired_cost(&pa, &pb, &pairing, p)
        })
        .collect();
    let count = T::of_usize(per_direction.len());
    let value = per_direction.iter().copied().sum::<T>() / count;
    let std_error = if per_direction.len() > 1 {
        let ss: T = per_direction
            .iter()
            .map(|&v| (v - value) * (v - value))
            .sum();
        (ss / (count - T::one())).sqrt() / count.sqrt()
    } else {
        T::zero()
    };
    Ok(SlicedEstimate {
        value,
        std_error,
        per_direction,
    })
}

/// `(1/L) sum_l W_p^p(slice_l(a), slice_l(b))` over the given directions.
pub fn sliced_wasserstein<T: Scalar>(
    a: &PointCloud<T>,
    b: &PointCloud<T>,
    thetas: &ProjectionSet<T>,
    p: CostExponent,
) -> Result<T> {
    Ok(sliced_wasserstein_estimate(a, b, thetas, p)?.value)
}

/// Gradient of [`sliced_wasserstein`] with respect to the coordinates of `a`,
/// holding each direction's sort pairing fixed.
///
/// For `p = 2` the contribution of direction `l` to the point of rank `m` in
/// `a` is `2 / (L N) * (theta_l . a_(m) - theta_l . b_(m)) * theta_l`. For
/// `p = 1` the factor `2 (diff)` becomes `sign(diff)`.
pub fn sliced_wasserstein_gradient<T: Scalar>(
    a: &PointCloud<T>,
    b: &PointCloud<T>,
    thetas: &ProjectionSet<T>,
    p: CostExponent,
) -> Result<Matrix<T>> {
    check_sliced(a, b, thetas)?;
    let n = a.n();
    let scale = T::one() / (T::of_usize(thetas.len()) * T::of_usize(n));
    // coefficient per (direction, point); accumulated serially below
    let coefficients: Vec<Vec<T>> = (0..thetas.len())
        .into_par_iter()
        .map(|l| {
            let theta = thetas.direction(l);
            let pa = project_unchecked(a, theta);
            let pb = project_unchecked(b, theta);
            let ia = super::sort_indices(&pa);
            let ib = super::sort_indices(&pb);
            let mut coef = vec![T::zero(); n];
            for (&i, &j) in ia.iter().zip(&ib) {
                let diff = pa[i] - pb[j];
                coef[i] = match p {
                    CostExponent::Two => T::of(2.0) * diff,
                    CostExponent::One => sign(diff),
                } * scale;
            }
            coef
        })
        .collect();
    let mut grad = Matrix::zeros(n, a.d());
    for (l, coef) in coefficients.iter().enumerate() {
        let theta = thetas.direction(l);
        for (i, &c) in coef.iter().enumerate() {
            for (g, &t) in grad.row_mut(i).iter_mut().zip(theta) {
                *g = *g + c * t;
            }
        }
    }
    Ok(grad)
}

fn sign<T: Scalar>(v: T) -> T {
    if v > T::zero() {
        T::one()
    } else if v < T::zero() {
        -T::one()
    } else {
        T::zero()
    }
}
