use super::{check_same_shape, CostExponent};
use crate::cloud::PointCloud;
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::scalar::Scalar;

/// Largest cloud accepted by [`exact_wasserstein_small`].
pub const DEFAULT_EXACT_CAP: usize = 64;

/// Minimum-cost perfect matching on a square cost matrix (Hungarian method with
/// row/column potentials, `O(n^3)`).
///
/// Returns `assignment[row] = column` and the total cost.
pub fn min_cost_assignment<T: Scalar>(cost: &Matrix<T>) -> Result<(Vec<usize>, T)> {
    let n = cost.rows();
    if n == 0 {
        return Err(Error::Empty("cost matrix"));
    }
    if cost.cols() != n {
        return Err(Error::DimensionMismatch {
            context: "assignment cost matrix",
            expected: n,
            actual: cost.cols(),
        });
    }
    if !cost.all_finite() {
        return Err(Error::NonFinite("assignment cost matrix".into()));
    }

    // 1-based arrays; index 0 is a virtual column used to seed each row.
    let mut u = vec![T::zero(); n + 1];
    let mut v = vec![T::zero(); n + 1];
    let mut owner = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];

    for row in 1..=n {
        owner[0] = row;
        let mut col0 = 0usize;
        let mut minv = vec![T::infinity(); n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[col0] = true;
            let r0 = owner[col0];
            let mut delta = T::infinity();
            let mut col1 = 0usize;
            for col in 1..=n {
                if used[col] {
                    continue;
                }
                let reduced = cost[(r0 - 1, col - 1)] - u[r0] - v[col];
                if reduced < minv[col] {
                    minv[col] = reduced;
                    way[col] = col0;
                }
                if minv[col] < delta {
                    delta = minv[col];
                    col1 = col;
                }
            }
            for col in 0..=n {
                if used[col] {
                    u[owner[col]] = u[owner[col]] + delta;
                    v[col] = v[col] - delta;
                } else {
                    minv[col] = minv[col] - delta;
                }
            }
            col0 = col1;
            if owner[col0] == 0 {
                break;
            }
        }
        loop {
            let col1 = way[col0];
            owner[col0] = owner[col1];
            col0 = col1;
            if col0 == 0 {
                break;
            }
        }
    }

    let mut assignment = vec![0usize; n];
    for col in 1..=n {
        assignment[owner[col] - 1] = col - 1;
    }
    let total = assignment
        .iter()
        .enumerate()
        .map(|(r, &c)| cost[(r, c)])
        .sum();
    Ok((assignment, total))
}

/// Exact `W_p^p` between two equal-size empirical clouds,
/// `min_pi (1/N) sum_m ||a_m - b_pi(m)||^p`, for `N <= DEFAULT_EXACT_CAP`.
pub fn exact_wasserstein_small<T: Scalar>(
    a: &PointCloud<T>,
    b: &PointCloud<T>,
    p: CostExponent,
) -> Result<T> {
    exact_wasserstein_small_with_cap(a, b, p, DEFAULT_EXACT_CAP)
}

pub fn exact_wasserstein_small_with_cap<T: Scalar>(
    a: &PointCloud<T>,
    b: &PointCloud<T>,
    p: CostExponent,
    cap: usize,
) -> Result<T> {
    check_same_shape("exact_wasserstein_small", a, b)?;
    let n = a.n();
    if n > cap {
        return Err(Error::CapExceeded { n, cap });
    }
    let mut cost = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            cost[(i, j)] = p.point_cost(a.point(i), b.point(j));
        }
    }
    let (_, total) = min_cost_assignment(&cost)?;
    Ok(total / T::of_usize(n))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        let a = PointCloud::from_rows(&[[0.0, 0.0], [1.0, 0.0]]).unwrap();
        let b = PointCloud::from_rows(&[[1.0, 0.0], [0.0, 0.0]]).unwrap();
        assert_eq!(
            exact_wasserstein_small(&a, &a, CostExponent::Two).unwrap(),
            0.0
        );
        assert_eq!(
            exact_wasserstein_small(&a, &b, CostExponent::Two).unwrap(),
            0.0
        );
    }

    #[test]
    fn assignment_on_known_matrix() {
        let cost = Matrix::from_rows(&[[4.0, 1.0, 3.0], [2.0, 0.0, 5.0], [3.0, 2.0, 2.0]]).unwrap();
        let (assign, total) = min_cost_assignment(&cost).unwrap();
        assert_eq!(total, 5.0);
        assert_eq!(assign, vec![1, 0, 2]);
    }

    #[test]
    fn cap_is_enforced() {
        let a = PointCloud::from_values(&[0.0, 1.0, 2.0]).unwrap();
        let err = exact_wasserstein_small_with_cap(&a, &a, CostExponent::One, 2).unwrap_err();
        assert!(matches!(err, Error::CapExceeded { n: 3, cap: 2 }));
        assert!(err.to_string().contains("sliced_wasserstein"));
    }

    #[test]
    fn rejects_non_square() {
        assert!(min_cost_assignment(&Matrix::<f64>::zeros(2, 3)).is_err());
        assert!(min_cost_assignment(&Matrix::<f64>::zeros(0, 0)).is_err());
    }
}
