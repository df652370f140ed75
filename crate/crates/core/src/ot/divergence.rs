use super::{check_same_shape, CostExponent};
use crate::cloud::PointCloud;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Paired transport cost `(1/N) sum_m ||x_m - y_m||^p`, where `y_m` is the
/// reconstruction of `x_m`. No sorting: the correspondence is given.
pub fn reconstruction_cost<T: Scalar>(
    x: &PointCloud<T>,
    y: &PointCloud<T>,
    p: CostExponent,
) -> Result<T> {
    check_same_shape("reconstruction_cost", x, y)?;
    let sum: T = (0..x.n())
        .map(|m| p.point_cost(x.point(m), y.point(m)))
        .sum();
    Ok(sum / T::of_usize(x.n()))
}

/// Uniform integration grid over `[lo, hi]` with `bins` cells.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub lo: f64,
    pub hi: f64,
    pub bins: usize,
}

impl Grid {
    pub fn new(lo: f64, hi: f64, bins: usize) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite()) || hi <= lo {
            return Err(Error::InvalidArgument(format!(
                "grid bounds must satisfy lo < hi, got [{lo}, {hi}]"
            )));
        }
        if bins < 2 {
            return Err(Error::InvalidArgument(format!(
                "grid needs at least 2 bins, got {bins}"
            )));
        }
        Ok(Self { lo, hi, bins })
    }

    pub fn width(&self) -> f64 {
        (self.hi - self.lo) / self.bins as f64
    }

    /// Cell midpoints.
    pub fn midpoints(&self) -> impl Iterator<Item = f64> + '_ {
        let w = self.width();
        (0..self.bins).map(move |k| self.lo + (k as f64 + 0.5) * w)
    }
}

/// Jensen-Shannon divergence `KL(p, (p+q)/2) + KL(q, (p+q)/2)` in nats,
/// integrated with the midpoint rule on `grid`.
///
/// This is the un-halved form, so disjoint supports give `2 ln 2`. Terms with
/// zero density contribute zero. The result is clamped to `[0, 2 ln 2]`.
pub fn js_divergence_1d<P, Q>(pdf_a: P, pdf_b: Q, grid: Grid) -> Result<f64>
where
    P: Fn(f64) -> f64,
    Q: Fn(f64) -> f64,
{
    let grid = Grid::new(grid.lo, grid.hi, grid.bins)?;
    let w = grid.width();
    let mut total = 0.0;
    for x in grid.midpoints() {
        let pa = pdf_a(x);
        let pb = pdf_b(x);
        if !(pa.is_finite() && pb.is_finite()) || pa < 0.0 || pb < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "densities must be finite and nonnegative (at x = {x}: {pa}, {pb})"
            )));
        }
        let mid = 0.5 * (pa + pb);
        total += (kl_term(pa, mid) + kl_term(pb, mid)) * w;
    }
    Ok(total.clamp(0.0, 2.0 * std::f64::consts::LN_2))
}

fn kl_term(p: f64, m: f64) -> f64 {
    if p > 0.0 {
        p * (p / m).ln()
    } else {
        0.0
    }
}
