//! Equal-mass empirical point clouds and sets of projection directions.

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::linalg::{norm, Matrix};
use crate::scalar::Scalar;

/// `N` samples in `R^d`, each carrying mass `1/N`.
///
/// Construction guarantees `N >= 1`, `d >= 1` and finite coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud<T> {
    points: Matrix<T>,
}

impl<T: Scalar> PointCloud<T> {
    pub fn new(points: Matrix<T>) -> Result<Self> {
        if points.rows() == 0 {
            return Err(Error::Empty("point cloud"));
        }
        if points.cols() == 0 {
            return Err(Error::InvalidArgument(
                "point cloud dimension must be at least 1".into(),
            ));
        }
        if !points.all_finite() {
            return Err(Error::NonFinite("point cloud coordinates".into()));
        }
        Ok(Self { points })
    }

    pub fn from_rows<R: AsRef<[T]>>(rows: &[R]) -> Result<Self> {
        Self::new(Matrix::from_rows(rows)?)
    }

    /// A one-dimensional cloud from plain values.
    pub fn from_values(values: &[T]) -> Result<Self> {
        Self::new(Matrix::from_vec(values.len(), 1, values.to_vec())?)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.points.rows()
    }

    #[inline]
    pub fn d(&self) -> usize {
        self.points.cols()
    }

    #[inline]
    pub fn point(&self, i: usize) -> &[T] {
        self.points.row(i)
    }

    #[inline]
    pub fn points(&self) -> &Matrix<T> {
        &self.points
    }

    pub fn into_matrix(self) -> Matrix<T> {
        self.points
    }

    pub fn select(&self, indices: &[usize]) -> Result<Self> {
        Self::new(self.points.select_rows(indices))
    }

    pub fn cast<U: Scalar>(&self) -> PointCloud<U> {
        let data = self
            .points
            .as_slice()
            .iter()
            .map(|v| U::of(v.as_f64()))
            .collect();
        PointCloud {
            points: Matrix::from_vec(self.n(), self.d(), data).expect("same shape"),
        }
    }

    /// Reads a cloud from CSV: one row per sample, `d` numeric columns and an
    /// optional single header row.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let mut data: Vec<T> = Vec::new();
        let mut cols = None;
        for (line, record) in rdr.records().enumerate() {
            let record = record?;
            let parsed: std::result::Result<Vec<f64>, _> =
                record.iter().map(|f| f.parse::<f64>()).collect();
            let values = match parsed {
                Ok(v) => v,
                Err(_) if line == 0 => continue,
                Err(e) => return Err(Error::InvalidArgument(format!("csv row {}: {e}", line + 1))),
            };
            match cols {
                None => cols = Some(values.len()),
                Some(c) if c != values.len() => {
                    return Err(Error::DimensionMismatch {
                        context: "csv row width",
                        expected: c,
                        actual: values.len(),
                    })
                }
                _ => {}
            }
            data.extend(values.into_iter().map(T::of));
        }
        let cols = cols.ok_or(Error::Empty("csv point cloud"))?;
        Self::new(Matrix::from_vec(data.len() / cols, cols, data)?)
    }

    pub fn load_csv(path: impl AsRef<Path>) -> Result<Self> {
        Self::read_csv(std::fs::File::open(path)?)
    }

    /// Writes the cloud as CSV with 17 significant digits per value.
    pub fn write_csv<W: Write>(&self, writer: W, header: Option<&[&str]>) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        if let Some(h) = header {
            if h.len() != self.d() {
                return Err(Error::DimensionMismatch {
                    context: "csv header",
                    expected: self.d(),
                    actual: h.len(),
                });
            }
            wtr.write_record(h)?;
        }
        for row in self.points.iter_rows() {
            wtr.write_record(row.iter().map(|v| format_sig17(v.as_f64())))?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn save_csv(&self, path: impl AsRef<Path>, header: Option<&[&str]>) -> Result<()> {
        let f = std::fs::File::create(path)?;
        self.write_csv(std::io::BufWriter::new(f), header)
    }
}

/// Formats a value with 17 significant digits, enough to round-trip any `f64`.
pub fn format_sig17(v: f64) -> String {
    format!("{v:.16e}")
}

/// `L` unit directions in `R^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionSet<T> {
    directions: Matrix<T>,
}

impl<T: Scalar> ProjectionSet<T> {
    /// Wraps unit-norm rows; every row must have norm 1 within `1e-12` (`f64`).
    pub fn new(directions: Matrix<T>) -> Result<Self> {
        if directions.rows() == 0 {
            return Err(Error::Empty("projection set"));
        }
        if directions.cols() == 0 {
            return Err(Error::InvalidArgument(
                "projection dimension must be at least 1".into(),
            ));
        }
        if !directions.all_finite() {
            return Err(Error::NonFinite("projection directions".into()));
        }
        let tol = unit_tolerance::<T>(1e-12);
        for (index, row) in directions.iter_rows().enumerate() {
            let n = norm(row);
            if (n - T::one()).abs() > tol {
                return Err(Error::NotUnit {
                    index,
                    norm: n.as_f64(),
                });
            }
        }
        Ok(Self { directions })
    }

    /// Normalizes every row before wrapping; zero rows are rejected.
    pub fn normalized(mut directions: Matrix<T>) -> Result<Self> {
        for i in 0..directions.rows() {
            let row = directions.row_mut(i);
            let n = norm(row);
            if n == T::zero() || !n.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "direction {i} cannot be normalized"
                )));
            }
            row.iter_mut().for_each(|v| *v = *v / n);
        }
        Self::new(directions)
    }

    pub fn from_rows<R: AsRef<[T]>>(rows: &[R]) -> Result<Self> {
        Self::new(Matrix::from_rows(rows)?)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.directions.rows()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.directions.rows() == 0
    }

    #[inline]
    pub fn d(&self) -> usize {
        self.directions.cols()
    }

    #[inline]
    pub fn direction(&self, l: usize) -> &[T] {
        self.directions.row(l)
    }

    pub fn iter(&self) -> impl Iterator<Item = &[T]> + '_ {
        self.directions.iter_rows()
    }

    pub fn directions(&self) -> &Matrix<T> {
        &self.directions
    }
}

/// Unit-norm tolerance: `base` for `f64`, widened to the precision of narrower types.
pub(crate) fn unit_tolerance<T: Scalar>(base: f64) -> T {
    T::of(base).max(T::epsilon() * T::of(64.0))
}
