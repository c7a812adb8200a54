use ndarray::{Array1, Array2, ArrayView1, Axis};

use crate::error::{Error, Result};

/// Atoms lighter than this are dropped on construction.
pub const MIN_ATOM_WEIGHT: f64 = 1e-15;

/// Tolerance on the total mass of a distribution.
pub const MASS_TOLERANCE: f64 = 1e-12;

/// A weighted point cloud in `R^n`.
///
/// Rows of `points` are atoms; `weights` sum to one.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalDistribution {
    points: Array2<f64>,
    weights: Array1<f64>,
}

impl EmpiricalDistribution {
    /// Builds a distribution from explicit weights that already sum to one.
    ///
    /// Atoms with weight below [`MIN_ATOM_WEIGHT`] are removed and the
    /// remaining weights renormalized.
    pub fn new(points: Array2<f64>, weights: Array1<f64>) -> Result<Self> {
        if points.nrows() != weights.len() {
            return Err(Error::DimensionMismatch {
                expected: points.nrows(),
                found: weights.len(),
            });
        }
        if points.nrows() == 0 {
            return Err(Error::invalid("distribution needs at least one atom"));
        }
        if points.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("point coordinates".into()));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::invalid("weights must be finite and nonnegative"));
        }
        let total: f64 = weights.sum();
        if (total - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::invalid(format!(
                "weights sum to {total}, expected 1"
            )));
        }
        Self::drop_light_atoms(points, weights)
    }

    /// Uniform weights `1/N`.
    pub fn uniform(points: Array2<f64>) -> Result<Self> {
        let n = points.nrows();
        if n == 0 {
            return Err(Error::invalid("distribution needs at least one atom"));
        }
        Self::new(points, Array1::from_elem(n, 1.0 / n as f64))
    }

    /// Normalizes arbitrary nonnegative weights to unit mass.
    pub fn from_unnormalized(points: Array2<f64>, weights: Array1<f64>) -> Result<Self> {
        let total: f64 = weights.sum();
        if !(total.is_finite() && total > 0.0) {
            return Err(Error::invalid("weights must have positive finite total"));
        }
        Self::new(points, weights / total)
    }

    /// A single atom at `point`.
    pub fn dirac(point: &[f64]) -> Result<Self> {
        let pts = Array2::from_shape_vec((1, point.len()), point.to_vec())
            .map_err(|e| Error::invalid(e.to_string()))?;
        Self::uniform(pts)
    }

    fn drop_light_atoms(points: Array2<f64>, weights: Array1<f64>) -> Result<Self> {
        if weights.iter().all(|&w| w >= MIN_ATOM_WEIGHT) {
            return Ok(Self { points, weights });
        }
        let keep: Vec<usize> = (0..weights.len())
            .filter(|&i| weights[i] >= MIN_ATOM_WEIGHT)
            .collect();
        if keep.is_empty() {
            return Err(Error::invalid("all atoms have negligible weight"));
        }
        let points = points.select(Axis(0), &keep);
        let kept = weights.select(Axis(0), &keep);
        let total = kept.sum();
        Ok(Self {
            points,
            weights: kept / total,
        })
    }

    pub fn len(&self) -> usize {
        self.points.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.points.nrows() == 0
    }

    /// Ambient dimension.
    pub fn dim(&self) -> usize {
        self.points.ncols()
    }

    pub fn points(&self) -> &Array2<f64> {
        &self.points
    }

    pub fn weights(&self) -> &Array1<f64> {
        &self.weights
    }

    pub fn point(&self, i: usize) -> ArrayView1<'_, f64> {
        self.points.row(i)
    }

    /// True when all weights are equal (to within rounding).
    pub fn is_uniform(&self) -> bool {
        let w0 = 1.0 / self.len() as f64;
        self.weights.iter().all(|w| (w - w0).abs() <= 1e-14)
    }

    /// Shifts every atom by `t`.
    pub fn translate(&self, t: &[f64]) -> Result<Self> {
        if t.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: t.len(),
            });
        }
        let shift = ArrayView1::from(t);
        let mut points = self.points.clone();
        for mut row in points.rows_mut() {
            row += &shift;
        }
        Ok(Self {
            points,
            weights: self.weights.clone(),
        })
    }
}
