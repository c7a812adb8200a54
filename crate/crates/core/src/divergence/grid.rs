use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::transport::EmpiricalDistribution;

/// Histogram density on an axis-aligned box, `d ∈ {1, 2, 3}`.
///
/// Masses are stored row-major (last axis fastest) and sum to one.
#[derive(Debug, Clone, PartialEq)]
pub struct GridDensity {
    bounds: Vec<(f64, f64)>,
    shape: Vec<usize>,
    masses: Vec<f64>,
}

pub const GRID_MASS_TOLERANCE: f64 = 1e-12;

fn check_layout(bounds: &[(f64, f64)], shape: &[usize]) -> Result<usize> {
    if bounds.len() != shape.len() {
        return Err(Error::DimensionMismatch {
            expected: bounds.len(),
            found: shape.len(),
        });
    }
    if !(1..=3).contains(&shape.len()) {
        return Err(Error::invalid(format!(
            "grid dimension must be 1, 2 or 3, got {}",
            shape.len()
        )));
    }
    for &(lo, hi) in bounds {
        if !(lo.is_finite() && hi.is_finite() && hi > lo) {
            return Err(Error::invalid(format!("bad axis range {lo}:{hi}")));
        }
    }
    if shape.contains(&0) {
        return Err(Error::invalid("every axis needs at least one cell"));
    }
    Ok(shape.iter().product())
}

impl GridDensity {
    pub fn new(bounds: Vec<(f64, f64)>, shape: Vec<usize>, masses: Vec<f64>) -> Result<Self> {
        let cells = check_layout(&bounds, &shape)?;
        if masses.len() != cells {
            return Err(Error::DimensionMismatch {
                expected: cells,
                found: masses.len(),
            });
        }
        if masses.iter().any(|m| !m.is_finite() || *m < 0.0) {
            return Err(Error::invalid("cell masses must be finite and nonnegative"));
        }
        let total: f64 = masses.iter().sum();
        if (total - 1.0).abs() > GRID_MASS_TOLERANCE {
            return Err(Error::invalid(format!("cell masses sum to {total}")));
        }
        Ok(Self {
            bounds,
            shape,
            masses,
        })
    }

    /// Rescales nonnegative masses to unit total.
    pub fn from_unnormalized(
        bounds: Vec<(f64, f64)>,
        shape: Vec<usize>,
        mut masses: Vec<f64>,
    ) -> Result<Self> {
        let total: f64 = masses.iter().sum();
        if !(total.is_finite() && total > 0.0) {
            return Err(Error::invalid("masses must have positive finite total"));
        }
        masses.iter_mut().for_each(|m| *m /= total);
        Self::new(bounds, shape, masses)
    }

    /// Cell masses `density(midpoint) · cell_volume`, renormalized.
    pub fn from_density(
        bounds: Vec<(f64, f64)>,
        shape: Vec<usize>,
        density: impl Fn(&[f64]) -> f64,
    ) -> Result<Self> {
        let cells = check_layout(&bounds, &shape)?;
        let probe = Self {
            bounds,
            shape,
            masses: Vec::new(),
        };
        let vol = probe.cell_volume();
        let masses = (0..cells)
            .map(|c| density(&probe.midpoint(c)) * vol)
            .collect();
        Self::from_unnormalized(probe.bounds, probe.shape, masses)
    }

    pub fn dim(&self) -> usize {
        self.shape.len()
    }

    pub fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn len(&self) -> usize {
        self.masses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masses.is_empty()
    }

    pub fn cell_width(&self, axis: usize) -> f64 {
        let (lo, hi) = self.bounds[axis];
        (hi - lo) / self.shape[axis] as f64
    }

    pub fn cell_volume(&self) -> f64 {
        (0..self.dim()).map(|a| self.cell_width(a)).product()
    }

    /// Per-axis indices of flat cell `cell`.
    pub fn unravel(&self, mut cell: usize) -> Vec<usize> {
        let mut idx = vec![0; self.dim()];
        for a in (0..self.dim()).rev() {
            idx[a] = cell % self.shape[a];
            cell /= self.shape[a];
        }
        idx
    }

    pub fn ravel(&self, idx: &[usize]) -> usize {
        idx.iter()
            .zip(&self.shape)
            .fold(0, |flat, (&i, &s)| flat * s + i)
    }

    pub fn midpoint(&self, cell: usize) -> Vec<f64> {
        self.unravel(cell)
            .iter()
            .enumerate()
            .map(|(a, &i)| self.bounds[a].0 + (i as f64 + 0.5) * self.cell_width(a))
            .collect()
    }

    /// Cell containing `x`, or `None` outside the closed box.
    pub fn locate(&self, x: &[f64]) -> Option<usize> {
        if x.len() != self.dim() {
            return None;
        }
        let mut idx = Vec::with_capacity(self.dim());
        for (a, &v) in x.iter().enumerate() {
            let (lo, hi) = self.bounds[a];
            if !(v >= lo && v <= hi) {
                return None;
            }
            let k = ((v - lo) / (hi - lo) * self.shape[a] as f64).floor() as usize;
            idx.push(k.min(self.shape[a] - 1));
        }
        Some(self.ravel(&idx))
    }

    pub fn same_grid(&self, other: &GridDensity) -> bool {
        self.bounds == other.bounds && self.shape == other.shape
    }

    pub(crate) fn check_same(&self, other: &GridDensity) -> Result<()> {
        if self.same_grid(other) {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    /// Same box and shape with new masses (validated).
    pub fn with_masses(&self, masses: Vec<f64>) -> Result<Self> {
        Self::new(self.bounds.clone(), self.shape.clone(), masses)
    }

    /// Text form: a `# box=lo:hi,...;shape=s,...` header, then one mass per line.
    pub fn to_text(&self) -> String {
        let bx: Vec<String> = self
            .bounds
            .iter()
            .map(|(lo, hi)| format!("{lo:?}:{hi:?}"))
            .collect();
        let sh: Vec<String> = self.shape.iter().map(|s| s.to_string()).collect();
        let mut out = format!("# box={};shape={}\n", bx.join(","), sh.join(","));
        for m in &self.masses {
            let _ = writeln!(out, "{m:?}");
        }
        out
    }

    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines
            .next()
            .ok_or_else(|| Error::parse(format!("{origin}:1"), "empty grid file"))?;
        let at = |line: usize| format!("{origin}:{}", line + 1);
        let spec = header
            .strip_prefix('#')
            .map(str::trim)
            .ok_or_else(|| Error::parse(at(0), "expected `# box=...;shape=...` header"))?;
        let (mut bounds, mut shape) = (None, None);
        for part in spec.split(';') {
            let (key, value) = part
                .split_once('=')
                .ok_or_else(|| Error::parse(at(0), format!("malformed header field `{part}`")))?;
            match key.trim() {
                "box" => {
                    let axes: Result<Vec<(f64, f64)>> = value
                        .split(',')
                        .map(|r| {
                            let (lo, hi) = r.split_once(':').ok_or_else(|| {
                                Error::parse(at(0), format!("axis range `{r}` lacks `:`"))
                            })?;
                            let num = |s: &str| {
                                s.trim().parse::<f64>().map_err(|_| {
                                    Error::parse(at(0), format!("`{s}` is not a number"))
                                })
                            };
                            Ok((num(lo)?, num(hi)?))
                        })
                        .collect();
                    bounds = Some(axes?);
                }
                "shape" => {
                    let dims: Result<Vec<usize>> = value
                        .split(',')
                        .map(|s| {
                            s.trim().parse::<usize>().map_err(|_| {
                                Error::parse(at(0), format!("`{s}` is not a cell count"))
                            })
                        })
                        .collect();
                    shape = Some(dims?);
                }
                other => return Err(Error::parse(at(0), format!("unknown header key `{other}`"))),
            }
        }
        let bounds = bounds.ok_or_else(|| Error::parse(at(0), "header lacks `box`"))?;
        let shape = shape.ok_or_else(|| Error::parse(at(0), "header lacks `shape`"))?;
        let mut masses = Vec::new();
        for (line, raw) in lines {
            let raw = raw.trim();
            if raw.is_empty() {
                continue;
            }
            let m: f64 = raw
                .parse()
                .map_err(|_| Error::parse(at(line), format!("`{raw}` is not a number")))?;
            masses.push(m);
        }
        Self::new(bounds, shape, masses).map_err(|e| Error::parse(origin, e.to_string()))
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }
}

/// Bins weighted samples. Every sample must lie in the closed box.
pub fn histogram(
    samples: &EmpiricalDistribution,
    bounds: &[(f64, f64)],
    shape: &[usize],
) -> Result<GridDensity> {
    let cells = check_layout(bounds, shape)?;
    if samples.dim() != bounds.len() {
        return Err(Error::DimensionMismatch {
            expected: bounds.len(),
            found: samples.dim(),
        });
    }
    let mut grid = GridDensity {
        bounds: bounds.to_vec(),
        shape: shape.to_vec(),
        masses: vec![0.0; cells],
    };
    for (index, (row, &w)) in samples
        .points()
        .rows()
        .into_iter()
        .zip(samples.weights().iter())
        .enumerate()
    {
        let x: Vec<f64> = row.to_vec();
        let cell = grid.locate(&x).ok_or(Error::OutOfBox { index })?;
        grid.masses[cell] += w;
    }
    let masses = std::mem::take(&mut grid.masses);
    GridDensity::from_unnormalized(grid.bounds, grid.shape, masses)
}
