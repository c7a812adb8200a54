use serde::{Deserialize, Serialize};

use super::ManifoldSpec;
use crate::error::{Error, Result};

/// Upper bound on parameter cells examined by one overlap measurement.
pub const MAX_OVERLAP_CELLS: usize = 50_000_000;

/// Estimated k-measure of the part of one manifold lying on another.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverlapReport {
    pub overlap_estimate: f64,
    pub resolution: f64,
    pub tau: f64,
    pub shared_cells: usize,
    pub total_cells: usize,
    /// Shared cells with at least one unshared neighbour in parameter space.
    pub boundary_cells: usize,
}

impl OverlapReport {
    /// Overlap well above what boundary discretization alone could produce.
    ///
    /// Tangential contact leaves a shared set of length about `√(8 r τ)`,
    /// which passes this test for small `τ`; compare several resolutions to
    /// tell it apart from a shared arc.
    pub fn is_positively_aligned(&self) -> bool {
        self.overlap_estimate > 10.0 * self.tau * self.boundary_cells as f64
    }
}

/// Default proximity tolerance for a resolution.
pub fn default_tau(resolution: f64) -> f64 {
    10.0 * resolution
}

/// Cell-counting estimate of `L^k(a ∩ b)`.
///
/// `a`'s parameter domain is cut into cells about `resolution` across in
/// the image; a cell counts as shared when its midpoint image lies within
/// `tau` of `b`.
pub fn overlap_measure(
    a: &ManifoldSpec,
    b: &ManifoldSpec,
    resolution: f64,
    tau: f64,
) -> Result<OverlapReport> {
    a.validate()?;
    b.validate()?;
    if a.n() != b.n() {
        return Err(Error::DimensionMismatch {
            expected: a.n(),
            found: b.n(),
        });
    }
    if !(resolution > 0.0 && resolution.is_finite()) {
        return Err(Error::invalid("resolution must be positive"));
    }
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(Error::invalid("tau must be positive"));
    }
    if tau < resolution / 10.0 {
        return Err(Error::invalid(format!(
            "tau {tau:e} is below resolution/10 = {:e}; the proximity test would undersample",
            resolution / 10.0
        )));
    }
    let counts = a.cells_per_axis(resolution);
    let total: usize = counts.iter().product();
    if total > MAX_OVERLAP_CELLS {
        return Err(Error::TooLarge {
            size: total,
            max: MAX_OVERLAP_CELLS,
        });
    }
    let steps: Vec<f64> = counts.iter().map(|&c| 1.0 / c as f64).collect();
    let param_volume: f64 = steps.iter().product();
    let mut shared = vec![false; total];
    let mut estimate = 0.0;
    let mut mid = vec![0.0; counts.len()];
    for (cell, flag) in shared.iter_mut().enumerate() {
        let mut rest = cell;
        for axis in (0..counts.len()).rev() {
            mid[axis] = ((rest % counts[axis]) as f64 + 0.5) * steps[axis];
            rest /= counts[axis];
        }
        if b.distance(&a.point(&mid)) <= tau {
            *flag = true;
            estimate += a.speed(&mid) * param_volume;
        }
    }
    let shared_cells = shared.iter().filter(|&&s| s).count();
    let boundary_cells = count_boundary(&shared, &counts, a.is_closed());
    Ok(OverlapReport {
        overlap_estimate: estimate,
        resolution,
        tau,
        shared_cells,
        total_cells: total,
        boundary_cells,
    })
}

fn count_boundary(shared: &[bool], counts: &[usize], closed: bool) -> usize {
    let neighbour = |cell: usize, axis: usize, forward: bool| -> Option<usize> {
        let stride: usize = counts[axis + 1..].iter().product();
        let idx = (cell / stride) % counts[axis];
        let len = counts[axis];
        let next = match (forward, idx) {
            (true, i) if i + 1 < len => i + 1,
            (true, _) if closed => 0,
            (false, i) if i > 0 => i - 1,
            (false, _) if closed => len - 1,
            _ => return None,
        };
        Some(cell - idx * stride + next * stride)
    };
    (0..shared.len())
        .filter(|&cell| {
            shared[cell]
                && (0..counts.len()).any(|axis| {
                    [true, false]
                        .into_iter()
                        .any(|fwd| neighbour(cell, axis, fwd).is_some_and(|nb| !shared[nb]))
                })
        })
        .count()
}
