use ndarray::Array2;
use rand::distr::weighted::WeightedIndex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::ManifoldSpec;
use crate::error::{Error, Result};
use crate::transport::EmpiricalDistribution;

/// Largest distance from the chart at which a point still counts as on it.
pub const ON_MANIFOLD_TOLERANCE: f64 = 1e-9;

/// How parameters are drawn by [`sample_manifold`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "density", rename_all = "snake_case", deny_unknown_fields)]
pub enum SamplingDensity {
    /// Uniform with respect to the k-measure of the image.
    Uniform,
    /// Gaussian bumps in normalized parameter space: mode `c` is picked with
    /// probability `weights[c]`, then the parameter is `modes[c] + width·ξ`,
    /// wrapped on closed curves and redrawn when it leaves `[0, 1]^k`
    /// otherwise.
    Mixture {
        modes: Vec<Vec<f64>>,
        weights: Vec<f64>,
        width: f64,
    },
}

/// `count` i.i.d. points on the chart image with uniform weights.
pub fn sample_manifold(
    m: &ManifoldSpec,
    count: usize,
    density: &SamplingDensity,
    seed: u64,
) -> Result<EmpiricalDistribution> {
    m.validate()?;
    if count == 0 {
        return Err(Error::invalid("sample count must be at least 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = m.k();
    let params: Vec<Vec<f64>> = match density {
        SamplingDensity::Uniform => {
            let max_speed = m.max_speed();
            (0..count)
                .map(|_| loop {
                    let p: Vec<f64> = (0..k).map(|_| rng.random::<f64>()).collect();
                    // Rejection on the chart speed; constant-speed charts
                    // always accept.
                    if m.speed(&p) >= max_speed || rng.random::<f64>() * max_speed < m.speed(&p) {
                        break p;
                    }
                })
                .collect()
        }
        SamplingDensity::Mixture {
            modes,
            weights,
            width,
        } => {
            if modes.is_empty() || modes.len() != weights.len() {
                return Err(Error::invalid("mixture needs one weight per mode"));
            }
            if modes.iter().any(|c| c.len() != k) {
                return Err(Error::invalid(format!(
                    "mixture modes must have {k} parameter coordinates"
                )));
            }
            if !(*width > 0.0 && width.is_finite()) {
                return Err(Error::invalid("mixture width must be positive"));
            }
            let pick = WeightedIndex::new(weights)
                .map_err(|e| Error::invalid(format!("mixture weights: {e}")))?;
            let closed = m.is_closed();
            (0..count)
                .map(|_| {
                    let c = pick.sample(&mut rng);
                    loop {
                        let p: Vec<f64> = modes[c]
                            .iter()
                            .map(|&mu| {
                                let z: f64 = rng.sample(StandardNormal);
                                mu + width * z
                            })
                            .collect();
                        if closed {
                            break p.into_iter().map(|t| t.rem_euclid(1.0)).collect();
                        }
                        if p.iter().all(|t| (0.0..=1.0).contains(t)) {
                            break p;
                        }
                    }
                })
                .collect()
        }
    };
    let n = m.n();
    let flat: Vec<f64> = params.iter().flat_map(|p| m.point(p)).collect();
    let points =
        Array2::from_shape_vec((count, n), flat).map_err(|e| Error::invalid(e.to_string()))?;
    EmpiricalDistribution::uniform(points)
}

/// A uniformly random vector in the closed `delta`-ball of the ambient space
/// shared by `a` and `b`.
///
/// Almost every such offset puts the translated pair in general position;
/// callers confirm this by refining [`super::overlap_measure`] and redraw
/// with a new seed in the rare event it fails.
pub fn sample_transversal_offset(
    delta: f64,
    a: &ManifoldSpec,
    b: &ManifoldSpec,
    seed: u64,
) -> Result<Vec<f64>> {
    if a.n() != b.n() {
        return Err(Error::DimensionMismatch {
            expected: a.n(),
            found: b.n(),
        });
    }
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::invalid("delta must be positive"));
    }
    let n = a.n();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dir: Vec<f64> = loop {
        let g: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let len = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        if len > 0.0 {
            break g.into_iter().map(|v| v / len).collect();
        }
    };
    let radius = delta * rng.random::<f64>().powf(1.0 / n as f64);
    Ok(dir.into_iter().map(|v| v * radius).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Perturbation {
    OnManifold,
    OffManifold,
}

/// Whether `x + eps` stays within `tol` of the manifold. `x` itself must be
/// on it.
pub fn classify_perturbation(
    m: &ManifoldSpec,
    x: &[f64],
    eps: &[f64],
    tol: f64,
) -> Result<Perturbation> {
    if x.len() != m.n() || eps.len() != m.n() {
        return Err(Error::DimensionMismatch {
            expected: m.n(),
            found: if x.len() != m.n() { x.len() } else { eps.len() },
        });
    }
    let distance = m.distance(x);
    if distance > ON_MANIFOLD_TOLERANCE {
        return Err(Error::NotOnManifold { distance });
    }
    let moved: Vec<f64> = x.iter().zip(eps).map(|(a, b)| a + b).collect();
    Ok(if m.distance(&moved) <= tol {
        Perturbation::OnManifold
    } else {
        Perturbation::OffManifold
    })
}
