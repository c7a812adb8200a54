use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::transport::EmpiricalDistribution;

/// Parametric generators (pushforward maps) and explicit model densities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum GeneratorFamily {
    /// `G(z) = A z + b`, θ = `A` row-major (`ambient × latent`) then `b`.
    AffinePushforward {
        latent_dim: usize,
        ambient_dim: usize,
    },
    /// `G(z) = z + θ`.
    Shift { dim: usize },
    /// Latent `(u, ε)` with `u ∈ [0, 1)` choosing one of `components`
    /// equally likely components and `ε ∈ R^dim`;
    /// `G(u, ε) = μ_c + softplus(s_c) ε`. θ = means (component-major) then
    /// raw scales.
    MixturePushforward { components: usize, dim: usize },
    /// Density `Σ_c π_c N(x; μ_c, σ_c² I)` with `π = softmax(logits)` and
    /// `σ_c = softplus(s_c)`. θ = logits, means (component-major), raw scales.
    GaussianMixtureDensity { components: usize, dim: usize },
}

pub fn softplus(s: f64) -> f64 {
    if s > 30.0 {
        s
    } else {
        s.exp().ln_1p()
    }
}

/// Inverse of [`softplus`] for positive arguments.
pub fn softplus_inverse(y: f64) -> f64 {
    if y > 30.0 {
        y
    } else {
        y.exp_m1().ln()
    }
}

fn sigmoid(s: f64) -> f64 {
    1.0 / (1.0 + (-s).exp())
}

impl GeneratorFamily {
    pub fn param_len(&self) -> usize {
        match *self {
            GeneratorFamily::AffinePushforward {
                latent_dim,
                ambient_dim,
            } => ambient_dim * latent_dim + ambient_dim,
            GeneratorFamily::Shift { dim } => dim,
            GeneratorFamily::MixturePushforward { components, dim } => components * (dim + 1),
            GeneratorFamily::GaussianMixtureDensity { components, dim } => components * (dim + 2),
        }
    }

    pub fn ambient_dim(&self) -> usize {
        match *self {
            GeneratorFamily::AffinePushforward { ambient_dim, .. } => ambient_dim,
            GeneratorFamily::Shift { dim }
            | GeneratorFamily::MixturePushforward { dim, .. }
            | GeneratorFamily::GaussianMixtureDensity { dim, .. } => dim,
        }
    }

    /// Latent dimension of pushforward families; `None` for densities.
    pub fn latent_dim(&self) -> Option<usize> {
        match *self {
            GeneratorFamily::AffinePushforward { latent_dim, .. } => Some(latent_dim),
            GeneratorFamily::Shift { dim } => Some(dim),
            GeneratorFamily::MixturePushforward { dim, .. } => Some(dim + 1),
            GeneratorFamily::GaussianMixtureDensity { .. } => None,
        }
    }

    pub fn is_pushforward(&self) -> bool {
        self.latent_dim().is_some()
    }

    /// Rejects empty shapes and θ of the wrong length or with non-finite
    /// entries.
    pub fn check_theta(&self, theta: &[f64]) -> Result<()> {
        let shape_ok = match *self {
            GeneratorFamily::AffinePushforward {
                latent_dim,
                ambient_dim,
            } => latent_dim > 0 && ambient_dim > 0,
            GeneratorFamily::Shift { dim } => dim > 0,
            GeneratorFamily::MixturePushforward { components, dim }
            | GeneratorFamily::GaussianMixtureDensity { components, dim } => {
                components > 0 && dim > 0
            }
        };
        if !shape_ok {
            return Err(Error::invalid(format!("degenerate family {self:?}")));
        }
        if theta.len() != self.param_len() {
            return Err(Error::DimensionMismatch {
                expected: self.param_len(),
                found: theta.len(),
            });
        }
        if theta.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("theta".into()));
        }
        Ok(())
    }

    fn require_pushforward(&self) -> Result<usize> {
        self.latent_dim()
            .ok_or_else(|| Error::invalid(format!("{self:?} is a density family, not a generator")))
    }

    fn mixture_component(u: f64, components: usize) -> usize {
        ((u * components as f64).floor().max(0.0) as usize).min(components - 1)
    }

    /// `G_θ(z)`.
    pub fn apply(&self, theta: &[f64], z: &[f64]) -> Vec<f64> {
        match *self {
            GeneratorFamily::AffinePushforward {
                latent_dim,
                ambient_dim,
            } => (0..ambient_dim)
                .map(|r| {
                    let row = &theta[r * latent_dim..(r + 1) * latent_dim];
                    let b = theta[ambient_dim * latent_dim + r];
                    row.iter().zip(z).map(|(a, x)| a * x).sum::<f64>() + b
                })
                .collect(),
            GeneratorFamily::Shift { .. } => z.iter().zip(theta).map(|(a, b)| a + b).collect(),
            GeneratorFamily::MixturePushforward { components, dim } => {
                let c = Self::mixture_component(z[0], components);
                let mean = &theta[c * dim..(c + 1) * dim];
                let scale = softplus(theta[components * dim + c]);
                mean.iter()
                    .zip(&z[1..])
                    .map(|(m, e)| m + scale * e)
                    .collect()
            }
            GeneratorFamily::GaussianMixtureDensity { .. } => {
                unreachable!("density families have no pushforward map")
            }
        }
    }

    /// `∂G_θ(z)/∂θ` as an `ambient × param_len` matrix.
    pub fn jacobian(&self, theta: &[f64], z: &[f64]) -> Array2<f64> {
        let mut jac = Array2::zeros((self.ambient_dim(), self.param_len()));
        match *self {
            GeneratorFamily::AffinePushforward {
                latent_dim,
                ambient_dim,
            } => {
                for r in 0..ambient_dim {
                    for c in 0..latent_dim {
                        jac[[r, r * latent_dim + c]] = z[c];
                    }
                    jac[[r, ambient_dim * latent_dim + r]] = 1.0;
                }
            }
            GeneratorFamily::Shift { dim } => {
                for r in 0..dim {
                    jac[[r, r]] = 1.0;
                }
            }
            GeneratorFamily::MixturePushforward { components, dim } => {
                let c = Self::mixture_component(z[0], components);
                let raw = theta[components * dim + c];
                for r in 0..dim {
                    jac[[r, c * dim + r]] = 1.0;
                    jac[[r, components * dim + c]] = sigmoid(raw) * z[1 + r];
                }
            }
            GeneratorFamily::GaussianMixtureDensity { .. } => {
                unreachable!("density families have no pushforward map")
            }
        }
        jac
    }

    /// Standard latents for the family: Gaussian `z`, or `(u, ε)` with
    /// `u` uniform for the mixture pushforward.
    pub fn sample_latents(&self, count: usize, seed: u64) -> Result<Array2<f64>> {
        let d = self.require_pushforward()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mixture = matches!(self, GeneratorFamily::MixturePushforward { .. });
        Ok(Array2::from_shape_fn((count, d), |(_, c)| {
            if mixture && c == 0 {
                rng.random::<f64>()
            } else {
                rng.sample(StandardNormal)
            }
        }))
    }

    /// Mixture weights, means and scales of the density family.
    fn mixture_parts<'a>(&self, theta: &'a [f64]) -> (Vec<f64>, Vec<&'a [f64]>, Vec<f64>) {
        let GeneratorFamily::GaussianMixtureDensity { components, dim } = *self else {
            unreachable!("only the density family has mixture parts")
        };
        let logits = &theta[..components];
        let top = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let e: Vec<f64> = logits.iter().map(|l| (l - top).exp()).collect();
        let total: f64 = e.iter().sum();
        let weights = e.into_iter().map(|v| v / total).collect();
        let means = (0..components)
            .map(|c| &theta[components + c * dim..components + (c + 1) * dim])
            .collect();
        let scales = theta[components * (1 + dim)..]
            .iter()
            .map(|&s| softplus(s))
            .collect();
        (weights, means, scales)
    }

    /// Per-component `log(π_c N(x; μ_c, σ_c² I))`.
    fn component_logs(&self, theta: &[f64], x: &[f64]) -> Vec<f64> {
        let (weights, means, scales) = self.mixture_parts(theta);
        let d = x.len() as f64;
        weights
            .iter()
            .zip(means.iter().zip(&scales))
            .map(|(w, (mu, s))| {
                let sq: f64 = x
                    .iter()
                    .zip(mu.iter())
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum();
                w.ln() - 0.5 * sq / (s * s) - d * s.ln() - 0.5 * d * std::f64::consts::TAU.ln()
            })
            .collect()
    }

    /// `log q_θ(x)` for the density family.
    pub fn log_density(&self, theta: &[f64], x: &[f64]) -> Result<f64> {
        self.require_density(x)?;
        let logs = self.component_logs(theta, x);
        let top = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        Ok(top + logs.iter().map(|l| (l - top).exp()).sum::<f64>().ln())
    }

    /// `∇_θ log q_θ(x)` for the density family.
    pub fn grad_log_density(&self, theta: &[f64], x: &[f64]) -> Result<Vec<f64>> {
        self.require_density(x)?;
        let GeneratorFamily::GaussianMixtureDensity { components, dim } = *self else {
            unreachable!()
        };
        let (weights, means, scales) = self.mixture_parts(theta);
        let logs = self.component_logs(theta, x);
        let top = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let e: Vec<f64> = logs.iter().map(|l| (l - top).exp()).collect();
        let total: f64 = e.iter().sum();
        let resp: Vec<f64> = e.iter().map(|v| v / total).collect();

        let mut grad = vec![0.0; self.param_len()];
        for c in 0..components {
            grad[c] = resp[c] - weights[c];
            let s2 = scales[c] * scales[c];
            let mut sq = 0.0;
            for a in 0..dim {
                let diff = x[a] - means[c][a];
                sq += diff * diff;
                grad[components + c * dim + a] = resp[c] * diff / s2;
            }
            let raw = theta[components * (1 + dim) + c];
            let d_sigma = resp[c] * (sq / (s2 * scales[c]) - dim as f64 / scales[c]);
            grad[components * (1 + dim) + c] = d_sigma * sigmoid(raw);
        }
        Ok(grad)
    }

    fn require_density(&self, x: &[f64]) -> Result<()> {
        match *self {
            GeneratorFamily::GaussianMixtureDensity { dim, .. } if dim == x.len() => Ok(()),
            GeneratorFamily::GaussianMixtureDensity { dim, .. } => Err(Error::DimensionMismatch {
                expected: dim,
                found: x.len(),
            }),
            _ => Err(Error::invalid(format!(
                "{self:?} has no closed-form density"
            ))),
        }
    }
}

/// Uniform-weight cloud of `G_θ(z_j)` over the latent rows.
pub fn pushforward(
    family: &GeneratorFamily,
    theta: &[f64],
    latents: &Array2<f64>,
) -> Result<EmpiricalDistribution> {
    let d = family.require_pushforward()?;
    family.check_theta(theta)?;
    if latents.ncols() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: latents.ncols(),
        });
    }
    let n = family.ambient_dim();
    let flat: Vec<f64> = latents
        .rows()
        .into_iter()
        .flat_map(|z| family.apply(theta, &z.to_vec()))
        .collect();
    let points = Array2::from_shape_vec((latents.nrows(), n), flat)
        .map_err(|e| Error::invalid(e.to_string()))?;
    EmpiricalDistribution::uniform(points)
}
