use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::manifolds::{positively_aligned_pairs, ManifoldPair};
use crate::transport::Ground;

/// Top-level experiment file. Every section is optional and falls back to
/// its defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Base seed, overridden by a command-line seed.
    pub seed: Option<u64>,
    pub mcs_sweep: McsSweepConfig,
    pub translation: TranslationConfig,
    pub gradient_audit: GradientAuditConfig,
    pub toy_training: ToyTrainingConfig,
}

impl ExperimentConfig {
    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| {
            let location = match e.span() {
                Some(span) => {
                    let line = text[..span.start].matches('\n').count() + 1;
                    format!("{origin}:{line}")
                }
                None => origin.to_string(),
            };
            Error::Parse {
                location,
                message: e.message().to_string(),
            }
        })
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, &path.display().to_string())
    }
}

/// Hex SHA-256 of the TOML rendering of `settings` and the seed.
pub fn config_hash<T: Serialize>(settings: &T, seed: u64) -> String {
    let text = toml::to_string(settings).unwrap_or_default();
    let mut h = Sha256::new();
    h.update(text.as_bytes());
    h.update(seed.to_le_bytes());
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

/// Decorrelated child seed `index` of stream `stream` (splitmix64 finalizer).
pub fn derive_seed(base: u64, stream: u64, index: u64) -> u64 {
    let mut z = base
        .wrapping_add(stream.wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add(index.wrapping_mul(0xD1B5_4A32_D192_ED69));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Overlap-fraction family on `[0, 2]`: `P_r` uniform on `[0, 1]`,
/// `Q_ρ = ρ · Unif(S) + (1 − ρ) · Unif([1, 2])` with `S` the leading
/// `shared_fraction` of `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct McsSweepConfig {
    pub experiment_id: String,
    /// Total grid cells; must be even.
    pub cells: usize,
    pub shared_fraction: f64,
    /// Number of evenly spaced ρ values in `[0, 1]`.
    pub rho_points: usize,
    /// Number of evenly spaced α values in `[0, log 2]`.
    pub alpha_points: usize,
    pub jsd_tolerance: f64,
    /// Samples per side for the discriminator-distance scatter; 0 skips it.
    pub f_distance_samples: usize,
    pub logistic_features: usize,
    pub logistic_steps: usize,
    /// Reverses the family (`ρ ↦ 1 − ρ`) so the monotonicity checks must fail.
    pub negative_control: bool,
}

impl Default for McsSweepConfig {
    fn default() -> Self {
        Self {
            experiment_id: "mcs_sweep".into(),
            cells: 64,
            shared_fraction: 1.0,
            rho_points: 21,
            alpha_points: 20,
            jsd_tolerance: 1e-9,
            f_distance_samples: 200,
            logistic_features: 8,
            logistic_steps: 300,
            negative_control: false,
        }
    }
}

/// One manifold pair together with the closeness bound it must satisfy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranslationPair {
    #[serde(flatten)]
    pub pair: ManifoldPair,
    /// Required bound on `W_p(P_r, Q)` before and after translation.
    pub epsilon: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TranslationConfig {
    pub experiment_id: String,
    pub pairs: Vec<TranslationPair>,
    pub deltas: Vec<f64>,
    pub offset_seeds: usize,
    pub samples: usize,
    pub p: u32,
    pub ground: Ground,
    /// Refinement schedule, coarse to fine.
    pub resolutions: Vec<f64>,
    /// `tau = tau_factor × resolution`; at least 0.1.
    pub tau_factor: f64,
    pub max_retries: usize,
    pub w_tolerance: f64,
}

impl Default for TranslationConfig {
    fn default() -> Self {
        let epsilon = |name: &str| match name {
            "coincident_circles" => 0.5,
            "quarter_arcs" => 2.0,
            _ => 1.0,
        };
        Self {
            experiment_id: "translation_density".into(),
            pairs: positively_aligned_pairs()
                .into_iter()
                .map(|pair| TranslationPair {
                    epsilon: epsilon(&pair.name),
                    pair,
                })
                .collect(),
            deltas: vec![1e-2, 1e-3, 1e-4],
            offset_seeds: 10,
            samples: 100,
            p: 2,
            ground: Ground::Euclidean,
            resolutions: vec![1e-2, 1e-3, 1e-4],
            tau_factor: 0.1,
            max_retries: 20,
            w_tolerance: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GradientAuditConfig {
    pub experiment_id: String,
    pub ot_samples: usize,
    pub ot_dim: usize,
    pub ot_seeds: usize,
    pub density_cells: usize,
    pub density_box: (f64, f64),
    pub density_components: usize,
    pub density_draws: usize,
    pub identity_draws: usize,
    pub ot_tolerance: f64,
    pub density_tolerance: f64,
    pub identity_tolerance: f64,
    pub single_atom_tolerance: f64,
}

impl Default for GradientAuditConfig {
    fn default() -> Self {
        Self {
            experiment_id: "gradient_audit".into(),
            ot_samples: 50,
            ot_dim: 2,
            ot_seeds: 20,
            density_cells: 4096,
            density_box: (-8.0, 9.0),
            density_components: 2,
            density_draws: 20,
            identity_draws: 10,
            ot_tolerance: 1e-3,
            density_tolerance: 1e-4,
            identity_tolerance: 1e-6,
            single_atom_tolerance: 1e-7,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Loss {
    W1,
    W2sq,
    Jsd,
    NegLogD,
}

impl Loss {
    pub fn name(&self) -> &'static str {
        match self {
            Loss::W1 => "w1",
            Loss::W2sq => "w2sq",
            Loss::Jsd => "jsd",
            Loss::NegLogD => "neg_log_d",
        }
    }

    pub fn uses_transport(&self) -> bool {
        matches!(self, Loss::W1 | Loss::W2sq)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Init {
    /// Component means drawn around the origin.
    Random,
    /// Means on the target modes with vanishing spread.
    Target,
}

/// Gradient-descent step per loss.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StepSizes {
    pub w1: f64,
    pub w2sq: f64,
    pub jsd: f64,
    pub neg_log_d: f64,
}

impl Default for StepSizes {
    fn default() -> Self {
        Self {
            w1: 0.5,
            w2sq: 0.5,
            jsd: 1.0,
            neg_log_d: 0.1,
        }
    }
}

impl StepSizes {
    pub fn get(&self, loss: Loss) -> f64 {
        match loss {
            Loss::W1 => self.w1,
            Loss::W2sq => self.w2sq,
            Loss::Jsd => self.jsd,
            Loss::NegLogD => self.neg_log_d,
        }
    }
}

/// Mode-collapse toy: `modes` equally weighted bumps on a circle of radius
/// `radius` in `R^2`, fitted by a `modes`-component generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ToyTrainingConfig {
    pub experiment_id: String,
    pub losses: Vec<Loss>,
    pub seeds: usize,
    pub modes: usize,
    pub radius: f64,
    /// Mode spread in normalized circle parameter units.
    pub mode_width: f64,
    pub samples: usize,
    pub density_target_samples: usize,
    pub grid_cells: usize,
    pub grid_half_width: f64,
    pub smoothing_sigma: f64,
    /// Weight of the uniform density mixed into the smoothed target so that
    /// `log p_r` stays finite far from the modes.
    pub target_floor: f64,
    pub iterations: usize,
    pub step: StepSizes,
    pub init: Init,
    pub init_spread: f64,
    pub init_scale: f64,
    pub alignment_resolution: f64,
    pub single_atom_start: f64,
    pub single_atom_step: f64,
    pub single_atom_iterations: usize,
    pub single_atom_tolerance: f64,
}

impl Default for ToyTrainingConfig {
    fn default() -> Self {
        Self {
            experiment_id: "toy_training".into(),
            losses: vec![Loss::W1, Loss::W2sq, Loss::Jsd, Loss::NegLogD],
            seeds: 5,
            modes: 4,
            radius: 2.0,
            mode_width: 0.02,
            samples: 64,
            density_target_samples: 4000,
            grid_cells: 128,
            grid_half_width: 8.0,
            smoothing_sigma: 0.15,
            target_floor: 1e-6,
            iterations: 100,
            step: StepSizes::default(),
            init: Init::Random,
            init_spread: 0.5,
            init_scale: 0.3,
            alignment_resolution: 0.01,
            single_atom_start: 1.0,
            single_atom_step: 0.1,
            single_atom_iterations: 20,
            single_atom_tolerance: 1e-6,
        }
    }
}
