use std::fmt;
use std::str::FromStr;

use ndarray::{Array2, ArrayView1};
use serde::{Deserialize, Serialize};

use super::EmpiricalDistribution;
use crate::error::{Error, Result};

/// Ground norm used between atoms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Ground {
    #[default]
    Euclidean,
    L1,
}

impl Ground {
    pub fn distance(self, x: ArrayView1<'_, f64>, y: ArrayView1<'_, f64>) -> f64 {
        match self {
            Ground::Euclidean => x
                .iter()
                .zip(y.iter())
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt(),
            Ground::L1 => x.iter().zip(y.iter()).map(|(a, b)| (a - b).abs()).sum(),
        }
    }
}

impl fmt::Display for Ground {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Ground::Euclidean => "euclidean",
            Ground::L1 => "l1",
        })
    }
}

impl FromStr for Ground {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "euclidean" | "l2" => Ok(Ground::Euclidean),
            "l1" => Ok(Ground::L1),
            other => Err(Error::invalid(format!("unknown ground norm `{other}`"))),
        }
    }
}

/// `C[i, j] = ‖x_i − y_j‖^p` under the chosen ground norm.
pub fn cost_matrix(
    source: &EmpiricalDistribution,
    target: &EmpiricalDistribution,
    ground: Ground,
    p: u32,
) -> Result<Array2<f64>> {
    if source.dim() != target.dim() {
        return Err(Error::DimensionMismatch {
            expected: source.dim(),
            found: target.dim(),
        });
    }
    if p == 0 {
        return Err(Error::invalid("cost exponent p must be at least 1"));
    }
    let (n, m) = (source.len(), target.len());
    let mut cost = Array2::zeros((n, m));
    for i in 0..n {
        let x = source.point(i);
        for j in 0..m {
            let y = target.point(j);
            cost[[i, j]] = match (ground, p) {
                // Skip the sqrt/square round trip so squared costs stay exact.
                (Ground::Euclidean, 2) => {
                    x.iter().zip(y.iter()).map(|(a, b)| (a - b) * (a - b)).sum()
                }
                (_, 1) => ground.distance(x, y),
                _ => ground.distance(x, y).powi(p as i32),
            };
        }
    }
    Ok(cost)
}
