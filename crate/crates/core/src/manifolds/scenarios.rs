use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use super::ManifoldSpec;

/// Two manifolds under a common name.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifoldPair {
    pub name: String,
    pub a: ManifoldSpec,
    pub b: ManifoldSpec,
}

fn pair(name: &str, a: ManifoldSpec, b: ManifoldSpec) -> ManifoldPair {
    ManifoldPair {
        name: name.to_string(),
        a,
        b,
    }
}

/// Curve pairs in `R^3` whose supports share a set of positive length:
/// coincident unit circles, two unit arcs sharing a quarter circle, and
/// collinear unit segments sharing half their length.
pub fn positively_aligned_pairs() -> Vec<ManifoldPair> {
    let o = vec![0.0, 0.0, 0.0];
    let circle = ManifoldSpec::circle(o.clone(), 1.0).expect("valid circle");
    vec![
        pair("coincident_circles", circle.clone(), circle),
        pair(
            "quarter_arcs",
            ManifoldSpec::arc(o.clone(), 1.0, 0.0, PI).expect("valid arc"),
            ManifoldSpec::arc(o, 1.0, FRAC_PI_2, 3.0 * FRAC_PI_2).expect("valid arc"),
        ),
        pair(
            "collinear_segments",
            ManifoldSpec::segment(vec![0.0, 0.0, 0.0], vec![1.0, 0.0, 0.0]).expect("valid segment"),
            ManifoldSpec::segment(vec![0.5, 0.0, 0.0], vec![1.5, 0.0, 0.0]).expect("valid segment"),
        ),
    ]
}

/// Three planar configurations: a circle and a tangent segment meeting at a
/// single point, two arcs sharing a quarter circle, and two unit circles
/// whose centers are 0.5 apart (two transversal crossings).
pub fn alignment_regimes() -> Vec<ManifoldPair> {
    let o = vec![0.0, 0.0];
    vec![
        pair(
            "perfectly_aligned",
            ManifoldSpec::circle(o.clone(), 1.0).expect("valid circle"),
            ManifoldSpec::segment(vec![-1.0, 1.0], vec![1.0, 1.0]).expect("valid segment"),
        ),
        pair(
            "positively_aligned",
            ManifoldSpec::arc(o.clone(), 1.0, 0.0, PI).expect("valid arc"),
            ManifoldSpec::arc(o.clone(), 1.0, FRAC_PI_2, 3.0 * FRAC_PI_2).expect("valid arc"),
        ),
        pair(
            "transversal",
            ManifoldSpec::circle(o, 1.0).expect("valid circle"),
            ManifoldSpec::circle(vec![0.5, 0.0], 1.0).expect("valid circle"),
        ),
    ]
}
