use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Orthonormality slack for frame vectors.
const FRAME_TOLERANCE: f64 = 1e-9;

/// Samples per winding used to seed the torus-curve distance search.
const TORUS_SEED_SAMPLES: usize = 2048;

/// A parametric embedded curve or surface.
///
/// Points are addressed by a normalized parameter in `[0, 1]^k`. Closed
/// curves (circles, torus curves) wrap at 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "chart", rename_all = "snake_case", deny_unknown_fields)]
pub enum ManifoldSpec {
    /// `start + t (end − start)`.
    Segment { start: Vec<f64>, end: Vec<f64> },
    /// Circular arc `center + r (cos φ e1 + sin φ e2)`, φ from `start_angle`
    /// to `end_angle` (radians).
    Arc {
        center: Vec<f64>,
        e1: Vec<f64>,
        e2: Vec<f64>,
        radius: f64,
        start_angle: f64,
        end_angle: f64,
    },
    /// Full circle in the plane spanned by the orthonormal pair `e1`, `e2`.
    Circle {
        center: Vec<f64>,
        e1: Vec<f64>,
        e2: Vec<f64>,
        radius: f64,
    },
    /// Rectangle `origin + s u + t v` with `u ⊥ v`.
    FlatPatch {
        origin: Vec<f64>,
        u: Vec<f64>,
        v: Vec<f64>,
    },
    /// Unknotted closed curve winding `windings` times around the tube of a
    /// torus in `R^3` while going once around its axis.
    #[serde(rename = "torus_knotless_curve")]
    TorusCurve {
        center: Vec<f64>,
        major_radius: f64,
        minor_radius: f64,
        windings: u32,
    },
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn shifted(a: &[f64], t: &[f64]) -> Vec<f64> {
    a.iter().zip(t).map(|(x, y)| x + y).collect()
}

impl ManifoldSpec {
    /// Segment between two points.
    pub fn segment(start: Vec<f64>, end: Vec<f64>) -> Result<Self> {
        let spec = ManifoldSpec::Segment { start, end };
        spec.validate()?;
        Ok(spec)
    }

    /// Circle in the coordinate plane of the first two axes of `R^n`,
    /// `n = center.len()`.
    pub fn circle(center: Vec<f64>, radius: f64) -> Result<Self> {
        let (e1, e2) = coordinate_frame(center.len())?;
        let spec = ManifoldSpec::Circle {
            center,
            e1,
            e2,
            radius,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Arc in the coordinate plane of the first two axes.
    pub fn arc(center: Vec<f64>, radius: f64, start_angle: f64, end_angle: f64) -> Result<Self> {
        let (e1, e2) = coordinate_frame(center.len())?;
        let spec = ManifoldSpec::Arc {
            center,
            e1,
            e2,
            radius,
            start_angle,
            end_angle,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Checks dimensions, frames and radii.
    pub fn validate(&self) -> Result<()> {
        let n = self.n();
        if n == 0 {
            return Err(Error::invalid("ambient dimension must be positive"));
        }
        let finite = |v: &[f64]| v.iter().all(|x| x.is_finite());
        let same_len = |v: &[f64]| {
            if v.len() == n {
                Ok(())
            } else {
                Err(Error::DimensionMismatch {
                    expected: n,
                    found: v.len(),
                })
            }
        };
        match self {
            ManifoldSpec::Segment { start, end } => {
                same_len(end)?;
                if !(finite(start) && finite(end)) {
                    return Err(Error::NonFinite("segment endpoints".into()));
                }
                if norm(&sub(end, start)) == 0.0 {
                    return Err(Error::invalid("segment endpoints coincide"));
                }
            }
            ManifoldSpec::Arc {
                center,
                e1,
                e2,
                radius,
                start_angle,
                end_angle,
            } => {
                check_frame(n, center, e1, e2, *radius)?;
                let span = end_angle - start_angle;
                if !(span > 0.0 && span <= TAU) {
                    return Err(Error::invalid(format!(
                        "arc needs 0 < end_angle - start_angle <= 2π, got {span}"
                    )));
                }
            }
            ManifoldSpec::Circle {
                center,
                e1,
                e2,
                radius,
            } => check_frame(n, center, e1, e2, *radius)?,
            ManifoldSpec::FlatPatch { origin, u, v } => {
                same_len(u)?;
                same_len(v)?;
                if n < 2 {
                    return Err(Error::invalid("flat patch needs ambient dimension >= 2"));
                }
                if !(finite(origin) && finite(u) && finite(v)) {
                    return Err(Error::NonFinite("patch vectors".into()));
                }
                let (lu, lv) = (norm(u), norm(v));
                if lu == 0.0 || lv == 0.0 {
                    return Err(Error::invalid("patch edges must be nonzero"));
                }
                if dot(u, v).abs() > FRAME_TOLERANCE * lu * lv {
                    return Err(Error::invalid("patch edges must be orthogonal"));
                }
            }
            ManifoldSpec::TorusCurve {
                center,
                major_radius,
                minor_radius,
                windings,
            } => {
                if center.len() != 3 {
                    return Err(Error::DimensionMismatch {
                        expected: 3,
                        found: center.len(),
                    });
                }
                if !finite(center) {
                    return Err(Error::NonFinite("torus center".into()));
                }
                if !(*minor_radius > 0.0 && major_radius > minor_radius && major_radius.is_finite())
                {
                    return Err(Error::invalid(
                        "torus needs 0 < minor_radius < major_radius",
                    ));
                }
                if *windings == 0 {
                    return Err(Error::invalid("torus curve needs at least one winding"));
                }
            }
        }
        Ok(())
    }

    /// Intrinsic dimension.
    pub fn k(&self) -> usize {
        match self {
            ManifoldSpec::FlatPatch { .. } => 2,
            _ => 1,
        }
    }

    /// Ambient dimension.
    pub fn n(&self) -> usize {
        match self {
            ManifoldSpec::Segment { start, .. } => start.len(),
            ManifoldSpec::Arc { center, .. }
            | ManifoldSpec::Circle { center, .. }
            | ManifoldSpec::TorusCurve { center, .. } => center.len(),
            ManifoldSpec::FlatPatch { origin, .. } => origin.len(),
        }
    }

    /// Whether the parameter wraps around (closed curve).
    pub fn is_closed(&self) -> bool {
        matches!(
            self,
            ManifoldSpec::Circle { .. } | ManifoldSpec::TorusCurve { .. }
        )
    }

    /// Total k-dimensional measure (length or area).
    pub fn measure(&self) -> f64 {
        match self {
            ManifoldSpec::Segment { start, end } => norm(&sub(end, start)),
            ManifoldSpec::Arc {
                radius,
                start_angle,
                end_angle,
                ..
            } => radius * (end_angle - start_angle),
            ManifoldSpec::Circle { radius, .. } => TAU * radius,
            ManifoldSpec::FlatPatch { u, v, .. } => norm(u) * norm(v),
            ManifoldSpec::TorusCurve { .. } => {
                // Composite Simpson on a smooth periodic integrand.
                let steps = 20_000;
                let h = 1.0 / steps as f64;
                (0..steps)
                    .map(|i| {
                        let t = i as f64 * h;
                        (self.speed(&[t]) + 4.0 * self.speed(&[t + 0.5 * h]) + self.speed(&[t + h]))
                            * h
                            / 6.0
                    })
                    .sum()
            }
        }
    }

    /// Chart image of a normalized parameter.
    pub fn point(&self, param: &[f64]) -> Vec<f64> {
        match self {
            ManifoldSpec::Segment { start, end } => {
                let t = param[0];
                start
                    .iter()
                    .zip(end)
                    .map(|(a, b)| a + t * (b - a))
                    .collect()
            }
            ManifoldSpec::Arc {
                center,
                e1,
                e2,
                radius,
                start_angle,
                end_angle,
            } => {
                let phi = start_angle + param[0] * (end_angle - start_angle);
                on_circle(center, e1, e2, *radius, phi)
            }
            ManifoldSpec::Circle {
                center,
                e1,
                e2,
                radius,
            } => on_circle(center, e1, e2, *radius, TAU * param[0]),
            ManifoldSpec::FlatPatch { origin, u, v } => origin
                .iter()
                .zip(u.iter().zip(v))
                .map(|(o, (a, b))| o + param[0] * a + param[1] * b)
                .collect(),
            ManifoldSpec::TorusCurve {
                center,
                major_radius,
                minor_radius,
                windings,
            } => {
                let phi = TAU * param[0];
                let psi = *windings as f64 * phi;
                let ring = major_radius + minor_radius * psi.cos();
                vec![
                    center[0] + ring * phi.cos(),
                    center[1] + ring * phi.sin(),
                    center[2] + minor_radius * psi.sin(),
                ]
            }
        }
    }

    /// Local k-volume factor of the normalized chart at `param`.
    pub fn speed(&self, param: &[f64]) -> f64 {
        match self {
            ManifoldSpec::TorusCurve {
                major_radius,
                minor_radius,
                windings,
                ..
            } => {
                let w = *windings as f64;
                let ring = major_radius + minor_radius * (TAU * w * param[0]).cos();
                TAU * (ring * ring + (minor_radius * w).powi(2)).sqrt()
            }
            _ => self.measure(),
        }
    }

    /// Largest value of [`ManifoldSpec::speed`] over the domain.
    pub(crate) fn max_speed(&self) -> f64 {
        match self {
            ManifoldSpec::TorusCurve {
                major_radius,
                minor_radius,
                windings,
                ..
            } => {
                let ring = major_radius + minor_radius;
                TAU * (ring * ring + (minor_radius * *windings as f64).powi(2)).sqrt()
            }
            _ => self.measure(),
        }
    }

    /// Euclidean distance from `x` to the chart image.
    ///
    /// Exact by projection for segments, arcs, circles and patches. The torus
    /// curve seeds from a dense parameter sample and refines by golden-section
    /// search around the best sample; its error is far below the sample
    /// spacing but not at machine precision.
    pub fn distance(&self, x: &[f64]) -> f64 {
        match self {
            ManifoldSpec::Segment { start, end } => {
                let dir = sub(end, start);
                let t = (dot(&sub(x, start), &dir) / dot(&dir, &dir)).clamp(0.0, 1.0);
                norm(&sub(x, &self.point(&[t])))
            }
            ManifoldSpec::Circle {
                center,
                e1,
                e2,
                radius,
            } => {
                let (u1, u2, normal) = plane_split(x, center, e1, e2);
                let radial = (u1 * u1 + u2 * u2).sqrt() - radius;
                (normal * normal + radial * radial).sqrt()
            }
            ManifoldSpec::Arc {
                center,
                e1,
                e2,
                radius,
                start_angle,
                end_angle,
            } => {
                let (u1, u2, normal) = plane_split(x, center, e1, e2);
                let rho = (u1 * u1 + u2 * u2).sqrt();
                if rho > 0.0 {
                    let phi = u2.atan2(u1);
                    let offset = (phi - start_angle).rem_euclid(TAU);
                    if offset <= end_angle - start_angle {
                        let radial = rho - radius;
                        return (normal * normal + radial * radial).sqrt();
                    }
                }
                let a = on_circle(center, e1, e2, *radius, *start_angle);
                let b = on_circle(center, e1, e2, *radius, *end_angle);
                norm(&sub(x, &a)).min(norm(&sub(x, &b)))
            }
            ManifoldSpec::FlatPatch { origin, u, v } => {
                let d = sub(x, origin);
                let s = (dot(&d, u) / dot(u, u)).clamp(0.0, 1.0);
                let t = (dot(&d, v) / dot(v, v)).clamp(0.0, 1.0);
                norm(&sub(x, &self.point(&[s, t])))
            }
            ManifoldSpec::TorusCurve { windings, .. } => {
                let samples = TORUS_SEED_SAMPLES * *windings as usize;
                let sq = |t: f64| {
                    let p = self.point(&[t.rem_euclid(1.0)]);
                    dot(&sub(x, &p), &sub(x, &p))
                };
                let h = 1.0 / samples as f64;
                let best = (0..samples)
                    .map(|i| i as f64 * h)
                    .min_by(|a, b| sq(*a).total_cmp(&sq(*b)))
                    .unwrap_or(0.0);
                let (mut lo, mut hi) = (best - h, best + h);
                let g = 0.5 * (5f64.sqrt() - 1.0);
                let (mut c, mut d) = (hi - g * (hi - lo), lo + g * (hi - lo));
                for _ in 0..80 {
                    if sq(c) < sq(d) {
                        hi = d;
                    } else {
                        lo = c;
                    }
                    c = hi - g * (hi - lo);
                    d = lo + g * (hi - lo);
                }
                sq(0.5 * (lo + hi)).min(sq(best)).sqrt()
            }
        }
    }

    /// The same chart with its image shifted by `t`.
    pub fn translate(&self, t: &[f64]) -> Result<Self> {
        if t.len() != self.n() {
            return Err(Error::DimensionMismatch {
                expected: self.n(),
                found: t.len(),
            });
        }
        if t.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("translation".into()));
        }
        let mut out = self.clone();
        match &mut out {
            ManifoldSpec::Segment { start, end } => {
                *start = shifted(start, t);
                *end = shifted(end, t);
            }
            ManifoldSpec::Arc { center, .. }
            | ManifoldSpec::Circle { center, .. }
            | ManifoldSpec::TorusCurve { center, .. } => *center = shifted(center, t),
            ManifoldSpec::FlatPatch { origin, .. } => *origin = shifted(origin, t),
        }
        Ok(out)
    }

    /// Parameter cells per axis so that image cells are about `resolution`
    /// across.
    pub(crate) fn cells_per_axis(&self, resolution: f64) -> Vec<usize> {
        let count = |len: f64| ((len / resolution).ceil() as usize).max(1);
        match self {
            ManifoldSpec::FlatPatch { u, v, .. } => vec![count(norm(u)), count(norm(v))],
            _ => vec![count(self.measure())],
        }
    }
}

fn coordinate_frame(n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if n < 2 {
        return Err(Error::invalid("circles need ambient dimension >= 2"));
    }
    let mut e1 = vec![0.0; n];
    let mut e2 = vec![0.0; n];
    e1[0] = 1.0;
    e2[1] = 1.0;
    Ok((e1, e2))
}

fn check_frame(n: usize, center: &[f64], e1: &[f64], e2: &[f64], radius: f64) -> Result<()> {
    if n < 2 {
        return Err(Error::invalid("circles need ambient dimension >= 2"));
    }
    for v in [e1, e2] {
        if v.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: v.len(),
            });
        }
    }
    if !center.iter().chain(e1).chain(e2).all(|v| v.is_finite()) {
        return Err(Error::NonFinite("circle frame".into()));
    }
    if (norm(e1) - 1.0).abs() > FRAME_TOLERANCE
        || (norm(e2) - 1.0).abs() > FRAME_TOLERANCE
        || dot(e1, e2).abs() > FRAME_TOLERANCE
    {
        return Err(Error::invalid("e1, e2 must be orthonormal"));
    }
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::invalid("radius must be positive"));
    }
    Ok(())
}

fn on_circle(center: &[f64], e1: &[f64], e2: &[f64], radius: f64, phi: f64) -> Vec<f64> {
    let (s, c) = phi.sin_cos();
    center
        .iter()
        .zip(e1.iter().zip(e2))
        .map(|(o, (a, b))| o + radius * (c * a + s * b))
        .collect()
}

/// In-plane coordinates of `x − center` and the length of its normal part.
fn plane_split(x: &[f64], center: &[f64], e1: &[f64], e2: &[f64]) -> (f64, f64, f64) {
    let d = sub(x, center);
    let (u1, u2) = (dot(&d, e1), dot(&d, e2));
    let normal: Vec<f64> = d
        .iter()
        .zip(e1.iter().zip(e2))
        .map(|(v, (a, b))| v - u1 * a - u2 * b)
        .collect();
    (u1, u2, norm(&normal))
}
