//! Embedded curves and patches, support-overlap measurement, random
//! transversal offsets and on/off-manifold perturbation checks.

mod chart;
mod overlap;
mod sampling;
mod scenarios;

pub use chart::ManifoldSpec;
pub use overlap::{default_tau, overlap_measure, OverlapReport, MAX_OVERLAP_CELLS};
pub use sampling::{
    classify_perturbation, sample_manifold, sample_transversal_offset, Perturbation,
    SamplingDensity, ON_MANIFOLD_TOLERANCE,
};
pub use scenarios::{alignment_regimes, positively_aligned_pairs, ManifoldPair};

#[cfg(test)]
mod tests {
    use std::f64::consts::{FRAC_PI_2, PI, TAU};

    use approx::assert_abs_diff_eq;

    use super::*;
    use crate::error::Error;
    use crate::transport::{wasserstein, Ground, Method};

    fn unit_circle() -> ManifoldSpec {
        ManifoldSpec::circle(vec![0.0, 0.0], 1.0).unwrap()
    }

    #[test]
    fn circle_samples_have_unit_norm() {
        let s = sample_manifold(&unit_circle(), 4, &SamplingDensity::Uniform, 1).unwrap();
        for row in s.points().rows() {
            assert_abs_diff_eq!(row.dot(&row).sqrt(), 1.0, epsilon = 1e-12);
        }
        assert!(s.is_uniform());
    }

    #[test]
    fn segment_samples_stay_on_axis() {
        let seg = ManifoldSpec::segment(vec![0.0, 0.0], vec![1.0, 0.0]).unwrap();
        let s = sample_manifold(&seg, 50, &SamplingDensity::Uniform, 2).unwrap();
        assert!(s.points().column(1).iter().all(|&y| y == 0.0));
    }

    #[test]
    fn mixture_mode_masses_match_weights() {
        let density = SamplingDensity::Mixture {
            modes: vec![vec![0.0], vec![0.5]],
            weights: vec![0.3, 0.7],
            width: 0.02,
        };
        let n = 10_000;
        let s = sample_manifold(&unit_circle(), n, &density, 3).unwrap();
        let near_zero = s.points().column(0).iter().filter(|&&x| x > 0.0).count();
        let frac = near_zero as f64 / n as f64;
        let sd = (0.3f64 * 0.7 / n as f64).sqrt();
        assert!((frac - 0.3).abs() <= 3.0 * sd, "{frac}");
    }

    #[test]
    fn torus_curve_samples_lie_on_chart() {
        let torus = ManifoldSpec::TorusCurve {
            center: vec![0.0, 0.0, 0.0],
            major_radius: 2.0,
            minor_radius: 0.5,
            windings: 3,
        };
        let s = sample_manifold(&torus, 20, &SamplingDensity::Uniform, 4).unwrap();
        for row in s.points().rows() {
            assert!(torus.distance(&row.to_vec()) < 1e-12);
        }
    }

    #[test]
    fn invalid_charts_rejected() {
        assert!(ManifoldSpec::segment(vec![1.0, 1.0], vec![1.0, 1.0]).is_err());
        assert!(ManifoldSpec::circle(vec![0.0, 0.0], -1.0).is_err());
        assert!(ManifoldSpec::arc(vec![0.0, 0.0], 1.0, 1.0, 0.5).is_err());
        let skew = ManifoldSpec::FlatPatch {
            origin: vec![0.0, 0.0],
            u: vec![1.0, 0.0],
            v: vec![1.0, 1.0],
        };
        assert!(skew.validate().is_err());
    }

    #[test]
    fn self_overlap_recovers_measure() {
        let patch = ManifoldSpec::FlatPatch {
            origin: vec![0.0, 0.0, 0.0],
            u: vec![1.0, 0.0, 0.0],
            v: vec![0.0, 0.5, 0.0],
        };
        let charts = [
            unit_circle(),
            ManifoldSpec::arc(vec![0.0, 0.0], 2.0, 0.0, 1.0).unwrap(),
            ManifoldSpec::segment(vec![0.0, 0.0], vec![3.0, 4.0]).unwrap(),
            patch,
        ];
        for m in &charts {
            let r = overlap_measure(m, m, 1e-3, default_tau(1e-3)).unwrap();
            let rel = (r.overlap_estimate - m.measure()).abs() / m.measure();
            assert!(rel < 0.02, "{m:?}: {}", r.overlap_estimate);
        }
    }

    #[test]
    fn quarter_arc_overlap() {
        let a = ManifoldSpec::arc(vec![0.0, 0.0], 1.0, 0.0, PI).unwrap();
        let b = ManifoldSpec::arc(vec![0.0, 0.0], 1.0, FRAC_PI_2, 3.0 * FRAC_PI_2).unwrap();
        let r = overlap_measure(&a, &b, 1e-3, default_tau(1e-3)).unwrap();
        assert!((r.overlap_estimate - FRAC_PI_2).abs() / FRAC_PI_2 < 0.02);
        assert!(r.is_positively_aligned());
    }

    #[test]
    fn transversal_circles_collapse_under_refinement() {
        let a = unit_circle();
        let b = ManifoldSpec::circle(vec![0.5, 0.0], 1.0).unwrap();
        let mut last = f64::INFINITY;
        for res in [1e-2, 1e-3, 1e-4] {
            let tau = res / 10.0;
            let r = overlap_measure(&a, &b, res, tau).unwrap();
            assert!(r.overlap_estimate <= last);
            last = r.overlap_estimate;
            if res == 1e-4 {
                assert!(r.overlap_estimate <= 4.0 * tau, "{}", r.overlap_estimate);
            }
        }
    }

    #[test]
    fn undersampled_tau_rejected() {
        let c = unit_circle();
        assert!(overlap_measure(&c, &c, 1e-3, 1e-5).is_err());
        assert!(overlap_measure(&c, &c, 0.0, 1e-5).is_err());
    }

    #[test]
    fn translation_moves_center_and_samples() {
        let c = unit_circle();
        assert_eq!(c.translate(&[0.0, 0.0]).unwrap(), c);
        let moved = c.translate(&[0.3, 0.0]).unwrap();
        match &moved {
            ManifoldSpec::Circle { center, .. } => assert_eq!(center, &vec![0.3, 0.0]),
            other => panic!("unexpected {other:?}"),
        }
        let s0 = sample_manifold(&c, 30, &SamplingDensity::Uniform, 9).unwrap();
        let s1 = sample_manifold(&moved, 30, &SamplingDensity::Uniform, 9).unwrap();
        for (a, b) in s0.points().rows().into_iter().zip(s1.points().rows()) {
            assert_abs_diff_eq!(b[0] - a[0], 0.3, epsilon = 1e-15);
            assert_abs_diff_eq!(b[1], a[1], epsilon = 1e-15);
        }
        let w = wasserstein(&s0, &s1, 2, Ground::Euclidean, Method::Exact).unwrap();
        assert_abs_diff_eq!(w, 0.3, epsilon = 1e-9);
    }

    #[test]
    fn offsets_stay_in_ball() {
        let c = ManifoldSpec::circle(vec![0.0, 0.0, 0.0], 1.0).unwrap();
        for seed in 0..100 {
            let t = sample_transversal_offset(0.01, &c, &c, seed).unwrap();
            assert!(t.iter().map(|v| v * v).sum::<f64>().sqrt() <= 0.01);
        }
    }

    #[test]
    fn perturbation_classes() {
        let seg = ManifoldSpec::segment(vec![0.0, 0.0], vec![1.0, 0.0]).unwrap();
        let x = [0.5, 0.0];
        let tol = 1e-6;
        let on = Perturbation::OnManifold;
        let off = Perturbation::OffManifold;
        assert_eq!(
            classify_perturbation(&seg, &x, &[0.0, 0.0], tol).unwrap(),
            on
        );
        assert_eq!(
            classify_perturbation(&seg, &x, &[0.2, 0.0], tol).unwrap(),
            on
        );
        assert_eq!(
            classify_perturbation(&seg, &x, &[0.0, 10.0 * tol], tol).unwrap(),
            off
        );
        assert!(matches!(
            classify_perturbation(&seg, &[0.5, 0.1], &[0.0, 0.0], tol),
            Err(Error::NotOnManifold { .. })
        ));
    }

    #[test]
    fn circle_distance_in_three_dimensions() {
        let c = ManifoldSpec::circle(vec![0.0, 0.0, 0.0], 1.0).unwrap();
        assert_abs_diff_eq!(c.distance(&[2.0, 0.0, 0.0]), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(c.distance(&[1.0, 0.0, 0.5]), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(c.distance(&[0.0, 0.0, 0.0]), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(c.measure(), TAU, epsilon = 1e-15);
    }

    #[test]
    fn torus_measure_matches_fine_polyline() {
        let torus = ManifoldSpec::TorusCurve {
            center: vec![0.0, 0.0, 0.0],
            major_radius: 2.0,
            minor_radius: 0.5,
            windings: 3,
        };
        let n = 200_000;
        let poly: f64 = (0..n)
            .map(|i| {
                let a = torus.point(&[i as f64 / n as f64]);
                let b = torus.point(&[(i + 1) as f64 / n as f64]);
                a.iter()
                    .zip(&b)
                    .map(|(x, y)| (x - y).powi(2))
                    .sum::<f64>()
                    .sqrt()
            })
            .sum();
        assert_abs_diff_eq!(torus.measure(), poly, epsilon = 1e-6);
    }

    #[test]
    fn spec_round_trips_through_toml() {
        let pairs = positively_aligned_pairs();
        for p in &pairs {
            let text = toml::to_string(p).unwrap();
            let back: ManifoldPair = toml::from_str(&text).unwrap();
            assert_eq!(&back, p);
        }
    }
}
