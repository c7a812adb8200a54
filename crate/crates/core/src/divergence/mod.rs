//! Histogram densities, KL / Jensen-Shannon divergences, the optimal
//! discriminator and restricted-capacity discriminator distances.

mod fdistance;
mod grid;
mod measures;
mod smoothing;

pub use fdistance::{
    cellwise_f_distance, estimate_f_distance, literal_objective, DiscriminatorFamily,
    LOGISTIC_WEIGHT_BOUND,
};
pub use grid::{histogram, GridDensity, GRID_MASS_TOLERANCE};
pub use measures::{jsd, kl, optimal_discriminator, DiscriminatorField};
pub(crate) use measures::{jsd_unclamped, kl_masses};
pub use smoothing::smooth;

#[cfg(test)]
mod tests {
    use std::f64::consts::LN_2;

    use approx::assert_abs_diff_eq;
    use ndarray::Array2;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::error::Error;
    use crate::transport::EmpiricalDistribution;

    fn two_cells(a: [f64; 2]) -> GridDensity {
        GridDensity::new(vec![(0.0, 1.0)], vec![2], a.to_vec()).unwrap()
    }

    fn cloud(points: &[f64]) -> EmpiricalDistribution {
        let pts = Array2::from_shape_vec((points.len(), 1), points.to_vec()).unwrap();
        EmpiricalDistribution::uniform(pts).unwrap()
    }

    #[test]
    fn kl_of_point_mass_against_uniform() {
        let p = two_cells([1.0, 0.0]);
        let q = two_cells([0.5, 0.5]);
        assert_abs_diff_eq!(kl(&p, &q).unwrap(), LN_2, epsilon = 1e-12);
        assert_eq!(kl(&q, &p).unwrap(), f64::INFINITY);
    }

    #[test]
    fn jsd_two_cell_value() {
        let p = two_cells([1.0, 0.0]);
        let q = two_cells([0.5, 0.5]);
        assert_abs_diff_eq!(jsd(&p, &q).unwrap(), 0.21576155433883565, epsilon = 1e-12);
        assert_eq!(jsd(&p, &q).unwrap(), jsd(&q, &p).unwrap());
    }

    #[test]
    fn jsd_of_disjoint_supports_is_log_two() {
        let p = two_cells([1.0, 0.0]);
        let q = two_cells([0.0, 1.0]);
        assert_abs_diff_eq!(jsd(&p, &q).unwrap(), LN_2, epsilon = 1e-12);
    }

    #[test]
    fn mismatched_grids_rejected() {
        let p = two_cells([0.5, 0.5]);
        let q = GridDensity::new(vec![(0.0, 2.0)], vec![2], vec![0.5, 0.5]).unwrap();
        assert!(matches!(jsd(&p, &q), Err(Error::GridMismatch)));
    }

    #[test]
    fn discriminator_values() {
        let p = GridDensity::new(vec![(0.0, 1.0)], vec![3], vec![0.5, 0.0, 0.5]).unwrap();
        let q = GridDensity::new(vec![(0.0, 1.0)], vec![3], vec![0.25, 0.0, 0.75]).unwrap();
        let d = optimal_discriminator(&p, &q).unwrap();
        assert_abs_diff_eq!(d.values[0], 2.0 / 3.0, epsilon = 1e-15);
        assert_eq!(d.values[1], 0.5);
        assert_abs_diff_eq!(d.values[2], 0.4, epsilon = 1e-15);
    }

    #[test]
    fn uniform_histogram_counts_within_binomial_spread() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 10_000;
        let pts: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
        let g = histogram(&cloud(&pts), &[(0.0, 1.0)], &[16]).unwrap();
        let p = 1.0 / 16.0;
        let sd = (p * (1.0 - p) / n as f64).sqrt();
        for &m in g.masses() {
            assert!((m - p).abs() <= 3.0 * sd, "cell mass {m}");
        }
    }

    #[test]
    fn histogram_reports_outside_sample() {
        let err = histogram(&cloud(&[0.5, 1.5]), &[(0.0, 1.0)], &[4]).unwrap_err();
        assert!(matches!(err, Error::OutOfBox { index: 1 }));
    }

    #[test]
    fn upper_edge_is_inside() {
        let g = histogram(&cloud(&[1.0]), &[(0.0, 1.0)], &[4]).unwrap();
        assert_eq!(g.masses()[3], 1.0);
    }

    #[test]
    fn tiny_sigma_is_identity() {
        let masses = vec![0.1, 0.2, 0.3, 0.4];
        let g = GridDensity::new(vec![(0.0, 4.0)], vec![4], masses.clone()).unwrap();
        let s = smooth(&g, 0.05).unwrap();
        for (a, b) in s.masses().iter().zip(&masses) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-6);
        }
    }

    #[test]
    fn smoothing_keeps_mass_and_spreads_delta() {
        let mut masses = vec![0.0; 9];
        masses[4] = 1.0;
        let g = GridDensity::new(vec![(0.0, 9.0), (0.0, 1.0)], vec![9, 1], masses).unwrap();
        let s = smooth(&g, 1.5).unwrap();
        assert_abs_diff_eq!(s.masses().iter().sum::<f64>(), 1.0, epsilon = 1e-12);
        assert!(s.masses().iter().all(|&m| m > 0.0));
        assert_abs_diff_eq!(s.masses()[3], s.masses()[5], epsilon = 1e-15);
    }

    #[test]
    fn smoothing_disjoint_deltas_reduces_jsd() {
        let mut a = vec![0.0; 32];
        let mut b = vec![0.0; 32];
        a[8] = 1.0;
        b[20] = 1.0;
        let bounds = vec![(0.0, 1.0)];
        let p = GridDensity::new(bounds.clone(), vec![32], a).unwrap();
        let q = GridDensity::new(bounds, vec![32], b).unwrap();
        let mut last = jsd(&p, &q).unwrap();
        for sigma in [0.02, 0.05, 0.1, 0.2, 0.4] {
            let v = jsd(&smooth(&p, sigma).unwrap(), &smooth(&q, sigma).unwrap()).unwrap();
            assert!(v < LN_2);
            assert!(v <= last + 1e-12, "sigma {sigma}: {v} > {last}");
            last = v;
        }
    }

    #[test]
    fn nonpositive_sigma_rejected() {
        let g = two_cells([0.5, 0.5]);
        assert!(smooth(&g, 0.0).is_err());
        assert!(smooth(&g, -1.0).is_err());
    }

    #[test]
    fn grid_text_round_trip() {
        let g = GridDensity::from_density(vec![(-1.0, 2.0), (0.0, 1.0)], vec![3, 5], |x| {
            1.0 + x[0] * x[0] + x[1]
        })
        .unwrap();
        let back = GridDensity::parse(&g.to_text(), "mem").unwrap();
        assert_eq!(back, g);
    }

    #[test]
    fn grid_parse_errors_name_line() {
        let err = GridDensity::parse("# box=0:1;shape=2\n0.5\nx\n", "f.grid").unwrap_err();
        assert!(err.to_string().contains("f.grid:3"), "{err}");
    }

    #[test]
    fn partition_family_on_disjoint_halves_hits_log_two() {
        let p = cloud(&[0.0, 0.1, 0.2]);
        let q = cloud(&[1.0, 1.1, 1.2]);
        let v = estimate_f_distance(&p, &q, DiscriminatorFamily::TwoCellPartition, 0, 0).unwrap();
        assert_abs_diff_eq!(v, LN_2, epsilon = 1e-12);
    }

    #[test]
    fn identical_clouds_score_zero() {
        let p = cloud(&[0.0, 0.3, 0.9]);
        for family in [
            DiscriminatorFamily::TwoCellPartition,
            DiscriminatorFamily::LogisticFeatures { features: 4 },
        ] {
            let v = estimate_f_distance(&p, &p, family, 200, 3).unwrap();
            assert_abs_diff_eq!(v, 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn zero_features_rejected() {
        let p = cloud(&[0.0]);
        let family = DiscriminatorFamily::LogisticFeatures { features: 0 };
        assert!(estimate_f_distance(&p, &p, family, 10, 0).is_err());
    }

    #[test]
    fn cellwise_optimum_equals_jsd() {
        let p = GridDensity::new(vec![(0.0, 1.0)], vec![4], vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        let q = GridDensity::new(vec![(0.0, 1.0)], vec![4], vec![0.4, 0.0, 0.5, 0.1]).unwrap();
        assert_abs_diff_eq!(
            cellwise_f_distance(&p, &q).unwrap(),
            jsd(&p, &q).unwrap(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn literal_objective_grows_without_bound() {
        let p = cloud(&[0.0]);
        let q = cloud(&[1.0]);
        let small = literal_objective(&p, &q, |x| if x[0] < 0.5 { 1e-3 } else { 0.5 });
        let smaller = literal_objective(&p, &q, |x| if x[0] < 0.5 { 1e-30 } else { 0.5 });
        assert!(smaller > small && smaller > 60.0);
    }
}
