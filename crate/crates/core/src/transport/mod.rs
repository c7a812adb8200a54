//! Exact and entropic discrete optimal transport.
//!
//! [`solve_exact`] runs a network simplex on the bipartite transport graph;
//! [`solve_sinkhorn`] is the entropic approximation for larger clouds;
//! [`brute_force_ot`] enumerates permutations and serves as an oracle for
//! small uniform instances.

mod brute;
mod cost;
mod coupling;
mod distribution;
pub mod io;
mod map;
mod simplex;
mod sinkhorn;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

pub use brute::{brute_force_ot, BRUTE_FORCE_MAX};
pub use cost::{cost_matrix, Ground};
pub use coupling::Coupling;
pub use distribution::{EmpiricalDistribution, MASS_TOLERANCE, MIN_ATOM_WEIGHT};
pub use map::{extract_map, TransportMap};
pub use sinkhorn::{solve_sinkhorn, SinkhornResult};

use crate::error::{Error, Result};

/// Marginal tolerance of exact plans.
pub const EXACT_MARGINAL_TOLERANCE: f64 = 1e-9;

/// How a Wasserstein distance is computed.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "lowercase")]
pub enum Method {
    #[default]
    Exact,
    Sinkhorn {
        epsilon: f64,
        max_iter: usize,
        tol: f64,
    },
}

pub(crate) fn check_sizes(
    source: &EmpiricalDistribution,
    target: &EmpiricalDistribution,
    cost: &Array2<f64>,
) -> Result<()> {
    if cost.dim() != (source.len(), target.len()) {
        return Err(Error::invalid(format!(
            "cost matrix is {:?}, distributions have {} and {} atoms",
            cost.dim(),
            source.len(),
            target.len()
        )));
    }
    if cost.iter().any(|c| !c.is_finite()) {
        return Err(Error::NonFinite("cost matrix".into()));
    }
    Ok(())
}

/// Minimum-cost coupling and its value `Σ γ_ij C_ij`.
///
/// Deterministic for a fixed input. The returned plan is checked against
/// both marginals; a residual above [`EXACT_MARGINAL_TOLERANCE`] is reported
/// as a solver error.
pub fn solve_exact(
    source: &EmpiricalDistribution,
    target: &EmpiricalDistribution,
    cost: &Array2<f64>,
) -> Result<(Coupling, f64)> {
    check_sizes(source, target, cost)?;
    let supply = source.weights().to_vec();
    let demand = target.weights().to_vec();
    let (n, m) = (supply.len(), demand.len());
    let max_pivots = 50 * (n * m).max(64) + 10_000;
    let mut solver = simplex::NetworkSimplex::new(&supply, &demand, cost);
    let entries = solver.solve(max_pivots)?;
    let coupling = Coupling::from_entries(n, m, entries);
    let (row_residual, col_residual) =
        coupling.marginal_residuals(source.weights(), target.weights());
    if row_residual > EXACT_MARGINAL_TOLERANCE || col_residual > EXACT_MARGINAL_TOLERANCE {
        return Err(Error::Solver {
            message: "plan violates the marginals".into(),
            row_residual,
            col_residual,
        });
    }
    let value = coupling.cost(cost);
    Ok((coupling, value))
}

/// `W_p(P, Q)`, the p-th root of the optimal transport cost.
pub fn wasserstein(
    source: &EmpiricalDistribution,
    target: &EmpiricalDistribution,
    p: u32,
    ground: Ground,
    method: Method,
) -> Result<f64> {
    let value = transport_cost(source, target, p, ground, method)?;
    Ok(match p {
        1 => value,
        2 => value.sqrt(),
        _ => value.powf(1.0 / p as f64),
    })
}

/// Optimal cost `W_p^p` without the root.
pub fn transport_cost(
    source: &EmpiricalDistribution,
    target: &EmpiricalDistribution,
    p: u32,
    ground: Ground,
    method: Method,
) -> Result<f64> {
    let cost = cost_matrix(source, target, ground, p)?;
    match method {
        Method::Exact => solve_exact(source, target, &cost).map(|(_, v)| v.max(0.0)),
        Method::Sinkhorn {
            epsilon,
            max_iter,
            tol,
        } => {
            let res = solve_sinkhorn(source, target, &cost, epsilon, max_iter, tol)?;
            if !res.converged {
                return Err(Error::NotConverged {
                    iterations: res.iterations,
                    residual: res.residual,
                });
            }
            Ok(res.value)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn line(points: &[f64]) -> EmpiricalDistribution {
        let pts = Array2::from_shape_vec((points.len(), 1), points.to_vec()).unwrap();
        EmpiricalDistribution::uniform(pts).unwrap()
    }

    #[test]
    fn cost_matrix_three_four_five() {
        let p = EmpiricalDistribution::dirac(&[0.0, 0.0]).unwrap();
        let q = EmpiricalDistribution::dirac(&[3.0, 4.0]).unwrap();
        assert_eq!(
            cost_matrix(&p, &q, Ground::Euclidean, 2).unwrap(),
            array![[25.0]]
        );
        assert_eq!(cost_matrix(&p, &q, Ground::L1, 1).unwrap(), array![[7.0]]);
        assert_eq!(
            cost_matrix(&p, &q, Ground::Euclidean, 1).unwrap(),
            array![[5.0]]
        );
    }

    #[test]
    fn cost_matrix_rejects_dimension_mismatch() {
        let p = EmpiricalDistribution::dirac(&[0.0, 0.0]).unwrap();
        let q = EmpiricalDistribution::dirac(&[1.0]).unwrap();
        assert!(matches!(
            cost_matrix(&p, &q, Ground::Euclidean, 2),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn self_cost_has_zero_diagonal() {
        let p =
            EmpiricalDistribution::uniform(array![[0.1, 2.0], [-1.0, 0.5], [3.0, 3.0]]).unwrap();
        let c = cost_matrix(&p, &p, Ground::L1, 1).unwrap();
        for i in 0..3 {
            assert_eq!(c[[i, i]], 0.0);
        }
    }

    #[test]
    fn monotone_coupling_on_the_line() {
        let p = line(&[0.0, 1.0]);
        let q = line(&[1.0, 2.0]);
        let cost = cost_matrix(&p, &q, Ground::Euclidean, 2).unwrap();
        let (plan, value) = solve_exact(&p, &q, &cost).unwrap();
        assert_eq!(value, 1.0);
        assert_eq!(plan.entries(), &[(0, 0, 0.5), (1, 1, 0.5)]);
        let map = extract_map(&plan, &p, &q).unwrap();
        assert!(map.is_permutation);
        assert_eq!(map.images, array![[1.0], [2.0]]);
        assert_eq!(
            wasserstein(&p, &q, 1, Ground::Euclidean, Method::Exact).unwrap(),
            1.0
        );
    }

    #[test]
    fn identical_inputs_cost_nothing() {
        let p =
            EmpiricalDistribution::uniform(array![[0.0, 1.0], [2.0, -1.0], [0.5, 0.5]]).unwrap();
        let cost = cost_matrix(&p, &p, Ground::Euclidean, 2).unwrap();
        let (plan, value) = solve_exact(&p, &p, &cost).unwrap();
        assert_eq!(value, 0.0);
        let map = extract_map(&plan, &p, &p).unwrap();
        assert!(map.is_permutation);
        assert_eq!(&map.images, p.points());
        assert_eq!(map.assignment, Some(vec![0, 1, 2]));
    }

    #[test]
    fn single_atom_target_absorbs_everything() {
        let p = line(&[0.0, 4.0]);
        let q = line(&[1.0]);
        let cost = cost_matrix(&p, &q, Ground::Euclidean, 2).unwrap();
        let (plan, value) = solve_exact(&p, &q, &cost).unwrap();
        assert!((value - 5.0).abs() < 1e-15);
        let map = extract_map(&plan, &p, &q).unwrap();
        assert_eq!(map.images, array![[1.0], [1.0]]);
        assert!(!map.is_permutation);
    }

    #[test]
    fn dirac_distance() {
        let p = EmpiricalDistribution::dirac(&[0.0, 0.0]).unwrap();
        let q = EmpiricalDistribution::dirac(&[3.0, 4.0]).unwrap();
        assert_eq!(
            wasserstein(&p, &q, 2, Ground::Euclidean, Method::Exact).unwrap(),
            5.0
        );
    }

    #[test]
    fn weighted_unequal_sizes() {
        // 0.7 at 0 and 0.3 at 10 against 0.5/0.5 at 1 and 9: the monotone
        // plan sends 0.5 from 0 to 1, 0.2 from 0 to 9, 0.3 from 10 to 9.
        let p = EmpiricalDistribution::new(array![[0.0], [10.0]], array![0.7, 0.3]).unwrap();
        let q = line(&[1.0, 9.0]);
        let cost = cost_matrix(&p, &q, Ground::Euclidean, 1).unwrap();
        let (plan, value) = solve_exact(&p, &q, &cost).unwrap();
        assert!((value - (0.5 * 1.0 + 0.2 * 9.0 + 0.3 * 1.0)).abs() < 1e-12);
        let (r, c) = plan.marginal_residuals(p.weights(), q.weights());
        assert!(r < 1e-12 && c < 1e-12);
    }

    #[test]
    fn light_atoms_are_dropped() {
        let p =
            EmpiricalDistribution::new(array![[0.0], [1.0]], array![1.0 - 1e-16, 1e-16]).unwrap();
        assert_eq!(p.len(), 1);
        assert_eq!(p.weights()[0], 1.0);
    }

    #[test]
    fn rejects_bad_weights() {
        assert!(EmpiricalDistribution::new(array![[0.0], [1.0]], array![0.5, 0.6]).is_err());
        assert!(EmpiricalDistribution::new(array![[f64::NAN]], array![1.0]).is_err());
        assert!(EmpiricalDistribution::uniform(Array2::zeros((0, 2))).is_err());
    }

    #[test]
    fn brute_force_small_cases() {
        let p = line(&[0.0, 1.0]);
        let q = line(&[1.0, 2.0]);
        let cost = cost_matrix(&p, &q, Ground::Euclidean, 2).unwrap();
        assert_eq!(brute_force_ot(&p, &q, &cost).unwrap(), 1.0);

        let a = line(&[0.3]);
        let b = line(&[1.3]);
        let c = cost_matrix(&a, &b, Ground::L1, 1).unwrap();
        assert_eq!(brute_force_ot(&a, &b, &c).unwrap(), c[[0, 0]]);
    }

    #[test]
    fn brute_force_rejects_large_instances() {
        let pts: Vec<f64> = (0..9).map(f64::from).collect();
        let p = line(&pts);
        let cost = cost_matrix(&p, &p, Ground::L1, 1).unwrap();
        assert!(matches!(
            brute_force_ot(&p, &p, &cost),
            Err(Error::TooLarge { size: 9, max: 8 })
        ));
    }

    #[test]
    fn sinkhorn_single_atom_is_exact() {
        let p = EmpiricalDistribution::dirac(&[0.0, 0.0]).unwrap();
        let q = EmpiricalDistribution::dirac(&[3.0, 4.0]).unwrap();
        let cost = cost_matrix(&p, &q, Ground::Euclidean, 2).unwrap();
        for eps in [10.0, 1.0, 0.01] {
            let res = solve_sinkhorn(&p, &q, &cost, eps, 100, 1e-12).unwrap();
            assert!(res.converged);
            assert_eq!(res.value, 25.0);
        }
    }

    #[test]
    fn sinkhorn_rejects_nonpositive_epsilon() {
        let p = EmpiricalDistribution::dirac(&[0.0]).unwrap();
        let cost = cost_matrix(&p, &p, Ground::Euclidean, 2).unwrap();
        assert!(solve_sinkhorn(&p, &p, &cost, 0.0, 10, 1e-9).is_err());
    }

    #[test]
    fn sinkhorn_reports_nonconvergence() {
        let p = line(&[0.0, 1.0, 2.0, 3.0]);
        let q = line(&[0.5, 1.5, 2.5, 7.0]);
        let cost = cost_matrix(&p, &q, Ground::Euclidean, 2).unwrap();
        let res = solve_sinkhorn(&p, &q, &cost, 1e-3, 1, 1e-15).unwrap();
        assert!(!res.converged);
        let method = Method::Sinkhorn {
            epsilon: 1e-3,
            max_iter: 1,
            tol: 1e-15,
        };
        assert!(matches!(
            wasserstein(&p, &q, 2, Ground::Euclidean, method),
            Err(Error::NotConverged { .. })
        ));
    }

    #[test]
    fn extract_map_rejects_mismatched_coupling() {
        let p = line(&[0.0, 1.0]);
        let q = line(&[1.0]);
        let plan = Coupling::from_entries(3, 1, vec![(0, 0, 1.0)]);
        assert!(extract_map(&plan, &p, &q).is_err());
    }
}
