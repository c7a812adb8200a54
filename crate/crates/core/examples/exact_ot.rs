//! Exact transport between two small clouds, the optimal plan and the map
//! it induces, checked against brute-force enumeration.

use alignlab::transport::{
    brute_force_ot, cost_matrix, extract_map, solve_exact, wasserstein, EmpiricalDistribution,
    Ground, Method,
};
use ndarray::array;

fn main() -> alignlab::Result<()> {
    let p = EmpiricalDistribution::uniform(array![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [2.0, 2.0]])?;
    let q = EmpiricalDistribution::uniform(array![[0.5, 0.5], [1.5, 0.0], [0.0, 2.0], [3.0, 3.0]])?;

    for ground in [Ground::Euclidean, Ground::L1] {
        let cost = cost_matrix(&p, &q, ground, 2)?;
        let (plan, value) = solve_exact(&p, &q, &cost)?;
        let brute = brute_force_ot(&p, &q, &cost)?;
        println!("{ground}: W_2^2 = {value:.6} (brute force {brute:.6})");

        let map = extract_map(&plan, &p, &q)?;
        for (i, y) in map.images.rows().into_iter().enumerate() {
            println!("  x{i} {} -> {y}", p.point(i));
        }
    }

    let single = wasserstein(
        &EmpiricalDistribution::dirac(&[0.0, 0.0])?,
        &EmpiricalDistribution::dirac(&[3.0, 4.0])?,
        2,
        Ground::Euclidean,
        Method::Exact,
    )?;
    println!("W2(delta_(0,0), delta_(3,4)) = {single}");
    Ok(())
}
