//! Entropic transport approaching the exact cost as epsilon shrinks.

use alignlab::transport::{
    cost_matrix, solve_exact, solve_sinkhorn, EmpiricalDistribution, Ground,
};
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> alignlab::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut cloud = |n: usize, shift: f64| {
        EmpiricalDistribution::uniform(Array2::from_shape_fn((n, 2), |_| {
            rng.random::<f64>() + shift
        }))
    };
    let p = cloud(40, 0.0)?;
    let q = cloud(40, 0.7)?;
    let cost = cost_matrix(&p, &q, Ground::Euclidean, 2)?;
    let (_, exact) = solve_exact(&p, &q, &cost)?;
    println!("exact        {exact:.8}");
    for epsilon in [1.0, 0.1, 0.01, 0.001] {
        let r = solve_sinkhorn(&p, &q, &cost, epsilon, 20_000, 1e-10)?;
        println!(
            "eps {epsilon:<7} {:.8}  gap {:.2e}  iterations {}  converged {}",
            r.value,
            r.value - exact,
            r.iterations,
            r.converged
        );
    }
    Ok(())
}
