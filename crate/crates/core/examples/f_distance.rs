//! Restricted-capacity discriminator distances next to the full-capacity
//! (JSD) value as two uniform samples are pulled apart.

use alignlab::divergence::{estimate_f_distance, DiscriminatorFamily};
use alignlab::transport::EmpiricalDistribution;
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> alignlab::Result<()> {
    let n = 300;
    for gap in [0.0, 0.25, 0.5, 1.0, 2.0] {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let p =
            EmpiricalDistribution::uniform(Array2::from_shape_fn((n, 1), |_| rng.random::<f64>()))?;
        let q = EmpiricalDistribution::uniform(Array2::from_shape_fn((n, 1), |_| {
            rng.random::<f64>() + gap
        }))?;
        let partition = estimate_f_distance(&p, &q, DiscriminatorFamily::TwoCellPartition, 0, 0)?;
        let logistic = estimate_f_distance(
            &p,
            &q,
            DiscriminatorFamily::LogisticFeatures { features: 8 },
            400,
            3,
        )?;
        println!(
            "gap {gap:<5} partition {partition:.4}  logistic {logistic:.4}  (log 2 = {:.4})",
            std::f64::consts::LN_2
        );
    }
    Ok(())
}
