//! Histogram divergences: disjoint supports sit at the log 2 ceiling,
//! partial overlap lowers the JSD, smoothing removes the KL blow-up.

use alignlab::divergence::{jsd, kl, optimal_discriminator, smooth, GridDensity};

fn main() -> alignlab::Result<()> {
    let bounds = vec![(0.0, 1.0)];
    let p = GridDensity::from_unnormalized(
        bounds.clone(),
        vec![8],
        vec![1., 1., 1., 1., 0., 0., 0., 0.],
    )?;
    let disjoint = GridDensity::from_unnormalized(
        bounds.clone(),
        vec![8],
        vec![0., 0., 0., 0., 1., 1., 1., 1.],
    )?;
    let shifted =
        GridDensity::from_unnormalized(bounds, vec![8], vec![0., 0., 1., 1., 1., 1., 0., 0.])?;

    println!("JSD disjoint       = {}", jsd(&p, &disjoint)?);
    println!("JSD half overlap   = {}", jsd(&p, &shifted)?);
    println!("KL  half overlap   = {}", kl(&p, &shifted)?);
    let (ps, qs) = (smooth(&p, 0.1)?, smooth(&shifted, 0.1)?);
    println!("KL  after smoothing = {}", kl(&ps, &qs)?);

    let d = optimal_discriminator(&p, &shifted)?;
    println!("D* per cell: {:?}", d.values);
    print!("{}", p.to_text());
    Ok(())
}
