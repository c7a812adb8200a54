//! Support overlap of the planar alignment regimes and of a pair of
//! coincident circles before and after a tiny random translation.

use alignlab::manifolds::{
    alignment_regimes, classify_perturbation, overlap_measure, positively_aligned_pairs,
    sample_transversal_offset,
};

fn main() -> alignlab::Result<()> {
    // A shared arc keeps its length under refinement; tangential and
    // transversal contacts shrink with tau.
    for pair in alignment_regimes() {
        let mut line = format!("{:<20}", pair.name);
        for res in [1e-2, 1e-3, 1e-4] {
            let r = overlap_measure(&pair.a, &pair.b, res, res)?;
            line += &format!("  res {res:.0e}: {:.5}", r.overlap_estimate);
        }
        println!("{line}");
    }

    let res = 1e-3;
    let circles = &positively_aligned_pairs()[0];
    let tau = res / 10.0;
    let before = overlap_measure(&circles.a, &circles.b, res, tau)?;
    let t = sample_transversal_offset(1e-2, &circles.a, &circles.b, 5)?;
    let moved = circles.b.translate(&t)?;
    let after = overlap_measure(&circles.a, &moved, res, tau)?;
    println!(
        "{}: overlap {:.4} -> {:.2e} after |t| = {:.2e}",
        circles.name,
        before.overlap_estimate,
        after.overlap_estimate,
        t.iter().map(|v| v * v).sum::<f64>().sqrt()
    );

    // Steps along a flat chart stay on it; any normal component leaves it.
    let segment = &positively_aligned_pairs()[2].a;
    let x = segment.point(&[0.5]);
    let along = classify_perturbation(segment, &x, &[1e-3, 0.0, 0.0], 1e-9)?;
    let normal = classify_perturbation(segment, &x, &[0.0, 0.0, 1e-3], 1e-9)?;
    println!("segment: step along {along:?}, normal step {normal:?}");
    Ok(())
}
