use alignlab::manifolds::{
    overlap_measure, positively_aligned_pairs, sample_manifold, ManifoldSpec, SamplingDensity,
};
use proptest::prelude::*;

fn charts() -> Vec<ManifoldSpec> {
    let toml = r#"
        [[m]]
        chart = "flat_patch"
        origin = [0.0, 0.0, 1.0]
        u = [2.0, 0.0, 0.0]
        v = [0.0, 1.0, 0.0]

        [[m]]
        chart = "torus_knotless_curve"
        center = [0.0, 0.0, 0.0]
        major_radius = 2.0
        minor_radius = 0.5
        windings = 3
    "#;
    #[derive(serde::Deserialize)]
    struct File {
        m: Vec<ManifoldSpec>,
    }
    let mut out: Vec<ManifoldSpec> = toml::from_str::<File>(toml).unwrap().m;
    for pair in positively_aligned_pairs() {
        out.push(pair.a);
        out.push(pair.b);
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn samples_lie_on_their_chart(seed in any::<u64>(), which in 0usize..8) {
        let m = &charts()[which];
        let s = sample_manifold(m, 16, &SamplingDensity::Uniform, seed).unwrap();
        for row in s.points().rows() {
            prop_assert!(m.distance(&row.to_vec()) <= 1e-9);
        }
    }

    #[test]
    fn translation_moves_distances(
        which in 0usize..8,
        param in 0.0f64..1.0,
        t in prop::collection::vec(-1.0f64..1.0, 3),
    ) {
        let m = &charts()[which];
        let k = m.k();
        let x = m.point(&vec![param; k]);
        let moved = m.translate(&t).unwrap();
        let y: Vec<f64> = x.iter().zip(&t).map(|(a, b)| a + b).collect();
        prop_assert!(moved.distance(&y) <= 1e-9);
    }
}

#[test]
fn self_overlap_is_the_full_measure() {
    for m in charts().into_iter().filter(|m| m.k() == 1) {
        // The torus-curve distance is a dense search; keep it coarse.
        let res = if matches!(m, ManifoldSpec::TorusCurve { .. }) {
            1e-2
        } else {
            1e-3
        };
        let r = overlap_measure(&m, &m, res, 10.0 * res).unwrap();
        assert!(
            (r.overlap_estimate - m.measure()).abs() <= 1e-6 * m.measure(),
            "{m:?}"
        );
        assert!(r.is_positively_aligned());
    }
}

#[test]
fn built_in_pairs_share_their_documented_length() {
    let expected = [std::f64::consts::TAU, std::f64::consts::FRAC_PI_2, 0.5];
    for (pair, want) in positively_aligned_pairs().iter().zip(expected) {
        let r = overlap_measure(&pair.a, &pair.b, 1e-4, 1e-5).unwrap();
        assert!(
            (r.overlap_estimate - want).abs() <= 1e-3,
            "{}: {}",
            pair.name,
            r.overlap_estimate
        );
        assert!(r.is_positively_aligned());
    }
}

#[test]
fn malformed_charts_rejected() {
    assert!(ManifoldSpec::circle(vec![0.0, 0.0], -1.0).is_err());
    assert!(ManifoldSpec::segment(vec![0.0], vec![0.0]).is_err());
    let skew: Result<ManifoldSpec, _> = toml::from_str(
        "chart = \"flat_patch\"\norigin = [0.0, 0.0]\nu = [1.0, 0.0]\nv = [1.0, 1.0]\n",
    );
    assert!(skew.unwrap().validate().is_err());
}
