use alignlab::transport::{
    brute_force_ot, cost_matrix, extract_map, solve_exact, solve_sinkhorn, transport_cost,
    wasserstein, EmpiricalDistribution, Ground, Method,
};
use ndarray::{Array1, Array2};
use proptest::prelude::*;

fn cloud(n: usize, d: usize) -> impl Strategy<Value = EmpiricalDistribution> {
    prop::collection::vec(-5.0f64..5.0, n * d).prop_map(move |v| {
        EmpiricalDistribution::uniform(Array2::from_shape_vec((n, d), v).unwrap()).unwrap()
    })
}

fn pair() -> impl Strategy<Value = (EmpiricalDistribution, EmpiricalDistribution)> {
    (1usize..=7, 1usize..=3).prop_flat_map(|(n, d)| (cloud(n, d), cloud(n, d)))
}

fn ground() -> impl Strategy<Value = Ground> {
    prop_oneof![Just(Ground::Euclidean), Just(Ground::L1)]
}

fn w(a: &EmpiricalDistribution, b: &EmpiricalDistribution, p: u32, g: Ground) -> f64 {
    wasserstein(a, b, p, g, Method::Exact).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn simplex_matches_permutation_oracle((p, q) in pair(), g in ground(), order in 1u32..=2) {
        let cost = cost_matrix(&p, &q, g, order).unwrap();
        let (plan, value) = solve_exact(&p, &q, &cost).unwrap();
        let brute = brute_force_ot(&p, &q, &cost).unwrap();
        prop_assert!((value - brute).abs() <= 1e-9 * brute.max(1.0));
        let (r, c) = plan.marginal_residuals(p.weights(), q.weights());
        prop_assert!(r <= 1e-12 && c <= 1e-12);
    }

    #[test]
    fn rational_weights_match_split_atoms(
        pts in prop::collection::vec(-3.0f64..3.0, 8),
        counts_p in prop::collection::vec(1usize..=3, 4),
        counts_q in prop::collection::vec(1usize..=3, 4),
    ) {
        // Weights k/N equal N unit atoms with repeats, which the
        // permutation oracle can solve when both totals agree.
        let total_p: usize = counts_p.iter().sum();
        let total_q: usize = counts_q.iter().sum();
        prop_assume!(total_p == total_q && total_p <= 8);
        let xs = Array2::from_shape_vec((4, 1), pts[..4].to_vec()).unwrap();
        let ys = Array2::from_shape_vec((4, 1), pts[4..].to_vec()).unwrap();
        let weighted = |x: &Array2<f64>, k: &[usize]| {
            EmpiricalDistribution::from_unnormalized(
                x.clone(),
                Array1::from_iter(k.iter().map(|&c| c as f64)),
            )
            .unwrap()
        };
        let split = |x: &Array2<f64>, k: &[usize]| {
            let flat: Vec<f64> = k.iter().enumerate().flat_map(|(i, &c)| std::iter::repeat_n(x[[i, 0]], c)).collect();
            EmpiricalDistribution::uniform(Array2::from_shape_vec((flat.len(), 1), flat).unwrap()).unwrap()
        };
        let (p, q) = (weighted(&xs, &counts_p), weighted(&ys, &counts_q));
        let (ps, qs) = (split(&xs, &counts_p), split(&ys, &counts_q));
        let exact = transport_cost(&p, &q, 2, Ground::Euclidean, Method::Exact).unwrap();
        let brute = brute_force_ot(&ps, &qs, &cost_matrix(&ps, &qs, Ground::Euclidean, 2).unwrap()).unwrap();
        prop_assert!((exact - brute).abs() <= 1e-9 * brute.max(1.0));
    }

    #[test]
    fn metric_axioms(
        (a, b, c) in (1usize..=6, 1usize..=3).prop_flat_map(|(n, d)| (cloud(n, d), cloud(n, d), cloud(n, d))),
        g in ground(),
        p in 1u32..=2,
    ) {
        prop_assert!(w(&a, &a, p, g).abs() <= 1e-12);
        prop_assert!((w(&a, &b, p, g) - w(&b, &a, p, g)).abs() <= 1e-9);
        prop_assert!(w(&a, &c, p, g) <= w(&a, &b, p, g) + w(&b, &c, p, g) + 1e-9);
    }

    #[test]
    fn translation_moves_w2_by_at_most_the_shift(
        (p, q) in pair(),
        scale in 0.0f64..1.0,
        dir in prop::collection::vec(-1.0f64..1.0, 3),
    ) {
        let t: Vec<f64> = dir[..p.dim()].iter().map(|v| v * scale).collect();
        let norm = t.iter().map(|v| v * v).sum::<f64>().sqrt();
        let moved = q.translate(&t).unwrap();
        let before = w(&p, &q, 2, Ground::Euclidean);
        let after = w(&p, &moved, 2, Ground::Euclidean);
        prop_assert!((after - before).abs() <= norm + 1e-9);
        // A cloud against its own translate is exactly |t| away.
        prop_assert!((w(&p, &p.translate(&t).unwrap(), 2, Ground::Euclidean) - norm).abs() <= 1e-9);
    }

    #[test]
    fn sinkhorn_bounds_exact_from_above((p, q) in pair(), eps in 0.05f64..1.0) {
        let cost = cost_matrix(&p, &q, Ground::Euclidean, 2).unwrap();
        let (_, exact) = solve_exact(&p, &q, &cost).unwrap();
        let r = solve_sinkhorn(&p, &q, &cost, eps, 50_000, 1e-10).unwrap();
        prop_assert!(r.value >= exact - 1e-9);
        let (rr, cr) = r.coupling.marginal_residuals(p.weights(), q.weights());
        prop_assert!(rr <= 1e-12 && cr <= 1e-12);
    }
}

#[test]
fn sinkhorn_approaches_exact_as_epsilon_shrinks() {
    let p = EmpiricalDistribution::uniform(ndarray::array![[0.0, 0.0], [1.0, 0.3], [0.2, 1.0]])
        .unwrap();
    let q = EmpiricalDistribution::uniform(ndarray::array![[2.0, 0.5], [0.4, 2.2], [1.1, 1.1]])
        .unwrap();
    let cost = cost_matrix(&p, &q, Ground::Euclidean, 2).unwrap();
    let (_, exact) = solve_exact(&p, &q, &cost).unwrap();
    let mut last = f64::INFINITY;
    for eps in [1.0, 0.3, 0.1, 0.03, 0.01] {
        let gap = solve_sinkhorn(&p, &q, &cost, eps, 200_000, 1e-12)
            .unwrap()
            .value
            - exact;
        assert!(gap <= last + 1e-12, "eps {eps}: {gap} after {last}");
        last = gap;
    }
    assert!(last < 1e-5, "{last}");
}

#[test]
fn single_atoms() {
    let a = EmpiricalDistribution::dirac(&[0.0, 0.0]).unwrap();
    let b = EmpiricalDistribution::dirac(&[3.0, 4.0]).unwrap();
    assert_eq!(w(&a, &b, 2, Ground::Euclidean), 5.0);
    assert_eq!(w(&a, &b, 1, Ground::L1), 7.0);
    let sink = transport_cost(
        &a,
        &b,
        2,
        Ground::Euclidean,
        Method::Sinkhorn {
            epsilon: 0.5,
            max_iter: 100,
            tol: 1e-12,
        },
    )
    .unwrap();
    assert_eq!(sink, 25.0);
}

#[test]
fn maps_of_forced_marginals() {
    let p = EmpiricalDistribution::uniform(ndarray::array![[0.0], [1.0]]).unwrap();
    let q = EmpiricalDistribution::dirac(&[4.0]).unwrap();
    let cost = cost_matrix(&p, &q, Ground::Euclidean, 2).unwrap();
    let (plan, _) = solve_exact(&p, &q, &cost).unwrap();
    let map = extract_map(&plan, &p, &q).unwrap();
    assert_eq!(map.images, ndarray::array![[4.0], [4.0]]);
    assert!(!map.is_permutation);
}

#[test]
fn oracle_rejects_oversized_and_weighted_inputs() {
    let big = EmpiricalDistribution::uniform(Array2::zeros((9, 1))).unwrap();
    let cost = Array2::zeros((9, 9));
    assert!(brute_force_ot(&big, &big, &cost).is_err());
    let weighted =
        EmpiricalDistribution::new(ndarray::array![[0.0], [1.0]], ndarray::array![0.25, 0.75])
            .unwrap();
    assert!(brute_force_ot(&weighted, &weighted, &Array2::zeros((2, 2))).is_err());
}
