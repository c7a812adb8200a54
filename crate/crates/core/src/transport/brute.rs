use ndarray::Array2;

use super::{check_sizes, EmpiricalDistribution};
use crate::error::{Error, Result};

/// Largest instance the permutation oracle accepts.
pub const BRUTE_FORCE_MAX: usize = 8;

/// Exact OT between equal-size uniform distributions by enumerating all
/// `N!` assignments (Heap's algorithm).
///
/// Independent of the simplex solver; used as its oracle.
pub fn brute_force_ot(
    source: &EmpiricalDistribution,
    target: &EmpiricalDistribution,
    cost: &Array2<f64>,
) -> Result<f64> {
    check_sizes(source, target, cost)?;
    let n = source.len();
    if n != target.len() {
        return Err(Error::invalid(
            "permutation oracle needs equally sized distributions",
        ));
    }
    if !source.is_uniform() || !target.is_uniform() {
        return Err(Error::invalid("permutation oracle needs uniform weights"));
    }
    if n > BRUTE_FORCE_MAX {
        return Err(Error::TooLarge {
            size: n,
            max: BRUTE_FORCE_MAX,
        });
    }
    let (best, _) = best_permutation(cost);
    Ok(best / n as f64)
}

/// Minimum total cost over all permutations and one minimizer.
pub(crate) fn best_permutation(cost: &Array2<f64>) -> (f64, Vec<usize>) {
    let n = cost.nrows();
    let mut perm: Vec<usize> = (0..n).collect();
    let total = |p: &[usize]| {
        p.iter()
            .enumerate()
            .map(|(i, &j)| cost[[i, j]])
            .sum::<f64>()
    };
    let mut best = total(&perm);
    let mut best_perm = perm.clone();
    let mut c = vec![0usize; n];
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            let v = total(&perm);
            if v < best {
                best = v;
                best_perm.clone_from(&perm);
            }
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    (best, best_perm)
}
