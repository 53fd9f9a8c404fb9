//! Minimum-cost rectangular assignment (Hungarian method with potentials).

/// Solves `min sum cost[r][c]` over matchings of size `min(rows, cols)`.
///
/// Rectangular inputs are padded to square with a finite sentinel larger
/// than any real entry; padded pairs are dropped from the result. Output is
/// sorted by row.
pub fn hungarian(cost: &[Vec<f64>]) -> Vec<(usize, usize)> {
    let rows = cost.len();
    let cols = cost.first().map_or(0, Vec::len);
    if rows == 0 || cols == 0 {
        return Vec::new();
    }
    debug_assert!(cost.iter().all(|r| r.len() == cols));
    debug_assert!(cost.iter().flatten().all(|c| c.is_finite()));

    let n = rows.max(cols);
    let max_abs = cost.iter().flatten().fold(0.0f64, |m, c| m.max(c.abs()));
    let sentinel = 10.0 * max_abs + 1.0;
    let at = |r: usize, c: usize| -> f64 {
        if r < rows && c < cols {
            cost[r][c]
        } else {
            sentinel
        }
    };

    // 1-based potentials; p[col] holds the row matched to col
    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = at(i0 - 1, j - 1) - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut pairs: Vec<(usize, usize)> = (1..=n)
        .filter(|&j| p[j] != 0)
        .map(|j| (p[j] - 1, j - 1))
        .filter(|&(r, c)| r < rows && c < cols)
        .collect();
    pairs.sort_unstable();
    pairs
}

pub fn assignment_cost(cost: &[Vec<f64>], pairs: &[(usize, usize)]) -> f64 {
    pairs.iter().map(|&(r, c)| cost[r][c]).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Exhaustive minimum over injective maps from the shorter side.
    fn brute_force(cost: &[Vec<f64>]) -> f64 {
        let rows = cost.len();
        let cols = cost[0].len();
        let transpose = rows > cols;
        let (short, long) = if transpose { (cols, rows) } else { (rows, cols) };
        let get = |s: usize, l: usize| if transpose { cost[l][s] } else { cost[s][l] };
        fn rec(k: usize, short: usize, long: usize, used: &mut Vec<bool>, acc: f64, get: &dyn Fn(usize, usize) -> f64, best: &mut f64) {
            if k == short {
                *best = best.min(acc);
                return;
            }
            for l in 0..long {
                if !used[l] {
                    used[l] = true;
                    rec(k + 1, short, long, used, acc + get(k, l), get, best);
                    used[l] = false;
                }
            }
        }
        let mut best = f64::INFINITY;
        rec(0, short, long, &mut vec![false; long], 0.0, &get, &mut best);
        best
    }

    #[test]
    fn small_examples() {
        let a = vec![vec![0., 1.], vec![1., 0.]];
        assert_eq!(hungarian(&a), vec![(0, 0), (1, 1)]);
        let b = vec![vec![1., 2.], vec![2., 4.]];
        let m = hungarian(&b);
        assert_eq!(m, vec![(0, 1), (1, 0)]);
        assert_eq!(assignment_cost(&b, &m), 4.0);
    }

    #[test]
    fn empty_and_rectangular() {
        assert!(hungarian(&[]).is_empty());
        assert!(hungarian(&[vec![], vec![]]).is_empty());
        let wide = vec![vec![5., 1., 3.]];
        assert_eq!(hungarian(&wide), vec![(0, 1)]);
        let tall = vec![vec![5.], vec![-2.], vec![3.]];
        assert_eq!(hungarian(&tall), vec![(1, 0)]);
    }

    #[test]
    fn negative_costs() {
        let c = vec![vec![-1.0, -0.2], vec![-0.9, -0.8]];
        let m = hungarian(&c);
        assert_eq!(m, vec![(0, 0), (1, 1)]);
    }

    proptest! {
        #[test]
        fn matches_brute_force(
            rows in 1usize..6, cols in 1usize..6,
            vals in proptest::collection::vec(-10.0..10.0f64, 36),
        ) {
            let cost: Vec<Vec<f64>> = (0..rows).map(|r| vals[r * 6..r * 6 + cols].to_vec()).collect();
            let m = hungarian(&cost);
            prop_assert_eq!(m.len(), rows.min(cols));
            let total = assignment_cost(&cost, &m);
            prop_assert!((total - brute_force(&cost)).abs() < 1e-9);
        }

        #[test]
        fn scale_invariant_assignment(
            vals in proptest::collection::vec(-10i32..10, 16),
            k in 1i32..8,
        ) {
            // integer entries keep every intermediate potential exact
            let cost: Vec<Vec<f64>> = (0..4).map(|r| (0..4).map(|c| vals[r * 4 + c] as f64).collect()).collect();
            let scaled: Vec<Vec<f64>> = cost.iter().map(|r| r.iter().map(|v| v * k as f64).collect()).collect();
            let a = hungarian(&cost);
            let b = hungarian(&scaled);
            prop_assert_eq!(a, b);
        }
    }
}
