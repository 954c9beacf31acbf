//! Kuhn-Munkres (Hungarian) assignment on a square cost matrix, O(n³).

/// Returns `assign` with `assign[row] = col` minimizing the total cost.
pub fn min_cost_assignment(cost: &[Vec<i64>]) -> Vec<usize> {
    let n = cost.len();
    if n == 0 {
        return Vec::new();
    }
    debug_assert!(cost.iter().all(|r| r.len() == n));

    // Potentials and matching use 1-based indexing with a virtual column 0.
    const INF: i64 = i64::MAX / 4;
    let mut u = vec![0i64; n + 1];
    let mut v = vec![0i64; n + 1];
    let mut matched_row = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];

    for i in 1..=n {
        matched_row[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![INF; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = matched_row[j0];
            let mut delta = INF;
            let mut j1 = 0usize;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
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
                    u[matched_row[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if matched_row[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            matched_row[j0] = matched_row[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut assign = vec![0usize; n];
    for j in 1..=n {
        assign[matched_row[j] - 1] = j - 1;
    }
    assign
}

/// Maximum-weight matching on a (possibly rectangular) nonnegative weight
/// table; returns the matched weight total.
pub fn max_weight_matching(weights: &[Vec<u64>]) -> u64 {
    let rows = weights.len();
    let cols = weights.first().map_or(0, Vec::len);
    let size = rows.max(cols);
    if size == 0 {
        return 0;
    }
    let top = weights.iter().flatten().copied().max().unwrap_or(0) as i64;
    let weight = |r: usize, c: usize| -> i64 {
        if r < rows && c < cols {
            weights[r][c] as i64
        } else {
            0
        }
    };
    let cost: Vec<Vec<i64>> = (0..size)
        .map(|r| (0..size).map(|c| top - weight(r, c)).collect())
        .collect();
    min_cost_assignment(&cost)
        .into_iter()
        .enumerate()
        .map(|(r, c)| weight(r, c) as u64)
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classic_three_by_three() {
        let cost = vec![vec![4, 1, 3], vec![2, 0, 5], vec![3, 2, 2]];
        let a = min_cost_assignment(&cost);
        let total: i64 = a.iter().enumerate().map(|(r, &c)| cost[r][c]).sum();
        assert_eq!(total, 5);
    }

    #[test]
    fn rectangular_weights_are_padded() {
        let w = vec![vec![3, 1], vec![0, 4], vec![5, 5]];
        // best: row0->? rows 3, cols 2: pick (2,0)=5 + (1,1)=4 = 9
        assert_eq!(max_weight_matching(&w), 9);
    }
}
