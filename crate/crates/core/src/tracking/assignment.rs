//! Kuhn–Munkres assignment on rectangular cost matrices with forbidden pairs.
//!
//! Forbidden entries (cost above the gate, or non-finite) are priced at a
//! constant larger than any sum of allowed costs, so the optimum first
//! maximizes the number of allowed pairs and then minimizes their total cost.

#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    /// (row, column) pairs sorted by row.
    pub pairs: Vec<(usize, usize)>,
    pub unassigned_rows: Vec<usize>,
    pub unassigned_cols: Vec<usize>,
    /// Sum of the costs of `pairs`, accumulated in row order.
    pub cost: f64,
}

fn allowed(c: f64, gate: f64) -> bool {
    c.is_finite() && c <= gate
}

/// Optimal assignment between the rows and columns of `cost`.
pub fn solve_assignment(cost: &[Vec<f64>], gate: f64) -> Assignment {
    let rows = cost.len();
    let cols = cost.first().map_or(0, Vec::len);
    assert!(cost.iter().all(|r| r.len() == cols), "ragged cost matrix");

    let n = rows.max(cols);
    let max_allowed = cost
        .iter()
        .flatten()
        .copied()
        .filter(|&c| allowed(c, gate))
        .fold(0.0f64, |m, c| m.max(c.abs()));
    let big = (max_allowed + 1.0) * (n as f64 + 1.0);
    let at = |i: usize, j: usize| -> f64 {
        if i < rows && j < cols && allowed(cost[i][j], gate) {
            cost[i][j]
        } else {
            big
        }
    };

    // Shortest augmenting path with potentials; 1-based with a virtual column 0.
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
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

    let mut row_to_col = vec![None; rows];
    for j in 1..=n {
        let i = p[j];
        if i >= 1 && i - 1 < rows && j - 1 < cols && allowed(cost[i - 1][j - 1], gate) {
            row_to_col[i - 1] = Some(j - 1);
        }
    }
    let mut col_used = vec![false; cols];
    let mut pairs = Vec::new();
    let mut unassigned_rows = Vec::new();
    let mut total = 0.0;
    for (i, c) in row_to_col.iter().enumerate() {
        match c {
            Some(j) => {
                col_used[*j] = true;
                total += cost[i][*j];
                pairs.push((i, *j));
            }
            None => unassigned_rows.push(i),
        }
    }
    let unassigned_cols = (0..cols).filter(|&j| !col_used[j]).collect();
    Assignment {
        pairs,
        unassigned_rows,
        unassigned_cols,
        cost: total,
    }
}
