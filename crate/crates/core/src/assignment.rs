//! Minimum-cost bipartite assignment (Hungarian method with row potentials,
//! O(n²m)) over a dense rectangular cost matrix.

/// Solves the rectangular assignment problem. Returns, for every row, the
/// column it is assigned to; when there are more rows than columns the extra
/// rows get `None`. Every column is used at most once and exactly
/// `min(rows, cols)` rows are assigned.
///
/// Among assignments of equal total cost, pairs are settled in favour of the
/// lexicographically smaller (row, column) combination.
pub fn min_cost_assignment(cost: &[Vec<f64>]) -> Vec<Option<usize>> {
    let rows = cost.len();
    let cols = cost.first().map_or(0, Vec::len);
    if rows == 0 || cols == 0 {
        return vec![None; rows];
    }
    debug_assert!(cost.iter().all(|r| r.len() == cols));

    let mut assigned = if rows <= cols {
        hungarian(rows, cols, |r, c| cost[r][c])
    } else {
        let by_col = hungarian(cols, rows, |r, c| cost[c][r]);
        let mut out = vec![None; rows];
        for (c, r) in by_col.into_iter().enumerate() {
            if let Some(r) = r {
                out[r] = Some(c);
            }
        }
        out
    };
    settle_ties(cost, &mut assigned);
    assigned
}

/// Total cost of an assignment, summed in row order.
pub fn assignment_cost(cost: &[Vec<f64>], assigned: &[Option<usize>]) -> f64 {
    assigned
        .iter()
        .enumerate()
        .filter_map(|(r, c)| c.map(|c| cost[r][c]))
        .sum()
}

// Requires rows <= cols. Potentials u (rows) and v (cols) are kept 1-based
// with index 0 as the virtual source.
fn hungarian(rows: usize, cols: usize, cost: impl Fn(usize, usize) -> f64) -> Vec<Option<usize>> {
    let mut u = vec![0.0f64; rows + 1];
    let mut v = vec![0.0f64; cols + 1];
    let mut row_of_col = vec![0usize; cols + 1];
    let mut way = vec![0usize; cols + 1];

    for r in 1..=rows {
        row_of_col[0] = r;
        let mut col = 0usize;
        let mut min_to = vec![f64::INFINITY; cols + 1];
        let mut used = vec![false; cols + 1];
        loop {
            used[col] = true;
            let row = row_of_col[col];
            let mut delta = f64::INFINITY;
            let mut next = 0usize;
            for c in 1..=cols {
                if used[c] {
                    continue;
                }
                let reduced = cost(row - 1, c - 1) - u[row] - v[c];
                if reduced < min_to[c] {
                    min_to[c] = reduced;
                    way[c] = col;
                }
                if min_to[c] < delta {
                    delta = min_to[c];
                    next = c;
                }
            }
            for c in 0..=cols {
                if used[c] {
                    u[row_of_col[c]] += delta;
                    v[c] -= delta;
                } else {
                    min_to[c] -= delta;
                }
            }
            col = next;
            if row_of_col[col] == 0 {
                break;
            }
        }
        loop {
            let prev = way[col];
            row_of_col[col] = row_of_col[prev];
            col = prev;
            if col == 0 {
                break;
            }
        }
    }

    let mut out = vec![None; rows];
    for c in 1..=cols {
        if row_of_col[c] != 0 {
            out[row_of_col[c] - 1] = Some(c - 1);
        }
    }
    out
}

// Pairwise exchanges that keep the total cost exactly equal but move a row
// onto a smaller column index, or hand a free column to an earlier row.
fn settle_ties(cost: &[Vec<f64>], assigned: &mut [Option<usize>]) {
    let mut changed = true;
    while changed {
        changed = false;
        for a in 0..assigned.len() {
            for b in (a + 1)..assigned.len() {
                match (assigned[a], assigned[b]) {
                    (Some(ca), Some(cb)) if cb < ca => {
                        if cost[a][cb] + cost[b][ca] == cost[a][ca] + cost[b][cb] {
                            assigned.swap(a, b);
                            changed = true;
                        }
                    }
                    (None, Some(cb)) if cost[a][cb] == cost[b][cb] => {
                        assigned.swap(a, b);
                        changed = true;
                    }
                    _ => {}
                }
            }
        }
        for a in 0..assigned.len() {
            let Some(ca) = assigned[a] else { continue };
            for c in 0..ca {
                if !assigned.contains(&Some(c)) && cost[a][c] == cost[a][ca] {
                    assigned[a] = Some(c);
                    changed = true;
                    break;
                }
            }
        }
    }
}
