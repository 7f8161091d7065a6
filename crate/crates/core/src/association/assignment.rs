use alloc::vec;
use alloc::vec::Vec;

/// Tracklet × detection affinities with the depth-filter mask.
#[derive(Debug, Clone, PartialEq)]
pub struct AffinityMatrix {
    pub rows: usize,
    pub cols: usize,
    /// Row-major values in `[0, 1]`.
    pub values: Vec<f64>,
    /// Entries with `kept == false` never enter the assignment.
    pub kept: Vec<bool>,
}

impl AffinityMatrix {
    pub fn new(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            values: vec![0.0; rows * cols],
            kept: vec![true; rows * cols],
        }
    }

    pub fn from_rows(rows: &[&[f64]]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        let mut m = Self::new(rows.len(), cols);
        for (i, r) in rows.iter().enumerate() {
            assert_eq!(r.len(), cols, "ragged affinity rows");
            m.values[i * cols..(i + 1) * cols].copy_from_slice(r);
        }
        m
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.cols + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: f64, kept: bool) {
        self.values[row * self.cols + col] = value;
        self.kept[row * self.cols + col] = kept;
    }

    pub fn is_kept(&self, row: usize, col: usize) -> bool {
        self.kept[row * self.cols + col]
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Assignment {
    /// `(row, col)` pairs sorted by row.
    pub pairs: Vec<(usize, usize)>,
    pub unmatched_rows: Vec<usize>,
    pub unmatched_cols: Vec<usize>,
}

/// Minimum-cost assignment of every row to a distinct column, `rows <= cols`
/// (Kuhn-Munkres with potentials).
fn hungarian_min(cost: &[f64], rows: usize, cols: usize) -> Vec<usize> {
    debug_assert!(rows <= cols);
    let a = |i: usize, j: usize| cost[(i - 1) * cols + (j - 1)];
    let mut u = vec![0.0; rows + 1];
    let mut v = vec![0.0; cols + 1];
    let mut p = vec![0usize; cols + 1];
    let mut way = vec![0usize; cols + 1];
    for i in 1..=rows {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; cols + 1];
        let mut used = vec![false; cols + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=cols {
                if used[j] {
                    continue;
                }
                let cur = a(i0, j) - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=cols {
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
    let mut assignment = vec![usize::MAX; rows];
    for j in 1..=cols {
        if p[j] != 0 {
            assignment[p[j] - 1] = j - 1;
        }
    }
    assignment
}

/// Maximum-weight assignment on a dense row-major matrix. Every row of the
/// smaller side receives a partner; callers drop pairs they consider
/// non-edges. Returns the column of each row, if any.
pub fn max_weight_matching(weights: &[f64], rows: usize, cols: usize) -> Vec<Option<usize>> {
    assert_eq!(weights.len(), rows * cols);
    if rows == 0 || cols == 0 {
        return vec![None; rows];
    }
    let top = weights.iter().cloned().fold(0.0, f64::max);
    if rows <= cols {
        let cost: Vec<f64> = weights.iter().map(|w| top - w).collect();
        hungarian_min(&cost, rows, cols)
            .into_iter()
            .map(Some)
            .collect()
    } else {
        let mut cost = vec![0.0; rows * cols];
        for i in 0..rows {
            for j in 0..cols {
                cost[j * rows + i] = top - weights[i * cols + j];
            }
        }
        let mut out = vec![None; rows];
        for (j, i) in hungarian_min(&cost, cols, rows).into_iter().enumerate() {
            out[i] = Some(j);
        }
        out
    }
}

/// Maximum-total-affinity matching over kept entries whose affinity reaches
/// `accept_threshold`; everything else ends up unmatched.
pub fn solve_assignment(m: &AffinityMatrix, accept_threshold: f64) -> Assignment {
    let admissible: Vec<f64> = m
        .values
        .iter()
        .zip(&m.kept)
        .map(|(&v, &k)| {
            if k && v >= accept_threshold && v > 0.0 {
                v
            } else {
                0.0
            }
        })
        .collect();
    let matching = max_weight_matching(&admissible, m.rows, m.cols);
    let mut out = Assignment::default();
    let mut col_used = vec![false; m.cols];
    for (i, col) in matching.into_iter().enumerate() {
        match col {
            Some(j) if admissible[i * m.cols + j] > 0.0 => {
                out.pairs.push((i, j));
                col_used[j] = true;
            }
            _ => out.unmatched_rows.push(i),
        }
    }
    out.unmatched_cols = (0..m.cols).filter(|&j| !col_used[j]).collect();
    out
}
