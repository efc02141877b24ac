//! Sparse LU factorization of a simplex basis with product-form updates.

/// Entries smaller than this are dropped during elimination.
const DROP_TOL: f64 = 1e-14;
/// Relative threshold for accepting a pivot within its column.
const THRESHOLD: f64 = 0.01;
/// Absolute magnitude below which a column counts as numerically empty.
const SINGULAR_TOL: f64 = 1e-11;

/// Basis positions and rows left unpivoted by a failed factorization.
#[derive(Debug)]
pub struct Singular {
    pub positions: Vec<usize>,
    pub rows: Vec<usize>,
}

struct Eta {
    pos: usize,
    pivot: f64,
    entries: Vec<(usize, f64)>,
}

pub struct Factor {
    m: usize,
    /// Pivot sequence: (row, position, diagonal value).
    pivots: Vec<(usize, usize, f64)>,
    /// Multipliers applied to the pivot row's value, per step.
    lower: Vec<Vec<(usize, f64)>>,
    /// Off-diagonal entries of each pivot row, keyed by position.
    upper: Vec<Vec<(usize, f64)>>,
    etas: Vec<Eta>,
    eta_nnz: usize,
    factor_nnz: usize,
}

impl Factor {
    /// Factors the `m x m` basis whose columns (by position) are given sparse.
    pub fn new(m: usize, columns: Vec<Vec<(usize, f64)>>) -> Result<Factor, Singular> {
        debug_assert_eq!(columns.len(), m);
        let mut cols = columns;
        let mut row_pat: Vec<Vec<usize>> = vec![Vec::new(); m];
        for (j, col) in cols.iter_mut().enumerate() {
            col.retain(|&(_, v)| v.abs() > DROP_TOL);
            for &(i, _) in col.iter() {
                row_pat[i].push(j);
            }
        }
        let mut col_done = vec![false; m];
        let mut row_done = vec![false; m];
        let mut slot = vec![usize::MAX; m];
        let mut pivots = Vec::with_capacity(m);
        let mut lower = Vec::with_capacity(m);
        let mut upper = Vec::with_capacity(m);
        // Bucket columns by current length.
        let mut buckets: Vec<Vec<usize>> = vec![Vec::new(); m + 2];
        for (j, col) in cols.iter().enumerate() {
            buckets[col.len().min(m + 1)].push(j);
        }
        let mut singular_cols = Vec::new();
        for _ in 0..m {
            // Smallest active column whose recorded length is current.
            let mut pick = None;
            'scan: for (len, bucket) in buckets.iter_mut().enumerate() {
                while let Some(j) = bucket.pop() {
                    if col_done[j] || cols[j].len().min(m + 1) != len {
                        continue;
                    }
                    pick = Some(j);
                    break 'scan;
                }
            }
            let Some(c) = pick else { break };
            let col = &cols[c];
            let max = col.iter().fold(0.0f64, |a, &(_, v)| a.max(v.abs()));
            if max < SINGULAR_TOL {
                col_done[c] = true;
                singular_cols.push(c);
                continue;
            }
            let mut best: Option<(usize, usize, f64)> = None;
            for &(i, v) in col {
                if v.abs() < THRESHOLD * max {
                    continue;
                }
                let count = row_pat[i].len();
                if best.map_or(true, |(_, bc, bv)| {
                    count < bc || (count == bc && v.abs() > bv.abs())
                }) {
                    best = Some((i, count, v));
                }
            }
            let (r, _, pv) = best.expect("threshold admits the max entry");
            let lcol: Vec<(usize, f64)> = cols[c]
                .iter()
                .filter(|&&(i, _)| i != r)
                .map(|&(i, v)| (i, v / pv))
                .collect();
            col_done[c] = true;
            row_done[r] = true;
            let mut urow = Vec::new();
            let pattern = std::mem::take(&mut row_pat[r]);
            for &j in &pattern {
                if col_done[j] {
                    continue;
                }
                let colj = &mut cols[j];
                let Some(k) = colj.iter().position(|&(i, _)| i == r) else {
                    continue;
                };
                let a_rj = colj.swap_remove(k).1;
                urow.push((j, a_rj));
                if !lcol.is_empty() {
                    for (k, &(i, _)) in colj.iter().enumerate() {
                        slot[i] = k;
                    }
                    for &(i, l) in &lcol {
                        let delta = -l * a_rj;
                        if slot[i] != usize::MAX {
                            colj[slot[i]].1 += delta;
                        } else {
                            slot[i] = colj.len();
                            colj.push((i, delta));
                            row_pat[i].push(j);
                        }
                    }
                    for &(i, _) in colj.iter() {
                        slot[i] = usize::MAX;
                    }
                    colj.retain(|&(_, v)| v.abs() > DROP_TOL);
                }
                buckets[colj.len().min(m + 1)].push(j);
            }
            pivots.push((r, c, pv));
            lower.push(lcol);
            upper.push(urow);
        }
        if !singular_cols.is_empty() || pivots.len() < m {
            let mut positions = singular_cols;
            positions.extend((0..m).filter(|&j| !col_done[j]));
            positions.sort_unstable();
            positions.dedup();
            let rows = (0..m).filter(|&i| !row_done[i]).collect();
            return Err(Singular { positions, rows });
        }
        let factor_nnz = lower.iter().chain(&upper).map(Vec::len).sum::<usize>() + m;
        Ok(Factor {
            m,
            pivots,
            lower,
            upper,
            etas: Vec::new(),
            eta_nnz: 0,
            factor_nnz,
        })
    }

    pub fn num_updates(&self) -> usize {
        self.etas.len()
    }

    /// Whether the update file has grown enough to warrant refactoring.
    pub fn bloated(&self) -> bool {
        self.eta_nnz > 2 * self.factor_nnz + 10 * self.m
    }

    /// Solves `B z = a` in place: `a` is indexed by row, the result by position.
    pub fn ftran(&self, a: &mut Vec<f64>) {
        let w = a;
        for (k, &(r, _, _)) in self.pivots.iter().enumerate() {
            let wr = w[r];
            if wr != 0.0 {
                for &(i, l) in &self.lower[k] {
                    w[i] -= l * wr;
                }
            }
        }
        let mut z = vec![0.0; self.m];
        for k in (0..self.pivots.len()).rev() {
            let (r, c, d) = self.pivots[k];
            let mut v = w[r];
            for &(j, u) in &self.upper[k] {
                v -= u * z[j];
            }
            z[c] = v / d;
        }
        for eta in &self.etas {
            let zp = z[eta.pos] / eta.pivot;
            z[eta.pos] = zp;
            if zp != 0.0 {
                for &(i, a) in &eta.entries {
                    z[i] -= a * zp;
                }
            }
        }
        *w = z;
    }

    /// Solves `y^T B = c^T` in place: `c` is indexed by position, `y` by row.
    pub fn btran(&self, c: &mut Vec<f64>) {
        let v = c;
        for eta in self.etas.iter().rev() {
            let mut s = v[eta.pos];
            for &(i, a) in &eta.entries {
                s -= v[i] * a;
            }
            v[eta.pos] = s / eta.pivot;
        }
        let mut w = vec![0.0; self.m];
        for (k, &(r, c, d)) in self.pivots.iter().enumerate() {
            let t = v[c] / d;
            w[r] = t;
            if t != 0.0 {
                for &(j, u) in &self.upper[k] {
                    v[j] -= u * t;
                }
            }
        }
        for k in (0..self.pivots.len()).rev() {
            let (r, _, _) = self.pivots[k];
            let mut s = w[r];
            for &(i, l) in &self.lower[k] {
                s -= l * w[i];
            }
            w[r] = s;
        }
        *v = w;
    }

    /// Records that position `pos` was replaced by a column with
    /// `B^-1 a = alpha`.
    pub fn update(&mut self, pos: usize, alpha: &[f64]) {
        let entries: Vec<(usize, f64)> = alpha
            .iter()
            .enumerate()
            .filter(|&(i, &a)| i != pos && a != 0.0)
            .map(|(i, &a)| (i, a))
            .collect();
        self.eta_nnz += entries.len() + 1;
        self.etas.push(Eta {
            pos,
            pivot: alpha[pos],
            entries,
        });
    }
}
