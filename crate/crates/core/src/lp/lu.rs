//! Sparse LU factorization of a simplex basis, with product-form updates.
//!
//! Columns are eliminated left-looking in order of increasing density; each
//! pivot is picked among rows within a threshold of the largest candidate,
//! preferring sparse rows. With `B Q = L P U`, `Q` the step order of basis
//! positions and `P` the pivot rows, solves run through L, then U, then the
//! eta file of basis changes since the last factorization.

/// Borrowed sparse column: parallel row indices and values.
#[derive(Debug, Clone, Copy)]
pub(crate) struct ColRef<'a> {
    pub idx: &'a [usize],
    pub val: &'a [f64],
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Singular {
    /// Basis positions that found no acceptable pivot.
    pub positions: Vec<usize>,
    /// Rows left without a pivot, as many as `positions`.
    pub rows: Vec<usize>,
}

const PIVOT_THRESHOLD: f64 = 0.01;
const SINGULAR_TOL: f64 = 1e-9;
const DROP_TOL: f64 = 1e-14;

#[derive(Debug, Clone)]
struct Eta {
    pos: usize,
    pivot: f64,
    idx: Vec<usize>,
    val: Vec<f64>,
}

#[derive(Debug, Clone, Default)]
pub(crate) struct LuFactors {
    m: usize,
    pivot_row: Vec<usize>,
    step_pos: Vec<usize>,
    /// Steps whose L column is non-empty, increasing.
    l_steps: Vec<usize>,
    l_start: Vec<usize>,
    l_idx: Vec<usize>,
    l_val: Vec<f64>,
    u_start: Vec<usize>,
    u_idx: Vec<usize>,
    u_val: Vec<f64>,
    u_diag: Vec<f64>,
    etas: Vec<Eta>,
    zstep: Vec<f64>,
}

impl LuFactors {
    pub fn n_updates(&self) -> usize {
        self.etas.len()
    }

    /// Factorizes the `m x m` matrix whose position `k` column is `cols[k]`.
    pub fn factorize(m: usize, cols: &[ColRef<'_>]) -> Result<LuFactors, Singular> {
        assert_eq!(cols.len(), m);
        let mut row_count = vec![0usize; m];
        for c in cols {
            for &i in c.idx {
                row_count[i] += 1;
            }
        }
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by_key(|&k| (cols[k].idx.len(), k));

        let mut lu = LuFactors {
            m,
            pivot_row: Vec::with_capacity(m),
            step_pos: Vec::with_capacity(m),
            l_steps: Vec::new(),
            l_start: vec![0],
            l_idx: Vec::new(),
            l_val: Vec::new(),
            u_start: vec![0],
            u_idx: Vec::new(),
            u_val: Vec::new(),
            u_diag: Vec::with_capacity(m),
            etas: Vec::new(),
            zstep: vec![0.0; m],
        };
        let mut w = vec![0.0f64; m];
        let mut touched: Vec<usize> = Vec::new();
        let mut in_touched = vec![false; m];
        let mut row_step = vec![usize::MAX; m];
        let mut failed = Vec::new();

        for &pos in &order {
            let col = cols[pos];
            for (&i, &v) in col.idx.iter().zip(col.val) {
                if !in_touched[i] {
                    in_touched[i] = true;
                    touched.push(i);
                }
                w[i] += v;
            }
            for &s in &lu.l_steps {
                let v = w[lu.pivot_row[s]];
                if v == 0.0 {
                    continue;
                }
                for p in lu.l_start[s]..lu.l_start[s + 1] {
                    let i = lu.l_idx[p];
                    if !in_touched[i] {
                        in_touched[i] = true;
                        touched.push(i);
                    }
                    w[i] -= lu.l_val[p] * v;
                }
            }

            let mut max_abs = 0.0f64;
            for &i in &touched {
                if row_step[i] == usize::MAX {
                    max_abs = max_abs.max(w[i].abs());
                }
            }
            if max_abs < SINGULAR_TOL {
                failed.push(pos);
                for &i in &touched {
                    w[i] = 0.0;
                    in_touched[i] = false;
                }
                touched.clear();
                continue;
            }
            let mut pivot: Option<usize> = None;
            for &i in &touched {
                if row_step[i] != usize::MAX || w[i].abs() < PIVOT_THRESHOLD * max_abs {
                    continue;
                }
                pivot = match pivot {
                    None => Some(i),
                    Some(b) => {
                        let better = (row_count[i], std::cmp::Reverse(ordered(w[i].abs())), i)
                            < (row_count[b], std::cmp::Reverse(ordered(w[b].abs())), b);
                        Some(if better { i } else { b })
                    }
                };
            }
            let prow = pivot.expect("a candidate meets the threshold");
            let pval = w[prow];
            let step = lu.pivot_row.len();

            let mut u_entries: Vec<(usize, f64)> = Vec::new();
            let l_begin = lu.l_idx.len();
            for &i in &touched {
                let v = w[i];
                if i == prow || v.abs() <= DROP_TOL {
                    continue;
                }
                if row_step[i] != usize::MAX {
                    u_entries.push((row_step[i], v));
                } else {
                    lu.l_idx.push(i);
                    lu.l_val.push(v / pval);
                }
            }
            u_entries.sort_unstable_by_key(|e| e.0);
            for (s, v) in u_entries {
                lu.u_idx.push(s);
                lu.u_val.push(v);
            }
            lu.u_start.push(lu.u_idx.len());
            lu.u_diag.push(pval);
            if lu.l_idx.len() > l_begin {
                lu.l_steps.push(step);
            }
            lu.l_start.push(lu.l_idx.len());
            lu.pivot_row.push(prow);
            lu.step_pos.push(pos);
            row_step[prow] = step;

            for &i in &touched {
                w[i] = 0.0;
                in_touched[i] = false;
            }
            touched.clear();
        }

        if failed.is_empty() {
            Ok(lu)
        } else {
            let rows = (0..m).filter(|&i| row_step[i] == usize::MAX).collect();
            Err(Singular {
                positions: failed,
                rows,
            })
        }
    }

    /// Solves `B y = rhs`. `rhs` is indexed by row and is consumed; `out` is
    /// indexed by basis position.
    pub fn ftran(&mut self, rhs: &mut [f64], out: &mut [f64]) {
        let m = self.m;
        for &s in &self.l_steps {
            let v = rhs[self.pivot_row[s]];
            if v == 0.0 {
                continue;
            }
            for p in self.l_start[s]..self.l_start[s + 1] {
                rhs[self.l_idx[p]] -= self.l_val[p] * v;
            }
        }
        let z = &mut self.zstep;
        for k in 0..m {
            z[k] = rhs[self.pivot_row[k]];
        }
        for k in (0..m).rev() {
            let v = z[k];
            if v == 0.0 {
                out[self.step_pos[k]] = 0.0;
                continue;
            }
            let y = v / self.u_diag[k];
            out[self.step_pos[k]] = y;
            for p in self.u_start[k]..self.u_start[k + 1] {
                z[self.u_idx[p]] -= self.u_val[p] * y;
            }
        }
        for eta in &self.etas {
            let yr = out[eta.pos] / eta.pivot;
            out[eta.pos] = yr;
            if yr != 0.0 {
                for (&i, &a) in eta.idx.iter().zip(&eta.val) {
                    out[i] -= a * yr;
                }
            }
        }
    }

    /// Solves `B^T y = c`. `c` is indexed by basis position and is consumed;
    /// `out` is indexed by row.
    pub fn btran(&mut self, c: &mut [f64], out: &mut [f64]) {
        let m = self.m;
        for eta in self.etas.iter().rev() {
            let mut s = c[eta.pos];
            for (&i, &a) in eta.idx.iter().zip(&eta.val) {
                s -= a * c[i];
            }
            c[eta.pos] = s / eta.pivot;
        }
        let v = &mut self.zstep;
        for k in 0..m {
            let mut s = c[self.step_pos[k]];
            for p in self.u_start[k]..self.u_start[k + 1] {
                s -= self.u_val[p] * v[self.u_idx[p]];
            }
            v[k] = s / self.u_diag[k];
        }
        for k in 0..m {
            out[self.pivot_row[k]] = v[k];
        }
        for &s in self.l_steps.iter().rev() {
            let mut acc = 0.0;
            for p in self.l_start[s]..self.l_start[s + 1] {
                acc += self.l_val[p] * out[self.l_idx[p]];
            }
            out[self.pivot_row[s]] -= acc;
        }
    }

    /// Records that position `pos` now holds a column whose FTRAN image
    /// (before this update) is `alpha`.
    pub fn push_update(&mut self, pos: usize, alpha: &[f64]) {
        let mut idx = Vec::new();
        let mut val = Vec::new();
        for (i, &a) in alpha.iter().enumerate() {
            if i != pos && a.abs() > DROP_TOL {
                idx.push(i);
                val.push(a);
            }
        }
        self.etas.push(Eta {
            pos,
            pivot: alpha[pos],
            idx,
            val,
        });
    }
}

fn ordered(x: f64) -> u64 {
    // |x| is nonnegative, so the bit pattern orders like the value
    x.to_bits()
}
