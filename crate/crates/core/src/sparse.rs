//! Minimal compressed-sparse-row storage for the stencil operators.
//!
//! Only what the discretization needs: triplet assembly with duplicate
//! summation, matrix-vector products, transposition, diagonal scaling and
//! the product `Bᵀ diag(w) B` that builds every stiffness matrix.

#[derive(Debug, Clone)]
pub struct CsrMatrix {
    rows: usize,
    cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

/// Row-oriented builder; entries of a row may be pushed in any order and
/// duplicates are summed when the row is closed.
#[derive(Debug)]
pub struct CsrBuilder {
    cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
    pending: Vec<(usize, f64)>,
}

impl CsrBuilder {
    pub fn new(cols: usize) -> Self {
        Self {
            cols,
            row_ptr: vec![0],
            col_idx: Vec::new(),
            values: Vec::new(),
            pending: Vec::new(),
        }
    }

    pub fn push(&mut self, col: usize, value: f64) {
        debug_assert!(col < self.cols, "column {col} out of range {}", self.cols);
        self.pending.push((col, value));
    }

    pub fn finish_row(&mut self) {
        self.pending.sort_unstable_by_key(|&(c, _)| c);
        let mut last: Option<usize> = None;
        for &(c, v) in &self.pending {
            if last == Some(c) {
                *self.values.last_mut().expect("row has an entry") += v;
            } else {
                self.col_idx.push(c);
                self.values.push(v);
                last = Some(c);
            }
        }
        self.pending.clear();
        self.row_ptr.push(self.col_idx.len());
    }

    pub fn build(mut self) -> CsrMatrix {
        if !self.pending.is_empty() {
            self.finish_row();
        }
        CsrMatrix {
            rows: self.row_ptr.len() - 1,
            cols: self.cols,
            row_ptr: self.row_ptr,
            col_idx: self.col_idx,
            values: self.values,
        }
    }
}

impl CsrMatrix {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Column indices and values of one row.
    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        self.col_idx[span.clone()]
            .iter()
            .copied()
            .zip(self.values[span].iter().copied())
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.row(r).find(|&(cc, _)| cc == c).map_or(0.0, |(_, v)| v)
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.rows];
        self.mul_vec_into(x, &mut y);
        y
    }

    pub fn mul_vec_into(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.cols);
        assert_eq!(y.len(), self.rows);
        for (r, out) in y.iter_mut().enumerate() {
            let mut acc = 0.0;
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.values[k] * x[self.col_idx[k]];
            }
            *out = acc;
        }
    }

    pub fn transpose(&self) -> CsrMatrix {
        let mut counts = vec![0usize; self.cols + 1];
        for &c in &self.col_idx {
            counts[c + 1] += 1;
        }
        for c in 0..self.cols {
            counts[c + 1] += counts[c];
        }
        let mut next = counts.clone();
        let mut col_idx = vec![0; self.nnz()];
        let mut values = vec![0.0; self.nnz()];
        for r in 0..self.rows {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                let c = self.col_idx[k];
                let dst = next[c];
                col_idx[dst] = r;
                values[dst] = self.values[k];
                next[c] += 1;
            }
        }
        CsrMatrix {
            rows: self.cols,
            cols: self.rows,
            row_ptr: counts,
            col_idx,
            values,
        }
    }

    /// `Bᵀ diag(w) B` for `B = self`.
    pub fn gram(&self, w: &[f64]) -> CsrMatrix {
        assert_eq!(w.len(), self.rows);
        let bt = self.transpose();
        let mut marker = vec![usize::MAX; self.cols];
        let mut acc = vec![0.0; self.cols];
        let mut touched = Vec::new();
        let mut builder = CsrBuilder::new(self.cols);
        for i in 0..self.cols {
            touched.clear();
            for (r, bri) in bt.row(i) {
                let scale = bri * w[r];
                if scale == 0.0 {
                    continue;
                }
                for (j, brj) in self.row(r) {
                    if marker[j] != i {
                        marker[j] = i;
                        acc[j] = 0.0;
                        touched.push(j);
                    }
                    acc[j] += scale * brj;
                }
            }
            for &j in &touched {
                builder.push(j, acc[j]);
            }
            builder.finish_row();
        }
        builder.build()
    }

    /// Quadratic form `xᵀ self x`.
    pub fn quad_form(&self, x: &[f64]) -> f64 {
        let y = self.mul_vec(x);
        y.iter().zip(x).map(|(a, b)| a * b).sum()
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `y += alpha * x`
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> CsrMatrix {
        let mut b = CsrBuilder::new(3);
        b.push(0, 1.0);
        b.push(2, 2.0);
        b.push(0, 0.5);
        b.finish_row();
        b.push(1, -1.0);
        b.finish_row();
        b.build()
    }

    #[test]
    fn duplicates_are_summed() {
        let m = small();
        assert_eq!(m.get(0, 0), 1.5);
        assert_eq!(m.nnz(), 3);
    }

    #[test]
    fn transpose_matches_entries() {
        let m = small();
        let t = m.transpose();
        for r in 0..m.rows() {
            for c in 0..m.cols() {
                assert_eq!(m.get(r, c), t.get(c, r));
            }
        }
    }

    #[test]
    fn gram_matches_dense_product() {
        let m = small();
        let w = [2.0, 3.0];
        let g = m.gram(&w);
        for i in 0..3 {
            for j in 0..3 {
                let expected: f64 = (0..2).map(|r| m.get(r, i) * w[r] * m.get(r, j)).sum();
                assert!((g.get(i, j) - expected).abs() < 1e-14);
            }
        }
    }
}
