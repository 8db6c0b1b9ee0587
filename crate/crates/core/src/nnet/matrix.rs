/// Dense row-major matrix. All products run in a fixed loop order so results
/// are reproducible bit-for-bit.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Matrix { rows, cols, data }
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    /// `out += self * x`
    pub fn mul_vec_add(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.cols);
        debug_assert_eq!(out.len(), self.rows);
        for (o, row) in out.iter_mut().zip(self.data.chunks_exact(self.cols)) {
            *o += row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>();
        }
    }

    /// `out += self^T * y`
    pub fn tr_mul_vec_add(&self, y: &[f64], out: &mut [f64]) {
        debug_assert_eq!(y.len(), self.rows);
        debug_assert_eq!(out.len(), self.cols);
        for (&yr, row) in y.iter().zip(self.data.chunks_exact(self.cols)) {
            if yr == 0.0 {
                continue;
            }
            for (o, w) in out.iter_mut().zip(row) {
                *o += w * yr;
            }
        }
    }

    /// `self += y * x^T`
    pub fn add_outer(&mut self, y: &[f64], x: &[f64]) {
        debug_assert_eq!(y.len(), self.rows);
        debug_assert_eq!(x.len(), self.cols);
        for (&yr, row) in y.iter().zip(self.data.chunks_exact_mut(self.cols)) {
            if yr == 0.0 {
                continue;
            }
            for (w, v) in row.iter_mut().zip(x) {
                *w += yr * v;
            }
        }
    }
}
