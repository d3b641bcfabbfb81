//! Dense row-major containers for all numeric data in the crate.
//!
//! Everything is 64-bit; precision is a single place to change if a
//! lower-precision build is ever wanted.

/// A rows x cols matrix of `f64` in row-major order.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix2D {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix2D {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix2D { rows, cols, data: vec![0.0; rows * cols] }
    }

    /// Wraps an existing row-major buffer. Panics if the length does not
    /// match `rows * cols`.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols, "buffer length must equal rows*cols");
        Matrix2D { rows, cols, data }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let r = rows.len();
        let c = if r == 0 { 0 } else { rows[0].len() };
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend_from_slice(row);
        }
        Matrix2D { rows: r, cols: c, data }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    #[inline]
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// `self * other`, shapes (n x k) * (k x m) -> (n x m).
    pub fn matmul(&self, other: &Matrix2D) -> Matrix2D {
        assert_eq!(self.cols, other.rows, "inner dimensions must agree");
        let mut out = Matrix2D::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let a_row = self.row(i);
            let out_row = out.row_mut(i);
            for (j, &a) in a_row.iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                let b_row = other.row(j);
                for (o, &b) in out_row.iter_mut().zip(b_row) {
                    *o += a * b;
                }
            }
        }
        out
    }

    pub fn transpose(&self) -> Matrix2D {
        let mut out = Matrix2D::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.set(c, r, self.get(r, c));
            }
        }
        out
    }
}

/// A batch x time x features tensor of `f64` in row-major order.
#[derive(Clone, Debug, PartialEq)]
pub struct Tensor3D {
    batch: usize,
    time: usize,
    features: usize,
    data: Vec<f64>,
}

impl Tensor3D {
    pub fn zeros(batch: usize, time: usize, features: usize) -> Self {
        Tensor3D { batch, time, features, data: vec![0.0; batch * time * features] }
    }

    pub fn from_vec(batch: usize, time: usize, features: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), batch * time * features, "buffer length must equal batch*time*features");
        Tensor3D { batch, time, features, data }
    }

    #[inline]
    pub fn batch(&self) -> usize {
        self.batch
    }

    #[inline]
    pub fn time(&self) -> usize {
        self.time
    }

    #[inline]
    pub fn features(&self) -> usize {
        self.features
    }

    /// One time-step of one batch element, as a feature slice.
    #[inline]
    pub fn frame(&self, b: usize, t: usize) -> &[f64] {
        let start = (b * self.time + t) * self.features;
        &self.data[start..start + self.features]
    }

    #[inline]
    pub fn frame_mut(&mut self, b: usize, t: usize) -> &mut [f64] {
        let start = (b * self.time + t) * self.features;
        &mut self.data[start..start + self.features]
    }

    #[inline]
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Copies batch element `b` into a (time x features) matrix.
    pub fn element(&self, b: usize) -> Matrix2D {
        let start = b * self.time * self.features;
        Matrix2D::from_vec(
            self.time,
            self.features,
            self.data[start..start + self.time * self.features].to_vec(),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matmul_small() {
        let a = Matrix2D::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]);
        let b = Matrix2D::from_rows(&[vec![5.0, 6.0], vec![7.0, 8.0]]);
        let c = a.matmul(&b);
        assert_eq!(c.row(0), &[19.0, 22.0]);
        assert_eq!(c.row(1), &[43.0, 50.0]);
    }

    #[test]
    fn transpose_roundtrip() {
        let a = Matrix2D::from_rows(&[vec![1.0, 2.0, 3.0], vec![4.0, 5.0, 6.0]]);
        assert_eq!(a.transpose().transpose(), a);
    }

    #[test]
    fn tensor_frame_indexing() {
        let mut t = Tensor3D::zeros(2, 3, 4);
        t.frame_mut(1, 2)[3] = 7.0;
        assert_eq!(t.frame(1, 2)[3], 7.0);
        assert_eq!(t.frame(0, 0)[0], 0.0);
        assert_eq!(t.element(1).get(2, 3), 7.0);
    }
}
