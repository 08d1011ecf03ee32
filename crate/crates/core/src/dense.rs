use num_complex::Complex64;

/// Row-major dense complex matrix.
///
/// This exists for desk-scale checks: reconstructing an oracle-defined
/// operator, measuring decomposition error, verifying Hermiticity. It is not
/// an arithmetic library; only the handful of operations the checks need are
/// implemented.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl DenseMatrix {
    pub fn zeros(dim: usize) -> Self {
        DenseMatrix {
            dim,
            data: vec![Complex64::new(0.0, 0.0); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.set(i, i, Complex64::new(1.0, 0.0));
        }
        m
    }

    pub fn from_rows<const N: usize>(rows: &[[Complex64; N]; N]) -> Self {
        let mut m = Self::zeros(N);
        for (i, row) in rows.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                m.set(i, j, v);
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.data[row * self.dim + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: Complex64) {
        self.data[row * self.dim + col] = value;
    }

    pub fn add_assign_scaled(&mut self, other: &DenseMatrix, scale: Complex64) {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        for (a, b) in self.data.iter_mut().zip(other.data.iter()) {
            *a += scale * b;
        }
    }

    pub fn matmul(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..n {
                    let v = out.get(i, j) + a * other.get(k, j);
                    out.set(i, j, v);
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(v.len(), self.dim, "dimension mismatch");
        let mut out = vec![Complex64::new(0.0, 0.0); self.dim];
        for i in 0..self.dim {
            let mut acc = Complex64::new(0.0, 0.0);
            for j in 0..self.dim {
                acc += self.get(i, j) * v[j];
            }
            out[i] = acc;
        }
        out
    }

    pub fn conj_transpose(&self) -> DenseMatrix {
        let mut out = Self::zeros(self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                out.set(j, i, self.get(i, j).conj());
            }
        }
        out
    }

    /// Largest entry magnitude.
    pub fn max_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest entry magnitude of (self - other).
    pub fn max_norm_diff(&self, other: &DenseMatrix) -> f64 {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        self.data
            .iter()
            .zip(other.data.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Exact equality, no tolerance. Meaningful when both sides were built
    /// from the same oracle values or from integer-valued entries.
    pub fn equals_exact(&self, other: &DenseMatrix) -> bool {
        self.dim == other.dim && self.data == other.data
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        for i in 0..self.dim {
            for j in 0..self.dim {
                if (self.get(i, j) - self.get(j, i).conj()).norm() > tol {
                    return false;
                }
            }
        }
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_is_its_own_square() {
        let id = DenseMatrix::identity(4);
        assert!(id.matmul(&id).equals_exact(&id));
    }

    #[test]
    fn matmul_matches_hand_product() {
        let mut a = DenseMatrix::zeros(2);
        a.set(0, 1, Complex64::new(0.0, 1.0));
        a.set(1, 0, Complex64::new(0.0, -1.0));
        let sq = a.matmul(&a);
        assert!(sq.equals_exact(&DenseMatrix::identity(2)));
    }

    #[test]
    fn max_norm_diff_sees_largest_entry() {
        let a = DenseMatrix::zeros(2);
        let mut b = DenseMatrix::zeros(2);
        b.set(1, 1, Complex64::new(3.0, 4.0));
        assert_eq!(a.max_norm_diff(&b), 5.0);
    }
}
