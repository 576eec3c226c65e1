//! Minimal dense symmetric-positive-definite helpers.
//!
//! The harness only ever factorizes small symmetric matrices (correlation
//! submatrices for partial correlations, posterior scale submatrices for
//! the Gaussian score), so a plain Cholesky is all that is needed.

/// Row-major square matrix.
#[derive(Debug, Clone)]
pub struct SymMatrix {
    pub n: usize,
    pub data: Vec<f64>,
}

impl SymMatrix {
    pub fn zeros(n: usize) -> Self {
        SymMatrix {
            n,
            data: vec![0.0; n * n],
        }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    /// Submatrix over the given index set (in-order).
    pub fn submatrix(&self, idx: &[usize]) -> SymMatrix {
        let m = idx.len();
        let mut out = SymMatrix::zeros(m);
        for (a, &i) in idx.iter().enumerate() {
            for (b, &j) in idx.iter().enumerate() {
                out.set(a, b, self.get(i, j));
            }
        }
        out
    }
}

/// Lower-triangular Cholesky factor; `None` if the matrix is not
/// numerically positive definite.
pub fn cholesky(m: &SymMatrix) -> Option<Vec<f64>> {
    let n = m.n;
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = m.get(i, j);
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            if i == j {
                if s <= 0.0 || !s.is_finite() {
                    return None;
                }
                l[i * n + i] = s.sqrt();
            } else {
                l[i * n + j] = s / l[j * n + j];
            }
        }
    }
    Some(l)
}

/// ln det of an SPD matrix via Cholesky; `None` if not positive definite.
pub fn ln_det_spd(m: &SymMatrix) -> Option<f64> {
    let n = m.n;
    if n == 0 {
        return Some(0.0);
    }
    let l = cholesky(m)?;
    let mut acc = 0.0;
    for i in 0..n {
        acc += l[i * n + i].ln();
    }
    Some(2.0 * acc)
}

/// Inverse of an SPD matrix via Cholesky; `None` if not positive definite.
pub fn invert_spd(m: &SymMatrix) -> Option<SymMatrix> {
    let n = m.n;
    let l = cholesky(m)?;
    // invert L in place (forward substitution on columns of I)
    let mut inv = SymMatrix::zeros(n);
    for col in 0..n {
        let mut y = vec![0.0; n];
        // L y = e_col
        for i in col..n {
            let mut s = if i == col { 1.0 } else { 0.0 };
            for k in col..i {
                s -= l[i * n + k] * y[k];
            }
            y[i] = s / l[i * n + i];
        }
        // L^T x = y
        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in (i + 1)..n {
                s -= l[k * n + i] * x[k];
            }
            x[i] = s / l[i * n + i];
        }
        for i in 0..n {
            inv.set(i, col, x[i]);
        }
    }
    Some(inv)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mat(n: usize, vals: &[f64]) -> SymMatrix {
        SymMatrix {
            n,
            data: vals.to_vec(),
        }
    }

    #[test]
    fn ln_det_2x2() {
        let m = mat(2, &[2.0, 0.5, 0.5, 1.0]);
        let det: f64 = 2.0 * 1.0 - 0.25;
        assert!((ln_det_spd(&m).unwrap() - det.ln()).abs() < 1e-12);
    }

    #[test]
    fn inverse_roundtrip() {
        let m = mat(3, &[4.0, 1.0, 0.5, 1.0, 3.0, 0.2, 0.5, 0.2, 2.0]);
        let inv = invert_spd(&m).unwrap();
        // m * inv ≈ I
        for i in 0..3 {
            for j in 0..3 {
                let mut s = 0.0;
                for k in 0..3 {
                    s += m.get(i, k) * inv.get(k, j);
                }
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((s - expect).abs() < 1e-12, "({i},{j}) = {s}");
            }
        }
    }

    #[test]
    fn not_pd_detected() {
        let m = mat(2, &[1.0, 2.0, 2.0, 1.0]); // eigenvalues 3, −1
        assert!(cholesky(&m).is_none());
        assert!(ln_det_spd(&m).is_none());
        // exactly singular
        let s = mat(2, &[1.0, 1.0, 1.0, 1.0]);
        assert!(invert_spd(&s).is_none());
    }

    #[test]
    fn empty_matrix_det() {
        assert_eq!(ln_det_spd(&SymMatrix::zeros(0)), Some(0.0));
    }
}
