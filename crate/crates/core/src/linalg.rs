//! Dense linear algebra for the regression fitter, generic over the scalar
//! type via `num_traits::Float`. The crate-level [`crate::Scalar`] alias
//! (f64) is what the pipeline instantiates; f32 works too and is exercised
//! in tests.
//!
//! The solver is a Householder QR with column pivoting — rank-revealing,
//! no normal equations — feeding least squares, dependent-column detection
//! and a condition estimate from the pivoted R diagonal.

use num_traits::Float;

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<F> {
    rows: usize,
    cols: usize,
    data: Vec<F>,
}

impl<F: Float> Matrix<F> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![F::zero(); rows * cols],
        }
    }

    pub fn from_rows(rows: &[Vec<F>]) -> Self {
        let r = rows.len();
        let c = rows.first().map(|r| r.len()).unwrap_or(0);
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend_from_slice(row);
        }
        Matrix { rows: r, cols: c, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> F {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: F) {
        self.data[r * self.cols + c] = v;
    }

    pub fn column(&self, c: usize) -> Vec<F> {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    /// Keep only the given columns, in order.
    pub fn select_columns(&self, keep: &[usize]) -> Matrix<F> {
        let mut out = Matrix::zeros(self.rows, keep.len());
        for r in 0..self.rows {
            for (j, &c) in keep.iter().enumerate() {
                out.set(r, j, self.get(r, c));
            }
        }
        out
    }

    pub fn mul_vec(&self, x: &[F]) -> Vec<F> {
        assert_eq!(x.len(), self.cols);
        (0..self.rows)
            .map(|r| {
                let mut acc = F::zero();
                for c in 0..self.cols {
                    acc = acc + self.get(r, c) * x[c];
                }
                acc
            })
            .collect()
    }

    pub fn col_norm(&self, c: usize) -> F {
        let mut acc = F::zero();
        for r in 0..self.rows {
            let v = self.get(r, c);
            acc = acc + v * v;
        }
        acc.sqrt()
    }
}

/// Householder QR with column pivoting of A (m×n, m ≥ 1).
///
/// After factorization, `qr` holds R in its upper triangle and the
/// Householder vectors below the diagonal; `perm[j]` is the original column
/// index pivoted into position j; `rank` counts diagonal entries above
/// `tol × |r_11|`.
pub struct PivotedQr<F> {
    qr: Matrix<F>,
    betas: Vec<F>,
    pub perm: Vec<usize>,
    pub rank: usize,
    pub diag: Vec<F>,
}

impl<F: Float> PivotedQr<F> {
    pub fn factor(a: &Matrix<F>, rel_tol: F) -> Self {
        let m = a.rows();
        let n = a.cols();
        let kmax = m.min(n);
        let mut qr = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut betas = vec![F::zero(); kmax];
        let mut diag: Vec<F> = Vec::with_capacity(kmax);

        let mut rank = 0usize;
        for k in 0..kmax {
            // pivot: the column with the largest residual norm below row k
            // (norms recomputed exactly; no downdating drift)
            let mut pivot = k;
            let mut best = F::zero();
            for c in k..n {
                let mut acc = F::zero();
                for r in k..m {
                    let v = qr.get(r, c);
                    acc = acc + v * v;
                }
                if acc > best {
                    best = acc;
                    pivot = c;
                }
            }
            let norm = best.sqrt();
            // every remaining column is (numerically) in the span of the
            // accepted pivots
            if norm == F::zero() {
                break;
            }
            if let Some(&first) = diag.first() {
                if norm <= rel_tol * first {
                    break;
                }
            }
            if pivot != k {
                for r in 0..m {
                    let tmp = qr.get(r, k);
                    qr.set(r, k, qr.get(r, pivot));
                    qr.set(r, pivot, tmp);
                }
                perm.swap(k, pivot);
            }

            // Householder reflector for column k below row k, stored scaled
            // so v[k] = 1
            let alpha = if qr.get(k, k) > F::zero() { -norm } else { norm };
            let v0 = qr.get(k, k) - alpha;
            for r in (k + 1)..m {
                let v = qr.get(r, k) / v0;
                qr.set(r, k, v);
            }
            qr.set(k, k, alpha);
            let mut vtv = F::one();
            for r in (k + 1)..m {
                let v = qr.get(r, k);
                vtv = vtv + v * v;
            }
            let two = F::one() + F::one();
            let beta = two / vtv;
            betas[k] = beta;
            // apply H = I − β v vᵀ to the trailing columns
            for c in (k + 1)..n {
                let mut dot = qr.get(k, c);
                for r in (k + 1)..m {
                    dot = dot + qr.get(r, k) * qr.get(r, c);
                }
                let scale = beta * dot;
                let new_kc = qr.get(k, c) - scale;
                qr.set(k, c, new_kc);
                for r in (k + 1)..m {
                    let v = qr.get(r, c) - scale * qr.get(r, k);
                    qr.set(r, c, v);
                }
            }
            diag.push(alpha.abs());
            rank += 1;
        }
        PivotedQr {
            qr,
            betas,
            perm,
            rank,
            diag,
        }
    }

    /// Apply Qᵀ to a vector (length m).
    pub fn q_transpose_mul(&self, b: &[F]) -> Vec<F> {
        let m = self.qr.rows();
        let mut y = b.to_vec();
        let kmax = self.betas.len();
        for k in 0..kmax {
            if self.betas[k] == F::zero() {
                continue;
            }
            let mut dot = y[k];
            for r in (k + 1)..m {
                dot = dot + self.qr.get(r, k) * y[r];
            }
            let scale = self.betas[k] * dot;
            y[k] = y[k] - scale;
            for r in (k + 1)..m {
                y[r] = y[r] - scale * self.qr.get(r, k);
            }
        }
        y
    }

    /// Solve R[..rank, ..rank] x = y[..rank] by back substitution, then
    /// scatter through the permutation. Columns beyond `rank` get zero.
    pub fn solve_ls(&self, b: &[F]) -> Vec<F> {
        let n = self.qr.cols();
        let y = self.q_transpose_mul(b);
        let mut x_pivoted = vec![F::zero(); n];
        for i in (0..self.rank).rev() {
            let mut acc = y[i];
            for j in (i + 1)..self.rank {
                acc = acc - self.qr.get(i, j) * x_pivoted[j];
            }
            x_pivoted[i] = acc / self.qr.get(i, i);
        }
        let mut x = vec![F::zero(); n];
        for (j, &orig) in self.perm.iter().enumerate() {
            x[orig] = x_pivoted[j];
        }
        x
    }

    /// Express a dependent (non-pivot) column in terms of the pivot basis:
    /// returns coefficients over `perm[..rank]`.
    pub fn dependent_representation(&self, j: usize) -> Vec<F> {
        // column j of the factored matrix holds Qᵀa_j in its first `rank`
        // entries: solve R[..rank, ..rank] c = (Qᵀ a_j)[..rank]
        let mut c = vec![F::zero(); self.rank];
        for i in (0..self.rank).rev() {
            let mut acc = self.qr.get(i, j);
            for k in (i + 1)..self.rank {
                acc = acc - self.qr.get(i, k) * c[k];
            }
            c[i] = acc / self.qr.get(i, i);
        }
        c
    }

    /// Condition estimate: ratio of the largest to smallest retained
    /// pivoted diagonal of R.
    pub fn condition_estimate(&self) -> F {
        if self.rank == 0 {
            return F::infinity();
        }
        let first = self.diag[0];
        let last = self.diag[self.rank - 1];
        if last == F::zero() {
            F::infinity()
        } else {
            first / last
        }
    }
}

/// Scale columns to unit norm (returning the scales) so ill-scaled count
/// matrices factor accurately; zero columns keep scale 1.
pub fn normalize_columns<F: Float>(a: &Matrix<F>) -> (Matrix<F>, Vec<F>) {
    let mut out = a.clone();
    let mut scales = Vec::with_capacity(a.cols());
    for c in 0..a.cols() {
        let norm = a.col_norm(c);
        let s = if norm == F::zero() { F::one() } else { norm };
        for r in 0..a.rows() {
            out.set(r, c, out.get(r, c) / s);
        }
        scales.push(s);
    }
    (out, scales)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn approx(a: f64, b: f64, tol: f64) {
        assert!(
            (a - b).abs() <= tol * (1.0 + b.abs()),
            "{a} != {b} (tol {tol})"
        );
    }

    #[test]
    fn exact_two_by_two_solve() {
        let a = Matrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 1.0]]);
        let qr = PivotedQr::factor(&a, 1e-12);
        assert_eq!(qr.rank, 2);
        let x = qr.solve_ls(&[5.0e-6, 3.0e-6]);
        approx(x[0], 2.0e-6, 1e-12);
        approx(x[1], 1.0e-6, 1e-12);
    }

    #[test]
    fn overdetermined_least_squares_residual_is_orthogonal() {
        let a = Matrix::from_rows(&[
            vec![1.0, 0.0],
            vec![1.0, 1.0],
            vec![1.0, 2.0],
            vec![1.0, 3.0],
        ]);
        let b = [1.0, 2.9, 5.1, 7.0];
        let qr = PivotedQr::factor(&a, 1e-12);
        let x = qr.solve_ls(&b);
        let fitted = a.mul_vec(&x);
        let residual: Vec<f64> = b.iter().zip(&fitted).map(|(bi, fi)| bi - fi).collect();
        for c in 0..a.cols() {
            let dot: f64 = a.column(c).iter().zip(&residual).map(|(x, y)| x * y).sum();
            assert!(dot.abs() < 1e-10, "residual not orthogonal to column {c}");
        }
    }

    #[test]
    fn rank_deficiency_detected() {
        // third column = first + second
        let a = Matrix::from_rows(&[
            vec![1.0, 0.0, 1.0],
            vec![0.0, 1.0, 1.0],
            vec![1.0, 1.0, 2.0],
            vec![2.0, 1.0, 3.0],
        ]);
        let qr = PivotedQr::factor(&a, 1e-10);
        assert_eq!(qr.rank, 2);
    }

    #[test]
    fn dependent_column_representation_recovers_combination() {
        let a = Matrix::from_rows(&[
            vec![1.0, 0.0, 1.0],
            vec![0.0, 1.0, 1.0],
            vec![1.0, 1.0, 2.0],
            vec![2.0, 1.0, 3.0],
        ]);
        let qr = PivotedQr::factor(&a, 1e-10);
        // the non-pivot position is the column (in pivoted order) at index
        // >= rank; reconstruct it from the basis and compare
        for j in qr.rank..a.cols() {
            let coeffs = qr.dependent_representation(j);
            let orig = qr.perm[j];
            let target = a.column(orig);
            let mut recon = vec![0.0; a.rows()];
            for (i, &c) in coeffs.iter().enumerate() {
                let basis = a.column(qr.perm[i]);
                for (r, v) in basis.iter().enumerate() {
                    recon[r] += c * v;
                }
            }
            for (r, t) in target.iter().enumerate() {
                approx(recon[r], *t, 1e-9);
            }
        }
    }

    #[test]
    fn condition_estimate_flags_near_singularity() {
        let good = Matrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0]]);
        let bad = Matrix::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0 + 1e-9]]);
        assert!(PivotedQr::factor(&good, 1e-14).condition_estimate() < 10.0);
        assert!(PivotedQr::factor(&bad, 1e-14).condition_estimate() > 1e6);
    }

    #[test]
    fn works_in_f32_too() {
        let a: Matrix<f32> = Matrix::from_rows(&[vec![2.0, 0.0], vec![0.0, 4.0]]);
        let qr = PivotedQr::factor(&a, 1e-6);
        let x = qr.solve_ls(&[2.0, 8.0]);
        assert!((x[0] - 1.0).abs() < 1e-5);
        assert!((x[1] - 2.0).abs() < 1e-5);
    }

    #[test]
    fn column_normalization_preserves_solutions() {
        let a = Matrix::from_rows(&[
            vec![1e6, 1.0],
            vec![2e6, 3.0],
            vec![3e6, 2.0],
        ]);
        let x_true = [3.0e-6, 0.5];
        let b = a.mul_vec(&x_true);
        let (an, scales) = normalize_columns(&a);
        let qr = PivotedQr::factor(&an, 1e-12);
        let xs = qr.solve_ls(&b);
        let x: Vec<f64> = xs.iter().zip(&scales).map(|(v, s)| v / s).collect();
        approx(x[0], x_true[0], 1e-10);
        approx(x[1], x_true[1], 1e-10);
    }
}
