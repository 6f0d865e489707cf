//! Dense Hermitian eigendecomposition backed by LAPACK (zheev family).

use crate::error::{Error, Result};
use crate::C64;
use ndarray::Array2;
use ndarray_linalg::{Eigh, UPLO};

/// Full eigendecomposition of a Hermitian matrix given as rows of length n.
/// Returns eigenvalues ascending and eigenvectors as columns (Vec per k),
/// orthonormal in the unweighted ℓ² inner product.
///
/// LAPACK receives the row-major buffer as its column-major transpose, which
/// for a Hermitian matrix is the conjugate; the returned eigenvectors then
/// diagonalize conj(A). We detect the convention on the computed factors and
/// conjugate if needed, so callers always get vectors of A itself.
pub fn hermitian_eig(a: &Array2<C64>) -> Result<(Vec<f64>, Vec<Vec<C64>>)> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::ShapeMismatch(format!(
            "hermitian_eig needs a square matrix, got {}x{}",
            n,
            a.ncols()
        )));
    }
    let (vals, vecs) = a
        .eigh(UPLO::Lower)
        .map_err(|e| Error::EigenFailure(format!("LAPACK eigh: {e}")))?;

    let residual_of = |col: usize, conjugate: bool| -> f64 {
        let mut res = 0.0f64;
        let v = vecs.column(col);
        for i in 0..n {
            let mut acc = C64::new(0.0, 0.0);
            for j in 0..n {
                let vj = if conjugate { v[j].conj() } else { v[j] };
                acc += a[(i, j)] * vj;
            }
            let vi = if conjugate { v[i].conj() } else { v[i] };
            res += (acc - vi * vals[col]).norm_sqr();
        }
        res.sqrt()
    };
    let probe_cols = [0, n / 2, n - 1];
    let raw: f64 = probe_cols.iter().map(|&c| residual_of(c, false)).sum();
    let conj: f64 = probe_cols.iter().map(|&c| residual_of(c, true)).sum();
    let conjugate = conj < raw;

    let eigvals: Vec<f64> = vals.to_vec();
    let eigvecs: Vec<Vec<C64>> = (0..n)
        .map(|k| {
            vecs.column(k)
                .iter()
                .map(|z| if conjugate { z.conj() } else { *z })
                .collect()
        })
        .collect();
    Ok((eigvals, eigvecs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;

    #[test]
    fn eig_residuals_and_orthonormality() {
        let n = 40;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let mut a = Array2::<C64>::zeros((n, n));
        for i in 0..n {
            for j in 0..=i {
                let re = rng.random::<f64>() - 0.5;
                let im = if i == j { 0.0 } else { rng.random::<f64>() - 0.5 };
                a[(i, j)] = C64::new(re, im);
                a[(j, i)] = C64::new(re, -im);
            }
        }
        let (vals, vecs) = hermitian_eig(&a).unwrap();
        assert!(vals.windows(2).all(|w| w[0] <= w[1]));
        for k in [0, n / 3, n - 1] {
            let v = &vecs[k];
            let mut res = 0.0f64;
            for i in 0..n {
                let mut acc = C64::new(0.0, 0.0);
                for j in 0..n {
                    acc += a[(i, j)] * v[j];
                }
                res += (acc - v[i] * vals[k]).norm_sqr();
            }
            assert!(res.sqrt() < 1e-11, "k={k} residual {:.3e}", res.sqrt());
        }
        let mut dot = C64::new(0.0, 0.0);
        for i in 0..n {
            dot += vecs[0][i].conj() * vecs[1][i];
        }
        assert!(dot.norm() < 1e-12);
    }

    #[test]
    fn diagonal_shift_moves_spectrum_exactly() {
        let n = 25;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        let mut a = Array2::<C64>::zeros((n, n));
        for i in 0..n {
            for j in 0..=i {
                let re = rng.random::<f64>() - 0.5;
                let im = if i == j { 0.0 } else { rng.random::<f64>() - 0.5 };
                a[(i, j)] = C64::new(re, im);
                a[(j, i)] = C64::new(re, -im);
            }
        }
        let mut b = a.clone();
        for i in 0..n {
            b[(i, i)] += C64::new(5.0, 0.0);
        }
        let (va, _) = hermitian_eig(&a).unwrap();
        let (vb, _) = hermitian_eig(&b).unwrap();
        for k in 0..n {
            assert!((vb[k] - va[k] - 5.0).abs() < 1e-10);
        }
    }
}
