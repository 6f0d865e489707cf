//! Complex banded matrices in LAPACK-style band storage and an unblocked
//! banded LU factorization with partial pivoting (gbtrf/gbtrs layout).

use crate::error::{Error, Result};
use crate::C64;

/// Band matrix with lower bandwidth `kl` and upper bandwidth `ku`.
/// Entry (i, j) is stored at `data[j * ldab + (kl + ku + i - j)]` for
/// j - ku ≤ i ≤ j + kl; the extra `kl` leading rows hold pivoting fill.
#[derive(Debug, Clone)]
pub struct BandedMatrix {
    pub n: usize,
    pub kl: usize,
    pub ku: usize,
    data: Vec<C64>,
    ldab: usize,
}

impl BandedMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let ldab = 2 * kl + ku + 1;
        BandedMatrix {
            n,
            kl,
            ku,
            data: vec![C64::new(0.0, 0.0); ldab * n],
            ldab,
        }
    }

    #[inline]
    fn slot(&self, i: usize, j: usize) -> usize {
        // storage covers the logical band plus kl rows of pivoting fill
        debug_assert!(i + self.kl + self.ku >= j && j + self.kl >= i, "outside band");
        j * self.ldab + (self.kl + self.ku + i - j)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> C64 {
        if i + self.ku < j || j + self.kl < i {
            C64::new(0.0, 0.0)
        } else {
            self.data[self.slot(i, j)]
        }
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: C64) {
        let s = self.slot(i, j);
        self.data[s] = v;
    }

    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: C64) {
        let s = self.slot(i, j);
        self.data[s] += v;
    }

    /// Shift the diagonal: A ← A - λ I.
    pub fn shift_diagonal(&mut self, lambda: C64) {
        for j in 0..self.n {
            let s = self.slot(j, j);
            self.data[s] -= lambda;
        }
    }

    pub fn matvec(&self, x: &[C64]) -> Vec<C64> {
        assert_eq!(x.len(), self.n);
        let mut y = vec![C64::new(0.0, 0.0); self.n];
        for j in 0..self.n {
            let ilo = j.saturating_sub(self.ku);
            let ihi = (j + self.kl).min(self.n - 1);
            let xj = x[j];
            for i in ilo..=ihi {
                y[i] += self.data[self.slot(i, j)] * xj;
            }
        }
        y
    }

    /// Max |A(i,j) - conj(A(j,i))| over the band.
    pub fn hermitian_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for j in 0..self.n {
            let ihi = (j + self.kl).min(self.n - 1);
            for i in j..=ihi {
                if i + self.ku >= j {
                    let d = (self.get(i, j) - self.get(j, i).conj()).norm();
                    worst = worst.max(d);
                }
            }
        }
        worst
    }

    /// LU factorization with partial pivoting. Consumes the matrix (the band
    /// array already reserves the fill rows).
    pub fn factor(mut self) -> Result<BandedLu> {
        let n = self.n;
        let kl = self.kl;
        let kuf = self.kl + self.ku; // upper bandwidth after fill
        let mut ipiv = vec![0usize; n];
        let mut min_pivot = f64::INFINITY;
        let mut max_pivot = 0.0f64;

        for j in 0..n {
            let ihi = (j + kl).min(n - 1);
            // pivot search in column j
            let mut p = j;
            let mut best = self.data[self.slot(j, j)].norm();
            for i in (j + 1)..=ihi {
                let v = self.data[self.slot(i, j)].norm();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            ipiv[j] = p;
            if best == 0.0 {
                return Err(Error::SolverFailure(format!(
                    "banded LU: exact zero pivot at column {j}"
                )));
            }
            min_pivot = min_pivot.min(best);
            max_pivot = max_pivot.max(best);
            let chi = (j + kuf).min(n - 1);
            if p != j {
                for c in j..=chi {
                    // both (j, c) and (p, c) are inside the filled band
                    let sj = self.slot(j, c);
                    let sp = self.slot(p, c);
                    self.data.swap(sj, sp);
                }
            }
            let piv = self.data[self.slot(j, j)];
            for i in (j + 1)..=ihi {
                let s = self.slot(i, j);
                self.data[s] /= piv;
            }
            for c in (j + 1)..=chi {
                let ujc = self.data[self.slot(j, c)];
                if ujc.norm_sqr() == 0.0 {
                    continue;
                }
                for i in (j + 1)..=ihi {
                    let lij = self.data[self.slot(i, j)];
                    if lij.norm_sqr() != 0.0 {
                        let s = self.slot(i, c);
                        self.data[s] -= lij * ujc;
                    }
                }
            }
        }
        Ok(BandedLu {
            mat: self,
            ipiv,
            min_pivot,
            max_pivot,
        })
    }
}

/// Factored banded matrix; solves are reusable and cheap.
#[derive(Debug, Clone)]
pub struct BandedLu {
    mat: BandedMatrix,
    ipiv: Vec<usize>,
    pub min_pivot: f64,
    pub max_pivot: f64,
}

impl BandedLu {
    pub fn n(&self) -> usize {
        self.mat.n
    }

    pub fn solve(&self, b: &[C64]) -> Vec<C64> {
        assert_eq!(b.len(), self.mat.n);
        let n = self.mat.n;
        let kl = self.mat.kl;
        let kuf = self.mat.kl + self.mat.ku;
        let mut x = b.to_vec();
        for j in 0..n {
            let p = self.ipiv[j];
            if p != j {
                x.swap(j, p);
            }
            let xj = x[j];
            if xj.norm_sqr() != 0.0 {
                let ihi = (j + kl).min(n - 1);
                for i in (j + 1)..=ihi {
                    x[i] -= self.mat.data[self.mat.slot(i, j)] * xj;
                }
            }
        }
        for j in (0..n).rev() {
            x[j] /= self.mat.data[self.mat.slot(j, j)];
            let xj = x[j];
            if xj.norm_sqr() != 0.0 {
                let ilo = j.saturating_sub(kuf);
                for i in ilo..j {
                    x[i] -= self.mat.data[self.mat.slot(i, j)] * xj;
                }
            }
        }
        x
    }
}
