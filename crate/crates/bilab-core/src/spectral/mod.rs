//! Boundary spectral data: ordered eigenpairs of the discrete operator with
//! Neumann traces of the eigenvectors, pairing diagnostics between two
//! operators, and Weyl-law / trace-growth reports.

mod snapshot;

pub use snapshot::{load_snapshot, save_snapshot, SnapshotHeader};

use crate::error::{Error, Result};
use crate::geometry::{boundary_norm, Grid, TracePair};
use crate::linalg::{hermitian_eig, smallest_eigenpairs, LanczosOptions};
use crate::operator::{neumann_trace, DiscreteOperator};
use crate::C64;
use ndarray::Array2;

/// Ordered eigenvalues, h1h2-orthonormal eigenvectors and their Neumann
/// traces. The traces are the boundary spectral data (λ_k, γ_N φ_k).
#[derive(Debug, Clone)]
pub struct EigenData {
    pub lambdas: Vec<f64>,
    pub vectors: Vec<Vec<C64>>,
    pub neumann_traces: Vec<TracePair>,
    pub k: usize,
    /// Worst relative eigen-residual ‖Aφ - λφ‖/(|λ|+1) observed at build time.
    pub max_residual: f64,
    pub grid_signature: String,
    pub coeff_signature: String,
}

#[derive(Debug, Clone, Copy)]
pub enum EigenMethod {
    /// Dense LAPACK decomposition (requires the full matrix; used when K is
    /// comparable to N or the grid is small).
    Dense,
    /// Shift-invert block Lanczos on the banded factorization.
    ShiftInvert { seed: u64 },
    /// Dense below `dense_limit` unknowns or when K > N/3, else shift-invert.
    Auto,
}

const DENSE_LIMIT: usize = 1200;

/// Compute the K algebraically smallest eigenpairs.
pub fn eigensolve(op: &DiscreteOperator, k: usize, method: EigenMethod) -> Result<EigenData> {
    let n = op.n();
    if k == 0 || k > n {
        return Err(Error::EigenFailure(format!(
            "requested K = {k} of an N = {n} operator"
        )));
    }
    let use_dense = match method {
        EigenMethod::Dense => true,
        EigenMethod::ShiftInvert { .. } => false,
        EigenMethod::Auto => n <= DENSE_LIMIT || 3 * k > n,
    };
    let (lambdas, mut vectors) = if use_dense {
        let a = op.dense();
        let (vals, vecs) = hermitian_eig(&a)?;
        (vals[..k].to_vec(), vecs[..k].to_vec())
    } else {
        let seed = match method {
            EigenMethod::ShiftInvert { seed } => seed,
            _ => 0x5eed,
        };
        let sigma = -(op.coeffs.bound_m + 10.0);
        let band = op.banded_shifted(C64::new(sigma, 0.0));
        let lu = band.factor()?;
        let solve = |x: &[C64]| lu.solve(x);
        let mut opts = LanczosOptions::for_count(k);
        opts.seed = seed;
        smallest_eigenpairs(op, &solve, sigma, k, &opts)?
    };

    // rescale to the h1·h2-weighted inner product and fix a reproducible phase
    let grid = &op.grid;
    let scale = 1.0 / (grid.h1 * grid.h2).sqrt();
    for v in vectors.iter_mut() {
        for z in v.iter_mut() {
            *z *= scale;
        }
        canonical_phase(v);
    }

    let mut max_residual = 0.0f64;
    for (lam, v) in lambdas.iter().zip(vectors.iter()) {
        let av = op.apply_clamped(v);
        let mut res = 0.0f64;
        for (a, x) in av.iter().zip(v.iter()) {
            res += (a - x * *lam).norm_sqr();
        }
        let res = (res.sqrt() * (grid.h1 * grid.h2).sqrt()) / (lam.abs() + 1.0);
        max_residual = max_residual.max(res);
    }

    let neumann_traces = vectors
        .iter()
        .map(|v| neumann_trace(op, v, None))
        .collect::<Result<Vec<_>>>()?;

    Ok(EigenData {
        lambdas,
        vectors,
        neumann_traces,
        k,
        max_residual,
        grid_signature: grid_signature(grid),
        coeff_signature: op.coeffs.spec.signature(),
    })
}

pub fn grid_signature(grid: &Grid) -> String {
    use sha2::{Digest, Sha256};
    let s = format!(
        "{}|{}|{}|{}|{}",
        grid.l1, grid.l2, grid.n1, grid.n2, grid.collar_width
    );
    let h = Sha256::digest(s.as_bytes());
    h.iter().take(12).map(|b| format!("{b:02x}")).collect()
}

/// Deterministic phase: rotate so the largest-magnitude entry is real positive.
fn canonical_phase(v: &mut [C64]) {
    let mut best = 0usize;
    let mut mag = 0.0f64;
    for (i, z) in v.iter().enumerate() {
        if z.norm_sqr() > mag {
            mag = z.norm_sqr();
            best = i;
        }
    }
    if mag == 0.0 {
        return;
    }
    let phase = v[best] / v[best].norm();
    let rot = phase.conj();
    for z in v.iter_mut() {
        *z *= rot;
    }
}

impl EigenData {
    /// Weighted L²(Ω) Gram defect max |(φ_i, φ_j) - δ_ij| over the first `kk`.
    pub fn orthonormality_defect(&self, grid: &Grid, kk: usize) -> f64 {
        let kk = kk.min(self.k);
        let mut worst = 0.0f64;
        for i in 0..kk {
            for j in 0..=i {
                let g = grid.inner(&self.vectors[i], &self.vectors[j]);
                let want = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((g - C64::new(want, 0.0)).norm());
            }
        }
        worst
    }

    /// Least-squares slope of log λ_k against log k over `k_lo..=k_hi` (1-based).
    pub fn weyl_slope(&self, k_lo: usize, k_hi: usize) -> f64 {
        let pts: Vec<(f64, f64)> = (k_lo..=k_hi.min(self.k))
            .filter(|&k| self.lambdas[k - 1] > 0.0)
            .map(|k| ((k as f64).ln(), self.lambdas[k - 1].ln()))
            .collect();
        fit_slope(&pts)
    }
}

pub fn fit_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    if pts.len() < 2 {
        return f64::NAN;
    }
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}

/// Per-k normalized trace magnitudes (Weyl-scaled boundedness diagnostics).
#[derive(Debug, Clone)]
pub struct TraceGrowthRow {
    pub k: usize,
    pub lambda: f64,
    pub trace_norm: f64,
    /// ‖γ_N φ_k‖ / (|λ_k| + 1)
    pub per_lambda: f64,
    /// ‖γ_N φ_k‖ / k^{4/n}
    pub per_weyl: f64,
}

pub fn trace_growth_report(data: &EigenData, grid: &Grid) -> Vec<TraceGrowthRow> {
    let exponent = 2.0; // 4/n with n = 2
    data.neumann_traces
        .iter()
        .enumerate()
        .map(|(idx, t)| {
            let k = idx + 1;
            let norm = boundary_norm(t, grid);
            TraceGrowthRow {
                k,
                lambda: data.lambdas[idx],
                trace_norm: norm,
                per_lambda: norm / (data.lambdas[idx].abs() + 1.0),
                per_weyl: norm / (k as f64).powf(exponent),
            }
        })
        .collect()
}

/// Align `d2` to `d1`: within near-degenerate clusters of `d1` apply the
/// unitary Procrustes rotation maximizing Σ Re(φ_{1,k}, φ_{2,k}), then fix
/// each global phase so the diagonal overlaps are real non-negative. The
/// traces receive the same transformation.
pub fn align_pair(d1: &EigenData, d2: &EigenData, grid: &Grid) -> Result<EigenData> {
    if d1.k != d2.k {
        return Err(Error::ShapeMismatch(format!(
            "eigendata sizes differ: {} vs {}",
            d1.k, d2.k
        )));
    }
    let k = d1.k;
    let mut out = d2.clone();
    let mut start = 0usize;
    while start < k {
        let mut end = start + 1;
        while end < k
            && (d1.lambdas[end] - d1.lambdas[end - 1]).abs()
                < 1e-6 * (1.0 + d1.lambdas[end - 1].abs())
        {
            end += 1;
        }
        let d = end - start;
        if d > 1 {
            // M[a][b] = (φ1_{start+a}, φ2_{start+b}); rotate block by polar factor of M
            let mut m = Array2::<C64>::zeros((d, d));
            for a in 0..d {
                for b in 0..d {
                    m[(a, b)] = grid.inner(&d1.vectors[start + a], &out.vectors[start + b]);
                }
            }
            let q = polar_unitary(&m)?;
            // replace block: φ2_new_a = Σ_b q[a][b]... apply so overlap becomes Hermitian PSD:
            // new φ2_col_a = Σ_b φ2_b · conj(q[(a, b)])
            let old_vecs: Vec<Vec<C64>> = (0..d).map(|b| out.vectors[start + b].clone()).collect();
            let old_traces: Vec<TracePair> =
                (0..d).map(|b| out.neumann_traces[start + b].clone()).collect();
            for a in 0..d {
                let mut v = vec![C64::new(0.0, 0.0); old_vecs[0].len()];
                let mut t = TracePair {
                    c0: vec![C64::new(0.0, 0.0); old_traces[0].len()],
                    c1: vec![C64::new(0.0, 0.0); old_traces[0].len()],
                };
                for b in 0..d {
                    let c = q[(a, b)].conj();
                    if c.norm_sqr() == 0.0 {
                        continue;
                    }
                    for (x, y) in v.iter_mut().zip(old_vecs[b].iter()) {
                        *x += c * y;
                    }
                    t.axpy(c, &old_traces[b]);
                }
                out.vectors[start + a] = v;
                out.neumann_traces[start + a] = t;
            }
        }
        start = end;
    }
    // global phases
    for i in 0..k {
        let ov = grid.inner(&d1.vectors[i], &out.vectors[i]);
        if ov.norm() > 1e-300 {
            let rot = ov / ov.norm();
            for z in out.vectors[i].iter_mut() {
                *z *= rot;
            }
            let t = out.neumann_traces[i].scale(rot);
            out.neumann_traces[i] = t;
        }
    }
    Ok(out)
}

/// Unitary polar factor Q of M (maximizes Re tr(Q^H M)) via the Hermitian
/// eigendecompositions of M^H M.
fn polar_unitary(m: &Array2<C64>) -> Result<Array2<C64>> {
    let d = m.nrows();
    let mut mhm = Array2::<C64>::zeros((d, d));
    for a in 0..d {
        for b in 0..d {
            let mut acc = C64::new(0.0, 0.0);
            for r in 0..d {
                acc += m[(r, a)].conj() * m[(r, b)];
            }
            mhm[(a, b)] = acc;
        }
    }
    let (vals, vecs) = hermitian_eig(&mhm)?;
    // (M^H M)^{-1/2} = V diag(1/sqrt(vals)) V^H
    let mut inv_sqrt = Array2::<C64>::zeros((d, d));
    for a in 0..d {
        for b in 0..d {
            let mut acc = C64::new(0.0, 0.0);
            for r in 0..d {
                let s = vals[r].max(1e-300).sqrt();
                acc += vecs[r][a] * vecs[r][b].conj() / s;
            }
            inv_sqrt[(a, b)] = acc;
        }
    }
    // Q = M (M^H M)^{-1/2}
    let mut q = Array2::<C64>::zeros((d, d));
    for a in 0..d {
        for b in 0..d {
            let mut acc = C64::new(0.0, 0.0);
            for r in 0..d {
                acc += m[(a, r)] * inv_sqrt[(r, b)];
            }
            q[(a, b)] = acc;
        }
    }
    Ok(q)
}

/// Pairing diagnostics between aligned spectral data sets.
#[derive(Debug, Clone)]
pub struct PairingDefect {
    pub delta_sup: f64,
    /// Max over the top quartile of k (finite-K stand-in for the limsup).
    pub delta_limsup_proxy: f64,
    /// Σ_k k^w · ‖γ_N(φ_{1,k}) - γ_N(φ_{2,k})‖ after alignment.
    pub s_series: f64,
}

pub fn pairing_defect(
    d1: &EigenData,
    d2: &EigenData,
    grid: &Grid,
    weight_exponent: f64,
) -> Result<PairingDefect> {
    if d1.k != d2.k {
        return Err(Error::ShapeMismatch(format!(
            "eigendata sizes differ: {} vs {}",
            d1.k, d2.k
        )));
    }
    let aligned = align_pair(d1, d2, grid)?;
    let k = d1.k;
    let mut delta_sup = 0.0f64;
    for i in 0..k {
        delta_sup = delta_sup.max((d1.lambdas[i] - aligned.lambdas[i]).abs());
    }
    let q_start = (3 * k) / 4;
    let mut proxy = 0.0f64;
    for i in q_start..k {
        proxy = proxy.max((d1.lambdas[i] - aligned.lambdas[i]).abs());
    }
    let mut series = 0.0f64;
    for i in 0..k {
        let diff = d1.neumann_traces[i].sub(&aligned.neumann_traces[i]);
        series += ((i + 1) as f64).powf(weight_exponent) * boundary_norm(&diff, grid);
    }
    Ok(PairingDefect {
        delta_sup,
        delta_limsup_proxy: proxy,
        s_series: series,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeffs::{CoefficientSpec, ScalarTerm, VectorTerm};
    use crate::operator::{assemble, CoefficientSet};
    use std::sync::Arc;

    fn op_with(n: usize, spec: &CoefficientSpec) -> DiscreteOperator {
        let g = Arc::new(Grid::new(1.0, 1.0, n, n, 0.15).unwrap());
        let cs = CoefficientSet::from_spec(&g, spec);
        assemble(g, cs).unwrap()
    }

    #[test]
    fn free_plate_spectrum_positive_and_orthonormal() {
        let op = op_with(12, &CoefficientSpec::free());
        let d = eigensolve(&op, 30, EigenMethod::Dense).unwrap();
        assert!(d.lambdas[0] > 0.0);
        assert!(d.lambdas.windows(2).all(|w| w[0] <= w[1]));
        assert!(d.orthonormality_defect(&op.grid, 30) < 1e-10);
        assert!(d.max_residual < 1e-8);
    }

    #[test]
    fn constant_shift_moves_eigenvalues_only() {
        let op0 = op_with(10, &CoefficientSpec::free());
        let op5 =
            op_with(10, &CoefficientSpec::free().with_q(ScalarTerm::Constant { value: 5.0 }));
        let d0 = eigensolve(&op0, 25, EigenMethod::Dense).unwrap();
        let d5 = eigensolve(&op5, 25, EigenMethod::Dense).unwrap();
        for i in 0..25 {
            assert!((d5.lambdas[i] - d0.lambdas[i] - 5.0).abs() < 1e-10);
        }
        let pd = pairing_defect(&d0, &d5, &op0.grid, 2.0).unwrap();
        assert!((pd.delta_sup - 5.0).abs() < 1e-9);
        assert!(pd.s_series < 1e-6, "series {}", pd.s_series);
    }

    #[test]
    fn lanczos_matches_dense_on_perturbed_operator() {
        let spec = CoefficientSpec::free()
            .with_q(ScalarTerm::Bump {
                center: [0.5, 0.5],
                width: 0.3,
                amplitude: 2.0,
            })
            .with_b(VectorTerm::PerpGradBump {
                center: [0.45, 0.55],
                width: 0.3,
                amplitude: 1.0,
            });
        let op = op_with(12, &spec);
        let dd = eigensolve(&op, 40, EigenMethod::Dense).unwrap();
        let dl = eigensolve(&op, 40, EigenMethod::ShiftInvert { seed: 42 }).unwrap();
        for i in 0..40 {
            assert!(
                (dd.lambdas[i] - dl.lambdas[i]).abs() < 1e-7 * (dd.lambdas[i].abs() + 1.0),
                "i={i}: dense {} lanczos {}",
                dd.lambdas[i],
                dl.lambdas[i]
            );
        }
    }

    #[test]
    fn identical_data_align_to_zero_defect() {
        let op = op_with(10, &CoefficientSpec::free());
        let d = eigensolve(&op, 20, EigenMethod::Dense).unwrap();
        let pd = pairing_defect(&d, &d, &op.grid, 2.0).unwrap();
        assert_eq!(pd.delta_sup, 0.0);
        assert!(pd.s_series < 1e-12);
    }

    #[test]
    fn alignment_handles_degenerate_pairs_on_the_square() {
        // unit square spectrum has 2-fold degeneracies; a bump perturbation
        // splits them; alignment must still give Re(φ1, φ2) ≥ 0 per k
        let op1 = op_with(12, &CoefficientSpec::free());
        let op2 = op_with(
            12,
            &CoefficientSpec::free().with_q(ScalarTerm::Bump {
                center: [0.5, 0.5],
                width: 0.25,
                amplitude: 0.05,
            }),
        );
        let d1 = eigensolve(&op1, 24, EigenMethod::Dense).unwrap();
        let d2 = eigensolve(&op2, 24, EigenMethod::Dense).unwrap();
        let a2 = align_pair(&d1, &d2, &op1.grid).unwrap();
        for i in 0..24 {
            let ov = op1.grid.inner(&d1.vectors[i], &a2.vectors[i]);
            assert!(ov.re >= -1e-10, "k={i} overlap {ov}");
            assert!(ov.im.abs() < 1e-8, "k={i} phase not fixed: {ov}");
        }
    }

    #[test]
    fn trace_growth_rows_are_finite_and_positive() {
        let op = op_with(12, &CoefficientSpec::free());
        let d = eigensolve(&op, 30, EigenMethod::Dense).unwrap();
        let rows = trace_growth_report(&d, &op.grid);
        assert_eq!(rows.len(), 30);
        assert!(rows.iter().all(|r| r.trace_norm.is_finite() && r.per_weyl > 0.0));
    }
}
