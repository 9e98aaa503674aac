//! Hermitian eigendecomposition via cyclic Jacobi with threshold skipping.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::matrix::ComplexMatrix;
use crate::tol;

/// Eigenvalues (descending) and the matching unitary of column eigenvectors.
#[derive(Clone, Debug)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: ComplexMatrix,
}

impl Spectrum {
    pub fn min_eigenvalue(&self) -> f64 {
        *self.eigenvalues.last().unwrap_or(&0.0)
    }

    pub fn max_eigenvalue(&self) -> f64 {
        *self.eigenvalues.first().unwrap_or(&0.0)
    }

    /// V · f(diag) · V†.
    pub fn apply_fn(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let n = self.eigenvalues.len();
        let v = &self.eigenvectors;
        let mut out = ComplexMatrix::zeros(n);
        for (k, &lam) in self.eigenvalues.iter().enumerate() {
            let flam = f(lam);
            if flam == 0.0 {
                continue;
            }
            for r in 0..n {
                let vr = v.get(r, k) * flam;
                for c in 0..n {
                    let val = out.get(r, c) + vr * v.get(c, k).conj();
                    out.set(r, c, val);
                }
            }
        }
        out
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        self.apply_fn(|x| x)
    }
}

const MAX_SWEEPS: usize = 60;

/// Eigendecomposition of a Hermitian matrix.
///
/// Inputs Hermitian within [`tol::HERM_TOL`] are symmetrized and accepted;
/// anything worse is an error.
pub fn herm_eig(a: &ComplexMatrix) -> Result<Spectrum> {
    let defect = a.hermiticity_defect();
    let scale = a.max_abs().max(1.0);
    if defect > tol::HERM_TOL * scale {
        return Err(Error::NotHermitian { defect, tol: tol::HERM_TOL * scale });
    }
    let h = a.symmetrize();
    herm_eig_symmetrized(h, true)
}

/// Eigenvalues only; same contract as [`herm_eig`].
pub fn herm_eigenvalues(a: &ComplexMatrix) -> Result<Vec<f64>> {
    let defect = a.hermiticity_defect();
    let scale = a.max_abs().max(1.0);
    if defect > tol::HERM_TOL * scale {
        return Err(Error::NotHermitian { defect, tol: tol::HERM_TOL * scale });
    }
    let h = a.symmetrize();
    Ok(herm_eig_symmetrized(h, false)?.eigenvalues)
}

fn herm_eig_symmetrized(mut h: ComplexMatrix, want_vectors: bool) -> Result<Spectrum> {
    let n = h.dim();
    let mut v = ComplexMatrix::identity(n);
    if n == 1 {
        return Ok(Spectrum { eigenvalues: vec![h.get(0, 0).re], eigenvectors: v });
    }
    let frob = h.frobenius_norm().max(1.0);
    let target = 1e-14 * frob;

    let mut sweeps = 0;
    loop {
        let off = off_norm(&h);
        if off <= target {
            break;
        }
        if sweeps >= MAX_SWEEPS {
            return Err(Error::NoConvergence { sweeps, off });
        }
        // Entries already far below the mean off-diagonal level cannot delay
        // convergence this sweep; skip them.
        let skip = off / (n as f64) * 1e-3;
        for p in 0..n - 1 {
            for q in p + 1..n {
                rotate(&mut h, want_vectors.then_some(&mut v), p, q, skip);
            }
        }
        sweeps += 1;
    }

    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<f64> = (0..n).map(|i| h.get(i, i).re).collect();
    order.sort_by(|&a, &b| diag[b].partial_cmp(&diag[a]).unwrap());
    let eigenvalues: Vec<f64> = order.iter().map(|&i| diag[i]).collect();
    let mut vectors = ComplexMatrix::zeros(n);
    if want_vectors {
        for (new_c, &old_c) in order.iter().enumerate() {
            for r in 0..n {
                vectors.set(r, new_c, v.get(r, old_c));
            }
        }
    }
    Ok(Spectrum { eigenvalues, eigenvectors: vectors })
}

fn off_norm(h: &ComplexMatrix) -> f64 {
    let n = h.dim();
    let mut acc = 0.0;
    for p in 0..n {
        for q in p + 1..n {
            acc += h.get(p, q).norm_sqr();
        }
    }
    (2.0 * acc).sqrt()
}

/// One Jacobi rotation zeroing the (p,q) entry of the Hermitian `h`.
fn rotate(h: &mut ComplexMatrix, v: Option<&mut ComplexMatrix>, p: usize, q: usize, skip: f64) {
    let hpq = h.get(p, q);
    let b = hpq.norm();
    if b <= skip {
        return;
    }
    let n = h.dim();
    let alpha = h.get(p, p).re;
    let gamma = h.get(q, q).re;
    let phase = hpq / b;
    let tau = (gamma - alpha) / (2.0 * b);
    let t = if tau >= 0.0 {
        1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;

    // Unitary J: J[p][p]=c, J[p][q]=s, J[q][p]=-s·φ̄, J[q][q]=c·φ̄ with φ the
    // phase of h[p][q]; J†HJ zeroes the (p,q) entry.
    let jqp = -s * phase.conj();
    let jqq = c * phase.conj();

    // H ← H·J on columns p,q.
    for r in 0..n {
        let hp = h.get(r, p);
        let hq = h.get(r, q);
        h.set(r, p, hp * c + hq * jqp);
        h.set(r, q, hp * s + hq * jqq);
    }
    // H ← J†·H on rows p,q.
    for cidx in 0..n {
        let hp = h.get(p, cidx);
        let hq = h.get(q, cidx);
        h.set(p, cidx, hp * c + hq * jqp.conj());
        h.set(q, cidx, hp * s + hq * jqq.conj());
    }
    // Clean the rotated pair against rounding drift.
    h.set(p, q, C64::new(0.0, 0.0));
    h.set(q, p, C64::new(0.0, 0.0));
    let app = h.get(p, p).re;
    let aqq = h.get(q, q).re;
    h.set(p, p, C64::new(app, 0.0));
    h.set(q, q, C64::new(aqq, 0.0));

    if let Some(v) = v {
        for r in 0..n {
            let vp = v.get(r, p);
            let vq = v.get(r, q);
            v.set(r, p, vp * c + vq * jqp);
            v.set(r, q, vp * s + vq * jqq);
        }
    }
}

/// PSD test: min eigenvalue ≥ −tol·max(1, Σ|λᵢ|).
pub fn is_psd(a: &ComplexMatrix, tol: f64) -> Result<bool> {
    let eigs = herm_eigenvalues(a)?;
    let abs_sum: f64 = eigs.iter().map(|x| x.abs()).sum();
    let min = eigs.last().copied().unwrap_or(0.0);
    Ok(min >= -tol * abs_sum.max(1.0))
}
