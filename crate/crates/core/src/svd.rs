//! Singular value decomposition, operator absolute value and trace norm.
//!
//! The main route diagonalizes A†A and recovers the left factor explicitly;
//! a one-sided Jacobi orthogonalization serves as fallback when that route
//! loses accuracy on ill-conditioned inputs.

use num_complex::Complex64 as C64;

use crate::eig::{herm_eig, herm_eigenvalues};
use crate::error::Result;
use crate::matrix::ComplexMatrix;
use crate::tol;

/// A = U · diag(σ) · V†, σ descending, U and V unitary.
#[derive(Clone, Debug)]
pub struct Svd {
    pub u: ComplexMatrix,
    pub singular_values: Vec<f64>,
    pub v: ComplexMatrix,
}

impl Svd {
    pub fn reconstruct(&self) -> ComplexMatrix {
        let n = self.singular_values.len();
        let mut scaled = ComplexMatrix::zeros(n);
        for c in 0..n {
            for r in 0..n {
                scaled.set(r, c, self.u.get(r, c) * self.singular_values[c]);
            }
        }
        scaled.mul(&self.v.adjoint()).expect("same dim")
    }
}

pub fn svd(a: &ComplexMatrix) -> Result<Svd> {
    let gram = a.adjoint().mul(a)?;
    let spec = herm_eig(&gram)?;
    let n = a.dim();
    let mut singular_values: Vec<f64> =
        spec.eigenvalues.iter().map(|&l| l.max(0.0).sqrt()).collect();
    let v = spec.eigenvectors;
    let sigma_max = singular_values.first().copied().unwrap_or(0.0);
    // Eigenvalues of A†A carry ~1e−15·σ_max² of noise, so σ below
    // ~1e−7·σ_max cannot be resolved on this route; treat such columns as
    // rank-deficient and let the fallback handle matrices that genuinely
    // live down there.
    let rank_tol = sigma_max * (n as f64).sqrt() * 1e-7;

    let mut u = ComplexMatrix::zeros(n);
    let mut deficient = Vec::new();
    for (k, sigma) in singular_values.iter_mut().enumerate() {
        if *sigma > rank_tol {
            let col: Vec<C64> = (0..n).map(|r| v.get(r, k)).collect();
            let img = a.apply(&col);
            for r in 0..n {
                u.set(r, k, img[r] / *sigma);
            }
        } else {
            *sigma = 0.0;
            deficient.push(k);
        }
    }
    complete_basis(&mut u, &deficient);

    let out = Svd { u, singular_values, v };
    let defect = reconstruction_defect(a, &out);
    if defect <= 1e-10 * sigma_max.max(1.0) && out.u.unitarity_defect() <= 1e-11 {
        return Ok(out);
    }
    one_sided_jacobi(a)
}

fn reconstruction_defect(a: &ComplexMatrix, s: &Svd) -> f64 {
    let rec = s.reconstruct();
    let mut defect: f64 = 0.0;
    for r in 0..a.dim() {
        for c in 0..a.dim() {
            defect = defect.max((rec.get(r, c) - a.get(r, c)).norm());
        }
    }
    defect
}

/// Fill the listed columns with unit vectors orthogonal to the existing ones.
fn complete_basis(u: &mut ComplexMatrix, deficient: &[usize]) {
    if deficient.is_empty() {
        return;
    }
    let n = u.dim();
    let filled: Vec<usize> = (0..n).filter(|k| !deficient.contains(k)).collect();
    let mut basis: Vec<Vec<C64>> = filled
        .iter()
        .map(|&k| (0..n).map(|r| u.get(r, k)).collect())
        .collect();
    let mut fill_iter = deficient.iter();
    for cand in 0..n {
        if basis.len() == n {
            break;
        }
        let mut vec: Vec<C64> = vec![C64::new(0.0, 0.0); n];
        vec[cand] = C64::new(1.0, 0.0);
        // Two rounds of Gram–Schmidt for numerical orthogonality.
        for _ in 0..2 {
            for b in &basis {
                let overlap: C64 = b.iter().zip(&vec).map(|(x, y)| x.conj() * y).sum();
                for (vi, bi) in vec.iter_mut().zip(b) {
                    *vi -= overlap * bi;
                }
            }
        }
        let norm: f64 = vec.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-8 {
            continue;
        }
        for z in &mut vec {
            *z /= norm;
        }
        let k = *fill_iter.next().expect("more deficient slots than candidates");
        for r in 0..n {
            u.set(r, k, vec[r]);
        }
        basis.push(vec);
    }
}

/// Hestenes one-sided Jacobi: orthogonalize the columns of A by right
/// rotations, accumulating them into V.
fn one_sided_jacobi(a: &ComplexMatrix) -> Result<Svd> {
    let n = a.dim();
    let mut b = a.clone().without_shape();
    let mut v = ComplexMatrix::identity(n);
    let eps = 1e-15;

    for _sweep in 0..60 {
        let mut rotated = false;
        for p in 0..n.saturating_sub(1) {
            for q in p + 1..n {
                let mut gpp = 0.0f64;
                let mut gqq = 0.0f64;
                let mut gpq = C64::new(0.0, 0.0);
                for r in 0..n {
                    let bp = b.get(r, p);
                    let bq = b.get(r, q);
                    gpp += bp.norm_sqr();
                    gqq += bq.norm_sqr();
                    gpq += bp.conj() * bq;
                }
                let mag = gpq.norm();
                if mag <= eps * (gpp * gqq).sqrt() || mag == 0.0 {
                    continue;
                }
                rotated = true;
                let phase = gpq / mag;
                let tau = (gqq - gpp) / (2.0 * mag);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let jqp = -s * phase.conj();
                let jqq = c * phase.conj();
                for r in 0..n {
                    let bp = b.get(r, p);
                    let bq = b.get(r, q);
                    b.set(r, p, bp * c + bq * jqp);
                    b.set(r, q, bp * s + bq * jqq);
                    let vp = v.get(r, p);
                    let vq = v.get(r, q);
                    v.set(r, p, vp * c + vq * jqp);
                    v.set(r, q, vp * s + vq * jqq);
                }
            }
        }
        if !rotated {
            break;
        }
    }

    let mut norms: Vec<f64> = (0..n)
        .map(|cidx| (0..n).map(|r| b.get(r, cidx).norm_sqr()).sum::<f64>().sqrt())
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| norms[y].partial_cmp(&norms[x]).unwrap());
    norms.sort_by(|x, y| y.partial_cmp(x).unwrap());

    let sigma_max = norms.first().copied().unwrap_or(0.0);
    let rank_tol = sigma_max * (n as f64) * 1e-14;
    let mut u = ComplexMatrix::zeros(n);
    let mut vv = ComplexMatrix::zeros(n);
    let mut deficient = Vec::new();
    for (new_c, &old_c) in order.iter().enumerate() {
        for r in 0..n {
            vv.set(r, new_c, v.get(r, old_c));
        }
        if norms[new_c] > rank_tol && norms[new_c] > 0.0 {
            for r in 0..n {
                u.set(r, new_c, b.get(r, old_c) / norms[new_c]);
            }
        } else {
            deficient.push(new_c);
        }
    }
    complete_basis(&mut u, &deficient);
    Ok(Svd { u, singular_values: norms, v: vv })
}

/// Operator absolute value √(A†A) = V·diag(σ)·V†; positive semidefinite with
/// the singular values of A.
pub fn op_abs(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    // Monomial matrices (≤ 1 entry per row/column) have diagonal A†A.
    if a.is_monomial(0.0) {
        let n = a.dim();
        let mut out = ComplexMatrix::zeros(n);
        for c in 0..n {
            let norm = (0..n).map(|r| a.get(r, c).norm_sqr()).sum::<f64>().sqrt();
            out.set(c, c, C64::new(norm, 0.0));
        }
        if let Some(shape) = a.shape() {
            return out.with_shape(shape.clone());
        }
        return Ok(out);
    }
    let s = svd(a)?;
    let n = a.dim();
    let mut out = ComplexMatrix::zeros(n);
    for (k, &sigma) in s.singular_values.iter().enumerate() {
        if sigma == 0.0 {
            continue;
        }
        for r in 0..n {
            let vr = s.v.get(r, k) * sigma;
            for c in 0..n {
                let val = out.get(r, c) + vr * s.v.get(c, k).conj();
                out.set(r, c, val);
            }
        }
    }
    let out = out.symmetrize();
    if let Some(shape) = a.shape() {
        return out.with_shape(shape.clone());
    }
    Ok(out)
}

/// Trace norm ‖A‖₁ = Σσᵢ. Hermitian inputs go through the eigensolver.
pub fn trace_norm(a: &ComplexMatrix) -> f64 {
    if a.is_monomial(0.0) {
        let n = a.dim();
        return (0..n)
            .map(|c| (0..n).map(|r| a.get(r, c).norm_sqr()).sum::<f64>().sqrt())
            .sum();
    }
    let scale = a.max_abs().max(1.0);
    if a.hermiticity_defect() <= tol::HERM_TOL * scale {
        let eigs = herm_eigenvalues(a).expect("hermiticity just checked");
        return eigs.iter().map(|x| x.abs()).sum();
    }
    let s = svd(a).expect("svd of square complex matrix");
    s.singular_values.iter().sum()
}
