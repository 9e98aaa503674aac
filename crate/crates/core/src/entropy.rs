//! Von Neumann entropy, relative entropy and mutual information.
//!
//! All quantities are in bits (base-2 logarithms); `0·log 0 = 0`.

use crate::eig::{herm_eig, herm_eigenvalues};
use crate::error::{Error, Result};
use crate::matrix::ComplexMatrix;
use crate::tol;

fn validate_state(rho: &ComplexMatrix, tol_neg: f64) -> Result<Vec<f64>> {
    let tr = rho.trace();
    if (tr.re - 1.0).abs() > tol::STATE_TRACE_TOL || tr.im.abs() > tol::STATE_TRACE_TOL {
        return Err(Error::NotAState(format!("trace {} ≠ 1", tr)));
    }
    let mut eigs = herm_eigenvalues(rho)?;
    let scale = eigs.iter().map(|x| x.abs()).sum::<f64>().max(1.0);
    for lam in &mut eigs {
        if *lam < 0.0 {
            if *lam < -tol_neg * scale {
                return Err(Error::NotAState(format!("negative eigenvalue {lam:.3e}")));
            }
            *lam = 0.0;
        }
    }
    Ok(eigs)
}

/// S(ρ) = −Σ λ log₂ λ.
pub fn von_neumann_entropy(rho: &ComplexMatrix) -> Result<f64> {
    let eigs = validate_state(rho, tol::PSD_TOL)?;
    Ok(shannon(&eigs))
}

/// Shannon entropy in bits of an (unnormalized-tolerant) probability list.
pub fn shannon(p: &[f64]) -> f64 {
    -p.iter().filter(|&&x| x > 0.0).map(|&x| x * x.log2()).sum::<f64>()
}

/// S(ρ‖σ) = Tr ρ(log₂ρ − log₂σ); +∞ when supp(ρ) ⊄ supp(σ).
pub fn relative_entropy(rho: &ComplexMatrix, sigma: &ComplexMatrix) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimMismatch(format!("{} vs {}", rho.dim(), sigma.dim())));
    }
    let rho_eigs = validate_state(rho, tol::PSD_TOL)?;
    validate_state(sigma, tol::PSD_TOL)?;
    let s_rho = shannon(&rho_eigs);

    let sigma_spec = herm_eig(sigma)?;
    let n = sigma.dim();
    // ⟨w_k|ρ|w_k⟩ for every eigenvector of σ.
    let mut weights = vec![0.0f64; n];
    for k in 0..n {
        let col: Vec<_> = (0..n).map(|r| sigma_spec.eigenvectors.get(r, k)).collect();
        let img = rho.apply(&col);
        let w: num_complex::Complex64 =
            col.iter().zip(&img).map(|(a, b)| a.conj() * b).sum();
        weights[k] = w.re.max(0.0);
    }
    let mut outside = 0.0;
    let mut cross = 0.0;
    for (k, &lam) in sigma_spec.eigenvalues.iter().enumerate() {
        if lam <= tol::SUPPORT_TOL {
            outside += weights[k];
        } else {
            cross += weights[k] * lam.log2();
        }
    }
    if outside > tol::SUPPORT_TOL {
        return Ok(f64::INFINITY);
    }
    Ok(-s_rho - cross)
}

/// I(X:Y) = S(X) + S(Y) − S(XY) for the bipartition `x_parties` vs the rest.
pub fn mutual_information(rho: &ComplexMatrix, x_parties: &[usize]) -> Result<f64> {
    let shape = rho.shape().ok_or(Error::MissingShape)?;
    let all: Vec<usize> = (0..shape.num_parties()).collect();
    let y_parties: Vec<usize> = all.iter().copied().filter(|p| !x_parties.contains(p)).collect();
    if x_parties.is_empty() || y_parties.is_empty() {
        return Err(Error::InvalidParameter("cut must split the parties".into()));
    }
    let rho_x = rho.partial_trace(&y_parties)?;
    let rho_y = rho.partial_trace(x_parties)?;
    Ok(von_neumann_entropy(&rho_x)? + von_neumann_entropy(&rho_y)? - von_neumann_entropy(rho)?)
}

/// Binary entropy H(p) in bits, clamped to p ∈ [0,1].
pub fn binary_entropy(p: f64) -> f64 {
    let p = p.clamp(0.0, 1.0);
    let mut h = 0.0;
    if p > 0.0 {
        h -= p * p.log2();
    }
    if p < 1.0 {
        h -= (1.0 - p) * (1.0 - p).log2();
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn maximally_mixed_entropy() {
        for d in [2usize, 3, 5] {
            let rho = ComplexMatrix::identity(d).scale_re(1.0 / d as f64);
            let s = von_neumann_entropy(&rho).unwrap();
            assert!((s - (d as f64).log2()).abs() < 1e-12);
        }
    }

    #[test]
    fn relative_entropy_of_identical_states_is_zero() {
        let rho = ComplexMatrix::diagonal(&[0.5, 0.3, 0.2]);
        assert!(relative_entropy(&rho, &rho).unwrap().abs() < 1e-12);
    }

    #[test]
    fn support_violation_is_infinite() {
        let rho = ComplexMatrix::diagonal(&[0.5, 0.5]);
        let sigma = ComplexMatrix::diagonal(&[1.0, 0.0]);
        assert!(relative_entropy(&rho, &sigma).unwrap().is_infinite());
    }

    #[test]
    fn ghz_mutual_information() {
        let ghz = crate::states::ghz(2, 2).unwrap();
        // Pure bipartite state: I(X:Y) = 2·S(X).
        let i = mutual_information(&ghz, &[0]).unwrap();
        assert!((i - 2.0).abs() < 1e-10);
        let omega = crate::states::omega(2, 2).unwrap();
        let i = mutual_information(&omega, &[0]).unwrap();
        assert!((i - 1.0).abs() < 1e-10);
    }

    #[test]
    fn rejects_bad_trace() {
        let rho = ComplexMatrix::diagonal(&[0.7, 0.7]);
        assert!(matches!(von_neumann_entropy(&rho), Err(Error::NotAState(_))));
    }
}
