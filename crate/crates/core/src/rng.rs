//! Seeded random matrix generators used by the lemma suites and tests.

use num_complex::Complex64 as C64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::matrix::ComplexMatrix;

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn standard_complex(rng: &mut ChaCha8Rng) -> C64 {
    // Box–Muller pairs; unit-variance complex Gaussian.
    let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
    let u2: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
    let r = (-2.0 * u1.ln()).sqrt();
    C64::new(r * u2.cos(), r * u2.sin())
}

/// Ginibre matrix: i.i.d. complex Gaussian entries.
pub fn ginibre(dim: usize, rng: &mut ChaCha8Rng) -> ComplexMatrix {
    ComplexMatrix::from_fn(dim, |_, _| standard_complex(rng))
}

/// Haar-ish random unitary via Gram–Schmidt of a Ginibre matrix.
pub fn random_unitary(dim: usize, rng: &mut ChaCha8Rng) -> ComplexMatrix {
    let g = ginibre(dim, rng);
    let mut cols: Vec<Vec<C64>> = (0..dim)
        .map(|c| (0..dim).map(|r| g.get(r, c)).collect())
        .collect();
    for c in 0..dim {
        for _ in 0..2 {
            for prev in 0..c {
                let overlap: C64 = cols[prev]
                    .iter()
                    .zip(&cols[c])
                    .map(|(a, b)| a.conj() * b)
                    .sum();
                for r in 0..dim {
                    let adj = overlap * cols[prev][r];
                    cols[c][r] -= adj;
                }
            }
        }
        let norm: f64 = cols[c].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for z in &mut cols[c] {
            *z /= norm;
        }
    }
    ComplexMatrix::from_fn(dim, |r, c| cols[c][r])
}

/// Random Hermitian matrix with entries of order one.
pub fn random_hermitian(dim: usize, rng: &mut ChaCha8Rng) -> ComplexMatrix {
    let g = ginibre(dim, rng);
    g.add(&g.adjoint()).expect("same dim").scale_re(0.5)
}

/// Random density matrix G G†/Tr.
pub fn random_density(dim: usize, rng: &mut ChaCha8Rng) -> ComplexMatrix {
    let g = ginibre(dim, rng);
    let p = g.mul(&g.adjoint()).expect("same dim");
    let tr = p.trace().re;
    p.scale_re(1.0 / tr)
}

/// Random normal matrix: unitary conjugation of a random complex diagonal.
pub fn random_normal(dim: usize, rng: &mut ChaCha8Rng) -> ComplexMatrix {
    let u = random_unitary(dim, rng);
    let d = ComplexMatrix::from_fn(dim, |r, c| {
        if r == c {
            standard_complex(rng)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    u.mul(&d).unwrap().mul(&u.adjoint()).unwrap()
}

/// Random PSD matrix scaled to max eigenvalue ≲ `scale`.
pub fn random_psd(dim: usize, scale: f64, rng: &mut ChaCha8Rng) -> ComplexMatrix {
    let g = ginibre(dim, rng);
    let p = g.mul(&g.adjoint()).expect("same dim");
    let tr = p.trace().re;
    p.scale_re(scale / tr.max(1e-12))
}

/// Random complex unit vector.
pub fn random_unit_vector(dim: usize, rng: &mut ChaCha8Rng) -> Vec<C64> {
    let mut v: Vec<C64> = (0..dim).map(|_| standard_complex(rng)).collect();
    let norm: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    for z in &mut v {
        *z /= norm;
    }
    v
}
