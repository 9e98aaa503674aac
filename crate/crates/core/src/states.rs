//! Factory for every concrete operator used by the constructions: GHZ
//! projectors, the `X`/`S` matrices and their projector decomposition, seed
//! unitaries and the embedded `X̃` family, both bound entangled families,
//! private states, and the Smolin family.

use num_complex::Complex64 as C64;

use crate::block::{BlockOperator, KeyIndex};
use crate::error::{Error, Result};
use crate::matrix::{tensor, ComplexMatrix};
use crate::shape::Shape;
use crate::svd::op_abs;
use crate::tol;

// ---------------------------------------------------------------------------
// Key-index tuples
// ---------------------------------------------------------------------------

pub fn zeros_tuple(n: usize) -> KeyIndex {
    vec![0u8; n]
}

pub fn ones_tuple(n: usize) -> KeyIndex {
    vec![1u8; n]
}

/// Weight-one qubit tuple: `slot = 0` gives all zeros, `slot = i ≥ 1` puts a
/// single 1 at party `i−1`.
pub fn weight_one_tuple(slot: usize, n: usize) -> KeyIndex {
    let mut t = vec![0u8; n];
    if slot >= 1 {
        t[slot - 1] = 1;
    }
    t
}

/// Bitwise complement of a qubit tuple.
pub fn complement(t: &[u8]) -> KeyIndex {
    t.iter().map(|&b| 1 - b).collect()
}

// ---------------------------------------------------------------------------
// GHZ-type operators
// ---------------------------------------------------------------------------

fn diagonal_embedding_indices(d: usize, n: usize) -> Vec<usize> {
    // Flat index of |i⟩^{⊗n} in the d^n-dimensional standard basis.
    (0..d)
        .map(|i| {
            let mut acc = 0usize;
            for _ in 0..n {
                acc = acc * d + i;
            }
            acc
        })
        .collect()
}

fn ghz_projector_raw(d: usize, n: usize) -> ComplexMatrix {
    let dim = d.pow(n as u32);
    let idx = diagonal_embedding_indices(d, n);
    let mut m = ComplexMatrix::zeros(dim);
    let v = C64::new(1.0 / d as f64, 0.0);
    for &r in &idx {
        for &c in &idx {
            m.set(r, c, v);
        }
    }
    m
}

/// Normalized projector onto the N-party GHZ state of local dimension d.
pub fn ghz(d: usize, n: usize) -> Result<ComplexMatrix> {
    if d < 2 || n < 2 {
        return Err(Error::InvalidParameter(format!("ghz needs d ≥ 2, N ≥ 2 (got {d}, {n})")));
    }
    ghz_projector_raw(d, n).with_shape(Shape::keys(d, n))
}

/// ω = (1/d) Σ |i⟩⟨i|^{⊗N}: the GHZ state dephased in the standard basis.
pub fn omega(d: usize, n: usize) -> Result<ComplexMatrix> {
    if d < 2 || n < 2 {
        return Err(Error::InvalidParameter(format!("omega needs d ≥ 2, N ≥ 2 (got {d}, {n})")));
    }
    let dim = d.pow(n as u32);
    let mut m = ComplexMatrix::zeros(dim);
    for &i in &diagonal_embedding_indices(d, n) {
        m.set(i, i, C64::new(1.0 / d as f64, 0.0));
    }
    m.with_shape(Shape::keys(d, n))
}

// ---------------------------------------------------------------------------
// The X / S family on the shield space (C^D)^{⊗N}
// ---------------------------------------------------------------------------

/// R = Σ |i⟩⟨i|^{⊗N}: projector onto the diagonal subspace.
pub fn r_projector(d: usize, n: usize) -> ComplexMatrix {
    let dim = d.pow(n as u32);
    let mut m = ComplexMatrix::zeros(dim);
    for &i in &diagonal_embedding_indices(d, n) {
        m.set(i, i, C64::new(1.0, 0.0));
    }
    m.with_shape(Shape::shields(d, n)).expect("dims agree")
}

/// P = R − P⁺.
pub fn p_projector(d: usize, n: usize) -> ComplexMatrix {
    let p_plus = ghz_projector_raw(d, n);
    r_projector(d, n).sub(&p_plus).expect("same dim")
}

/// Q = 1 − R.
pub fn q_projector(d: usize, n: usize) -> ComplexMatrix {
    let dim = d.pow(n as u32);
    ComplexMatrix::identity(dim)
        .with_shape(Shape::shields(d, n))
        .expect("dims agree")
        .sub(&r_projector(d, n))
        .expect("same dim")
}

pub fn x_denominator(d: usize, n: usize) -> f64 {
    (d.pow(n as u32) + 2 * d - 4) as f64
}

/// X = [(D−2)P⁺ − 2P + Q] / (D^N + 2D − 4), normalized in the trace norm.
pub fn x_matrix(d: usize, n: usize) -> ComplexMatrix {
    let p_plus = ghz_projector_raw(d, n)
        .with_shape(Shape::shields(d, n))
        .expect("dims agree");
    let p = p_projector(d, n);
    let q = q_projector(d, n);
    let num = p_plus
        .scale_re((d as f64) - 2.0)
        .sub(&p.scale_re(2.0))
        .expect("same dim")
        .add(&q)
        .expect("same dim");
    num.scale_re(1.0 / x_denominator(d, n))
}

/// S = 1 + D·P⁺ − 2R.
pub fn s_matrix(d: usize, n: usize) -> ComplexMatrix {
    let dim = d.pow(n as u32);
    let p_plus = ghz_projector_raw(d, n)
        .with_shape(Shape::shields(d, n))
        .expect("dims agree");
    ComplexMatrix::identity(dim)
        .with_shape(Shape::shields(d, n))
        .expect("dims agree")
        .add(&p_plus.scale_re(d as f64))
        .expect("same dim")
        .sub(&r_projector(d, n).scale_re(2.0))
        .expect("same dim")
}

// ---------------------------------------------------------------------------
// Seed unitaries and the embedded X̃ family
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SeedKind {
    Vandermonde,
    HadamardPower(u32),
    Custom,
}

/// A D×D unitary whose entries seed the second construction.
#[derive(Clone, Debug)]
pub struct SeedUnitary {
    pub kind: SeedKind,
    pub matrix: ComplexMatrix,
    pub hermitian: bool,
    pub flat: bool,
}

impl SeedUnitary {
    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    /// Σ |u_kl| over all entries.
    pub fn abs_entry_sum(&self) -> f64 {
        self.matrix.data().iter().map(|z| z.norm()).sum()
    }

    fn from_matrix(kind: SeedKind, matrix: ComplexMatrix) -> Result<Self> {
        let defect = matrix.unitarity_defect();
        if defect > tol::UNITARY_TOL {
            return Err(Error::NotUnitary { defect, tol: tol::UNITARY_TOL });
        }
        let d = matrix.dim();
        let hermitian = matrix.hermiticity_defect() <= 1e-12;
        let target = 1.0 / (d as f64).sqrt();
        let flat = matrix.data().iter().all(|z| (z.norm() - target).abs() <= tol::UNITARY_TOL);
        Ok(SeedUnitary { kind, matrix, hermitian, flat })
    }
}

/// Vandermonde seed: u_kl = e^{2πi·kl/D}/√D, flat and unitary for every D ≥ 2.
pub fn vandermonde_seed(d: usize) -> Result<SeedUnitary> {
    if d < 2 {
        return Err(Error::InvalidParameter(format!("vandermonde needs D ≥ 2 (got {d})")));
    }
    let root = 1.0 / (d as f64).sqrt();
    let m = ComplexMatrix::from_fn(d, |k, l| {
        let t = (k * l) % d;
        // Exact values on the axes keep low-D seeds exactly Hermitian.
        let (c, s) = if t == 0 {
            (1.0, 0.0)
        } else if 2 * t == d {
            (-1.0, 0.0)
        } else if 4 * t == d {
            (0.0, 1.0)
        } else if 4 * t == 3 * d {
            (0.0, -1.0)
        } else {
            let phase = std::f64::consts::TAU * t as f64 / d as f64;
            (phase.cos(), phase.sin())
        };
        C64::new(root * c, root * s)
    });
    SeedUnitary::from_matrix(SeedKind::Vandermonde, m)
}

/// m-fold tensor power of the 2×2 Hadamard: Hermitian flat seed at D = 2^m.
pub fn hadamard_power_seed(m: u32) -> Result<SeedUnitary> {
    if m < 1 {
        return Err(Error::InvalidParameter("hadamard power needs m ≥ 1".into()));
    }
    let h = vandermonde_seed(2)?.matrix;
    let mut acc = h.clone();
    for _ in 1..m {
        acc = tensor(&acc, &h);
    }
    SeedUnitary::from_matrix(SeedKind::HadamardPower(m), acc.without_shape())
}

/// Wrap a caller-supplied unitary; flags are detected, unitarity enforced.
pub fn custom_seed(matrix: ComplexMatrix) -> Result<SeedUnitary> {
    SeedUnitary::from_matrix(SeedKind::Custom, matrix)
}

/// X̃ = Σ u_kl |k⟩⟨l|^{⊗N}: the seed embedded along the diagonal subspace.
pub fn x_tilde(seed: &SeedUnitary, n: usize) -> Result<ComplexMatrix> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("x_tilde needs N ≥ 2 (got {n})")));
    }
    let d = seed.dim();
    let dim = d.pow(n as u32);
    let idx = diagonal_embedding_indices(d, n);
    let mut m = ComplexMatrix::zeros(dim);
    for k in 0..d {
        for l in 0..d {
            m.set(idx[k], idx[l], seed.matrix.get(k, l));
        }
    }
    m.with_shape(Shape::shields(d, n))
}

/// X̃_i = partial transpose of X̃ on shield subsystem i (1-based, matching
/// the construction; `i = 0` is the identity map).
pub fn x_tilde_component(x: &ComplexMatrix, i: usize) -> Result<ComplexMatrix> {
    if i == 0 {
        Ok(x.clone())
    } else {
        x.partial_transpose(&[i - 1])
    }
}

// ---------------------------------------------------------------------------
// Construction one
// ---------------------------------------------------------------------------

/// 𝒩 = 2[(N+1)D^N + 2D − 4]/(D^N + 2D − 4).
pub fn construction_one_norm(d: usize, n: usize) -> f64 {
    let dn = d.pow(n as u32) as f64;
    2.0 * ((n as f64 + 1.0) * dn + 2.0 * d as f64 - 4.0) / (dn + 2.0 * d as f64 - 4.0)
}

/// Diagonal shield block (|X^{T_i}|)^{T_i}; `i = 0` gives |X|.
pub fn construction_one_diag_block(d: usize, n: usize, i: usize) -> Result<ComplexMatrix> {
    let x = x_matrix(d, n);
    if i == 0 {
        op_abs(&x)
    } else {
        op_abs(&x.partial_transpose(&[i - 1])?)?.partial_transpose(&[i - 1])
    }
}

/// First bound entangled family: qubit key part, D-dimensional shields.
pub fn construction_one(d: usize, n: usize) -> Result<BlockOperator> {
    if d < 2 || n < 2 {
        return Err(Error::InvalidParameter(format!(
            "construction one needs D ≥ 2, N ≥ 2 (got {d}, {n})"
        )));
    }
    let norm = construction_one_norm(d, n);
    let x = x_matrix(d, n);
    let mut op = BlockOperator::new(2, n, Shape::shields(d, n));
    for i in 0..=n {
        let block = construction_one_diag_block(d, n, i)?.scale_re(1.0 / norm);
        let t = weight_one_tuple(i, n);
        let tb = complement(&t);
        op.add_to_block(t.clone(), t, block.clone())?;
        op.add_to_block(tb.clone(), tb, block)?;
    }
    let off = x.scale_re(1.0 / norm);
    op.set_block(zeros_tuple(n), ones_tuple(n), off.clone())?;
    op.set_block(ones_tuple(n), zeros_tuple(n), off.adjoint())?;
    Ok(op)
}

// ---------------------------------------------------------------------------
// Construction two
// ---------------------------------------------------------------------------

/// 𝒩̃ = 2N(D + N·Σ|u_kl|); for flat seeds this is 2ND(1 + N√D).
///
/// Exact for N ≥ 3. At N = 2 the doubly-transposed embeddings land back on
/// the diagonal subspace and the assembled trace is 8D + 4Σ|u_kl| instead;
/// [`construction_two`] therefore normalizes by the actual trace.
pub fn construction_two_norm(seed: &SeedUnitary, n: usize) -> f64 {
    let d = seed.dim() as f64;
    2.0 * n as f64 * (d + n as f64 * seed.abs_entry_sum())
}

/// Diagonal shield block Σ_{i=1}^N |X̃_i^{T_j}|; `j = 0` skips the outer
/// transpose.
pub fn construction_two_diag_block(
    seed: &SeedUnitary,
    n: usize,
    j: usize,
) -> Result<ComplexMatrix> {
    let x = x_tilde(seed, n)?;
    let mut acc =
        ComplexMatrix::zeros(x.dim()).with_shape(x.shape().expect("x_tilde is shaped").clone())?;
    for i in 1..=n {
        let xi = x_tilde_component(&x, i)?;
        let xij = if j == 0 { xi } else { xi.partial_transpose(&[j - 1])? };
        acc = acc.add(&op_abs(&xij)?)?;
    }
    Ok(acc)
}

/// Off-diagonal shield block Σ_{i=1}^N X̃_i.
pub fn construction_two_off_block(seed: &SeedUnitary, n: usize) -> Result<ComplexMatrix> {
    let x = x_tilde(seed, n)?;
    let mut acc =
        ComplexMatrix::zeros(x.dim()).with_shape(x.shape().expect("x_tilde is shaped").clone())?;
    for i in 1..=n {
        acc = acc.add(&x_tilde_component(&x, i)?)?;
    }
    Ok(acc)
}

/// Second bound entangled family, seeded by a flat unitary.
pub fn construction_two(seed: &SeedUnitary, n: usize) -> Result<BlockOperator> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("construction two needs N ≥ 2 (got {n})")));
    }
    let d = seed.dim();
    let mut op = BlockOperator::new(2, n, Shape::shields(d, n));
    for j in 0..=n {
        let block = construction_two_diag_block(seed, n, j)?;
        let t = weight_one_tuple(j, n);
        let tb = complement(&t);
        op.add_to_block(t.clone(), t, block.clone())?;
        op.add_to_block(tb.clone(), tb, block)?;
    }
    let off = construction_two_off_block(seed, n)?;
    op.set_block(zeros_tuple(n), ones_tuple(n), off.clone())?;
    op.set_block(ones_tuple(n), zeros_tuple(n), off.adjoint())?;
    let norm = op.trace().re;
    Ok(op.scale_re(1.0 / norm))
}

// ---------------------------------------------------------------------------
// Private states
// ---------------------------------------------------------------------------

/// Data defining a multipartite private state (p-dit).
#[derive(Clone, Debug)]
pub struct PditSpec {
    pub key_dim: usize,
    pub parties: usize,
    pub shield_shape: Shape,
    /// One unitary per key value, acting on the whole shield space.
    pub unitaries: Vec<ComplexMatrix>,
    pub shield_state: ComplexMatrix,
}

impl PditSpec {
    pub fn validate(&self) -> Result<()> {
        if self.unitaries.len() != self.key_dim {
            return Err(Error::InvalidParameter(format!(
                "need {} unitaries, got {}",
                self.key_dim,
                self.unitaries.len()
            )));
        }
        let s = self.shield_shape.total_dim();
        for u in &self.unitaries {
            if u.dim() != s {
                return Err(Error::DimMismatch(format!(
                    "unitary dim {} vs shield {}",
                    u.dim(),
                    s
                )));
            }
            let defect = u.unitarity_defect();
            if defect > tol::UNITARY_TOL {
                return Err(Error::NotUnitary { defect, tol: tol::UNITARY_TOL });
            }
        }
        if self.shield_state.dim() != s {
            return Err(Error::DimMismatch("shield state dim".into()));
        }
        let tr = self.shield_state.trace();
        if (tr.re - 1.0).abs() > tol::STATE_TRACE_TOL || tr.im.abs() > tol::STATE_TRACE_TOL {
            return Err(Error::NotAState("shield state trace ≠ 1".into()));
        }
        Ok(())
    }
}

/// Γ = (1/d) Σ_{ij} |i…i⟩⟨j…j| ⊗ U_i ρ U_j†.
pub fn pdit(spec: &PditSpec) -> Result<BlockOperator> {
    spec.validate()?;
    let d = spec.key_dim;
    let n = spec.parties;
    let mut op = BlockOperator::new(d, n, spec.shield_shape.clone());
    for i in 0..d {
        let ui_rho = spec.unitaries[i].mul(&spec.shield_state)?;
        for j in 0..d {
            let block = ui_rho.mul(&spec.unitaries[j].adjoint())?.scale_re(1.0 / d as f64);
            op.set_block(vec![i as u8; n], vec![j as u8; n], block)?;
        }
    }
    Ok(op)
}

/// Permutation operator V_π = Σ |i₁…i_N⟩⟨i_{π(1)}…i_{π(N)}| on (C^D)^{⊗N}.
pub fn permutation_operator(perm: &[usize], d: usize, n: usize) -> Result<ComplexMatrix> {
    if perm.len() != n {
        return Err(Error::InvalidParameter("permutation length must equal N".into()));
    }
    let mut seen = vec![false; n];
    for &p in perm {
        if p >= n || seen[p] {
            return Err(Error::InvalidParameter(format!("not a permutation: {perm:?}")));
        }
        seen[p] = true;
    }
    let dim = d.pow(n as u32);
    let mut m = ComplexMatrix::zeros(dim);
    let mut digits = vec![0usize; n];
    for row in 0..dim {
        let mut rem = row;
        for slot in (0..n).rev() {
            digits[slot] = rem % d;
            rem /= d;
        }
        let mut col = 0usize;
        for slot in 0..n {
            col = col * d + digits[perm[slot]];
        }
        m.set(row, col, C64::new(1.0, 0.0));
    }
    m.with_shape(Shape::shields(d, n))
}

/// The illustrative qubit-key pdit with U₀ = V_π, U₁ = 1 and a maximally
/// mixed shield.
pub fn pdit_example(d: usize, n: usize, perm: &[usize]) -> Result<BlockOperator> {
    let shield_dim = d.pow(n as u32);
    let spec = PditSpec {
        key_dim: 2,
        parties: n,
        shield_shape: Shape::shields(d, n),
        unitaries: vec![
            permutation_operator(perm, d, n)?,
            ComplexMatrix::identity(shield_dim),
        ],
        shield_state: ComplexMatrix::identity(shield_dim).scale_re(1.0 / shield_dim as f64),
    };
    pdit(&spec)
}

// ---------------------------------------------------------------------------
// Smolin family
// ---------------------------------------------------------------------------

/// Pauli matrix σ_m with σ₀ = 1, σ₁ = x, σ₂ = y, σ₃ = z.
pub fn pauli(m: usize) -> ComplexMatrix {
    let mut s = ComplexMatrix::zeros(2);
    match m {
        0 => {
            s.set(0, 0, C64::new(1.0, 0.0));
            s.set(1, 1, C64::new(1.0, 0.0));
        }
        1 => {
            s.set(0, 1, C64::new(1.0, 0.0));
            s.set(1, 0, C64::new(1.0, 0.0));
        }
        2 => {
            s.set(0, 1, C64::new(0.0, -1.0));
            s.set(1, 0, C64::new(0.0, 1.0));
        }
        3 => {
            s.set(0, 0, C64::new(1.0, 0.0));
            s.set(1, 1, C64::new(-1.0, 0.0));
        }
        _ => panic!("pauli index must be 0..=3"),
    }
    s
}

fn bell_psi_plus() -> ComplexMatrix {
    // (|01⟩ + |10⟩)/√2
    let v = [
        C64::new(0.0, 0.0),
        C64::new(1.0, 0.0),
        C64::new(1.0, 0.0),
        C64::new(0.0, 0.0),
    ];
    ComplexMatrix::projector(&v)
        .with_shape(Shape::keys(2, 2))
        .expect("dims agree")
}

/// σ_m on the last qubit of a multi-qubit state.
fn conjugate_last_qubit(rho: &ComplexMatrix, m: usize) -> ComplexMatrix {
    let qubits = rho.dim().trailing_zeros() as usize;
    let u = tensor(&ComplexMatrix::identity(1 << (qubits - 1)), &pauli(m));
    let shape = rho.shape().cloned();
    let out = u.mul(rho).unwrap().mul(&u.adjoint()).unwrap().without_shape();
    match shape {
        Some(s) => out.with_shape(s).expect("dims agree"),
        None => out,
    }
}

/// ρ_{2n}: the Bell state for n = 1, the Smolin state for n = 2, and the
/// recursive 2n-qubit extension beyond.
pub fn smolin_family(n: usize) -> Result<ComplexMatrix> {
    if n < 1 {
        return Err(Error::InvalidParameter("smolin family needs n ≥ 1".into()));
    }
    let mut rho = bell_psi_plus();
    for _ in 1..n {
        let dim = rho.dim() * 4;
        let mut acc = ComplexMatrix::zeros(dim);
        for m in 0..4 {
            let left = conjugate_last_qubit(&rho, m);
            let right = conjugate_last_qubit(&bell_psi_plus(), m);
            acc = acc.add(&tensor(&left, &right).without_shape()).expect("same dim");
        }
        let qubits = dim.trailing_zeros() as usize;
        rho = acc.scale_re(0.25).with_shape(Shape::keys(2, qubits))?;
    }
    Ok(rho)
}
