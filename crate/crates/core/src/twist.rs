//! Twisting operators, the norm-extracting squeezing twisting, privacy
//! squeezed key states and closeness-to-private-state certificates.

use std::collections::BTreeMap;

use crate::block::{BlockOperator, KeyIndex};
use crate::entropy::binary_entropy;
use crate::error::{Error, Result};
use crate::matrix::ComplexMatrix;
use crate::svd::{svd, trace_norm};
use crate::tol;

/// Controlled-unitary family U_t = Σ |i⃗⟩⟨i⃗| ⊗ U_{i⃗}: one shield unitary
/// per key multi-index, defaulting to the identity where unassigned.
#[derive(Clone, Debug)]
pub struct TwistingFamily {
    key_dim: usize,
    parties: usize,
    shield_dim: usize,
    unitaries: BTreeMap<KeyIndex, ComplexMatrix>,
}

impl TwistingFamily {
    pub fn identity(key_dim: usize, parties: usize, shield_dim: usize) -> Self {
        TwistingFamily { key_dim, parties, shield_dim, unitaries: BTreeMap::new() }
    }

    pub fn key_dim(&self) -> usize {
        self.key_dim
    }

    pub fn parties(&self) -> usize {
        self.parties
    }

    pub fn shield_dim(&self) -> usize {
        self.shield_dim
    }

    pub fn assign(&mut self, index: KeyIndex, u: ComplexMatrix) -> Result<()> {
        if index.len() != self.parties || index.iter().any(|&i| (i as usize) >= self.key_dim) {
            return Err(Error::InvalidParameter(format!("bad key index {index:?}")));
        }
        if u.dim() != self.shield_dim {
            return Err(Error::DimMismatch(format!(
                "unitary dim {} vs shield {}",
                u.dim(),
                self.shield_dim
            )));
        }
        let defect = u.unitarity_defect();
        if defect > tol::UNITARY_TOL {
            return Err(Error::NotUnitary { defect, tol: tol::UNITARY_TOL });
        }
        self.unitaries.insert(index, u);
        Ok(())
    }

    /// The unitary for a key index (identity when unassigned).
    pub fn unitary_for(&self, index: &[u8]) -> ComplexMatrix {
        self.unitaries
            .get(index)
            .cloned()
            .unwrap_or_else(|| ComplexMatrix::identity(self.shield_dim))
    }

    pub fn assigned(&self) -> impl Iterator<Item = (&KeyIndex, &ComplexMatrix)> {
        self.unitaries.iter()
    }
}

/// Conjugate a block operator by the twisting: block (i⃗,j⃗) ↦ U_{i⃗} Ω U_{j⃗}†.
pub fn apply_twisting(rho: &BlockOperator, t: &TwistingFamily) -> Result<BlockOperator> {
    if t.key_dim != rho.key_dim() || t.parties != rho.parties() || t.shield_dim != rho.shield_dim()
    {
        return Err(Error::DimMismatch("twisting does not match block operator".into()));
    }
    let mut out = BlockOperator::new(rho.key_dim(), rho.parties(), rho.shield_shape().clone());
    for ((row, col), block) in rho.blocks() {
        let u_row = t.unitary_for(row);
        let u_col = t.unitary_for(col);
        let twisted = u_row.mul(block)?.mul(&u_col.adjoint())?;
        out.set_block(row.clone(), col.clone(), twisted)?;
    }
    Ok(out)
}

fn all_equal_tuple(value: usize, n: usize) -> KeyIndex {
    vec![value as u8; n]
}

/// The twisting that turns the chosen row (and column) of the key reduction
/// into block trace norms: for each singular decomposition
/// Ω_{i…i}^{j…j} = V_j D_j W_j†, take U_{i…i} = V_r† and
/// U_{j…j} = V_r† V_j W_j† with V_r the first nonzero column block's factor.
///
/// Zero blocks get identity unitaries; the norm-0 conclusion holds for any
/// choice.
pub fn squeezing_twist(rho: &BlockOperator, row: usize) -> Result<TwistingFamily> {
    let d = rho.key_dim();
    let n = rho.parties();
    if row >= d {
        return Err(Error::InvalidParameter(format!("row {row} out of range for d={d}")));
    }
    let s = rho.shield_dim();
    let mut family = TwistingFamily::identity(d, n, s);
    let row_idx = all_equal_tuple(row, n);

    // Singular factors of the off-diagonal blocks in the chosen row.
    let mut factors: BTreeMap<usize, (ComplexMatrix, ComplexMatrix)> = BTreeMap::new();
    for j in 0..d {
        if j == row {
            continue;
        }
        let col_idx = all_equal_tuple(j, n);
        if let Some(block) = rho.block(&row_idx, &col_idx) {
            if block.max_abs() > 0.0 {
                let dec = svd(block)?;
                factors.insert(j, (dec.u, dec.v));
            }
        }
    }
    let reference = match factors.keys().next() {
        Some(&j) => factors[&j].0.clone(),
        // All off-diagonal blocks vanish; identity twisting already works.
        None => return Ok(family),
    };
    family.assign(row_idx, reference.adjoint())?;
    for (j, (v_j, w_j)) in &factors {
        let u = reference.adjoint().mul(v_j)?.mul(&w_j.adjoint())?;
        family.assign(all_equal_tuple(*j, n), u)?;
    }
    Ok(family)
}

/// Privacy squeezed key state: the d^N key matrix of the squeezed-and-traced
/// state. Diagonal entries are block traces; the chosen row and column carry
/// block trace norms.
pub fn privacy_squeeze(rho: &BlockOperator, row: usize) -> Result<ComplexMatrix> {
    let t = squeezing_twist(rho, row)?;
    Ok(apply_twisting(rho, &t)?.key_reduction())
}

/// Closeness certificate extracted from one all-equal row of block norms.
#[derive(Clone, Debug)]
pub struct ClosenessReport {
    pub key_dim: usize,
    pub parties: usize,
    pub row: usize,
    /// ‖Ω_{i…i}^{j…j}‖₁ for j = 0..d−1 (j = row is the diagonal block).
    pub block_norms: Vec<f64>,
    /// max_j |‖Ω_{i…i}^{j…j}‖₁ − 1/d|.
    pub epsilon: f64,
    /// Trace-norm distance bound to the nearest private state, when defined
    /// (qubit keys, or d > 2 with a caller-supplied η(ε)).
    pub sufficient_bound: Option<f64>,
}

/// The d = 2 sufficient bound uses η = ε with ε taken from the off-diagonal
/// norm deficit alone; for d > 2 the η(ε) dependence must be supplied.
pub fn closeness_report(rho: &BlockOperator, row: usize) -> Result<ClosenessReport> {
    closeness_report_with_eta(rho, row, None)
}

pub fn closeness_report_with_eta(
    rho: &BlockOperator,
    row: usize,
    eta: Option<f64>,
) -> Result<ClosenessReport> {
    let d = rho.key_dim();
    let n = rho.parties();
    if row >= d {
        return Err(Error::InvalidParameter(format!("row {row} out of range for d={d}")));
    }
    let row_idx = all_equal_tuple(row, n);
    let mut block_norms = Vec::with_capacity(d);
    for j in 0..d {
        let col_idx = all_equal_tuple(j, n);
        let norm = match rho.block(&row_idx, &col_idx) {
            Some(block) => trace_norm(block),
            None => 0.0,
        };
        block_norms.push(norm);
    }
    let inv_d = 1.0 / d as f64;
    let epsilon = block_norms.iter().map(|&v| (v - inv_d).abs()).fold(0.0, f64::max);

    let eta = match eta {
        Some(e) => Some(e),
        None if d == 2 => {
            // Off-diagonal deficit only: ‖Ω_{i…i}^{j…j}‖₁ ≥ 1/2 − ε suffices.
            let other = 1 - row;
            Some((0.5 - block_norms[other]).max(0.0))
        }
        None => None,
    };
    let sufficient_bound = eta.map(|e| closeness_bound(d, n, e));
    Ok(ClosenessReport { key_dim: d, parties: n, row, block_norms, epsilon, sufficient_bound })
}

/// √(ln2·[2N√(dη)·log₂d + H(2√(dη))]) + 2√(dη), with the entropy argument
/// clamped and replaced by the max-entropy value beyond 1.
pub fn closeness_bound(d: usize, parties: usize, eta: f64) -> f64 {
    let x = 2.0 * (d as f64 * eta.max(0.0)).sqrt();
    let h = if x > 1.0 { 1.0 } else { binary_entropy(x) };
    let inner = std::f64::consts::LN_2
        * (parties as f64 * x * (d as f64).log2() + h);
    inner.max(0.0).sqrt() + x
}
