//! Key-basis block representation of shielded multipartite states.
//!
//! A state on (key ⊗ shield) space is a grid of shield blocks indexed by a
//! pair of key multi-indices; absent blocks are zero. All constructed
//! families have at most 2N+4 nonzero blocks, so positivity and transpose
//! checks stay feasible at dense scale.

use std::collections::BTreeMap;

use crate::eig::herm_eigenvalues;
use crate::error::{Error, Result};
use crate::matrix::{ComplexMatrix, C64};
use crate::shape::{Radix, Shape};
use crate::tol;

/// Key multi-index (one digit per party, each < d).
pub type KeyIndex = Vec<u8>;

#[derive(Clone, Debug)]
pub struct BlockOperator {
    key_dim: usize,
    parties: usize,
    shield_shape: Shape,
    blocks: BTreeMap<(KeyIndex, KeyIndex), ComplexMatrix>,
}

impl BlockOperator {
    pub fn new(key_dim: usize, parties: usize, shield_shape: Shape) -> Self {
        BlockOperator { key_dim, parties, shield_shape, blocks: BTreeMap::new() }
    }

    pub fn key_dim(&self) -> usize {
        self.key_dim
    }

    pub fn parties(&self) -> usize {
        self.parties
    }

    pub fn shield_shape(&self) -> &Shape {
        &self.shield_shape
    }

    pub fn shield_dim(&self) -> usize {
        self.shield_shape.total_dim()
    }

    pub fn blocks(&self) -> impl Iterator<Item = (&(KeyIndex, KeyIndex), &ComplexMatrix)> {
        self.blocks.iter()
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn block(&self, row: &[u8], col: &[u8]) -> Option<&ComplexMatrix> {
        self.blocks.get(&(row.to_vec(), col.to_vec()))
    }

    pub fn set_block(&mut self, row: KeyIndex, col: KeyIndex, block: ComplexMatrix) -> Result<()> {
        self.check_index(&row)?;
        self.check_index(&col)?;
        if block.dim() != self.shield_dim() {
            return Err(Error::DimMismatch(format!(
                "block dim {} vs shield dim {}",
                block.dim(),
                self.shield_dim()
            )));
        }
        self.blocks.insert((row, col), block);
        Ok(())
    }

    /// Add into a block, inserting it when absent. Key-index collisions
    /// (e.g. weight-one tuples meeting their complements at N = 2) accumulate.
    pub fn add_to_block(&mut self, row: KeyIndex, col: KeyIndex, block: ComplexMatrix) -> Result<()> {
        match self.blocks.get(&(row.clone(), col.clone())) {
            Some(existing) => {
                let sum = existing.add(&block)?;
                self.set_block(row, col, sum)
            }
            None => self.set_block(row, col, block),
        }
    }

    fn check_index(&self, idx: &[u8]) -> Result<()> {
        if idx.len() != self.parties || idx.iter().any(|&i| (i as usize) >= self.key_dim) {
            return Err(Error::InvalidParameter(format!(
                "key index {idx:?} invalid for d={} N={}",
                self.key_dim, self.parties
            )));
        }
        Ok(())
    }

    pub fn trace(&self) -> C64 {
        self.blocks
            .iter()
            .filter(|((r, c), _)| r == c)
            .map(|(_, b)| b.trace())
            .sum()
    }

    pub fn scale_re(&self, s: f64) -> Self {
        let blocks = self
            .blocks
            .iter()
            .map(|(k, b)| (k.clone(), b.scale_re(s)))
            .collect();
        BlockOperator { blocks, ..self.clone() }
    }

    pub fn key_radix(&self) -> Radix {
        Radix::new(vec![self.key_dim; self.parties])
    }

    fn key_flat(&self, idx: &[u8]) -> usize {
        idx.iter().fold(0usize, |acc, &i| acc * self.key_dim + i as usize)
    }

    /// All key multi-indices in lexicographic order.
    pub fn key_indices(&self) -> Vec<KeyIndex> {
        let total = self.key_dim.pow(self.parties as u32);
        let mut out = Vec::with_capacity(total);
        for flat in 0..total {
            let mut idx = vec![0u8; self.parties];
            let mut rem = flat;
            for slot in (0..self.parties).rev() {
                idx[slot] = (rem % self.key_dim) as u8;
                rem /= self.key_dim;
            }
            out.push(idx);
        }
        out
    }

    /// Dense matrix on key ⊗ shield space. When the shield shape has exactly
    /// one shield party per key party, the result carries the merged
    /// per-party shape so party-wise transposes act on key and shield jointly.
    pub fn assemble(&self) -> ComplexMatrix {
        let s = self.shield_dim();
        let kd = self.key_dim.pow(self.parties as u32);
        let n = kd * s;
        let mut out = ComplexMatrix::zeros(n);
        for ((row, col), block) in &self.blocks {
            let r0 = self.key_flat(row) * s;
            let c0 = self.key_flat(col) * s;
            for r in 0..s {
                for c in 0..s {
                    out.set(r0 + r, c0 + c, block.get(r, c));
                }
            }
        }
        if self.shield_shape.num_parties() == self.parties
            && self.shield_shape.parties().iter().all(|p| p.key_dim == 1)
        {
            let merged = Shape::new(
                self.shield_shape
                    .parties()
                    .iter()
                    .map(|p| crate::shape::Party::new(self.key_dim, p.shield_dim))
                    .collect(),
            )
            .expect("nonempty");
            out.with_shape(merged).expect("dims agree")
        } else {
            out
        }
    }

    /// The d^N key matrix with entries Tr Ω_{i⃗}^{j⃗} (the shield traced out).
    pub fn key_reduction(&self) -> ComplexMatrix {
        let kd = self.key_dim.pow(self.parties as u32);
        let mut out = ComplexMatrix::zeros(kd);
        for ((row, col), block) in &self.blocks {
            out.set(self.key_flat(row), self.key_flat(col), block.trace());
        }
        out.with_shape(Shape::keys(self.key_dim, self.parties)).expect("dims agree")
    }

    /// Hermitian pairing, PSD diagonal blocks and unit trace.
    pub fn validate_state(&self) -> Result<()> {
        for ((row, col), block) in &self.blocks {
            let mirror = self
                .blocks
                .get(&(col.clone(), row.clone()))
                .ok_or_else(|| Error::Structure(format!("missing mirror of ({row:?},{col:?})")))?;
            let defect = block.sub(&mirror.adjoint())?.max_abs();
            if defect > tol::BLOCK_PAIR_TOL * block.max_abs().max(1.0) {
                return Err(Error::Structure(format!(
                    "blocks ({row:?},{col:?}) and mirror are not adjoint (defect {defect:.3e})"
                )));
            }
            if row == col {
                let eigs = herm_eigenvalues(block)?;
                let scale = eigs.iter().map(|x| x.abs()).sum::<f64>().max(1.0);
                if eigs.last().copied().unwrap_or(0.0) < -1e-10 * scale {
                    return Err(Error::Structure(format!(
                        "diagonal block {row:?} is not PSD"
                    )));
                }
            }
        }
        let tr = self.trace();
        if (tr.re - 1.0).abs() > tol::BLOCK_TRACE_TOL || tr.im.abs() > tol::BLOCK_TRACE_TOL {
            return Err(Error::NotAState(format!("assembled trace {tr} ≠ 1")));
        }
        Ok(())
    }
}
