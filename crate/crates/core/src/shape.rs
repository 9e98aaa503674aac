//! Subsystem bookkeeping for multipartite operators.
//!
//! A [`Shape`] records, for each party, a key dimension and a shield
//! dimension (either may be 1). The dense index layout is canonical: all key
//! factors in party order, then all shield factors in party order, row-major.
//! A party-wise operation (partial transpose, partial trace) always acts on
//! both factors belonging to that party.

use crate::error::{Error, Result};

/// One party's local dimensions.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Party {
    pub key_dim: usize,
    pub shield_dim: usize,
}

impl Party {
    pub fn new(key_dim: usize, shield_dim: usize) -> Self {
        Party { key_dim, shield_dim }
    }

    pub fn dim(&self) -> usize {
        self.key_dim * self.shield_dim
    }
}

/// Ordered list of parties; fixes the tensor factorization of a matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Shape {
    parties: Vec<Party>,
}

impl Shape {
    pub fn new(parties: Vec<Party>) -> Result<Self> {
        if parties.is_empty() {
            return Err(Error::InvalidParameter("shape needs at least one party".into()));
        }
        if parties.iter().any(|p| p.key_dim == 0 || p.shield_dim == 0) {
            return Err(Error::InvalidParameter("party dimensions must be positive".into()));
        }
        Ok(Shape { parties })
    }

    /// `n` parties carrying only a key factor of dimension `d`.
    pub fn keys(d: usize, n: usize) -> Self {
        Shape { parties: vec![Party::new(d, 1); n] }
    }

    /// `n` parties carrying only a shield factor of dimension `d`.
    pub fn shields(d: usize, n: usize) -> Self {
        Shape { parties: vec![Party::new(1, d); n] }
    }

    /// `n` parties with key dimension `d` and shield dimension `big_d` each.
    pub fn keyed_shielded(d: usize, big_d: usize, n: usize) -> Self {
        Shape { parties: vec![Party::new(d, big_d); n] }
    }

    pub fn parties(&self) -> &[Party] {
        &self.parties
    }

    pub fn num_parties(&self) -> usize {
        self.parties.len()
    }

    pub fn total_dim(&self) -> usize {
        self.parties.iter().map(|p| p.dim()).product()
    }

    pub fn key_dim(&self) -> usize {
        self.parties.iter().map(|p| p.key_dim).product()
    }

    pub fn shield_dim(&self) -> usize {
        self.parties.iter().map(|p| p.shield_dim).product()
    }

    /// Factor dimensions in canonical layout: keys then shields.
    pub fn factor_dims(&self) -> Vec<usize> {
        let mut dims: Vec<usize> = self.parties.iter().map(|p| p.key_dim).collect();
        dims.extend(self.parties.iter().map(|p| p.shield_dim));
        dims
    }

    /// Positions in `factor_dims` owned by party `i` (its key and shield).
    pub fn party_factors(&self, i: usize) -> Result<[usize; 2]> {
        let n = self.parties.len();
        if i >= n {
            return Err(Error::BadSubsystem { index: i, parties: n });
        }
        Ok([i, n + i])
    }

    /// Shape obtained by concatenating the party lists.
    ///
    /// Valid as an index map for a Kronecker product `a ⊗ b` whenever the
    /// left operand has trivial shields or the right one has trivial keys;
    /// all in-crate uses satisfy this.
    pub fn concat(&self, other: &Shape) -> Shape {
        let mut parties = self.parties.clone();
        parties.extend_from_slice(&other.parties);
        Shape { parties }
    }

    pub(crate) fn kron_compatible(&self, other: &Shape) -> bool {
        self.parties.iter().all(|p| p.shield_dim == 1)
            || other.parties.iter().all(|p| p.key_dim == 1)
    }
}

/// Mixed-radix index helpers over an ordered factor list.
#[derive(Clone, Debug)]
pub struct Radix {
    dims: Vec<usize>,
    strides: Vec<usize>,
}

impl Radix {
    pub fn new(dims: Vec<usize>) -> Self {
        let mut strides = vec![1usize; dims.len()];
        for i in (0..dims.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * dims[i + 1];
        }
        Radix { dims, strides }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn total(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn decompose(&self, mut index: usize, digits: &mut [usize]) {
        for (k, &s) in self.strides.iter().enumerate() {
            digits[k] = index / s;
            index %= s;
        }
    }

    pub fn compose(&self, digits: &[usize]) -> usize {
        digits.iter().zip(&self.strides).map(|(d, s)| d * s).sum()
    }

    /// Index with the digits at `positions` taken from `other` instead.
    pub fn swap_in(&self, digits: &[usize], other: &[usize], positions: &[usize]) -> usize {
        let mut acc = 0usize;
        for (k, &s) in self.strides.iter().enumerate() {
            let d = if positions.contains(&k) { other[k] } else { digits[k] };
            acc += d * s;
        }
        acc
    }
}
