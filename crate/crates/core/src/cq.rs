//! Classical-quantum states: a distribution over key-index tuples with an
//! Eve system per tuple, either an orthonormal label or an explicit density
//! matrix.
//!
//! A tuple may carry several entries with distinct labels (at N = 2 the
//! weight-one tuples coincide with their complements, so the closed forms
//! put two Eve branches on one tuple).

use std::collections::BTreeMap;

use num_complex::Complex64 as C64;

use crate::block::{BlockOperator, KeyIndex};
use crate::eig::herm_eig;
use crate::error::{Error, Result};
use crate::matrix::ComplexMatrix;
use crate::protocol::{recurse_one_norm, recurse_two_norm};
use crate::states::{complement, ones_tuple, weight_one_tuple, zeros_tuple, SeedUnitary};
use crate::svd::trace_norm;
use crate::tol;

/// Eve's side information for one entry.
#[derive(Clone, Debug)]
pub enum EveSystem {
    Label(u32),
    Density(ComplexMatrix),
}

#[derive(Clone, Debug)]
pub struct CqEntry {
    pub key: KeyIndex,
    pub prob: f64,
    pub eve: EveSystem,
}

#[derive(Clone, Debug)]
pub struct CqState {
    pub key_dim: usize,
    pub parties: usize,
    pub entries: Vec<CqEntry>,
}

/// Purification dimension cap of the dense measurement path.
pub const DENSE_MEASURE_CAP: usize = 4096;

impl CqState {
    pub fn validate(&self) -> Result<()> {
        let mut total = 0.0;
        for e in &self.entries {
            if e.key.len() != self.parties
                || e.key.iter().any(|&i| (i as usize) >= self.key_dim)
            {
                return Err(Error::InvalidParameter(format!("bad key tuple {:?}", e.key)));
            }
            if e.prob < -1e-12 {
                return Err(Error::NotAState(format!("negative probability {}", e.prob)));
            }
            total += e.prob;
            if let EveSystem::Density(rho) = &e.eve {
                let tr = rho.trace();
                if (tr.re - 1.0).abs() > tol::STATE_TRACE_TOL || tr.im.abs() > tol::STATE_TRACE_TOL
                {
                    return Err(Error::NotAState("Eve density trace ≠ 1".into()));
                }
            }
        }
        if (total - 1.0).abs() > 1e-10 {
            return Err(Error::NotAState(format!("probabilities sum to {total}")));
        }
        Ok(())
    }

    pub fn is_label_form(&self) -> bool {
        self.entries.iter().all(|e| matches!(e.eve, EveSystem::Label(_)))
    }

    /// Total probability per tuple.
    pub fn tuple_probs(&self) -> BTreeMap<KeyIndex, f64> {
        let mut map = BTreeMap::new();
        for e in &self.entries {
            *map.entry(e.key.clone()).or_insert(0.0) += e.prob;
        }
        map
    }

    /// (tuple, label) → probability, merging duplicate rows. Errors on
    /// density entries.
    pub fn label_table(&self) -> Result<BTreeMap<(KeyIndex, u32), f64>> {
        let mut map = BTreeMap::new();
        for e in &self.entries {
            match e.eve {
                EveSystem::Label(l) => *map.entry((e.key.clone(), l)).or_insert(0.0) += e.prob,
                EveSystem::Density(_) => {
                    return Err(Error::Structure("density Eve entry in label table".into()))
                }
            }
        }
        Ok(map)
    }

    /// Trace-norm distance between two label-form cq states, matching labels
    /// by identity.
    pub fn trace_distance_labels(&self, other: &CqState) -> Result<f64> {
        let a = self.label_table()?;
        let b = other.label_table()?;
        let mut keys: Vec<_> = a.keys().cloned().collect();
        keys.extend(b.keys().cloned());
        keys.sort();
        keys.dedup();
        Ok(keys
            .iter()
            .map(|k| (a.get(k).copied().unwrap_or(0.0) - b.get(k).copied().unwrap_or(0.0)).abs())
            .sum())
    }

    /// Pairwise Eve-overlap weights between tuples:
    /// O(t,t') = Σ_{e∈t, e'∈t'} √(p_e p_e')·F(eve_e, eve_e'), with entries of
    /// one tuple summed over both branches. This matrix together with the
    /// tuple probabilities is invariant under isometries on Eve's side.
    pub fn eve_overlap_matrix(&self) -> Result<BTreeMap<(KeyIndex, KeyIndex), f64>> {
        let mut map = BTreeMap::new();
        for (ia, a) in self.entries.iter().enumerate() {
            for (ib, b) in self.entries.iter().enumerate() {
                let f = if ia == ib { 1.0 } else { eve_fidelity(&a.eve, &b.eve)? };
                let w = (a.prob * b.prob).sqrt() * f;
                let key = if a.key <= b.key {
                    (a.key.clone(), b.key.clone())
                } else {
                    (b.key.clone(), a.key.clone())
                };
                if ia <= ib {
                    *map.entry(key).or_insert(0.0) += if ia == ib { w } else { 2.0 * w };
                }
            }
        }
        Ok(map)
    }

    /// Agreement up to isometries on Eve's side: identical tuple probability
    /// tables and identical Eve-overlap matrices within `tol`.
    pub fn agrees_with(&self, other: &CqState, tol: f64) -> Result<bool> {
        if self.key_dim != other.key_dim || self.parties != other.parties {
            return Ok(false);
        }
        let (pa, pb) = (self.tuple_probs(), other.tuple_probs());
        let mut keys: Vec<_> = pa.keys().cloned().collect();
        keys.extend(pb.keys().cloned());
        keys.sort();
        keys.dedup();
        for k in &keys {
            let da = pa.get(k).copied().unwrap_or(0.0);
            let db = pb.get(k).copied().unwrap_or(0.0);
            if (da - db).abs() > tol {
                return Ok(false);
            }
        }
        let (oa, ob) = (self.eve_overlap_matrix()?, other.eve_overlap_matrix()?);
        let mut ok = true;
        let mut okeys: Vec<_> = oa.keys().cloned().collect();
        okeys.extend(ob.keys().cloned());
        okeys.sort();
        okeys.dedup();
        for k in &okeys {
            let da = oa.get(k).copied().unwrap_or(0.0);
            let db = ob.get(k).copied().unwrap_or(0.0);
            if (da - db).abs() > tol {
                ok = false;
            }
        }
        Ok(ok)
    }
}

fn eve_fidelity(a: &EveSystem, b: &EveSystem) -> Result<f64> {
    match (a, b) {
        (EveSystem::Label(x), EveSystem::Label(y)) => Ok(if x == y { 1.0 } else { 0.0 }),
        (EveSystem::Density(x), EveSystem::Density(y)) => fidelity(x, y),
        _ => Err(Error::Structure("mixed label/density Eve systems".into())),
    }
}

/// Uhlmann fidelity F(ρ,σ) = ‖√ρ√σ‖₁.
pub fn fidelity(rho: &ComplexMatrix, sigma: &ComplexMatrix) -> Result<f64> {
    let s = herm_eig(rho)?.apply_fn(|x| x.max(0.0).sqrt());
    let m = s.mul(sigma)?.mul(&s)?;
    let eigs = herm_eig(&m)?.eigenvalues;
    Ok(eigs.iter().map(|&l| l.max(0.0).sqrt()).sum())
}

/// Ideal cq state: uniform perfectly-correlated tuples, Eve uncorrelated
/// (one shared label).
pub fn ideal_cq(d: usize, n: usize) -> Result<CqState> {
    if d < 2 || n < 2 {
        return Err(Error::InvalidParameter(format!(
            "ideal cq needs d ≥ 2, N ≥ 2 (got {d}, {n})"
        )));
    }
    let entries = (0..d)
        .map(|i| CqEntry {
            key: vec![i as u8; n],
            prob: 1.0 / d as f64,
            eve: EveSystem::Label(0),
        })
        .collect();
    Ok(CqState { key_dim: d, parties: n, entries })
}

/// Label ids used by the closed-form families: 0 is the shared diagonal
/// label, weight-one branch i gets 2i−1 and its complement 2i.
fn branch_labels(i: usize) -> (u32, u32) {
    ((2 * i - 1) as u32, (2 * i) as u32)
}

/// Closed-form cq state of the k-copy first family (privacy squeezed).
pub fn cq_one(d: usize, n: usize, k: u32) -> Result<CqState> {
    if d < 2 || n < 2 || k < 1 {
        return Err(Error::InvalidParameter("cq one needs D ≥ 2, N ≥ 2, k ≥ 1".into()));
    }
    let norm = recurse_one_norm(d, n, k);
    let a = 1.0 / norm;
    let b = crate::protocol::contraction_one(d, n).powi(k as i32) / norm;
    Ok(family_cq(n, a, b))
}

/// Closed-form cq state of the k-copy second family (flat seeds, N ≥ 3).
pub fn cq_two(seed: &SeedUnitary, n: usize, k: u32) -> Result<CqState> {
    if n < 3 || k < 1 {
        return Err(Error::InvalidParameter("cq two needs N ≥ 3, k ≥ 1".into()));
    }
    if !seed.flat {
        return Err(Error::InvalidParameter("cq two needs a flat seed".into()));
    }
    let d = seed.dim();
    let norm = recurse_two_norm(d, n, k);
    let nd = n as f64;
    let df = d as f64;
    let a = (nd * df * df.sqrt()).powi(k as i32) / norm;
    let b = (df * (1.0 + (nd - 1.0) * df.sqrt())).powi(k as i32) / norm;
    Ok(family_cq(n, a, b))
}

fn family_cq(n: usize, a: f64, b: f64) -> CqState {
    let mut entries = vec![
        CqEntry { key: zeros_tuple(n), prob: a, eve: EveSystem::Label(0) },
        CqEntry { key: ones_tuple(n), prob: a, eve: EveSystem::Label(0) },
    ];
    for i in 1..=n {
        let (l, lb) = branch_labels(i);
        let t = weight_one_tuple(i, n);
        entries.push(CqEntry { key: t.clone(), prob: b, eve: EveSystem::Label(l) });
        entries.push(CqEntry { key: complement(&t), prob: b, eve: EveSystem::Label(lb) });
    }
    CqState { key_dim: 2, parties: n, entries }
}

/// cq state obtained by purifying the state, measuring the key part in the
/// product basis and discarding the shield.
///
/// The dense path (purification dimension ≤ [`DENSE_MEASURE_CAP`]) returns
/// explicit Eve densities. Beyond it, the structural path applies when every
/// pair of populated tuples is either fully coherent
/// (‖Ω_{i⃗}^{j⃗}‖₁ = √(p_i p_j), identical Eve states) or fully decoupled
/// (zero block, orthogonal Eve states); labels then stand in for Eve.
pub fn measure_to_cq(rho: &BlockOperator) -> Result<CqState> {
    let dim = rho.key_dim().pow(rho.parties() as u32) * rho.shield_dim();
    if dim * dim <= DENSE_MEASURE_CAP {
        measure_dense(rho)
    } else {
        measure_structural(rho)
    }
}

fn measure_dense(rho: &BlockOperator) -> Result<CqState> {
    let dense = rho.assemble();
    let n = dense.dim();
    let root = herm_eig(&dense)?.apply_fn(|x| x.max(0.0).sqrt());
    let shield = rho.shield_dim();
    let mut entries = Vec::new();
    for key in rho.key_indices() {
        let base = key.iter().fold(0usize, |acc, &i| acc * rho.key_dim() + i as usize) * shield;
        let mut prob = 0.0;
        for s in 0..shield {
            for j in 0..n {
                prob += root.get(base + s, j).norm_sqr();
            }
        }
        if prob < 1e-14 {
            continue;
        }
        let mut eve = ComplexMatrix::zeros(n);
        for jr in 0..n {
            for jc in 0..n {
                let mut acc = C64::new(0.0, 0.0);
                for s in 0..shield {
                    acc += root.get(base + s, jr) * root.get(base + s, jc).conj();
                }
                eve.set(jr, jc, acc / prob);
            }
        }
        entries.push(CqEntry { key, prob, eve: EveSystem::Density(eve) });
    }
    Ok(CqState { key_dim: rho.key_dim(), parties: rho.parties(), entries })
}

fn measure_structural(rho: &BlockOperator) -> Result<CqState> {
    let keys = rho.key_indices();
    let mut probs: BTreeMap<KeyIndex, f64> = BTreeMap::new();
    for key in &keys {
        if let Some(block) = rho.block(key, key) {
            let p = block.trace().re;
            if p > 1e-14 {
                probs.insert(key.clone(), p);
            }
        }
    }
    let populated: Vec<KeyIndex> = probs.keys().cloned().collect();
    // Union-find over fully coherent pairs.
    let mut class: Vec<usize> = (0..populated.len()).collect();
    fn find(class: &mut Vec<usize>, i: usize) -> usize {
        let mut r = i;
        while class[r] != r {
            r = class[r];
        }
        class[i] = r;
        r
    }
    let coherence_tol = 1e-9;
    for i in 0..populated.len() {
        for j in i + 1..populated.len() {
            let norm = rho
                .block(&populated[i], &populated[j])
                .map(trace_norm)
                .unwrap_or(0.0);
            let full = (probs[&populated[i]] * probs[&populated[j]]).sqrt();
            if norm > full * (1.0 - coherence_tol) && norm > 1e-14 {
                let (ri, rj) = (find(&mut class, i), find(&mut class, j));
                class[ri] = rj;
            } else if norm > full * coherence_tol {
                return Err(Error::Structure(format!(
                    "block ({:?},{:?}) is partially coherent (norm {norm:.3e} of {full:.3e}); \
                     no orthonormal-Eve structure",
                    populated[i], populated[j]
                )));
            }
        }
    }
    let mut label_of_root: BTreeMap<usize, u32> = BTreeMap::new();
    let mut entries = Vec::new();
    for (i, key) in populated.iter().enumerate() {
        let root = find(&mut class, i);
        let next = label_of_root.len() as u32;
        let label = *label_of_root.entry(root).or_insert(next);
        entries.push(CqEntry {
            key: key.clone(),
            prob: probs[key],
            eve: EveSystem::Label(label),
        });
    }
    Ok(CqState { key_dim: rho.key_dim(), parties: rho.parties(), entries })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::recurse_one;
    use crate::states;

    #[test]
    fn ideal_cq_shape() {
        let cq = ideal_cq(3, 3).unwrap();
        cq.validate().unwrap();
        assert_eq!(cq.entries.len(), 3);
        for e in &cq.entries {
            assert!((e.prob - 1.0 / 3.0).abs() < 1e-15);
            assert!(matches!(e.eve, EveSystem::Label(0)));
        }
    }

    #[test]
    fn cq_one_normalizes_with_2n_plus_1_labels() {
        for (d, n, k) in [(2usize, 2usize, 1u32), (3, 3, 4), (4, 2, 7), (5, 3, 12)] {
            let cq = cq_one(d, n, k).unwrap();
            cq.validate().unwrap();
            let mut labels: Vec<u32> = cq
                .entries
                .iter()
                .map(|e| match e.eve {
                    EveSystem::Label(l) => l,
                    _ => unreachable!(),
                })
                .collect();
            labels.sort();
            labels.dedup();
            assert_eq!(labels.len(), 2 * n + 1, "D={d} N={n} k={k}");
        }
    }

    #[test]
    fn cq_two_normalizes() {
        let seed = states::vandermonde_seed(3).unwrap();
        for k in [1u32, 5, 20] {
            let cq = cq_two(&seed, 3, k).unwrap();
            cq.validate().unwrap();
        }
    }

    #[test]
    fn distance_to_ideal_matches_closed_form_and_decreases() {
        // Σ|p−q| over (tuple,label): 2N·c^k/𝒩 from the branches plus
        // |2/𝒩 − 1| on the shared diagonal label.
        let ideal = ideal_cq(2, 3).unwrap();
        let mut last = f64::INFINITY;
        for k in 1..=12 {
            let cq = cq_one(3, 3, k).unwrap();
            let dist = cq.trace_distance_labels(&ideal).unwrap();
            let norm = recurse_one_norm(3, 3, k);
            let c = crate::protocol::contraction_one(3, 3);
            let closed = 6.0 * c.powi(k as i32) / norm + (2.0 / norm - 1.0).abs();
            assert!((dist - closed).abs() < 1e-12, "k={k}");
            assert!(dist < last);
            last = dist;
        }
    }

    #[test]
    fn measured_pdit_is_ideal() {
        let gamma = states::pdit_example(2, 2, &[1, 0]).unwrap();
        let cq = measure_to_cq(&gamma).unwrap();
        cq.validate().unwrap();
        let ideal = ideal_cq(2, 2).unwrap();
        assert!(cq.agrees_with(&ideal, 1e-10).unwrap());
    }

    #[test]
    fn dense_and_structural_paths_agree_on_protocol_output() {
        // k = 2 at (2,2): dense purification path (dim 64² = 4096) against
        // the structural labeling of the same block operator.
        let out = recurse_one(2, 2, 2).unwrap();
        let state = out.state.unwrap();
        let dense = measure_dense(&state).unwrap();
        let structural = measure_structural(&state).unwrap();
        assert!(dense.agrees_with(&structural, 1e-9).unwrap());
        // Both agree with the closed form.
        let closed = cq_one(2, 2, 2).unwrap();
        assert!(dense.agrees_with(&closed, 1e-9).unwrap());
        assert!(structural.agrees_with(&closed, 1e-9).unwrap());
    }

    #[test]
    fn structural_path_rejects_partial_coherence() {
        // A state whose off-diagonal block has half the full norm.
        let mut op = BlockOperator::new(2, 2, crate::shape::Shape::shields(2, 2));
        let diag = ComplexMatrix::identity(4).scale_re(0.125);
        let off = ComplexMatrix::identity(4).scale_re(0.0625);
        op.set_block(vec![0, 0], vec![0, 0], diag.clone()).unwrap();
        op.set_block(vec![1, 1], vec![1, 1], diag).unwrap();
        op.set_block(vec![0, 0], vec![1, 1], off.clone()).unwrap();
        op.set_block(vec![1, 1], vec![0, 0], off).unwrap();
        assert!(matches!(measure_structural(&op), Err(Error::Structure(_))));
    }

    #[test]
    fn pure_shield_leaves_eve_uncorrelated() {
        // Key-diagonal state with a pure product shield: the purification
        // is trivial on Eve's side, so I(A_0:E) vanishes while the key
        // stays perfectly correlated.
        let mut op = BlockOperator::new(2, 2, crate::shape::Shape::shields(2, 2));
        let shield = ComplexMatrix::projector(&[
            C64::new(1.0, 0.0),
            C64::new(0.0, 0.0),
            C64::new(0.0, 0.0),
            C64::new(0.0, 0.0),
        ]);
        op.set_block(vec![0, 0], vec![0, 0], shield.scale_re(0.5)).unwrap();
        op.set_block(vec![1, 1], vec![1, 1], shield.scale_re(0.5)).unwrap();
        op.set_block(vec![0, 0], vec![1, 1], shield.scale_re(0.5)).unwrap();
        op.set_block(vec![1, 1], vec![0, 0], shield.scale_re(0.5)).unwrap();
        let cq = measure_to_cq(&op).unwrap();
        let rate = crate::keyrates::dw_bound(&cq, 0, 1).unwrap();
        assert!((rate - 1.0).abs() < 1e-9, "I(A:B) − I(A:E) = {rate}");
    }

    #[test]
    fn fidelity_of_orthogonal_and_identical_states() {
        let a = ComplexMatrix::diagonal(&[1.0, 0.0]);
        let b = ComplexMatrix::diagonal(&[0.0, 1.0]);
        assert!(fidelity(&a, &b).unwrap().abs() < 1e-12);
        assert!((fidelity(&a, &a).unwrap() - 1.0).abs() < 1e-12);
    }
}
