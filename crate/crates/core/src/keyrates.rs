//! Key-rate machinery: Devetak–Winter lower bounds on cq states, curve
//! generation over protocol copies, the cq-closeness equivalence checker,
//! the distillable-entanglement lower bound for private states, and the
//! relative-entropy upper bound.

use std::collections::BTreeMap;
use std::ops::RangeInclusive;

use num_complex::Complex64 as C64;

use crate::cq::{ideal_cq, CqState, EveSystem};
use crate::entropy::{binary_entropy, relative_entropy, shannon, von_neumann_entropy};
use crate::error::{Error, Result};
use crate::matrix::ComplexMatrix;
use crate::protocol::KeepRule;
use crate::states::{PditSpec, SeedUnitary};
use crate::svd::svd;

// ---------------------------------------------------------------------------
// Devetak–Winter bounds
// ---------------------------------------------------------------------------

fn entropy_of_map<K>(map: &BTreeMap<K, f64>) -> f64
where
    K: Ord,
{
    let probs: Vec<f64> = map.values().copied().collect();
    shannon(&probs)
}

/// I(A_i : A_j) from the pair marginal (Shannon, labels or densities alike).
fn pair_mutual_information(cq: &CqState, i: usize, j: usize) -> f64 {
    let mut pi = BTreeMap::new();
    let mut pj = BTreeMap::new();
    let mut pij = BTreeMap::new();
    for e in &cq.entries {
        *pi.entry(e.key[i]).or_insert(0.0) += e.prob;
        *pj.entry(e.key[j]).or_insert(0.0) += e.prob;
        *pij.entry((e.key[i], e.key[j])).or_insert(0.0) += e.prob;
    }
    entropy_of_map(&pi) + entropy_of_map(&pj) - entropy_of_map(&pij)
}

/// I(A_i : E) on the (A_i, E) marginal.
fn eve_mutual_information(cq: &CqState, i: usize) -> Result<f64> {
    if cq.is_label_form() {
        let mut pi = BTreeMap::new();
        let mut pe = BTreeMap::new();
        let mut pie = BTreeMap::new();
        for e in &cq.entries {
            let label = match e.eve {
                EveSystem::Label(l) => l,
                _ => unreachable!(),
            };
            *pi.entry(e.key[i]).or_insert(0.0) += e.prob;
            *pe.entry(label).or_insert(0.0) += e.prob;
            *pie.entry((e.key[i], label)).or_insert(0.0) += e.prob;
        }
        return Ok(entropy_of_map(&pi) + entropy_of_map(&pe) - entropy_of_map(&pie));
    }
    // Density path: I(A:E) = S(ρ_E) − Σ_a q_a S(ρ_{E|a}).
    let dim = cq
        .entries
        .iter()
        .find_map(|e| match &e.eve {
            EveSystem::Density(m) => Some(m.dim()),
            _ => None,
        })
        .ok_or_else(|| Error::Structure("no Eve densities in cq state".into()))?;
    let mut total = ComplexMatrix::zeros(dim);
    let mut conditional: BTreeMap<u8, (f64, ComplexMatrix)> = BTreeMap::new();
    for e in &cq.entries {
        let rho = match &e.eve {
            EveSystem::Density(m) => m,
            EveSystem::Label(_) => {
                return Err(Error::Structure("mixed label/density Eve systems".into()))
            }
        };
        total = total.add(&rho.scale_re(e.prob))?;
        let slot = conditional
            .entry(e.key[i])
            .or_insert_with(|| (0.0, ComplexMatrix::zeros(dim)));
        slot.0 += e.prob;
        slot.1 = slot.1.add(&rho.scale_re(e.prob))?;
    }
    let s_total = von_neumann_entropy(&total)?;
    let mut s_cond = 0.0;
    for (q, acc) in conditional.values() {
        if *q > 1e-14 {
            s_cond += q * von_neumann_entropy(&acc.scale_re(1.0 / q))?;
        }
    }
    Ok(s_total - s_cond)
}

/// Devetak–Winter rate I(A_i:A_j) − I(A_i:E) in bits for one pair.
pub fn dw_bound(cq: &CqState, i: usize, j: usize) -> Result<f64> {
    if i == j || i >= cq.parties || j >= cq.parties {
        return Err(Error::InvalidParameter(format!("bad party pair ({i},{j})")));
    }
    Ok(pair_mutual_information(cq, i, j) - eve_mutual_information(cq, i)?)
}

/// Best distinguished-party rate: max_i [min_{j≠i} I(A_i:A_j) − I(A_i:E)].
pub fn dw_best(cq: &CqState) -> Result<f64> {
    let n = cq.parties;
    let mut best = f64::NEG_INFINITY;
    for i in 0..n {
        let min_pair = (0..n)
            .filter(|&j| j != i)
            .map(|j| pair_mutual_information(cq, i, j))
            .fold(f64::INFINITY, f64::min);
        best = best.max(min_pair - eve_mutual_information(cq, i)?);
    }
    Ok(best)
}

// ---------------------------------------------------------------------------
// Protocol key curves
// ---------------------------------------------------------------------------

/// One row of an emitted key curve.
#[derive(Clone, Debug)]
pub struct ProtocolPoint {
    pub family: String,
    pub shield_dim: usize,
    pub parties: usize,
    pub k: u32,
    pub success_probability: f64,
    /// K_DW clamped at zero for reporting.
    pub key_rate: f64,
    /// The signed Devetak–Winter value.
    pub key_rate_raw: f64,
    /// success_probability · key_rate.
    pub scaled_key_rate: f64,
}

/// Family selector for curve generation.
pub enum CurveFamily<'a> {
    One { shield_dim: usize, parties: usize },
    Two { seed: &'a SeedUnitary, parties: usize, rule: KeepRule },
}

/// Evaluate the closed-form key curve over a k-range; rows ascend in k.
pub fn key_curve(family: &CurveFamily, k_range: RangeInclusive<u32>) -> Result<Vec<ProtocolPoint>> {
    if k_range.is_empty() {
        return Err(Error::InvalidParameter("empty k range".into()));
    }
    let mut points = Vec::new();
    for k in k_range.clone() {
        let (name, d, n, p, cq) = match family {
            CurveFamily::One { shield_dim, parties } => {
                let out = crate::protocol::recurse_one_scalar(*shield_dim, *parties, k)?;
                let cq = crate::cq::cq_one(*shield_dim, *parties, k)?;
                ("one", *shield_dim, *parties, out.success_probability, cq)
            }
            CurveFamily::Two { seed, parties, rule } => {
                let out = crate::protocol::recurse_two_scalar(seed, *parties, k, *rule)?;
                let cq = crate::cq::cq_two(seed, *parties, k)?;
                ("two", seed.dim(), *parties, out.success_probability, cq)
            }
        };
        let raw = dw_bound(&cq, 0, 1)?;
        let clamped = raw.max(0.0);
        points.push(ProtocolPoint {
            family: name.to_string(),
            shield_dim: d,
            parties: n,
            k,
            success_probability: p,
            key_rate: clamped,
            key_rate_raw: raw,
            scaled_key_rate: p * clamped,
        });
    }
    Ok(points)
}

// ---------------------------------------------------------------------------
// cq-closeness equivalence checker
// ---------------------------------------------------------------------------

/// Result of the global-vs-pairwise cq closeness check for distinguished
/// party 0.
#[derive(Clone, Debug)]
pub struct CqClosenessReport {
    /// ‖cq − ideal‖₁.
    pub global_distance: f64,
    /// Pairwise ccq distances for parties (0, j), j = 1..N−1.
    pub pair_distances: Vec<f64>,
    /// (4N−3): the converse factor.
    pub converse_factor: f64,
    pub forward_ok: bool,
    pub converse_ok: bool,
}

/// Reduced (tuple-pair, label) table for parties (0, j).
fn pair_label_table(cq: &CqState, j: usize) -> Result<BTreeMap<(u8, u8, u32), f64>> {
    let mut map = BTreeMap::new();
    for e in &cq.entries {
        let label = match e.eve {
            EveSystem::Label(l) => l,
            _ => return Err(Error::Structure("pair reduction needs label form".into())),
        };
        *map.entry((e.key[0], e.key[j], label)).or_insert(0.0) += e.prob;
    }
    Ok(map)
}

/// Check that pairwise ccq distances lower-bound the global distance and
/// that the global distance is within (4N−3) times the worst pair.
pub fn thm_iv3_check(cq: &CqState) -> Result<CqClosenessReport> {
    cq.validate()?;
    let d = cq.key_dim;
    let n = cq.parties;
    let ideal = ideal_cq(d, n)?;
    let global_distance = cq.trace_distance_labels(&ideal)?;

    let mut pair_distances = Vec::new();
    for j in 1..n {
        let table = pair_label_table(cq, j)?;
        let ideal_pair: BTreeMap<(u8, u8, u32), f64> =
            (0..d).map(|i| ((i as u8, i as u8, 0u32), 1.0 / d as f64)).collect();
        let mut keys: Vec<_> = table.keys().cloned().collect();
        keys.extend(ideal_pair.keys().cloned());
        keys.sort();
        keys.dedup();
        let dist = keys
            .iter()
            .map(|k| {
                (table.get(k).copied().unwrap_or(0.0) - ideal_pair.get(k).copied().unwrap_or(0.0))
                    .abs()
            })
            .sum();
        pair_distances.push(dist);
    }
    let worst = pair_distances.iter().copied().fold(0.0, f64::max);
    let converse_factor = (4 * n - 3) as f64;
    let slack = 1e-10;
    Ok(CqClosenessReport {
        global_distance,
        forward_ok: pair_distances.iter().all(|&p| p <= global_distance + slack),
        converse_ok: global_distance <= converse_factor * worst + slack,
        pair_distances,
        converse_factor,
    })
}

// ---------------------------------------------------------------------------
// Distillable-entanglement lower bound for p-dits
// ---------------------------------------------------------------------------

/// Product vector on the shield factors, one unit vector per party.
pub type ProductVector = Vec<Vec<C64>>;

#[derive(Clone, Debug)]
pub struct EdPairBound {
    pub i: usize,
    pub j: usize,
    /// Best found |⟨f|U_i ρ U_j†|g⟩| over product vectors.
    pub eta: f64,
    pub a1: f64,
    pub a2: f64,
    /// a_max·[1 − H(1/2 + η/(2√(a1·a2)))].
    pub bound: f64,
    pub f: ProductVector,
    pub g: ProductVector,
}

#[derive(Clone, Debug)]
pub struct EdBoundReport {
    pub pairs: Vec<EdPairBound>,
    pub best: f64,
    /// The maximizer search is heuristic; values are lower estimates.
    pub heuristic: bool,
}

const ED_MAX_LOCAL_DIM: usize = 6;

fn product_expectation(m: &ComplexMatrix, dims: &[usize], f: &ProductVector, g: &ProductVector) -> C64 {
    let radix = crate::shape::Radix::new(dims.to_vec());
    let n = m.dim();
    let mut row_digits = vec![0usize; dims.len()];
    let mut col_digits = vec![0usize; dims.len()];
    let mut acc = C64::new(0.0, 0.0);
    for r in 0..n {
        radix.decompose(r, &mut row_digits);
        let mut fr = C64::new(1.0, 0.0);
        for (p, &dig) in row_digits.iter().enumerate() {
            fr *= f[p][dig].conj();
        }
        if fr.norm_sqr() == 0.0 {
            continue;
        }
        for c in 0..n {
            let v = m.get(r, c);
            if v == C64::new(0.0, 0.0) {
                continue;
            }
            radix.decompose(c, &mut col_digits);
            let mut gc = C64::new(1.0, 0.0);
            for (p, &dig) in col_digits.iter().enumerate() {
                gc *= g[p][dig];
            }
            acc += fr * v * gc;
        }
    }
    acc
}

/// Contract all parties except `site`, leaving a local matrix K with
/// K[x,y] = ⟨f with site→x | M | g with site→y⟩.
fn site_matrix(
    m: &ComplexMatrix,
    dims: &[usize],
    f: &ProductVector,
    g: &ProductVector,
    site: usize,
) -> ComplexMatrix {
    let radix = crate::shape::Radix::new(dims.to_vec());
    let n = m.dim();
    let local = dims[site];
    let mut k = ComplexMatrix::zeros(local);
    let mut row_digits = vec![0usize; dims.len()];
    let mut col_digits = vec![0usize; dims.len()];
    for r in 0..n {
        radix.decompose(r, &mut row_digits);
        let mut fr = C64::new(1.0, 0.0);
        for (p, &dig) in row_digits.iter().enumerate() {
            if p != site {
                fr *= f[p][dig].conj();
            }
        }
        for c in 0..n {
            let v = m.get(r, c);
            if v == C64::new(0.0, 0.0) {
                continue;
            }
            radix.decompose(c, &mut col_digits);
            let mut gc = C64::new(1.0, 0.0);
            for (p, &dig) in col_digits.iter().enumerate() {
                if p != site {
                    gc *= g[p][dig];
                }
            }
            let cur = k.get(row_digits[site], col_digits[site]);
            k.set(row_digits[site], col_digits[site], cur + fr * v * gc);
        }
    }
    k
}

/// Alternating single-site maximization of |⟨f|M|g⟩| over product vectors:
/// at each site the optimal pair is the top singular pair of the partially
/// contracted block. Seeded random restarts; returns the best triple
/// (η, f, g).
pub fn maximize_product_overlap(
    m: &ComplexMatrix,
    dims: &[usize],
    restarts: usize,
    seed: u64,
) -> Result<(f64, ProductVector, ProductVector)> {
    let mut rng = crate::rng::seeded(seed);
    let mut best: Option<(f64, ProductVector, ProductVector)> = None;
    for _ in 0..restarts.max(1) {
        let mut f: ProductVector =
            dims.iter().map(|&d| crate::rng::random_unit_vector(d, &mut rng)).collect();
        let mut g: ProductVector =
            dims.iter().map(|&d| crate::rng::random_unit_vector(d, &mut rng)).collect();
        let mut last = 0.0;
        for _iter in 0..200 {
            for site in 0..dims.len() {
                let k = site_matrix(m, dims, &f, &g, site);
                let dec = svd(&k)?;
                let local = dims[site];
                f[site] = (0..local).map(|r| dec.u.get(r, 0)).collect();
                g[site] = (0..local).map(|r| dec.v.get(r, 0)).collect();
            }
            let eta = product_expectation(m, dims, &f, &g).norm();
            if (eta - last).abs() < 1e-13 {
                last = eta;
                break;
            }
            last = eta;
        }
        if best.as_ref().map_or(true, |(b, _, _)| last > *b) {
            best = Some((last, f, g));
        }
    }
    Ok(best.expect("at least one restart"))
}

/// Lower bound on the distillable entanglement of a private state from the
/// best product-vector overlap of each block pair.
pub fn ed_lower_bound(spec: &PditSpec, restarts: usize, seed: u64) -> Result<EdBoundReport> {
    spec.validate()?;
    let dims: Vec<usize> = spec.shield_shape.parties().iter().map(|p| p.shield_dim).collect();
    if dims.iter().any(|&d| d > ED_MAX_LOCAL_DIM) {
        return Err(Error::TooLarge {
            dim: *dims.iter().max().unwrap(),
            limit: ED_MAX_LOCAL_DIM,
        });
    }
    let d = spec.key_dim;
    let mut pairs = Vec::new();
    let mut best = 0.0f64;
    for i in 0..d {
        for j in i + 1..d {
            let m = spec.unitaries[i]
                .mul(&spec.shield_state)?
                .mul(&spec.unitaries[j].adjoint())?;
            let (eta, f, g) = maximize_product_overlap(&m, &dims, restarts, seed)?;
            let mi = spec.unitaries[i]
                .mul(&spec.shield_state)?
                .mul(&spec.unitaries[i].adjoint())?;
            let mj = spec.unitaries[j]
                .mul(&spec.shield_state)?
                .mul(&spec.unitaries[j].adjoint())?;
            let a1 = product_expectation(&mi, &dims, &f, &f).re;
            let a2 = product_expectation(&mj, &dims, &g, &g).re;
            let bound = if a1 > 0.0 && a2 > 0.0 {
                let arg = 0.5 + eta / (2.0 * (a1 * a2).sqrt());
                a1.max(a2) * (1.0 - binary_entropy(arg))
            } else {
                0.0
            };
            best = best.max(bound);
            pairs.push(EdPairBound { i, j, eta, a1, a2, bound, f, g });
        }
    }
    Ok(EdBoundReport { pairs, best, heuristic: true })
}

// ---------------------------------------------------------------------------
// Relative-entropy upper bound
// ---------------------------------------------------------------------------

/// S(ρ‖σ) in bits. Upper-bounds the distillable key only under the caller's
/// assertion that σ is fully separable; separability is not verified here.
pub fn relative_entropy_bound(rho: &ComplexMatrix, sigma: &ComplexMatrix) -> Result<f64> {
    relative_entropy(rho, sigma)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cq::{cq_one, cq_two, CqEntry};
    use crate::states;

    #[test]
    fn ideal_cq_rate_is_log_d() {
        for d in 2..=5 {
            for n in 2..=3 {
                let cq = ideal_cq(d, n).unwrap();
                let rate = dw_best(&cq).unwrap();
                assert!((rate - (d as f64).log2()).abs() < 1e-12, "d={d} N={n}");
            }
        }
    }

    #[test]
    fn eve_copy_kills_the_rate() {
        // Eve holds a copy of party 0's dit: I(A0:A1) = I(A0:E).
        let entries = (0..2)
            .map(|i| CqEntry {
                key: vec![i as u8, i as u8],
                prob: 0.5,
                eve: EveSystem::Label(i as u32),
            })
            .collect();
        let cq = CqState { key_dim: 2, parties: 2, entries };
        assert!(dw_bound(&cq, 0, 1).unwrap().abs() < 1e-12);
    }

    #[test]
    fn pairwise_rates_agree_on_closed_forms() {
        let cq = cq_one(3, 3, 7).unwrap();
        let base = dw_bound(&cq, 0, 1).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    assert!((dw_bound(&cq, i, j).unwrap() - base).abs() < 1e-12);
                }
            }
        }
        let seed = states::vandermonde_seed(3).unwrap();
        let cq = cq_two(&seed, 3, 9).unwrap();
        let base = dw_bound(&cq, 0, 1).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    assert!((dw_bound(&cq, i, j).unwrap() - base).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn closed_form_rate_oracle() {
        // Independent closed form: K = 1 + 2a − H({a+(N−2)b, a+(N−2)b, 2b, 2b}).
        for (d, n, k) in [(3usize, 3usize, 20u32), (4, 3, 12), (3, 2, 10)] {
            let cq = cq_one(d, n, k).unwrap();
            let norm = crate::protocol::recurse_one_norm(d, n, k);
            let a = 1.0 / norm;
            let b = crate::protocol::contraction_one(d, n).powi(k as i32) / norm;
            let p1 = a + (n as f64 - 2.0) * b;
            let h4 = shannon(&[p1, p1, 2.0 * b, 2.0 * b]);
            let expect = 1.0 + 2.0 * a - h4;
            let got = dw_bound(&cq, 0, 1).unwrap();
            assert!((got - expect).abs() < 1e-11, "D={d} N={n} k={k}: {got} vs {expect}");
        }
    }

    #[test]
    fn key_curve_rows_ascend_and_scale() {
        let curve = key_curve(&CurveFamily::One { shield_dim: 3, parties: 3 }, 1..=25).unwrap();
        assert_eq!(curve.len(), 25);
        for (slot, p) in curve.iter().enumerate() {
            assert_eq!(p.k as usize, slot + 1);
            assert!(p.scaled_key_rate <= p.key_rate + 1e-15);
            assert!(p.key_rate >= 0.0);
        }
    }

    #[test]
    fn thm_iv3_on_ideal_is_exact() {
        let report = thm_iv3_check(&ideal_cq(2, 3).unwrap()).unwrap();
        assert!(report.global_distance < 1e-14);
        assert!(report.pair_distances.iter().all(|&d| d < 1e-14));
        assert!(report.forward_ok && report.converse_ok);
    }

    #[test]
    fn thm_iv3_on_closed_forms() {
        for k in 1..=20 {
            let report = thm_iv3_check(&cq_one(3, 3, k).unwrap()).unwrap();
            assert!(report.forward_ok && report.converse_ok, "k={k}");
        }
    }

    #[test]
    fn ed_bound_for_maximally_mixed_shield() {
        let report = ed_lower_bound(&pdit_spec_identity(), 8, 7).unwrap();
        let pair = &report.pairs[0];
        assert!((pair.eta - 0.25).abs() < 1e-9);
        assert!((pair.a1 - 0.25).abs() < 1e-9);
        assert!((pair.a2 - 0.25).abs() < 1e-9);
        assert!((report.best - 0.25).abs() < 1e-6);
    }

    fn pdit_spec_identity() -> PditSpec {
        PditSpec {
            key_dim: 2,
            parties: 2,
            shield_shape: crate::shape::Shape::shields(2, 2),
            unitaries: vec![ComplexMatrix::identity(4), ComplexMatrix::identity(4)],
            shield_state: ComplexMatrix::identity(4).scale_re(0.25),
        }
    }

    #[test]
    fn eta_respects_cauchy_schwarz() {
        let gamma = states::permutation_operator(&[1, 0], 2, 2).unwrap();
        let spec = PditSpec {
            key_dim: 2,
            parties: 2,
            shield_shape: crate::shape::Shape::shields(2, 2),
            unitaries: vec![gamma, ComplexMatrix::identity(4)],
            shield_state: ComplexMatrix::identity(4).scale_re(0.25),
        };
        let report = ed_lower_bound(&spec, 8, 11).unwrap();
        for pair in &report.pairs {
            assert!(pair.eta <= (pair.a1 * pair.a2).sqrt() + 1e-10);
            assert!(pair.bound >= 0.0);
        }
        assert!(report.best > 0.0);
    }

    #[test]
    fn relative_entropy_bound_on_ghz() {
        for d in 2..=4 {
            let rho = states::ghz(d, 2).unwrap();
            let sigma = states::omega(d, 2).unwrap();
            let bits = relative_entropy_bound(&rho, &sigma).unwrap();
            assert!((bits - (d as f64).log2()).abs() < 1e-10, "d={d}");
        }
    }
}
