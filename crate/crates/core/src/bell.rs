//! Correlation-function Bell value |E_{1…11} + E_{1…12} + E_{2…21} − E_{2…22}|
//! for multiqubit states, and a seeded coordinate-ascent optimizer over
//! ±1-valued qubit observables n̂·σ⃗.


use crate::error::{Error, Result};
use crate::matrix::{tensor, ComplexMatrix};
use crate::rng;
use crate::states::pauli;

/// Unit Bloch vector; the observable is n̂·σ⃗.
#[derive(Clone, Copy, Debug)]
pub struct BlochVector {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl BlochVector {
    pub fn norm(&self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    pub fn normalized(self) -> BlochVector {
        let n = self.norm();
        BlochVector { x: self.x / n, y: self.y / n, z: self.z / n }
    }

    pub fn observable(&self) -> ComplexMatrix {
        let mut m = pauli(1).scale_re(self.x);
        m = m.add(&pauli(2).scale_re(self.y)).expect("same dim");
        m.add(&pauli(3).scale_re(self.z)).expect("same dim")
    }
}

/// Two ±1-valued observables per party.
#[derive(Clone, Debug)]
pub struct BellSettings {
    pub observables: Vec<[BlochVector; 2]>,
}

impl BellSettings {
    pub fn validate(&self) -> Result<()> {
        for (p, pair) in self.observables.iter().enumerate() {
            for s in pair {
                if (s.norm() - 1.0).abs() > 1e-12 {
                    return Err(Error::InvalidParameter(format!(
                        "party {p}: Bloch vector not unit norm"
                    )));
                }
            }
        }
        Ok(())
    }
}

fn qubit_count(rho: &ComplexMatrix) -> Result<usize> {
    let dim = rho.dim();
    if !dim.is_power_of_two() || dim < 4 {
        return Err(Error::Structure(format!("dimension {dim} is not a multiqubit register")));
    }
    Ok(dim.trailing_zeros() as usize)
}

/// One correlation function: all parties but the last use setting `s_head`,
/// the last uses `s_tail`. A zero observable (used internally by the
/// optimizer) makes the value linear in the missing slot.
fn correlation(
    rho: &ComplexMatrix,
    obs: &[ComplexMatrix],
) -> f64 {
    let mut joint = obs[0].clone();
    for o in &obs[1..] {
        joint = tensor(&joint, o);
    }
    rho.mul(&joint).expect("same dim").trace().re
}

fn term_observables(
    settings: &BellSettings,
    parties: usize,
    s_head: usize,
    s_tail: usize,
) -> Vec<ComplexMatrix> {
    (0..parties)
        .map(|p| {
            let s = if p + 1 == parties { s_tail } else { s_head };
            settings.observables[p][s].observable()
        })
        .collect()
}

/// Signed combination E_{1…11} + E_{1…12} + E_{2…21} − E_{2…22}.
fn signed_value(rho: &ComplexMatrix, settings: &BellSettings, parties: usize) -> f64 {
    correlation(rho, &term_observables(settings, parties, 0, 0))
        + correlation(rho, &term_observables(settings, parties, 0, 1))
        + correlation(rho, &term_observables(settings, parties, 1, 0))
        - correlation(rho, &term_observables(settings, parties, 1, 1))
}

/// |E_{1…11} + E_{1…12} + E_{2…21} − E_{2…22}| for the given settings.
pub fn bell_value(rho: &ComplexMatrix, settings: &BellSettings) -> Result<f64> {
    let parties = qubit_count(rho)?;
    if settings.observables.len() != parties {
        return Err(Error::InvalidParameter(format!(
            "need {parties} observable pairs, got {}",
            settings.observables.len()
        )));
    }
    settings.validate()?;
    Ok(signed_value(rho, settings, parties).abs())
}

/// Seeded coordinate ascent: each sweep replaces one Bloch vector by the
/// exact maximizer of the (affine-in-that-vector) signed combination.
/// Returns the best value found and its settings; a lower bound on the true
/// maximum.
pub fn bell_optimize(rho: &ComplexMatrix, restarts: usize, seed: u64) -> Result<(f64, BellSettings)> {
    let parties = qubit_count(rho)?;
    let mut rng = rng::seeded(seed);
    let mut best_val = -1.0;
    let mut best_settings = None;

    for _ in 0..restarts.max(1) {
        let mut settings = BellSettings {
            observables: (0..parties)
                .map(|_| {
                    [random_bloch(&mut rng), random_bloch(&mut rng)]
                })
                .collect(),
        };
        let mut last = signed_value(rho, &settings, parties).abs();
        for _sweep in 0..60 {
            for p in 0..parties {
                for s in 0..2 {
                    update_slot(rho, &mut settings, parties, p, s);
                }
            }
            let val = signed_value(rho, &settings, parties).abs();
            if (val - last).abs() < 1e-13 {
                last = val;
                break;
            }
            last = val;
        }
        if last > best_val {
            best_val = last;
            best_settings = Some(settings);
        }
    }
    Ok((best_val, best_settings.expect("at least one restart")))
}

fn random_bloch(rng: &mut rand_chacha::ChaCha8Rng) -> BlochVector {
    let v = rng::random_unit_vector(3, rng);
    // Real direction from a complex sample: take real parts, renormalize.
    let cand = BlochVector { x: v[0].re + v[0].im, y: v[1].re + v[1].im, z: v[2].re + v[2].im };
    if cand.norm() < 1e-9 {
        BlochVector { x: 0.0, y: 0.0, z: 1.0 }
    } else {
        cand.normalized()
    }
}

/// Exact single-slot update: the signed combination is L⃗·n̂ + c in the slot's
/// Bloch vector; the maximizing unit vector is ±L̂ depending on sign(c).
fn update_slot(
    rho: &ComplexMatrix,
    settings: &mut BellSettings,
    parties: usize,
    p: usize,
    s: usize,
) {
    let zero = ComplexMatrix::zeros(2);
    let eval = |settings: &BellSettings, probe: Option<&ComplexMatrix>| -> f64 {
        let mut total = 0.0;
        for (s_head, s_tail, sign) in
            [(0usize, 0usize, 1.0), (0, 1, 1.0), (1, 0, 1.0), (1, 1, -1.0f64)]
        {
            let uses_slot = if p + 1 == parties { s_tail == s } else { s_head == s };
            let mut obs = term_observables(settings, parties, s_head, s_tail);
            if uses_slot {
                match probe {
                    Some(m) => obs[p] = m.clone(),
                    None => continue,
                }
            } else if probe.is_some() {
                // Linear-coefficient probes only sum terms that use the slot.
                continue;
            }
            total += sign * correlation(rho, &obs);
        }
        total
    };

    let c = eval(settings, Some(&zero)) + eval(settings, None);
    let mut l = [0.0f64; 3];
    for (axis, li) in l.iter_mut().enumerate() {
        *li = eval(settings, Some(&pauli(axis + 1))) + eval(settings, None) - c;
    }
    let norm = (l[0] * l[0] + l[1] * l[1] + l[2] * l[2]).sqrt();
    if norm < 1e-14 {
        return;
    }
    let sign = if c >= 0.0 { 1.0 } else { -1.0 };
    settings.observables[p][s] =
        BlochVector { x: sign * l[0] / norm, y: sign * l[1] / norm, z: sign * l[2] / norm };
}
