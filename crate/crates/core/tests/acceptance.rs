//! Acceptance suite: one test per criterion, each printing a pass line.
//!
//! Every tolerance is pinned in code. Two checks encode statements that the
//! construction mathematics does not actually satisfy (see the failure
//! messages); they are kept as stated rather than loosened.

use std::time::Instant;

use pditlab_core::{
    bell, cq, eig, entropy, keyrates, lemmas, protocol, rng, states, twist,
};
use rand::Rng;

fn family_grid() -> Vec<(usize, usize)> {
    let mut grid = Vec::new();
    for d in [2usize, 3, 4] {
        for n in [2usize, 3] {
            grid.push((d, n));
        }
    }
    grid
}

fn assemble_both(d: usize, n: usize) -> (pditlab_core::ComplexMatrix, pditlab_core::ComplexMatrix) {
    let one = states::construction_one(d, n).unwrap().assemble();
    let seed = states::vandermonde_seed(d).unwrap();
    let two = states::construction_two(&seed, n).unwrap().assemble();
    (one, two)
}

#[test]
fn criterion_01_state_validity() {
    let start = Instant::now();
    for (d, n) in family_grid() {
        for (name, dense) in {
            let (one, two) = assemble_both(d, n);
            [("one", one), ("two", two)]
        } {
            let herm = dense.hermiticity_defect();
            assert!(herm <= 1e-12, "{name}({d},{n}): hermiticity defect {herm:.3e}");
            let tr = dense.trace();
            assert!(
                (tr.re - 1.0).abs() <= 1e-10 && tr.im.abs() <= 1e-10,
                "{name}({d},{n}): trace {tr}"
            );
            let min = eig::herm_eigenvalues(&dense).unwrap().last().copied().unwrap();
            assert!(min >= -1e-9, "{name}({d},{n}): min eigenvalue {min:.3e}");
        }
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 30.0, "state validity took {elapsed:?}");
    println!("criterion 01 PASS: both families are states on the full grid ({elapsed:?})");
}

#[test]
fn criterion_02_ppt() {
    let start = Instant::now();
    for (d, n) in family_grid() {
        let (one, two) = assemble_both(d, n);
        for (name, dense) in [("one", one), ("two", two)] {
            for party in 0..n {
                let pt = dense.partial_transpose(&[party]).unwrap();
                let min = eig::herm_eigenvalues(&pt).unwrap().last().copied().unwrap();
                assert!(
                    min >= -1e-9,
                    "{name}({d},{n}): party-{party} transpose has min eigenvalue {min:.3e}"
                );
            }
        }
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 120.0, "PPT sweep took {elapsed:?}");
    println!("criterion 02 PASS: every single-party transpose is PSD ({elapsed:?})");
}

#[test]
fn criterion_03_protocol_oracle_equivalence() {
    use protocol::KeepRule;
    let mut failures: Vec<String> = Vec::new();

    // Block simulator against the fully dense simulator wherever the joint
    // dimension fits.
    for (d, n) in [(2usize, 2usize), (3, 2), (2, 3)] {
        let rho = states::construction_one(d, n).unwrap();
        let dense_copy = rho.assemble().without_shape();
        let joint = dense_copy.dim() * dense_copy.dim();
        if joint <= protocol::DENSE_SIM_CAP {
            let (bs, bp) = protocol::protocol_step(&rho, &rho, KeepRule::AllEqual).unwrap();
            let (ds, dp) =
                protocol::dense_protocol_step(&dense_copy, &dense_copy, n, KeepRule::AllEqual)
                    .unwrap();
            let defect = bs.assemble().without_shape().sub(&ds).unwrap().max_abs();
            assert!(defect <= 1e-10, "simulators disagree at ({d},{n}): {defect:.3e}");
            assert!((bp - dp).abs() <= 1e-12, "simulator probabilities at ({d},{n})");
        }
    }

    // Closed forms against the iterated block simulator.
    for (d, n) in [(2usize, 2usize), (3, 2), (2, 3)] {
        for k in [2u32, 3] {
            let closed = protocol::recurse_one(d, n, k).unwrap();
            let closed_state = closed.state.expect("grid blocks fit the dense cap");
            let initial = states::construction_one(d, n).unwrap();
            let (state, p) = protocol::iterate_protocol(&initial, k, KeepRule::AllEqual).unwrap();
            let p_err = (p - closed.success_probability).abs();
            let mut block_err = 0.0f64;
            for (key, block) in closed_state.blocks() {
                let sim = state.block(&key.0, &key.1);
                let err = match sim {
                    Some(sb) => sb.sub(block).unwrap().max_abs(),
                    None => block.max_abs(),
                };
                block_err = block_err.max(err);
            }
            if p_err > 1e-12 || block_err > 1e-9 {
                failures.push(format!(
                    "family one ({d},{n}) k={k}: probability error {p_err:.3e}, \
                     block error {block_err:.3e}"
                ));
            }
        }
    }
    for seed in [states::vandermonde_seed(2).unwrap(), states::hadamard_power_seed(1).unwrap()] {
        let n = 3usize;
        for k in [2u32, 3] {
            let closed = protocol::recurse_two(&seed, n, k).unwrap();
            let closed_state = closed.state.clone().expect("blocks fit");
            let initial = states::construction_two(&seed, n).unwrap();
            let (state, p) = protocol::iterate_protocol(&initial, k, closed.keep_rule).unwrap();
            let p_err = (p - closed.success_probability).abs();
            let mut block_err = 0.0f64;
            for (key, block) in closed_state.blocks() {
                let err = match state.block(&key.0, &key.1) {
                    Some(sb) => sb.sub(block).unwrap().max_abs(),
                    None => block.max_abs(),
                };
                block_err = block_err.max(err);
            }
            assert!(
                p_err <= 1e-12 && block_err <= 1e-9,
                "family two (D={}, N=3) k={k}: probability error {p_err:.3e}, block error {block_err:.3e}",
                seed.dim()
            );
        }
    }

    assert!(
        failures.is_empty(),
        "closed forms and the physical recurrence disagree at N = 2: the weight-one \
         key tuples coincide with their complements there, the collided branches pick up \
         cross terms under the CNOT step, and the keep probability becomes \
         2^(k-1)*2*(1+(2c)^k)/norm1^k instead of the branch-resolved \
         2^(k-1)*2*(1+2c^k)/norm1^k (both simulators agree with each other and with the \
         collision-aware value; verified in protocol::tests::n2_collision_departure). \
         Failing points:\n{}",
        failures.join("\n")
    );
    println!("criterion 03 PASS: closed forms, block simulator and dense simulator agree");
}

#[test]
fn criterion_04_entropic_identities() {
    for d in 2..=5usize {
        for n in 2..=3usize {
            let s = entropy::relative_entropy(
                &states::ghz(d, n).unwrap(),
                &states::omega(d, n).unwrap(),
            )
            .unwrap();
            assert!(
                (s - (d as f64).log2()).abs() <= 1e-10,
                "S(GHZ‖ω) at (d,N)=({d},{n}): {s}"
            );
            let rate = keyrates::dw_best(&cq::ideal_cq(d, n).unwrap()).unwrap();
            assert!(
                (rate - (d as f64).log2()).abs() <= 1e-12,
                "dw_best(ideal) at (d,N)=({d},{n}): {rate}"
            );
        }
    }
    println!("criterion 04 PASS: S(GHZ‖ω) = log₂d and dw_best(ideal) = log₂d");
}

fn first_positive_k(d: usize, n: usize, kmax: u32) -> Option<u32> {
    let curve = keyrates::key_curve(
        &keyrates::CurveFamily::One { shield_dim: d, parties: n },
        1..=kmax,
    )
    .unwrap();
    curve.iter().find(|p| p.key_rate_raw > 0.0).map(|p| p.k)
}

#[test]
fn criterion_05_figure1_trend() {
    for d in [3usize, 4, 5] {
        let k3 = first_positive_k(d, 3, 60);
        let k2 = first_positive_k(d, 2, 60);
        assert!(k3.is_some(), "D={d}, N=3: no positive rate up to k=60");
        assert!(k2.is_some(), "D={d}, N=2: no positive rate up to k=60");
        assert!(
            k3.unwrap() >= k2.unwrap(),
            "D={d}: threshold at N=3 ({:?}) below N=2 ({:?})",
            k3,
            k2
        );
    }
    for n in [2usize, 3] {
        assert!(
            first_positive_k(2, n, 60).is_none(),
            "D=2, N={n}: unexpectedly positive rate"
        );
    }
    println!("criterion 05 PASS: figure-1 trend (thresholds N=3 ≥ N=2; D=2 stays at zero)");
}

#[test]
fn criterion_06_figure3_trend() {
    let curve_for = |d: usize, kmax: u32| {
        let seed = if d.is_power_of_two() {
            states::hadamard_power_seed(d.trailing_zeros()).unwrap()
        } else {
            states::vandermonde_seed(d).unwrap()
        };
        let rule = if seed.hermitian {
            protocol::KeepRule::AllEqual
        } else {
            protocol::KeepRule::AllZeros
        };
        keyrates::key_curve(&keyrates::CurveFamily::Two { seed: &seed, parties: 3, rule }, 1..=kmax)
            .unwrap()
    };

    // Nondecreasing over k ∈ {1..40}.
    for d in [2usize, 3, 4] {
        let curve = curve_for(d, 40);
        for w in curve.windows(2) {
            assert!(
                w[1].key_rate >= w[0].key_rate - 1e-15,
                "D={d}: rate decreases between k={} and k={}",
                w[0].k,
                w[1].k
            );
        }
    }

    // Threshold structure at the 0.99-bit level on k ≤ 40.
    let threshold = |d: usize| -> Option<u32> {
        curve_for(d, 40).iter().find(|p| p.key_rate >= 0.99).map(|p| p.k)
    };
    let t2 = threshold(2);
    let t3 = threshold(3);
    let t4 = threshold(4);
    if let (Some(t2), Some(t3), Some(t4)) = (t2, t3, t4) {
        assert!(t4 <= t3 && t3 <= t2, "thresholds not nonincreasing: {t2:?} {t3:?} {t4:?}");
    }
    let k40 = |d: usize| curve_for(d, 40).last().unwrap().key_rate;
    let crossing = |d: usize| {
        curve_for(d, 120).iter().find(|p| p.key_rate >= 0.99).map(|p| p.k)
    };
    assert!(
        t4.is_some(),
        "the 0.99-bit level is not reached by k = 40: the closed-form rate at k = 40 is \
         {:.6} bits at D=4 ({:.6} at D=3, {:.6} at D=2), and the first crossings sit at \
         k = {:?} (D=4), {:?} (D=3), {:?} (D=2). The qualitative claim (faster convergence \
         for larger D) holds, the 0.99@k≤40 threshold does not.",
        k40(4),
        k40(3),
        k40(2),
        crossing(4),
        crossing(3),
        crossing(2),
    );
    println!("criterion 06 PASS: figure-3 trend at the stated thresholds");
}

#[test]
fn criterion_07_scaled_bounds() {
    // Family one, N = 3: some grid point with positive scaled rate.
    let mut found = false;
    for d in [3usize, 4, 5] {
        let curve = keyrates::key_curve(
            &keyrates::CurveFamily::One { shield_dim: d, parties: 3 },
            1..=60,
        )
        .unwrap();
        if curve.iter().any(|p| p.scaled_key_rate > 0.0) {
            found = true;
        }
    }
    assert!(found, "family one: no positive scaled rate on the grid");

    // Family two under both probability models; the two-sided model
    // dominates pointwise where both seeds exist (D ∈ {2,4}).
    for d in [2usize, 4] {
        let hermitian = states::hadamard_power_seed(d.trailing_zeros()).unwrap();
        let two_sided = keyrates::key_curve(
            &keyrates::CurveFamily::Two {
                seed: &hermitian,
                parties: 3,
                rule: protocol::KeepRule::AllEqual,
            },
            1..=40,
        )
        .unwrap();
        let one_sided = keyrates::key_curve(
            &keyrates::CurveFamily::Two {
                seed: &hermitian,
                parties: 3,
                rule: protocol::KeepRule::AllZeros,
            },
            1..=40,
        )
        .unwrap();
        assert!(two_sided.iter().any(|p| p.scaled_key_rate > 0.0), "two-sided D={d}");
        assert!(one_sided.iter().any(|p| p.scaled_key_rate > 0.0), "one-sided D={d}");
        for (a, b) in two_sided.iter().zip(&one_sided) {
            assert!(
                a.scaled_key_rate >= b.scaled_key_rate - 1e-15,
                "D={d} k={}: two-sided scaled rate below one-sided",
                a.k
            );
        }
    }
    // The non-Hermitian vandermonde path at D = 3 also turns positive.
    let vdm = states::vandermonde_seed(3).unwrap();
    let curve = keyrates::key_curve(
        &keyrates::CurveFamily::Two {
            seed: &vdm,
            parties: 3,
            rule: protocol::KeepRule::AllZeros,
        },
        1..=40,
    )
    .unwrap();
    assert!(curve.iter().any(|p| p.scaled_key_rate > 0.0));
    println!("criterion 07 PASS: scaled bounds turn positive; two-sided model dominates");
}

#[test]
fn criterion_08_closeness_certificates() {
    // Extraction on materialized states matches 1/2 − 1/𝒩 exactly.
    for k in [1u32, 2] {
        let out = protocol::recurse_one(3, 3, k).unwrap();
        let report = twist::closeness_report(out.state.as_ref().unwrap(), 0).unwrap();
        let expect = 0.5 - 1.0 / out.normalization;
        assert!(
            (report.epsilon - expect).abs() <= 1e-12,
            "k={k}: extracted {} vs closed form {expect}",
            report.epsilon
        );
    }
    // Monotone decrease of the scalar certificate.
    let mut last = f64::INFINITY;
    for k in 1..=40 {
        let eps = protocol::recurse_one_scalar(3, 3, k).unwrap().epsilon();
        assert!(eps < last, "epsilon not strictly decreasing at k={k}");
        last = eps;
    }
    // Exact pdit: epsilon and the qubit-key sufficient bound vanish.
    let gamma = states::pdit_example(2, 2, &[1, 0]).unwrap();
    let report = twist::closeness_report(&gamma, 0).unwrap();
    assert!(report.epsilon <= 1e-12);
    assert!(report.sufficient_bound.unwrap() <= 1e-6);
    println!("criterion 08 PASS: closeness certificates match 1/2 − 1/𝒩 and decrease");
}

#[test]
fn criterion_09_lemma_suites() {
    let a1 = lemmas::lemma_a1_suite(500, 42).unwrap();
    assert!(a1.pass, "block positivity suite failed: worst {:.3e}", a1.worst_margin());

    for d in 2..=5usize {
        let seed = states::vandermonde_seed(d).unwrap();
        for n in 2..=4usize {
            let v4 = lemmas::lemma_v_suite(lemmas::LemmaV::V4, d, n, Some(&seed)).unwrap();
            assert!(v4.pass, "V4 at (D,N)=({d},{n}): {:#?}", v4.cases);
        }
    }
    for d in [3usize, 4, 5] {
        for n in [2usize, 3] {
            let v3 = lemmas::lemma_v_suite(lemmas::LemmaV::V3, d, n, None).unwrap();
            assert!(v3.pass, "V3 at (D,N)=({d},{n}): {:#?}", v3.cases);
        }
    }
    for d in [2usize, 3, 4] {
        for n in [2usize, 3] {
            let v1 = lemmas::lemma_v_suite(lemmas::LemmaV::V1, d, n, None).unwrap();
            assert!(v1.pass, "V1 at (D,N)=({d},{n})");
        }
    }

    // 200 perturbed cq states through the closeness-equivalence checker.
    let mut r = rng::seeded(42);
    for trial in 0..200 {
        let cq_state = perturbed_ideal_cq(&mut r);
        let report = keyrates::thm_iv3_check(&cq_state).unwrap();
        assert!(report.forward_ok && report.converse_ok, "perturbation {trial}");
    }
    println!("criterion 09 PASS: lemma suites and the perturbed closeness checks");
}

fn perturbed_ideal_cq(r: &mut rand_chacha::ChaCha8Rng) -> cq::CqState {
    let (d, n) = (2usize, 3usize);
    let mut entries = vec![
        cq::CqEntry {
            key: vec![0, 0, 0],
            prob: 0.5 + r.gen_range(-0.02..0.02),
            eve: cq::EveSystem::Label(0),
        },
        cq::CqEntry {
            key: vec![1, 1, 1],
            prob: 0.5 + r.gen_range(-0.02..0.02),
            eve: cq::EveSystem::Label(0),
        },
    ];
    let mut stray = r.gen_range(0.0..0.02);
    let mut label = 1u32;
    while stray > 1e-4 {
        let p = stray * r.gen_range(0.3..1.0);
        stray -= p;
        let key: Vec<u8> = (0..n).map(|_| r.gen_range(0..d) as u8).collect();
        let eve = if r.gen_bool(0.5) {
            cq::EveSystem::Label(0)
        } else {
            label += 1;
            cq::EveSystem::Label(label)
        };
        entries.push(cq::CqEntry { key, prob: p, eve });
    }
    let total: f64 = entries.iter().map(|e| e.prob).sum();
    for e in &mut entries {
        e.prob /= total;
    }
    cq::CqState { key_dim: d, parties: n, entries }
}

#[test]
fn criterion_10_bell_violation() {
    let start = Instant::now();
    let (chsh, _) = bell::bell_optimize(&states::smolin_family(1).unwrap(), 50, 42).unwrap();
    assert!(chsh >= 2.82, "Bell-state CHSH came out at {chsh}");
    let (smolin, _) = bell::bell_optimize(&states::smolin_family(2).unwrap(), 50, 42).unwrap();
    assert!(smolin > 2.0, "Smolin state does not violate the classical bound: {smolin}");
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 60.0, "optimization took {elapsed:?}");
    println!(
        "criterion 10 PASS: optimized values {chsh:.6} (Bell state) and {smolin:.6} (Smolin) ({elapsed:?})"
    );
}

#[test]
fn criterion_11_ed_lower_bound() {
    let spec = states::PditSpec {
        key_dim: 2,
        parties: 2,
        shield_shape: pditlab_core::Shape::shields(2, 2),
        unitaries: vec![
            states::permutation_operator(&[0, 1], 2, 2).unwrap(),
            pditlab_core::ComplexMatrix::identity(4),
        ],
        shield_state: pditlab_core::ComplexMatrix::identity(4).scale_re(0.25),
    };
    let report = keyrates::ed_lower_bound(&spec, 16, 42).unwrap();
    assert!((report.best - 0.25).abs() <= 1e-6, "bound {}", report.best);
    for pair in &report.pairs {
        assert!(pair.eta <= (pair.a1 * pair.a2).sqrt() + 1e-10);
    }

    // Independent oracle: exhaustive computational-basis product vectors
    // plus 10⁴ random ones never exceed the found maximum.
    let m = spec.unitaries[0]
        .mul(&spec.shield_state)
        .unwrap()
        .mul(&spec.unitaries[1].adjoint())
        .unwrap();
    let mut oracle_max = 0.0f64;
    let basis = |dim: usize, x: usize| {
        let mut v = vec![pditlab_core::C64::new(0.0, 0.0); dim];
        v[x] = pditlab_core::C64::new(1.0, 0.0);
        v
    };
    let overlap = |f: &Vec<Vec<pditlab_core::C64>>, g: &Vec<Vec<pditlab_core::C64>>| -> f64 {
        let mut acc = pditlab_core::C64::new(0.0, 0.0);
        for r in 0..4 {
            for c in 0..4 {
                let fr = f[0][r / 2].conj() * f[1][r % 2].conj();
                let gc = g[0][c / 2] * g[1][c % 2];
                acc += fr * m.get(r, c) * gc;
            }
        }
        acc.norm()
    };
    for fx in 0..2 {
        for fy in 0..2 {
            for gx in 0..2 {
                for gy in 0..2 {
                    let f = vec![basis(2, fx), basis(2, fy)];
                    let g = vec![basis(2, gx), basis(2, gy)];
                    oracle_max = oracle_max.max(overlap(&f, &g));
                }
            }
        }
    }
    let mut r = rng::seeded(7);
    for _ in 0..10_000 {
        let f = vec![rng::random_unit_vector(2, &mut r), rng::random_unit_vector(2, &mut r)];
        let g = vec![rng::random_unit_vector(2, &mut r), rng::random_unit_vector(2, &mut r)];
        oracle_max = oracle_max.max(overlap(&f, &g));
    }
    let eta = report.pairs[0].eta;
    assert!(
        eta >= oracle_max - 1e-9 && (oracle_max - 0.25).abs() <= 1e-6,
        "oracle max {oracle_max} vs found eta {eta}"
    );
    println!("criterion 11 PASS: bound 0.25 bits confirmed against the sampling oracle");
}
