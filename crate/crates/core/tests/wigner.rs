use std::sync::OnceLock;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use zakgross_core::measure::{exact_probabilities_ideal, MeasurementSpec};
use zakgross_core::qudit::{clifford_oracle_probabilities, CliffordGate};
use zakgross_core::symplectic::{Generator, Operation};
use zakgross_core::theta::RealisticGkpSpec;
use zakgross_core::wigner::{ModeInput, WignerState};
use zakgross_core::{CodeParams, PhasePoint};

fn params3() -> CodeParams {
    CodeParams::new(3, 3).unwrap()
}

/// Logical 0 at Δ = 0.4, phase state at Δ = 0.5, logical 1 at Δ = 0.4.
fn mixed_state() -> &'static WignerState {
    static STATE: OnceLock<WignerState> = OnceLock::new();
    STATE.get_or_init(|| {
        let specs = [
            RealisticGkpSpec::logical(3, 0, 0.4).unwrap(),
            RealisticGkpSpec::phase_state(3, 0.5).unwrap(),
            RealisticGkpSpec::logical(3, 1, 0.4).unwrap(),
        ];
        let inputs: Vec<ModeInput> = specs.into_iter().map(ModeInput::Realistic).collect();
        WignerState::new(&params3(), &inputs).unwrap()
    })
}

fn random_ops(seed: u64, n: usize) -> Vec<Operation> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gens = Generator::all(n);
    (0..rng.random_range(1..12))
        .map(|_| {
            if rng.random_bool(0.25) {
                Operation::Displace((0..2 * n).map(|_| rng.random_range(-2.0..2.0)).collect())
            } else {
                Operation::Gate(gens[rng.random_range(0..gens.len())])
            }
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn product_factorizes(coords in prop::collection::vec(0.0f64..4.5, 6)) {
        let st = mixed_state();
        let p = params3();
        let eta = PhasePoint::new(&p, coords);
        let whole = st.evaluate(&eta);
        let mut prod = 1.0;
        for (i, f) in st.factors().iter().enumerate() {
            let (x, z) = eta.mode(i);
            prod *= f.value(p.ell(), x, z);
        }
        prop_assert!((whole - prod).abs() <= 1e-10 * prod.abs().max(1e-3), "{whole} vs {prod}");
    }

    #[test]
    fn evolution_is_a_pushforward(coords in prop::collection::vec(0.0f64..4.5, 6), seed in any::<u64>()) {
        let st = mixed_state();
        let p = params3();
        let evolved = st.apply_all(&random_ops(seed, 3)).unwrap();
        let eta = PhasePoint::new(&p, coords);
        let before = st.evaluate(&eta);
        let after = evolved.evaluate(&evolved.map().apply(&eta));
        prop_assert!((before - after).abs() <= 1e-9 * before.abs().max(1e-3), "{before} vs {after}");
        prop_assert_eq!(evolved.negativity(), st.negativity());
    }

    #[test]
    fn stepwise_and_batched_evolution_agree(seed in any::<u64>()) {
        let st = mixed_state();
        let ops = random_ops(seed, 3);
        let mut step = st.clone();
        for op in &ops {
            step = step.apply(op).unwrap();
        }
        let batched = st.apply_all(&ops).unwrap();
        prop_assert_eq!(step.map(), batched.map());
    }

    #[test]
    fn ideal_outcomes_match_dense_oracle(
        d in prop::sample::select(vec![3u32, 5]),
        n in 1usize..=2,
        seed in any::<u64>(),
    ) {
        let params = CodeParams::new(d, n).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let labels: Vec<u32> = (0..n).map(|_| rng.random_range(0..d)).collect();
        let gens = Generator::all(n);
        let word: Vec<Generator> = (0..rng.random_range(0..8))
            .map(|_| gens[rng.random_range(0..gens.len())])
            .collect();
        let ops: Vec<Operation> = word.iter().copied().map(Operation::Gate).collect();
        let gates: Vec<CliffordGate> = word.into_iter().map(CliffordGate::Generator).collect();
        let st = WignerState::ideal_input(&params, &labels).unwrap().apply_all(&ops).unwrap();
        let modes: Vec<usize> = (0..n).collect();
        let spec = MeasurementSpec::new(&params, modes.clone(), d).unwrap();
        let got = exact_probabilities_ideal(&st, &spec).unwrap();
        let want = clifford_oracle_probabilities(&params, &labels, &gates, &modes).unwrap();
        for (a, b) in got.iter().zip(&want) {
            prop_assert!((a - b).abs() < 1e-9);
        }
        prop_assert!((got.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn sampler_is_reproducible_per_stream() {
    let st = mixed_state();
    let a = st.sample_abs(4, 200).unwrap();
    let b = st.sample_abs(4, 200).unwrap();
    assert_eq!(a.len(), 200);
    assert!(a.iter().zip(&b).all(|(x, y)| x.point == y.point && x.sign == y.sign));
    let mut other = st.sampler(4, 1);
    let c = other.draw().unwrap();
    assert!(c.point != a[0].point);
}

#[test]
fn sample_signs_agree_with_values() {
    let st = mixed_state();
    let peak = 1e-6;
    for s in st.sample_abs(9, 2000).unwrap() {
        let w = st.evaluate(&s.point);
        if w.abs() > peak {
            assert_eq!(s.sign, if w > 0.0 { 1 } else { -1 }, "{w}");
        }
    }
}
