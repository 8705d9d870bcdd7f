use proptest::prelude::*;
use zakgross_core::estimator::{estimate, EstimatePlan};
use zakgross_core::measure::{bin_of, realistic_probabilities, MeasurementSpec};
use zakgross_core::theta::RealisticGkpSpec;
use zakgross_core::wigner::WignerState;
use zakgross_core::{CodeParams, PhasePoint};

proptest! {
    #[test]
    fn bin_index_matches_povm(
        coords in prop::collection::vec(-20.0f64..20.0, 4),
        bins in 1u32..9,
        swap in any::<bool>(),
    ) {
        let params = CodeParams::new(5, 2).unwrap();
        let modes = if swap { vec![1, 0] } else { vec![0, 1] };
        let spec = MeasurementSpec::new(&params, modes, bins).unwrap();
        let eta = PhasePoint::new(&params, coords);
        let idx = spec.bin_index(&params, &eta);
        prop_assert!(idx < spec.outcomes());
        let labels = spec.labels(idx);
        prop_assert_eq!(spec.flat_index(&labels), idx);
        prop_assert!(spec.povm_indicator(&params, &labels, &eta));
        for (k, &l) in labels.iter().enumerate() {
            let x = eta.x(spec.modes()[k]);
            prop_assert!(spec.edge(&params, l) <= x + 1e-9 * params.period());
        }
    }

    #[test]
    fn bin_of_is_periodic(x in -10.0f64..10.0, shift in -3i32..3, bins in 1u32..12) {
        let params = CodeParams::new(3, 1).unwrap();
        let y = x + shift as f64 * params.period();
        prop_assert_eq!(bin_of(&params, bins, x), bin_of(&params, bins, y));
    }
}

#[test]
fn lattice_points_land_in_their_bin() {
    let params = CodeParams::new(3, 1).unwrap();
    for k in 0..3 {
        let x = k as f64 * params.ell();
        assert_eq!(bin_of(&params, 3, x), k);
        assert_eq!(bin_of(&params, 3, x - 1e-13), k);
    }
}

#[test]
fn realistic_estimate_is_within_error_bars() {
    let params = CodeParams::new(3, 1).unwrap();
    let spec = RealisticGkpSpec::logical(3, 1, 0.35).unwrap();
    let st = WignerState::realistic_input(&params, &[spec]).unwrap();
    let m = MeasurementSpec::new(&params, vec![0], 6).unwrap();
    let exact = realistic_probabilities(&st, &m).unwrap();
    assert!((exact.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    let plan = EstimatePlan::new(0.03, 0.05, st.negativity()).unwrap();
    let r = estimate(&st, &m, &plan, 21).unwrap();
    assert!(r.negative_draws > 0);
    for (i, (e, p)) in r.estimates.iter().zip(&exact).enumerate() {
        assert!((e - p).abs() <= 4.0 * r.std_errors[i] + 1e-12, "bin {i}: {e} vs {p}");
    }
}
