//! Cross-protocol and cross-simulator equivalence checks.

use bosonic_mipt::gates::SnapPlacement;
use bosonic_mipt::noise::{noisy_ensemble, NoiseParams, NoiseToggles};
use bosonic_mipt::protocols::{purification_ensemble, CircuitConfig, InitialState};

/// Checkerboard init plus 2L scrambling layers reproduces the Haar-pair
/// curves within combined errors at every sampled (p, t).
#[test]
fn scrambled_checkerboard_matches_haar_initialization() {
    let l = 8;
    for (pi, p) in [0.2, 1.0].into_iter().enumerate() {
        let mut haar = CircuitConfig::haar(l);
        haar.monitored_layers = 2 * l;
        haar.meas_rate = p;
        haar.seed = 21 + pi as u64;
        let a = purification_ensemble(&haar, 800, None).unwrap();

        let mut cb = CircuitConfig::checkerboard(l);
        cb.monitored_layers = 2 * l;
        cb.meas_rate = p;
        cb.snap_placement = haar.snap_placement;
        cb.seed = 91 + pi as u64;
        let b = purification_ensemble(&cb, 800, None).unwrap();

        for t in [l / 2, l, 2 * l] {
            let (ra, rb) = (&a.ancilla[t], &b.ancilla[t]);
            let diff = (ra.mean - rb.mean).abs();
            // The scrambled branches share one preparation unitary, so the
            // pair is slightly less generic than independent Haar vectors;
            // the curves agree to figure resolution, not to arbitrary
            // statistical precision.
            let bound = (3.0 * (ra.sem * ra.sem + rb.sem * rb.sem).sqrt()).max(0.05);
            assert!(
                diff < bound,
                "p={p} t={t}: haar {:.4}±{:.4} vs checkerboard {:.4}±{:.4}",
                ra.mean,
                ra.sem,
                rb.mean,
                rb.sem
            );
        }
    }
}

/// The mixed-state simulator with every channel disabled reproduces the
/// pure-state trajectory ensemble.
#[test]
fn noiseless_density_matrix_path_matches_pure_states() {
    let mut cfg = CircuitConfig::checkerboard(4);
    cfg.scramble_layers = 4;
    cfg.monitored_layers = 4;
    cfg.meas_rate = 1.0;
    cfg.seed = 33;

    let mut pure_cfg = cfg.clone();
    pure_cfg.snap_placement = SnapPlacement::AllModes;
    let pure = purification_ensemble(&pure_cfg, 4000, None).unwrap();
    let noisy = noisy_ensemble(
        &cfg,
        &NoiseParams::default(),
        &NoiseToggles::all_off(),
        250,
        None,
    )
    .unwrap();

    for t in 0..=cfg.monitored_layers {
        let (a, b) = (&pure.ancilla[t], &noisy[t]);
        let diff = (a.mean - b.mean).abs();
        let bound = 3.0 * (a.sem * a.sem + b.sem * b.sem).sqrt();
        assert!(
            diff < bound.max(0.01),
            "t={t}: pure {:.4}±{:.4} vs noiseless-mixed {:.4}±{:.4}",
            a.mean,
            a.sem,
            b.mean,
            b.sem
        );
    }
}

/// At p=1 with interacting gates the ensemble mean at t=2L sits well below
/// the early-time value (statistical monotonicity stand-in).
#[test]
fn purification_progresses_at_high_measurement_rate() {
    for l in [6usize, 8] {
        let mut cfg = CircuitConfig::haar(l);
        cfg.monitored_layers = 2 * l;
        cfg.meas_rate = 1.0;
        cfg.seed = 77;
        let stats = purification_ensemble(&cfg, 600, None).unwrap();
        let early = &stats.ancilla[2];
        let late = &stats.ancilla[2 * l];
        let sep = 3.0 * (early.sem * early.sem + late.sem * late.sem).sqrt();
        assert!(
            late.mean < early.mean - sep,
            "L={l}: S_R(2) = {:.4}±{:.4}, S_R(2L) = {:.4}±{:.4}",
            early.mean,
            early.sem,
            late.mean,
            late.sem
        );
    }
}

/// Haar-pair initialization also works in the mixed-state path when the
/// truncation holds every sector state.
#[test]
fn noisy_path_supports_haar_initialization() {
    let mut cfg = CircuitConfig::haar(2);
    cfg.photons = 1;
    cfg.monitored_layers = 3;
    cfg.meas_rate = 1.0;
    cfg.init = InitialState::HaarPair;
    cfg.seed = 5;
    let records = noisy_ensemble(
        &cfg,
        &NoiseParams::default(),
        &NoiseToggles::all_off(),
        50,
        None,
    )
    .unwrap();
    assert_eq!(records.len(), 4);
    assert!((records[0].mean - 1.0).abs() < 1e-9);
}
