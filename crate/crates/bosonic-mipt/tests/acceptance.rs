//! Acceptance suite: one test per quantitative target, each printing a
//! PASS/FAIL line with the measured values.
//!
//! Criteria 2 and 5 pin absolute saturation values read off published
//! figures. This implementation reproduces the qualitative structure those
//! figures show (the crossing locations and the purified/critical contrast)
//! but purifies with different constants at high measurement rate, so those
//! two tests are expected to fail until the discrepancy is resolved; the
//! assertions are kept faithful to the stated targets rather than loosened.
//! An independent dense-matrix reimplementation reproduces this crate's
//! numbers, so the gap is a modeling convention, not an implementation bug.

use std::sync::Arc;

use bosonic_mipt::analysis::{crossing_estimate, Curve};
use bosonic_mipt::basis::SectorBasis;
use bosonic_mipt::entropy::{ancilla_entropy, mean_sem, EntropyBase};
use bosonic_mipt::gates::{
    apply_layer, sample_layer, two_mode_block, GateMode, LayerSchedule, SnapPlacement,
};
use bosonic_mipt::hardware::{
    effective_rates, photon_count_bits, ramsey_probs, wall_time, CircuitFamily, DispersiveParams,
    NoiseSpectrum, WallTimeParams,
};
use bosonic_mipt::measurement::{
    force_and_collapse, outcome_distribution, sample_and_collapse, MeasurementKind,
};
use bosonic_mipt::noise::{
    local_noise_channel, noise_budget, DensityMatrix, NoiseParams, NoiseToggles,
};
use bosonic_mipt::protocols::{
    init_haar_pair, learnability_ensemble, mix_seed, purification_ensemble, run_purification,
    CircuitConfig, InitialState,
};
use bosonic_mipt::{PureState, C64};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn base_cfg(l: usize) -> CircuitConfig {
    let mut cfg = CircuitConfig::haar(l);
    cfg.monitored_layers = 2 * l;
    cfg.gate_mode = GateMode::Bsfp;
    cfg.hubbard_u = 2.0;
    cfg.with_snap = true;
    cfg.snap_placement = SnapPlacement::AllModes;
    cfg.measurement = MeasurementKind::Parity;
    cfg
}

fn final_entropy(cfg: &CircuitConfig, n: usize) -> (f64, f64) {
    let stats = purification_ensemble(cfg, n, None).unwrap();
    let last = &stats.ancilla[cfg.monitored_layers];
    (last.mean, last.sem)
}

fn entropy_curve(cfg: &CircuitConfig, grid: &[f64], n: usize) -> Curve {
    let pts = grid
        .iter()
        .map(|&p| {
            let mut run = cfg.clone();
            run.meas_rate = p;
            let (mean, sem) = final_entropy(&run, n);
            (p, mean, sem)
        })
        .collect();
    Curve::from_points(pts)
}

#[test]
fn criterion_01_mipt_crossing() {
    // U=2 parity curves at t = 2L cross between consecutive sizes inside
    // [0.2, 0.4].
    let grid = [0.15, 0.2, 0.25, 0.3, 0.35, 0.4];
    let n = 2000;
    let curves: Vec<(usize, Curve)> = [8usize, 10, 12]
        .iter()
        .map(|&l| {
            let mut cfg = base_cfg(l);
            cfg.seed = 42;
            (l, entropy_curve(&cfg, &grid, n))
        })
        .collect();

    let mut ok = true;
    let mut found = Vec::new();
    for pair in curves.windows(2) {
        let (l1, a) = &pair[0];
        let (l2, b) = &pair[1];
        match crossing_estimate(a, b) {
            Ok(roots) => {
                let p_star = roots[0].p_star;
                found.push(format!(
                    "L{l1}/L{l2}: p* = {p_star:.3} ± {:.3}{}",
                    roots[0].sigma,
                    if roots.len() > 1 { " (multiple roots)" } else { "" }
                ));
                if !(0.2..=0.4).contains(&p_star) {
                    ok = false;
                }
            }
            Err(e) => {
                found.push(format!("L{l1}/L{l2}: {e}"));
                ok = false;
            }
        }
    }
    println!(
        "[criterion 01] {} MIPT crossing: {}",
        if ok { "PASS" } else { "FAIL" },
        found.join("; ")
    );
    assert!(ok, "expected pairwise crossings in [0.2, 0.4]: {found:?}");
}

#[test]
fn criterion_02_bsfp_critical_contrast() {
    // U=0 stays unpurified (> 0.2 bit) at p=1, t=2L while U=2 purifies
    // (< 0.05 bit), 3-SEM separated.
    let n = 1000;
    let mut results = Vec::new();
    let mut ok = true;
    for l in [8usize, 12] {
        let mut free = base_cfg(l);
        free.hubbard_u = 0.0;
        free.with_snap = false;
        free.meas_rate = 1.0;
        free.seed = 1001;
        let (m0, s0) = final_entropy(&free, n);

        let mut interacting = base_cfg(l);
        interacting.meas_rate = 1.0;
        interacting.seed = 1002;
        let (m2, s2) = final_entropy(&interacting, n);

        let separated = m0 - m2 > 3.0 * (s0 * s0 + s2 * s2).sqrt();
        results.push(format!(
            "L={l}: U=0 {m0:.3}±{s0:.3}, U=2 {m2:.3}±{s2:.3}, 3-SEM separated: {separated}"
        ));
        if !(m0 > 0.2 && m2 < 0.05 && separated) {
            ok = false;
        }
    }
    println!(
        "[criterion 02] {} BSFP critical contrast: {}",
        if ok { "PASS" } else { "FAIL" },
        results.join("; ")
    );
    assert!(
        ok,
        "expected U=0 > 0.2 and U=2 < 0.05 at p=1, t=2L: {results:?}"
    );
}

#[test]
fn criterion_03_bsfp_t_over_l_collapse() {
    // U=0 curves at fixed t/L = 1 agree between L=8 and L=12 for each high p.
    let mut ok = true;
    let mut results = Vec::new();
    for p in [0.5, 0.75, 1.0] {
        let read = |l: usize, n: usize| {
            let mut cfg = base_cfg(l);
            cfg.hubbard_u = 0.0;
            cfg.with_snap = false;
            cfg.meas_rate = p;
            cfg.seed = 3003;
            let stats = purification_ensemble(&cfg, n, None).unwrap();
            (stats.ancilla[l].mean, stats.ancilla[l].sem)
        };
        let (a, sa) = read(8, 1000);
        let (b, sb) = read(12, 600);
        let diff = (a - b).abs();
        let bound = (0.1f64).max(3.0 * (sa * sa + sb * sb).sqrt());
        results.push(format!("p={p}: |ΔS_R| = {diff:.3} (bound {bound:.3})"));
        if diff >= bound {
            ok = false;
        }
    }
    println!(
        "[criterion 03] {} t/L collapse: {}",
        if ok { "PASS" } else { "FAIL" },
        results.join("; ")
    );
    assert!(ok, "{results:?}");
}

#[test]
fn criterion_04_number_measurement_contrast() {
    // U=0 with number measurements purifies fast; U=2 shows a crossing in
    // [0.05, 0.2] (depth 4L, where the transition is established).
    let mut free = base_cfg(8);
    free.hubbard_u = 0.0;
    free.with_snap = false;
    free.measurement = MeasurementKind::Number;
    free.meas_rate = 0.5;
    free.seed = 4004;
    let (m0, s0) = final_entropy(&free, 800);
    let free_ok = m0 < 0.05;

    let grid = [0.04, 0.07, 0.1, 0.13, 0.16, 0.2];
    let curves: Vec<Curve> = [8usize, 10]
        .iter()
        .map(|&l| {
            let mut cfg = base_cfg(l);
            cfg.measurement = MeasurementKind::Number;
            cfg.monitored_layers = 4 * l;
            cfg.seed = 4005;
            entropy_curve(&cfg, &grid, if l == 8 { 800 } else { 600 })
        })
        .collect();
    let crossing = crossing_estimate(&curves[0], &curves[1]);
    let (cross_ok, cross_msg) = match &crossing {
        Ok(roots) => (
            (0.05..=0.2).contains(&roots[0].p_star),
            format!("p* = {:.3} ± {:.3}", roots[0].p_star, roots[0].sigma),
        ),
        Err(e) => (false, e.to_string()),
    };

    let ok = free_ok && cross_ok;
    println!(
        "[criterion 04] {} number measurements: U=0 S_R = {m0:.4}±{s0:.4}; U=2 crossing {cross_msg}",
        if ok { "PASS" } else { "FAIL" }
    );
    assert!(ok, "U=0 S_R = {m0} (want < 0.05), U=2 crossing {cross_msg}");
}

#[test]
fn criterion_05_learnability_transition() {
    // Decoder accuracy low at p=0.05, high at p=0.5, monotone within noise.
    let grid = [0.05, 0.1, 0.2, 0.3, 0.4, 0.5];
    let n = 2000;
    let mut points = Vec::new();
    for &p in &grid {
        let mut cfg = base_cfg(8);
        cfg.monitored_layers = 32;
        cfg.meas_rate = p;
        cfg.seed = 5005;
        let (pt, _) = learnability_ensemble(&cfg, n, None).unwrap();
        points.push(pt);
    }
    let low_ok = points[0].accuracy < 0.7;
    let high_ok = points.last().unwrap().accuracy > 0.9;
    let mut monotone = true;
    for w in points.windows(2) {
        let slack = 3.0 * (w[0].sem * w[0].sem + w[1].sem * w[1].sem).sqrt();
        if w[1].accuracy < w[0].accuracy - slack {
            monotone = false;
        }
    }
    let summary: Vec<String> = points
        .iter()
        .map(|pt| format!("A({}) = {:.3}±{:.3}", pt.p, pt.accuracy, pt.sem))
        .collect();
    let ok = low_ok && high_ok && monotone;
    println!(
        "[criterion 05] {} learnability: {} (monotone: {monotone})",
        if ok { "PASS" } else { "FAIL" },
        summary.join(", ")
    );
    assert!(
        ok,
        "want A(0.05) < 0.7, A(0.5) > 0.9, monotone: {summary:?}"
    );
}

/// Enumerates all p=1 parity records of a fixed circuit, returning
/// Σ p(record) and Σ p(record)·S_R(final).
fn enumerate_records(
    state: &PureState,
    layers: &[LayerSchedule],
    idx: usize,
    site: usize,
    weight: f64,
    acc: &mut (f64, f64),
) {
    let l = state.basis().modes();
    if idx == layers.len() {
        acc.0 += weight;
        acc.1 += weight * ancilla_entropy(state, EntropyBase::Two);
        return;
    }
    if site == 0 {
        let mut evolved = state.clone();
        apply_layer(&mut evolved, &layers[idx]).unwrap();
        enumerate_records(&evolved, layers, idx, 1, weight, acc);
        return;
    }
    if site > l {
        enumerate_records(state, layers, idx + 1, 0, weight, acc);
        return;
    }
    let probs = outcome_distribution(state, site, MeasurementKind::Parity).unwrap();
    for (o, &p) in probs.iter().enumerate() {
        if p < 1e-14 {
            continue;
        }
        let mut branch = state.clone();
        let w = force_and_collapse(&mut branch, site, MeasurementKind::Parity, o as u32).unwrap();
        enumerate_records(&branch, layers, idx, site + 1, weight * w, acc);
    }
}

#[test]
fn criterion_06_exact_small_system_oracles() {
    let mut ok = true;
    let mut notes = Vec::new();
    for (l, q, depth) in [(2usize, 1u8, 2usize), (3, 2, 2)] {
        let basis = Arc::new(SectorBasis::new(l, q).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(606);
        let (state, _, _) = init_haar_pair(&basis, &mut rng).unwrap();
        let layers: Vec<LayerSchedule> = (1..=depth)
            .map(|t| sample_layer(&mut rng, t, l, GateMode::Bsrp, 2.0, true, SnapPlacement::Brick))
            .collect();

        // (a) chained forced-record probabilities sum to one.
        let mut acc = (0.0, 0.0);
        enumerate_records(&state, &layers, 0, 0, 1.0, &mut acc);
        let (total, exact_mean) = acc;
        if (total - 1.0).abs() >= 1e-8 {
            ok = false;
        }

        // (b) sampled ensemble mean matches the exact Born-weighted mean.
        let n = 20_000;
        let mut samples = Vec::with_capacity(n);
        let mut mc = ChaCha8Rng::seed_from_u64(607);
        for _ in 0..n {
            let mut s = state.clone();
            for (i, layer) in layers.iter().enumerate() {
                apply_layer(&mut s, layer).unwrap();
                for site in 1..=l {
                    sample_and_collapse(&mut s, i + 1, site, MeasurementKind::Parity, &mut mc)
                        .unwrap();
                }
            }
            samples.push(ancilla_entropy(&s, EntropyBase::Two));
        }
        let (mc_mean, mc_sem) = mean_sem(&samples);
        if (mc_mean - exact_mean).abs() >= 3.0 * mc_sem.max(1e-6) {
            ok = false;
        }

        // (c) gate application matches a dense unitary assembled from the
        // pair-total blocks.
        let gate = &layers[0].gates[0];
        let i = gate.site - 1;
        let dim = basis.dim();
        let mut dense = vec![C64::new(0.0, 0.0); dim * dim];
        for (k, occ) in basis.states().enumerate() {
            let s = (occ[i] + occ[i + 1]) as usize;
            let block = two_mode_block(s, gate.theta, gate.phi);
            let j = occ[i + 1] as usize;
            let mut dst = occ.to_vec();
            for jj in 0..=s {
                dst[i] = (s - jj) as u8;
                dst[i + 1] = jj as u8;
                let row = basis.rank(&dst).unwrap();
                dense[row * dim + k] = block[(jj, j)];
            }
        }
        let mut evolved = state.clone();
        bosonic_mipt::gates::apply_beam_splitter(&mut evolved, gate).unwrap();
        let mut max_dev = 0.0f64;
        for a in 0..2 {
            for r in 0..dim {
                let mut expect = C64::new(0.0, 0.0);
                for c in 0..dim {
                    expect += dense[r * dim + c] * state.amplitude(c, a);
                }
                max_dev = max_dev.max((evolved.amplitude(r, a) - expect).norm());
            }
        }
        if max_dev >= 1e-10 {
            ok = false;
        }
        notes.push(format!(
            "L={l}: Σp = {total:.10}, MC {mc_mean:.4}±{mc_sem:.4} vs exact {exact_mean:.4}, gate dev {max_dev:.1e}"
        ));
    }
    println!(
        "[criterion 06] {} exact oracles: {}",
        if ok { "PASS" } else { "FAIL" },
        notes.join("; ")
    );
    assert!(ok, "{notes:?}");
}

#[test]
fn criterion_07_readout_math() {
    let chi = 2.0 * std::f64::consts::PI * 2.0;
    let mut ok = true;
    for n in 0..=20u32 {
        let (p_g, p_e) = ramsey_probs(
            n,
            &DispersiveParams {
                chi,
                idle_time: std::f64::consts::PI / chi,
                phase: 0.0,
            },
        );
        if p_g + p_e != 1.0 {
            ok = false;
        }
        let deterministic = if n % 2 == 0 { p_e } else { p_g };
        if deterministic < 1.0 - 1e-12 {
            ok = false;
        }
    }
    for k in 1..=8usize {
        for n in 0..(1u32 << k) {
            let (bits, _) = photon_count_bits(n, k, chi).unwrap();
            let expect: Vec<u8> = (0..k).map(|m| ((n >> m) & 1) as u8).collect();
            if bits != expect {
                ok = false;
            }
        }
    }
    println!(
        "[criterion 07] {} readout math: parity deterministic for n <= 20, bit counting exact for K <= 8",
        if ok { "PASS" } else { "FAIL" }
    );
    assert!(ok);
}

#[test]
fn criterion_08_inherited_rates() {
    let lifetime = |t1_us: f64| {
        1.0 / effective_rates(
            0.533,
            2.261,
            1.0 / 50.0,
            1.0 / 5.0,
            0.02,
            NoiseSpectrum::Pink,
            1.0 / t1_us,
        )
        .kappa
    };
    let t_short = lifetime(1500.0);
    let t_long = lifetime(10_000.0);
    let ok = (t_short - 562.0).abs() / 562.0 < 0.02 && (t_long - 824.0).abs() / 824.0 < 0.02;
    println!(
        "[criterion 08] {} inherited lifetimes: {t_short:.1} μs (target 562), {t_long:.1} μs (target 824)",
        if ok { "PASS" } else { "FAIL" }
    );
    assert!(ok);
}

#[test]
fn criterion_09_wall_time() {
    let bsfp = wall_time(
        4,
        8,
        8,
        1.0,
        &WallTimeParams {
            family: CircuitFamily::Bsfp,
            ..Default::default()
        },
    );
    let hubbard = wall_time(4, 8, 8, 1.0, &WallTimeParams::default());
    let ok = (bsfp - 104.0).abs() / 104.0 < 0.15 && (hubbard - 152.0).abs() / 152.0 < 0.15;
    println!(
        "[criterion 09] {} wall time: BSFP {bsfp:.1} μs (target 104), Hubbard {hubbard:.1} μs (target 152)",
        if ok { "PASS" } else { "FAIL" }
    );
    assert!(ok);
}

#[test]
fn criterion_10_noise_residual_entropy() {
    let mut cfg = CircuitConfig::checkerboard(4);
    cfg.scramble_layers = 8;
    cfg.monitored_layers = 8;
    cfg.meas_rate = 1.0;
    cfg.seed = 1010;
    let n_noisy = 200;
    let n_ideal = 2000;

    let noise_at = |t1_us: f64| NoiseParams {
        t1_cavity_us: t1_us,
        ..Default::default()
    };
    let run = |t1_us: f64, toggles: NoiseToggles| {
        let budget =
            noise_budget(&cfg, &noise_at(t1_us), &toggles, n_noisy, n_ideal, None).unwrap();
        (budget.residual, budget.residual_sem)
    };

    let (all_15, s_all_15) = run(1500.0, NoiseToggles::all_on());
    let (all_10, s_all_10) = run(10_000.0, NoiseToggles::all_on());
    let (dec_15, s_dec_15) = run(1500.0, NoiseToggles::decay_only());
    let (dec_10, s_dec_10) = run(10_000.0, NoiseToggles::decay_only());

    let bracket_ok = (0.1..=0.4).contains(&all_15);
    let all_sep = all_15 - all_10 > 3.0 * (s_all_15 * s_all_15 + s_all_10 * s_all_10).sqrt();
    let dec_sep = dec_15 - dec_10 > 3.0 * (s_dec_15 * s_dec_15 + s_dec_10 * s_dec_10).sqrt();
    let ok = bracket_ok && all_sep && dec_sep;
    println!(
        "[criterion 10] {} residual entropy: all-on {all_15:.3}±{s_all_15:.3} (T1=1.5ms, bracket [0.1,0.4]) \
         vs {all_10:.3}±{s_all_10:.3} (10ms); decay-only {dec_15:.3}±{s_dec_15:.3} -> {dec_10:.3}±{s_dec_10:.3}",
        if ok { "PASS" } else { "FAIL" }
    );
    assert!(
        ok,
        "bracket {bracket_ok}, all-on separation {all_sep}, decay separation {dec_sep}"
    );
}

#[test]
fn criterion_11_invariant_suite() {
    let mut ok = true;

    // Block unitarity for all pair totals up to Q = 8.
    let mut rng = ChaCha8Rng::seed_from_u64(1111);
    for s in 0..=8usize {
        let u = two_mode_block(s, rng.gen::<f64>() * 6.28, rng.gen::<f64>() * 6.28);
        let prod = u.adjoint() * &u;
        for r in 0..=s {
            for c in 0..=s {
                let expect = if r == c { 1.0 } else { 0.0 };
                if (prod[(r, c)] - C64::new(expect, 0.0)).norm() >= 1e-12 {
                    ok = false;
                }
            }
        }
    }

    // Norm and charge conservation through a random monitored run.
    let basis = Arc::new(SectorBasis::new(6, 3).unwrap());
    let (mut state, _, _) = init_haar_pair(&basis, &mut rng).unwrap();
    for t in 1..=12 {
        let layer = sample_layer(&mut rng, t, 6, GateMode::Bsrp, 2.0, true, SnapPlacement::AllModes);
        apply_layer(&mut state, &layer).unwrap();
        for site in 1..=6 {
            if rng.gen::<f64>() < 0.5 {
                sample_and_collapse(&mut state, t, site, MeasurementKind::Parity, &mut rng)
                    .unwrap();
            }
        }
        if (state.norm() - 1.0).abs() >= 1e-10 {
            ok = false;
        }
    }

    // Measurement completeness and idempotence.
    for kind in [
        MeasurementKind::Parity,
        MeasurementKind::ModN(3),
        MeasurementKind::Number,
    ] {
        let probs = outcome_distribution(&state, 2, kind).unwrap();
        if (probs.iter().sum::<f64>() - 1.0).abs() >= 1e-10 {
            ok = false;
        }
    }
    let ev = sample_and_collapse(&mut state, 99, 1, MeasurementKind::Parity, &mut rng).unwrap();
    let again = sample_and_collapse(&mut state, 99, 1, MeasurementKind::Parity, &mut rng).unwrap();
    if ev.outcome != again.outcome || (again.born_probability - 1.0).abs() >= 1e-12 {
        ok = false;
    }

    // Kraus trace preservation.
    for d in [2usize, 3, 4] {
        let ch = local_noise_channel(1.47, 1.0 / 562.0, 0.001, 0.0116, d);
        if ch.trace_preservation_defect() >= 1e-10 {
            ok = false;
        }
    }

    // Density-matrix validity after a short noisy run.
    let mut noisy_cfg = CircuitConfig::checkerboard(2);
    noisy_cfg.scramble_layers = 2;
    noisy_cfg.monitored_layers = 2;
    noisy_cfg.meas_rate = 1.0;
    noisy_cfg.seed = 11;
    let noise = NoiseParams::default();
    let out = bosonic_mipt::noise::run_noisy_trajectory(
        &noisy_cfg,
        &noise,
        &NoiseToggles::all_on(),
        3,
    )
    .unwrap();
    if out.max_trace_drift >= 1e-6 {
        ok = false;
    }
    let v = bosonic_mipt::noise::checkerboard_vector(2, 3).unwrap();
    let rho = DensityMatrix::from_vector(2, 3, &v).unwrap();
    if rho.min_eigenvalue() <= -1e-9 || rho.hermiticity_defect() >= 1e-10 {
        ok = false;
    }

    // Determinism across worker counts: identical ensemble statistics.
    let mut cfg = base_cfg(4);
    cfg.meas_rate = 0.4;
    cfg.monitored_layers = 6;
    cfg.seed = 1212;
    let one = purification_ensemble(&cfg, 48, Some(1)).unwrap();
    let many = purification_ensemble(&cfg, 48, Some(4)).unwrap();
    for (a, b) in one.ancilla.iter().zip(&many.ancilla) {
        if a.mean.to_bits() != b.mean.to_bits() || a.sem.to_bits() != b.sem.to_bits() {
            ok = false;
        }
    }

    // Checkerboard init validity matches the configuration contract.
    assert!(matches!(
        CircuitConfig {
            photons: 3,
            ..CircuitConfig::checkerboard(4)
        }
        .validate(),
        Err(_)
    ));
    let _ = InitialState::Checkerboard;

    println!(
        "[criterion 11] {} invariant suite: unitarity, norm/charge, completeness, idempotence, \
         trace preservation, density validity, worker invariance",
        if ok { "PASS" } else { "FAIL" }
    );
    assert!(ok);
}
