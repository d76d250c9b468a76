//! Mixed-state simulation of the monitored circuit with local decay, thermal
//! excitation, dephasing, and measurement misassignment.
//!
//! Operations run sequentially, as on hardware with a single coupler and
//! transmon: every beam-splitter, on-site gate, and measurement occupies a
//! wall-clock interval during which spectator modes and the reference ancilla
//! idle-decay. Extra coupler-inherited decay and dephasing act on the two
//! participants while a beam splitter is driven; transmon-induced dephasing
//! acts on the target mode during on-site gates and measurement readout; the
//! recorded measurement outcome flips with the misassignment probability.
//! On-site gate and parity durations include the 0.5 μs swap paddings that
//! move the target through the buffer, during which everything idles.
//!
//! Trajectories unravel measurements by Born sampling while decoherence is
//! applied as exact channels (hybrid density-matrix trajectories).

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::channel::{local_noise_channel, LocalOp};
use super::density::{checkerboard_vector, embed_sector_vector, noisy_measure, DensityMatrix};
use crate::basis::SectorBasis;
use crate::entropy::{mean_sem, EntropyRecord};
use crate::error::{Error, Result};
use crate::gates::{sample_layer, LayerSchedule, SnapPlacement};
use crate::hardware::{effective_rates, NoiseSpectrum};
use crate::measurement::{MeasurementEvent, MeasurementRecord};
use crate::protocols::{haar_orthogonal_pair, mix_seed, run_indexed, CircuitConfig, InitialState};
use crate::C64;

const TAU: f64 = std::f64::consts::TAU;

/// Coupler parameters inherited by the cavities during beam-splitter drive.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct CouplerParams {
    /// g/Δ per mode, cycled when shorter than the register.
    pub g_over_delta: Vec<f64>,
    pub t1_us: f64,
    pub t_phi_us: f64,
    pub n_thermal: f64,
    pub spectrum: NoiseSpectrum,
}

impl Default for CouplerParams {
    fn default() -> Self {
        Self {
            g_over_delta: vec![0.533 / 2.261, 0.592 / 2.590],
            t1_us: 50.0,
            t_phi_us: 5.0,
            n_thermal: 0.02,
            spectrum: NoiseSpectrum::Pink,
        }
    }
}

/// Transmon coherence; folded into target-mode dephasing during the
/// operations it mediates.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct TransmonParams {
    pub t1_us: f64,
    pub t_phi_us: f64,
    pub n_thermal: f64,
}

impl Default for TransmonParams {
    fn default() -> Self {
        Self {
            t1_us: 200.0,
            t_phi_us: 100.0,
            n_thermal: 0.005,
        }
    }
}

/// Operation durations in microseconds. The on-site gate and parity values
/// are totals including the two swap paddings.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct OperationDurations {
    pub t_snap_us: f64,
    pub t_parity_us: f64,
    /// Mean beam-splitter duration; a gate with angle θ takes θ/(2π) · 2τ_bs.
    pub tau_bs_us: f64,
    pub swap_us: f64,
}

impl Default for OperationDurations {
    fn default() -> Self {
        Self {
            t_snap_us: 1.32,
            t_parity_us: 1.47,
            tau_bs_us: 0.25,
            swap_us: 0.5,
        }
    }
}

#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct NoiseParams {
    pub t1_cavity_us: f64,
    pub n_bar_cavity: f64,
    pub coupler: CouplerParams,
    pub transmon: TransmonParams,
    pub epsilon_readout: f64,
    pub durations: OperationDurations,
    pub local_dim: usize,
}

impl Default for NoiseParams {
    fn default() -> Self {
        Self {
            t1_cavity_us: 1500.0,
            n_bar_cavity: 0.001,
            coupler: CouplerParams::default(),
            transmon: TransmonParams::default(),
            epsilon_readout: 0.004,
            durations: OperationDurations::default(),
            local_dim: 3,
        }
    }
}

/// Per-channel on/off switches.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct NoiseToggles {
    pub idle_decay: bool,
    pub beam_splitter: bool,
    pub snap: bool,
    pub measurement: bool,
}

impl NoiseToggles {
    pub fn all_on() -> Self {
        Self {
            idle_decay: true,
            beam_splitter: true,
            snap: true,
            measurement: true,
        }
    }

    pub fn all_off() -> Self {
        Self {
            idle_decay: false,
            beam_splitter: false,
            snap: false,
            measurement: false,
        }
    }

    pub fn decay_only() -> Self {
        Self {
            idle_decay: true,
            ..Self::all_off()
        }
    }

    /// Compact label for output tables, e.g. "decay+bs+snap+meas" or "none".
    pub fn mask_label(&self) -> String {
        let mut parts = Vec::new();
        if self.idle_decay {
            parts.push("decay");
        }
        if self.beam_splitter {
            parts.push("bs");
        }
        if self.snap {
            parts.push("snap");
        }
        if self.measurement {
            parts.push("meas");
        }
        if parts.is_empty() {
            "none".into()
        } else {
            parts.join("+")
        }
    }
}

/// One noisy trajectory: the ancilla entropy curve (t = 0 post-scramble,
/// then after each monitored layer) and the measurement record.
#[derive(Clone, Debug)]
pub struct NoisyTrajectory {
    pub ancilla_entropy: Vec<f64>,
    pub record: MeasurementRecord,
    pub max_trace_drift: f64,
    pub seed: u64,
}

/// Truncated two-mode beam-splitter unitary on the d²-dimensional pair space
/// (basis index n_a·d + n_b), exact on every untruncated pair-total block.
fn truncated_bs_unitary(d: usize, theta: f64, phi: f64) -> LocalOp {
    let dim = d * d;
    let mut h = nalgebra::DMatrix::<f64>::zeros(dim, dim);
    for na in 0..d - 1 {
        for nb in 1..d {
            let src = na * d + nb;
            let dst = (na + 1) * d + (nb - 1);
            let amp = (((na + 1) * nb) as f64).sqrt();
            h[(dst, src)] += amp;
            h[(src, dst)] += amp;
        }
    }
    h *= theta;
    let (eigenvalues, eigenvectors) = crate::linalg::sym_eigen(&h);
    let mut u = nalgebra::DMatrix::<C64>::zeros(dim, dim);
    for (k, lam) in eigenvalues.iter().enumerate() {
        let phase = C64::from_polar(1.0, *lam);
        for r in 0..dim {
            let vr = eigenvectors[(r, k)];
            if vr == 0.0 {
                continue;
            }
            for c in 0..dim {
                u[(r, c)] += phase * vr * eigenvectors[(c, k)];
            }
        }
    }
    if phi != 0.0 {
        for r in 0..dim {
            for c in 0..dim {
                let db = (c % d) as f64 - (r % d) as f64;
                u[(r, c)] *= C64::from_polar(1.0, phi * db);
            }
        }
    }
    LocalOp::from_complex(&u)
}

fn snap_unitary(d: usize, strength: f64) -> LocalOp {
    let diag: Vec<C64> = (0..d)
        .map(|n| C64::from_polar(1.0, -strength * (n * n) as f64))
        .collect();
    LocalOp::diagonal(&diag)
}

struct NoisyRunner<'a> {
    cfg: &'a CircuitConfig,
    noise: &'a NoiseParams,
    rho: DensityMatrix,
    /// Idle decay rate (0 when the decay toggle is off).
    kappa_idle: f64,
    n_bar: f64,
    /// Per-mode coupler-inherited extra decay and dephasing during BS drive.
    bs_extra: Vec<(f64, f64)>,
    /// Transmon-induced dephasing rate on on-site gate targets.
    gamma_snap: f64,
    /// Transmon-induced dephasing rate during measurement readout.
    gamma_meas: f64,
    epsilon: f64,
}

impl<'a> NoisyRunner<'a> {
    /// Idle decay (and optional dephasing) on one mode for a duration.
    fn idle_mode(&mut self, site: usize, tau: f64, kappa_extra: f64, gamma: f64) -> Result<()> {
        let kappa = self.kappa_idle + kappa_extra;
        if tau <= 0.0 || (kappa == 0.0 && gamma == 0.0) {
            return Ok(());
        }
        let ch = local_noise_channel(tau, kappa, self.n_bar, gamma, self.noise.local_dim);
        let axis = self.rho.mode_axis(site)?;
        self.rho.apply_channel(&ch, axis);
        Ok(())
    }

    fn idle_ancilla(&mut self, tau: f64) {
        if tau <= 0.0 || self.kappa_idle == 0.0 {
            return;
        }
        let ch = local_noise_channel(tau, self.kappa_idle, self.n_bar, 0.0, 2);
        let axis = self.rho.ancilla_axis();
        self.rho.apply_channel(&ch, axis);
    }

    /// Idle everything except the listed sites for a duration.
    fn idle_spectators(&mut self, busy: &[usize], tau: f64) -> Result<()> {
        for site in 1..=self.cfg.modes {
            if !busy.contains(&site) {
                self.idle_mode(site, tau, 0.0, 0.0)?;
            }
        }
        self.idle_ancilla(tau);
        Ok(())
    }

    fn apply_layer(&mut self, layer: &LayerSchedule, toggles: &NoiseToggles) -> Result<()> {
        let dur = &self.noise.durations;
        for gate in &layer.gates {
            let tau = gate.theta / TAU * 2.0 * dur.tau_bs_us;
            let axis = self.rho.pair_axis(gate.site)?;
            let u = truncated_bs_unitary(self.noise.local_dim, gate.theta, gate.phi);
            self.rho.apply_unitary(&u, axis);
            for site in [gate.site, gate.site + 1] {
                let (kex, gamma) = if toggles.beam_splitter {
                    self.bs_extra[site - 1]
                } else {
                    (0.0, 0.0)
                };
                self.idle_mode(site, tau, kex, gamma)?;
            }
            self.idle_spectators(&[gate.site, gate.site + 1], tau)?;
        }
        for snap in &layer.snaps {
            // Swap to the buffer, run the gate, swap back; spectators and
            // the ancilla idle for the whole operation.
            let pad = dur.swap_us;
            let core = (dur.t_snap_us - 2.0 * pad).max(0.0);
            self.idle_spectators(&[snap.site], dur.t_snap_us)?;
            self.idle_mode(snap.site, pad, 0.0, 0.0)?;
            let axis = self.rho.mode_axis(snap.site)?;
            self.rho
                .apply_unitary(&snap_unitary(self.noise.local_dim, snap.strength), axis);
            let gamma = if toggles.snap { self.gamma_snap } else { 0.0 };
            self.idle_mode(snap.site, core, 0.0, gamma)?;
            self.idle_mode(snap.site, pad, 0.0, 0.0)?;
        }
        Ok(())
    }

    fn measure_site<R: Rng>(
        &mut self,
        layer: usize,
        site: usize,
        toggles: &NoiseToggles,
        rng: &mut R,
    ) -> Result<MeasurementEvent> {
        let dur = &self.noise.durations;
        let pad = dur.swap_us;
        let core = (dur.t_parity_us - 2.0 * pad).max(0.0);
        self.idle_spectators(&[site], dur.t_parity_us)?;
        self.idle_mode(site, pad, 0.0, 0.0)?;
        let gamma = if toggles.measurement {
            self.gamma_meas
        } else {
            0.0
        };
        self.idle_mode(site, core, 0.0, gamma)?;
        let epsilon = if toggles.measurement { self.epsilon } else { 0.0 };
        let (outcome, weight, _flipped) =
            noisy_measure(&mut self.rho, site, self.cfg.measurement, epsilon, rng)?;
        self.idle_mode(site, pad, 0.0, 0.0)?;
        Ok(MeasurementEvent {
            layer,
            site,
            kind: self.cfg.measurement,
            outcome,
            born_probability: weight,
        })
    }
}

/// Runs one noisy trajectory from a derived seed, following the sequential
/// hardware schedule.
pub fn run_noisy_trajectory(
    cfg: &CircuitConfig,
    noise: &NoiseParams,
    toggles: &NoiseToggles,
    seed: u64,
) -> Result<NoisyTrajectory> {
    cfg.validate()?;
    if noise.local_dim < 2 {
        return Err(Error::InvalidConfig("local_dim must be >= 2".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let vector = match cfg.init {
        InitialState::Checkerboard => checkerboard_vector(cfg.modes, noise.local_dim)?,
        InitialState::HaarPair => {
            if (cfg.photons as usize) >= noise.local_dim {
                return Err(Error::InvalidConfig(format!(
                    "haar_pair init needs local_dim > Q, got {} <= {}",
                    noise.local_dim, cfg.photons
                )));
            }
            let basis = Arc::new(SectorBasis::new(cfg.modes, cfg.photons)?);
            let (psi0, psi1) = haar_orthogonal_pair(&basis, &mut rng)?;
            let mut v0 = embed_sector_vector(&basis, &psi0, 0, noise.local_dim)?;
            let v1 = embed_sector_vector(&basis, &psi1, 1, noise.local_dim)?;
            let w = std::f64::consts::FRAC_1_SQRT_2;
            for (a, b) in v0.iter_mut().zip(v1) {
                *a = (*a + b) * w;
            }
            v0
        }
    };
    let rho = DensityMatrix::from_vector(cfg.modes, noise.local_dim, &vector)?;

    let bs_extra: Vec<(f64, f64)> = (0..cfg.modes)
        .map(|m| {
            let ratio = noise.coupler.g_over_delta[m % noise.coupler.g_over_delta.len()];
            let rates = effective_rates(
                ratio,
                1.0,
                1.0 / noise.coupler.t1_us,
                1.0 / noise.coupler.t_phi_us,
                noise.coupler.n_thermal,
                noise.coupler.spectrum,
                0.0,
            );
            (rates.kappa, rates.gamma)
        })
        .collect();
    let gamma_transmon = 0.5 / noise.transmon.t1_us + 1.0 / noise.transmon.t_phi_us;

    let mut runner = NoisyRunner {
        cfg,
        noise,
        rho,
        kappa_idle: if toggles.idle_decay {
            1.0 / noise.t1_cavity_us
        } else {
            0.0
        },
        n_bar: noise.n_bar_cavity,
        bs_extra,
        gamma_snap: gamma_transmon,
        gamma_meas: gamma_transmon,
        epsilon: noise.epsilon_readout,
    };

    let mut max_drift = 0.0f64;
    let mut check = |rho: &mut DensityMatrix| -> Result<()> {
        rho.hermitize();
        let drift = (rho.trace().re - 1.0).abs();
        max_drift = max_drift.max(drift);
        if drift > 1e-6 {
            return Err(Error::TraceDrift {
                trace: rho.trace().re,
                tol: 1e-6,
            });
        }
        Ok(())
    };

    // The hardware schedule always runs on-site gates on every mode.
    let sampled_layer = |rng: &mut ChaCha8Rng, t: usize| -> LayerSchedule {
        let scrambling = t <= cfg.scramble_layers;
        let (u, with_snap) = if scrambling {
            (cfg.scramble_u, cfg.scramble_with_snap)
        } else {
            (cfg.hubbard_u, cfg.with_snap)
        };
        sample_layer(
            rng,
            t,
            cfg.modes,
            cfg.gate_mode,
            u,
            with_snap,
            SnapPlacement::AllModes,
        )
    };

    for t in 1..=cfg.scramble_layers {
        let layer = sampled_layer(&mut rng, t);
        runner.apply_layer(&layer, toggles)?;
        check(&mut runner.rho)?;
    }

    let mut entropies = Vec::with_capacity(cfg.monitored_layers + 1);
    let mut record = MeasurementRecord::default();
    entropies.push(runner.rho.ancilla_entropy(cfg.entropy_base));

    for t in 1..=cfg.monitored_layers {
        let layer = sampled_layer(&mut rng, cfg.scramble_layers + t);
        runner.apply_layer(&layer, toggles)?;
        for site in 1..=cfg.modes {
            if rng.gen::<f64>() < cfg.meas_rate {
                let event = runner.measure_site(t, site, toggles, &mut rng)?;
                record.events.push(event);
            }
        }
        check(&mut runner.rho)?;
        entropies.push(runner.rho.ancilla_entropy(cfg.entropy_base));
    }

    Ok(NoisyTrajectory {
        ancilla_entropy: entropies,
        record,
        max_trace_drift: max_drift,
        seed,
    })
}

/// Ensemble-averaged noisy entropy curve (one record per t = 0..=M).
pub fn noisy_ensemble(
    cfg: &CircuitConfig,
    noise: &NoiseParams,
    toggles: &NoiseToggles,
    n: usize,
    workers: Option<usize>,
) -> Result<Vec<EntropyRecord>> {
    if n == 0 {
        return Err(Error::InvalidConfig("n_realizations must be >= 1".into()));
    }
    let results = run_indexed(n, workers, |k| {
        run_noisy_trajectory(cfg, noise, toggles, mix_seed(cfg.seed, k as u64))
    })?;
    let records = (0..=cfg.monitored_layers)
        .map(|t| {
            let samples: Vec<f64> = results.iter().map(|r| r.ancilla_entropy[t]).collect();
            let (mean, sem) = mean_sem(&samples);
            EntropyRecord {
                l: cfg.modes,
                q: cfg.photons,
                p: cfg.meas_rate,
                t,
                mean,
                sem,
                n_realizations: n,
                base: cfg.entropy_base,
            }
        })
        .collect();
    Ok(records)
}

/// Noisy curve, matched ideal (pure-state) curve, and the residual entropy:
/// the excess of the noisy over the ideal mean at the final monitored layer.
#[derive(Clone, Debug)]
pub struct NoiseBudget {
    pub noisy: Vec<EntropyRecord>,
    pub ideal: Vec<EntropyRecord>,
    pub residual: f64,
    pub residual_sem: f64,
    pub channel_mask: String,
}

pub fn noise_budget(
    cfg: &CircuitConfig,
    noise: &NoiseParams,
    toggles: &NoiseToggles,
    n_noisy: usize,
    n_ideal: usize,
    workers: Option<usize>,
) -> Result<NoiseBudget> {
    // The ideal reference follows the same schedule: on-site gates attach to
    // every mode, as in the hardware procedure.
    let mut ideal_cfg = cfg.clone();
    ideal_cfg.snap_placement = SnapPlacement::AllModes;
    let ideal = crate::protocols::purification_ensemble(&ideal_cfg, n_ideal, workers)?;
    let noisy = noisy_ensemble(cfg, noise, toggles, n_noisy, workers)?;
    let tf = cfg.monitored_layers;
    let residual = noisy[tf].mean - ideal.ancilla[tf].mean;
    let residual_sem = (noisy[tf].sem.powi(2) + ideal.ancilla[tf].sem.powi(2)).sqrt();
    Ok(NoiseBudget {
        noisy,
        ideal: ideal.ancilla,
        residual,
        residual_sem,
        channel_mask: toggles.mask_label(),
    })
}
