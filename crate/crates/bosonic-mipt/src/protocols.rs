//! Full experiment drivers: initial-state preparation, scrambling, monitored
//! evolution with entropy tracking (ancilla purification), the learnability
//! decoder trial, and deterministic parallel ensembles.
//!
//! A run applies `scramble_layers` brickwork layers without measurements,
//! then `monitored_layers` layers each followed by independent per-site
//! measurements with probability `meas_rate`. The brick parity alternates
//! continuously across the scramble/monitored boundary, starting from
//! (1,2),(3,4),... on the first layer. The ancilla entropy is recorded after
//! every monitored layer (plus the post-scramble t=0 value); the bipartite
//! entropy, when enabled, is recorded after each monitored layer's gates but
//! before its measurements.
//!
//! Ensembles derive the seed of trajectory `k` as `mix_seed(seed, k)`
//! (a splitmix64 finalizer over `seed + (k+1)*2^64/φ`), and aggregate
//! per-trajectory results in index order, so output is bit-identical for any
//! worker count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use std::sync::Arc;

use crate::basis::SectorBasis;
use crate::entropy::{
    ancilla_entropy, bipartite_entropy_with, mean_sem, EntropyBase, EntropyRecord,
};
use crate::error::{Error, Result};
use crate::gates::{apply_layer, sample_layer, GateMode, LayerSchedule, SnapPlacement};
use crate::measurement::{
    force_and_collapse, sample_and_collapse, MeasurementKind, MeasurementRecord,
};
use crate::state::PureState;
use crate::C64;

/// How the register is initialized.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialState {
    /// Two orthonormal Haar-random sector states entangled with the ancilla.
    HaarPair,
    /// (|0101...⟩|0⟩ + |1010...⟩|1⟩)/√2; requires even L and Q = L/2.
    Checkerboard,
}

/// Bipartite-entropy recording options for purification runs.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct BipartiteOptions {
    /// Cut after this many modes (defaults to L/2 at config build time).
    pub cut: usize,
    pub base: EntropyBase,
    /// Group the ancilla with subsystem A instead of the traced complement.
    pub ancilla_with_a: bool,
}

/// The full definition of one monitored-circuit experiment.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct CircuitConfig {
    pub modes: usize,
    pub photons: u8,
    /// Per-site measurement probability per monitored layer.
    pub meas_rate: f64,
    /// Hubbard strength of the on-site gates in monitored layers.
    pub hubbard_u: f64,
    pub gate_mode: GateMode,
    /// Whether monitored layers include on-site gates.
    pub with_snap: bool,
    pub snap_placement: SnapPlacement,
    pub scramble_layers: usize,
    pub monitored_layers: usize,
    /// Hubbard strength during scrambling layers.
    pub scramble_u: f64,
    /// Whether scrambling layers include on-site gates.
    pub scramble_with_snap: bool,
    pub measurement: MeasurementKind,
    pub init: InitialState,
    pub seed: u64,
    pub entropy_base: EntropyBase,
    pub bipartite: Option<BipartiteOptions>,
}

impl CircuitConfig {
    /// Haar-pair experiment: no scrambling, depth 4L, half filling.
    ///
    /// On-site gates default to every mode each layer (the hardware schedule).
    /// Attaching them only to brick participants leaves the boundary modes
    /// unsnapped on alternating layers, which measurably weakens the
    /// purifying phase.
    pub fn haar(modes: usize) -> Self {
        Self {
            modes,
            photons: (modes / 2) as u8,
            meas_rate: 0.0,
            hubbard_u: 2.0,
            gate_mode: GateMode::Bsfp,
            with_snap: true,
            snap_placement: SnapPlacement::AllModes,
            scramble_layers: 0,
            monitored_layers: 4 * modes,
            scramble_u: 2.0,
            scramble_with_snap: true,
            measurement: MeasurementKind::Parity,
            init: InitialState::HaarPair,
            seed: 0,
            entropy_base: EntropyBase::Two,
            bipartite: None,
        }
    }

    /// Checkerboard experiment: 2L scrambling layers, 2L monitored layers.
    pub fn checkerboard(modes: usize) -> Self {
        Self {
            scramble_layers: 2 * modes,
            monitored_layers: 2 * modes,
            init: InitialState::Checkerboard,
            ..Self::haar(modes)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.modes < 1 {
            return Err(Error::InvalidConfig("modes must be >= 1".into()));
        }
        if !(0.0..=1.0).contains(&self.meas_rate) {
            return Err(Error::InvalidConfig(format!(
                "measurement rate must be in [0, 1], got {}",
                self.meas_rate
            )));
        }
        self.measurement.validate()?;
        if self.init == InitialState::Checkerboard
            && (self.modes % 2 != 0 || self.photons as usize != self.modes / 2)
        {
            return Err(Error::InvalidConfig(format!(
                "checkerboard init requires even L and Q = L/2, got L={} Q={}",
                self.modes, self.photons
            )));
        }
        if let Some(b) = &self.bipartite {
            if b.cut < 1 || b.cut >= self.modes {
                return Err(Error::CutOutOfRange {
                    cut: b.cut,
                    max: self.modes - 1,
                });
            }
        }
        Ok(())
    }
}

/// Result of one purification trajectory. `ancilla_entropy[t]` is recorded
/// after monitored layer `t`, with `t = 0` the post-scramble value.
#[derive(Clone, Debug)]
pub struct TrajectoryResult {
    pub ancilla_entropy: Vec<f64>,
    pub bipartite_entropy: Option<Vec<f64>>,
    pub record: MeasurementRecord,
    pub seed: u64,
}

/// Decoder prediction for one learnability trial.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Prediction {
    Zero,
    One,
    Tie,
}

/// One learnability trial: the sampled record and the decoder's replayed
/// log-probabilities from both candidate initial states.
#[derive(Clone, Debug)]
pub struct LearnabilityTrial {
    pub alpha_true: u8,
    pub record: MeasurementRecord,
    pub log_p0: f64,
    pub log_p1: f64,
    pub prediction: Prediction,
    pub credit: f64,
    pub seed: u64,
}

/// Draws a Haar-random sector state as normalized complex Gaussians.
fn haar_vector<R: Rng>(dim: usize, rng: &mut R) -> Vec<C64> {
    let mut v: Vec<C64> = (0..dim)
        .map(|_| {
            C64::new(
                rng.sample::<f64, _>(StandardNormal),
                rng.sample::<f64, _>(StandardNormal),
            )
        })
        .collect();
    let norm = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    for a in &mut v {
        *a /= norm;
    }
    v
}

fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Two orthonormal Haar-random sector states. The second is Gram-Schmidt
/// orthogonalized against the first.
pub fn haar_orthogonal_pair<R: Rng>(
    basis: &Arc<SectorBasis>,
    rng: &mut R,
) -> Result<(Vec<C64>, Vec<C64>)> {
    let dim = basis.dim();
    if dim < 2 {
        return Err(Error::InvalidConfig(
            "orthogonal pair needs sector dimension >= 2".into(),
        ));
    }
    let psi0 = haar_vector(dim, rng);
    let mut psi1 = haar_vector(dim, rng);
    let overlap = inner(&psi0, &psi1);
    for (b, a) in psi1.iter_mut().zip(&psi0) {
        *b -= overlap * a;
    }
    let norm = psi1.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    for b in &mut psi1 {
        *b /= norm;
    }
    Ok((psi0, psi1))
}

/// Global state (|ψ0⟩|0⟩_R + |ψ1⟩|1⟩_R)/√2 over Haar-random orthogonal
/// branches. Also returns the branch vectors.
pub fn init_haar_pair<R: Rng>(
    basis: &Arc<SectorBasis>,
    rng: &mut R,
) -> Result<(PureState, Vec<C64>, Vec<C64>)> {
    let (psi0, psi1) = haar_orthogonal_pair(basis, rng)?;
    let mut state = PureState::zeroed(basis.clone(), 2);
    let w = std::f64::consts::FRAC_1_SQRT_2;
    {
        let amps = state.amplitudes_mut();
        for k in 0..basis.dim() {
            amps[2 * k] = psi0[k] * w;
            amps[2 * k + 1] = psi1[k] * w;
        }
    }
    Ok((state, psi0, psi1))
}

/// (|0101...⟩|0⟩ + |1010...⟩|1⟩)/√2.
pub fn init_checkerboard(basis: &Arc<SectorBasis>) -> Result<PureState> {
    let l = basis.modes();
    if l % 2 != 0 || basis.photons() as usize != l / 2 {
        return Err(Error::InvalidConfig(format!(
            "checkerboard init requires even L and Q = L/2, got L={l} Q={}",
            basis.photons()
        )));
    }
    let even_zeros: Vec<u8> = (0..l).map(|i| (i % 2) as u8).collect(); // 0101...
    let odd_zeros: Vec<u8> = (0..l).map(|i| ((i + 1) % 2) as u8).collect(); // 1010...
    let mut state = PureState::zeroed(basis.clone(), 2);
    let w = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let k0 = basis.rank(&even_zeros)?;
    let k1 = basis.rank(&odd_zeros)?;
    {
        let amps = state.amplitudes_mut();
        amps[2 * k0] = w;
        amps[2 * k1 + 1] = w;
    }
    Ok(state)
}

fn layer_for(cfg: &CircuitConfig, rng: &mut ChaCha8Rng, global_layer: usize) -> LayerSchedule {
    let scrambling = global_layer <= cfg.scramble_layers;
    let (u, with_snap) = if scrambling {
        (cfg.scramble_u, cfg.scramble_with_snap)
    } else {
        (cfg.hubbard_u, cfg.with_snap)
    };
    sample_layer(
        rng,
        global_layer,
        cfg.modes,
        cfg.gate_mode,
        u,
        with_snap,
        cfg.snap_placement,
    )
}

/// Runs one purification trajectory from a derived seed.
pub fn run_purification(cfg: &CircuitConfig, seed: u64) -> Result<TrajectoryResult> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let basis = Arc::new(SectorBasis::new(cfg.modes, cfg.photons)?);
    let mut state = match cfg.init {
        InitialState::HaarPair => init_haar_pair(&basis, &mut rng)?.0,
        InitialState::Checkerboard => init_checkerboard(&basis)?,
    };

    for t in 1..=cfg.scramble_layers {
        let layer = layer_for(cfg, &mut rng, t);
        apply_layer(&mut state, &layer)?;
    }

    let mut ancilla = Vec::with_capacity(cfg.monitored_layers + 1);
    let mut bipartite = cfg.bipartite.map(|_| Vec::with_capacity(cfg.monitored_layers));
    let mut record = MeasurementRecord::default();
    ancilla.push(ancilla_entropy(&state, cfg.entropy_base));

    for t in 1..=cfg.monitored_layers {
        let layer = layer_for(cfg, &mut rng, cfg.scramble_layers + t);
        apply_layer(&mut state, &layer)?;
        if let (Some(series), Some(opts)) = (bipartite.as_mut(), cfg.bipartite.as_ref()) {
            series.push(bipartite_entropy_with(
                &state,
                opts.cut,
                opts.base,
                opts.ancilla_with_a,
            )?);
        }
        for site in 1..=cfg.modes {
            if rng.gen::<f64>() < cfg.meas_rate {
                let event = sample_and_collapse(&mut state, t, site, cfg.measurement, &mut rng)?;
                record.events.push(event);
            }
        }
        ancilla.push(ancilla_entropy(&state, cfg.entropy_base));
    }

    Ok(TrajectoryResult {
        ancilla_entropy: ancilla,
        bipartite_entropy: bipartite,
        record,
        seed,
    })
}

/// Runs one learnability trial from a derived seed: samples a record from a
/// random branch, then replays it from both branches and compares Born
/// probabilities in the log domain.
pub fn run_learnability(cfg: &CircuitConfig, seed: u64) -> Result<LearnabilityTrial> {
    cfg.validate()?;
    if cfg.init != InitialState::HaarPair {
        return Err(Error::InvalidConfig(
            "learnability trials require haar_pair initial states".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let basis = Arc::new(SectorBasis::new(cfg.modes, cfg.photons)?);
    let (psi0, psi1) = haar_orthogonal_pair(&basis, &mut rng)?;
    let alpha: u8 = rng.gen_range(0..2);

    let total_layers = cfg.scramble_layers + cfg.monitored_layers;
    let layers: Vec<LayerSchedule> = (1..=total_layers)
        .map(|t| layer_for(cfg, &mut rng, t))
        .collect();

    // Sample the record from the true branch (system-only, no ancilla).
    let chosen = if alpha == 0 { &psi0 } else { &psi1 };
    let mut state = PureState::from_amplitudes(basis.clone(), 1, chosen.clone())?;
    let mut record = MeasurementRecord::default();
    for (idx, layer) in layers.iter().enumerate() {
        apply_layer(&mut state, layer)?;
        let monitored_t = (idx + 1).checked_sub(cfg.scramble_layers);
        if let Some(t) = monitored_t.filter(|&t| t >= 1) {
            for site in 1..=cfg.modes {
                if rng.gen::<f64>() < cfg.meas_rate {
                    let event =
                        sample_and_collapse(&mut state, t, site, cfg.measurement, &mut rng)?;
                    record.events.push(event);
                }
            }
        }
    }

    // Decode: replay the identical gates from each candidate, forcing the
    // recorded outcomes.
    let mut log_p = [0.0f64; 2];
    for (which, psi) in [(0usize, &psi0), (1usize, &psi1)] {
        let mut replay = PureState::from_amplitudes(basis.clone(), 1, (*psi).clone())?;
        let mut events = record.events.iter().peekable();
        let mut lp = 0.0f64;
        'layers: for (idx, layer) in layers.iter().enumerate() {
            apply_layer(&mut replay, layer)?;
            let monitored_t = match (idx + 1).checked_sub(cfg.scramble_layers) {
                Some(t) if t >= 1 => t,
                _ => continue,
            };
            while events.peek().is_some_and(|e| e.layer == monitored_t) {
                let e = events.next().unwrap();
                match force_and_collapse(&mut replay, e.site, e.kind, e.outcome) {
                    Ok(p) => lp += p.ln(),
                    Err(Error::ZeroProbability { .. }) => {
                        lp = f64::NEG_INFINITY;
                        break 'layers;
                    }
                    Err(other) => return Err(other),
                }
            }
        }
        log_p[which] = lp;
    }

    let (log_p0, log_p1) = (log_p[0], log_p[1]);
    let prediction = if log_p0.is_infinite() && log_p1.is_infinite() {
        Prediction::Tie
    } else if (log_p0 - log_p1).abs() < 1e-12 {
        Prediction::Tie
    } else if log_p0 > log_p1 {
        Prediction::Zero
    } else {
        Prediction::One
    };
    let credit = match (prediction, alpha) {
        (Prediction::Tie, _) => 0.5,
        (Prediction::Zero, 0) | (Prediction::One, 1) => 1.0,
        _ => 0.0,
    };

    Ok(LearnabilityTrial {
        alpha_true: alpha,
        record,
        log_p0,
        log_p1,
        prediction,
        credit,
        seed,
    })
}

/// Derives the seed of ensemble member `k` from the base seed
/// (splitmix64 finalizer of `base + (k+1)·0x9E3779B97F4A7C15`).
pub fn mix_seed(base: u64, k: u64) -> u64 {
    let mut z = base.wrapping_add(k.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Maps trajectory indices to results on the given worker count (rayon's
/// default pool when `None`), preserving index order.
pub fn run_indexed<T, F>(n: usize, workers: Option<usize>, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync,
{
    use rayon::prelude::*;
    let body = || (0..n).into_par_iter().map(|k| f(k)).collect::<Result<Vec<T>>>();
    match workers {
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w.max(1))
            .build()
            .map_err(|e| Error::InvalidConfig(format!("worker pool: {e}")))?
            .install(body),
        None => body(),
    }
}

/// Ensemble-averaged purification statistics.
#[derive(Clone, Debug)]
pub struct EnsembleStats {
    /// One record per monitored time 0..=M.
    pub ancilla: Vec<EntropyRecord>,
    /// One record per monitored time 1..=M when bipartite tracking is on.
    pub bipartite: Option<Vec<EntropyRecord>>,
    pub n_realizations: usize,
    /// Mean number of measurement events per trajectory.
    pub mean_events: f64,
}

/// Runs `n` purification trajectories and averages the entropy curves.
pub fn purification_ensemble(
    cfg: &CircuitConfig,
    n: usize,
    workers: Option<usize>,
) -> Result<EnsembleStats> {
    let (stats, _) = purification_ensemble_collect(cfg, n, workers, false)?;
    Ok(stats)
}

/// As [`purification_ensemble`], optionally retaining every trajectory's
/// measurement record.
pub fn purification_ensemble_collect(
    cfg: &CircuitConfig,
    n: usize,
    workers: Option<usize>,
    keep_records: bool,
) -> Result<(EnsembleStats, Option<Vec<MeasurementRecord>>)> {
    cfg.validate()?;
    if n == 0 {
        return Err(Error::InvalidConfig("n_realizations must be >= 1".into()));
    }
    let results = run_indexed(n, workers, |k| run_purification(cfg, mix_seed(cfg.seed, k as u64)))?;

    let m = cfg.monitored_layers;
    let column = |t: usize| -> Vec<f64> {
        results.iter().map(|r| r.ancilla_entropy[t]).collect()
    };
    let ancilla = (0..=m)
        .map(|t| {
            let (mean, sem) = mean_sem(&column(t));
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
    let bipartite = cfg.bipartite.map(|opts| {
        (1..=m)
            .map(|t| {
                let samples: Vec<f64> = results
                    .iter()
                    .map(|r| r.bipartite_entropy.as_ref().unwrap()[t - 1])
                    .collect();
                let (mean, sem) = mean_sem(&samples);
                EntropyRecord {
                    l: cfg.modes,
                    q: cfg.photons,
                    p: cfg.meas_rate,
                    t,
                    mean,
                    sem,
                    n_realizations: n,
                    base: opts.base,
                }
            })
            .collect()
    });
    let mean_events =
        results.iter().map(|r| r.record.len() as f64).sum::<f64>() / n as f64;
    let records = keep_records.then(|| results.into_iter().map(|r| r.record).collect());
    Ok((
        EnsembleStats {
            ancilla,
            bipartite,
            n_realizations: n,
            mean_events,
        },
        records,
    ))
}

/// Decoder accuracy at one measurement rate.
#[derive(Clone, Debug, PartialEq)]
pub struct AccuracyPoint {
    pub p: f64,
    pub accuracy: f64,
    pub sem: f64,
    pub n_trials: usize,
}

/// Runs `n` learnability trials and averages the binary success credit.
pub fn learnability_ensemble(
    cfg: &CircuitConfig,
    n: usize,
    workers: Option<usize>,
) -> Result<(AccuracyPoint, Vec<LearnabilityTrial>)> {
    cfg.validate()?;
    if n == 0 {
        return Err(Error::InvalidConfig("n_trials must be >= 1".into()));
    }
    let trials = run_indexed(n, workers, |k| run_learnability(cfg, mix_seed(cfg.seed, k as u64)))?;
    let credits: Vec<f64> = trials.iter().map(|t| t.credit).collect();
    let (accuracy, sem) = mean_sem(&credits);
    Ok((
        AccuracyPoint {
            p: cfg.meas_rate,
            accuracy,
            sem,
            n_trials: n,
        },
        trials,
    ))
}
