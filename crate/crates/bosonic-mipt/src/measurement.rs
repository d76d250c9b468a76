//! Projective mid-circuit measurements with Born sampling, forced-outcome
//! replay, and record bookkeeping.
//!
//! A measurement of kind `mod_n` projects one mode onto the subspace with
//! occupation ≡ outcome (mod n); parity is `mod_2` (outcome 0 = even, 1 =
//! odd) and `number` resolves the occupation completely. Forcing replays a
//! recorded outcome and returns its Born probability, so chaining forces over
//! a record and multiplying yields the record probability from any initial
//! state.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::state::PureState;

/// Smallest Born weight accepted when forcing an outcome; below this the
/// record is treated as impossible from the given initial state.
pub const FORCE_PROBABILITY_FLOOR: f64 = 1e-14;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeasurementKind {
    Parity,
    #[serde(rename = "mod_n")]
    ModN(u32),
    Number,
}

impl MeasurementKind {
    pub fn validate(&self) -> Result<()> {
        if let MeasurementKind::ModN(n) = self {
            if *n < 2 {
                return Err(Error::InvalidConfig(format!(
                    "mod_n measurement requires n >= 2, got {n}"
                )));
            }
        }
        Ok(())
    }

    /// Number of possible outcomes for a mode that can hold up to `q` photons.
    pub fn outcome_count(&self, q: u8) -> usize {
        match self {
            MeasurementKind::Parity => 2,
            MeasurementKind::ModN(n) => *n as usize,
            MeasurementKind::Number => q as usize + 1,
        }
    }

    /// Outcome label assigned to a mode occupation.
    #[inline]
    pub fn outcome_of(&self, occupation: u8) -> u32 {
        match self {
            MeasurementKind::Parity => occupation as u32 % 2,
            MeasurementKind::ModN(n) => occupation as u32 % n,
            MeasurementKind::Number => occupation as u32,
        }
    }
}

impl std::fmt::Display for MeasurementKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            MeasurementKind::Parity => write!(f, "parity"),
            MeasurementKind::ModN(n) => write!(f, "mod_{n}"),
            MeasurementKind::Number => write!(f, "number"),
        }
    }
}

/// One recorded measurement. `layer` counts monitored brick layers (1-based).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasurementEvent {
    pub layer: usize,
    pub site: usize,
    pub kind: MeasurementKind,
    pub outcome: u32,
    pub born_probability: f64,
}

/// Ordered list of measurement events along one trajectory.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MeasurementRecord {
    pub events: Vec<MeasurementEvent>,
}

impl MeasurementRecord {
    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// Trajectory probability `p_m`, the product of event probabilities.
    pub fn probability(&self) -> f64 {
        self.events.iter().map(|e| e.born_probability).product()
    }

    pub fn log_probability(&self) -> f64 {
        self.events.iter().map(|e| e.born_probability.ln()).sum()
    }
}

/// Born distribution over outcomes of measuring `kind` on `site`.
pub fn outcome_distribution(
    state: &PureState,
    site: usize,
    kind: MeasurementKind,
) -> Result<Vec<f64>> {
    let basis = state.basis();
    let l = basis.modes();
    if site < 1 || site > l {
        return Err(Error::SiteOutOfRange { site, modes: l });
    }
    let anc = state.ancilla_levels();
    let mut probs = vec![0.0; kind.outcome_count(basis.photons())];
    let amps = state.amplitudes();
    for (k, occ) in basis.states().enumerate() {
        let o = kind.outcome_of(occ[site - 1]) as usize;
        for a in 0..anc {
            probs[o] += amps[k * anc + a].norm_sqr();
        }
    }
    Ok(probs)
}

/// Zeroes all amplitudes outside the outcome subspace and returns the weight
/// that was inside, without renormalizing.
fn project(state: &mut PureState, site: usize, kind: MeasurementKind, outcome: u32) -> f64 {
    let basis = state.basis().clone();
    let anc = state.ancilla_levels();
    let amps = state.amplitudes_mut();
    let mut weight = 0.0;
    for (k, occ) in basis.states().enumerate() {
        if kind.outcome_of(occ[site - 1]) == outcome {
            for a in 0..anc {
                weight += amps[k * anc + a].norm_sqr();
            }
        } else {
            for a in 0..anc {
                amps[k * anc + a] = crate::C64::new(0.0, 0.0);
            }
        }
    }
    weight
}

/// Samples an outcome by the Born rule, collapses and renormalizes the state,
/// and returns the event. Zero-probability outcomes are never selected.
pub fn sample_and_collapse<R: Rng>(
    state: &mut PureState,
    layer: usize,
    site: usize,
    kind: MeasurementKind,
    rng: &mut R,
) -> Result<MeasurementEvent> {
    let probs = outcome_distribution(state, site, kind)?;
    let draw = rng.gen::<f64>();
    let mut cum = 0.0;
    let mut outcome = None;
    for (o, &p) in probs.iter().enumerate() {
        if p <= 0.0 {
            continue;
        }
        cum += p;
        if draw < cum {
            outcome = Some(o as u32);
            break;
        }
    }
    // Float roundoff can leave cum slightly below 1; fall back to the last
    // outcome with nonzero weight.
    let outcome = outcome.unwrap_or_else(|| {
        probs
            .iter()
            .enumerate()
            .rev()
            .find(|(_, &p)| p > 0.0)
            .map(|(o, _)| o as u32)
            .expect("a normalized state has at least one outcome")
    });

    let weight = project(state, site, kind, outcome);
    state.scale(1.0 / weight.sqrt());
    Ok(MeasurementEvent {
        layer,
        site,
        kind,
        outcome,
        born_probability: weight,
    })
}

/// Projects onto a requested outcome, renormalizes, and returns its Born
/// probability. Errors when the outcome has weight below
/// [`FORCE_PROBABILITY_FLOOR`], signalling an impossible record.
pub fn force_and_collapse(
    state: &mut PureState,
    site: usize,
    kind: MeasurementKind,
    outcome: u32,
) -> Result<f64> {
    let l = state.basis().modes();
    if site < 1 || site > l {
        return Err(Error::SiteOutOfRange { site, modes: l });
    }
    let weight = project(state, site, kind, outcome);
    if weight < FORCE_PROBABILITY_FLOOR {
        return Err(Error::ZeroProbability {
            site,
            probability: weight,
        });
    }
    state.scale(1.0 / weight.sqrt());
    Ok(weight)
}
