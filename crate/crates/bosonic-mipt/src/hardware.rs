//! Closed-form models of the dispersive readout and experiment timing:
//! Ramsey parity probabilities, adaptive bitwise photon counting with
//! feedforward, coupler-inherited decay/dephasing rates, and wall time.
//!
//! A Ramsey sequence with dispersive shift χ, idle time T, and final-pulse
//! phase offset φ reads out P_g = sin²(χnT/2 + φ), P_e = 1 - P_g. Parity
//! uses T = π/χ: even photon numbers land on |e⟩ and odd on |g⟩. Bit m of
//! the binary expansion uses T = π/(2^m χ) with a feedforward phase that
//! cancels the contribution of the already-revealed bits ñ, making every
//! step deterministic: P_g = sin²((n - ñ)π/2^{m+1}), so |g⟩ maps to bit 1
//! and |e⟩ to bit 0.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const PI: f64 = std::f64::consts::PI;

/// Dispersive Ramsey parameters. χ is an angular frequency; the probabilities
/// depend only on the products χT and the phase offset, so any consistent
/// unit system works.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DispersiveParams {
    pub chi: f64,
    pub idle_time: f64,
    pub phase: f64,
}

/// (P_g, P_e) of the Ramsey readout for photon number `n`. The pair sums to
/// one exactly.
pub fn ramsey_probs(n: u32, params: &DispersiveParams) -> (f64, f64) {
    let arg = 0.5 * params.chi * n as f64 * params.idle_time + params.phase;
    let p_g = arg.sin().powi(2);
    (p_g, 1.0 - p_g)
}

/// One step of the bitwise photon-counting protocol.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BitReadout {
    /// Bit index m (least significant first).
    pub bit_index: usize,
    /// Photon number revealed by bits < m.
    pub revealed: u32,
    pub bit: u8,
    pub p_g: f64,
}

/// Reads bit `m` of `n` given the feedforward value `revealed` = ñ.
///
/// The idle time is T = π/(2^m |χ|). The fractional contribution of the
/// known bits is cancelled by a phase offset -ñπ/2^{m+1}, which leaves the
/// fringe argument at (n - ñ)π/2^{m+1}: an exact multiple of π/2, so the
/// readout is deterministic. A probability away from {0, 1} means the
/// feedforward or timing is mis-set.
pub fn bit_readout(n: u32, m: usize, revealed: u32, chi: f64) -> Result<BitReadout> {
    let chi = chi.abs();
    let divisor = (1u64 << m) as f64;
    let params = DispersiveParams {
        chi,
        idle_time: PI / (divisor * chi),
        phase: -(revealed as f64) * PI / (2.0 * divisor),
    };
    let (p_g, _) = ramsey_probs(n, &params);
    let bit = if p_g > 0.5 { 1 } else { 0 };
    if p_g.min(1.0 - p_g) > 1e-12 {
        return Err(Error::ModelInconsistency {
            photon: n,
            bit: m,
            p_g,
        });
    }
    Ok(BitReadout {
        bit_index: m,
        revealed,
        bit,
        p_g,
    })
}

/// Measures the K least-significant bits of `n` by sequential Ramsey
/// sequences with feedforward. Returns the bits (least significant first)
/// and the per-step trace.
pub fn photon_count_bits(n: u32, bits: usize, chi: f64) -> Result<(Vec<u8>, Vec<BitReadout>)> {
    if bits >= 64 || u64::from(n) >= (1u64 << bits) {
        return Err(Error::InvalidConfig(format!(
            "photon number {n} does not fit in {bits} bits"
        )));
    }
    let mut revealed = 0u32;
    let mut out = Vec::with_capacity(bits);
    let mut trace = Vec::with_capacity(bits);
    for m in 0..bits {
        let step = bit_readout(n, m, revealed, chi)?;
        out.push(step.bit);
        revealed += (step.bit as u32) << m;
        trace.push(step);
    }
    Ok((out, trace))
}

/// Noise spectrum assumed for the coupler's pure dephasing.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseSpectrum {
    Pink,
    White,
}

/// Effective cavity rates inherited from the coupler.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EffectiveRates {
    /// Total decay rate κ̃ = κ_a + (g/Δ)² κ_C.
    pub kappa: f64,
    /// Total dephasing rate γ̃ = (g/Δ)^e γ_C + n_C κ_C, with e = 2 for pink
    /// noise and 4 for white noise.
    pub gamma: f64,
}

pub fn effective_rates(
    g: f64,
    delta: f64,
    kappa_coupler: f64,
    gamma_coupler: f64,
    n_coupler: f64,
    spectrum: NoiseSpectrum,
    kappa_cavity: f64,
) -> EffectiveRates {
    let ratio2 = (g / delta).powi(2);
    let kappa = kappa_cavity + ratio2 * kappa_coupler;
    let dephasing_factor = match spectrum {
        NoiseSpectrum::Pink => ratio2,
        NoiseSpectrum::White => ratio2 * ratio2,
    };
    let gamma = dephasing_factor * gamma_coupler + n_coupler * kappa_coupler;
    EffectiveRates { kappa, gamma }
}

/// Which gate set the wall-time formula describes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CircuitFamily {
    Bsfp,
    Bsrp,
    WithHubbard,
}

/// Timing constants for the wall-time formula (microseconds).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WallTimeParams {
    pub t_snap_us: f64,
    pub t_parity_us: f64,
    pub tau_bs_us: f64,
    pub family: CircuitFamily,
}

impl Default for WallTimeParams {
    fn default() -> Self {
        Self {
            t_snap_us: 1.32,
            t_parity_us: 1.47,
            tau_bs_us: 0.25,
            family: CircuitFamily::WithHubbard,
        }
    }
}

/// Total experiment wall time in microseconds:
/// `L·S̃·T_snap + L·M·p·T_parity + L·(τ_bs/2)·(S+M)`, where S̃ = S for pure
/// beam-splitter circuits and S+M when on-site gates run in the monitored
/// layers too.
pub fn wall_time(l: usize, s: usize, m: usize, p: f64, params: &WallTimeParams) -> f64 {
    let snap_layers = match params.family {
        CircuitFamily::Bsfp | CircuitFamily::Bsrp => s as f64,
        CircuitFamily::WithHubbard => (s + m) as f64,
    };
    let l = l as f64;
    l * snap_layers * params.t_snap_us
        + l * m as f64 * p * params.t_parity_us
        + l * 0.5 * params.tau_bs_us * (s + m) as f64
}

/// State-preparation time in microseconds for an L-mode checkerboard state.
pub fn state_prep_time_us(l: usize) -> f64 {
    1.9 + (l as f64 / 2.0) * 1.3
}
