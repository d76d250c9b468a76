//! Number-conserving two-mode beam-splitter gates, diagonal on-site Hubbard
//! (SNAP) gates, and random brickwork layer generation.
//!
//! A beam-splitter on modes (n, n+1) is `exp[iθ(e^{iφ} a†b + e^{-iφ} a b†)]`.
//! It conserves the pair total `s = n_a + n_b`, so its action decomposes into
//! independent (s+1)-dimensional blocks spanned by {|s,0⟩, ..., |0,s⟩}. Each
//! block is the exponential of a Hermitian tridiagonal matrix; we compute it
//! exactly by eigendecomposition of the real φ=0 matrix and conjugation by
//! the diagonal phase `e^{-iφ n_b}`, which is exact to machine precision.
//!
//! The Hubbard gate multiplies every basis state by `e^{-iU n²}` at the target
//! site; it is diagonal and commutes with all photon-number measurements.

use nalgebra::DMatrix;
use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::sym_eigen;
use crate::state::PureState;
use crate::C64;

const TAU: f64 = std::f64::consts::TAU;

/// Beam splitter acting on modes (site, site+1), 1-based.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BeamSplitterSpec {
    pub site: usize,
    pub theta: f64,
    pub phi: f64,
}

/// On-site Hubbard phase gate `e^{-iU n²}` at `site` (1-based).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SnapSpec {
    pub site: usize,
    pub strength: f64,
}

/// Whether beam-splitter phases are fixed to zero or drawn uniformly.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GateMode {
    Bsfp,
    Bsrp,
}

/// Where the on-site gates of a layer attach.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SnapPlacement {
    /// Both modes of each brick gate (the combined two-mode gate ordering:
    /// hop first, then the two on-site gates).
    Brick,
    /// Every mode of the register, regardless of brick participation.
    AllModes,
}

/// One brickwork layer: the gates in application order, then the on-site
/// gates in application order.
#[derive(Clone, Debug)]
pub struct LayerSchedule {
    pub layer: usize,
    pub gates: Vec<BeamSplitterSpec>,
    pub snaps: Vec<SnapSpec>,
    pub mode: GateMode,
}

/// Exact unitary of the hopping generator restricted to the pair-total-`s`
/// block, ordered {|s,0⟩, |s-1,1⟩, ..., |0,s⟩}.
pub fn two_mode_block(s: usize, theta: f64, phi: f64) -> DMatrix<C64> {
    let n = s + 1;
    let mut t = DMatrix::<f64>::zeros(n, n);
    for j in 1..n {
        let c = (((s - j + 1) * j) as f64).sqrt();
        t[(j - 1, j)] = c;
        t[(j, j - 1)] = c;
    }
    let (eigenvalues, eigenvectors) = sym_eigen(&t);
    let mut u = DMatrix::<C64>::zeros(n, n);
    for (k, lam) in eigenvalues.iter().enumerate() {
        let phase = C64::from_polar(1.0, theta * lam);
        for r in 0..n {
            let vr = eigenvectors[(r, k)];
            for c in 0..n {
                u[(r, c)] += phase * vr * eigenvectors[(c, k)];
            }
        }
    }
    if phi != 0.0 {
        for r in 0..n {
            for c in 0..n {
                u[(r, c)] *= C64::from_polar(1.0, phi * (c as f64 - r as f64));
            }
        }
    }
    u
}

/// Applies a beam splitter in place. Amplitudes mix only within groups that
/// share all other-mode occupations and the pair total; the ancilla factor is
/// untouched.
pub fn apply_beam_splitter(state: &mut PureState, g: &BeamSplitterSpec) -> Result<()> {
    let basis = state.basis().clone();
    let l = basis.modes();
    if g.site < 1 || g.site >= l {
        return Err(Error::SiteOutOfRange {
            site: g.site,
            modes: l,
        });
    }
    let i = g.site - 1;
    let q = basis.photons() as usize;
    let anc = state.ancilla_levels();

    let mut blocks: Vec<Option<DMatrix<C64>>> = vec![None; q + 1];
    let mut members: Vec<usize> = Vec::with_capacity(q + 1);
    let mut old: Vec<C64> = vec![C64::new(0.0, 0.0); q + 1];
    let mut scratch = vec![0u8; l];

    let amps = state.amplitudes_mut();
    for k in 0..basis.dim() {
        let occ = basis.state(k);
        // One leader per group: all pair photons on the left mode.
        if occ[i + 1] != 0 {
            continue;
        }
        let s = occ[i] as usize;
        if s == 0 {
            continue;
        }
        let u = blocks[s].get_or_insert_with(|| two_mode_block(s, g.theta, g.phi));

        members.clear();
        scratch.copy_from_slice(occ);
        for j in 0..=s {
            scratch[i] = (s - j) as u8;
            scratch[i + 1] = j as u8;
            members.push(basis.rank(&scratch).expect("pair rearrangement stays in sector"));
        }
        for a in 0..anc {
            for (j, &m) in members.iter().enumerate() {
                old[j] = amps[m * anc + a];
            }
            for (j, &m) in members.iter().enumerate() {
                let mut acc = C64::new(0.0, 0.0);
                for c in 0..=s {
                    acc += u[(j, c)] * old[c];
                }
                amps[m * anc + a] = acc;
            }
        }
    }
    Ok(())
}

/// Applies the on-site Hubbard phase gate in place.
pub fn apply_snap(state: &mut PureState, g: &SnapSpec) -> Result<()> {
    let basis = state.basis().clone();
    let l = basis.modes();
    if g.site < 1 || g.site > l {
        return Err(Error::SiteOutOfRange {
            site: g.site,
            modes: l,
        });
    }
    let anc = state.ancilla_levels();
    let amps = state.amplitudes_mut();
    for (k, occ) in basis.states().enumerate() {
        let n = occ[g.site - 1] as f64;
        if n == 0.0 {
            continue;
        }
        let phase = C64::from_polar(1.0, -g.strength * n * n);
        for a in 0..anc {
            amps[k * anc + a] *= phase;
        }
    }
    Ok(())
}

/// Draws one brickwork layer. Odd layers pair (1,2), (3,4), ...; even layers
/// pair (2,3), (4,5), ... with open boundaries. Swap angles are uniform on
/// [0, 2π); phases are zero in BSFP mode and uniform in BSRP mode.
pub fn sample_layer<R: Rng>(
    rng: &mut R,
    layer: usize,
    modes: usize,
    mode: GateMode,
    hubbard_u: f64,
    with_snap: bool,
    placement: SnapPlacement,
) -> LayerSchedule {
    let start = if layer % 2 == 1 { 1 } else { 2 };
    let mut gates = Vec::new();
    let mut site = start;
    while site + 1 <= modes {
        let theta = rng.gen::<f64>() * TAU;
        let phi = match mode {
            GateMode::Bsfp => 0.0,
            GateMode::Bsrp => rng.gen::<f64>() * TAU,
        };
        gates.push(BeamSplitterSpec { site, theta, phi });
        site += 2;
    }
    let snaps = if with_snap {
        match placement {
            SnapPlacement::Brick => gates
                .iter()
                .flat_map(|g| [g.site, g.site + 1])
                .map(|site| SnapSpec {
                    site,
                    strength: hubbard_u,
                })
                .collect(),
            SnapPlacement::AllModes => (1..=modes)
                .map(|site| SnapSpec {
                    site,
                    strength: hubbard_u,
                })
                .collect(),
        }
    } else {
        Vec::new()
    };
    LayerSchedule {
        layer,
        gates,
        snaps,
        mode,
    }
}

/// Applies a layer's gates, then its on-site gates. Brick gates act on
/// disjoint pairs and the on-site gates are diagonal, so this order equals
/// the per-gate composition hop-then-both-snaps.
pub fn apply_layer(state: &mut PureState, layer: &LayerSchedule) -> Result<()> {
    for g in &layer.gates {
        apply_beam_splitter(state, g)?;
    }
    for s in &layer.snaps {
        apply_snap(state, s)?;
    }
    Ok(())
}
