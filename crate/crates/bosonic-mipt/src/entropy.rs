//! Reduced density matrices and von Neumann entropies: the reference-ancilla
//! entropy `S_R` and the bipartite entropy across a mode cut.
//!
//! The ancilla entropy comes from the 2x2 Gram matrix of the two ancilla
//! branches. The bipartite entropy groups basis states by the occupation
//! pattern of the first `cut` modes; total charge splits the amplitude matrix
//! into independent blocks (left charge q pairs only with right charge Q-q),
//! and the Schmidt spectrum is the union of the blocks' singular values.

use serde::{Deserialize, Serialize};

use crate::basis::SectorBasis;
use crate::error::{Error, Result};
use crate::state::PureState;
use crate::C64;

/// Eigenvalues at or below this contribute zero entropy.
pub const EIGENVALUE_FLOOR: f64 = 1e-14;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum EntropyBase {
    #[serde(rename = "2")]
    Two,
    #[serde(rename = "e")]
    E,
}

impl EntropyBase {
    #[inline]
    fn log(self, x: f64) -> f64 {
        match self {
            EntropyBase::Two => x.log2(),
            EntropyBase::E => x.ln(),
        }
    }
}

impl std::fmt::Display for EntropyBase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            EntropyBase::Two => write!(f, "2"),
            EntropyBase::E => write!(f, "e"),
        }
    }
}

fn entropy_of_spectrum(eigs: impl Iterator<Item = f64>, base: EntropyBase) -> f64 {
    let mut s = 0.0;
    for lam in eigs {
        if lam > EIGENVALUE_FLOOR {
            s -= lam * base.log(lam);
        }
    }
    s.max(0.0)
}

/// Entropy of a 2x2 Hermitian matrix given as (r00, r01, r11), by its
/// closed-form eigenvalues.
pub(crate) fn qubit_entropy(r00: f64, r01: C64, r11: f64, base: EntropyBase) -> f64 {
    let mean = 0.5 * (r00 + r11);
    let radius = (0.25 * (r00 - r11).powi(2) + r01.norm_sqr()).sqrt();
    entropy_of_spectrum([mean + radius, mean - radius].into_iter(), base)
}

/// Von Neumann entropy of the reference ancilla, tracing out all modes.
pub fn ancilla_entropy(state: &PureState, base: EntropyBase) -> f64 {
    if state.ancilla_levels() != 2 {
        return 0.0;
    }
    let amps = state.amplitudes();
    let mut r00 = 0.0f64;
    let mut r11 = 0.0f64;
    let mut r01 = C64::new(0.0, 0.0);
    for pair in amps.chunks_exact(2) {
        r00 += pair[0].norm_sqr();
        r11 += pair[1].norm_sqr();
        r01 += pair[0] * pair[1].conj();
    }
    qubit_entropy(r00, r01, r11, base)
}

/// Entropy of the reduced state of modes 1..=cut. The ancilla is grouped with
/// the traced-out complement.
pub fn bipartite_entropy(state: &PureState, cut: usize, base: EntropyBase) -> Result<f64> {
    bipartite_entropy_with(state, cut, base, false)
}

/// As [`bipartite_entropy`], with the ancilla optionally grouped into the
/// kept subsystem A instead of the complement.
pub fn bipartite_entropy_with(
    state: &PureState,
    cut: usize,
    base: EntropyBase,
    ancilla_with_a: bool,
) -> Result<f64> {
    let basis = state.basis();
    let l = basis.modes();
    if cut < 1 || cut >= l {
        return Err(Error::CutOutOfRange { cut, max: l - 1 });
    }
    let q = basis.photons();
    let anc = state.ancilla_levels();
    let amps = state.amplitudes();

    // One amplitude block per left charge; left charge qa pairs with right
    // charge Q - qa only.
    let mut blocks: Vec<(SectorBasis, SectorBasis, nalgebra::DMatrix<C64>)> = (0..=q)
        .map(|qa| {
            let left = SectorBasis::new(cut, qa)?;
            let right = SectorBasis::new(l - cut, q - qa)?;
            let (rows, cols) = if ancilla_with_a {
                (left.dim() * anc, right.dim())
            } else {
                (left.dim(), right.dim() * anc)
            };
            Ok((left, right, nalgebra::DMatrix::<C64>::zeros(rows, cols)))
        })
        .collect::<Result<_>>()?;

    for (k, occ) in basis.states().enumerate() {
        let qa: u8 = occ[..cut].iter().sum();
        let (left, right, m) = &mut blocks[qa as usize];
        let lk = left.rank(&occ[..cut]).expect("left split is in its sector");
        let rk = right.rank(&occ[cut..]).expect("right split is in its sector");
        for a in 0..anc {
            let amp = amps[k * anc + a];
            if ancilla_with_a {
                m[(lk * anc + a, rk)] = amp;
            } else {
                m[(lk, rk * anc + a)] = amp;
            }
        }
    }

    let mut spectrum = Vec::new();
    for (_, _, m) in blocks {
        if m.nrows() == 0 || m.ncols() == 0 {
            continue;
        }
        let svals = m.singular_values();
        spectrum.extend(svals.iter().map(|s| s * s));
    }
    Ok(entropy_of_spectrum(spectrum.into_iter(), base))
}

/// Summary statistics of an entropy observable over an ensemble.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntropyRecord {
    pub l: usize,
    pub q: u8,
    pub p: f64,
    pub t: usize,
    pub mean: f64,
    pub sem: f64,
    pub n_realizations: usize,
    pub base: EntropyBase,
}

/// Sample mean and standard error.
pub fn mean_sem(samples: &[f64]) -> (f64, f64) {
    let n = samples.len();
    if n == 0 {
        return (0.0, 0.0);
    }
    let mean = samples.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0);
    (mean, (var / n as f64).sqrt())
}
