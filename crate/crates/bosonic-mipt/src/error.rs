use thiserror::Error;

/// Errors produced by the simulator core.
#[derive(Error, Debug)]
pub enum Error {
    #[error("sector dimension {dim} exceeds the amplitude limit {limit} (L={modes}, Q={photons})")]
    CapacityExceeded {
        modes: usize,
        photons: u8,
        dim: u128,
        limit: usize,
    },

    #[error("occupation vector is not in the sector (expected {modes} modes summing to {photons})")]
    InvalidOccupation { modes: usize, photons: u8 },

    #[error("basis index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("site {site} out of range for {modes} modes")]
    SiteOutOfRange { site: usize, modes: usize },

    #[error("cut {cut} out of range, expected 1..={max}")]
    CutOutOfRange { cut: usize, max: usize },

    #[error("forced outcome has Born probability {probability:.3e} below 1e-14 (site {site})")]
    ZeroProbability { site: usize, probability: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("readout model inconsistency: bit {bit} of n={photon} gave P_g={p_g:.6} away from {{0,1}}")]
    ModelInconsistency { photon: u32, bit: usize, p_g: f64 },

    #[error("density-matrix trace drifted to {trace:.9} (|1-tr| > {tol:.1e})")]
    TraceDrift { trace: f64, tol: f64 },

    #[error("no crossing: the difference of the two curves never changes sign")]
    NoCrossing,

    #[error("empty record selection; nearest available p is {nearest}")]
    EmptySelection { nearest: f64 },

    #[error("curves are not sampled on a common p grid")]
    GridMismatch,
}

pub type Result<T> = std::result::Result<T, Error>;
