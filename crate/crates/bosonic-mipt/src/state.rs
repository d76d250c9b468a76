//! Pure states over the fixed-charge sector, optionally carrying a two-level
//! reference ancilla.
//!
//! Amplitudes are stored with the ancilla bit fastest-varying, so tracing the
//! modes out of the state is a strided 2x2 contraction. States used by the
//! learnability decoder carry no ancilla factor (`ancilla_levels == 1`); the
//! gate and measurement kernels treat both layouts uniformly.

use std::sync::Arc;

use crate::basis::SectorBasis;
use crate::error::{Error, Result};
use crate::C64;

#[derive(Clone, Debug)]
pub struct PureState {
    basis: Arc<SectorBasis>,
    ancilla_levels: usize,
    amps: Vec<C64>,
}

impl PureState {
    /// All-zero amplitude vector; callers must fill and normalize.
    pub fn zeroed(basis: Arc<SectorBasis>, ancilla_levels: usize) -> Self {
        assert!(
            ancilla_levels == 1 || ancilla_levels == 2,
            "ancilla is a two-level reference (or absent)"
        );
        let len = basis.dim() * ancilla_levels;
        Self {
            basis,
            ancilla_levels,
            amps: vec![C64::new(0.0, 0.0); len],
        }
    }

    /// Wraps an explicit amplitude vector, normalizing it.
    pub fn from_amplitudes(
        basis: Arc<SectorBasis>,
        ancilla_levels: usize,
        amps: Vec<C64>,
    ) -> Result<Self> {
        if amps.len() != basis.dim() * ancilla_levels {
            return Err(Error::InvalidConfig(format!(
                "amplitude vector length {} does not match dim {} x {}",
                amps.len(),
                basis.dim(),
                ancilla_levels
            )));
        }
        let mut state = Self {
            basis,
            ancilla_levels,
            amps,
        };
        let norm = state.norm();
        if norm < 1e-14 {
            return Err(Error::InvalidConfig("amplitude vector has zero norm".into()));
        }
        state.scale(1.0 / norm);
        Ok(state)
    }

    /// Basis state `occ` paired with a definite ancilla level.
    pub fn basis_state(basis: Arc<SectorBasis>, occ: &[u8], ancilla: usize) -> Result<Self> {
        let k = basis.rank(occ)?;
        let mut state = Self::zeroed(basis, 2);
        state.amps[k * 2 + ancilla] = C64::new(1.0, 0.0);
        Ok(state)
    }

    pub fn basis(&self) -> &Arc<SectorBasis> {
        &self.basis
    }

    pub fn modes(&self) -> usize {
        self.basis.modes()
    }

    pub fn ancilla_levels(&self) -> usize {
        self.ancilla_levels
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut [C64] {
        &mut self.amps
    }

    /// Flat index of (sector index, ancilla level).
    #[inline]
    pub fn amp_index(&self, sector: usize, ancilla: usize) -> usize {
        sector * self.ancilla_levels + ancilla
    }

    #[inline]
    pub fn amplitude(&self, sector: usize, ancilla: usize) -> C64 {
        self.amps[self.amp_index(sector, ancilla)]
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub(crate) fn scale(&mut self, factor: f64) {
        for a in &mut self.amps {
            *a *= factor;
        }
    }

    /// Occupation distribution of a single mode (site is 1-based).
    pub fn mode_distribution(&self, site: usize) -> Result<Vec<f64>> {
        let l = self.basis.modes();
        if site < 1 || site > l {
            return Err(Error::SiteOutOfRange { site, modes: l });
        }
        let mut probs = vec![0.0; self.basis.photons() as usize + 1];
        for (k, occ) in self.basis.states().enumerate() {
            let n = occ[site - 1] as usize;
            for a in 0..self.ancilla_levels {
                probs[n] += self.amps[k * self.ancilla_levels + a].norm_sqr();
            }
        }
        Ok(probs)
    }
}
