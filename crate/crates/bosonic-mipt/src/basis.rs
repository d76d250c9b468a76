//! Enumeration and combinatorial ranking of the fixed-charge Fock sector.
//!
//! The sector of `L` bosonic modes holding exactly `Q` photons has dimension
//! `C(Q+L-1, Q)`. States are kept in a strict total order: lexicographic on
//! the occupation vector with mode 1 most significant and higher occupations
//! first, so `(Q, 0, ..., 0)` is rank 0 and `(0, ..., 0, Q)` is the last
//! state. Ranking is computed from cumulative binomial counts rather than a
//! hash map, giving an O(L) bijection between occupation vectors and indices.

use crate::error::{Error, Result};

/// Default cap on the number of stored amplitudes (sector dimension times the
/// two ancilla levels). Keeps L=16, Q=8 comfortably in memory while failing
/// fast on typo-sized requests.
pub const DEFAULT_AMPLITUDE_LIMIT: usize = 20_000_000;

/// Photon occupations of the modes; always sums to the sector charge.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct OccupationVector(pub Vec<u8>);

impl OccupationVector {
    pub fn total(&self) -> u32 {
        self.0.iter().map(|&n| n as u32).sum()
    }

    pub fn as_slice(&self) -> &[u8] {
        &self.0
    }
}

impl std::fmt::Display for OccupationVector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "|")?;
        for n in &self.0 {
            write!(f, "{n}")?;
        }
        write!(f, "⟩")
    }
}

/// Ordered basis of the fixed-(L, Q) sector with O(L) rank/unrank.
#[derive(Clone, Debug)]
pub struct SectorBasis {
    modes: usize,
    photons: u8,
    dim: usize,
    /// All occupation vectors, flattened row-major (`dim * modes` entries).
    states: Vec<u8>,
    /// Pascal table `binom[n][k]` up to `n = Q + L`.
    binom: Vec<Vec<u64>>,
}

/// Number of occupation vectors of `modes` non-negative integers summing to
/// `photons`, i.e. `C(photons + modes - 1, photons)`. `None` on overflow.
pub fn sector_dimension(modes: usize, photons: u8) -> Option<u128> {
    let q = photons as u128;
    let mut acc: u128 = 1;
    for i in 1..=q {
        acc = acc.checked_mul(modes as u128 - 1 + i)?;
        acc /= i;
    }
    Some(acc)
}

impl SectorBasis {
    /// Builds the basis with the default amplitude cap.
    pub fn new(modes: usize, photons: u8) -> Result<Self> {
        Self::with_limit(modes, photons, DEFAULT_AMPLITUDE_LIMIT)
    }

    /// Builds the basis, failing if `2 * dim` exceeds `amplitude_limit`.
    pub fn with_limit(modes: usize, photons: u8, amplitude_limit: usize) -> Result<Self> {
        if modes == 0 {
            return Err(Error::InvalidConfig("mode count must be >= 1".into()));
        }
        let dim_big = sector_dimension(modes, photons).ok_or(Error::CapacityExceeded {
            modes,
            photons,
            dim: u128::MAX,
            limit: amplitude_limit,
        })?;
        if dim_big.saturating_mul(2) > amplitude_limit as u128 {
            return Err(Error::CapacityExceeded {
                modes,
                photons,
                dim: dim_big,
                limit: amplitude_limit,
            });
        }
        let dim = dim_big as usize;

        let nmax = modes + photons as usize;
        let mut binom = vec![vec![0u64; nmax + 1]; nmax + 1];
        for n in 0..=nmax {
            binom[n][0] = 1;
            for k in 1..=n {
                binom[n][k] = binom[n - 1][k - 1] + if k <= n - 1 { binom[n - 1][k] } else { 0 };
            }
        }

        let mut states = Vec::with_capacity(dim * modes);
        let mut occ = vec![0u8; modes];
        enumerate(&mut occ, 0, photons, &mut states);
        debug_assert_eq!(states.len(), dim * modes);

        Ok(Self {
            modes,
            photons,
            dim,
            states,
            binom,
        })
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn photons(&self) -> u8 {
        self.photons
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Occupation vector at rank `k` in the documented order.
    pub fn state(&self, k: usize) -> &[u8] {
        &self.states[k * self.modes..(k + 1) * self.modes]
    }

    /// Like [`Self::state`] but range-checked.
    pub fn unrank(&self, k: usize) -> Result<&[u8]> {
        if k >= self.dim {
            return Err(Error::IndexOutOfRange {
                index: k,
                dim: self.dim,
            });
        }
        Ok(self.state(k))
    }

    pub fn states(&self) -> impl Iterator<Item = &[u8]> {
        self.states.chunks_exact(self.modes)
    }

    /// Rank of an occupation vector in the documented order.
    ///
    /// The count of states preceding a given prefix is accumulated per mode:
    /// states with a larger occupation on mode `i` (given the remaining
    /// charge) come first, and the tail count telescopes to a single binomial
    /// via the hockey-stick identity.
    pub fn rank(&self, occ: &[u8]) -> Result<usize> {
        if occ.len() != self.modes || occ.iter().map(|&n| n as u32).sum::<u32>() != self.photons as u32
        {
            return Err(Error::InvalidOccupation {
                modes: self.modes,
                photons: self.photons,
            });
        }
        let mut rank = 0u64;
        let mut q = self.photons as usize;
        for i in 0..self.modes - 1 {
            let rem = self.modes - 1 - i; // modes after i
            let n = occ[i] as usize;
            if n < q {
                rank += self.binom[q - n - 1 + rem][rem];
            }
            q -= n;
        }
        Ok(rank as usize)
    }
}

fn enumerate(occ: &mut [u8], mode: usize, remaining: u8, out: &mut Vec<u8>) {
    if mode == occ.len() - 1 {
        occ[mode] = remaining;
        out.extend_from_slice(occ);
        return;
    }
    for n in (0..=remaining).rev() {
        occ[mode] = n;
        enumerate(occ, mode + 1, remaining - n, out);
    }
}
