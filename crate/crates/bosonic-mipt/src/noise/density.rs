//! Mixed state of L truncated modes plus the two-level reference ancilla.
//!
//! The joint index runs over (mode_1, ..., mode_L, ancilla) with the ancilla
//! fastest-varying, matching the pure-state layout. Channels and unitaries
//! act on one axis (a mode, an adjacent mode pair, or the ancilla) through
//! strided kernels, so a local operation costs O(n² · axis_len) instead of a
//! dense n³ sandwich.

use rand::Rng;

use super::channel::{Channel, LocalOp};
use crate::basis::SectorBasis;
use crate::entropy::EntropyBase;
use crate::error::{Error, Result};
use crate::measurement::MeasurementKind;
use crate::state::PureState;
use crate::C64;

/// Largest joint dimension accepted (keeps the three n² buffers in memory).
pub const MAX_JOINT_DIM: usize = 2048;

/// One tensor axis of the joint index.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Axis {
    pub stride: usize,
    pub len: usize,
}

#[derive(Clone, Debug)]
pub struct DensityMatrix {
    modes: usize,
    local_dim: usize,
    n: usize,
    data: Vec<C64>,
    scratch_rows: Vec<C64>,
    scratch_tmp: Vec<C64>,
    scratch_acc: Vec<C64>,
}

impl DensityMatrix {
    fn allocate(modes: usize, local_dim: usize) -> Result<Self> {
        let mode_space = local_dim.checked_pow(modes as u32).ok_or_else(|| {
            Error::InvalidConfig("joint dimension overflow".into())
        })?;
        let n = mode_space * 2;
        if n > MAX_JOINT_DIM {
            return Err(Error::InvalidConfig(format!(
                "joint dimension {n} exceeds the density-matrix cap {MAX_JOINT_DIM}"
            )));
        }
        let max_axis = local_dim * local_dim;
        Ok(Self {
            modes,
            local_dim,
            n,
            data: vec![C64::new(0.0, 0.0); n * n],
            scratch_rows: vec![C64::new(0.0, 0.0); max_axis * n],
            scratch_tmp: vec![C64::new(0.0, 0.0); n * n],
            scratch_acc: vec![C64::new(0.0, 0.0); n * n],
        })
    }

    /// Pure-state density matrix |v⟩⟨v| from a joint-space vector.
    pub fn from_vector(modes: usize, local_dim: usize, v: &[C64]) -> Result<Self> {
        let mut rho = Self::allocate(modes, local_dim)?;
        if v.len() != rho.n {
            return Err(Error::InvalidConfig(format!(
                "vector length {} does not match joint dimension {}",
                v.len(),
                rho.n
            )));
        }
        for r in 0..rho.n {
            for c in 0..rho.n {
                rho.data[r * rho.n + c] = v[r] * v[c].conj();
            }
        }
        Ok(rho)
    }

    /// Embeds a sector pure state (with its two-level ancilla) into the
    /// truncated product space. Fails if any occupied configuration exceeds
    /// the local truncation.
    pub fn from_sector_state(state: &PureState, local_dim: usize) -> Result<Self> {
        let basis = state.basis();
        if state.ancilla_levels() != 2 {
            return Err(Error::InvalidConfig(
                "density embedding expects the two-level ancilla".into(),
            ));
        }
        let mut v = vec![C64::new(0.0, 0.0); local_dim.pow(basis.modes() as u32) * 2];
        for (k, occ) in basis.states().enumerate() {
            for a in 0..2 {
                let amp = state.amplitude(k, a);
                if amp.norm_sqr() == 0.0 {
                    continue;
                }
                let idx = product_index(occ, a, local_dim).ok_or_else(|| {
                    Error::InvalidConfig(format!(
                        "occupation {occ:?} exceeds local truncation {local_dim}"
                    ))
                })?;
                v[idx] = amp;
            }
        }
        Self::from_vector(basis.modes(), local_dim, &v)
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn local_dim(&self) -> usize {
        self.local_dim
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn element(&self, r: usize, c: usize) -> C64 {
        self.data[r * self.n + c]
    }

    /// Axis of a single mode (1-based site).
    pub fn mode_axis(&self, site: usize) -> Result<Axis> {
        if site < 1 || site > self.modes {
            return Err(Error::SiteOutOfRange {
                site,
                modes: self.modes,
            });
        }
        Ok(Axis {
            stride: 2 * self.local_dim.pow((self.modes - site) as u32),
            len: self.local_dim,
        })
    }

    /// Combined axis of the adjacent pair (site, site+1).
    pub fn pair_axis(&self, site: usize) -> Result<Axis> {
        if site < 1 || site + 1 > self.modes {
            return Err(Error::SiteOutOfRange {
                site,
                modes: self.modes,
            });
        }
        Ok(Axis {
            stride: 2 * self.local_dim.pow((self.modes - site - 1) as u32),
            len: self.local_dim * self.local_dim,
        })
    }

    pub fn ancilla_axis(&self) -> Axis {
        Axis { stride: 1, len: 2 }
    }

    fn apply_left_inplace(data: &mut [C64], n: usize, axis: Axis, op: &LocalOp, rows: &mut [C64]) {
        let group = axis.len * axis.stride;
        let scratch = &mut rows[..axis.len * n];
        for hi in 0..n / group {
            for lo in 0..axis.stride {
                let base = hi * group + lo;
                for j in 0..axis.len {
                    let r = base + j * axis.stride;
                    scratch[j * n..(j + 1) * n].copy_from_slice(&data[r * n..(r + 1) * n]);
                }
                for j in 0..axis.len {
                    let r = base + j * axis.stride;
                    let out = &mut data[r * n..(r + 1) * n];
                    out.fill(C64::new(0.0, 0.0));
                    for l in 0..axis.len {
                        let w = op.at(j, l);
                        if w.re == 0.0 && w.im == 0.0 {
                            continue;
                        }
                        let src = &scratch[l * n..(l + 1) * n];
                        for (o, s) in out.iter_mut().zip(src) {
                            *o += w * s;
                        }
                    }
                }
            }
        }
    }

    /// Right-multiplies by op†, mixing columns within each row.
    fn apply_right_adjoint_inplace(data: &mut [C64], n: usize, axis: Axis, op: &LocalOp) {
        let group = axis.len * axis.stride;
        let mut old = vec![C64::new(0.0, 0.0); axis.len];
        for r in 0..n {
            let row = &mut data[r * n..(r + 1) * n];
            for hi in 0..n / group {
                for lo in 0..axis.stride {
                    let base = hi * group + lo;
                    for l in 0..axis.len {
                        old[l] = row[base + l * axis.stride];
                    }
                    for j in 0..axis.len {
                        let mut acc = C64::new(0.0, 0.0);
                        for l in 0..axis.len {
                            let w = op.at(j, l);
                            if w.re == 0.0 && w.im == 0.0 {
                                continue;
                            }
                            acc += old[l] * w.conj();
                        }
                        row[base + j * axis.stride] = acc;
                    }
                }
            }
        }
    }

    /// Applies a unitary on the given axis: ρ → U ρ U†.
    pub fn apply_unitary(&mut self, op: &LocalOp, axis: Axis) {
        debug_assert_eq!(op.dim, axis.len);
        Self::apply_left_inplace(&mut self.data, self.n, axis, op, &mut self.scratch_rows);
        Self::apply_right_adjoint_inplace(&mut self.data, self.n, axis, op);
    }

    /// Applies a Kraus channel on the given axis: ρ → Σ K ρ K†.
    pub fn apply_channel(&mut self, ch: &Channel, axis: Axis) {
        if ch.kraus.len() == 1 {
            self.apply_unitary(&ch.kraus[0], axis);
            return;
        }
        self.scratch_acc.fill(C64::new(0.0, 0.0));
        for k in &ch.kraus {
            self.scratch_tmp.copy_from_slice(&self.data);
            Self::apply_left_inplace(&mut self.scratch_tmp, self.n, axis, k, &mut self.scratch_rows);
            Self::apply_right_adjoint_inplace(&mut self.scratch_tmp, self.n, axis, k);
            for (a, t) in self.scratch_acc.iter_mut().zip(&self.scratch_tmp) {
                *a += t;
            }
        }
        std::mem::swap(&mut self.data, &mut self.scratch_acc);
    }

    pub fn trace(&self) -> C64 {
        (0..self.n).map(|r| self.data[r * self.n + r]).sum()
    }

    /// Restores exact Hermiticity, ρ ← (ρ + ρ†)/2.
    pub fn hermitize(&mut self) {
        for r in 0..self.n {
            for c in r..self.n {
                let a = self.data[r * self.n + c];
                let b = self.data[c * self.n + r];
                let avg = 0.5 * (a + b.conj());
                self.data[r * self.n + c] = avg;
                self.data[c * self.n + r] = avg.conj();
            }
        }
    }

    pub fn hermiticity_defect(&self) -> f64 {
        let mut dev = 0.0f64;
        for r in 0..self.n {
            for c in 0..self.n {
                dev = dev.max((self.data[r * self.n + c] - self.data[c * self.n + r].conj()).norm());
            }
        }
        dev
    }

    /// Smallest eigenvalue via the real symmetric embedding of the Hermitian
    /// matrix (diagnostic; O(n³) on the doubled size).
    pub fn min_eigenvalue(&self) -> f64 {
        let n = self.n;
        let mut emb = nalgebra::DMatrix::<f64>::zeros(2 * n, 2 * n);
        for r in 0..n {
            for c in 0..n {
                let z = self.data[r * n + c];
                emb[(r, c)] = z.re;
                emb[(n + r, n + c)] = z.re;
                emb[(r, n + c)] = -z.im;
                emb[(n + r, c)] = z.im;
            }
        }
        let (eigenvalues, _) = crate::linalg::sym_eigen(&emb);
        eigenvalues.into_iter().fold(f64::INFINITY, f64::min)
    }

    fn occupation_of(&self, index: usize, site: usize) -> u8 {
        let stride = 2 * self.local_dim.pow((self.modes - site) as u32);
        ((index / stride) % self.local_dim) as u8
    }

    /// Number of distinct outcomes for a kind on the truncated local space.
    pub fn outcome_count(&self, kind: MeasurementKind) -> usize {
        match kind {
            MeasurementKind::Parity => 2,
            MeasurementKind::ModN(n) => n as usize,
            MeasurementKind::Number => self.local_dim,
        }
    }

    /// Born weights of each outcome from the diagonal.
    pub fn outcome_weights(&self, site: usize, kind: MeasurementKind) -> Result<Vec<f64>> {
        if site < 1 || site > self.modes {
            return Err(Error::SiteOutOfRange {
                site,
                modes: self.modes,
            });
        }
        let mut weights = vec![0.0; self.outcome_count(kind)];
        for r in 0..self.n {
            let o = kind.outcome_of(self.occupation_of(r, site)) as usize;
            weights[o] += self.data[r * self.n + r].re;
        }
        Ok(weights)
    }

    /// Projects onto the outcome subspace, renormalizes, and returns the
    /// pre-normalization weight.
    pub fn collapse(&mut self, site: usize, kind: MeasurementKind, outcome: u32) -> Result<f64> {
        let weights = self.outcome_weights(site, kind)?;
        let w = weights[outcome as usize];
        if w < 1e-14 {
            return Err(Error::ZeroProbability {
                site,
                probability: w,
            });
        }
        let keep: Vec<bool> = (0..self.n)
            .map(|r| kind.outcome_of(self.occupation_of(r, site)) == outcome)
            .collect();
        let inv = 1.0 / w;
        for r in 0..self.n {
            for c in 0..self.n {
                let e = &mut self.data[r * self.n + c];
                if keep[r] && keep[c] {
                    *e *= inv;
                } else {
                    *e = C64::new(0.0, 0.0);
                }
            }
        }
        Ok(w)
    }

    /// Reduced 2x2 ancilla state (r00, r01, r11).
    pub fn ancilla_density(&self) -> (f64, C64, f64) {
        let mut r00 = 0.0;
        let mut r11 = 0.0;
        let mut r01 = C64::new(0.0, 0.0);
        for m in 0..self.n / 2 {
            r00 += self.data[(2 * m) * self.n + 2 * m].re;
            r11 += self.data[(2 * m + 1) * self.n + 2 * m + 1].re;
            r01 += self.data[(2 * m) * self.n + 2 * m + 1];
        }
        (r00, r01, r11)
    }

    pub fn ancilla_entropy(&self, base: EntropyBase) -> f64 {
        let (r00, r01, r11) = self.ancilla_density();
        crate::entropy::qubit_entropy(r00, r01, r11, base)
    }
}

/// Joint-space index of an occupation pattern with an ancilla level, or None
/// if any occupation exceeds the truncation.
pub fn product_index(occ: &[u8], ancilla: usize, local_dim: usize) -> Option<usize> {
    let mut idx = 0usize;
    for &n in occ {
        if n as usize >= local_dim {
            return None;
        }
        idx = idx * local_dim + n as usize;
    }
    Some(idx * 2 + ancilla)
}

/// Samples an outcome from the Born weights, flips it with probability
/// `epsilon` (collapsing onto the flipped subspace), and returns
/// (recorded outcome, recorded outcome's weight, flipped?). A flip onto a
/// zero-weight outcome is skipped and logged.
pub fn noisy_measure<R: Rng>(
    rho: &mut DensityMatrix,
    site: usize,
    kind: MeasurementKind,
    epsilon: f64,
    rng: &mut R,
) -> Result<(u32, f64, bool)> {
    let weights = rho.outcome_weights(site, kind)?;
    let total: f64 = weights.iter().sum();
    let draw = rng.gen::<f64>() * total;
    let mut cum = 0.0;
    let mut outcome = None;
    for (o, &w) in weights.iter().enumerate() {
        if w <= 0.0 {
            continue;
        }
        cum += w;
        if draw < cum {
            outcome = Some(o as u32);
            break;
        }
    }
    let mut outcome = outcome.unwrap_or_else(|| {
        weights
            .iter()
            .enumerate()
            .rev()
            .find(|(_, &w)| w > 0.0)
            .map(|(o, _)| o as u32)
            .expect("density matrix has unit trace")
    });

    let mut flipped = false;
    if epsilon > 0.0 && rng.gen::<f64>() < epsilon {
        let count = weights.len() as u32;
        let alt = (outcome + 1) % count;
        if weights[alt as usize] >= 1e-14 {
            outcome = alt;
            flipped = true;
        } else {
            log::warn!(
                "readout flip at site {site} targets a zero-weight outcome; keeping the ideal one"
            );
        }
    }
    let w = rho.collapse(site, kind, outcome)?;
    Ok((outcome, w, flipped))
}

/// Builds the checkerboard vector directly in the product space.
pub fn checkerboard_vector(modes: usize, local_dim: usize) -> Result<Vec<C64>> {
    if modes % 2 != 0 {
        return Err(Error::InvalidConfig(
            "checkerboard init requires an even mode count".into(),
        ));
    }
    let mut v = vec![C64::new(0.0, 0.0); local_dim.pow(modes as u32) * 2];
    let even_zeros: Vec<u8> = (0..modes).map(|i| (i % 2) as u8).collect();
    let odd_zeros: Vec<u8> = (0..modes).map(|i| ((i + 1) % 2) as u8).collect();
    let w = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    v[product_index(&even_zeros, 0, local_dim).unwrap()] = w;
    v[product_index(&odd_zeros, 1, local_dim).unwrap()] = w;
    Ok(v)
}

/// Embeds a SectorBasis state vector given as amplitudes over the sector.
pub fn embed_sector_vector(
    basis: &SectorBasis,
    amps: &[C64],
    ancilla: usize,
    local_dim: usize,
) -> Result<Vec<C64>> {
    let mut v = vec![C64::new(0.0, 0.0); local_dim.pow(basis.modes() as u32) * 2];
    for (k, occ) in basis.states().enumerate() {
        if amps[k].norm_sqr() == 0.0 {
            continue;
        }
        let idx = product_index(occ, ancilla, local_dim).ok_or_else(|| {
            Error::InvalidConfig(format!(
                "occupation {occ:?} exceeds local truncation {local_dim}"
            ))
        })?;
        v[idx] = amps[k];
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::channel::{dephasing_channel, local_noise_channel, thermal_decay_channel};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_density(modes: usize, d: usize, seed: u64) -> DensityMatrix {
        // ρ = V V† / tr for a random full-rank V built from a few vectors.
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = d.pow(modes as u32) * 2;
        let mut rho = DensityMatrix::allocate(modes, d).unwrap();
        let vecs = 4;
        for _ in 0..vecs {
            let v: Vec<C64> = (0..n)
                .map(|_| C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
                .collect();
            for r in 0..n {
                for c in 0..n {
                    rho.data[r * n + c] += v[r] * v[c].conj();
                }
            }
        }
        let tr = rho.trace().re;
        for e in &mut rho.data {
            *e /= tr;
        }
        rho
    }

    #[test]
    fn checkerboard_density_properties() {
        let v = checkerboard_vector(4, 3).unwrap();
        let rho = DensityMatrix::from_vector(4, 3, &v).unwrap();
        assert!((rho.trace().re - 1.0).abs() < 1e-12);
        assert!((rho.ancilla_entropy(EntropyBase::Two) - 1.0).abs() < 1e-12);
        let w = rho.outcome_weights(1, MeasurementKind::Parity).unwrap();
        assert!((w[0] - 0.5).abs() < 1e-12);
        assert!((w[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn channels_on_disjoint_modes_commute() {
        let ch_a = thermal_decay_channel(3.0, 40.0, 0.05, 3);
        let ch_b = dephasing_channel(2.0, 0.08, 3);
        let rho0 = random_density(3, 3, 5);

        let mut ab = rho0.clone();
        let ax1 = ab.mode_axis(1).unwrap();
        let ax3 = ab.mode_axis(3).unwrap();
        ab.apply_channel(&ch_a, ax1);
        ab.apply_channel(&ch_b, ax3);

        let mut ba = rho0.clone();
        ba.apply_channel(&ch_b, ax3);
        ba.apply_channel(&ch_a, ax1);

        for r in 0..ab.n {
            for c in 0..ab.n {
                assert!((ab.element(r, c) - ba.element(r, c)).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn local_channel_matches_dense_application_on_the_marginal() {
        // Apply a channel to mode 2 of a pure product-ish state and compare
        // the mode marginal against dense single-mode application.
        let d: usize = 3;
        let mut v = vec![C64::new(0.0, 0.0); d.pow(2) * 2];
        v[product_index(&[1, 1], 0, d).unwrap()] = C64::new(0.6, 0.0);
        v[product_index(&[1, 0], 0, d).unwrap()] = C64::new(0.0, 0.8);
        let mut rho = DensityMatrix::from_vector(2, d, &v).unwrap();

        // Marginal of mode 2 before: diag over occupations.
        let ch = local_noise_channel(4.0, 0.1, 0.02, 0.05, d);
        let mut dense = nalgebra::DMatrix::<C64>::zeros(d, d);
        // |ψ⟩ = 0.6|1⟩ + 0.8i|0⟩ on mode 2 (mode 1 fixed at 1, ancilla 0).
        let amps = [C64::new(0.0, 0.8), C64::new(0.6, 0.0), C64::new(0.0, 0.0)];
        for a in 0..d {
            for b in 0..d {
                dense[(a, b)] = amps[a] * amps[b].conj();
            }
        }
        let expect = ch.apply_dense(&dense);

        let axis = rho.mode_axis(2).unwrap();
        rho.apply_channel(&ch, axis);

        // Partial trace over mode 1 and the ancilla.
        let mut marginal = nalgebra::DMatrix::<C64>::zeros(d, d);
        for m1 in 0..d as u8 {
            for a in 0..d {
                for b in 0..d {
                    for anc in 0..2 {
                        let r = product_index(&[m1, a as u8], anc, d).unwrap();
                        let c = product_index(&[m1, b as u8], anc, d).unwrap();
                        marginal[(a, b)] += rho.element(r, c);
                    }
                }
            }
        }
        for a in 0..d {
            for b in 0..d {
                assert!(
                    (marginal[(a, b)] - expect[(a, b)]).norm() < 1e-10,
                    "marginal mismatch at ({a},{b})"
                );
            }
        }
    }

    #[test]
    fn density_invariants_hold_after_operations() {
        let mut rho = random_density(2, 3, 9);
        let ch = local_noise_channel(2.5, 0.05, 0.02, 0.03, 3);
        let axis = rho.mode_axis(1).unwrap();
        rho.apply_channel(&ch, axis);
        let anc = rho.ancilla_axis();
        rho.apply_channel(&thermal_decay_channel(1.0, 100.0, 0.0, 2), anc);
        assert!((rho.trace().re - 1.0).abs() < 1e-9);
        assert!(rho.hermiticity_defect() < 1e-10);
        assert!(rho.min_eigenvalue() > -1e-9);
    }

    #[test]
    fn ideal_noisy_measure_matches_projective_statistics() {
        let v = checkerboard_vector(2, 3).unwrap();
        let rho0 = DensityMatrix::from_vector(2, 3, &v).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut even = 0usize;
        let trials = 2000;
        for _ in 0..trials {
            let mut rho = rho0.clone();
            let (o, w, flipped) =
                noisy_measure(&mut rho, 1, MeasurementKind::Parity, 0.0, &mut rng).unwrap();
            assert!(!flipped);
            assert!((w - 0.5).abs() < 1e-10);
            if o == 0 {
                even += 1;
            }
            // Projector idempotence on the collapsed state.
            let w2 = rho.outcome_weights(1, MeasurementKind::Parity).unwrap();
            assert!((w2[o as usize] - 1.0).abs() < 1e-10);
        }
        let freq = even as f64 / trials as f64;
        assert!((freq - 0.5).abs() < 0.05, "even frequency {freq}");
    }

    #[test]
    fn epsilon_half_makes_parity_uniform() {
        // Pure even state: with ε=0.5 the recorded outcome is a fair coin.
        let d: usize = 3;
        let mut v = vec![C64::new(0.0, 0.0); d.pow(2) * 2];
        v[product_index(&[2, 0], 0, d).unwrap()] = C64::new(1.0, 0.0);
        let rho0 = DensityMatrix::from_vector(2, d, &v).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut odd = 0usize;
        let trials = 20_000;
        for _ in 0..trials {
            let mut rho = rho0.clone();
            // The flipped projector (odd on mode 1) has zero weight for
            // |2,0⟩... use a state with weight in both classes on site 2.
            let (o, _, _) =
                noisy_measure(&mut rho, 1, MeasurementKind::Parity, 0.5, &mut rng).unwrap();
            if o == 1 {
                odd += 1;
            }
        }
        // Flips onto the zero-weight odd subspace are skipped, so outcomes
        // stay even: this exercises the degenerate-flip guard.
        assert_eq!(odd, 0);
    }

    #[test]
    fn misassignment_rate_matches_epsilon() {
        // Both parity classes populated: flips land on a valid subspace.
        let d: usize = 3;
        let mut v = vec![C64::new(0.0, 0.0); d.pow(2) * 2];
        v[product_index(&[2, 0], 0, d).unwrap()] = C64::new(0.9, 0.0);
        v[product_index(&[1, 1], 0, d).unwrap()] = C64::new(
            (1.0f64 - 0.81).sqrt(),
            0.0,
        );
        let rho0 = DensityMatrix::from_vector(2, d, &v).unwrap();
        let eps = 0.004;
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut flips = 0usize;
        let trials = 100_000;
        for _ in 0..trials {
            let mut rho = rho0.clone();
            let (_, _, flipped) =
                noisy_measure(&mut rho, 1, MeasurementKind::Parity, eps, &mut rng).unwrap();
            if flipped {
                flips += 1;
            }
        }
        let rate = flips as f64 / trials as f64;
        let sigma = (eps * (1.0 - eps) / trials as f64).sqrt();
        assert!(
            (rate - eps).abs() < 3.0 * sigma,
            "flip rate {rate} vs {eps} (sigma {sigma})"
        );
    }
}
