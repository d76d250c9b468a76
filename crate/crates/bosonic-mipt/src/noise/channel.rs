//! Completely positive trace-preserving channels on a truncated local mode.
//!
//! Decay/heating/dephasing channels are built by exponentiating the d²×d²
//! Lindblad generator (zero Hamiltonian, collapse operators
//! `√(κ(1+n̄)) a`, `√(κ n̄) a†`, `√γ_φ n̂`) in column-stacking convention,
//! then extracting Kraus operators from the eigendecomposition of the Choi
//! matrix. All intermediate matrices are real, so the spectral steps stay in
//! real symmetric arithmetic.

use nalgebra::DMatrix;

use crate::linalg::sym_eigen;
use crate::C64;

/// Dense local operator on one mode (or a pair), row-major.
#[derive(Clone, Debug)]
pub struct LocalOp {
    pub dim: usize,
    pub elems: Vec<C64>,
}

impl LocalOp {
    pub fn identity(dim: usize) -> Self {
        let mut elems = vec![C64::new(0.0, 0.0); dim * dim];
        for i in 0..dim {
            elems[i * dim + i] = C64::new(1.0, 0.0);
        }
        Self { dim, elems }
    }

    pub fn from_real(m: &DMatrix<f64>) -> Self {
        let dim = m.nrows();
        let mut elems = Vec::with_capacity(dim * dim);
        for r in 0..dim {
            for c in 0..dim {
                elems.push(C64::new(m[(r, c)], 0.0));
            }
        }
        Self { dim, elems }
    }

    pub fn from_complex(m: &DMatrix<C64>) -> Self {
        let dim = m.nrows();
        let mut elems = Vec::with_capacity(dim * dim);
        for r in 0..dim {
            for c in 0..dim {
                elems.push(m[(r, c)]);
            }
        }
        Self { dim, elems }
    }

    #[inline]
    pub fn at(&self, r: usize, c: usize) -> C64 {
        self.elems[r * self.dim + c]
    }

    /// Diagonal operator from its entries.
    pub fn diagonal(diag: &[C64]) -> Self {
        let dim = diag.len();
        let mut elems = vec![C64::new(0.0, 0.0); dim * dim];
        for (i, &v) in diag.iter().enumerate() {
            elems[i * dim + i] = v;
        }
        Self { dim, elems }
    }
}

/// A CPTP map as a Kraus set, with the physical duration it models.
#[derive(Clone, Debug)]
pub struct Channel {
    pub kraus: Vec<LocalOp>,
    pub duration: f64,
}

impl Channel {
    /// Maximum deviation of Σ K†K from the identity.
    pub fn trace_preservation_defect(&self) -> f64 {
        let d = self.kraus[0].dim;
        let mut acc = vec![C64::new(0.0, 0.0); d * d];
        for k in &self.kraus {
            for r in 0..d {
                for c in 0..d {
                    let mut s = C64::new(0.0, 0.0);
                    for j in 0..d {
                        s += k.at(j, r).conj() * k.at(j, c);
                    }
                    acc[r * d + c] += s;
                }
            }
        }
        let mut dev = 0.0f64;
        for r in 0..d {
            for c in 0..d {
                let expect = if r == c { 1.0 } else { 0.0 };
                dev = dev.max((acc[r * d + c] - C64::new(expect, 0.0)).norm());
            }
        }
        dev
    }

    /// Applies the channel to a small density matrix directly (test helper
    /// and single-mode workloads).
    pub fn apply_dense(&self, rho: &DMatrix<C64>) -> DMatrix<C64> {
        let d = rho.nrows();
        let mut out = DMatrix::<C64>::zeros(d, d);
        for k in &self.kraus {
            let mut km = DMatrix::<C64>::zeros(d, d);
            for r in 0..d {
                for c in 0..d {
                    km[(r, c)] = k.at(r, c);
                }
            }
            out += &km * rho * km.adjoint();
        }
        out
    }
}

/// Truncated annihilation operator, `a[n-1, n] = √n`.
pub fn annihilation(d: usize) -> DMatrix<f64> {
    let mut a = DMatrix::<f64>::zeros(d, d);
    for n in 1..d {
        a[(n - 1, n)] = (n as f64).sqrt();
    }
    a
}

fn kron(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    let mut out = DMatrix::<f64>::zeros(ar * br, ac * bc);
    for i in 0..ar {
        for j in 0..ac {
            let v = a[(i, j)];
            if v == 0.0 {
                continue;
            }
            for k in 0..br {
                for l in 0..bc {
                    out[(i * br + k, j * bc + l)] = v * b[(k, l)];
                }
            }
        }
    }
    out
}

/// Lindblad dissipator as a superoperator in column-stacking convention:
/// `Σ_i C̄_i ⊗ C_i − ½ I ⊗ C_i†C_i − ½ (C_i†C_i)ᵀ ⊗ I`.
fn dissipator_superop(collapse: &[DMatrix<f64>], d: usize) -> DMatrix<f64> {
    let eye = DMatrix::<f64>::identity(d, d);
    let mut s = DMatrix::<f64>::zeros(d * d, d * d);
    for c in collapse {
        let ctc = c.transpose() * c;
        s += kron(c, c);
        s -= 0.5 * kron(&eye, &ctc);
        s -= 0.5 * kron(&ctc.transpose(), &eye);
    }
    s
}

/// Matrix exponential by scaling and squaring with a Taylor series. Fine for
/// the small generators used here.
fn expm(a: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    let norm = a.amax() * n as f64;
    let squarings = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as usize
    } else {
        0
    };
    let scaled = a / 2f64.powi(squarings as i32);
    let mut result = DMatrix::<f64>::identity(n, n);
    let mut term = DMatrix::<f64>::identity(n, n);
    for k in 1..=24 {
        term = &term * &scaled / k as f64;
        result += &term;
        if term.amax() < 1e-18 {
            break;
        }
    }
    for _ in 0..squarings {
        result = &result * &result;
    }
    result
}

/// Extracts Kraus operators from a real superoperator by diagonalizing its
/// Choi matrix. Eigenvalues below the floor are dropped; small negative
/// eigenvalues (numerical CP violations) are rejected beyond 1e-9.
fn kraus_from_superop(e: &DMatrix<f64>, d: usize) -> Vec<LocalOp> {
    let mut choi = DMatrix::<f64>::zeros(d * d, d * d);
    for i in 0..d {
        for j in 0..d {
            for a in 0..d {
                for b in 0..d {
                    choi[(i * d + a, j * d + b)] = e[(a + d * b, i + d * j)];
                }
            }
        }
    }
    // Hermiticity-preserving maps give a symmetric Choi matrix.
    let sym = 0.5 * (&choi + choi.transpose());
    let (eigenvalues, eigenvectors) = sym_eigen(&sym);
    let mut kraus = Vec::new();
    for (k, &lam) in eigenvalues.iter().enumerate() {
        assert!(lam > -1e-9, "channel is not completely positive: λ = {lam}");
        if lam <= 1e-14 {
            continue;
        }
        let w = lam.sqrt();
        let mut elems = vec![C64::new(0.0, 0.0); d * d];
        for a in 0..d {
            for i in 0..d {
                elems[a * d + i] = C64::new(w * eigenvectors[(i * d + a, k)], 0.0);
            }
        }
        kraus.push(LocalOp { dim: d, elems });
    }
    kraus
}

/// Simultaneous decay, thermal excitation, and pure dephasing over `tau`:
/// `exp(tau·𝓛)` with collapse operators `√(κ(1+n̄)) a`, `√(κ n̄) a†`,
/// `√γ_φ n̂` on the d-level truncation.
pub fn local_noise_channel(tau: f64, kappa: f64, n_bar: f64, gamma_phi: f64, d: usize) -> Channel {
    assert!(tau >= 0.0 && kappa >= 0.0 && n_bar >= 0.0 && gamma_phi >= 0.0 && d >= 2);
    if tau == 0.0 || (kappa == 0.0 && gamma_phi == 0.0) {
        return Channel {
            kraus: vec![LocalOp::identity(d)],
            duration: tau,
        };
    }
    let a = annihilation(d);
    let mut collapse = Vec::new();
    if kappa > 0.0 {
        collapse.push((kappa * (1.0 + n_bar)).sqrt() * &a);
        if n_bar > 0.0 {
            collapse.push((kappa * n_bar).sqrt() * a.transpose());
        }
    }
    if gamma_phi > 0.0 {
        let mut num = DMatrix::<f64>::zeros(d, d);
        for n in 0..d {
            num[(n, n)] = n as f64;
        }
        collapse.push(gamma_phi.sqrt() * num);
    }
    let gen = dissipator_superop(&collapse, d) * tau;
    let kraus = kraus_from_superop(&expm(&gen), d);
    let channel = Channel {
        kraus,
        duration: tau,
    };
    debug_assert!(channel.trace_preservation_defect() < 1e-10);
    channel
}

/// Photon loss and thermal excitation of an idle mode for a time `tau`.
pub fn thermal_decay_channel(tau: f64, t1: f64, n_bar: f64, d: usize) -> Channel {
    assert!(t1 > 0.0);
    local_noise_channel(tau, 1.0 / t1, n_bar, 0.0, d)
}

/// Pure dephasing: `ρ_jk → ρ_jk · exp(-γ_φ τ (j-k)²/2)`. Built directly from
/// the eigendecomposition of the (positive definite) Gaussian damping kernel,
/// which yields diagonal Kraus operators.
pub fn dephasing_channel(tau: f64, gamma_phi: f64, d: usize) -> Channel {
    assert!(tau >= 0.0 && gamma_phi >= 0.0 && d >= 2);
    if tau == 0.0 || gamma_phi == 0.0 {
        return Channel {
            kraus: vec![LocalOp::identity(d)],
            duration: tau,
        };
    }
    let mut kernel = DMatrix::<f64>::zeros(d, d);
    for j in 0..d {
        for k in 0..d {
            let djk = j as f64 - k as f64;
            kernel[(j, k)] = (-0.5 * gamma_phi * tau * djk * djk).exp();
        }
    }
    let (eigenvalues, eigenvectors) = sym_eigen(&kernel);
    let mut kraus = Vec::new();
    for (k, &lam) in eigenvalues.iter().enumerate() {
        assert!(lam > -1e-9, "dephasing kernel must be positive semidefinite");
        if lam <= 1e-14 {
            continue;
        }
        let w = lam.sqrt();
        let diag: Vec<C64> = (0..d)
            .map(|j| C64::new(w * eigenvectors[(j, k)], 0.0))
            .collect();
        kraus.push(LocalOp::diagonal(&diag));
    }
    let channel = Channel {
        kraus,
        duration: tau,
    };
    debug_assert!(channel.trace_preservation_defect() < 1e-10);
    channel
}

#[cfg(test)]
mod tests {
    use super::*;

    fn superop_of_channel(ch: &Channel) -> DMatrix<C64> {
        let d = ch.kraus[0].dim;
        let mut e = DMatrix::<C64>::zeros(d * d, d * d);
        for i in 0..d {
            for j in 0..d {
                let mut basis = DMatrix::<C64>::zeros(d, d);
                basis[(i, j)] = C64::new(1.0, 0.0);
                let img = ch.apply_dense(&basis);
                for a in 0..d {
                    for b in 0..d {
                        e[(a + d * b, i + d * j)] = img[(a, b)];
                    }
                }
            }
        }
        e
    }

    #[test]
    fn zero_time_is_identity() {
        let ch = thermal_decay_channel(0.0, 100.0, 0.01, 3);
        assert_eq!(ch.kraus.len(), 1);
        let rho = DMatrix::<C64>::identity(3, 3) / C64::new(3.0, 0.0);
        let out = ch.apply_dense(&rho);
        assert!((out - rho).map(|z| z.norm()).max() < 1e-15);
    }

    #[test]
    fn excited_population_decays_exponentially() {
        let t1 = 75.0;
        for d in [2usize, 3, 4] {
            for tau in [0.5, 5.0, 40.0] {
                let ch = thermal_decay_channel(tau, t1, 0.0, d);
                let mut rho = DMatrix::<C64>::zeros(d, d);
                rho[(1, 1)] = C64::new(1.0, 0.0);
                let out = ch.apply_dense(&rho);
                let expect = (-tau / t1).exp();
                assert!(
                    (out[(1, 1)].re - expect).abs() < 1e-8,
                    "d={d} tau={tau}: {} vs {expect}",
                    out[(1, 1)].re
                );
            }
        }
    }

    #[test]
    fn long_time_fixed_point_is_vacuum() {
        let ch = thermal_decay_channel(5000.0, 10.0, 0.0, 4);
        for start in 0..4 {
            let mut rho = DMatrix::<C64>::zeros(4, 4);
            rho[(start, start)] = C64::new(1.0, 0.0);
            let out = ch.apply_dense(&rho);
            assert!((out[(0, 0)].re - 1.0).abs() < 1e-8, "start={start}");
        }
    }

    #[test]
    fn matches_generalized_amplitude_damping_at_two_levels() {
        // Closed-form solution of the two-level thermal master equation.
        let (kappa, n_bar, tau) = (1.0 / 30.0, 0.15, 7.0);
        let ch = local_noise_channel(tau, kappa, n_bar, 0.0, 2);
        let rate = kappa * (1.0 + 2.0 * n_bar);
        let decay = (-rate * tau).exp();
        let steady = n_bar / (1.0 + 2.0 * n_bar);
        let coh = (-0.5 * rate * tau).exp();

        let mut expect = DMatrix::<C64>::zeros(4, 4);
        // Column vec(|0⟩⟨0|): ρ'11 = steady (1 - decay).
        let a = steady * (1.0 - decay);
        expect[(0, 0)] = C64::new(1.0 - a, 0.0);
        expect[(3, 0)] = C64::new(a, 0.0);
        // Column vec(|1⟩⟨1|): ρ'11 = steady (1 - decay) + decay.
        let b = steady * (1.0 - decay) + decay;
        expect[(0, 3)] = C64::new(1.0 - b, 0.0);
        expect[(3, 3)] = C64::new(b, 0.0);
        // Coherences damp at half the population rate.
        expect[(1, 1)] = C64::new(coh, 0.0);
        expect[(2, 2)] = C64::new(coh, 0.0);

        let got = superop_of_channel(&ch);
        for r in 0..4 {
            for c in 0..4 {
                assert!(
                    (got[(r, c)] - expect[(r, c)]).norm() < 1e-10,
                    "superop mismatch at ({r},{c}): {} vs {}",
                    got[(r, c)],
                    expect[(r, c)]
                );
            }
        }
    }

    #[test]
    fn dephasing_leaves_diagonal_and_damps_coherences() {
        let (gamma, tau, d) = (0.02, 11.0, 4);
        let ch = dephasing_channel(tau, gamma, d);
        let mut rho = DMatrix::<C64>::zeros(d, d);
        for j in 0..d {
            for k in 0..d {
                rho[(j, k)] = C64::new(0.25, if j == k { 0.0 } else { 0.05 });
            }
        }
        let out = ch.apply_dense(&rho);
        for j in 0..d {
            assert!((out[(j, j)] - rho[(j, j)]).norm() < 1e-12);
            for k in 0..d {
                let factor = (-0.5 * gamma * tau * ((j as f64 - k as f64).powi(2))).exp();
                assert!(
                    (out[(j, k)] - rho[(j, k)] * factor).norm() < 1e-12,
                    "({j},{k})"
                );
            }
        }
        // The 0-2 coherence decays as exp(-2γτ), from dρ/dt = -γ(j-k)²ρ/2.
        let factor02 = (-2.0 * gamma * tau).exp();
        assert!((out[(0, 2)] - rho[(0, 2)] * factor02).norm() < 1e-12);
    }

    #[test]
    fn gamma_zero_is_identity() {
        let ch = dephasing_channel(3.0, 0.0, 3);
        assert_eq!(ch.kraus.len(), 1);
        assert!(ch.trace_preservation_defect() < 1e-15);
    }

    #[test]
    fn channels_are_trace_preserving() {
        for (tau, kappa, n_bar, gamma) in [
            (0.25, 1.0 / 1500.0, 0.001, 0.0116),
            (1.47, 1.0 / 562.0, 0.02, 0.2),
            (10.0, 0.05, 0.3, 0.01),
        ] {
            for d in [2usize, 3, 4] {
                let ch = local_noise_channel(tau, kappa, n_bar, gamma, d);
                assert!(
                    ch.trace_preservation_defect() < 1e-10,
                    "defect {} at d={d}",
                    ch.trace_preservation_defect()
                );
            }
        }
    }
}
