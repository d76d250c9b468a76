//! Dispersive readout and timing formulas: Ramsey parity probabilities,
//! bitwise photon counting with feedforward, coupler-inherited rates, and
//! experiment wall time.
//!
//! Run with: cargo run --example readout

use bosonic_mipt::hardware::*;

fn main() {
    let chi = 2.0 * std::f64::consts::PI * 2.0; // 2π × 2 MHz, times in μs

    println!("Ramsey parity readout (T = π/χ):");
    for n in 0..=6u32 {
        let (p_g, p_e) = ramsey_probs(
            n,
            &DispersiveParams {
                chi,
                idle_time: std::f64::consts::PI / chi,
                phase: 0.0,
            },
        );
        println!("  n={n}: P_g = {p_g:.3}, P_e = {p_e:.3}");
    }

    let n = 5;
    let (bits, trace) = photon_count_bits(n, 3, chi).expect("deterministic protocol");
    println!("\nbitwise counting of n = {n}: bits (lsb first) = {bits:?}");
    for step in trace {
        println!(
            "  bit {}: feedforward ñ = {}, P_g = {:.3} -> {}",
            step.bit_index, step.revealed, step.p_g, step.bit
        );
    }

    println!("\ncoupler-inherited cavity rates (pink dephasing spectrum):");
    for (label, g, delta) in [("mode 1", 0.533, 2.261), ("mode 2", 0.592, 2.590)] {
        let rates = effective_rates(
            g,
            delta,
            1.0 / 50.0,
            1.0 / 5.0,
            0.02,
            NoiseSpectrum::Pink,
            1.0 / 1500.0,
        );
        println!(
            "  {label}: 1/κ̃ = {:.0} μs, 1/γ̃ = {:.0} μs",
            1.0 / rates.kappa,
            1.0 / rates.gamma
        );
    }

    println!("\nwall time, L=4, S=M=8, p=1:");
    for family in [CircuitFamily::Bsfp, CircuitFamily::Bsrp, CircuitFamily::WithHubbard] {
        let params = WallTimeParams {
            family,
            ..Default::default()
        };
        println!("  {family:?}: {:.1} μs", wall_time(4, 8, 8, 1.0, &params));
    }
    println!("state preparation (L=4): {:.1} μs", state_prep_time_us(4));
}
