//! Residual-entropy error budget: how much each noise channel lifts the
//! saturated ancilla entropy above the ideal curve.
//!
//! Uses a shortened circuit so the demo finishes in about a minute; the
//! acceptance suite runs the full-depth version.
//!
//! Run with: cargo run --release --example noise_budget

use bosonic_mipt::noise::{noise_budget, NoiseParams, NoiseToggles};
use bosonic_mipt::protocols::CircuitConfig;

fn main() {
    let mut cfg = CircuitConfig::checkerboard(4);
    cfg.scramble_layers = 4;
    cfg.monitored_layers = 4;
    cfg.meas_rate = 1.0;
    cfg.seed = 9;

    let n_noisy = 60;
    let n_ideal = 1000;
    let cases = [
        ("all channels", NoiseToggles::all_on()),
        ("decay only", NoiseToggles::decay_only()),
        (
            "beam splitter only",
            NoiseToggles {
                beam_splitter: true,
                ..NoiseToggles::all_off()
            },
        ),
        (
            "on-site gate only",
            NoiseToggles {
                snap: true,
                ..NoiseToggles::all_off()
            },
        ),
        (
            "readout only",
            NoiseToggles {
                measurement: true,
                ..NoiseToggles::all_off()
            },
        ),
    ];

    for t1_ms in [1.5, 10.0] {
        let noise = NoiseParams {
            t1_cavity_us: t1_ms * 1000.0,
            ..Default::default()
        };
        println!("cavity T1 = {t1_ms} ms ({n_noisy} noisy trajectories per row)");
        for (label, toggles) in &cases {
            let budget =
                noise_budget(&cfg, &noise, toggles, n_noisy, n_ideal, None).expect("budget");
            println!(
                "  {label:>20} [{:>18}]: residual = {:+.4} ± {:.4}",
                budget.channel_mask, budget.residual, budget.residual_sem
            );
        }
        println!();
    }
}
