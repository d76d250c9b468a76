//! Ancilla purification curves S_R(p, t) for two system sizes, with a
//! crossing estimate of the resulting S_R(p, t=2L) curves.
//!
//! Run with: cargo run --release --example purification

use bosonic_mipt::analysis::{crossing_estimate, Curve};
use bosonic_mipt::protocols::{purification_ensemble, CircuitConfig};

fn main() {
    const REALIZATIONS: usize = 400;
    let p_grid = [0.1, 0.2, 0.3, 0.4, 0.5];
    let sizes = [4usize, 6];

    let mut curves = Vec::new();
    for &l in &sizes {
        let mut points = Vec::new();
        println!("L = {l} ({REALIZATIONS} realizations per point)");
        println!("{:>6} {:>10} {:>10}", "p", "S_R(2L)", "sem");
        for &p in &p_grid {
            let mut cfg = CircuitConfig::haar(l);
            cfg.monitored_layers = 2 * l;
            cfg.meas_rate = p;
            cfg.seed = 1;
            let stats = purification_ensemble(&cfg, REALIZATIONS, None).expect("ensemble");
            let last = &stats.ancilla[2 * l];
            println!("{p:>6.2} {:>10.4} {:>10.4}", last.mean, last.sem);
            points.push((p, last.mean, last.sem));
        }
        curves.push(Curve::from_points(points));
        println!();
    }

    match crossing_estimate(&curves[0], &curves[1]) {
        Ok(roots) => println!(
            "S_R(p, t=2L) curves for L=4 and L=6 cross at p* = {:.3} ± {:.3}",
            roots[0].p_star, roots[0].sigma
        ),
        Err(e) => println!("no crossing found: {e}"),
    }
}
