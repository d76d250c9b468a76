//! Initialization equivalence: the experimentally preparable checkerboard
//! state plus 2L scrambling layers tracks the Haar-pair curves.
//!
//! Run with: cargo run --release --example checkerboard_vs_haar

use bosonic_mipt::protocols::{purification_ensemble, CircuitConfig};

fn main() {
    const REALIZATIONS: usize = 400;
    let l = 6;
    let p = 0.4;

    let mut haar = CircuitConfig::haar(l);
    haar.monitored_layers = 2 * l;
    haar.meas_rate = p;
    haar.seed = 5;
    let a = purification_ensemble(&haar, REALIZATIONS, None).expect("haar ensemble");

    let mut cb = CircuitConfig::checkerboard(l);
    cb.meas_rate = p;
    cb.seed = 6;
    let b = purification_ensemble(&cb, REALIZATIONS, None).expect("checkerboard ensemble");

    println!("L = {l}, p = {p}, {REALIZATIONS} realizations each");
    println!(
        "{:>4} {:>12} {:>12} {:>8}",
        "t", "haar", "checkerboard", "|Δ|"
    );
    for t in 0..=2 * l {
        let (ra, rb) = (&a.ancilla[t], &b.ancilla[t]);
        println!(
            "{t:>4} {:>7.4}±{:.4} {:>7.4}±{:.4} {:>8.4}",
            ra.mean,
            ra.sem,
            rb.mean,
            rb.sem,
            (ra.mean - rb.mean).abs()
        );
    }
}
