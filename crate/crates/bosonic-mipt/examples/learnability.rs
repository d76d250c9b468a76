//! Decoder accuracy A(p): how well Born-probability replay distinguishes the
//! two candidate initial states from a measurement record.
//!
//! Run with: cargo run --release --example learnability

use bosonic_mipt::protocols::{learnability_ensemble, run_learnability, CircuitConfig};

fn main() {
    const TRIALS: usize = 400;
    let l = 6;

    println!("decoder accuracy, L = {l}, depth 4L, {TRIALS} trials per point");
    println!("{:>6} {:>10} {:>10}", "p", "A", "sem");
    for p in [0.0, 0.1, 0.2, 0.35, 0.5, 0.75, 1.0] {
        let mut cfg = CircuitConfig::haar(l);
        cfg.meas_rate = p;
        cfg.seed = 2;
        let (point, _) = learnability_ensemble(&cfg, TRIALS, None).expect("trials");
        println!("{p:>6.2} {:>10.4} {:>10.4}", point.accuracy, point.sem);
    }

    // A single trial, showing what the decoder sees.
    let mut cfg = CircuitConfig::haar(l);
    cfg.meas_rate = 0.5;
    cfg.seed = 3;
    let trial = run_learnability(&cfg, 12345).expect("trial");
    println!(
        "\nsample trial: true branch {}, {} recorded outcomes, log P0 = {:.3}, log P1 = {:.3} -> {:?} (credit {})",
        trial.alpha_true,
        trial.record.len(),
        trial.log_p0,
        trial.log_p1,
        trial.prediction,
        trial.credit
    );
}
