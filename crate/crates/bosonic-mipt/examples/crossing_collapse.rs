//! Post-hoc analysis on a generated dataset: write an entropy CSV, read it
//! back, estimate size-pair crossings, and emit a scaling-collapse table.
//!
//! Run with: cargo run --release --example crossing_collapse

use bosonic_mipt::analysis::{collapse_transform, crossing_estimate, Curve};
use bosonic_mipt::io::{read_entropy_csv, write_entropy_csv};
use bosonic_mipt::protocols::{purification_ensemble, CircuitConfig};

fn main() {
    const REALIZATIONS: usize = 300;
    let sizes = [4usize, 6];
    let p_grid = [0.1, 0.25, 0.4, 0.55, 0.7];

    let mut records = Vec::new();
    for &l in &sizes {
        for &p in &p_grid {
            let mut cfg = CircuitConfig::haar(l);
            cfg.monitored_layers = 2 * l;
            cfg.meas_rate = p;
            cfg.seed = 4;
            let stats = purification_ensemble(&cfg, REALIZATIONS, None).expect("ensemble");
            records.extend(stats.ancilla);
        }
    }

    // Round-trip through the CSV format.
    let mut buf = Vec::new();
    write_entropy_csv(&mut buf, &records).unwrap();
    let records = read_entropy_csv(&buf[..]).expect("parse back");
    println!("{} rows round-tripped through CSV", records.len());

    // Crossing of the t = 2L curves.
    let curve = |l: usize| {
        Curve::from_points(
            records
                .iter()
                .filter(|r| r.l == l && r.t == 2 * l)
                .map(|r| (r.p, r.mean, r.sem))
                .collect(),
        )
    };
    match crossing_estimate(&curve(4), &curve(6)) {
        Ok(roots) => println!("crossing: p* = {:.3} ± {:.3}", roots[0].p_star, roots[0].sigma),
        Err(e) => println!("crossing: {e}"),
    }

    // Collapse table at the nearest grid point to the requested p_c.
    let table = collapse_transform(&records, 1.0, 0.3).expect("collapse");
    println!(
        "collapse at p = {} (requested 0.3), abscissa t/L^z with z = {}:",
        table.selected_p, table.z
    );
    for row in table.rows.iter().filter(|r| r.x > 0.0) {
        println!(
            "  L={} t/L={:.3} S_R={:.4} ± {:.4}",
            row.l, row.x, row.mean, row.sem
        );
    }
}
