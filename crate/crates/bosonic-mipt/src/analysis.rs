//! Post-hoc analysis: crossing estimation between entropy curves of two
//! sizes, and the scaling-collapse coordinate transform. No fitting happens
//! here; the outputs are plot-ready tables.

use serde::{Deserialize, Serialize};

use crate::entropy::EntropyRecord;
use crate::error::{Error, Result};

/// Candidate critical parameters for the collapse transform.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalysisParams {
    pub z: f64,
    pub p_c: f64,
}

/// One curve S(p) at fixed effective time, with standard errors.
#[derive(Clone, Debug, PartialEq)]
pub struct Curve {
    pub p: Vec<f64>,
    pub mean: Vec<f64>,
    pub sem: Vec<f64>,
}

impl Curve {
    pub fn from_points(mut pts: Vec<(f64, f64, f64)>) -> Self {
        pts.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        Self {
            p: pts.iter().map(|x| x.0).collect(),
            mean: pts.iter().map(|x| x.1).collect(),
            sem: pts.iter().map(|x| x.2).collect(),
        }
    }
}

/// A crossing of two curves with its propagated uncertainty.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Crossing {
    pub p_star: f64,
    pub sigma: f64,
}

/// Estimates where two curves cross by piecewise-linear interpolation of
/// their difference. Returns every root found; more than one means the
/// crossing is ambiguous and callers should flag it.
pub fn crossing_estimate(a: &Curve, b: &Curve) -> Result<Vec<Crossing>> {
    if a.p.len() < 2 || a.p.len() != b.p.len() {
        return Err(Error::GridMismatch);
    }
    if a.p.iter().zip(&b.p).any(|(x, y)| (x - y).abs() > 1e-12) {
        return Err(Error::GridMismatch);
    }
    let diff: Vec<f64> = a.mean.iter().zip(&b.mean).map(|(x, y)| x - y).collect();
    let var: Vec<f64> = a
        .sem
        .iter()
        .zip(&b.sem)
        .map(|(x, y)| x * x + y * y)
        .collect();

    let mut roots = Vec::new();
    for i in 0..diff.len() - 1 {
        let (d0, d1) = (diff[i], diff[i + 1]);
        if d0 == 0.0 {
            // Exact node root; count it once, and only when the curves
            // actually separate on at least one side. The uncertainty comes
            // from the node's SEM through the local slope of the difference.
            let sep_left = i > 0 && diff[i - 1] != 0.0;
            let sep_right = d1 != 0.0;
            if sep_left || sep_right {
                let slope = if sep_left && sep_right {
                    (diff[i + 1] - diff[i - 1]) / (a.p[i + 1] - a.p[i - 1])
                } else if sep_right {
                    (diff[i + 1] - d0) / (a.p[i + 1] - a.p[i])
                } else {
                    (d0 - diff[i - 1]) / (a.p[i] - a.p[i - 1])
                };
                let sigma = if slope != 0.0 {
                    var[i].sqrt() / slope.abs()
                } else {
                    0.0
                };
                roots.push(Crossing {
                    p_star: a.p[i],
                    sigma,
                });
            }
            continue;
        }
        if d0 * d1 < 0.0 {
            let h = a.p[i + 1] - a.p[i];
            let denom = d0 - d1;
            let p_star = a.p[i] + h * d0 / denom;
            // Propagate the four bracketing SEMs through the interpolation.
            let dp_dd0 = -h * d1 / (denom * denom);
            let dp_dd1 = h * d0 / (denom * denom);
            let sigma = (dp_dd0 * dp_dd0 * var[i] + dp_dd1 * dp_dd1 * var[i + 1]).sqrt();
            roots.push(Crossing { p_star, sigma });
        }
    }
    if roots.is_empty() {
        return Err(Error::NoCrossing);
    }
    Ok(roots)
}

/// One row of the collapse table: (L, p, t/L^z, mean, sem).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CollapseRow {
    pub l: usize,
    pub p: f64,
    pub x: f64,
    pub mean: f64,
    pub sem: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CollapseTable {
    /// The grid point actually used (nearest to the requested p_c).
    pub selected_p: f64,
    pub requested_p: f64,
    pub z: f64,
    pub rows: Vec<CollapseRow>,
}

/// Filters records to the grid point nearest `p_c` and rescales time to
/// t/L^z. Pure coordinate transform; row count is preserved within the
/// selected p.
pub fn collapse_transform(
    records: &[EntropyRecord],
    z: f64,
    p_c: f64,
) -> Result<CollapseTable> {
    if records.is_empty() {
        return Err(Error::InvalidConfig("no records to transform".into()));
    }
    let mut best = records[0].p;
    for r in records {
        if (r.p - p_c).abs() < (best - p_c).abs() {
            best = r.p;
        }
    }
    let rows: Vec<CollapseRow> = records
        .iter()
        .filter(|r| r.p == best)
        .map(|r| CollapseRow {
            l: r.l,
            p: r.p,
            x: r.t as f64 / (r.l as f64).powf(z),
            mean: r.mean,
            sem: r.sem,
        })
        .collect();
    if rows.is_empty() {
        return Err(Error::EmptySelection { nearest: best });
    }
    Ok(CollapseTable {
        selected_p: best,
        requested_p: p_c,
        z,
        rows,
    })
}
