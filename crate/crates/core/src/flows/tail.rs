//! Complementary CDF of per-time-unit flow sizes and its power-law tail.

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::export::{num, write_table};
use crate::stats::linear_fit;
use crate::{Error, Result};

/// Tails with exponent below this have infinite variance.
pub const HEAVY_TAIL_ALPHA: f64 = 2.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EccdfPoint {
    pub n_p: u64,
    /// `P[N > n_p]`.
    pub p: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailFit {
    pub alpha: f64,
    pub intercept: f64,
    pub regression_r: f64,
    pub n_min: u64,
    pub points: Vec<EccdfPoint>,
}

impl TailFit {
    pub fn is_heavy_tailed(&self) -> bool {
        is_heavy_tailed(self.alpha)
    }
}

pub fn is_heavy_tailed(alpha: f64) -> bool {
    alpha > 0.0 && alpha < HEAVY_TAIL_ALPHA
}

/// `P[N > n]` at each distinct observed `n`, ascending.
///
/// The largest value always gets `P = 0`; callers plotting on log axes drop it.
pub fn eccdf(counts: &[u64]) -> Vec<EccdfPoint> {
    let mut tally: BTreeMap<u64, u64> = BTreeMap::new();
    for &c in counts {
        *tally.entry(c).or_default() += 1;
    }
    let total = counts.len() as f64;
    let mut above = counts.len() as u64;
    tally
        .into_iter()
        .map(|(n_p, k)| {
            above -= k;
            EccdfPoint { n_p, p: above as f64 / total }
        })
        .collect()
}

/// Least-squares fit of `log10 P` against `log10 n_p` for `n_p >= n_min`, `P > 0`.
pub fn fit_tail(points: &[EccdfPoint], n_min: u64) -> Result<TailFit> {
    let used: Vec<EccdfPoint> = points
        .iter()
        .copied()
        .filter(|pt| pt.n_p >= n_min && pt.n_p > 0 && pt.p > 0.0)
        .collect();
    if used.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "tail fit needs 3 points with n_p >= {n_min} and P > 0, found {}",
            used.len()
        )));
    }
    let xs: Vec<f64> = used.iter().map(|pt| (pt.n_p as f64).log10()).collect();
    let ys: Vec<f64> = used.iter().map(|pt| pt.p.log10()).collect();
    let fit = linear_fit(&xs, &ys)?;
    Ok(TailFit {
        alpha: -fit.slope,
        intercept: fit.intercept,
        regression_r: fit.pearson_r,
        n_min,
        points: used,
    })
}

/// `n_p,eccdf` table, zero-probability point omitted.
pub fn write_llcd_csv<W: Write>(points: &[EccdfPoint], out: W) -> Result<()> {
    write_table(
        out,
        &["n_p", "eccdf"],
        points.iter().filter(|pt| pt.p > 0.0).map(|pt| [pt.n_p.to_string(), num(pt.p)]),
    )
}
