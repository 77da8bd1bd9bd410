use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Ordinary least-squares line `y = slope * x + intercept`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegressionFit {
    pub slope: f64,
    pub intercept: f64,
    /// Pearson correlation of the fitted points; 0 when `y` is constant.
    pub pearson_r: f64,
    pub n: usize,
}

struct Moments {
    mx: f64,
    my: f64,
    sxx: f64,
    syy: f64,
    sxy: f64,
}

fn centred(xs: &[f64], ys: &[f64]) -> Moments {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    Moments { mx, my, sxx, syy, sxy }
}

fn check_lengths(xs: &[f64], ys: &[f64]) -> Result<()> {
    if xs.len() != ys.len() {
        return Err(Error::InvalidArgument(format!(
            "length mismatch: {} vs {}",
            xs.len(),
            ys.len()
        )));
    }
    if xs.len() < 2 {
        return Err(Error::InsufficientData(format!("need at least 2 points, got {}", xs.len())));
    }
    Ok(())
}

fn correlation(m: &Moments) -> f64 {
    (m.sxy / (m.sxx.sqrt() * m.syy.sqrt())).clamp(-1.0, 1.0)
}

/// Pearson product-moment correlation.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Result<f64> {
    check_lengths(xs, ys)?;
    let m = centred(xs, ys);
    if m.sxx == 0.0 {
        return Err(Error::ZeroVariance("x"));
    }
    if m.syy == 0.0 {
        return Err(Error::ZeroVariance("y"));
    }
    Ok(correlation(&m))
}

pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Result<RegressionFit> {
    check_lengths(xs, ys)?;
    let m = centred(xs, ys);
    if m.sxx == 0.0 {
        return Err(Error::ZeroVariance("regressor"));
    }
    let slope = m.sxy / m.sxx;
    let pearson_r = if m.syy == 0.0 { 0.0 } else { correlation(&m) };
    Ok(RegressionFit {
        slope,
        intercept: m.my - slope * m.mx,
        pearson_r,
        n: xs.len(),
    })
}
