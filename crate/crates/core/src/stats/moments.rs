use crate::{Error, Result};

pub fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    values.iter().sum::<f64>() / values.len() as f64
}

/// Standard deviation with the 1/n normalisation.
pub fn population_stddev(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let m = mean(values);
    let var = values.iter().map(|x| (x - m).powi(2)).sum::<f64>() / values.len() as f64;
    var.sqrt()
}

/// Third standardised moment, `<(X - <X>)^3> / sigma^3`, with population moments.
///
/// A constant series has no defined skewness and yields
/// [`Error::UndefinedSkewness`] rather than zero.
pub fn skewness(values: &[f64]) -> Result<f64> {
    if values.len() < 3 {
        return Err(Error::SeriesTooShort { needed: 3, got: values.len() });
    }
    let first = values[0];
    if values.iter().all(|&x| x == first) {
        return Err(Error::UndefinedSkewness);
    }
    let n = values.len() as f64;
    let m = mean(values);
    let (m2, m3) = values.iter().fold((0.0, 0.0), |(s2, s3), &x| {
        let d = x - m;
        (s2 + d * d, s3 + d * d * d)
    });
    let (m2, m3) = (m2 / n, m3 / n);
    let scale = values.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    let sigma = m2.sqrt();
    if sigma <= scale * 1e-12 {
        return Err(Error::UndefinedSkewness);
    }
    Ok(m3 / (sigma * sigma * sigma))
}
