//! Pareto sampling by inverse transform.

use rand::Rng;

/// Pareto distribution parameterised by shape and mean (shape > 1).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Pareto {
    pub shape: f64,
    pub scale: f64,
}

impl Pareto {
    /// `scale = mean * (shape - 1) / shape`, so the configured mean is exact.
    pub fn with_mean(shape: f64, mean: f64) -> Self {
        Pareto { shape, scale: mean * (shape - 1.0) / shape }
    }

    pub fn with_scale(shape: f64, scale: f64) -> Self {
        Pareto { shape, scale }
    }

    pub fn mean(&self) -> f64 {
        self.shape * self.scale / (self.shape - 1.0)
    }

    /// `P[X > x] = (scale / x)^shape` for `x >= scale`.
    pub fn survival(&self, x: f64) -> f64 {
        if x <= self.scale {
            1.0
        } else {
            (self.scale / x).powf(self.shape)
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = 1.0 - rng.gen::<f64>(); // (0, 1]
        self.scale * u.powf(-1.0 / self.shape)
    }

    /// Residual life seen from a random instant of a stationary renewal process.
    ///
    /// Survival is `1 - x (shape-1) / (shape scale)` below the scale and
    /// `(scale / x)^(shape-1) / shape` above it.
    pub fn sample_residual<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = 1.0 - rng.gen::<f64>();
        let b = self.shape;
        if u >= 1.0 / b {
            (1.0 - u) * b * self.scale / (b - 1.0)
        } else {
            self.scale * (u * b).powf(-1.0 / (b - 1.0))
        }
    }
}
