use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::error::{Error, Result};

const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Gaussian kernel density estimate over a one-dimensional sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KdeFit {
    points: Vec<f64>,
    bandwidth: f64,
}

fn std_normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / std::f64::consts::SQRT_2)
}

impl KdeFit {
    /// Fits the estimate. Without an explicit bandwidth Scott's rule
    /// `h = sd * n^(-1/5)` is used, which needs a non-degenerate sample.
    pub fn fit(samples: &[f64], bandwidth: Option<f64>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::domain("KDE needs at least one sample"));
        }
        if samples.iter().any(|x| !x.is_finite()) {
            return Err(Error::domain("KDE samples must be finite"));
        }
        let h = match bandwidth {
            Some(h) if h > 0.0 && h.is_finite() => h,
            Some(h) => return Err(Error::domain(format!("bandwidth must be positive, got {h}"))),
            None => scott_bandwidth(samples)?,
        };
        Ok(Self {
            points: samples.to_vec(),
            bandwidth: h,
        })
    }

    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn pdf(&self, x: f64) -> f64 {
        let h = self.bandwidth;
        let sum: f64 = self
            .points
            .iter()
            .map(|xi| {
                let z = (x - xi) / h;
                (-0.5 * z * z).exp()
            })
            .sum();
        sum * INV_SQRT_2PI / (h * self.points.len() as f64)
    }

    /// Mixture of kernel CDFs, `(1/n) * sum F_K((x - x_i) / h)`.
    pub fn cdf(&self, x: f64) -> f64 {
        let h = self.bandwidth;
        let sum: f64 = self.points.iter().map(|xi| std_normal_cdf((x - xi) / h)).sum();
        sum / self.points.len() as f64
    }

    /// Mass the untruncated estimate puts on `[0, inf)`.
    pub fn nonnegative_mass(&self) -> f64 {
        1.0 - self.cdf(0.0)
    }

    /// CDF of the distribution actually produced by [`KdeFit::sample`],
    /// i.e. the estimate conditioned on non-negative values.
    pub fn sampling_cdf(&self, x: f64) -> f64 {
        if x < 0.0 {
            return 0.0;
        }
        let f0 = self.cdf(0.0);
        ((self.cdf(x) - f0) / (1.0 - f0)).clamp(0.0, 1.0)
    }

    /// Mean of the sampling distribution, estimated from the points.
    pub fn mean(&self) -> f64 {
        self.points.iter().sum::<f64>() / self.points.len() as f64
    }

    /// Smoothed-bootstrap draw: a uniformly chosen point plus Gaussian noise
    /// of scale `h`, redrawn until non-negative.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        // A draw is accepted with probability nonnegative_mass(); give up
        // only in the pathological case where that mass is vanishing.
        for _ in 0..1_000_000 {
            let i = rng.random_range(0..self.points.len());
            let z: f64 = StandardNormal.sample(rng);
            let x = self.points[i] + self.bandwidth * z;
            if x >= 0.0 {
                return x;
            }
        }
        0.0
    }
}

fn scott_bandwidth(samples: &[f64]) -> Result<f64> {
    let n = samples.len();
    if n < 2 {
        return Err(Error::domain(
            "Scott's rule needs at least 2 samples; pass a bandwidth explicitly",
        ));
    }
    let mean = samples.iter().sum::<f64>() / n as f64;
    let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let h = var.sqrt() * (n as f64).powf(-0.2);
    if h > 0.0 {
        Ok(h)
    } else {
        Err(Error::domain("sample has zero spread; pass a bandwidth explicitly"))
    }
}
