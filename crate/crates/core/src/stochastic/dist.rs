use std::path::Path;

use statrs::function::factorial::ln_factorial;

use crate::error::{Error, Result};

/// `P(IA <= t) = 1 - exp(-rate * t)` for exponential inter-arrival times.
pub fn exp_interarrival_cdf(t: f64, rate: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::domain(format!("time must be non-negative, got {t}")));
    }
    if !(rate > 0.0) || !rate.is_finite() {
        return Err(Error::domain(format!("rate must be positive, got {rate}")));
    }
    Ok(-(-rate * t).exp_m1())
}

/// Probability of exactly `count` Poisson arrivals at `rate` during `t`.
pub fn poisson_pmf(count: u64, rate: f64, t: f64) -> Result<f64> {
    if !(rate >= 0.0) || !(t >= 0.0) || !rate.is_finite() || !t.is_finite() {
        return Err(Error::domain(format!(
            "rate and time must be non-negative, got rate={rate}, t={t}"
        )));
    }
    let mean = rate * t;
    if mean == 0.0 {
        return Ok(if count == 0 { 1.0 } else { 0.0 });
    }
    let ln_p = count as f64 * mean.ln() - mean - ln_factorial(count);
    Ok(ln_p.exp())
}

/// Maximum-likelihood rate of an exponential fit: one over the sample mean.
pub fn fit_exponential(samples: &[f64]) -> Result<f64> {
    if samples.len() < 2 {
        return Err(Error::domain(format!(
            "need at least 2 inter-arrival samples, got {}",
            samples.len()
        )));
    }
    if let Some(bad) = samples.iter().find(|x| !(**x > 0.0) || !x.is_finite()) {
        return Err(Error::domain(format!(
            "inter-arrival samples must be positive, found {bad}"
        )));
    }
    let mean = samples.iter().sum::<f64>() / samples.len() as f64;
    Ok(1.0 / mean)
}

/// Reads a one-value-per-line duration file. Blank lines and `#` comments are skipped.
pub fn read_duration_samples(path: &Path) -> Result<Vec<f64>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let v: f64 = line.parse().map_err(|_| Error::Parse {
            context: format!("{}:{}", path.display(), lineno + 1),
            message: format!("expected a number, got `{line}`"),
        })?;
        out.push(v);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stochastic::{stream_rng, Stream};
    use rand_distr::{Distribution, Exp};

    #[test]
    fn cdf_endpoints() {
        assert_eq!(exp_interarrival_cdf(0.0, 2.0).unwrap(), 0.0);
        assert!((exp_interarrival_cdf(1e6, 2.0).unwrap() - 1.0).abs() < 1e-15);
        assert!(exp_interarrival_cdf(-1.0, 2.0).is_err());
        assert!(exp_interarrival_cdf(1.0, 0.0).is_err());
    }

    #[test]
    fn cdf_at_observed_mean_interarrival() {
        let mean = 1.4470;
        let p = exp_interarrival_cdf(mean, 1.0 / mean).unwrap();
        assert!((p - (1.0 - (-1.0f64).exp())).abs() < 1e-12);
        assert!((p - 0.6321).abs() < 1e-4);
    }

    #[test]
    fn pmf_cases() {
        assert!((poisson_pmf(0, 1.3, 2.0).unwrap() - (-2.6f64).exp()).abs() < 1e-15);
        assert_eq!(poisson_pmf(0, 0.0, 5.0).unwrap(), 1.0);
        assert_eq!(poisson_pmf(3, 0.0, 5.0).unwrap(), 0.0);
        let v = poisson_pmf(2, 1.0, 1.0).unwrap();
        assert!((v - (-1.0f64).exp() / 2.0).abs() < 1e-15);
        assert!((v - 0.1839).abs() < 1e-4);
        assert!(poisson_pmf(1, -1.0, 1.0).is_err());
    }

    #[test]
    fn pmf_sums_to_one() {
        let total: f64 = (0..200).map(|x| poisson_pmf(x, 3.0, 4.0).unwrap()).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fit_constant_and_errors() {
        assert_eq!(fit_exponential(&[2.0, 2.0, 2.0]).unwrap(), 0.5);
        assert!(fit_exponential(&[2.0]).is_err());
        assert!(fit_exponential(&[]).is_err());
        assert!(fit_exponential(&[1.0, 0.0]).is_err());
    }

    #[test]
    fn fit_recovers_rate() {
        let rate = 1.0 / 1.4470;
        let mut rng = stream_rng(42, 0, None, Stream::Custom(1));
        let exp = Exp::new(rate).unwrap();
        let xs: Vec<f64> = (0..100_000).map(|_| exp.sample(&mut rng)).collect();
        let fitted = fit_exponential(&xs).unwrap();
        assert!((fitted - 0.691).abs() < 0.01, "fitted {fitted}");
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        assert!((mean * rate - 1.0).abs() < 0.01);
    }
}
