use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Outcome of a one-sample Kolmogorov-Smirnov test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
    pub n: usize,
}

/// One-sample KS test of `samples` against `cdf`. The p-value uses the
/// asymptotic Kolmogorov distribution evaluated at `sqrt(n) * D`.
pub fn ks_test<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> Result<KsResult> {
    if samples.is_empty() {
        return Err(Error::domain("KS test needs at least one sample"));
    }
    if samples.iter().any(|x| x.is_nan()) {
        return Err(Error::domain("KS samples must not be NaN"));
    }
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let mut d: f64 = 0.0;
    for (i, x) in xs.iter().enumerate() {
        let f = cdf(*x).clamp(0.0, 1.0);
        let above = (i + 1) as f64 / n - f;
        let below = f - i as f64 / n;
        d = d.max(above.abs()).max(below.abs());
    }
    let d = d.min(1.0);
    Ok(KsResult {
        statistic: d,
        p_value: kolmogorov_survival(n.sqrt() * d),
        n: xs.len(),
    })
}

/// `P(K > x)` for the Kolmogorov distribution.
pub fn kolmogorov_survival(x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    let p = if x < 1.18 {
        // Small-argument series for the CDF converges quickly here.
        let c = -std::f64::consts::PI.powi(2) / (8.0 * x * x);
        let s: f64 = (1..=20)
            .map(|k| {
                let m = (2 * k - 1) as f64;
                (c * m * m).exp()
            })
            .sum();
        1.0 - (2.0 * std::f64::consts::PI).sqrt() / x * s
    } else {
        let mut s = 0.0;
        for k in 1..=100 {
            let k = k as f64;
            let term = (-2.0 * k * k * x * x).exp();
            s += if k as u64 % 2 == 1 { term } else { -term };
            if term < 1e-17 {
                break;
            }
        }
        2.0 * s
    };
    p.clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stochastic::{stream_rng, Stream};
    use rand::Rng;

    #[test]
    fn out_of_support_gives_maximal_statistic() {
        let r = ks_test(&[-3.0, -2.0, -1.0], |x| if x < 0.0 { 0.0 } else { 1.0 - (-x).exp() }).unwrap();
        assert_eq!(r.statistic, 1.0);
        assert!(r.p_value < 0.05);
    }

    #[test]
    fn brute_force_statistic() {
        // Oracle: evaluate |G - F| on a dense grid including both sides of every jump.
        let xs = [0.1, 0.35, 0.4, 0.8, 0.95];
        let cdf = |x: f64| x.clamp(0.0, 1.0);
        let r = ks_test(&xs, cdf).unwrap();
        let mut sorted = xs.to_vec();
        sorted.sort_by(f64::total_cmp);
        let ecdf = |t: f64| sorted.iter().filter(|v| **v <= t).count() as f64 / 5.0;
        let mut best: f64 = 0.0;
        for i in 0..=100_000 {
            let t = i as f64 / 100_000.0;
            best = best.max((ecdf(t) - cdf(t)).abs());
        }
        for x in xs {
            best = best.max((ecdf(x - 1e-12) - cdf(x)).abs());
        }
        assert!((r.statistic - best).abs() < 1e-6, "{} vs {}", r.statistic, best);
    }

    #[test]
    fn uniform_sample_passes() {
        let mut rng = stream_rng(1, 0, None, Stream::Custom(2));
        let xs: Vec<f64> = (0..10_000).map(|_| rng.random::<f64>()).collect();
        let r = ks_test(&xs, |x| x.clamp(0.0, 1.0)).unwrap();
        assert!(r.statistic < 0.02);
        assert!(r.p_value > 0.01);
    }

    #[test]
    fn kolmogorov_reference_values() {
        // Classical critical values: P(K > 1.3581) = 0.05, P(K > 1.6276) = 0.01.
        assert!((kolmogorov_survival(1.3581) - 0.05).abs() < 1e-4);
        assert!((kolmogorov_survival(1.6276) - 0.01).abs() < 1e-4);
        assert!((kolmogorov_survival(0.8276) - 0.5).abs() < 1e-3);
        // Both series agree where they meet.
        let lo = kolmogorov_survival(1.18 - 1e-9);
        let hi = kolmogorov_survival(1.18 + 1e-9);
        assert!((lo - hi).abs() < 1e-7);
        assert_eq!(kolmogorov_survival(0.0), 1.0);
    }

    #[test]
    fn empty_sample_is_rejected() {
        assert!(ks_test(&[], |x| x).is_err());
    }
}
