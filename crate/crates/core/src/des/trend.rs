use statrs::distribution::{ContinuousCDF, StudentsT};

/// One-sided significance of the queue-growth test.
pub const TREND_SIGNIFICANCE: f64 = 0.05;

/// Finite-run proxy for a diverging queue: the quarter-by-quarter mean
/// queue lengths rise monotonically, gain more than one patient overall,
/// and an OLS slope over the four quarters is positive at the 5% level.
pub fn queue_growth_detected(quarters: &[f64; 4]) -> bool {
    if !quarters.windows(2).all(|w| w[1] > w[0]) {
        return false;
    }
    if quarters[3] - quarters[0] <= 1.0 {
        return false;
    }
    let xs: [f64; 4] = [1.0, 2.0, 3.0, 4.0];
    let xm: f64 = 2.5;
    let ym = quarters.iter().sum::<f64>() / 4.0;
    let sxx: f64 = xs.iter().map(|x| (x - xm).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(quarters).map(|(x, y)| (x - xm) * (y - ym)).sum();
    let slope = sxy / sxx;
    let intercept = ym - slope * xm;
    let sse: f64 = xs
        .iter()
        .zip(quarters)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let se = (sse / 2.0 / sxx).sqrt();
    if se == 0.0 {
        return slope > 0.0;
    }
    let t = slope / se;
    let dist = StudentsT::new(0.0, 1.0, 2.0).expect("valid t distribution");
    1.0 - dist.cdf(t) < TREND_SIGNIFICANCE
}
