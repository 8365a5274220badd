//! Closed-form steady-state metrics of the M/M/c and M/M/c/N queues.
//!
//! `arrival_rate` is the offered rate. For a finite system the rate that
//! actually enters is `lambda_e = lambda * (1 - P_N)`, and `W_Q = L_Q / lambda_e`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QueueParams {
    /// Offered arrival rate per hour.
    pub arrival_rate: f64,
    /// Per-server service rate per hour.
    pub service_rate: f64,
    pub servers: u32,
    /// Total places `N = c + buffer`; `None` for an unbounded queue.
    pub capacity: Option<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Stability {
    Stable,
    Unstable,
}

impl QueueParams {
    pub fn new(arrival_rate: f64, service_rate: f64, servers: u32, capacity: Option<u32>) -> Result<Self> {
        let p = Self {
            arrival_rate,
            service_rate,
            servers,
            capacity,
        };
        p.check()?;
        Ok(p)
    }

    fn check(&self) -> Result<()> {
        if self.servers == 0 {
            return Err(Error::domain("need at least one server"));
        }
        if let Some(n) = self.capacity {
            if n < self.servers {
                return Err(Error::domain(format!(
                    "capacity N = {n} is below the server count c = {}",
                    self.servers
                )));
            }
        }
        if !(self.arrival_rate >= 0.0) || !self.arrival_rate.is_finite() {
            return Err(Error::domain("arrival rate must be non-negative"));
        }
        if !(self.service_rate > 0.0) || !self.service_rate.is_finite() {
            return Err(Error::domain("service rate must be positive"));
        }
        Ok(())
    }

    /// Offered load `a = lambda / mu`.
    pub fn offered_load(&self) -> f64 {
        self.arrival_rate / self.service_rate
    }

    /// `rho = lambda / (c mu)`.
    pub fn utilization(&self) -> f64 {
        self.offered_load() / f64::from(self.servers)
    }

    /// `a^c / c!`.
    fn ac_over_cfact(&self) -> f64 {
        let a = self.offered_load();
        (1..=self.servers).fold(1.0, |acc, k| acc * a / f64::from(k))
    }

    /// `sum_{n=0}^{c} a^n / n!`.
    fn head_sum(&self) -> f64 {
        let a = self.offered_load();
        let mut term = 1.0;
        let mut sum = 1.0;
        for n in 1..=self.servers {
            term *= a / f64::from(n);
            sum += term;
        }
        sum
    }

    /// Probability the system is empty.
    pub fn p0(&self) -> Result<f64> {
        self.check()?;
        let rho = self.utilization();
        let c = self.servers;
        let tail = match self.capacity {
            Some(n) => {
                let m = f64::from(n - c);
                if (rho - 1.0).abs() < 1e-12 {
                    m
                } else {
                    rho * (1.0 - rho.powf(m)) / (1.0 - rho)
                }
            }
            None => {
                if rho >= 1.0 {
                    return Ok(0.0);
                }
                rho / (1.0 - rho)
            }
        };
        let head = self.head_sum();
        Ok(1.0 / (head + self.ac_over_cfact() * tail))
    }

    /// Stationary probability of `n` patients in the system.
    pub fn pn(&self, n: u32) -> Result<f64> {
        let p0 = self.p0()?;
        if let Some(cap) = self.capacity {
            if n > cap {
                return Ok(0.0);
            }
        }
        let a = self.offered_load();
        let c = self.servers;
        let mut w = 1.0;
        for k in 1..=n {
            w *= a / f64::from(k.min(c));
        }
        Ok(p0 * w)
    }

    /// Probability an arrival finds the system full. Zero when unbounded.
    pub fn blocking_probability(&self) -> Result<f64> {
        match self.capacity {
            Some(n) => self.pn(n),
            None => Ok(0.0),
        }
    }

    /// `lambda_e = lambda * (1 - P_N)`.
    pub fn effective_arrival_rate(&self) -> Result<f64> {
        Ok(self.arrival_rate * (1.0 - self.blocking_probability()?))
    }

    pub fn stability(&self) -> Stability {
        if self.utilization() < 1.0 {
            Stability::Stable
        } else {
            Stability::Unstable
        }
    }

    /// Mean queue length (patients waiting, not in service).
    ///
    /// Finite capacity uses
    /// `P0 a^c rho / (c! (1-rho)^2) * [1 - rho^(N-c) - (N-c) rho^(N-c) (1-rho)]`,
    /// with the `rho = 1` limit `P0 a^c / c! * (N-c)(N-c+1)/2`. An unbounded
    /// queue uses the Erlang-C form and is infinite when `rho >= 1`.
    pub fn lq(&self) -> Result<f64> {
        self.check()?;
        let rho = self.utilization();
        let p0 = self.p0()?;
        let k = self.ac_over_cfact();
        match self.capacity {
            Some(n) => {
                let m = f64::from(n - self.servers);
                if m == 0.0 {
                    return Ok(0.0);
                }
                if (rho - 1.0).abs() < 1e-9 {
                    return Ok(p0 * k * m * (m + 1.0) / 2.0);
                }
                let rm = rho.powf(m);
                Ok(p0 * k * rho / (1.0 - rho).powi(2) * (1.0 - rm - m * rm * (1.0 - rho)))
            }
            None => {
                if rho >= 1.0 {
                    return Ok(f64::INFINITY);
                }
                Ok(p0 * k * rho / (1.0 - rho).powi(2))
            }
        }
    }

    /// Mean wait in queue, `W_Q = L_Q / lambda_e`.
    pub fn wq(&self) -> Result<f64> {
        let le = self.effective_arrival_rate()?;
        if !(le > 0.0) {
            return Err(Error::domain("W_Q undefined at zero effective arrival rate"));
        }
        Ok(self.lq()? / le)
    }

    /// Mean number in the system, `L_Q + lambda_e / mu`.
    pub fn l(&self) -> Result<f64> {
        Ok(self.lq()? + self.effective_arrival_rate()? / self.service_rate)
    }
}

/// Probability an arrival has to wait in an M/M/c queue (Erlang C).
pub fn erlang_c(servers: u32, offered_load: f64) -> Result<f64> {
    let p = QueueParams::new(offered_load, 1.0, servers, None)?;
    if p.utilization() >= 1.0 {
        return Ok(1.0);
    }
    let rho = p.utilization();
    Ok(p.ac_over_cfact() / (1.0 - rho) * p.p0()?)
}

/// System-wide stability ratio `lambda / sum_j c_j mu_j`.
pub fn system_stability(arrival_rate: f64, stations: &[(u32, f64)]) -> (f64, Stability) {
    let cap: f64 = stations.iter().map(|(c, mu)| f64::from(*c) * mu).sum();
    let rho = arrival_rate / cap;
    (
        rho,
        if rho < 1.0 {
            Stability::Stable
        } else {
            Stability::Unstable
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn zero_buffer_has_no_queue() {
        let p = QueueParams::new(3.0, 1.0, 2, Some(2)).unwrap();
        assert_eq!(p.lq().unwrap(), 0.0);
        assert_eq!(p.wq().unwrap(), 0.0);
    }

    #[test]
    fn mm1_limits() {
        let p = QueueParams::new(1.0, 2.0, 1, Some(1_000_000)).unwrap();
        assert!((p.lq().unwrap() - 0.5).abs() < 1e-9);
        assert!((p.wq().unwrap() - 0.5).abs() < 1e-9);
        let q = QueueParams::new(1.0, 2.0, 1, None).unwrap();
        assert!((q.lq().unwrap() - 0.5).abs() < 1e-12);
        assert!((q.wq().unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn capacity_below_servers_is_domain_error() {
        assert!(QueueParams::new(1.0, 1.0, 3, Some(2)).is_err());
        let bad = QueueParams {
            arrival_rate: 1.0,
            service_rate: 1.0,
            servers: 3,
            capacity: Some(2),
        };
        assert!(bad.lq().is_err());
    }

    #[test]
    fn wq_needs_arrivals() {
        let p = QueueParams::new(0.0, 1.0, 1, Some(3)).unwrap();
        assert_eq!(p.lq().unwrap(), 0.0);
        assert!(p.wq().is_err());
    }

    #[test]
    fn stability_boundary() {
        let p = QueueParams::new(1.0, 1.0, 2, None).unwrap();
        assert_eq!(p.stability(), Stability::Stable);
        assert_eq!(p.utilization(), 0.5);
        let q = QueueParams::new(2.0, 1.0, 2, None).unwrap();
        assert_eq!(q.stability(), Stability::Unstable);
        assert!(q.lq().unwrap().is_infinite());
        assert_eq!(system_stability(1.0, &[(2, 1.0), (2, 1.0), (2, 1.0)]).0, 1.0 / 6.0);
    }

    #[test]
    fn rho_one_limit_is_continuous() {
        let at = QueueParams::new(2.0, 1.0, 2, Some(6)).unwrap().lq().unwrap();
        let below = QueueParams::new(2.0 - 1e-6, 1.0, 2, Some(6)).unwrap().lq().unwrap();
        let above = QueueParams::new(2.0 + 1e-6, 1.0, 2, Some(6)).unwrap().lq().unwrap();
        assert!((at - below).abs() < 1e-4 && (at - above).abs() < 1e-4);
    }

    #[test]
    fn probabilities_sum_to_one() {
        let p = QueueParams::new(2.5, 1.1, 3, Some(9)).unwrap();
        let total: f64 = (0..=9).map(|n| p.pn(n).unwrap()).sum();
        assert!((total - 1.0).abs() < 1e-12);
        let lq_direct: f64 = (4..=9).map(|n| f64::from(n - 3) * p.pn(n).unwrap()).sum();
        assert!((lq_direct - p.lq().unwrap()).abs() < 1e-12);
    }

    #[test]
    fn erlang_c_textbook_value() {
        // c = 2, a = 1: C = (1/2 * 2) / (1 + 1 + 1) = 1/3.
        assert!((erlang_c(2, 1.0).unwrap() - 1.0 / 3.0).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn lq_monotone_in_arrival_rate(lam in 0.01f64..6.0, bump in 0.0f64..2.0, mu in 0.2f64..3.0,
                                       c in 1u32..5, buf in 0u32..12) {
            let lo = QueueParams::new(lam, mu, c, Some(c + buf)).unwrap().lq().unwrap();
            let hi = QueueParams::new(lam + bump, mu, c, Some(c + buf)).unwrap().lq().unwrap();
            prop_assert!(hi >= lo - 1e-9 * (1.0 + lo));
        }

        #[test]
        fn littles_law_form(lam in 0.01f64..6.0, mu in 0.2f64..3.0, c in 1u32..5, buf in 0u32..12) {
            let p = QueueParams::new(lam, mu, c, Some(c + buf)).unwrap();
            let le = p.effective_arrival_rate().unwrap();
            prop_assert!((p.wq().unwrap() * le - p.lq().unwrap()).abs() <= 1e-12 * (1.0 + p.lq().unwrap()));
        }
    }
}
