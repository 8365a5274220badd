use serde::{Deserialize, Serialize};

use super::sequence::{SobolSequence, MAX_DIMENSIONS};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Factor {
    pub name: String,
    pub low: f64,
    pub high: f64,
    /// Maps to one of the integers `low..=high` with equal probability.
    #[serde(default)]
    pub integer: bool,
}

impl Factor {
    pub fn continuous(name: &str, low: f64, high: f64) -> Self {
        Self {
            name: name.into(),
            low,
            high,
            integer: false,
        }
    }

    pub fn integer(name: &str, low: i64, high: i64) -> Self {
        Self {
            name: name.into(),
            low: low as f64,
            high: high as f64,
            integer: true,
        }
    }

    pub fn map_unit(&self, u: f64) -> f64 {
        if self.integer {
            (self.low + (u * (self.high - self.low + 1.0)).floor()).min(self.high)
        } else {
            self.low + u * (self.high - self.low)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorSpace {
    pub factors: Vec<Factor>,
}

impl FactorSpace {
    pub fn new(factors: Vec<Factor>) -> Result<Self> {
        let s = Self { factors };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.factors.is_empty() {
            return Err(Error::validation("factors", "need at least one factor"));
        }
        if 2 * self.factors.len() > MAX_DIMENSIONS {
            return Err(Error::validation(
                "factors",
                format!("at most {} factors are supported", MAX_DIMENSIONS / 2),
            ));
        }
        for f in &self.factors {
            if !(f.low.is_finite() && f.high.is_finite() && f.low < f.high) {
                return Err(Error::validation(
                    format!("factors.{}", f.name),
                    "range must satisfy low < high",
                ));
            }
        }
        Ok(())
    }

    pub fn dims(&self) -> usize {
        self.factors.len()
    }

    pub fn names(&self) -> Vec<String> {
        self.factors.iter().map(|f| f.name.clone()).collect()
    }

    pub fn map_unit(&self, u: &[f64]) -> Vec<f64> {
        self.factors.iter().zip(u).map(|(f, &x)| f.map_unit(x)).collect()
    }
}

/// Saltelli design: for each base point `i`, the rows are `A_i`, then
/// `A_i` with column `j` taken from `B_i` for every `j`, then `B_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct SaltelliDesign {
    pub n: usize,
    pub d: usize,
    pub rows: Vec<Vec<f64>>,
}

impl SaltelliDesign {
    pub fn block(&self) -> usize {
        self.d + 2
    }
}

/// `N (d + 2)` points from a `2d`-dimensional scrambled Sobol sequence whose
/// first half of coordinates forms `A` and second half `B`.
pub fn saltelli_sample(space: &FactorSpace, n: usize, seed: u64) -> Result<SaltelliDesign> {
    space.validate()?;
    if n == 0 || !n.is_power_of_two() {
        return Err(Error::validation(
            "n",
            format!("base sample size must be a power of two, got {n}"),
        ));
    }
    let d = space.dims();
    let mut seq = SobolSequence::scrambled(2 * d, seed);
    let mut rows = Vec::with_capacity(n * (d + 2));
    for _ in 0..n {
        let u = seq.next_point();
        let a = space.map_unit(&u[..d]);
        let b = space.map_unit(&u[d..]);
        rows.push(a.clone());
        for j in 0..d {
            let mut ab = a.clone();
            ab[j] = b[j];
            rows.push(ab);
        }
        rows.push(b);
    }
    Ok(SaltelliDesign { n, d, rows })
}
