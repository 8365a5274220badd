use std::path::Path;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::space::{saltelli_sample, FactorSpace, SaltelliDesign};
use crate::error::{Error, Result};
use crate::stochastic::{stream_rng, Stream};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SobolOptions {
    /// Seed of the digital shift applied to the Sobol points.
    pub seed: u64,
    pub bootstrap: usize,
    pub bootstrap_seed: u64,
}

impl Default for SobolOptions {
    fn default() -> Self {
        Self {
            seed: 0,
            bootstrap: 100,
            bootstrap_seed: 1,
        }
    }
}

/// First- and total-order indices with 95% bootstrap half-widths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SobolIndices {
    pub names: Vec<String>,
    pub first: Vec<f64>,
    pub first_ci: Vec<f64>,
    pub total: Vec<f64>,
    pub total_ci: Vec<f64>,
    /// Base points actually used (blocks with a non-finite output are dropped).
    pub n_used: usize,
}

impl SobolIndices {
    pub fn position(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// Factor names ordered by decreasing total-order index.
    pub fn total_order_ranking(&self) -> Vec<&str> {
        let mut idx: Vec<usize> = (0..self.names.len()).collect();
        idx.sort_by(|&a, &b| self.total[b].total_cmp(&self.total[a]));
        idx.into_iter().map(|i| self.names[i].as_str()).collect()
    }
}

/// `(S1, ST)` per factor from the selected base points.
///
/// First order follows Saltelli et al. (2010), total order follows Jansen
/// (1999); both are normalised by the variance of the pooled `A` and `B` outputs.
fn estimate(y: &[f64], d: usize, picks: &[usize]) -> (Vec<f64>, Vec<f64>) {
    let block = d + 2;
    let n = picks.len() as f64;
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for &i in picks {
        let (a, b) = (y[i * block], y[i * block + d + 1]);
        sum += a + b;
        sum_sq += a * a + b * b;
    }
    let mean = sum / (2.0 * n);
    let var = sum_sq / (2.0 * n) - mean * mean;
    let mut first = vec![0.0; d];
    let mut total = vec![0.0; d];
    for j in 0..d {
        let mut s1 = 0.0;
        let mut st = 0.0;
        for &i in picks {
            let a = y[i * block];
            let ab = y[i * block + 1 + j];
            let b = y[i * block + d + 1];
            s1 += b * (ab - a);
            st += (a - ab) * (a - ab);
        }
        first[j] = if var > 0.0 { s1 / n / var } else { 0.0 };
        total[j] = if var > 0.0 { 0.5 * st / n / var } else { 0.0 };
    }
    (first, total)
}

/// Indices from model outputs laid out as in [`SaltelliDesign`].
pub fn analyze(
    design: &SaltelliDesign,
    outputs: &[f64],
    names: Vec<String>,
    opts: &SobolOptions,
) -> Result<SobolIndices> {
    let d = design.d;
    let block = design.block();
    if outputs.len() != design.n * block {
        return Err(Error::validation("outputs", "one output per design row is required"));
    }
    let kept: Vec<usize> = (0..design.n)
        .filter(|&i| outputs[i * block..(i + 1) * block].iter().all(|v| v.is_finite()))
        .collect();
    if kept.len() < 2 {
        return Err(Error::domain("fewer than two complete base points"));
    }
    let (first, total) = estimate(outputs, d, &kept);
    let mut rng = stream_rng(opts.bootstrap_seed, 0, None, Stream::Bootstrap);
    let mut boot_first = vec![Vec::with_capacity(opts.bootstrap); d];
    let mut boot_total = vec![Vec::with_capacity(opts.bootstrap); d];
    let mut picks = vec![0usize; kept.len()];
    for _ in 0..opts.bootstrap {
        for p in &mut picks {
            *p = kept[rng.random_range(0..kept.len())];
        }
        let (f, t) = estimate(outputs, d, &picks);
        for j in 0..d {
            boot_first[j].push(f[j]);
            boot_total[j].push(t[j]);
        }
    }
    let half_width = |v: &Vec<f64>| {
        if v.len() < 2 {
            return 0.0;
        }
        let m = v.iter().sum::<f64>() / v.len() as f64;
        let var = v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() - 1) as f64;
        1.96 * var.sqrt()
    };
    Ok(SobolIndices {
        names,
        first,
        first_ci: boot_first.iter().map(half_width).collect(),
        total,
        total_ci: boot_total.iter().map(half_width).collect(),
        n_used: kept.len(),
    })
}

/// Evaluates `model` on a Saltelli design (in parallel) and estimates indices.
/// Non-finite outputs drop their whole base-point block.
pub fn sobol_indices<F>(model: &F, space: &FactorSpace, n: usize, opts: &SobolOptions) -> Result<SobolIndices>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let design = saltelli_sample(space, n, opts.seed)?;
    let outputs: Vec<f64> = design.rows.par_iter().map(|x| model(x)).collect();
    analyze(&design, &outputs, space.names(), opts)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub n: usize,
    pub indices: SobolIndices,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceStudy {
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceStudy {
    /// Smallest base size whose total-order half-width for `factor` is at most `target`.
    pub fn smallest_meeting(&self, factor: usize, target: f64) -> Option<usize> {
        self.rows
            .iter()
            .find(|r| r.indices.total_ci[factor] <= target)
            .map(|r| r.n)
    }
}

pub fn convergence_study<F>(
    model: &F,
    space: &FactorSpace,
    sizes: &[usize],
    opts: &SobolOptions,
) -> Result<ConvergenceStudy>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    if sizes.is_empty() || sizes.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::validation(
            "sizes",
            "sizes must be non-empty and strictly ascending",
        ));
    }
    let rows = sizes
        .iter()
        .map(|&n| {
            Ok(ConvergenceRow {
                n,
                indices: sobol_indices(model, space, n, opts)?,
            })
        })
        .collect::<Result<_>>()?;
    Ok(ConvergenceStudy { rows })
}

pub fn write_indices_csv(path: &Path, idx: &SobolIndices) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["factor", "S1", "S1_ci", "ST", "ST_ci"])?;
    for j in 0..idx.names.len() {
        w.write_record([
            idx.names[j].clone(),
            idx.first[j].to_string(),
            idx.first_ci[j].to_string(),
            idx.total[j].to_string(),
            idx.total_ci[j].to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}
