//! Oracles shared by the integration tests. They are written against plain
//! arrays on purpose and do not call into the library's own algorithms.
#![allow(dead_code)]

use std::collections::HashMap;

/// Utilities keyed by a profile as `true = Redirect` per player.
pub type BoolTensor = HashMap<Vec<bool>, Vec<f64>>;

pub fn all_bool_profiles(k: usize) -> Vec<Vec<bool>> {
    let mut out = vec![vec![]];
    for _ in 0..k {
        out = out
            .into_iter()
            .flat_map(|p| {
                let mut a = p.clone();
                a.push(false);
                let mut b = p;
                b.push(true);
                [a, b]
            })
            .collect();
    }
    out
}

/// Exhaustive unilateral-deviation check, returned as sorted "A"/"R" strings.
pub fn nash_oracle(k: usize, tensor: &BoolTensor) -> Vec<String> {
    let mut eq = Vec::new();
    for p in all_bool_profiles(k) {
        let u = &tensor[&p];
        let stable = (0..k).all(|j| {
            let mut q = p.clone();
            q[j] = !q[j];
            u[j] >= tensor[&q][j]
        });
        if stable {
            eq.push(p.iter().map(|&r| if r { 'R' } else { 'A' }).collect());
        }
    }
    eq.sort();
    eq
}

/// Solves `pi Q = 0, sum(pi) = 1` by Gaussian elimination with partial pivoting.
#[allow(clippy::needless_range_loop)]
pub fn ctmc_stationary(q: &[Vec<f64>]) -> Vec<f64> {
    let n = q.len();
    // Transpose, then replace the last equation by the normalisation.
    let mut a: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| q[j][i]).collect()).collect();
    let mut b = vec![0.0; n];
    a[n - 1] = vec![1.0; n];
    b[n - 1] = 1.0;
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs()))
            .unwrap();
        a.swap(col, piv);
        b.swap(col, piv);
        for row in 0..n {
            if row != col {
                let f = a[row][col] / a[col][col];
                for k in col..n {
                    a[row][k] -= f * a[col][k];
                }
                b[row] -= f * b[col];
            }
        }
    }
    (0..n).map(|i| b[i] / a[i][i]).collect()
}

/// Birth-death generator of an M/M/c/N queue with states 0..=N.
pub fn mmcn_generator(lambda: f64, mu: f64, c: usize, cap: usize) -> Vec<Vec<f64>> {
    let mut q = vec![vec![0.0; cap + 1]; cap + 1];
    for s in 0..=cap {
        if s < cap {
            q[s][s + 1] = lambda;
        }
        if s > 0 {
            q[s][s - 1] = mu * s.min(c) as f64;
        }
        q[s][s] = -q[s].iter().sum::<f64>();
    }
    q
}

/// Expected number waiting under the stationary law.
pub fn mmcn_lq(lambda: f64, mu: f64, c: usize, cap: usize) -> f64 {
    let pi = ctmc_stationary(&mmcn_generator(lambda, mu, c, cap));
    pi.iter().enumerate().map(|(s, p)| s.saturating_sub(c) as f64 * p).sum()
}

/// Small deterministic generator for test inputs (xorshift64*).
pub struct TestRng(pub u64);

impl TestRng {
    pub fn next_f64(&mut self) -> f64 {
        self.0 ^= self.0 >> 12;
        self.0 ^= self.0 << 25;
        self.0 ^= self.0 >> 27;
        (self.0.wrapping_mul(0x2545_F491_4F6C_DD1D) >> 11) as f64 / (1u64 << 53) as f64
    }
}
