//! Sobol low-discrepancy points in up to 21 dimensions.

use rand::Rng;

use crate::stochastic::{stream_rng, Stream};

const BITS: usize = 32;

/// Primitive-polynomial degree `s`, its coefficient word `a`, and the initial
/// direction numbers `m_1..m_s` for dimensions 2 onward (Joe and Kuo, 2008).
const DIRECTIONS: [(u32, u32, &[u32]); 20] = [
    (1, 0, &[1]),
    (2, 1, &[1, 3]),
    (3, 1, &[1, 3, 1]),
    (3, 2, &[1, 1, 1]),
    (4, 1, &[1, 1, 3, 3]),
    (4, 4, &[1, 3, 5, 13]),
    (5, 2, &[1, 1, 5, 5, 17]),
    (5, 4, &[1, 1, 5, 5, 5]),
    (5, 7, &[1, 1, 7, 11, 19]),
    (5, 11, &[1, 1, 5, 1, 1]),
    (5, 13, &[1, 1, 1, 3, 11]),
    (5, 14, &[1, 3, 5, 5, 31]),
    (6, 1, &[1, 3, 3, 9, 7, 49]),
    (6, 13, &[1, 1, 1, 15, 21, 21]),
    (6, 16, &[1, 3, 1, 13, 27, 49]),
    (6, 19, &[1, 1, 1, 15, 7, 5]),
    (6, 22, &[1, 3, 1, 15, 13, 25]),
    (6, 25, &[1, 1, 5, 5, 19, 61]),
    (7, 1, &[1, 3, 7, 11, 23, 15, 103]),
    (7, 4, &[1, 3, 7, 13, 13, 15, 69]),
];

pub const MAX_DIMENSIONS: usize = DIRECTIONS.len() + 1;

/// Gray-code Sobol generator with an optional random digital shift.
#[derive(Debug, Clone)]
pub struct SobolSequence {
    directions: Vec<[u32; BITS]>,
    shift: Vec<u32>,
    state: Vec<u32>,
    index: u64,
}

impl SobolSequence {
    /// # Panics
    /// If `dims` is zero or above [`MAX_DIMENSIONS`].
    pub fn new(dims: usize) -> Self {
        assert!(
            (1..=MAX_DIMENSIONS).contains(&dims),
            "supported dimensions: 1..={MAX_DIMENSIONS}"
        );
        let mut directions = Vec::with_capacity(dims);
        let mut first = [0u32; BITS];
        for (k, v) in first.iter_mut().enumerate() {
            *v = 1 << (BITS - 1 - k);
        }
        directions.push(first);
        for &(s, a, m) in DIRECTIONS.iter().take(dims - 1) {
            let s = s as usize;
            let mut v = [0u32; BITS];
            for k in 0..BITS {
                v[k] = if k < s {
                    m[k] << (BITS - 1 - k)
                } else {
                    let mut x = v[k - s] ^ (v[k - s] >> s);
                    for l in 1..s {
                        if (a >> (s - 1 - l)) & 1 == 1 {
                            x ^= v[k - l];
                        }
                    }
                    x
                };
            }
            directions.push(v);
        }
        Self {
            directions,
            shift: vec![0; dims],
            state: vec![0; dims],
            index: 0,
        }
    }

    /// XORs every coordinate with a seeded random word. Each coordinate stays
    /// uniform and the net structure of the point set is preserved.
    pub fn scrambled(dims: usize, seed: u64) -> Self {
        let mut s = Self::new(dims);
        let mut rng = stream_rng(seed, 0, None, Stream::Scramble);
        for w in &mut s.shift {
            *w = rng.random();
        }
        s
    }

    pub fn dims(&self) -> usize {
        self.directions.len()
    }

    /// Next point in `[0, 1)^d`; the first point is the (shifted) origin.
    pub fn next_point(&mut self) -> Vec<f64> {
        let point = self
            .state
            .iter()
            .zip(&self.shift)
            .map(|(x, s)| (x ^ s) as f64 / 4_294_967_296.0)
            .collect();
        let c = self.index.trailing_ones() as usize;
        assert!(c < BITS, "sequence exhausted");
        for (x, v) in self.state.iter_mut().zip(&self.directions) {
            *x ^= v[c];
        }
        self.index += 1;
        point
    }

    pub fn take_points(&mut self, n: usize) -> Vec<Vec<f64>> {
        (0..n).map(|_| self.next_point()).collect()
    }
}
