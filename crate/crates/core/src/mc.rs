//! Block-parallel Monte Carlo driver.
//!
//! Work is cut into fixed-size blocks, each drawing from its own position of
//! the counter-based stream. Blocks are evaluated in parallel and reduced in
//! block order, so results do not depend on the number of worker threads.

use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::gaussian::RngStream;

/// Samples per block.
pub const BLOCK_SIZE: u64 = 1 << 15;

/// Runs `f(rng, count)` for each block and returns the per-block results in
/// block order.
pub fn map_blocks<A, F>(stream: RngStream, samples: u64, f: F) -> Vec<A>
where
    A: Send,
    F: Fn(&mut ChaCha8Rng, u64) -> A + Sync,
{
    let blocks = samples.div_ceil(BLOCK_SIZE);
    (0..blocks)
        .into_par_iter()
        .map(|b| {
            let count = BLOCK_SIZE.min(samples - b * BLOCK_SIZE);
            let mut rng = stream.block(b);
            f(&mut rng, count)
        })
        .collect()
}

/// Running first and second moments of a bounded per-sample statistic.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Moments {
    pub count: u64,
    pub sum: f64,
    pub sum_sq: f64,
}

impl Moments {
    #[inline]
    pub fn push(&mut self, v: f64) {
        self.count += 1;
        self.sum += v;
        self.sum_sq += v * v;
    }

    pub fn merge(mut self, other: &Moments) -> Moments {
        self.count += other.count;
        self.sum += other.sum;
        self.sum_sq += other.sum_sq;
        self
    }

    pub fn mean(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            self.sum / self.count as f64
        }
    }

    /// Standard error of the mean.
    pub fn std_error(&self) -> f64 {
        if self.count < 2 {
            return 0.0;
        }
        let n = self.count as f64;
        let mean = self.sum / n;
        let var = ((self.sum_sq / n - mean * mean) * n / (n - 1.0)).max(0.0);
        (var / n).sqrt()
    }
}

/// Reduces per-block moments in order.
pub fn reduce_moments(parts: &[Moments]) -> Moments {
    parts.iter().fold(Moments::default(), |acc, m| acc.merge(m))
}

/// Standard error of a Bernoulli proportion.
pub fn proportion_se(p: f64, samples: u64) -> f64 {
    (p * (1.0 - p) / samples as f64).max(0.0).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn block_results_do_not_depend_on_thread_count() {
        let run = || {
            map_blocks(RngStream::new(3, 9), 3 * BLOCK_SIZE + 17, |rng, count| {
                (0..count).map(|_| rng.gen::<f64>()).sum::<f64>()
            })
        };
        let a = run();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
        let b = pool.install(run);
        assert_eq!(a.len(), 4);
        assert_eq!(a, b);
    }

    #[test]
    fn moments() {
        let mut m = Moments::default();
        for v in [1.0, 2.0, 3.0, 4.0] {
            m.push(v);
        }
        assert_eq!(m.mean(), 2.5);
        let var = 5.0 / 3.0;
        assert!((m.std_error() - (var / 4.0_f64).sqrt()).abs() < 1e-15);
    }
}
