//! Chunked Monte Carlo with schedule-independent results.

use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::model::RngSeed;

/// Draws per independent stream.
pub const MC_CHUNK: usize = 1 << 16;

/// Splits `n` draws into chunks of [`MC_CHUNK`], runs `chunk(rng, len)` on
/// each with the stream `seed.derive(&[index])`, and returns the results in
/// chunk order. Callers reduce sequentially, so the total does not depend on
/// how rayon schedules the chunks.
pub fn chunked<A, F>(n: usize, seed: RngSeed, chunk: F) -> Vec<A>
where
    A: Send,
    F: Fn(&mut ChaCha8Rng, usize) -> A + Sync,
{
    let count = n.div_ceil(MC_CHUNK);
    (0..count)
        .into_par_iter()
        .map(|c| {
            let mut rng = seed.derive(&[c as u64]).rng();
            chunk(&mut rng, MC_CHUNK.min(n - c * MC_CHUNK))
        })
        .collect()
}

/// Sum and sum of squares of `draw` over `n` draws. `draw` receives a
/// scratch buffer of length `dim`.
pub fn moments<F>(n: usize, seed: RngSeed, dim: usize, draw: F) -> (f64, f64)
where
    F: Fn(&mut ChaCha8Rng, &mut [f64]) -> f64 + Sync,
{
    chunked(n, seed, |rng, len| {
        let mut x = vec![0.0; dim];
        let (mut s, mut s2) = (0.0, 0.0);
        for _ in 0..len {
            let v = draw(rng, &mut x);
            s += v;
            s2 += v * v;
        }
        (s, s2)
    })
    .into_iter()
    .fold((0.0, 0.0), |(a, b), (s, s2)| (a + s, b + s2))
}

/// Mean and standard error from a sum and sum of squares.
pub fn mean_and_se(n: usize, sum: f64, sum_sq: f64) -> (f64, f64) {
    let nf = n as f64;
    let mean = sum / nf;
    if n < 2 {
        return (mean, f64::INFINITY);
    }
    let var = ((sum_sq - nf * mean * mean) / (nf - 1.0)).max(0.0);
    (mean, (var / nf).sqrt())
}
