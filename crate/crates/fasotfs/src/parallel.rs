//! Multi-threaded Monte-Carlo runs.

use fasotfs_core::montecarlo::{simulate, BlockSampler, SimulationRun, BLOCK_SIZE};
use fasotfs_core::Result;
use rayon::prelude::*;

/// Same samples as [`simulate`], with blocks spread over the current rayon
/// pool. Each block writes its own slice, so the result does not depend on
/// the number of workers.
pub fn simulate_parallel<S: BlockSampler + Sync + ?Sized>(
    sampler: &S,
    trials: usize,
    seed: u64,
) -> Result<SimulationRun> {
    if trials == 0 {
        // Let the core produce its error.
        return simulate(sampler, trials, seed);
    }
    let mut samples = vec![0.0; trials];
    samples
        .par_chunks_mut(BLOCK_SIZE)
        .enumerate()
        .for_each(|(b, chunk)| sampler.fill_block(seed, b as u64, chunk));
    Ok(SimulationRun { seed, trials, samples, config_digest: sampler.digest() })
}

/// Runs `f` on a pool of `threads` workers, or on the global pool.
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> crate::Result<T> {
    match threads {
        Some(n) => Ok(rayon::ThreadPoolBuilder::new().num_threads(n).build()?.install(f)),
        None => Ok(f()),
    }
}
