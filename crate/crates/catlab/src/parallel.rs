use std::num::NonZeroUsize;
use std::thread;

use catlab_core::protocols::{run_trials, Histogram, ProtocolSpec};
use catlab_core::qstate::QuantumState;
use catlab_core::{Error, Laboratory, Result};

/// Worker count used when none is requested.
pub fn default_threads() -> usize {
    thread::available_parallelism().map_or(1, NonZeroUsize::get)
}

/// Monte Carlo over `n` trials split across `threads` workers.
///
/// Trial `i` always draws from stream `(seed, i)` and partial histograms are
/// merged in trial order, so the result does not depend on `threads`.
pub fn run_monte_carlo_parallel<S: QuantumState>(
    protocol: &ProtocolSpec,
    lab: &Laboratory,
    initial: &S,
    n: u64,
    seed: u64,
    threads: usize,
) -> Result<Histogram<S>> {
    if n == 0 {
        return Err(Error::InvalidArgument("trial count must be at least 1".into()));
    }
    protocol.check(lab)?;
    let workers = (threads.max(1) as u64).min(n);
    let chunk = n.div_ceil(workers);
    let parts: Vec<Result<Histogram<S>>> = thread::scope(|scope| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                let range = (w * chunk).min(n)..((w + 1) * chunk).min(n);
                scope.spawn(move || run_trials(protocol, lab, initial, seed, range))
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("trial worker panicked")).collect()
    });
    let mut total = Histogram::default();
    for part in parts {
        total.merge(part?);
    }
    Ok(total)
}
