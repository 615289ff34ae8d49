//! Seeded streams, process-level samplers and ensemble statistics shared by both instruments.

mod histogram;
mod stats;
mod stream;

pub use histogram::{BinSpec, Histogram};
pub use stats::{chi_square_gof, tv_to_pmf, two_sample_tv, EnsembleSummary, MIN_EXPECTED};
pub use stream::SeededStream;

use rayon::prelude::*;

use crate::error::{Error, Result};

/// Largest per-step event probability accepted by [`poisson_thinning_times`].
pub const MAX_STEP_PROBABILITY: f64 = 0.1;

/// Jump times of an inhomogeneous Poisson process on the `dt` grid.
///
/// Each step `[t, t + dt)` fires independently with probability `rate(t) dt`, and a jump is
/// recorded at the left endpoint `t`.
pub fn poisson_thinning_times<F>(
    rate: F,
    horizon: f64,
    dt: f64,
    rng: &mut SeededStream,
) -> Result<Vec<f64>>
where
    F: Fn(f64) -> f64,
{
    if !(dt > 0.0) || !(horizon >= 0.0) {
        return Err(Error::InvalidParams(format!(
            "need dt > 0 and T >= 0, got dt={dt}, T={horizon}"
        )));
    }
    let steps = grid_steps(horizon, dt)?;
    let mut times = Vec::new();
    for k in 0..steps {
        let t = k as f64 * dt;
        let p = rate(t) * dt;
        if !(p >= 0.0) {
            return Err(Error::Domain(format!(
                "negative or undefined rate at t={t}"
            )));
        }
        if p > MAX_STEP_PROBABILITY {
            return Err(Error::StepTooCoarse(format!("rate*dt = {p} at t={t}")));
        }
        if rng.uniform() < p {
            times.push(t);
        }
    }
    Ok(times)
}

/// Number of `dt` steps in `[0, T)`; `T` must be an integer multiple of `dt`.
pub fn grid_steps(horizon: f64, dt: f64) -> Result<usize> {
    let ratio = horizon / dt;
    let steps = ratio.round();
    if (ratio - steps).abs() > 1e-6 * steps.max(1.0) {
        return Err(Error::InvalidParams(format!(
            "T={horizon} is not a multiple of dt={dt}"
        )));
    }
    Ok(steps as usize)
}

/// Runs `f` over trajectory indices `0..count` with stream `(seed, index)` each.
///
/// Results are ordered by index, so the output does not depend on the worker schedule.
pub fn ensemble<R, F>(seed: u64, count: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize, SeededStream) -> R + Sync + Send,
{
    (0..count)
        .into_par_iter()
        .map(|i| f(i, SeededStream::new(seed, i as u64)))
        .collect()
}

/// Fallible variant of [`ensemble`]; the first error by index wins.
pub fn try_ensemble<R, F>(seed: u64, count: usize, f: F) -> Result<Vec<R>>
where
    R: Send,
    F: Fn(usize, SeededStream) -> Result<R> + Sync + Send,
{
    ensemble(seed, count, f).into_iter().collect()
}

#[cfg(test)]
mod tests;
