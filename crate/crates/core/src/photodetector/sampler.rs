use num_complex::Complex64;
use rand_distr::{Distribution, Poisson};

use super::{kraus_class, PhotoRecord};
use crate::error::{Error, Result};
use crate::fock::{Density, PureMixture};
use crate::params::InstrumentParams;
use crate::records::{ensemble, try_ensemble, BinSpec, Histogram, SeededStream};

/// Squared norm below which a conditional state is considered collapsed.
pub const NORM_FLOOR: f64 = 1e-14;

/// Eigenvalues below this are dropped when the input state is split into pure components.
const ENSEMBLE_CUTOFF: f64 = 1e-14;

/// Sequential (jump / no-jump) trajectory sampler for a fixed input state.
///
/// The state is decomposed once into its eigen-ensemble; each trajectory draws a pure
/// component and follows it, which reproduces the mixed-state statistics exactly.
#[derive(Debug, Clone)]
pub struct PhotodetectorSampler {
    params: InstrumentParams<f64>,
    mixture: PureMixture,
    decay: Vec<f64>,
}

impl PhotodetectorSampler {
    pub fn new(rho: &Density<f64>, params: InstrumentParams<f64>) -> Result<Self> {
        if rho.dim() != params.dim {
            return Err(Error::InvalidDimension(format!(
                "state dimension {} vs {}",
                rho.dim(),
                params.dim
            )));
        }
        if !(params.dt > 0.0) {
            return Err(Error::InvalidParams(
                "trajectory sampling needs dt > 0".into(),
            ));
        }
        let mixture = PureMixture::from_density(rho, ENSEMBLE_CUTOFF)?;
        let half = 0.5 * params.step_coupling();
        let decay = (0..params.dim).map(|n| (-half * n as f64).exp()).collect();
        Ok(Self {
            params,
            mixture,
            decay,
        })
    }

    pub fn params(&self) -> &InstrumentParams<f64> {
        &self.params
    }

    /// One trajectory: jump with probability `kappa_o dt <N>` at each step.
    pub fn sample(&self, rng: &mut SeededStream) -> Result<PhotoRecord> {
        let mut psi = self.mixture.pick(rng.uniform()).to_vec();
        let coupling = self.params.step_coupling();
        let dt = self.params.dt;
        let mut times = Vec::new();
        for k in 0..self.params.steps() {
            let (norm, mean_n) = moments(&psi);
            if norm < NORM_FLOOR {
                return Err(Error::Numeric(format!(
                    "state norm {norm} collapsed at step {k}"
                )));
            }
            let p_jump = coupling * mean_n / norm;
            if rng.uniform() < p_jump {
                times.push(k as f64 * dt);
                // a, then the no-jump decay for the rest of the step
                for n in 1..psi.len() {
                    psi[n - 1] = psi[n] * (n as f64).sqrt();
                }
                psi.pop();
                if psi.is_empty() {
                    psi.push(Complex64::new(0.0, 0.0));
                }
            }
            for (n, z) in psi.iter_mut().enumerate() {
                *z *= self.decay[n];
            }
            let (norm, _) = moments(&psi);
            if norm < NORM_FLOOR {
                return Err(Error::Numeric(format!(
                    "state norm {norm} collapsed at step {k}"
                )));
            }
            let s = norm.sqrt().recip();
            psi.iter_mut().for_each(|z| *z *= s);
        }
        PhotoRecord::new(times, self.params.horizon)
    }
}

fn moments(psi: &[Complex64]) -> (f64, f64) {
    psi.iter().enumerate().fold((0.0, 0.0), |(s, m), (n, z)| {
        let p = z.norm_sqr();
        (s + p, m + n as f64 * p)
    })
}

/// Samples one record by sequential simulation of the jump / no-jump instrument.
pub fn sample_trajectory(
    rho: &Density<f64>,
    p: &InstrumentParams<f64>,
    rng: &mut SeededStream,
) -> Result<PhotoRecord> {
    PhotodetectorSampler::new(rho, *p)?.sample(rng)
}

/// Samples a count from the state-independent distribution `D_T(n)`.
pub fn sample_ostensible(horizon: f64, kappa_o: f64, rng: &mut SeededStream) -> Result<usize> {
    if !(horizon >= 0.0) {
        return Err(Error::Domain(format!(
            "horizon must be >= 0, got {horizon}"
        )));
    }
    let lambda = super::effective_mean(horizon, kappa_o);
    if lambda == 0.0 {
        return Ok(0);
    }
    let dist = Poisson::new(lambda).map_err(|e| Error::Domain(e.to_string()))?;
    Ok(dist.sample(rng) as usize)
}

/// Weight `Tr(K_T(n)^dag K_T(n) rho)` that turns ostensible samples into Born samples.
pub fn ostensible_weight(
    rho: &Density<f64>,
    n: usize,
    horizon: f64,
    p: &InstrumentParams<f64>,
) -> Result<f64> {
    if n >= p.dim {
        return Ok(0.0);
    }
    let k = kraus_class(n, horizon, p)?;
    Ok(rho.expectation(&(&k.adjoint() * &k)).re)
}

/// Photon counts of `count` independent trajectories, stream `(seed, i)` for trajectory `i`.
pub fn photodetect_ensemble(
    rho: &Density<f64>,
    p: &InstrumentParams<f64>,
    seed: u64,
    count: usize,
) -> Result<Vec<PhotoRecord>> {
    let sampler = PhotodetectorSampler::new(rho, *p)?;
    try_ensemble(seed, count, |_, mut rng| sampler.sample(&mut rng))
}

/// Histogram over `0..dim` of `count` ostensible samples weighted by [`ostensible_weight`],
/// scaled by `1/count` so the masses estimate the Born probabilities.
pub fn weighted_ostensible_ensemble(
    rho: &Density<f64>,
    horizon: f64,
    p: &InstrumentParams<f64>,
    seed: u64,
    count: usize,
) -> Result<Histogram> {
    let weights = (0..p.dim)
        .map(|n| ostensible_weight(rho, n, horizon, p))
        .collect::<Result<Vec<_>>>()?;
    let draws = ensemble(seed, count, |_, mut rng| {
        sample_ostensible(horizon, p.kappa_o, &mut rng)
    });
    let mut hist = Histogram::new(BinSpec::Counts { bins: p.dim });
    let scale = 1.0 / count.max(1) as f64;
    for n in draws {
        let n = n?;
        hist.add_count(n, weights.get(n).copied().unwrap_or(0.0) * scale);
    }
    Ok(hist)
}
