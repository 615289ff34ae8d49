use num_complex::Complex64;

use super::{effective_covariance, increment_coefficient, record_functional, HeterodyneRecord};
use crate::error::{Error, Result};
use crate::fock::{Density, PureMixture};
use crate::params::InstrumentParams;
use crate::records::{try_ensemble, SeededStream};

/// Squared norm below which a conditional state is considered collapsed.
pub const NORM_FLOOR: f64 = 1e-14;

const ENSEMBLE_CUTOFF: f64 = 1e-14;

/// Relative size below which a further term of the `e^{c a}` series is dropped.
const SERIES_TOLERANCE: f64 = 1e-18;

/// `psi <- e^{c a} psi` by the terminating series.
pub(crate) fn apply_exp_lowering(psi: &mut [Complex64], c: Complex64) {
    let n = psi.len();
    let mut term = psi.to_vec();
    let scale = psi.iter().map(|z| z.norm_sqr()).sum::<f64>();
    for k in 1..n {
        let ck = c / k as f64;
        let mut size = 0.0;
        for m in 0..n - k {
            term[m] = ck * (m as f64 + 1.0).sqrt() * term[m + 1];
            size += term[m].norm_sqr();
        }
        for z in &mut term[n - k..] {
            *z = Complex64::new(0.0, 0.0);
        }
        for m in 0..n - k {
            psi[m] += term[m];
        }
        if size <= SERIES_TOLERANCE * SERIES_TOLERANCE * scale {
            break;
        }
    }
}

/// Sequential heterodyne sampler under the true statistics of a fixed input state.
///
/// As for photodetection, the input is split into its eigen-ensemble and each trajectory
/// follows one pure component. A step draws `dw ~ CN(sqrt(kappa_o) <a> dt, dt)` and applies
/// `L(dw) = e^{-s N} e^{c a}` (exact factorisation, `s = kappa_o dt / 2`) to the amplitudes.
#[derive(Debug, Clone)]
pub struct HeterodyneSampler {
    params: InstrumentParams<f64>,
    mixture: PureMixture,
    decay: Vec<f64>,
}

impl HeterodyneSampler {
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
        let s = 0.5 * params.step_coupling();
        let decay = (0..params.dim).map(|n| (-s * n as f64).exp()).collect();
        Ok(Self {
            params,
            mixture,
            decay,
        })
    }

    pub fn params(&self) -> &InstrumentParams<f64> {
        &self.params
    }

    /// Record and final normalised conditional state of one trajectory.
    pub fn sample_with_state(
        &self,
        rng: &mut SeededStream,
    ) -> Result<(HeterodyneRecord, Vec<Complex64>)> {
        let p = &self.params;
        let mut psi = self.mixture.pick(rng.uniform()).to_vec();
        normalize(&mut psi, 0)?;
        let root_kappa = p.kappa_o.sqrt();
        let mut increments = Vec::with_capacity(p.steps());
        for k in 0..p.steps() {
            let mean_a: Complex64 = (1..psi.len())
                .map(|n| psi[n - 1].conj() * psi[n] * (n as f64).sqrt())
                .sum();
            let dw = mean_a * root_kappa * p.dt + rng.complex_gaussian(p.dt);
            apply_exp_lowering(&mut psi, increment_coefficient(dw, p.kappa_o, p.dt));
            for (z, d) in psi.iter_mut().zip(&self.decay) {
                *z *= d;
            }
            normalize(&mut psi, k)?;
            increments.push(dw);
        }
        Ok((HeterodyneRecord::new(increments, p.dt, p.horizon)?, psi))
    }

    pub fn sample(&self, rng: &mut SeededStream) -> Result<HeterodyneRecord> {
        Ok(self.sample_with_state(rng)?.0)
    }
}

fn normalize(psi: &mut [Complex64], step: usize) -> Result<()> {
    let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
    if !(norm >= NORM_FLOOR) {
        return Err(Error::Numeric(format!(
            "state norm {norm} collapsed at step {step}"
        )));
    }
    let s = norm.sqrt().recip();
    psi.iter_mut().for_each(|z| *z *= s);
    Ok(())
}

/// Samples one record by sequential simulation under the true statistics.
pub fn sample_het_trajectory(
    rho: &Density<f64>,
    p: &InstrumentParams<f64>,
    rng: &mut SeededStream,
) -> Result<HeterodyneRecord> {
    HeterodyneSampler::new(rho, *p)?.sample(rng)
}

/// `zeta` values of `count` trajectories, stream `(seed, i)` for trajectory `i`.
pub fn het_trajectory_ensemble(
    rho: &Density<f64>,
    p: &InstrumentParams<f64>,
    seed: u64,
    count: usize,
) -> Result<Vec<Complex64>> {
    let sampler = HeterodyneSampler::new(rho, *p)?;
    try_ensemble(seed, count, |_, mut rng| {
        Ok(record_functional(&sampler.sample(&mut rng)?, p.kappa_o))
    })
}

/// Samples `zeta` from `D_T` directly; the `T = 0` distribution is the point mass at 0.
pub fn sample_het_ostensible(
    horizon: f64,
    kappa_o: f64,
    rng: &mut SeededStream,
) -> Result<Complex64> {
    if !(horizon >= 0.0) {
        return Err(Error::Domain(format!(
            "horizon must be >= 0, got {horizon}"
        )));
    }
    let sigma = effective_covariance(horizon, kappa_o);
    if sigma == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    Ok(rng.complex_gaussian(sigma))
}

/// `Tr(K_T(zeta)^dag K_T(zeta) rho)`, evaluated on the pure components of `rho`.
pub fn ostensible_weight_het(
    mixture: &PureMixture,
    zeta: Complex64,
    horizon: f64,
    kappa_o: f64,
) -> f64 {
    let r = kappa_o * horizon;
    mixture
        .iter()
        .map(|(w, amps)| {
            let mut v = amps.to_vec();
            apply_exp_lowering(&mut v, zeta.conj());
            w * v
                .iter()
                .enumerate()
                .map(|(n, z)| (-r * n as f64).exp() * z.norm_sqr())
                .sum::<f64>()
        })
        .sum()
}

/// `(zeta, weight)` pairs of `count` ostensible samples; weighted averages estimate Born
/// expectations.
pub fn het_ostensible_ensemble(
    rho: &Density<f64>,
    horizon: f64,
    kappa_o: f64,
    seed: u64,
    count: usize,
) -> Result<Vec<(Complex64, f64)>> {
    let mixture = PureMixture::from_density(rho, ENSEMBLE_CUTOFF)?;
    try_ensemble(seed, count, |_, mut rng| {
        let zeta = sample_het_ostensible(horizon, kappa_o, &mut rng)?;
        Ok((
            zeta,
            ostensible_weight_het(&mixture, zeta, horizon, kappa_o),
        ))
    })
}
