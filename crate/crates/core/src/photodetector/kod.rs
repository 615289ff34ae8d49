use crate::error::{Error, Result};
use crate::params::{screened_integral, screened_rate};
use crate::scalar::Real;

/// Smallest number of integration steps accepted by [`evolve_kod_poisson`].
pub const MIN_STEPS: usize = 100;
/// Smallest photon-number cutoff accepted by [`evolve_kod_poisson`].
pub const MIN_N_MAX: usize = 30;
/// Largest weight tolerated on the reflecting top level.
pub const TOP_MASS_LIMIT: f64 = 1e-8;
/// Largest drift of the total mass tolerated in a single step.
pub const MASS_DRIFT_LIMIT: f64 = 1e-10;

/// Effective Poisson mean `lambda(T) = 1 - exp(-kappa_o T)`.
pub fn effective_mean<T: Real>(horizon: T, kappa_o: T) -> T {
    screened_integral(horizon, kappa_o)
}

/// Kraus-operator distribution of the photodetector: Poisson in the photon count.
#[derive(Debug, Clone, PartialEq)]
pub struct PoissonKOD {
    pub lambda: f64,
    /// Numerically evolved weights over `n = 0..=n_max`, when produced by the ODE solver.
    pub weights: Option<Vec<f64>>,
}

impl PoissonKOD {
    /// Analytic `D(n) = exp(-lambda) lambda^n / n!`.
    pub fn pmf(&self, n: usize) -> f64 {
        if self.lambda == 0.0 {
            return if n == 0 { 1.0 } else { 0.0 };
        }
        (n as f64 * self.lambda.ln() - self.lambda - ln_factorial(n)).exp()
    }

    /// Analytic weights over `0..=n_max`.
    pub fn analytic(&self, n_max: usize) -> Vec<f64> {
        (0..=n_max).map(|n| self.pmf(n)).collect()
    }

    /// Largest deviation of the evolved weights from the analytic Poisson law.
    pub fn max_deviation(&self) -> Option<f64> {
        self.weights.as_ref().map(|w| {
            w.iter()
                .enumerate()
                .map(|(n, x)| (x - self.pmf(n)).abs())
                .fold(0.0, f64::max)
        })
    }
}

pub(crate) fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// Analytic Kraus-operator distribution at horizon `T`.
pub fn kod_poisson(horizon: f64, kappa_o: f64) -> Result<PoissonKOD> {
    if !(horizon >= 0.0) {
        return Err(Error::Domain(format!(
            "horizon must be >= 0, got {horizon}"
        )));
    }
    Ok(PoissonKOD {
        lambda: effective_mean(horizon, kappa_o),
        weights: None,
    })
}

/// Integrates `dD_t(n)/dt = kappa(t) (D_t(n-1) - D_t(n))` from `D_0(n) = delta_{n,0}`.
///
/// Fixed-step classical RK4 on `n = 0..=n_max`; the top level only receives flux, so the
/// total mass is conserved.
pub fn evolve_kod_poisson(
    horizon: f64,
    kappa_o: f64,
    n_max: usize,
    steps: usize,
) -> Result<PoissonKOD> {
    if !(horizon >= 0.0) {
        return Err(Error::Domain(format!(
            "horizon must be >= 0, got {horizon}"
        )));
    }
    if steps < MIN_STEPS || n_max < MIN_N_MAX {
        return Err(Error::InvalidParams(format!(
            "need steps >= {MIN_STEPS} and n_max >= {MIN_N_MAX}, got {steps} and {n_max}"
        )));
    }
    let mut d = vec![0.0; n_max + 1];
    d[0] = 1.0;
    let h = horizon / steps as f64;
    let mut mass = 1.0;
    for k in 0..steps {
        let t = k as f64 * h;
        rk4_step(&mut d, t, h, kappa_o);
        let now: f64 = d.iter().sum();
        if (now - mass).abs() > MASS_DRIFT_LIMIT {
            return Err(Error::Numeric(format!(
                "mass drifted by {} in step {k}",
                now - mass
            )));
        }
        mass = now;
    }
    if d[n_max] > TOP_MASS_LIMIT {
        return Err(Error::Truncation(format!(
            "mass {} reached n_max = {n_max}",
            d[n_max]
        )));
    }
    Ok(PoissonKOD {
        lambda: effective_mean(horizon, kappa_o),
        weights: Some(d),
    })
}

fn rhs(d: &[f64], rate: f64, out: &mut [f64]) {
    let top = d.len() - 1;
    for n in 0..=top {
        let inflow = if n > 0 { d[n - 1] } else { 0.0 };
        let outflow = if n < top { d[n] } else { 0.0 };
        out[n] = rate * (inflow - outflow);
    }
}

pub(crate) fn rk4_step(d: &mut [f64], t: f64, h: f64, kappa_o: f64) {
    let len = d.len();
    let (mut k1, mut k2, mut k3, mut k4) = (
        vec![0.0; len],
        vec![0.0; len],
        vec![0.0; len],
        vec![0.0; len],
    );
    let mut tmp = vec![0.0; len];
    rhs(d, screened_rate(t, kappa_o), &mut k1);
    for i in 0..len {
        tmp[i] = d[i] + 0.5 * h * k1[i];
    }
    rhs(&tmp, screened_rate(t + 0.5 * h, kappa_o), &mut k2);
    for i in 0..len {
        tmp[i] = d[i] + 0.5 * h * k2[i];
    }
    rhs(&tmp, screened_rate(t + 0.5 * h, kappa_o), &mut k3);
    for i in 0..len {
        tmp[i] = d[i] + h * k3[i];
    }
    rhs(&tmp, screened_rate(t + h, kappa_o), &mut k4);
    for i in 0..len {
        d[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
}
