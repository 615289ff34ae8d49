//! The continual photodetector.
//!
//! Each `dt` step applies either the no-jump operator `K_0 = exp(-a^dag a kappa_o dt/2)` or,
//! when a photon is registered, the jump `K_1 = sqrt(kappa_o dt) a`. A record reduces to a
//! photon count `n`, a scalar weight and the standard-ordered operator
//! `exp(-a^dag a kappa_o T/2) a^n`; the weights summed over jump times form the Poisson
//! Kraus-operator distribution with mean `lambda(T) = 1 - exp(-kappa_o T)`.

mod kod;
mod sampler;

pub use kod::{
    effective_mean, evolve_kod_poisson, kod_poisson, PoissonKOD, MASS_DRIFT_LIMIT, MIN_N_MAX,
    MIN_STEPS, TOP_MASS_LIMIT,
};
pub use sampler::{
    ostensible_weight, photodetect_ensemble, sample_ostensible, sample_trajectory,
    weighted_ostensible_ensemble, PhotodetectorSampler, NORM_FLOOR,
};

pub use crate::params::InstrumentParams;

use crate::error::{Error, Result};
use crate::fock::{make_lowering, number_exp, Density, Ket, Operator};
use crate::records::grid_steps;
use crate::scalar::{real, Real};

/// Tolerance below which a Born probability is treated as rounding noise.
pub const NEGATIVE_PROBABILITY_TOLERANCE: f64 = 1e-10;

/// Jump operator `K_1 = sqrt(kappa_o dt) a`.
pub fn kraus_jump<T: Real>(p: &InstrumentParams<T>) -> Result<Operator<T>> {
    Ok(make_lowering::<T>(p.dim)?.scale_real(p.step_coupling().sqrt()))
}

/// No-jump operator `K_0 = exp(-a^dag a kappa_o dt / 2)`.
pub fn kraus_no_jump<T: Real>(p: &InstrumentParams<T>) -> Result<Operator<T>> {
    number_exp(p.dim, p.step_coupling() * T::lit(0.5))
}

/// Operator applied over one step. A jump is registered at the left endpoint of its step
/// and followed by no-jump evolution for the rest of the step (`K_0 K_1`).
pub fn step_operator<T: Real>(p: &InstrumentParams<T>, jump: bool) -> Result<Operator<T>> {
    let k0 = kraus_no_jump(p)?;
    if jump {
        Ok(&k0 * &kraus_jump(p)?)
    } else {
        Ok(k0)
    }
}

/// Finite-resolution photodetection record: jump times in `[0, T)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhotoRecord {
    jump_times: Vec<f64>,
    horizon: f64,
}

impl PhotoRecord {
    pub fn new(jump_times: Vec<f64>, horizon: f64) -> Result<Self> {
        if !(horizon >= 0.0) {
            return Err(Error::InvalidRecord(format!(
                "horizon must be >= 0, got {horizon}"
            )));
        }
        if let Some(t) = jump_times.iter().find(|t| !(**t >= 0.0) || **t >= horizon) {
            return Err(Error::InvalidRecord(format!(
                "jump time {t} outside [0, {horizon})"
            )));
        }
        if jump_times.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidRecord(
                "jump times must be strictly increasing".into(),
            ));
        }
        Ok(Self {
            jump_times,
            horizon,
        })
    }

    pub fn empty(horizon: f64) -> Self {
        Self {
            jump_times: Vec::new(),
            horizon,
        }
    }

    pub fn jump_times(&self) -> &[f64] {
        &self.jump_times
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn count(&self) -> usize {
        self.jump_times.len()
    }
}

/// Standard-order form of a record.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecordReduction {
    pub count: usize,
    /// `(kappa_o dt)^n exp(-kappa_o (T_1 + ... + T_n))`
    pub weight: f64,
}

impl RecordReduction {
    /// Operator `sqrt(weight) exp(-a^dag a kappa_o T/2) a^n` whose operation the record represents.
    pub fn operator<T: Real>(&self, p: &InstrumentParams<T>) -> Result<Operator<T>> {
        let k = standard_operator(self.count, p.horizon, p)?;
        Ok(k.scale_real(T::lit(self.weight.sqrt())))
    }
}

/// Reduces a record to its photon count and scalar weight.
pub fn reduce_record<T: Real>(
    rec: &PhotoRecord,
    p: &InstrumentParams<T>,
) -> Result<RecordReduction> {
    let (kappa, dt, horizon) = (p.kappa_o.as_f64(), p.dt.as_f64(), p.horizon.as_f64());
    if (rec.horizon - horizon).abs() > 1e-12 * horizon.max(1.0) {
        return Err(Error::InvalidRecord(format!(
            "record horizon {} differs from {horizon}",
            rec.horizon
        )));
    }
    if let Some(t) = rec.jump_times.iter().find(|t| **t >= horizon) {
        return Err(Error::InvalidRecord(format!(
            "jump time {t} not before T = {horizon}"
        )));
    }
    if dt > 0.0 {
        for &t in &rec.jump_times {
            grid_steps(t, dt)
                .map_err(|_| Error::InvalidRecord(format!("jump time {t} off the dt grid")))?;
        }
    }
    let n = rec.count();
    let sum: f64 = rec.jump_times.iter().sum();
    let weight = (kappa * dt).powi(n as i32) * (-kappa * sum).exp();
    Ok(RecordReduction { count: n, weight })
}

/// Time-ordered product of the step operators of a record (brute force).
pub fn record_product<T: Real>(rec: &PhotoRecord, p: &InstrumentParams<T>) -> Result<Operator<T>> {
    let dt = p.dt.as_f64();
    let k0 = step_operator(p, false)?;
    let k1 = step_operator(p, true)?;
    let jumps: Vec<usize> = rec
        .jump_times
        .iter()
        .map(|t| (t / dt).round() as usize)
        .collect();
    let mut prod = Operator::identity(p.dim);
    let mut next = jumps.iter().peekable();
    for step in 0..p.steps() {
        let op = if next.peek() == Some(&&step) {
            next.next();
            &k1
        } else {
            &k0
        };
        prod = op * &prod;
    }
    Ok(prod)
}

/// `exp(-a^dag a kappa_o T / 2) a^n`
fn standard_operator<T: Real>(
    n: usize,
    horizon: T,
    p: &InstrumentParams<T>,
) -> Result<Operator<T>> {
    if n >= p.dim {
        return Err(Error::InvalidDimension(format!(
            "count {n} not below truncation {}",
            p.dim
        )));
    }
    let a = make_lowering::<T>(p.dim)?;
    let mut op = number_exp(p.dim, p.kappa_o * horizon * T::lit(0.5))?;
    for _ in 0..n {
        op = &op * &a;
    }
    Ok(op)
}

/// Class Kraus operator `K_T(n) = exp(lambda(T)/2) exp(-a^dag a kappa_o T/2) a^n`.
pub fn kraus_class<T: Real>(n: usize, horizon: T, p: &InstrumentParams<T>) -> Result<Operator<T>> {
    let lambda = effective_mean(horizon, p.kappa_o);
    Ok(standard_operator(n, horizon, p)?.scale_real((lambda * T::lit(0.5)).exp()))
}

/// Analytic `D_T(n)` in the working precision.
fn kod_weight<T: Real>(n: usize, horizon: T, kappa_o: T) -> T {
    T::lit(
        PoissonKOD {
            lambda: effective_mean(horizon, kappa_o).as_f64(),
            weights: None,
        }
        .pmf(n),
    )
}

/// POVM element `E_T(n) = D_T(n) K_T(n)^dag K_T(n)`.
pub fn povm_element<T: Real>(n: usize, horizon: T, p: &InstrumentParams<T>) -> Result<Operator<T>> {
    let k = kraus_class(n, horizon, p)?;
    Ok((&k.adjoint() * &k).scale_real(kod_weight(n, horizon, p.kappa_o)))
}

/// Sum of the POVM elements for `n = 0..=n_max`.
pub fn povm_sum<T: Real>(n_max: usize, horizon: T, p: &InstrumentParams<T>) -> Result<Operator<T>> {
    let mut acc = Operator::zeros(p.dim);
    for n in 0..=n_max.min(p.dim - 1) {
        acc = &acc + &povm_element(n, horizon, p)?;
    }
    Ok(acc)
}

/// `|| E_T(n) - |n><n| ||` on the top-left `sub x sub` block.
pub fn projector_convergence<T: Real>(
    n: usize,
    horizon: T,
    p: &InstrumentParams<T>,
    sub: usize,
) -> Result<T> {
    if n >= sub {
        return Err(Error::InvalidDimension(format!(
            "count {n} not inside subblock {sub}"
        )));
    }
    let e = povm_element(n, horizon, p)?;
    let mut proj = Operator::zeros(p.dim).into_matrix();
    proj[[n, n]] = real(T::one());
    crate::fock::subblock_norm_diff(&e, &Operator::from_matrix(proj)?, sub)
}

/// Born distribution `P(n|rho) = D_T(n) Tr(K_T(n)^dag K_T(n) rho)` for `n < dim`.
pub fn born_pmf<T: Real>(rho: &Density<T>, horizon: T, p: &InstrumentParams<T>) -> Result<Vec<T>> {
    if rho.dim() != p.dim {
        return Err(Error::InvalidDimension(format!(
            "state dimension {} vs {}",
            rho.dim(),
            p.dim
        )));
    }
    let mut out = Vec::with_capacity(p.dim);
    for n in 0..p.dim {
        let prob = rho.expectation(&povm_element(n, horizon, p)?).re;
        if prob.as_f64() < -NEGATIVE_PROBABILITY_TOLERANCE {
            return Err(Error::Numeric(format!(
                "negative probability {prob} for n = {n}"
            )));
        }
        out.push(prob.max(T::zero()));
    }
    Ok(out)
}

/// Born probability of count `n` for a pure state.
pub fn born_probability_pure<T: Real>(
    psi: &Ket<T>,
    n: usize,
    horizon: T,
    p: &InstrumentParams<T>,
) -> Result<T> {
    Ok(psi.expectation(&povm_element(n, horizon, p)?).re)
}
