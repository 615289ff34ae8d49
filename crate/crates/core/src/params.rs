use crate::error::{Error, Result};
use crate::records::grid_steps;
use crate::scalar::Real;

/// Largest `kappa_o dt` accepted: the per-step Kraus operators are first order in it.
pub const MAX_STEP_COUPLING: f64 = 0.01;

/// Observation rate, temporal resolution, horizon and truncation shared by both instruments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InstrumentParams<T: Real> {
    /// Observation rate `kappa_o` (1/time).
    pub kappa_o: T,
    /// Temporal resolution `dt` (time).
    pub dt: T,
    /// Horizon `T` (time), an integer multiple of `dt`.
    pub horizon: T,
    /// Truncation dimension.
    pub dim: usize,
}

impl<T: Real> InstrumentParams<T> {
    pub fn new(kappa_o: T, dt: T, horizon: T, dim: usize) -> Result<Self> {
        if !(kappa_o >= T::zero()) || !kappa_o.is_finite() {
            return Err(Error::InvalidParams(format!(
                "kappa_o must be finite and >= 0, got {kappa_o}"
            )));
        }
        if !(dt >= T::zero()) || !dt.is_finite() || !(horizon >= T::zero()) || !horizon.is_finite()
        {
            return Err(Error::InvalidParams(format!(
                "need dt >= 0 and T >= 0, got dt={dt}, T={horizon}"
            )));
        }
        if dim < 2 {
            return Err(Error::InvalidDimension(format!(
                "truncation must be >= 2, got {dim}"
            )));
        }
        if (kappa_o * dt).as_f64() > MAX_STEP_COUPLING {
            return Err(Error::InvalidParams(format!(
                "kappa_o dt = {} exceeds the weak-coupling bound {MAX_STEP_COUPLING}",
                kappa_o * dt
            )));
        }
        if dt > T::zero() {
            grid_steps(horizon.as_f64(), dt.as_f64())?;
        }
        Ok(Self {
            kappa_o,
            dt,
            horizon,
            dim,
        })
    }

    /// Like [`InstrumentParams::new`] but snaps `horizon` to the nearest multiple of `dt`.
    pub fn on_grid(kappa_o: T, dt: T, horizon: T, dim: usize) -> Result<Self> {
        let snapped = if dt > T::zero() {
            (horizon / dt).round() * dt
        } else {
            horizon
        };
        Self::new(kappa_o, dt, snapped, dim)
    }

    /// Number of `dt` steps in `[0, T)`.
    pub fn steps(&self) -> usize {
        if self.dt > T::zero() {
            (self.horizon / self.dt).round().to_usize().unwrap_or(0)
        } else {
            0
        }
    }

    /// `kappa_o dt`
    pub fn step_coupling(&self) -> T {
        self.kappa_o * self.dt
    }
}

/// `1 - exp(-kappa_o T)`: the effective Poisson mean of the photodetector and the effective
/// covariance of heterodyne.
pub fn screened_integral<T: Real>(horizon: T, kappa_o: T) -> T {
    -(-kappa_o * horizon).exp_m1()
}

/// Screened observation rate `kappa(t) = kappa_o exp(-kappa_o t)`.
pub fn screened_rate<T: Real>(t: T, kappa_o: T) -> T {
    kappa_o * (-kappa_o * t).exp()
}
