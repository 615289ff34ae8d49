//! Heterodyne detection.
//!
//! Each `dt` step applies `L(dw) = exp(-a^dag a kappa_o dt/2 + a sqrt(kappa_o) dw^*)` for a
//! complex Wiener increment `dw`. Commuting the lowering exponentials to the right puts
//! the time-ordered product in the standard form `exp(-a^dag a kappa_o T/2) exp(a zeta^*)`,
//! so a record only matters through the linear functional `zeta`, whose ostensible law is
//! the complex Gaussian of covariance `Sigma(T) = 1 - exp(-kappa_o T)`.

mod cartan;
mod diffusion;
mod quadrature;
mod sampler;

pub use cartan::{
    cartan_identity_defect, cartan_transform, covariance_cooling, groundstate_completeness,
    groundstate_integrand, left_invariance_defect, trace_identity_defect, trace_tail_bound,
    CartanCoordinates,
};
pub use diffusion::{evolve_kod_diffusion, DiffusionField, DiffusionGrid};
pub use quadrature::{gauss_hermite, gauss_legendre, gaussian_phase_space, GaussRule};
pub use sampler::{
    het_ostensible_ensemble, het_trajectory_ensemble, ostensible_weight_het, sample_het_ostensible,
    sample_het_trajectory, HeterodyneSampler, NORM_FLOOR,
};

pub use crate::params::InstrumentParams;

use num_complex::Complex64;

use crate::error::{Error, Result};
use rayon::prelude::*;

use crate::fock::{
    exp_lowering, make_lowering, matrix_exp, number_exp, number_operator, Density, Operator,
    PureMixture,
};
use crate::params::screened_integral;
use crate::records::{grid_steps, SeededStream};
use crate::scalar::{convert, Cx, Real};

/// Gauss-Hermite order per axis used for phase-space integrals.
pub const DEFAULT_QUADRATURE_ORDER: usize = 32;

/// Heterodyne record: one complex increment per `dt` step of `[0, T)`.
#[derive(Debug, Clone, PartialEq)]
pub struct HeterodyneRecord {
    increments: Vec<Complex64>,
    dt: f64,
    horizon: f64,
}

impl HeterodyneRecord {
    pub fn new(increments: Vec<Complex64>, dt: f64, horizon: f64) -> Result<Self> {
        if !(dt > 0.0) {
            return Err(Error::InvalidRecord(format!(
                "dt must be positive, got {dt}"
            )));
        }
        let steps = grid_steps(horizon, dt).map_err(|e| Error::InvalidRecord(e.to_string()))?;
        if steps != increments.len() {
            return Err(Error::InvalidRecord(format!(
                "{} increments for {steps} steps",
                increments.len()
            )));
        }
        if increments
            .iter()
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::InvalidRecord("non-finite increment".into()));
        }
        Ok(Self {
            increments,
            dt,
            horizon,
        })
    }

    pub fn increments(&self) -> &[Complex64] {
        &self.increments
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    /// Left endpoints `t_j = j dt`.
    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.increments.len()).map(move |j| j as f64 * self.dt)
    }
}

/// Ostensible increment: complex Gaussian with `E|dw|^2 = dt`, `E dw^2 = 0`.
pub fn wiener_increment(rng: &mut SeededStream, dt: f64) -> Result<Complex64> {
    if !(dt > 0.0) {
        return Err(Error::Domain(format!("dt must be positive, got {dt}")));
    }
    Ok(rng.complex_gaussian(dt))
}

/// `L(dw)` by exponentiating the combined upper-triangular generator.
pub fn kraus_increment<T: Real>(dw: Cx<T>, p: &InstrumentParams<T>) -> Result<Operator<T>> {
    let n = number_operator::<T>(p.dim).scale_real(-p.step_coupling() * T::lit(0.5));
    let a = make_lowering::<T>(p.dim)?.scale(dw.conj() * p.kappa_o.sqrt());
    matrix_exp(&(&n + &a))
}

/// `sqrt(kappa_o) dw^* (1 - e^{-s})/s` with `s = kappa_o dt/2`: the lowering coefficient of
/// `L(dw) = e^{-s N} e^{c a}`.
pub fn increment_coefficient(dw: Complex64, kappa_o: f64, dt: f64) -> Complex64 {
    let s = 0.5 * kappa_o * dt;
    let shape = if s == 0.0 { 1.0 } else { -(-s).exp_m1() / s };
    dw.conj() * kappa_o.sqrt() * shape
}

/// `zeta = sum_t sqrt(kappa_o) dw_t exp(-kappa_o t/2)`, left endpoints.
pub fn record_functional(rec: &HeterodyneRecord, kappa_o: f64) -> Complex64 {
    let k = kappa_o.sqrt();
    rec.increments
        .iter()
        .zip(rec.times())
        .map(|(dw, t)| dw * k * (-0.5 * kappa_o * t).exp())
        .sum()
}

/// `zeta` for which the step product equals `K_T(zeta)` exactly on the `dt` grid.
///
/// Differs from [`record_functional`] by the factor `(1 - e^{-s})/s = 1 - kappa_o dt/4 + ...`.
pub fn exact_record_functional(rec: &HeterodyneRecord, kappa_o: f64) -> Complex64 {
    rec.increments
        .iter()
        .zip(rec.times())
        .map(|(dw, t)| {
            increment_coefficient(*dw, kappa_o, rec.dt).conj() * (-0.5 * kappa_o * t).exp()
        })
        .sum()
}

/// End-weighted Ornstein-Uhlenbeck functional `nu = sum_t sqrt(kappa_o) dw_t exp(-kappa_o (T - t)/2)`.
pub fn ou_functional(rec: &HeterodyneRecord, kappa_o: f64) -> Complex64 {
    let k = kappa_o.sqrt();
    rec.increments
        .iter()
        .zip(rec.times())
        .map(|(dw, t)| dw * k * (-0.5 * kappa_o * (rec.horizon - t)).exp())
        .sum()
}

/// `Sigma(T) = 1 - exp(-kappa_o T)`
pub fn effective_covariance<T: Real>(horizon: T, kappa_o: T) -> T {
    screened_integral(horizon, kappa_o)
}

/// Kraus-operator distribution of heterodyne: complex Gaussian of covariance `sigma`,
/// a point mass at the origin when `sigma = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianKOD {
    pub sigma: f64,
    /// Numerically evolved density, when produced by the diffusion solver.
    pub grid: Option<DiffusionField>,
}

impl GaussianKOD {
    pub fn is_delta(&self) -> bool {
        self.sigma == 0.0
    }

    /// `D(zeta) = exp(-|zeta|^2/sigma)/sigma` against `d^2 zeta / pi`.
    pub fn density(&self, zeta: Complex64) -> Result<f64> {
        if self.is_delta() {
            return Err(Error::Domain(
                "the T = 0 distribution is a point mass without density".into(),
            ));
        }
        Ok(gaussian_density(zeta, self.sigma))
    }

    /// Mass outside the disc `|zeta| <= radius`.
    pub fn tail_mass(&self, radius: f64) -> f64 {
        if self.is_delta() {
            return if radius >= 0.0 { 0.0 } else { 1.0 };
        }
        (-radius * radius / self.sigma).exp()
    }
}

pub(crate) fn gaussian_density(zeta: Complex64, sigma: f64) -> f64 {
    (-zeta.norm_sqr() / sigma).exp() / sigma
}

/// Analytic Kraus-operator distribution at horizon `T`.
pub fn kod_gaussian(horizon: f64, kappa_o: f64) -> Result<GaussianKOD> {
    if !(horizon >= 0.0) {
        return Err(Error::Domain(format!(
            "horizon must be >= 0, got {horizon}"
        )));
    }
    Ok(GaussianKOD {
        sigma: effective_covariance(horizon, kappa_o),
        grid: None,
    })
}

/// Class Kraus operator `K_T(zeta) = exp(-a^dag a kappa_o T/2) exp(a zeta^*)`.
pub fn kraus_class_het<T: Real>(
    zeta: Cx<T>,
    horizon: T,
    p: &InstrumentParams<T>,
) -> Result<Operator<T>> {
    let decay = number_exp(p.dim, p.kappa_o * horizon * T::lit(0.5))?;
    Ok(&decay * &exp_lowering(p.dim, zeta.conj()))
}

/// `K_T(zeta)^dag K_T(zeta)`
pub(crate) fn effect<T: Real>(
    zeta: Cx<T>,
    horizon: T,
    p: &InstrumentParams<T>,
) -> Result<Operator<T>> {
    let k = kraus_class_het(zeta, horizon, p)?;
    Ok(&k.adjoint() * &k)
}

/// POVM density `E_T(zeta) = D_T(zeta) K_T(zeta)^dag K_T(zeta)` against `d^2 zeta / pi`.
pub fn povm_element_het<T: Real>(
    zeta: Cx<T>,
    horizon: T,
    p: &InstrumentParams<T>,
) -> Result<Operator<T>> {
    let sigma = effective_covariance(horizon, p.kappa_o);
    if sigma <= T::zero() {
        return Err(Error::Domain("POVM density needs T > 0".into()));
    }
    let d = T::lit(gaussian_density(convert(zeta), sigma.as_f64()));
    Ok(effect(zeta, horizon, p)?.scale_real(d))
}

/// `int (d^2 zeta/pi) E_T(zeta)` by an `order x order` Gauss-Hermite rule.
pub fn povm_quadrature(
    horizon: f64,
    p: &InstrumentParams<f64>,
    order: usize,
) -> Result<Operator<f64>> {
    let sigma = effective_covariance(horizon, p.kappa_o);
    let mut acc = Operator::zeros(p.dim);
    for (zeta, w) in gaussian_phase_space(order, sigma)? {
        acc = &acc + &effect(zeta, horizon, p)?.scale_real(w);
    }
    Ok(acc)
}

/// Born density `P(zeta|rho) = D_T(zeta) Tr(K_T(zeta)^dag K_T(zeta) rho)`.
pub fn born_pdf<T: Real>(
    rho: &Density<T>,
    zeta: Cx<T>,
    horizon: T,
    p: &InstrumentParams<T>,
) -> Result<T> {
    if rho.dim() != p.dim {
        return Err(Error::InvalidDimension(format!(
            "state dimension {} vs {}",
            rho.dim(),
            p.dim
        )));
    }
    let e = povm_element_het(zeta, horizon, p)?;
    Ok(rho.expectation(&e).re.max(T::zero()))
}

/// Born probability of the rectangle `[re_lo, re_hi] x [im_lo, im_hi]` by an `n x n`
/// Gauss-Legendre rule.
pub fn born_cell_probability(
    rho: &Density<f64>,
    horizon: f64,
    p: &InstrumentParams<f64>,
    re: (f64, f64),
    im: (f64, f64),
    n: usize,
) -> Result<f64> {
    let mixture = PureMixture::from_density(rho, 1e-14)?;
    cell_probability(&mixture, horizon, p.kappa_o, re, im, n)
}

fn cell_probability(
    mixture: &PureMixture,
    horizon: f64,
    kappa_o: f64,
    re: (f64, f64),
    im: (f64, f64),
    n: usize,
) -> Result<f64> {
    let sigma = effective_covariance(horizon, kappa_o);
    if !(sigma > 0.0) {
        return Err(Error::Domain("Born density needs kappa_o T > 0".into()));
    }
    let (rx, ry) = (
        gauss_legendre(n, re.0, re.1)?,
        gauss_legendre(n, im.0, im.1)?,
    );
    let mut acc = 0.0;
    for (x, wx) in rx.nodes.iter().zip(&rx.weights) {
        for (y, wy) in ry.nodes.iter().zip(&ry.weights) {
            let z = Complex64::new(*x, *y);
            acc += wx
                * wy
                * gaussian_density(z, sigma)
                * ostensible_weight_het(mixture, z, horizon, kappa_o);
        }
    }
    Ok(acc / std::f64::consts::PI)
}

/// Born probabilities of the cells of a [`BinSpec::Grid`](crate::records::BinSpec), in the
/// histogram's flat order, with the outside bin last.
pub fn born_grid_pmf(
    rho: &Density<f64>,
    horizon: f64,
    p: &InstrumentParams<f64>,
    re_edges: &[f64],
    im_edges: &[f64],
    n: usize,
) -> Result<Vec<f64>> {
    if re_edges.len() < 2 || im_edges.len() < 2 {
        return Err(Error::Spec("grid needs at least two edges per axis".into()));
    }
    let mixture = PureMixture::from_density(rho, 1e-14)?;
    let cells: Vec<((f64, f64), (f64, f64))> = im_edges
        .windows(2)
        .flat_map(|iy| {
            re_edges
                .windows(2)
                .map(move |ix| ((ix[0], ix[1]), (iy[0], iy[1])))
        })
        .collect();
    let mut out = cells
        .par_iter()
        .map(|(re, im)| cell_probability(&mixture, horizon, p.kappa_o, *re, *im, n))
        .collect::<Result<Vec<_>>>()?;
    let inside: f64 = out.iter().sum();
    out.push((1.0 - inside).max(0.0));
    Ok(out)
}

/// Born mean, second moment `E|zeta|^2` and total mass by Gauss-Hermite quadrature.
pub fn born_moments(
    rho: &Density<f64>,
    horizon: f64,
    kappa_o: f64,
    order: usize,
) -> Result<(Complex64, f64, f64)> {
    let sigma = effective_covariance(horizon, kappa_o);
    let mixture = PureMixture::from_density(rho, 1e-14)?;
    let (mut mean, mut second, mut mass) = (Complex64::new(0.0, 0.0), 0.0, 0.0);
    for (z, w) in gaussian_phase_space(order, sigma)? {
        let q = w * ostensible_weight_het(&mixture, z, horizon, kappa_o);
        mean += z * q;
        second += z.norm_sqr() * q;
        mass += q;
    }
    Ok((mean, second, mass))
}

/// `|| E_T(zeta) - |zeta><zeta| ||` on the top-left `sub x sub` block.
pub fn projector_convergence_het(
    zeta: Complex64,
    horizon: f64,
    p: &InstrumentParams<f64>,
    sub: usize,
) -> Result<f64> {
    let e = povm_element_het(zeta, horizon, p)?;
    let psi = crate::fock::coherent_state(p.dim, zeta);
    let amps = psi.amplitudes();
    let proj = ndarray::Array2::from_shape_fn((p.dim, p.dim), |(i, j)| amps[i] * amps[j].conj());
    crate::fock::subblock_norm_diff(&e, &Operator::from_matrix(proj)?, sub)
}
