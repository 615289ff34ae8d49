//! Cartan splitting of the heterodyne Kraus operators and the identities that follow.

use ndarray::Array2;
use num_complex::Complex64;

use super::{effect, effective_covariance, gaussian_phase_space, InstrumentParams};
use crate::error::{Error, Result};
use crate::fock::{
    coherent_state, displaced_number_states, displacement_work_dim, exp_lowering, linalg,
    number_exp,
};
use crate::records::ensemble;

/// Largest quadrature weight tolerated on coherent states that the truncation cuts off.
pub const EXTENT_LIMIT: f64 = 1e-6;

/// `e^{-a^dag a r} e^{a zeta^*} = D_beta e^{-a^dag a r + scalar_log} D_alpha^{-1}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CartanCoordinates {
    pub alpha: Complex64,
    pub beta: Complex64,
    /// `|zeta|^2 / (2 Sigma_r)`
    pub scalar_log: f64,
    pub r: f64,
    /// `Sigma_r = 1 - e^{-2r}`
    pub sigma_r: f64,
}

pub fn cartan_transform(zeta: Complex64, r: f64) -> Result<CartanCoordinates> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::Domain(format!(
            "Cartan splitting needs finite r > 0, got {r}"
        )));
    }
    let sigma_r = -(-2.0 * r).exp_m1();
    let alpha = zeta / sigma_r;
    Ok(CartanCoordinates {
        alpha,
        beta: alpha * (-r).exp(),
        scalar_log: zeta.norm_sqr() / (2.0 * sigma_r),
        r,
        sigma_r,
    })
}

/// Top-left `sub x sub` block of `D_left e^{-r a^dag a} D_right^{-1}`.
///
/// Row `m` of `D_gamma` is column `m` of `D_{-gamma}` conjugated, so both factors come from
/// [`displaced_number_states`] on a working space wide enough for the larger amplitude;
/// the sum over intermediate levels runs over that whole space.
fn conjugated_number_exp(
    left: Complex64,
    right: Complex64,
    r: f64,
    sub: usize,
) -> Array2<Complex64> {
    let work = displacement_work_dim(left.norm().max(right.norm()), sub);
    let xl = displaced_number_states(work, -left, sub);
    let xr = displaced_number_states(work, -right, sub);
    let mut out = Array2::zeros((sub, sub));
    for k in 0..work {
        let w = (-r * k as f64).exp();
        if w == 0.0 {
            break;
        }
        for m in 0..sub {
            let lm = xl[[k, m]].conj() * w;
            for n in 0..sub {
                out[[m, n]] += lm * xr[[k, n]];
            }
        }
    }
    out
}

/// Subblock spectral norm of `e^{-a^dag a r} e^{a zeta^*} - D_beta e^{-a^dag a r + scalar_log} D_alpha^{-1}`.
///
/// The left side is exact in dimension `dim`. The right side multiplies exponentially large
/// and small factors (`e^{scalar_log}` reaches `e^{11}` at `|zeta| = 2`, `r = 0.1`), so it is
/// evaluated from exact displaced number states rather than from truncated products.
pub fn cartan_identity_defect(zeta: Complex64, r: f64, dim: usize, sub: usize) -> Result<f64> {
    if sub == 0 || sub > dim {
        return Err(Error::InvalidDimension(format!(
            "subblock {sub} outside dimension {dim}"
        )));
    }
    let c = cartan_transform(zeta, r)?;
    let lhs = &number_exp(dim, r)? * &exp_lowering(dim, zeta.conj());
    let rhs = conjugated_number_exp(c.beta, c.alpha, r, sub).mapv(|z| z * c.scalar_log.exp());
    let diff = &linalg::top_left(lhs.matrix().view(), sub) - &rhs;
    linalg::spectral_norm(diff.view())
}

/// Subblock norm of `Sigma e^{-Sigma|alpha|^2} K^dag K(Sigma alpha) - Sigma D_alpha e^{-a^dag a kappa_o T} D_alpha^{-1}`:
/// the POVM density in `alpha = zeta / Sigma` coordinates against its left-invariant form.
pub fn left_invariance_defect(
    alpha: Complex64,
    horizon: f64,
    p: &InstrumentParams<f64>,
    sub: usize,
) -> Result<f64> {
    let sigma = effective_covariance(horizon, p.kappa_o);
    if !(sigma > 0.0) {
        return Err(Error::Domain("left invariance needs kappa_o T > 0".into()));
    }
    if sub == 0 || sub > p.dim {
        return Err(Error::InvalidDimension(format!(
            "subblock {sub} outside dimension {}",
            p.dim
        )));
    }
    let e =
        effect(alpha * sigma, horizon, p)?.scale_real(sigma * (-sigma * alpha.norm_sqr()).exp());
    let rhs = conjugated_number_exp(alpha, alpha, p.kappa_o * horizon, sub).mapv(|z| z * sigma);
    let diff = &linalg::top_left(e.matrix().view(), sub) - &rhs;
    linalg::spectral_norm(diff.view())
}

/// `|Tr e^{-a^dag a kappa_o T} - 1/Sigma(T)|` in dimension `dim`.
pub fn trace_identity_defect(horizon: f64, kappa_o: f64, dim: usize) -> Result<f64> {
    let sigma = effective_covariance(horizon, kappa_o);
    if !(sigma > 0.0) {
        return Err(Error::Domain("trace identity needs kappa_o T > 0".into()));
    }
    let tr = number_exp::<f64>(dim, kappa_o * horizon)?.trace().re;
    Ok((tr - 1.0 / sigma).abs())
}

/// Truncation tail `e^{-dim kappa_o T} / (1 - e^{-kappa_o T})` of the trace.
pub fn trace_tail_bound(horizon: f64, kappa_o: f64, dim: usize) -> f64 {
    let x = kappa_o * horizon;
    (-(dim as f64) * x).exp() / -(-x).exp_m1()
}

/// `<alpha| e^{-a^dag a kappa_o T} |alpha>` with the coherent state truncated to `dim` levels.
pub fn groundstate_integrand(
    alpha: Complex64,
    horizon: f64,
    kappa_o: f64,
    dim: usize,
) -> Result<f64> {
    let psi = coherent_state(dim, alpha);
    Ok(psi.expectation(&number_exp(dim, kappa_o * horizon)?).re)
}

/// `|int (d^2 alpha/pi) <alpha|e^{-a^dag a kappa_o T}|alpha> - 1/Sigma(T)|` by a 32 x 32
/// Gauss-Hermite rule matched to the integrand's width.
///
/// Fails with an extent error when nodes carrying non-negligible weight sit on coherent
/// states that `dim` levels cannot hold.
pub fn groundstate_completeness(horizon: f64, kappa_o: f64, dim: usize) -> Result<f64> {
    let sigma = effective_covariance(horizon, kappa_o);
    if !(sigma > 0.0) {
        return Err(Error::Domain(
            "groundstate completeness needs kappa_o T > 0".into(),
        ));
    }
    let r = kappa_o * horizon;
    // nodes for the weight e^{-Sigma |alpha|^2} / Sigma
    let mut integral = 0.0;
    let mut lost = 0.0;
    for (z, w) in gaussian_phase_space(super::DEFAULT_QUADRATURE_ORDER, 1.0 / sigma)? {
        let psi = coherent_state(dim, z);
        let f = psi.expectation(&number_exp(dim, r)?).re;
        // divide out the weight the rule already carries
        let g = f * (sigma * z.norm_sqr()).exp() / sigma;
        integral += w * g;
        lost += w * truncated_tail(z.norm_sqr(), r, dim) * (sigma * z.norm_sqr()).exp() / sigma;
    }
    if lost > EXTENT_LIMIT {
        return Err(Error::Extent(format!(
            "truncation at {dim} levels drops quadrature mass {lost}"
        )));
    }
    Ok((integral - 1.0 / sigma).abs())
}

/// `e^{-x} sum_{n >= dim} (x e^{-r})^n / n!`: the part of `<alpha|e^{-r a^dag a}|alpha>`,
/// `x = |alpha|^2`, carried by levels the truncation drops.
fn truncated_tail(x: f64, r: f64, dim: usize) -> f64 {
    let y = x * (-r).exp();
    if y == 0.0 {
        return 0.0;
    }
    // terms in log space: the first ones can underflow while later ones are large
    let mut ln_term = -x + dim as f64 * y.ln() - (1..=dim).map(|k| (k as f64).ln()).sum::<f64>();
    let mut acc = 0.0;
    let mut n = dim;
    loop {
        let term = ln_term.exp();
        acc += term;
        if (n as f64) >= y && term <= 1e-18 * acc {
            break acc;
        }
        n += 1;
        ln_term += y.ln() - (n as f64).ln();
    }
}

/// Empirical `<alpha^* alpha>` and `<beta^* beta>` of `zeta ~ D_T` mapped through
/// [`cartan_transform`] with `r = kappa_o T / 2`; sample `i` uses stream `(seed, i)`.
pub fn covariance_cooling(
    horizon: f64,
    kappa_o: f64,
    samples: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    let sigma = effective_covariance(horizon, kappa_o);
    if !(sigma > 0.0) || samples == 0 {
        return Err(Error::Domain(
            "covariance cooling needs kappa_o T > 0 and samples > 0".into(),
        ));
    }
    let r = 0.5 * kappa_o * horizon;
    let pairs = ensemble(seed, samples, |_, mut rng| {
        let c = cartan_transform(rng.complex_gaussian(sigma), r)?;
        Ok::<_, Error>((c.alpha.norm_sqr(), c.beta.norm_sqr()))
    });
    let (mut sa, mut sb) = (0.0, 0.0);
    for pair in pairs {
        let (a, b) = pair?;
        sa += a;
        sb += b;
    }
    Ok((sa / samples as f64, sb / samples as f64))
}
