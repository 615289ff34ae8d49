//! Gauss rules used for phase-space integrals.

use crate::error::{Error, Result};

/// Nodes and weights of a one-dimensional Gauss rule.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Gauss-Hermite rule for `int f(x) exp(-x^2) dx`, exact for polynomials of degree `< 2n`.
///
/// Roots by Newton iteration on the orthonormal Hermite recurrence, started from the
/// usual asymptotic guesses and refined from the previously found roots.
pub fn gauss_hermite(n: usize) -> Result<GaussRule> {
    if n == 0 || n > 200 {
        return Err(Error::InvalidParams(format!(
            "Gauss-Hermite order must be in 1..=200, got {n}"
        )));
    }
    let pim4 = std::f64::consts::PI.powf(-0.25);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    let nf = n as f64;
    let mut z = 0.0;
    for i in 0..m {
        z = match i {
            0 => (2.0 * nf + 1.0).sqrt() - 1.85575 * (2.0 * nf + 1.0).powf(-1.0 / 6.0),
            1 => z - 1.14 * nf.powf(0.426) / z,
            2 => 1.86 * z - 0.86 * nodes[0],
            3 => 1.91 * z - 0.91 * nodes[1],
            _ => 2.0 * z - nodes[i - 2],
        };
        let mut dp = 0.0;
        let mut converged = false;
        for _ in 0..100 {
            let (p, d) = hermite_orthonormal(n, z, pim4);
            dp = d;
            let z1 = z;
            z = z1 - p / d;
            if (z - z1).abs() <= 1e-15 * z.abs().max(1.0) {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::Numeric(format!(
                "Gauss-Hermite root {i} of {n} did not converge"
            )));
        }
        let (_, d) = hermite_orthonormal(n, z, pim4);
        dp = if d.is_finite() { d } else { dp };
        nodes[i] = z;
        nodes[n - 1 - i] = -z;
        weights[i] = 2.0 / (dp * dp);
        weights[n - 1 - i] = weights[i];
    }
    // ascending order
    nodes.reverse();
    weights.reverse();
    Ok(GaussRule { nodes, weights })
}

/// Orthonormal Hermite value `p_n(z)` and derivative.
fn hermite_orthonormal(n: usize, z: f64, pim4: f64) -> (f64, f64) {
    let mut p1 = pim4;
    let mut p2 = 0.0;
    for j in 0..n {
        let p3 = p2;
        p2 = p1;
        let jf = j as f64;
        p1 = z * (2.0 / (jf + 1.0)).sqrt() * p2 - (jf / (jf + 1.0)).sqrt() * p3;
    }
    (p1, (2.0 * n as f64).sqrt() * p2)
}

/// Gauss-Legendre rule on `[lo, hi]`.
pub fn gauss_legendre(n: usize, lo: f64, hi: f64) -> Result<GaussRule> {
    if n == 0 {
        return Err(Error::InvalidParams(
            "Gauss-Legendre order must be positive".into(),
        ));
    }
    let (mid, half) = (0.5 * (hi + lo), 0.5 * (hi - lo));
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p1, mut p2) = (1.0, 0.0);
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = ((2.0 * jf + 1.0) * z * p2 - jf * p3) / (jf + 1.0);
            }
            dp = nf * (z * p1 - p2) / (z * z - 1.0);
            let z1 = z;
            z = z1 - p1 / dp;
            if (z - z1).abs() <= 1e-15 {
                break;
            }
        }
        nodes[i] = mid - half * z;
        nodes[n - 1 - i] = mid + half * z;
        weights[i] = 2.0 * half / ((1.0 - z * z) * dp * dp);
        weights[n - 1 - i] = weights[i];
    }
    Ok(GaussRule { nodes, weights })
}

/// Phase-space rule for `int (d^2 zeta / pi) g(zeta)` against the Gaussian
/// `(1/sigma) exp(-|zeta|^2 / sigma)`: tensor product of `n`-point Gauss-Hermite rules
/// rescaled to the width. Returns `(zeta, weight)` pairs whose weights sum to one.
pub fn gaussian_phase_space(n: usize, sigma: f64) -> Result<Vec<(num_complex::Complex64, f64)>> {
    if !(sigma > 0.0) {
        return Err(Error::Domain(format!(
            "Gaussian width must be positive, got {sigma}"
        )));
    }
    let rule = gauss_hermite(n)?;
    let scale = sigma.sqrt();
    let mut out = Vec::with_capacity(n * n);
    for (x, wx) in rule.nodes.iter().zip(&rule.weights) {
        for (y, wy) in rule.nodes.iter().zip(&rule.weights) {
            out.push((
                num_complex::Complex64::new(scale * x, scale * y),
                wx * wy / std::f64::consts::PI,
            ));
        }
    }
    Ok(out)
}
