//! Truncated Fock-space toolkit.
//!
//! Operators are dense `d x d` complex matrices in the number basis `|0>, ..., |d-1>`.
//! Everything built from `a` alone (powers, `exp(c a)`, `exp(-r a^dag a)`) is upper
//! triangular, and the top-left block of a product of upper-triangular matrices is the
//! product of the blocks, so those objects are exact under truncation. Objects mixing
//! `a` and `a^dag` are only trustworthy on a safe subblock `d' < d`; compare them with
//! [`subblock_norm_diff`].

mod expm;
pub mod linalg;

use std::ops::{Add, Mul, Sub};

use ndarray::{Array1, Array2};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::scalar::{real, Cx, Real};

/// Default truncation dimension.
pub const DEFAULT_DIM: usize = 40;
/// Default number of top levels excluded from truncation-sensitive comparisons.
pub const DEFAULT_BUFFER: usize = 15;

/// Dense operator on a truncated number basis.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator<T: Real> {
    entries: Array2<Cx<T>>,
}

impl<T: Real> Operator<T> {
    pub fn from_matrix(entries: Array2<Cx<T>>) -> Result<Self> {
        let (r, c) = entries.dim();
        if r != c || r == 0 {
            return Err(Error::InvalidDimension(format!(
                "operator must be square and non-empty, got {r}x{c}"
            )));
        }
        Ok(Self { entries })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            entries: linalg::identity(dim),
        }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            entries: Array2::zeros((dim, dim)),
        }
    }

    pub fn diagonal(values: impl IntoIterator<Item = Cx<T>>) -> Self {
        let diag: Array1<Cx<T>> = values.into_iter().collect();
        Self {
            entries: Array2::from_diag(&diag),
        }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    #[inline]
    pub fn matrix(&self) -> &Array2<Cx<T>> {
        &self.entries
    }

    pub fn into_matrix(self) -> Array2<Cx<T>> {
        self.entries
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> Cx<T> {
        self.entries[[row, col]]
    }

    pub fn adjoint(&self) -> Self {
        Self {
            entries: linalg::conj_t(self.entries.view()),
        }
    }

    pub fn scale(&self, c: Cx<T>) -> Self {
        Self {
            entries: self.entries.mapv(|z| z * c),
        }
    }

    pub fn scale_real(&self, c: T) -> Self {
        Self {
            entries: self.entries.mapv(|z| z * c),
        }
    }

    pub fn trace(&self) -> Cx<T> {
        self.entries.diag().iter().copied().sum()
    }

    pub fn apply(&self, v: &Ket<T>) -> Ket<T> {
        Ket {
            amplitudes: self.entries.dot(&v.amplitudes),
        }
    }

    pub fn commutator(&self, other: &Self) -> Self {
        &(self * other) - &(other * self)
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> T {
        linalg::max_abs(self.entries.view())
    }

    /// Spectral norm of the top-left `d' x d'` block.
    pub fn subblock_norm(&self, sub: usize) -> Result<T> {
        if sub > self.dim() || sub == 0 {
            return Err(Error::InvalidDimension(format!(
                "subblock {sub} outside dimension {}",
                self.dim()
            )));
        }
        linalg::spectral_norm(linalg::top_left(self.entries.view(), sub))
    }

    /// Embeds into (or crops to) another truncation, padding with zeros.
    pub fn resized(&self, dim: usize) -> Self {
        let keep = dim.min(self.dim());
        let mut m = Array2::zeros((dim, dim));
        m.slice_mut(ndarray::s![..keep, ..keep])
            .assign(&self.entries.slice(ndarray::s![..keep, ..keep]));
        Self { entries: m }
    }
}

impl<T: Real> Mul for &Operator<T> {
    type Output = Operator<T>;
    fn mul(self, rhs: Self) -> Operator<T> {
        assert_eq!(self.dim(), rhs.dim(), "operator dimension mismatch");
        Operator {
            entries: self.entries.dot(&rhs.entries),
        }
    }
}

impl<T: Real> Add for &Operator<T> {
    type Output = Operator<T>;
    fn add(self, rhs: Self) -> Operator<T> {
        assert_eq!(self.dim(), rhs.dim(), "operator dimension mismatch");
        Operator {
            entries: &self.entries + &rhs.entries,
        }
    }
}

impl<T: Real> Sub for &Operator<T> {
    type Output = Operator<T>;
    fn sub(self, rhs: Self) -> Operator<T> {
        assert_eq!(self.dim(), rhs.dim(), "operator dimension mismatch");
        Operator {
            entries: &self.entries - &rhs.entries,
        }
    }
}

/// Pure state in the truncated number basis.
#[derive(Debug, Clone, PartialEq)]
pub struct Ket<T: Real> {
    amplitudes: Array1<Cx<T>>,
}

impl<T: Real> Ket<T> {
    pub fn from_amplitudes(amplitudes: Array1<Cx<T>>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::InvalidDimension("empty state vector".into()));
        }
        Ok(Self { amplitudes })
    }

    /// Number state `|n>`.
    pub fn number(dim: usize, n: usize) -> Result<Self> {
        if n >= dim {
            return Err(Error::InvalidDimension(format!(
                "|{n}> not representable in dimension {dim}"
            )));
        }
        let mut amplitudes = Array1::zeros(dim);
        amplitudes[n] = real(T::one());
        Ok(Self { amplitudes })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    #[inline]
    pub fn amplitudes(&self) -> &Array1<Cx<T>> {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> T {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm_sqr().sqrt();
        if !(n > T::zero()) || !n.is_finite() {
            return Err(Error::Numeric("cannot normalise a null state".into()));
        }
        Ok(Self {
            amplitudes: self.amplitudes.mapv(|z| z / n),
        })
    }

    /// `<self|other>`
    pub fn inner(&self, other: &Self) -> Cx<T> {
        self.amplitudes
            .iter()
            .zip(other.amplitudes.iter())
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// `<self|op|self>`
    pub fn expectation(&self, op: &Operator<T>) -> Cx<T> {
        self.inner(&op.apply(self))
    }
}

/// Density operator. Construction validates Hermiticity, unit trace and positivity.
#[derive(Debug, Clone, PartialEq)]
pub struct Density<T: Real> {
    entries: Array2<Cx<T>>,
}

impl<T: Real> Density<T> {
    /// Trace tolerance absorbing truncation of coherent-state tails.
    pub const TRACE_TOLERANCE: f64 = 1e-6;

    fn hermitian_tolerance() -> T {
        T::lit(1e-12).max(T::epsilon() * T::lit(100.0))
    }

    fn positivity_tolerance() -> T {
        T::lit(1e-10).max(T::epsilon() * T::lit(100.0))
    }

    pub fn from_matrix(entries: Array2<Cx<T>>) -> Result<Self> {
        let op = Operator::from_matrix(entries)?;
        let m = op.matrix();
        let herm = linalg::max_abs((m - &linalg::conj_t(m.view())).view());
        if herm > Self::hermitian_tolerance() {
            return Err(Error::Domain(format!(
                "density matrix not Hermitian (defect {herm})"
            )));
        }
        let tr = op.trace();
        if (tr.re - T::one()).abs().as_f64() > Self::TRACE_TOLERANCE
            || tr.im.abs() > Self::hermitian_tolerance()
        {
            return Err(Error::Domain(format!("density matrix trace {tr} is not 1")));
        }
        let (vals, _) = linalg::hermitian_eigen(m)?;
        let min = vals.iter().copied().fold(T::infinity(), T::min);
        if min < -Self::positivity_tolerance() {
            return Err(Error::Domain(format!(
                "density matrix has negative eigenvalue {min}"
            )));
        }
        Ok(Self {
            entries: op.into_matrix(),
        })
    }

    /// `|psi><psi|` after normalisation.
    pub fn pure(psi: &Ket<T>) -> Result<Self> {
        let v = psi.normalized()?;
        let a = v.amplitudes();
        let entries = Array2::from_shape_fn((a.len(), a.len()), |(i, j)| a[i] * a[j].conj());
        Ok(Self { entries })
    }

    pub fn number(dim: usize, n: usize) -> Result<Self> {
        Self::pure(&Ket::number(dim, n)?)
    }

    pub fn coherent(dim: usize, alpha: Cx<T>) -> Result<Self> {
        Self::pure(&coherent_state(dim, alpha))
    }

    pub fn vacuum(dim: usize) -> Self {
        Self::number(dim, 0).expect("dimension is positive")
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn matrix(&self) -> &Array2<Cx<T>> {
        &self.entries
    }

    /// `Tr(op rho)`
    pub fn expectation(&self, op: &Operator<T>) -> Cx<T> {
        assert_eq!(op.dim(), self.dim(), "operator dimension mismatch");
        let m = op.matrix();
        let mut acc = real(T::zero());
        for i in 0..self.dim() {
            for k in 0..self.dim() {
                acc += m[[i, k]] * self.entries[[k, i]];
            }
        }
        acc
    }

    pub fn purity(&self) -> T {
        self.entries.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Eigen-ensemble `{(p_i, |psi_i>)}` with weights below `cutoff` dropped.
    pub fn ensemble(&self, cutoff: T) -> Result<Vec<(T, Ket<T>)>> {
        let (vals, vecs) = linalg::hermitian_eigen(&self.entries)?;
        let mut out: Vec<(T, Ket<T>)> = vals
            .iter()
            .enumerate()
            .filter(|(_, &p)| p > cutoff)
            .map(|(j, &p)| {
                (
                    p,
                    Ket {
                        amplitudes: vecs.column(j).to_owned(),
                    },
                )
            })
            .collect();
        // largest weight first, so selection by cumulative weight is stable
        out.reverse();
        Ok(out)
    }
}

/// Eigen-ensemble of a density operator as plain amplitude vectors, for samplers that
/// draw one pure component per trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct PureMixture {
    components: Vec<Vec<Complex64>>,
    cumulative: Vec<f64>,
}

impl PureMixture {
    /// Eigenvalues below `cutoff` are dropped. Trailing zero amplitudes are trimmed, since
    /// neither instrument ever raises the photon number.
    pub fn from_density(rho: &Density<f64>, cutoff: f64) -> Result<Self> {
        let mut components = Vec::new();
        let mut cumulative = Vec::new();
        let mut acc = 0.0;
        for (w, psi) in rho.ensemble(cutoff)? {
            let mut amps = psi.amplitudes().to_vec();
            while amps.len() > 1 && amps.last().is_some_and(|z| z.norm_sqr() == 0.0) {
                amps.pop();
            }
            acc += w;
            components.push(amps);
            cumulative.push(acc);
        }
        if components.is_empty() {
            return Err(Error::Numeric(
                "density operator has no weight above the cutoff".into(),
            ));
        }
        Ok(Self {
            components,
            cumulative,
        })
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    /// Component selected by a uniform variate `u` in `[0, 1)`.
    pub fn pick(&self, u: f64) -> &[Complex64] {
        let total = self.cumulative[self.cumulative.len() - 1];
        let idx = self
            .cumulative
            .partition_point(|c| *c <= u * total)
            .min(self.components.len() - 1);
        &self.components[idx]
    }

    /// `(weight, amplitudes)` pairs.
    pub fn iter(&self) -> impl Iterator<Item = (f64, &[Complex64])> + '_ {
        let mut prev = 0.0;
        self.cumulative
            .iter()
            .zip(&self.components)
            .map(move |(c, v)| {
                let w = c - prev;
                prev = *c;
                (w, v.as_slice())
            })
    }
}

/// Lowering operator `a` with `a_{n-1,n} = sqrt(n)`.
pub fn make_lowering<T: Real>(dim: usize) -> Result<Operator<T>> {
    if dim < 2 {
        return Err(Error::InvalidDimension(format!(
            "lowering operator needs dimension >= 2, got {dim}"
        )));
    }
    let mut m = Array2::zeros((dim, dim));
    for n in 1..dim {
        m[[n - 1, n]] = real(T::from_usize_lossy(n).sqrt());
    }
    Ok(Operator { entries: m })
}

pub fn make_raising<T: Real>(dim: usize) -> Result<Operator<T>> {
    Ok(make_lowering::<T>(dim)?.adjoint())
}

/// `a^dag a`
pub fn number_operator<T: Real>(dim: usize) -> Operator<T> {
    Operator::diagonal((0..dim).map(|n| real(T::from_usize_lossy(n))))
}

/// `exp(-r a^dag a)`; the instruments only ever contract, so `r < 0` is rejected.
pub fn number_exp<T: Real>(dim: usize, r: T) -> Result<Operator<T>> {
    if !r.is_finite() {
        return Err(Error::Domain(format!("non-finite exponent {r}")));
    }
    if r < T::zero() {
        return Err(Error::Domain(format!(
            "number exponential needs r >= 0, got {r}"
        )));
    }
    Ok(Operator::diagonal(
        (0..dim).map(|n| real((-T::from_usize_lossy(n) * r).exp())),
    ))
}

/// `exp(c a)` from the terminating series; exact in the truncated space.
pub fn exp_lowering<T: Real>(dim: usize, c: Cx<T>) -> Operator<T> {
    let mut m = Array2::zeros((dim, dim));
    for row in 0..dim {
        let mut e = real(T::one());
        m[[row, row]] = e;
        for col in row + 1..dim {
            // e_{row,col} = c^{col-row} sqrt(col!/row!) / (col-row)!
            let k = T::from_usize_lossy(col - row);
            e = e * c * T::from_usize_lossy(col).sqrt() / k;
            m[[row, col]] = e;
        }
    }
    Operator { entries: m }
}

/// `exp(c a^dag)`; lower triangular counterpart of [`exp_lowering`].
pub fn exp_raising<T: Real>(dim: usize, c: Cx<T>) -> Operator<T> {
    let up = exp_lowering(dim, c).into_matrix();
    Operator {
        entries: up.t().to_owned(),
    }
}

/// Displacement `D_alpha = exp(alpha a^dag - alpha^* a)` via
/// `exp(-|alpha|^2/2) exp(alpha a^dag) exp(-alpha^* a)`.
///
/// The lower-times-upper product has no truncated intermediate index, so the result is
/// the exact top-left block of the infinite operator. The factors grow like
/// `exp(|alpha| sqrt(d))` though, and cancellation destroys accuracy once `|alpha|^2`
/// is not small against `d`; use [`displaced_number_states`] in that regime.
pub fn displacement<T: Real>(dim: usize, alpha: Cx<T>) -> Operator<T> {
    let pref = (-alpha.norm_sqr() * T::lit(0.5)).exp();
    let lower = exp_raising(dim, alpha);
    let upper = exp_lowering(dim, -alpha.conj());
    (&lower * &upper).scale_real(pref)
}

/// Coherent state `|alpha> = D_alpha |0>`, amplitudes `exp(-|alpha|^2/2) alpha^n / sqrt(n!)`.
pub fn coherent_state<T: Real>(dim: usize, alpha: Cx<T>) -> Ket<T> {
    let mut amplitudes = Array1::zeros(dim);
    let mut amp = real((-alpha.norm_sqr() * T::lit(0.5)).exp());
    for n in 0..dim {
        amplitudes[n] = amp;
        amp = amp * alpha / T::from_usize_lossy(n + 1).sqrt();
    }
    Ket { amplitudes }
}

/// Columns `D_alpha |n>` for `n < count`, evaluated on levels `0..work_dim`.
///
/// Uses the closed form `<k|D_alpha|n> = sqrt(n!/k!) alpha^(k-n) exp(-|alpha|^2/2)
/// L_n^(k-n)(|alpha|^2)` (and its mirror for `k < n`) with the prefactor in log space and
/// the Laguerre polynomial from its degree recurrence. Each entry is the exact
/// infinite-dimensional matrix element, so the columns stay orthonormal at amplitudes
/// where [`displacement`] has lost all precision, provided `work_dim` holds their support
/// (see [`displacement_work_dim`]).
pub fn displaced_number_states<T: Real>(
    work_dim: usize,
    alpha: Cx<T>,
    count: usize,
) -> Array2<Cx<T>> {
    let x = alpha.norm_sqr();
    if x == T::zero() {
        return Array2::from_shape_fn((work_dim, count), |(k, n)| {
            if k == n {
                real(T::one())
            } else {
                real(T::zero())
            }
        });
    }
    let ln_abs = alpha.norm().ln();
    let theta = alpha.arg();
    let mut ln_fact = vec![T::zero(); work_dim.max(count) + 1];
    for k in 1..ln_fact.len() {
        ln_fact[k] = ln_fact[k - 1] + T::from_usize_lossy(k).ln();
    }
    let half = T::lit(0.5);
    Array2::from_shape_fn((work_dim, count), |(k, n)| {
        let (lo, hi) = if k >= n { (n, k) } else { (k, n) };
        let gap = T::from_usize_lossy(hi - lo);
        let ln_mag = half * (ln_fact[lo] - ln_fact[hi]) + gap * ln_abs - half * x;
        let lag = laguerre(lo, gap, x);
        // below the diagonal the phase is alpha^(k-n), above it (-alpha^*)^(n-k)
        let phase = if k >= n {
            gap * theta
        } else {
            gap * (T::PI() - theta)
        };
        Cx::from_polar(ln_mag.exp() * lag, phase)
    })
}

/// Generalised Laguerre polynomial `L_n^(b)(x)` by the three-term degree recurrence.
fn laguerre<T: Real>(n: usize, b: T, x: T) -> T {
    let mut prev = T::one();
    if n == 0 {
        return prev;
    }
    let mut cur = T::one() + b - x;
    for j in 1..n {
        let jf = T::from_usize_lossy(j);
        let next = ((jf + jf + T::one() + b - x) * cur - (jf + b) * prev) / (jf + T::one());
        prev = cur;
        cur = next;
    }
    cur
}

/// Working dimension holding `D_alpha |n>` for `n < count` with negligible top-level weight.
pub fn displacement_work_dim(alpha_abs: f64, count: usize) -> usize {
    let reach = (count as f64).sqrt() + alpha_abs;
    (reach * reach + 14.0 * reach + 40.0).ceil() as usize
}

/// General matrix exponential (scaling and squaring, degree-13 Padé).
pub fn matrix_exp<T: Real>(a: &Operator<T>) -> Result<Operator<T>> {
    Ok(Operator {
        entries: expm::expm(a.matrix())?,
    })
}

/// Spectral norm of the top-left `d' x d'` block of `A - B`.
pub fn subblock_norm_diff<T: Real>(a: &Operator<T>, b: &Operator<T>, sub: usize) -> Result<T> {
    if sub > a.dim() || sub > b.dim() || sub == 0 {
        return Err(Error::InvalidDimension(format!(
            "subblock {sub} outside operator dimensions {} and {}",
            a.dim(),
            b.dim()
        )));
    }
    let diff =
        &linalg::top_left(a.matrix().view(), sub) - &linalg::top_left(b.matrix().view(), sub);
    linalg::spectral_norm(diff.view())
}

/// Top-left `d' x d'` block as its own operator.
pub fn subblock<T: Real>(a: &Operator<T>, sub: usize) -> Result<Operator<T>> {
    if sub > a.dim() || sub == 0 {
        return Err(Error::InvalidDimension(format!(
            "subblock {sub} outside dimension {}",
            a.dim()
        )));
    }
    Operator::from_matrix(linalg::top_left(a.matrix().view(), sub).to_owned())
}

#[cfg(test)]
mod tests;
