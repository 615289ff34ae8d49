use num_complex::Complex64;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use super::histogram::Histogram;
use crate::error::{Error, Result};

/// Smallest expected count kept in its own chi-square cell.
pub const MIN_EXPECTED: f64 = 5.0;

/// Moments and histogram of an ensemble of scalar observations.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleSummary {
    pub count: usize,
    pub mean: Complex64,
    pub second_moment: f64,
    pub histogram: Histogram,
}

impl EnsembleSummary {
    pub fn from_complex(samples: &[Complex64], mut histogram: Histogram) -> Self {
        let count = samples.len();
        let mut mean = Complex64::new(0.0, 0.0);
        let mut second = 0.0;
        for z in samples {
            mean += z;
            second += z.norm_sqr();
            histogram.add_complex(*z, 1.0);
        }
        if count > 0 {
            mean /= count as f64;
            second /= count as f64;
        }
        Self {
            count,
            mean,
            second_moment: second,
            histogram,
        }
    }

    pub fn from_counts(samples: &[usize], mut histogram: Histogram) -> Self {
        let count = samples.len();
        let mut mean = 0.0;
        let mut second = 0.0;
        for &n in samples {
            mean += n as f64;
            second += (n * n) as f64;
            histogram.add_count(n, 1.0);
        }
        if count > 0 {
            mean /= count as f64;
            second /= count as f64;
        }
        Self {
            count,
            mean: Complex64::new(mean, 0.0),
            second_moment: second,
            histogram,
        }
    }

    /// `second_moment - |mean|^2`
    pub fn variance(&self) -> f64 {
        self.second_moment - self.mean.norm_sqr()
    }
}

/// Total-variation distance between two normalised histograms.
pub fn two_sample_tv(h1: &Histogram, h2: &Histogram) -> Result<f64> {
    if h1.spec() != h2.spec() {
        return Err(Error::Spec("histograms use different bins".into()));
    }
    let (p, q) = (h1.normalized()?, h2.normalized()?);
    Ok(0.5 * p.iter().zip(&q).map(|(a, b)| (a - b).abs()).sum::<f64>())
}

/// Total-variation distance between a histogram and a probability vector over its bins.
pub fn tv_to_pmf(h: &Histogram, pmf: &[f64]) -> Result<f64> {
    if pmf.len() != h.masses().len() {
        return Err(Error::Spec(format!(
            "{} probabilities for {} bins",
            pmf.len(),
            h.masses().len()
        )));
    }
    let p = h.normalized()?;
    Ok(0.5 * p.iter().zip(pmf).map(|(a, b)| (a - b).abs()).sum::<f64>())
}

/// Pearson chi-square goodness-of-fit p-value of observed counts against `pmf`.
///
/// `pmf` is rescaled to unit mass. Consecutive bins are pooled until every cell expects at
/// least [`MIN_EXPECTED`] counts; a short trailing group joins the previous cell.
pub fn chi_square_gof(h: &Histogram, pmf: &[f64]) -> Result<f64> {
    let obs = h.masses();
    if pmf.len() != obs.len() {
        return Err(Error::Spec(format!(
            "{} probabilities for {} bins",
            pmf.len(),
            obs.len()
        )));
    }
    let n = h.total();
    if !(n > 0.0) {
        return Err(Error::Data("chi-square test on an empty histogram".into()));
    }
    let mass: f64 = pmf.iter().sum();
    if !(mass > 0.0) || pmf.iter().any(|p| *p < 0.0 || !p.is_finite()) {
        return Err(Error::Data(
            "expected distribution is not a valid pmf".into(),
        ));
    }

    let mut cells: Vec<(f64, f64)> = Vec::new();
    let (mut o_acc, mut e_acc) = (0.0, 0.0);
    for (o, p) in obs.iter().zip(pmf) {
        o_acc += o;
        e_acc += n * p / mass;
        if e_acc >= MIN_EXPECTED {
            cells.push((o_acc, e_acc));
            o_acc = 0.0;
            e_acc = 0.0;
        }
    }
    if e_acc > 0.0 || o_acc > 0.0 {
        match cells.last_mut() {
            Some(last) => {
                last.0 += o_acc;
                last.1 += e_acc;
            }
            None => cells.push((o_acc, e_acc)),
        }
    }
    if cells.len() < 2 {
        // a single pooled cell carries no information
        return Ok(1.0);
    }
    let stat: f64 = cells.iter().map(|(o, e)| (o - e) * (o - e) / e).sum();
    let dof = (cells.len() - 1) as f64;
    let dist = ChiSquared::new(dof).map_err(|e| Error::Data(e.to_string()))?;
    Ok(1.0 - dist.cdf(stat))
}
