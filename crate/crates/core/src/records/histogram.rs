use num_complex::Complex64;

use crate::error::{Error, Result};

/// Binning rule shared by histograms that are meant to be compared.
#[derive(Debug, Clone, PartialEq)]
pub enum BinSpec {
    /// Integer outcomes `0..bins-1`; the last bin also collects every larger value.
    Counts { bins: usize },
    /// Interior edges on the real line plus an underflow and an overflow bin.
    Edges(Vec<f64>),
    /// Rectangular grid in the complex plane plus one bin for everything outside it.
    Grid {
        re_edges: Vec<f64>,
        im_edges: Vec<f64>,
    },
}

impl BinSpec {
    pub fn len(&self) -> usize {
        match self {
            BinSpec::Counts { bins } => *bins,
            BinSpec::Edges(e) => e.len() + 1,
            BinSpec::Grid { re_edges, im_edges } => {
                re_edges.len().saturating_sub(1) * im_edges.len().saturating_sub(1) + 1
            }
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index_of_count(&self, n: usize) -> Option<usize> {
        match self {
            BinSpec::Counts { bins } if *bins > 0 => Some(n.min(bins - 1)),
            _ => None,
        }
    }

    pub fn index_of_real(&self, x: f64) -> Option<usize> {
        match self {
            BinSpec::Edges(e) => Some(e.partition_point(|edge| *edge <= x)),
            _ => None,
        }
    }

    pub fn index_of_complex(&self, z: Complex64) -> Option<usize> {
        match self {
            BinSpec::Grid { re_edges, im_edges } => {
                let (nx, ny) = (re_edges.len() - 1, im_edges.len() - 1);
                let outside = nx * ny;
                let ix = cell(re_edges, z.re);
                let iy = cell(im_edges, z.im);
                Some(match (ix, iy) {
                    (Some(ix), Some(iy)) => iy * nx + ix,
                    _ => outside,
                })
            }
            _ => None,
        }
    }
}

fn cell(edges: &[f64], x: f64) -> Option<usize> {
    if x < edges[0] || x >= edges[edges.len() - 1] {
        return None;
    }
    Some(edges.partition_point(|e| *e <= x) - 1)
}

/// Histogram with (possibly weighted) bin masses.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    spec: BinSpec,
    mass: Vec<f64>,
}

impl Histogram {
    pub fn new(spec: BinSpec) -> Self {
        let mass = vec![0.0; spec.len()];
        Self { spec, mass }
    }

    pub fn from_masses(spec: BinSpec, mass: Vec<f64>) -> Result<Self> {
        if mass.len() != spec.len() {
            return Err(Error::Spec(format!(
                "{} masses for {} bins",
                mass.len(),
                spec.len()
            )));
        }
        Ok(Self { spec, mass })
    }

    pub fn spec(&self) -> &BinSpec {
        &self.spec
    }

    pub fn masses(&self) -> &[f64] {
        &self.mass
    }

    pub fn total(&self) -> f64 {
        self.mass.iter().sum()
    }

    pub fn add_count(&mut self, n: usize, weight: f64) {
        let i = self.spec.index_of_count(n).expect("count histogram");
        self.mass[i] += weight;
    }

    pub fn add_real(&mut self, x: f64, weight: f64) {
        let i = self.spec.index_of_real(x).expect("real-line histogram");
        self.mass[i] += weight;
    }

    pub fn add_complex(&mut self, z: Complex64, weight: f64) {
        let i = self
            .spec
            .index_of_complex(z)
            .expect("complex-plane histogram");
        self.mass[i] += weight;
    }

    /// Bin masses divided by their total.
    pub fn normalized(&self) -> Result<Vec<f64>> {
        let total = self.total();
        if !(total > 0.0) {
            return Err(Error::Data("histogram has no mass".into()));
        }
        Ok(self.mass.iter().map(|m| m / total).collect())
    }
}
