//! Matrix-element statistics of the exact emergent Hamiltonian in the Fock
//! basis, and spectral-regularity checks.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::emergent::Conjugator;
use crate::error::{domain, Result};
use crate::evolution::check_ascending;
use crate::linalg::{eigenvalues, multiset_distance};
use crate::C64;

/// Largest bin count the automatic rule will produce.
pub const MAX_BINS: usize = 512;

/// Normalized histogram: `density[k]` integrates to one over `edges`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub density: Vec<f64>,
}

impl Histogram {
    /// Histogram of `values` with `bins` bins, or the Freedman-Diaconis
    /// choice when `bins` is `None`.
    pub fn new(values: &[f64], bins: Option<usize>) -> Histogram {
        let (lo, hi) = values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
        if values.is_empty() {
            return Histogram { edges: vec![], density: vec![] };
        }
        let n = values.len() as f64;
        let nb = bins.unwrap_or_else(|| freedman_diaconis(values, lo, hi)).max(1);
        let (lo, hi) = if hi > lo { (lo, hi) } else { (lo - 0.5, lo + 0.5) };
        let width = (hi - lo) / nb as f64;
        let edges: Vec<f64> = (0..=nb).map(|k| lo + k as f64 * width).collect();
        let mut counts = vec![0usize; nb];
        for &v in values {
            let k = (((v - lo) / width) as usize).min(nb - 1);
            counts[k] += 1;
        }
        let density = counts.iter().map(|&c| c as f64 / (n * width)).collect();
        Histogram { edges, density }
    }
}

fn freedman_diaconis(values: &[f64], lo: f64, hi: f64) -> usize {
    if hi <= lo {
        return 1;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let q = |p: f64| {
        let x = p * (v.len() - 1) as f64;
        let (i, f) = (x.floor() as usize, x.fract());
        if i + 1 < v.len() {
            v[i] * (1.0 - f) + v[i + 1] * f
        } else {
            v[i]
        }
    };
    let iqr = q(0.75) - q(0.25);
    let n = v.len() as f64;
    if iqr <= 0.0 {
        // Sturges when more than half the sample is tied
        return ((n.log2() + 1.0).ceil() as usize).clamp(1, MAX_BINS);
    }
    let h = 2.0 * iqr / n.cbrt();
    (((hi - lo) / h).ceil() as usize).clamp(1, MAX_BINS)
}

/// Sample mean and (maximum-likelihood) standard deviation.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Gaussian parameters and histograms of the diagonal, real off-diagonal and
/// imaginary off-diagonal matrix elements at one time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElementStats {
    pub t: f64,
    pub diag_mean: f64,
    pub diag_std: f64,
    pub offdiag_re_mean: f64,
    pub offdiag_re_std: f64,
    pub offdiag_im_mean: f64,
    pub offdiag_im_std: f64,
    /// Standard deviation of real and imaginary parts pooled together.
    pub offdiag_std: f64,
    pub r_ratio: f64,
    pub hist_diag: Histogram,
    pub hist_re: Histogram,
    pub hist_im: Histogram,
}

/// Statistics over all `D` diagonal and `D(D-1)/2` strictly upper entries.
pub fn element_stats(m: &DMatrix<C64>, t: f64, bins: Option<usize>) -> Result<ElementStats> {
    let d = m.nrows();
    if d < 2 || !m.is_square() {
        return domain(format!("need a square matrix of dimension >= 2, got {d}"));
    }
    let diag: Vec<f64> = (0..d).map(|i| m[(i, i)].re).collect();
    let mut re = Vec::with_capacity(d * (d - 1) / 2);
    let mut im = Vec::with_capacity(d * (d - 1) / 2);
    for c in 1..d {
        for r in 0..c {
            re.push(m[(r, c)].re);
            im.push(m[(r, c)].im);
        }
    }
    let (diag_mean, diag_std) = mean_std(&diag);
    let (offdiag_re_mean, offdiag_re_std) = mean_std(&re);
    let (offdiag_im_mean, offdiag_im_std) = mean_std(&im);
    let pooled: Vec<f64> = re.iter().chain(&im).copied().collect();
    let (_, offdiag_std) = mean_std(&pooled);
    Ok(ElementStats {
        t,
        diag_mean,
        diag_std,
        offdiag_re_mean,
        offdiag_re_std,
        offdiag_im_mean,
        offdiag_im_std,
        offdiag_std,
        r_ratio: offdiag_std / diag_std,
        hist_diag: Histogram::new(&diag, bins),
        hist_re: Histogram::new(&re, bins),
        hist_im: Histogram::new(&im, bins),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumCheck {
    /// Largest gap between the sorted spectra of `M` and `H_0`.
    pub max_deviation: f64,
    /// Largest distance of a gap between distinct `H_0` levels from an integer.
    pub max_gap_residual: f64,
}

impl SpectrumCheck {
    pub fn integer_gaps(&self, tol: f64) -> bool {
        self.max_gap_residual < tol
    }
}

pub fn spectrum_check(m: &DMatrix<C64>, h0: &DMatrix<C64>) -> Result<SpectrumCheck> {
    if m.shape() != h0.shape() {
        return domain(format!("shapes {:?} and {:?} differ", m.shape(), h0.shape()));
    }
    let em = eigenvalues(m);
    let e0 = eigenvalues(h0);
    let max_deviation = multiset_distance(&em, &e0);
    let mut levels: Vec<f64> = Vec::new();
    for &e in &e0 {
        if levels.last().is_none_or(|&l| e - l > 1e-6) {
            levels.push(e);
        }
    }
    let max_gap_residual = levels
        .windows(2)
        .map(|w| {
            let g = w[1] - w[0];
            (g - g.round()).abs()
        })
        .fold(0.0, f64::max);
    Ok(SpectrumCheck {
        max_deviation,
        max_gap_residual,
    })
}

/// [`element_stats`] of `exp(-i H_f t) H_0 exp(i H_f t)` at each time.
pub fn stats_timeseries(
    hf: &DMatrix<C64>,
    h0: &DMatrix<C64>,
    times: &[f64],
    bins: Option<usize>,
) -> Result<Vec<ElementStats>> {
    check_ascending(times)?;
    let conj = Conjugator::new(hf, h0);
    times
        .par_iter()
        .map(|&t| element_stats(&conj.at(t), t, bins))
        .collect()
}
