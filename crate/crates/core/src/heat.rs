//! Truncated Mercer expansion of the heat kernel and its landscape-based
//! upper bound.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::landscape;
use crate::lattice::{self, WeightVector};
use crate::numerics::{self, EigenDecomposition};
use crate::operator::MatrixOperator;
use crate::par::*;

/// Truncation used when none is given.
pub const DEFAULT_TERMS: usize = 150;

/// Mass ratio above which a bound is flagged as loose.
pub const LOOSE_MASS_RATIO: f64 = 100.0;

/// `k_t(x_i, x_j)` on the grid, in continuum normalization.
#[derive(Debug, Clone, PartialEq)]
pub struct HeatKernelMatrix {
    pub t: f64,
    pub values: DMatrix<f64>,
    pub terms_used: usize,
}

impl HeatKernelMatrix {
    pub fn dim(&self) -> usize {
        self.values.nrows()
    }

    /// `h sum_i k_t(x_i, x_i)`.
    pub fn trace(&self, h: f64) -> f64 {
        h * self.values.diagonal().sum()
    }
}

fn check_time(t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("time must be positive, got {t}")))
    }
}

fn check_terms(eigs: &EigenDecomposition, terms: usize) -> Result<()> {
    if terms == 0 || terms > eigs.len() {
        Err(Error::InvalidParameter(format!("terms must lie in 1..={}, got {terms}", eigs.len())))
    } else {
        Ok(())
    }
}

/// Eigenvectors rescaled to unit `L^2` norm under quadrature weight `h`.
fn continuum_vectors(eigs: &EigenDecomposition, terms: usize, h: f64) -> Result<DMatrix<f64>> {
    let v = eigs.real_vectors().ok_or_else(|| Error::InvalidParameter("heat kernels need a real operator".into()))?;
    Ok(v.columns(0, terms) / h.sqrt())
}

/// `sum_{k < terms} e^{-t lambda_k} phi_k(x) phi_k(y)` with `h sum phi_k^2 = 1`.
pub fn mercer_kernel(eigs: &EigenDecomposition, t: f64, terms: usize, h: f64) -> Result<HeatKernelMatrix> {
    check_time(t)?;
    check_terms(eigs, terms)?;
    let phi = continuum_vectors(eigs, terms, h)?;
    let decay = DVector::from_iterator(terms, eigs.eigenvalues()[..terms].iter().map(|l| (-t * l).exp()));
    let mut scaled = phi.clone();
    for (k, mut col) in scaled.column_iter_mut().enumerate() {
        col *= decay[k];
    }
    Ok(HeatKernelMatrix { t, values: &scaled * phi.transpose(), terms_used: terms })
}

/// Per-mode landscape factors for the heat-kernel bound, independent of `t`.
#[derive(Debug, Clone)]
pub struct ModeLandscapes {
    eigenvalues: Vec<f64>,
    /// Column `k` is `||phi_k||_inf * min_mu |lambda_k + mu| (mu + A)^{-1} rho`.
    factors: DMatrix<f64>,
    pub mu_grid: Vec<f64>,
}

impl ModeLandscapes {
    pub fn terms(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn factor(&self, k: usize) -> Vec<f64> {
        self.factors.column(k).iter().copied().collect()
    }
}

/// Resolvent grid for the mode landscapes: `s(-A) + 10^{j/2}` for
/// `j = -10..=10`, which brackets both the torsion regime and the flat regime.
pub fn heat_mu_grid(op: &MatrixOperator) -> Result<Vec<f64>> {
    let s = lattice::spectral_bound_neg(op)?;
    Ok((-10..=10).map(|j| s + 10f64.powf(j as f64 / 2.0)).collect())
}

/// Build the mode factors. One solve per grid point is shared by all modes.
/// A grid of `[0.0]` gives the plain torsion variant `|lambda_k| A^{-1} rho`.
pub fn mode_landscapes(
    op: &MatrixOperator,
    rho: &WeightVector,
    terms: usize,
    h: f64,
    mu_grid: &[f64],
) -> Result<ModeLandscapes> {
    if mu_grid.is_empty() {
        return Err(Error::EmptyGrid("mu_grid"));
    }
    let eigs = op.eigen()?;
    check_terms(eigs, terms)?;
    if !lattice::is_inverse_positive(op)? {
        return Err(Error::InvalidParameter("heat-kernel bound needs an inverse-positive operator".into()));
    }
    let s = -eigs.eigenvalues()[0];
    if let Some(mu) = mu_grid.iter().find(|&&mu| !(mu > s)) {
        return Err(Error::InvalidParameter(format!("mu = {mu} does not exceed s(-A) = {s}")));
    }
    let solves: Vec<Vec<f64>> =
        mu_grid.par_iter().map(|&mu| numerics::solve(&op.shifted(mu), rho.values())).collect::<Result<_>>()?;
    let phi = continuum_vectors(eigs, terms, h)?;
    let lambdas = eigs.eigenvalues()[..terms].to_vec();
    let n = op.dim();
    let cols: Vec<Vec<f64>> = (0..terms)
        .into_par_iter()
        .map(|k| {
            let sup = phi.column(k).iter().fold(0.0f64, |a, v| a.max(v.abs()));
            let members: Vec<Vec<f64>> = mu_grid
                .iter()
                .zip(&solves)
                .map(|(mu, x)| x.iter().map(|v| (lambdas[k] + mu).abs() * v).collect())
                .collect();
            let env = landscape::pointwise_min(&members);
            env.into_iter().map(|v| sup * v).collect()
        })
        .collect();
    let factors = DMatrix::from_fn(n, terms, |i, k| cols[k][i]);
    Ok(ModeLandscapes { eigenvalues: lambdas, factors, mu_grid: mu_grid.to_vec() })
}

/// Heat-kernel upper bound at time `t`.
#[derive(Debug, Clone)]
pub struct HeatBound {
    pub matrix: HeatKernelMatrix,
    /// The last retained term is below `1e-8` of the largest bound entry.
    pub tail_converged: bool,
}

/// `sum_{k < terms} e^{-t lambda_k} w_k(x) w_k(y)` with `w_k` the mode factors.
pub fn heat_kernel_bound(modes: &ModeLandscapes, t: f64) -> Result<HeatBound> {
    check_time(t)?;
    let terms = modes.terms();
    let mut scaled = modes.factors.clone();
    for (k, mut col) in scaled.column_iter_mut().enumerate() {
        col *= (-t * modes.eigenvalues[k]).exp();
    }
    let values = &scaled * modes.factors.transpose();
    let largest = values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let last = terms - 1;
    let last_term = (-t * modes.eigenvalues[last]).exp()
        * modes.factors.column(last).iter().fold(0.0f64, |a, v| a.max(v.abs())).powi(2);
    Ok(HeatBound {
        matrix: HeatKernelMatrix { t, values, terms_used: terms },
        tail_converged: last_term <= 1e-8 * largest,
    })
}

/// Entrywise comparison of a kernel with its bound.
#[derive(Debug, Clone, Serialize)]
pub struct HeatBoundReport {
    pub t: f64,
    pub min_slack: f64,
    pub worst: (usize, usize),
    /// `max bound/kernel` over entries with `kernel > tol`.
    pub max_ratio: f64,
    /// `sum bound / sum kernel`.
    pub mass_ratio: f64,
    pub tol: f64,
    pub certified: bool,
    pub tail_converged: bool,
    /// Mass ratio above [`LOOSE_MASS_RATIO`] or an unconverged tail.
    pub loose: bool,
}

pub fn heat_bound_report(kernel: &HeatKernelMatrix, bound: &HeatBound, tol: f64) -> Result<HeatBoundReport> {
    let b = &bound.matrix;
    if kernel.values.shape() != b.values.shape() {
        return Err(Error::DimensionMismatch { expected: kernel.values.len(), got: b.values.len() });
    }
    if (kernel.t - b.t).abs() > 1e-15 * kernel.t.abs() {
        return Err(Error::InvalidParameter(format!("times differ: {} vs {}", kernel.t, b.t)));
    }
    let mut min_slack = f64::INFINITY;
    let mut worst = (0, 0);
    let mut max_ratio = 0.0f64;
    let (mut mass_k, mut mass_b) = (0.0, 0.0);
    for j in 0..kernel.dim() {
        for i in 0..kernel.dim() {
            let (k, u) = (kernel.values[(i, j)], b.values[(i, j)]);
            let s = u - k;
            if s < min_slack {
                min_slack = s;
                worst = (i, j);
            }
            if k > tol {
                max_ratio = max_ratio.max(u / k);
            }
            mass_k += k;
            mass_b += u;
        }
    }
    let mass_ratio = mass_b / mass_k;
    Ok(HeatBoundReport {
        t: kernel.t,
        min_slack,
        worst,
        max_ratio,
        mass_ratio,
        tol,
        certified: min_slack >= -tol,
        tail_converged: bound.tail_converged,
        loose: mass_ratio > LOOSE_MASS_RATIO || !bound.tail_converged,
    })
}
