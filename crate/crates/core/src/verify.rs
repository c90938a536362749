//! Pointwise eigenvector bounds checked against computed eigenpairs.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::landscape::{self, LandscapeFunction, LandscapeKind};
use crate::lattice::{self, DominationReport, WeightVector};
use crate::numerics;
use crate::operator::{
    build_graph_laplacian, build_magnetic_laplacian, build_signless_laplacian, Graph, MagneticSignature,
    MatrixOperator, PotentialVector,
};
use crate::par::*;

/// An eigenvalue with its eigenvector and the residual it was computed with.
/// `p` is set for `(p-1)`-homogeneous problems.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Eigenpair {
    pub lambda: f64,
    pub vector: Vec<Complex64>,
    pub residual: f64,
    pub p: Option<f64>,
}

impl Eigenpair {
    /// The `k`-th (0-based, ascending) eigenpair of a Hermitian operator.
    pub fn from_operator(op: &MatrixOperator, k: usize) -> Result<Self> {
        let eig = op.eigen()?;
        if k >= eig.len() {
            return Err(Error::InvalidParameter(format!("eigen index {k} out of range for dimension {}", eig.len())));
        }
        let lambda = eig.eigenvalues()[k];
        let vector = eig.vector(k);
        let av = op.matvec_complex(&vector)?;
        let residual = av.iter().zip(&vector).map(|(a, v)| (a - v * lambda).norm()).fold(0.0, f64::max);
        Ok(Self { lambda, vector, residual, p: None })
    }

    pub fn from_real(lambda: f64, vector: &[f64], residual: f64) -> Self {
        Self { lambda, vector: vector.iter().map(|&x| Complex64::new(x, 0.0)).collect(), residual, p: None }
    }

    pub fn abs(&self) -> Vec<f64> {
        self.vector.iter().map(|z| z.norm()).collect()
    }

    pub fn sup_norm(&self) -> f64 {
        self.vector.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn len(&self) -> usize {
        self.vector.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vector.is_empty()
    }
}

/// Per-index slack `bound_i - |phi_i|` of a pointwise bound.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub label: String,
    pub phi_abs: Vec<f64>,
    pub bound: Vec<f64>,
    pub slack: Vec<f64>,
    pub min_slack: f64,
    pub worst_index: usize,
    pub tol: f64,
    pub certified: bool,
}

impl BoundReport {
    fn new(label: impl Into<String>, phi_abs: Vec<f64>, bound: Vec<f64>, tol: f64) -> Self {
        let slack: Vec<f64> = bound.iter().zip(&phi_abs).map(|(b, p)| b - p).collect();
        let (worst_index, min_slack) =
            slack
                .iter()
                .copied()
                .enumerate()
                .fold((0, f64::INFINITY), |acc, (i, s)| if s < acc.1 { (i, s) } else { acc });
        let certified = min_slack >= -tol && slack.iter().all(|s| s.is_finite());
        Self { label: label.into(), phi_abs, bound, slack, min_slack, worst_index, tol, certified }
    }

    /// Is every slack strictly positive?
    pub fn strict(&self) -> bool {
        self.min_slack > 0.0
    }
}

/// Default slack tolerance `1e-10 + 1e-8 * scale`.
pub fn default_tol(scale: f64) -> f64 {
    1e-10 + 1e-8 * scale
}

fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}

/// Check `|phi| <= c(lambda) ||phi||_rho * landscape` entrywise.
/// `tol` defaults to `1e-10 + 1e-8 ||phi||_inf`.
pub fn verify_eigenvector_bound(
    pair: &Eigenpair,
    landscape: &LandscapeFunction,
    rho: &WeightVector,
    tol: Option<f64>,
) -> Result<BoundReport> {
    check_len(landscape.len(), pair.len())?;
    check_len(rho.len(), pair.len())?;
    if let Some(l) = landscape.params.lambda {
        if (l - pair.lambda).abs() > 1e-9 * l.abs().max(1.0) {
            return Err(Error::InvalidParameter(format!(
                "landscape built for lambda = {l}, eigenpair has {}",
                pair.lambda
            )));
        }
    }
    let phi_abs = pair.abs();
    let c = landscape.bound_factor(pair.lambda) * lattice::gauge_norm(&phi_abs, rho)?;
    let bound = landscape.values.iter().map(|v| c * v).collect();
    let tol = tol.unwrap_or_else(|| default_tol(pair.sup_norm()));
    Ok(BoundReport::new(format!("{:?}", landscape.kind), phi_abs, bound, tol))
}

/// Indices where an eigenfunction with eigenvalue `lambda` may peak.
///
/// For the torsion function this is `{1/v <= |lambda|}`. For a parabolic
/// landscape built with `(t, lambda0)` it is `{-log(e^{-tA} rho)/t <= lambda}`.
/// Every other kind uses `{c(lambda) * values >= 1}`.
pub fn localization_set(landscape: &LandscapeFunction, lambda: f64) -> Result<Vec<usize>> {
    if let Some((i, v)) = landscape.values.iter().enumerate().find(|(_, v)| !(**v > 0.0)) {
        return Err(Error::InvalidParameter(format!("landscape value {v} at index {i} is not positive")));
    }
    let keep: Box<dyn Fn(f64) -> bool> = match landscape.kind {
        LandscapeKind::Torsion => Box::new(move |v| 1.0 / v <= lambda.abs()),
        LandscapeKind::Parabolic => {
            let t = landscape.params.t.unwrap_or(0.0);
            let lam0 = landscape.params.lambda.unwrap_or(0.0);
            if t > 0.0 {
                Box::new(move |v| -(v.ln() - t * lam0) / t <= lambda)
            } else {
                Box::new(|_| true)
            }
        }
        _ => {
            let c = landscape.bound_factor(lambda);
            Box::new(move |v| c * v >= 1.0)
        }
    };
    Ok((0..landscape.len()).filter(|&i| keep(landscape.values[i])).collect())
}

/// Check the floor `A^{-1} rho >= rho / ||A rho||_rho`.
pub fn verify_torsion_floor(op: &MatrixOperator, rho: &WeightVector) -> Result<BoundReport> {
    check_len(op.dim(), rho.len())?;
    let a_rho = op.matvec(rho.values())?;
    let g = lattice::gauge_norm(&a_rho, rho)?;
    if g == 0.0 {
        return Err(Error::InvalidParameter("A rho vanishes".into()));
    }
    let floor: Vec<f64> = rho.values().iter().map(|r| r / g).collect();
    let torsion = landscape::torsion(op, rho)?.values;
    let scale = torsion.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    Ok(BoundReport::new("torsion_floor", floor, torsion, default_tol(scale)))
}

/// The two ground-state bounds for an inverse-positive operator.
#[derive(Debug, Clone, Serialize)]
pub struct PerronReport {
    pub lambda: f64,
    /// `phi < lambda ||phi||_rho A^{-1} rho`; see `BoundReport::strict`.
    pub torsion: BoundReport,
    /// `phi <= ||phi||_rho P rho` with `P` the ground-state projection.
    pub projection: BoundReport,
}

pub fn verify_perron_bounds(op: &MatrixOperator, rho: &WeightVector) -> Result<PerronReport> {
    check_len(op.dim(), rho.len())?;
    let phi = landscape::positive_ground_state(op)?;
    let lambda = op.eigen()?.eigenvalues()[0];
    let pair = Eigenpair::from_real(lambda, &phi, 0.0);
    let t = landscape::torsion(op, rho)?;
    let mut torsion = verify_eigenvector_bound(&pair, &t, rho, None)?;
    torsion.label = "perron_torsion".into();
    let p = landscape::perron_projection_landscape(op, rho)?;
    let mut projection = verify_eigenvector_bound(&pair, &p, rho, None)?;
    projection.label = "perron_projection".into();
    Ok(PerronReport { lambda, torsion, projection })
}

/// Domination of `exp(-tA)` by `exp(-tB)` on a grid of times.
#[derive(Debug, Clone, Serialize)]
pub struct SemigroupDomination {
    pub dominated: bool,
    pub per_time: Vec<(f64, DominationReport)>,
}

/// `|exp(-tA)| <= exp(-tB) + tol` for each `t`; `B` must be real.
/// `tol` defaults to `1e-10 + 1e-9 ||exp(-tB)||_inf` per time.
pub fn verify_semigroup_domination(
    a: &MatrixOperator,
    b: &MatrixOperator,
    t_grid: &[f64],
    tol: Option<f64>,
) -> Result<SemigroupDomination> {
    check_len(b.dim(), a.dim())?;
    b.require_real()?;
    if t_grid.is_empty() {
        return Err(Error::EmptyGrid("t_grid"));
    }
    let mut per_time = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        let s = numerics::expm_matrix(a, t)?;
        let big: DMatrix<f64> = numerics::expm_matrix(b, t)?.map(|z| z.re);
        let tol = tol.unwrap_or_else(|| lattice::domination_tolerance(&big));
        per_time.push((t, lattice::is_entrywise_dominated(&s, &big, tol)?));
    }
    let dominated = per_time.iter().all(|(_, r)| r.dominated);
    Ok(SemigroupDomination { dominated, per_time })
}

/// Both magnetic bounds for one eigenpair of `L_alpha + V`.
#[derive(Debug, Clone, Serialize)]
pub struct MagneticBounds {
    pub index: usize,
    pub lambda: f64,
    pub lambda_max: f64,
    /// Envelope of `|lambda + mu| (mu + L - V_-)^{-1} 1`.
    pub lower: BoundReport,
    /// Envelope of `|lambda_max - lambda + mu| (mu + lambda_max - Q - V_+)^{-1} 1`.
    pub upper: BoundReport,
    pub lower_mu_grid: Vec<f64>,
    pub upper_mu_grid: Vec<f64>,
}

/// `mu >= 0` values from `candidates` with `mu + lambda_min(B) > margin`, plus
/// one point just above the admissibility threshold. `margin` keeps the shifted
/// operator away from round-off singularity.
fn admissible_mu(candidates: &[f64], lambda_min: f64, margin: f64) -> Vec<f64> {
    let threshold = (-lambda_min).max(0.0);
    let mut grid: Vec<f64> = candidates.iter().copied().filter(|&mu| mu >= 0.0 && mu + lambda_min > margin).collect();
    let edge = if lambda_min > margin { 0.0 } else { threshold + 1e-5 * threshold.max(1.0) };
    if !grid.contains(&edge) {
        grid.push(edge);
    }
    grid.sort_by(f64::total_cmp);
    grid
}

/// Default candidates for the magnetic resolvent grids.
pub fn default_magnetic_mu_candidates() -> Vec<f64> {
    let mut g = vec![0.0];
    g.extend(landscape::decades(-3, 5));
    g
}

/// Envelope of `|shift + mu| (mu + B)^{-1} 1` over the admissible grid.
fn comparison_envelope(b: &MatrixOperator, shift: f64, candidates: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let lmin = b.eigen()?.eigenvalues()[0];
    let grid = admissible_mu(candidates, lmin, 1e-9 * b.norm_inf().max(1.0));
    let ones = vec![1.0; b.dim()];
    let members: Vec<Vec<f64>> = grid
        .par_iter()
        .map(|&mu| {
            let x = numerics::solve(&b.shifted(mu), &ones)?;
            Ok(x.into_iter().map(|v| (shift + mu).abs() * v).collect())
        })
        .collect::<Result<_>>()?;
    Ok((landscape::pointwise_min(&members), grid))
}

/// Magnetic bounds for eigenpairs `indices` (0-based, ascending order) of
/// `L_alpha + V` restricted to the free vertices. `potential` is indexed by
/// all vertices.
pub fn magnetic_eigen_bounds(
    graph: &Graph,
    alpha: &MagneticSignature,
    potential: &PotentialVector,
    indices: &[usize],
    mu_candidates: Option<&[f64]>,
) -> Result<Vec<MagneticBounds>> {
    check_len(graph.n_vertices(), potential.len())?;
    let free = graph.free_vertices();
    let v: Vec<f64> = free.iter().map(|&i| potential.values()[i]).collect();
    let restricted = PotentialVector::new(v)?;
    let h = build_magnetic_laplacian(graph, alpha)?.plus_diagonal(restricted.values())?;
    let eig = h.eigen()?;
    let lambda_max = *eig.eigenvalues().last().expect("non-empty");
    let defaults = default_magnetic_mu_candidates();
    let candidates = mu_candidates.unwrap_or(&defaults);

    let neg: Vec<f64> = restricted.negative_part().iter().map(|x| -x).collect();
    let b_lower = build_graph_laplacian(graph).plus_diagonal(&neg)?;
    let pos: Vec<f64> = restricted.positive_part().iter().map(|x| -x).collect();
    let b_upper = build_signless_laplacian(graph).scaled(-1.0).shifted(lambda_max).plus_diagonal(&pos)?;
    b_lower.eigen()?;
    b_upper.eigen()?;

    indices
        .par_iter()
        .map(|&k| {
            let pair = Eigenpair::from_operator(&h, k)?;
            let phi_abs = pair.abs();
            let norm = pair.sup_norm();
            let tol = default_tol(norm);
            let (env1, grid1) = comparison_envelope(&b_lower, pair.lambda, candidates)?;
            let (env2, grid2) = comparison_envelope(&b_upper, lambda_max - pair.lambda, candidates)?;
            let lower = BoundReport::new(
                format!("magnetic_lower[{k}]"),
                phi_abs.clone(),
                env1.iter().map(|v| norm * v).collect(),
                tol,
            );
            let upper =
                BoundReport::new(format!("magnetic_upper[{k}]"), phi_abs, env2.iter().map(|v| norm * v).collect(), tol);
            Ok(MagneticBounds {
                index: k,
                lambda: pair.lambda,
                lambda_max,
                lower,
                upper,
                lower_mu_grid: grid1,
                upper_mu_grid: grid2,
            })
        })
        .collect()
}
