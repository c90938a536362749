//! Landscape functions: positive vectors `w` with `|phi| <= ||phi||_rho * c * w`
//! for eigenpairs `(lambda, phi)`, where `c` depends only on the kind.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::{self, WeightVector};
use crate::numerics;
use crate::operator::{build_laplacian_1d, Grid1D, MatrixOperator, PotentialVector};
use crate::par::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LandscapeKind {
    Torsion,
    Resolvent,
    Parabolic,
    Envelope,
    BirmanSchwinger,
    AntiMaximum,
    Perron,
    Iterated,
}

/// Parameters that produced a landscape.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct LandscapeParams {
    pub mu: Option<f64>,
    pub t: Option<f64>,
    pub eps: Option<f64>,
    pub lambda: Option<f64>,
    /// Number of inverse applications for iterated landscapes.
    pub power: Option<u32>,
    /// For envelopes: the kind of the members and the grid minimized over.
    pub member: Option<LandscapeKind>,
    pub grid: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LandscapeFunction {
    pub values: Vec<f64>,
    pub kind: LandscapeKind,
    pub params: LandscapeParams,
    pub rho_id: String,
    pub warnings: Vec<String>,
}

impl LandscapeFunction {
    fn new(values: Vec<f64>, kind: LandscapeKind, params: LandscapeParams, rho: &WeightVector) -> Self {
        let mut lf = Self { values, kind, params, rho_id: rho.id().to_string(), warnings: Vec::new() };
        lf.note_negative_entries();
        lf
    }

    /// Negative round-off is kept as is; the verifier must see it.
    fn note_negative_entries(&mut self) {
        let (i, min) =
            self.values
                .iter()
                .copied()
                .enumerate()
                .fold((0, f64::INFINITY), |acc, (i, v)| if v < acc.1 { (i, v) } else { acc });
        if min < 0.0 {
            self.warnings.push(format!("negative entry {min:e} at index {i}"));
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Multiplier `c(lambda)` in `|phi| <= ||phi||_rho * c * values`:
    /// `|lambda|` for the torsion function, `|lambda|^k` for `A^{-k} rho`, and
    /// one for kinds that already carry the eigenvalue.
    pub fn bound_factor(&self, lambda: f64) -> f64 {
        match self.kind {
            LandscapeKind::Torsion => lambda.abs(),
            LandscapeKind::Iterated => lambda.abs().powi(self.params.power.unwrap_or(1) as i32),
            _ => 1.0,
        }
    }
}

fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}

/// `A^{-1} rho`. Warns when `A^{-1}` is not entrywise positive, since the
/// eigenvector bound then has no reason to hold.
pub fn torsion(op: &MatrixOperator, rho: &WeightVector) -> Result<LandscapeFunction> {
    check_len(op.dim(), rho.len())?;
    let values = numerics::solve(op, rho.values())?;
    let mut lf = LandscapeFunction::new(values, LandscapeKind::Torsion, LandscapeParams::default(), rho);
    if !lattice::is_inverse_positive(op)? {
        lf.warnings.push("inverse is not positive".into());
    }
    Ok(lf)
}

/// `|lambda + mu| (mu + A)^{-1} rho`.
pub fn resolvent_landscape(op: &MatrixOperator, mu: f64, lambda: f64, rho: &WeightVector) -> Result<LandscapeFunction> {
    check_len(op.dim(), rho.len())?;
    let values = resolvent_values(op, mu, lambda, rho)?;
    let params = LandscapeParams { mu: Some(mu), lambda: Some(lambda), ..Default::default() };
    Ok(LandscapeFunction::new(values, LandscapeKind::Resolvent, params, rho))
}

fn resolvent_values(op: &MatrixOperator, mu: f64, lambda: f64, rho: &WeightVector) -> Result<Vec<f64>> {
    let x = numerics::solve(&op.shifted(mu), rho.values())?;
    let c = (lambda + mu).abs();
    Ok(x.into_iter().map(|v| c * v).collect())
}

/// Entrywise minimum of equally long vectors.
pub fn pointwise_min(members: &[Vec<f64>]) -> Vec<f64> {
    let Some(first) = members.first() else {
        return Vec::new();
    };
    let mut out = first.clone();
    for m in &members[1..] {
        for (o, v) in out.iter_mut().zip(m) {
            *o = o.min(*v);
        }
    }
    out
}

/// Pointwise minimum of resolvent landscapes over `mu_grid`.
///
/// Every `mu` must exceed `s(-A)`; the spectral bound is read from the
/// operator's (cached) eigendecomposition.
pub fn resolvent_envelope(
    op: &MatrixOperator,
    lambda: f64,
    rho: &WeightVector,
    mu_grid: &[f64],
) -> Result<LandscapeFunction> {
    if mu_grid.is_empty() {
        return Err(Error::EmptyGrid("mu_grid"));
    }
    check_len(op.dim(), rho.len())?;
    let s = lattice::spectral_bound_neg(op)?;
    if let Some(&bad) = mu_grid.iter().find(|&&mu| !(mu > s)) {
        return Err(Error::InvalidParameter(format!("mu = {bad} does not exceed the spectral bound {s}")));
    }
    let members: Vec<Vec<f64>> =
        mu_grid.par_iter().map(|&mu| resolvent_values(op, mu, lambda, rho)).collect::<Result<_>>()?;
    let params = LandscapeParams {
        lambda: Some(lambda),
        member: Some(LandscapeKind::Resolvent),
        grid: mu_grid.to_vec(),
        ..Default::default()
    };
    Ok(LandscapeFunction::new(pointwise_min(&members), LandscapeKind::Envelope, params, rho))
}

/// `logspace(a, b)` with one point per decade, both ends included.
pub fn decades(lo_exp: i32, hi_exp: i32) -> Vec<f64> {
    (lo_exp..=hi_exp).map(|e| 10f64.powi(e)).collect()
}

/// Default resolvent grid: just above the spectral bound, then one point per
/// decade from `1e-1` to `1e5` (points at or below the spectral bound dropped).
pub fn default_mu_grid(op: &MatrixOperator) -> Result<Vec<f64>> {
    let s = lattice::spectral_bound_neg(op)?;
    let mut grid = vec![s + 1e-5];
    grid.extend(decades(-1, 5).into_iter().filter(|&mu| mu > s + 1e-5));
    Ok(grid)
}

/// Default parabolic grid: one point per decade from `1e-5` to `1e2`.
pub fn default_t_grid() -> Vec<f64> {
    decades(-5, 2)
}

/// `e^{t lambda} e^{-tA} rho`, summed as `sum_k e^{t(lambda - lambda_k)} c_k phi_k`
/// so that large `t` does not overflow.
pub fn parabolic_landscape(op: &MatrixOperator, t: f64, lambda: f64, rho: &WeightVector) -> Result<LandscapeFunction> {
    check_len(op.dim(), rho.len())?;
    let values = parabolic_values(op, t, lambda, rho)?;
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite(format!("parabolic landscape at t = {t}")));
    }
    let params = LandscapeParams { t: Some(t), lambda: Some(lambda), ..Default::default() };
    Ok(LandscapeFunction::new(values, LandscapeKind::Parabolic, params, rho))
}

fn parabolic_values(op: &MatrixOperator, t: f64, lambda: f64, rho: &WeightVector) -> Result<Vec<f64>> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::InvalidParameter(format!("time must be finite and non-negative, got {t}")));
    }
    if t == 0.0 {
        return Ok(rho.values().to_vec());
    }
    let eig = op.eigen()?;
    let vecs = eig.real_vectors().ok_or_else(|| Error::ComplexOperator(op.label().into()))?;
    let coeffs = vecs.tr_mul(&nalgebra::DVector::from_column_slice(rho.values()));
    let weights = nalgebra::DVector::from_iterator(
        eig.len(),
        coeffs.iter().zip(eig.eigenvalues()).map(|(c, l)| c * (t * (lambda - l)).exp()),
    );
    Ok((vecs * weights).as_slice().to_vec())
}

/// Pointwise minimum of parabolic landscapes over `t_grid`. Grid points where
/// `e^{t lambda}` overflows are skipped with a warning.
pub fn parabolic_envelope(
    op: &MatrixOperator,
    lambda: f64,
    rho: &WeightVector,
    t_grid: &[f64],
) -> Result<LandscapeFunction> {
    if t_grid.is_empty() {
        return Err(Error::EmptyGrid("t_grid"));
    }
    check_len(op.dim(), rho.len())?;
    op.eigen()?;
    let results: Vec<(f64, Vec<f64>)> =
        t_grid.par_iter().map(|&t| parabolic_values(op, t, lambda, rho).map(|v| (t, v))).collect::<Result<_>>()?;
    let mut skipped = Vec::new();
    let mut members = Vec::new();
    let mut used = Vec::new();
    for (t, v) in results {
        if v.iter().all(|x| x.is_finite()) {
            members.push(v);
            used.push(t);
        } else {
            skipped.push(t);
        }
    }
    if members.is_empty() {
        return Err(Error::NoAdmissible("every t overflows".into()));
    }
    let params = LandscapeParams {
        lambda: Some(lambda),
        member: Some(LandscapeKind::Parabolic),
        grid: used,
        ..Default::default()
    };
    let mut lf = LandscapeFunction::new(pointwise_min(&members), LandscapeKind::Envelope, params, rho);
    for t in skipped {
        lf.warnings.push(format!("t = {t} skipped: non-finite values"));
    }
    Ok(lf)
}

/// Birman-Schwinger landscape `(mu + L)^{-1} |lambda + mu - V|` for
/// `-d^2/dx^2 + V` with `V <= 0`, where `L` is the Dirichlet Laplacian.
pub fn birman_schwinger_landscape(
    grid: &Grid1D,
    potential: &PotentialVector,
    lambda: f64,
    mu: f64,
) -> Result<LandscapeFunction> {
    check_len(grid.n_interior(), potential.len())?;
    if let Some(v) = potential.values().iter().find(|&&v| v > 0.0) {
        return Err(Error::InvalidParameter(format!("potential must be non-positive, found {v}")));
    }
    // Exact lowest eigenvalue of the discrete Dirichlet Laplacian.
    let h = grid.h();
    let ground = 4.0 / (h * h) * (std::f64::consts::PI * h / 2.0).sin().powi(2);
    if !(mu + ground > 0.0) {
        return Err(Error::InvalidParameter(format!("mu = {mu} must exceed -{ground} for a positive resolvent")));
    }
    let rhs: Vec<f64> = potential.values().iter().map(|v| (lambda + mu - v).abs()).collect();
    let values = numerics::solve(&build_laplacian_1d(grid).shifted(mu), &rhs)?;
    let params = LandscapeParams { mu: Some(mu), lambda: Some(lambda), ..Default::default() };
    let rho = WeightVector::ones(grid.n_interior());
    let mut lf = LandscapeFunction::new(values, LandscapeKind::BirmanSchwinger, params, &rho);
    lf.rho_id = "|lambda + mu - V|".into();
    Ok(lf)
}

/// Result of the anti-maximum probe.
#[derive(Debug, Clone)]
pub struct AntiMaximum {
    pub eps_max: f64,
    pub landscape: LandscapeFunction,
    /// Grid values that failed the sign test.
    pub rejected: Vec<f64>,
}

/// Largest `eps` in the grid for which `-((s(-A) - eps) + A)^{-1} rho > 0`,
/// with the landscape `|s(-A) - eps + lambda| * (-((s(-A) - eps) + A)^{-1} rho)`.
pub fn antimaximum_probe(
    op: &MatrixOperator,
    rho: &WeightVector,
    eps_grid: &[f64],
    lambda: f64,
) -> Result<AntiMaximum> {
    if eps_grid.is_empty() {
        return Err(Error::EmptyGrid("eps_grid"));
    }
    check_len(op.dim(), rho.len())?;
    let eig = op.eigen()?;
    if eig.len() > 1 {
        let gap = eig.eigenvalues()[1] - eig.eigenvalues()[0];
        if gap < 1e-10 {
            return Err(Error::DegenerateGround { gap });
        }
    }
    let s = -eig.eigenvalues()[0];
    let trials: Vec<(f64, Option<Vec<f64>>)> = eps_grid
        .par_iter()
        .map(|&eps| {
            if !(eps > 0.0) {
                return (eps, None);
            }
            let shifted = op.shifted(s - eps);
            let w = match numerics::solve(&shifted, rho.values()) {
                Ok(x) => x.into_iter().map(|v| -v).collect::<Vec<_>>(),
                Err(_) => return (eps, None),
            };
            let ok = w.iter().all(|&v| v > 0.0);
            (eps, ok.then_some(w))
        })
        .collect();
    let mut rejected = Vec::new();
    let mut best: Option<(f64, Vec<f64>)> = None;
    for (eps, w) in trials {
        match w {
            Some(w) if best.as_ref().is_none_or(|b| eps > b.0) => best = Some((eps, w)),
            Some(_) => {}
            None => rejected.push(eps),
        }
    }
    let (eps, w) =
        best.ok_or_else(|| Error::NoAdmissible(format!("no eps in {eps_grid:?} gives a negative resolvent")))?;
    let c = (s - eps + lambda).abs();
    let params = LandscapeParams { eps: Some(eps), lambda: Some(lambda), mu: Some(s - eps), ..Default::default() };
    let landscape =
        LandscapeFunction::new(w.into_iter().map(|v| c * v).collect(), LandscapeKind::AntiMaximum, params, rho);
    Ok(AntiMaximum { eps_max: eps, landscape, rejected })
}

/// `A^{-k} rho` for `k = 1..=k_max`.
#[derive(Debug, Clone)]
pub struct IteratedLandscape {
    pub levels: Vec<LandscapeFunction>,
    /// `A^{-1} rho <= rho`.
    pub submarkov: bool,
    /// Every level is entrywise at most the previous one.
    pub monotone: bool,
}

impl IteratedLandscape {
    /// `A^{-k} rho / ||A^{-k} rho||_inf` for the last level.
    pub fn normalized_last(&self) -> Vec<f64> {
        let last = self.levels.last().expect("k_max >= 1");
        let m = last.values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        last.values.iter().map(|v| v / m).collect()
    }
}

pub fn iterated_landscape(op: &MatrixOperator, rho: &WeightVector, k_max: u32) -> Result<IteratedLandscape> {
    if k_max == 0 {
        return Err(Error::InvalidParameter("k_max must be at least 1".into()));
    }
    check_len(op.dim(), rho.len())?;
    let lu = numerics::factor(op)?;
    let mut current = rho.values().to_vec();
    let mut levels = Vec::with_capacity(k_max as usize);
    let mut monotone = true;
    let tol = |x: f64| 4.0 * f64::EPSILON * x.abs();
    for k in 1..=k_max {
        let next = lu.solve(&current)?;
        if k > 1 {
            monotone &= next.iter().zip(&current).all(|(a, b)| *a <= b + tol(*b));
        }
        let params = LandscapeParams { power: Some(k), ..Default::default() };
        levels.push(LandscapeFunction::new(next.clone(), LandscapeKind::Iterated, params, rho));
        current = next;
    }
    // The first step is compared against rho itself.
    let first = &levels[0].values;
    let submarkov = first.iter().zip(rho.values()).all(|(a, b)| *a <= b + tol(*b));
    monotone &= submarkov;
    Ok(IteratedLandscape { levels, submarkov, monotone })
}

/// Perron projection `P rho = phi <phi, rho> / ||phi||^2` onto the ground state.
pub fn perron_projection_landscape(op: &MatrixOperator, rho: &WeightVector) -> Result<LandscapeFunction> {
    check_len(op.dim(), rho.len())?;
    let phi = positive_ground_state(op)?;
    let dot: f64 = phi.iter().zip(rho.values()).map(|(a, b)| a * b).sum();
    let norm2: f64 = phi.iter().map(|a| a * a).sum();
    let values = phi.iter().map(|a| a * dot / norm2).collect();
    let lambda = op.eigen()?.eigenvalues()[0];
    let params = LandscapeParams { lambda: Some(lambda), ..Default::default() };
    Ok(LandscapeFunction::new(values, LandscapeKind::Perron, params, rho))
}

/// Ground state of a real Hermitian operator with simple lowest eigenvalue,
/// signed so that it is non-negative. Fails when the computed vector changes
/// sign beyond round-off.
pub fn positive_ground_state(op: &MatrixOperator) -> Result<Vec<f64>> {
    let eig = op.eigen()?;
    if eig.len() > 1 {
        let gap = eig.eigenvalues()[1] - eig.eigenvalues()[0];
        if gap < 1e-10 {
            return Err(Error::DegenerateGround { gap });
        }
    }
    let mut phi = eig.real_vector(0).ok_or_else(|| Error::ComplexOperator(op.label().into()))?;
    let scale = phi.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let (min, max) = phi.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    if max <= 0.0 {
        phi.iter_mut().for_each(|v| *v = -*v);
    }
    let (min, max) = if max <= 0.0 { (-max, -min) } else { (min, max) };
    if min < -1e-12 * scale {
        return Err(Error::IndefiniteGround { min, max });
    }
    Ok(phi)
}

/// `e^{-tA} rho / A^{-1} rho`, for inspection only; no bound is attached.
pub fn semigroup_torsion_ratio(op: &MatrixOperator, t: f64, rho: &WeightVector) -> Result<Vec<f64>> {
    check_len(op.dim(), rho.len())?;
    let num = numerics::expm_apply(op, t, rho.values())?;
    let den = numerics::solve(op, rho.values())?;
    Ok(num.iter().zip(&den).map(|(a, b)| a / b).collect())
}
