//! Eigenvalue lower bounds: torsion maximum, resolvent and parabolic
//! optimizations, Hoelder-type kernel estimates, the nonlinear torsion bound,
//! and closed-form values for the 1D `p`-Laplacian.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::landscape;
use crate::lattice::{self, WeightVector};
use crate::numerics;
use crate::operator::MatrixOperator;
use crate::par::*;

/// Parameters at which a lower bound was attained.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Optimizer {
    pub mu: Option<f64>,
    pub t: Option<f64>,
    pub rho_id: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LowerBoundResult {
    pub value: f64,
    pub method: &'static str,
    pub optimizer: Optimizer,
    /// Smallest eigenvalue, when the spectrum of the operator is known.
    pub certified_target: Option<f64>,
    pub warnings: Vec<String>,
}

impl LowerBoundResult {
    fn new(value: f64, method: &'static str, optimizer: Optimizer, op: Option<&MatrixOperator>) -> Self {
        let certified_target = op.and_then(|o| o.cached_eigen()).map(|e| e.eigenvalues()[0]);
        Self { value, method, optimizer, certified_target, warnings: Vec::new() }
    }

    /// `value <= target + 1e-8 |target|` when a target is known.
    pub fn is_certified(&self) -> Option<bool> {
        self.certified_target.map(|t| self.value <= t + 1e-8 * t.abs().max(1.0))
    }

    /// Attach the smallest eigenvalue as the value the bound must not exceed.
    pub fn with_target(mut self, target: f64) -> Self {
        self.certified_target = Some(target);
        self
    }
}

/// `1 / ||A^{-1} rho||_rho`.
pub fn dv_lower_bound(op: &MatrixOperator, rho: &WeightVector) -> Result<LowerBoundResult> {
    let v = numerics::solve(op, rho.values())?;
    let g = lattice::gauge_norm(&v, rho)?;
    let opt = Optimizer { mu: Some(0.0), rho_id: Some(rho.id().into()), ..Default::default() };
    Ok(LowerBoundResult::new(1.0 / g, "torsion", opt, Some(op)))
}

/// `max over (rho, mu) of 1/||(mu + A)^{-1} rho||_rho - mu`, over `mu >= 0`.
/// Grid points where the shifted operator is singular are skipped.
pub fn resolvent_optimized_lower_bound(
    op: &MatrixOperator,
    rho_set: &[WeightVector],
    mu_grid: &[f64],
) -> Result<LowerBoundResult> {
    let pairs: Vec<(usize, f64)> = rho_set
        .iter()
        .enumerate()
        .flat_map(|(r, _)| mu_grid.iter().filter(|&&mu| mu >= 0.0).map(move |&mu| (r, mu)))
        .collect();
    let values: Vec<Option<(usize, f64, f64)>> = pairs
        .par_iter()
        .map(|&(r, mu)| {
            let rho = &rho_set[r];
            let x = numerics::solve(&op.shifted(mu), rho.values()).ok()?;
            let g = lattice::gauge_norm(&x, rho).ok()?;
            Some((r, mu, 1.0 / g - mu))
        })
        .collect();
    let best = values
        .into_iter()
        .flatten()
        .fold(None::<(usize, f64, f64)>, |acc, c| match acc {
            Some(a) if a.2 >= c.2 => Some(a),
            _ => Some(c),
        })
        .ok_or_else(|| Error::NoAdmissible("no (rho, mu) pair with mu >= 0 and a regular shift".into()))?;
    let opt = Optimizer { mu: Some(best.1), rho_id: Some(rho_set[best.0].id().into()), ..Default::default() };
    Ok(LowerBoundResult::new(best.2, "resolvent", opt, Some(op)))
}

/// `max over t of -log ||e^{-tA} rho||_rho / t`. Warns when `e^{-tA}` is not
/// a positive semigroup.
pub fn parabolic_lower_bound(op: &MatrixOperator, rho: &WeightVector, t_grid: &[f64]) -> Result<LowerBoundResult> {
    if t_grid.is_empty() {
        return Err(Error::EmptyGrid("t_grid"));
    }
    if let Some(t) = t_grid.iter().find(|&&t| !(t > 0.0)) {
        return Err(Error::InvalidParameter(format!("times must be positive, got {t}")));
    }
    let lambda_min = op.eigen()?.eigenvalues()[0];
    // -log ||e^{-tA} rho|| / t = lambda_min - log ||e^{t lambda_min} e^{-tA} rho|| / t;
    // the shifted form does not underflow for large t.
    let values: Vec<(f64, f64)> = t_grid
        .par_iter()
        .map(|&t| {
            let y = landscape::parabolic_landscape(op, t, lambda_min, rho)?;
            Ok((t, lambda_min - lattice::gauge_norm(&y.values, rho)?.ln() / t))
        })
        .collect::<Result<_>>()?;
    let (t, value) = values.into_iter().fold((f64::NAN, f64::NEG_INFINITY), |acc, c| if c.1 > acc.1 { c } else { acc });
    let opt = Optimizer { t: Some(t), rho_id: Some(rho.id().into()), ..Default::default() };
    let mut out = LowerBoundResult::new(value, "parabolic", opt, Some(op));
    let m = lattice::modulus_generator(op);
    let positive = op.real().is_some_and(|a| a == m.real().expect("modulus is real"));
    if !positive {
        out.warnings.push("semigroup is not positive; bound may not apply".into());
    }
    Ok(out)
}

/// Which operator a materialized kernel represents.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum KernelMode {
    /// Kernel of `(mu + A)^{-1}`; the bound is `1/S - mu`.
    Resolvent { mu: f64 },
    /// Kernel of `e^{-tA}`; the bound is `-log(S)/t`.
    Parabolic { t: f64 },
}

/// Hoelder exponent pairing for the kernel norm `S`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum HoelderNorm {
    /// `sup_x int |K(x, y)| dy`.
    RowSup,
    /// `(int int |K|^2)^{1/2}`.
    L2,
    /// `sup_y int |K(x, y)| dx`.
    ColumnSup,
}

/// Lower bound on the smallest eigenvalue from a materialized integral kernel
/// `K_ij = k(x_i, x_j)` and quadrature weights `w`.
pub fn kernel_hoelder_bounds(
    kernel: &DMatrix<f64>,
    weights: &[f64],
    mode: KernelMode,
    norm: HoelderNorm,
) -> Result<LowerBoundResult> {
    let n = weights.len();
    if kernel.nrows() != n || kernel.ncols() != n {
        return Err(Error::DimensionMismatch { expected: n, got: kernel.nrows().max(kernel.ncols()) });
    }
    if weights.iter().any(|w| !(*w > 0.0)) {
        return Err(Error::InvalidParameter("quadrature weights must be positive".into()));
    }
    let s = match norm {
        HoelderNorm::RowSup => {
            (0..n).map(|i| (0..n).map(|j| kernel[(i, j)].abs() * weights[j]).sum::<f64>()).fold(0.0, f64::max)
        }
        HoelderNorm::ColumnSup => {
            (0..n).map(|j| (0..n).map(|i| kernel[(i, j)].abs() * weights[i]).sum::<f64>()).fold(0.0, f64::max)
        }
        HoelderNorm::L2 => {
            let mut acc = 0.0;
            for j in 0..n {
                for i in 0..n {
                    acc += kernel[(i, j)].powi(2) * weights[i] * weights[j];
                }
            }
            acc.sqrt()
        }
    };
    let (value, opt) = match mode {
        KernelMode::Resolvent { mu } => (1.0 / s - mu, Optimizer { mu: Some(mu), ..Default::default() }),
        KernelMode::Parabolic { t } => {
            if !(t > 0.0) {
                return Err(Error::InvalidParameter(format!("time must be positive, got {t}")));
            }
            (-s.ln() / t, Optimizer { t: Some(t), ..Default::default() })
        }
    };
    let method = match norm {
        HoelderNorm::RowSup => "kernel_row_sup",
        HoelderNorm::L2 => "kernel_l2",
        HoelderNorm::ColumnSup => "kernel_column_sup",
    };
    Ok(LowerBoundResult::new(value, method, opt, None))
}

/// Kernel of `(mu + A)^{-1}` on a uniform grid with spacing `h`:
/// `K_ij = ((mu + A)^{-1})_ij / h`.
pub fn resolvent_kernel(op: &MatrixOperator, mu: f64, h: f64) -> Result<DMatrix<f64>> {
    Ok(numerics::inverse(&op.shifted(mu))? / h)
}

/// `||v||_rho^{1-p}` for the torsion `v` of a `(p-1)`-homogeneous operator.
pub fn nonlinear_lower_bound(p: f64, torsion: &[f64], rho: &WeightVector) -> Result<LowerBoundResult> {
    if !(p > 1.0) {
        return Err(Error::InvalidParameter(format!("p must exceed 1, got {p}")));
    }
    if let Some(v) = torsion.iter().find(|v| !(**v >= 0.0)) {
        return Err(Error::InvalidParameter(format!("torsion must be non-negative, found {v}")));
    }
    let g = lattice::gauge_norm(torsion, rho)?;
    let opt = Optimizer { rho_id: Some(rho.id().into()), ..Default::default() };
    Ok(LowerBoundResult::new(g.powf(1.0 - p), "nonlinear_torsion", opt, None))
}

/// Closed-form values for the Dirichlet `p`-Laplacian on `(0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct POracles {
    pub p: f64,
    /// `2 pi / (p sin(pi / p))`.
    pub pi_p: f64,
    /// `(p - 1) pi_p^p`.
    pub lambda_min: f64,
    /// `2^p (p / (p - 1))^{p - 1}`, the inverse torsion maximum to the power `p - 1`.
    pub closed_form_bound: f64,
    /// `(p - 1)/p (1/2)^{p/(p-1)}`.
    pub torsion_max: f64,
}

pub fn continuum_p_oracles(p: f64) -> Result<POracles> {
    if !(p > 1.0) || !p.is_finite() {
        return Err(Error::InvalidParameter(format!("p must exceed 1, got {p}")));
    }
    let pi_p = 2.0 * PI / (p * (PI / p).sin());
    Ok(POracles {
        p,
        pi_p,
        lambda_min: (p - 1.0) * pi_p.powf(p),
        closed_form_bound: 2f64.powf(p) * (p / (p - 1.0)).powf(p - 1.0),
        torsion_max: (p - 1.0) / p * 0.5f64.powf(p / (p - 1.0)),
    })
}

/// Continuum torsion `(p-1)/p ((1/2)^{q} - |x - 1/2|^{q})`, `q = p/(p-1)`.
pub fn continuum_p_torsion(p: f64, x: f64) -> f64 {
    let q = p / (p - 1.0);
    (p - 1.0) / p * (0.5f64.powf(q) - (x - 0.5).abs().powf(q))
}

/// Default exponents for the `p -> 1` extrapolation.
pub const CHEEGER_P_SEQUENCE: [f64; 6] = [1.3, 1.1, 1.03, 1.01, 1.003, 1.001];

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CheegerEstimate {
    /// Bound at the smallest `p`.
    pub last: f64,
    /// Linear extrapolation in `p - 1` through the two smallest exponents.
    pub richardson: f64,
}

/// Estimate `lim_{p -> 1+}` of a sequence of bounds.
pub fn cheeger_limit_estimate(ps: &[f64], bounds: &[f64]) -> Result<CheegerEstimate> {
    if ps.len() != bounds.len() {
        return Err(Error::DimensionMismatch { expected: ps.len(), got: bounds.len() });
    }
    if ps.len() < 2 {
        return Err(Error::InvalidParameter("need at least two exponents".into()));
    }
    if let Some(p) = ps.iter().find(|&&p| !(p > 1.0)) {
        return Err(Error::InvalidParameter(format!("exponents must exceed 1, got {p}")));
    }
    if ps.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::InvalidParameter("exponents must be strictly decreasing".into()));
    }
    let n = ps.len() - 1;
    let (e0, e1) = (ps[n - 1] - 1.0, ps[n] - 1.0);
    let (f0, f1) = (bounds[n - 1], bounds[n]);
    Ok(CheegerEstimate { last: f1, richardson: (f1 * e0 - f0 * e1) / (e0 - e1) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::{build_laplacian_1d, Grid1D};

    #[test]
    fn diagonal_resolvent_bound_is_exact() {
        let d = MatrixOperator::diagonal(&[2.0, 3.0]).unwrap();
        let r = resolvent_optimized_lower_bound(&d, &[WeightVector::ones(2)], &[10.0]).unwrap();
        assert!((r.value - 2.0).abs() < 1e-12);
        assert_eq!(r.optimizer.mu, Some(10.0));
    }

    #[test]
    fn zero_shift_reduces_to_torsion_bound() {
        let l = build_laplacian_1d(&Grid1D::new(49).unwrap());
        let rho = WeightVector::ones(49);
        let a = resolvent_optimized_lower_bound(&l, std::slice::from_ref(&rho), &[0.0, -5.0]).unwrap();
        let b = dv_lower_bound(&l, &rho).unwrap();
        assert_eq!(a.value, b.value);
        assert!(resolvent_optimized_lower_bound(&l, &[rho], &[-1.0]).is_err());
    }

    #[test]
    fn parabolic_on_multiple_of_identity() {
        let a = MatrixOperator::identity(3).scaled(2.5);
        let r = parabolic_lower_bound(&a, &WeightVector::ones(3), &[0.1, 1.0, 7.0]).unwrap();
        assert!((r.value - 2.5).abs() < 1e-12);
        assert!(r.warnings.is_empty());
    }

    #[test]
    fn parabolic_survives_underflowing_times() {
        // e^{-100 A} 1 underflows to zero entrywise for the 49-point Laplacian.
        let l = build_laplacian_1d(&Grid1D::new(49).unwrap());
        let lambda = l.eigen().unwrap().eigenvalues()[0];
        let r = parabolic_lower_bound(&l, &WeightVector::ones(49), &[1.0, 100.0, 1e4]).unwrap();
        assert!(r.value.is_finite() && r.value <= lambda);
        assert_eq!(r.optimizer.t, Some(1e4));
        assert!(lambda - r.value < 1e-3);
    }

    #[test]
    fn nonlinear_bound_at_p_two_is_torsion_bound() {
        let l = build_laplacian_1d(&Grid1D::new(49).unwrap());
        let rho = WeightVector::ones(49);
        let v = numerics::solve(&l, rho.values()).unwrap();
        let a = nonlinear_lower_bound(2.0, &v, &rho).unwrap();
        let b = dv_lower_bound(&l, &rho).unwrap();
        assert!((a.value - b.value).abs() < 1e-12 * b.value);
        assert!(nonlinear_lower_bound(1.0, &v, &rho).is_err());
    }

    #[test]
    fn oracles_at_two_and_four() {
        let o = continuum_p_oracles(2.0).unwrap();
        assert!((o.pi_p - PI).abs() < 1e-14);
        assert!((o.lambda_min - PI * PI).abs() < 1e-12);
        assert!((o.closed_form_bound - 8.0).abs() < 1e-12);
        assert!((o.torsion_max - 0.125).abs() < 1e-15);
        let o = continuum_p_oracles(4.0).unwrap();
        assert!((o.pi_p - PI / 2f64.sqrt()).abs() < 1e-14);
        assert!((o.lambda_min - 73.06).abs() < 5e-3);
        assert!((o.closed_form_bound - 37.926).abs() < 1e-3);
        assert!((o.torsion_max.powf(-3.0) - o.closed_form_bound).abs() < 1e-9);
        assert!(continuum_p_oracles(1.0).is_err());
    }

    #[test]
    fn closed_form_bound_below_eigenvalue() {
        for i in 0..=89 {
            let p = 1.1 + 0.1 * i as f64;
            let o = continuum_p_oracles(p).unwrap();
            assert!(o.closed_form_bound <= o.lambda_min, "p = {p}");
        }
    }

    #[test]
    fn torsion_profile_peaks_at_centre() {
        for p in [1.2, 2.0, 4.0] {
            let o = continuum_p_oracles(p).unwrap();
            assert!((continuum_p_torsion(p, 0.5) - o.torsion_max).abs() < 1e-15);
            assert!(continuum_p_torsion(p, 0.0).abs() < 1e-15);
        }
    }

    #[test]
    fn cheeger_extrapolation() {
        let bounds: Vec<f64> =
            CHEEGER_P_SEQUENCE.iter().map(|&p| continuum_p_oracles(p).unwrap().closed_form_bound).collect();
        let c = cheeger_limit_estimate(&CHEEGER_P_SEQUENCE, &bounds).unwrap();
        assert!((c.richardson - 2.0).abs() < 5e-3);
        assert!(c.last > c.richardson);
        assert!(cheeger_limit_estimate(&[1.1, 1.1], &[2.0, 2.0]).is_err());
        assert!(cheeger_limit_estimate(&[1.1, 1.2], &[2.0, 2.0]).is_err());
    }

    #[test]
    fn green_kernel_bounds() {
        let g = Grid1D::new(199).unwrap();
        let l = build_laplacian_1d(&g);
        let k = resolvent_kernel(&l, 0.0, g.h()).unwrap();
        let w = vec![g.h(); 199];
        let row = kernel_hoelder_bounds(&k, &w, KernelMode::Resolvent { mu: 0.0 }, HoelderNorm::RowSup).unwrap();
        assert!((row.value - 8.0).abs() < 1e-3);
        let col = kernel_hoelder_bounds(&k, &w, KernelMode::Resolvent { mu: 0.0 }, HoelderNorm::ColumnSup).unwrap();
        assert!((col.value - row.value).abs() < 1e-9);
        let l2 = kernel_hoelder_bounds(&k, &w, KernelMode::Resolvent { mu: 0.0 }, HoelderNorm::L2).unwrap();
        assert!((l2.value - 90f64.sqrt()).abs() < 1e-2);
        assert!(kernel_hoelder_bounds(&k, &w[1..], KernelMode::Resolvent { mu: 0.0 }, HoelderNorm::L2).is_err());
    }
}
