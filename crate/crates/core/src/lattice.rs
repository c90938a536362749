//! Order-theoretic primitives on `R^n`: weight vectors, the gauge norm,
//! entrywise domination, positivity checks and the modulus generator.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics;
use crate::operator::MatrixOperator;

/// Strictly positive weight vector defining a gauge norm.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightVector {
    values: Vec<f64>,
    id: String,
}

impl WeightVector {
    pub fn new(values: Vec<f64>, id: impl Into<String>) -> Result<Self> {
        if let Some((index, &value)) = values.iter().enumerate().find(|(_, v)| !(**v > 0.0) || !v.is_finite()) {
            return Err(Error::NonPositiveWeight { index, value });
        }
        Ok(Self { values, id: id.into() })
    }

    /// The constant weight `1`.
    pub fn ones(n: usize) -> Self {
        Self { values: vec![1.0; n], id: "ones".into() }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Rescaled copy with `max = 1`, keeping the id.
    pub fn normalized(&self) -> Self {
        let m = self.values.iter().fold(0.0f64, |a, &b| a.max(b));
        Self { values: self.values.iter().map(|v| v / m).collect(), id: self.id.clone() }
    }
}

/// `max_i |f_i| / rho_i`.
pub fn gauge_norm(f: &[f64], rho: &WeightVector) -> Result<f64> {
    check_len(rho.len(), f.len())?;
    Ok(f.iter().zip(rho.values()).map(|(x, r)| x.abs() / r).fold(0.0, f64::max))
}

/// Gauge norm of a complex vector, using `|f_i|`.
pub fn gauge_norm_complex(f: &[Complex64], rho: &WeightVector) -> Result<f64> {
    check_len(rho.len(), f.len())?;
    Ok(f.iter().zip(rho.values()).map(|(z, r)| z.norm() / r).fold(0.0, f64::max))
}

/// Index attaining the gauge norm (first one on ties).
pub fn gauge_argmax(f: &[f64], rho: &WeightVector) -> Result<usize> {
    check_len(rho.len(), f.len())?;
    let mut best = (0, f64::NEG_INFINITY);
    for (i, (x, r)) in f.iter().zip(rho.values()).enumerate() {
        let q = x.abs() / r;
        if q > best.1 {
            best = (i, q);
        }
    }
    Ok(best.0)
}

/// Outcome of an entrywise domination test `|S| <= T + tol`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DominationReport {
    pub dominated: bool,
    /// Entry with the largest `|S_ij| - T_ij`.
    pub worst: (usize, usize),
    /// `max_ij (|S_ij| - T_ij)`; non-positive when strictly dominated.
    pub excess: f64,
    pub tol: f64,
}

/// Default domination tolerance for `T`: `1e-10 + 1e-9 ||T||_inf`.
pub fn domination_tolerance(t: &DMatrix<f64>) -> f64 {
    let norm = t.row_iter().map(|r| r.iter().map(|x| x.abs()).sum::<f64>()).fold(0.0, f64::max);
    1e-10 + 1e-9 * norm
}

/// Is `|S_ij| <= T_ij + tol` for every entry?
pub fn is_entrywise_dominated(s: &DMatrix<Complex64>, t: &DMatrix<f64>, tol: f64) -> Result<DominationReport> {
    if s.shape() != t.shape() {
        return Err(Error::DimensionMismatch { expected: t.len(), got: s.len() });
    }
    let mut worst = (0, 0);
    let mut excess = f64::NEG_INFINITY;
    for j in 0..s.ncols() {
        for i in 0..s.nrows() {
            let e = s[(i, j)].norm() - t[(i, j)];
            if e > excess {
                excess = e;
                worst = (i, j);
            }
        }
    }
    if s.is_empty() {
        excess = 0.0;
    }
    Ok(DominationReport { dominated: excess <= tol, worst, excess, tol })
}

/// Generator of the smallest positive semigroup dominating `exp(-tA)`:
/// `M_ii = Re A_ii`, `M_ij = -|A_ij|`.
pub fn modulus_generator(op: &MatrixOperator) -> MatrixOperator {
    let n = op.dim();
    let m = DMatrix::from_fn(n, n, |i, j| {
        let a = op.entry(i, j);
        if i == j {
            a.re
        } else {
            -a.norm()
        }
    });
    MatrixOperator::from_real(format!("modulus({})", op.label()), m).expect("finite entries")
}

/// Are all entries of `A^{-1}` at least `-tol`?
pub fn inverse_positivity_check(op: &MatrixOperator, tol: f64) -> Result<bool> {
    let inv = numerics::inverse(op)?;
    Ok(inv.iter().all(|&x| x >= -tol))
}

/// Inverse positivity with a relative tolerance `1e-12 max|A^{-1}|`,
/// cached on the operator.
pub fn is_inverse_positive(op: &MatrixOperator) -> Result<bool> {
    if let Some(b) = op.cached_inverse_positivity() {
        return Ok(b);
    }
    let inv = numerics::inverse(op)?;
    let scale = inv.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    let positive = inv.iter().all(|&x| x >= -1e-12 * scale);
    op.cache_inverse_positivity(positive);
    Ok(positive)
}

/// Is `A^{-1} rho <= rho` entrywise?
pub fn submarkov_check(op: &MatrixOperator, rho: &WeightVector) -> Result<bool> {
    check_len(op.dim(), rho.len())?;
    let v = numerics::solve(op, rho.values())?;
    Ok(v.iter().zip(rho.values()).all(|(x, r)| *x <= r * (1.0 + 4.0 * f64::EPSILON)))
}

/// `s(-A) = -lambda_min(A)` for Hermitian `A`.
pub fn spectral_bound_neg(op: &MatrixOperator) -> Result<f64> {
    let eig = op.eigen()?;
    Ok(-eig.eigenvalues()[0])
}

fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}
