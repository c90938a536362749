//! Dense kernels: LU solves, Hermitian eigendecomposition and the action of
//! `exp(-tA)` for Hermitian `A`.

use std::ops::{Add, Div, Mul, Sub};

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::operator::{Entries, MatrixOperator};
use crate::par::*;

/// Scalar field for the hand-written LU.
pub trait Field:
    Copy + Send + Sync + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Div<Output = Self>
{
    fn zero() -> Self;
    fn modulus(self) -> f64;
}

impl Field for f64 {
    fn zero() -> Self {
        0.0
    }
    fn modulus(self) -> f64 {
        self.abs()
    }
}

impl Field for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn modulus(self) -> f64 {
        self.norm()
    }
}

/// LU factorization with partial pivoting, `P A = L U`, stored packed.
#[derive(Debug, Clone)]
pub struct Lu<T> {
    packed: DMatrix<T>,
    perm: Vec<usize>,
}

impl<T: Field + nalgebra::Scalar> Lu<T> {
    /// Factor `a`. A pivot below `n * eps * max|A|` is reported as singular.
    pub fn new(mut a: DMatrix<T>) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, got: a.ncols() });
        }
        let scale = a.iter().fold(0.0f64, |acc, x| acc.max(x.modulus()));
        let tiny = (n.max(1) as f64) * f64::EPSILON * scale;
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let mut p = k;
            let mut best = a[(k, k)].modulus();
            for i in k + 1..n {
                let m = a[(i, k)].modulus();
                if m > best {
                    best = m;
                    p = i;
                }
            }
            if best <= tiny || scale == 0.0 {
                return Err(Error::Singular { pivot: k, magnitude: best });
            }
            if p != k {
                a.swap_rows(p, k);
                perm.swap(p, k);
            }
            let pivot = a[(k, k)];
            for i in k + 1..n {
                a[(i, k)] = a[(i, k)] / pivot;
            }
            // Column-oriented update; zero entries of row k are skipped, so
            // banded matrices cost O(n * bandwidth^2).
            for j in k + 1..n {
                let u = a[(k, j)];
                if u.modulus() == 0.0 {
                    continue;
                }
                for i in k + 1..n {
                    let l = a[(i, k)];
                    a[(i, j)] = a[(i, j)] - l * u;
                }
            }
        }
        Ok(Self { packed: a, perm })
    }

    pub fn dim(&self) -> usize {
        self.perm.len()
    }

    pub fn solve(&self, b: &[T]) -> Result<Vec<T>> {
        let n = self.dim();
        if b.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: b.len() });
        }
        let lu = &self.packed;
        let mut x: Vec<T> = self.perm.iter().map(|&p| b[p]).collect();
        for j in 0..n {
            let xj = x[j];
            if xj.modulus() == 0.0 {
                continue;
            }
            for i in j + 1..n {
                x[i] = x[i] - lu[(i, j)] * xj;
            }
        }
        for j in (0..n).rev() {
            let xj = x[j] / lu[(j, j)];
            x[j] = xj;
            if xj.modulus() == 0.0 {
                continue;
            }
            for i in 0..j {
                x[i] = x[i] - lu[(i, j)] * xj;
            }
        }
        Ok(x)
    }
}

/// Factor a real operator once for repeated solves.
pub fn factor(op: &MatrixOperator) -> Result<Lu<f64>> {
    Lu::new(op.require_real()?.clone())
}

pub fn factor_complex(op: &MatrixOperator) -> Result<Lu<Complex64>> {
    Lu::new(op.to_complex())
}

/// `A^{-1} b` for a real operator.
pub fn solve(op: &MatrixOperator, b: &[f64]) -> Result<Vec<f64>> {
    let x = factor(op)?.solve(b)?;
    finite(&x, "solve")?;
    Ok(x)
}

/// `A^{-1} b` over the complex field; accepts real or complex operators.
pub fn solve_complex(op: &MatrixOperator, b: &[Complex64]) -> Result<Vec<Complex64>> {
    factor_complex(op)?.solve(b)
}

/// Dense inverse of a real operator, one column solve per unit vector.
pub fn inverse(op: &MatrixOperator) -> Result<DMatrix<f64>> {
    let lu = factor(op)?;
    let n = lu.dim();
    let cols: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|j| {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            lu.solve(&e).expect("dimension fixed")
        })
        .collect();
    let inv = DMatrix::from_fn(n, n, |i, j| cols[j][i]);
    finite(inv.as_slice(), "inverse")?;
    Ok(inv)
}

fn finite(x: &[f64], what: &str) -> Result<()> {
    if x.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what.to_string()))
    }
}

/// Eigenvectors in the storage of the operator they came from.
#[derive(Debug, Clone)]
pub enum Eigenvectors {
    Real(DMatrix<f64>),
    Complex(DMatrix<Complex64>),
}

/// Full Hermitian spectrum, ascending, with orthonormal eigenvector columns.
///
/// Each eigenvector is scaled so that its largest-magnitude entry is real and
/// positive, which makes the output independent of the solver's phase choice.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    eigenvalues: Vec<f64>,
    vectors: Eigenvectors,
}

impl EigenDecomposition {
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn vectors(&self) -> &Eigenvectors {
        &self.vectors
    }

    /// Eigenvector matrix when the operator was real.
    pub fn real_vectors(&self) -> Option<&DMatrix<f64>> {
        match &self.vectors {
            Eigenvectors::Real(v) => Some(v),
            Eigenvectors::Complex(_) => None,
        }
    }

    pub fn real_vector(&self, k: usize) -> Option<Vec<f64>> {
        self.real_vectors().map(|v| v.column(k).iter().copied().collect())
    }

    pub fn vector(&self, k: usize) -> Vec<Complex64> {
        match &self.vectors {
            Eigenvectors::Real(v) => v.column(k).iter().map(|&x| Complex64::new(x, 0.0)).collect(),
            Eigenvectors::Complex(v) => v.column(k).iter().copied().collect(),
        }
    }

    /// `|phi_k|` entrywise.
    pub fn vector_abs(&self, k: usize) -> Vec<f64> {
        match &self.vectors {
            Eigenvectors::Real(v) => v.column(k).iter().map(|x| x.abs()).collect(),
            Eigenvectors::Complex(v) => v.column(k).iter().map(|z| z.norm()).collect(),
        }
    }

    /// `max_k ||A v_k - lambda_k v_k||_inf`.
    pub fn max_residual(&self, op: &MatrixOperator) -> f64 {
        (0..self.len())
            .map(|k| {
                let v = self.vector(k);
                let av = op.matvec_complex(&v).expect("dimension fixed");
                av.iter().zip(&v).map(|(a, x)| (a - x * self.eigenvalues[k]).norm()).fold(0.0, f64::max)
            })
            .fold(0.0, f64::max)
    }

    /// `max |<v_j, v_k> - delta_jk|`.
    pub fn orthogonality_defect(&self) -> f64 {
        let gram = match &self.vectors {
            Eigenvectors::Real(v) => (v.transpose() * v).map(|x| Complex64::new(x, 0.0)),
            Eigenvectors::Complex(v) => v.adjoint() * v,
        };
        let n = gram.nrows();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((gram[(i, j)] - target).norm());
            }
        }
        worst
    }

    /// `V diag(lambda) V^*`.
    pub fn reconstruct(&self) -> DMatrix<Complex64> {
        let d = DMatrix::from_diagonal(&DVector::from_iterator(
            self.len(),
            self.eigenvalues.iter().map(|&l| Complex64::new(l, 0.0)),
        ));
        let v = match &self.vectors {
            Eigenvectors::Real(v) => v.map(|x| Complex64::new(x, 0.0)),
            Eigenvectors::Complex(v) => v.clone(),
        };
        &v * d * v.adjoint()
    }
}

/// Hermitian eigendecomposition. Non-Hermitian operators are rejected.
pub fn eig_hermitian(op: &MatrixOperator) -> Result<EigenDecomposition> {
    op.require_hermitian()?;
    let n = op.dim();
    match op.entries() {
        Entries::Real(m) => {
            // Symmetrize so round-off in the flag tolerance cannot leak in.
            let sym = (m + m.transpose()) * 0.5;
            let eig = SymmetricEigen::new(sym);
            let order = ascending(eig.eigenvalues.as_slice());
            let eigenvalues = order.iter().map(|&k| eig.eigenvalues[k]).collect();
            let mut vectors = DMatrix::zeros(n, n);
            for (dst, &src) in order.iter().enumerate() {
                let mut col = eig.eigenvectors.column(src).clone_owned();
                let lead = col.iter().fold(0.0f64, |acc, &x| if x.abs() > acc.abs() { x } else { acc });
                if lead < 0.0 {
                    col.neg_mut();
                }
                vectors.set_column(dst, &col);
            }
            Ok(EigenDecomposition { eigenvalues, vectors: Eigenvectors::Real(vectors) })
        }
        Entries::Complex(m) => {
            let herm = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
            let eig = SymmetricEigen::new(herm);
            let order = ascending(eig.eigenvalues.as_slice());
            let eigenvalues = order.iter().map(|&k| eig.eigenvalues[k]).collect();
            let mut vectors = DMatrix::zeros(n, n);
            for (dst, &src) in order.iter().enumerate() {
                let mut col = eig.eigenvectors.column(src).clone_owned();
                let lead =
                    col.iter().copied().fold(
                        Complex64::new(0.0, 0.0),
                        |acc, z| {
                            if z.norm() > acc.norm() {
                                z
                            } else {
                                acc
                            }
                        },
                    );
                if lead.norm() > 0.0 {
                    let phase = lead.conj() / lead.norm();
                    col *= phase;
                }
                vectors.set_column(dst, &col);
            }
            Ok(EigenDecomposition { eigenvalues, vectors: Eigenvectors::Complex(vectors) })
        }
    }
}

fn ascending(values: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    order
}

/// `exp(-tA) v` for Hermitian real `A`, via the cached eigendecomposition.
pub fn expm_apply(op: &MatrixOperator, t: f64, v: &[f64]) -> Result<Vec<f64>> {
    check_time(t)?;
    op.require_real()?;
    if v.len() != op.dim() {
        return Err(Error::DimensionMismatch { expected: op.dim(), got: v.len() });
    }
    if t == 0.0 {
        return Ok(v.to_vec());
    }
    let eig = op.eigen()?;
    let vecs = eig.real_vectors().expect("real operator has real eigenvectors");
    let coeffs = vecs.transpose() * DVector::from_column_slice(v);
    let damped =
        DVector::from_iterator(eig.len(), coeffs.iter().zip(eig.eigenvalues()).map(|(c, l)| c * (-t * l).exp()));
    let out = vecs * damped;
    Ok(out.as_slice().to_vec())
}

/// `exp(-tA)` as a dense matrix, for Hermitian real or complex `A`.
pub fn expm_matrix(op: &MatrixOperator, t: f64) -> Result<DMatrix<Complex64>> {
    check_time(t)?;
    let eig = op.eigen()?;
    let n = eig.len();
    let v = match eig.vectors() {
        Eigenvectors::Real(v) => v.map(|x| Complex64::new(x, 0.0)),
        Eigenvectors::Complex(v) => v.clone(),
    };
    let mut scaled = v.clone();
    for k in 0..n {
        let f = Complex64::new((-t * eig.eigenvalues()[k]).exp(), 0.0);
        for i in 0..n {
            scaled[(i, k)] *= f;
        }
    }
    Ok(scaled * v.adjoint())
}

fn check_time(t: f64) -> Result<()> {
    if t >= 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("time must be finite and non-negative, got {t}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::{build_laplacian_1d, Grid1D};
    use std::f64::consts::PI;

    #[test]
    fn identity_solve_returns_rhs() {
        let b = vec![1.5, -2.0, 3.25];
        assert_eq!(solve(&MatrixOperator::identity(3), &b).unwrap(), b);
    }

    #[test]
    fn three_point_torsion() {
        let l = build_laplacian_1d(&Grid1D::new(3).unwrap());
        let x = solve(&l, &[1.0; 3]).unwrap();
        for (a, b) in x.iter().zip([0.09375, 0.125, 0.09375]) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn singular_reports_pivot() {
        let a = MatrixOperator::from_real("ones", DMatrix::from_element(2, 2, 1.0)).unwrap();
        match solve(&a, &[1.0, 1.0]) {
            Err(Error::Singular { pivot, .. }) => assert_eq!(pivot, 1),
            other => panic!("expected singular error, got {other:?}"),
        }
    }

    #[test]
    fn pivoting_handles_zero_leading_entry() {
        let a = MatrixOperator::from_real("swap", DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0])).unwrap();
        assert_eq!(solve(&a, &[2.0, 3.0]).unwrap(), vec![3.0, 2.0]);
    }

    #[test]
    fn complex_solve_matches_product() {
        let m = DMatrix::from_row_slice(
            2,
            2,
            &[Complex64::new(2.0, 0.0), Complex64::new(0.0, -1.0), Complex64::new(0.0, 1.0), Complex64::new(3.0, 0.0)],
        );
        let a = MatrixOperator::from_complex("c", m).unwrap();
        let b = vec![Complex64::new(1.0, 0.5), Complex64::new(-0.25, 2.0)];
        let x = solve_complex(&a, &b).unwrap();
        let ax = a.matvec_complex(&x).unwrap();
        for (u, v) in ax.iter().zip(&b) {
            assert!((u - v).norm() < 1e-14);
        }
    }

    #[test]
    fn diagonal_spectrum_sorted() {
        let a = MatrixOperator::diagonal(&[3.0, 1.0, 2.0]).unwrap();
        let e = eig_hermitian(&a).unwrap();
        assert_eq!(e.eigenvalues(), &[1.0, 2.0, 3.0]);
        let v = e.real_vectors().unwrap();
        assert_eq!(v[(1, 0)], 1.0);
        assert_eq!(v[(2, 1)], 1.0);
        assert_eq!(v[(0, 2)], 1.0);
    }

    #[test]
    fn non_hermitian_rejected() {
        let a = MatrixOperator::from_real("upper", DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 1.0])).unwrap();
        assert!(matches!(eig_hermitian(&a), Err(Error::NotHermitian(_))));
        assert!(matches!(expm_apply(&a, 1.0, &[1.0, 1.0]), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn laplacian_eigenpairs_match_closed_form() {
        let g = Grid1D::new(199).unwrap();
        let l = build_laplacian_1d(&g);
        let e = l.eigen().unwrap();
        let h = g.h();
        let xs = g.points();
        for k in 1..=5 {
            let exact = 4.0 / (h * h) * (k as f64 * PI * h / 2.0).sin().powi(2);
            assert!((e.eigenvalues()[k - 1] - exact).abs() < 1e-8 * exact);
            let v = e.real_vector(k - 1).unwrap();
            let s: Vec<f64> = xs.iter().map(|x| (k as f64 * PI * x).sin()).collect();
            let norm = s.iter().map(|x| x * x).sum::<f64>().sqrt();
            let dot: f64 = v.iter().zip(&s).map(|(a, b)| a * b).sum::<f64>() / norm;
            assert!((dot.abs() - 1.0).abs() < 1e-10);
        }
        assert!(e.max_residual(&l) <= 1e-10 * l.norm_inf());
        assert!(e.orthogonality_defect() <= 1e-10);
    }

    #[test]
    fn magnetic_triangle_has_real_spectrum() {
        use crate::operator::{build_magnetic_laplacian, Graph, MagneticSignature};
        let g = Graph::complete(3).unwrap();
        let alpha = MagneticSignature::new(&g, vec![PI / 2.0, 0.0, 0.0]).unwrap();
        let l = build_magnetic_laplacian(&g, &alpha).unwrap();
        let e = eig_hermitian(&l).unwrap();
        assert!(e.max_residual(&l) < 1e-12);
        let recon = e.reconstruct();
        let diff = (recon - l.to_complex()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(diff < 1e-12);
    }

    #[test]
    fn exponential_of_diagonal() {
        let a = MatrixOperator::diagonal(&[0.5, 2.0]).unwrap();
        let y = expm_apply(&a, 1.5, &[2.0, -1.0]).unwrap();
        assert!((y[0] - 2.0 * (-0.75f64).exp()).abs() < 1e-15);
        assert!((y[1] + (-3.0f64).exp()).abs() < 1e-15);
        assert_eq!(expm_apply(&a, 0.0, &[2.0, -1.0]).unwrap(), vec![2.0, -1.0]);
        assert!(expm_apply(&a, -1.0, &[1.0, 1.0]).is_err());
    }

    #[test]
    fn exponential_matrix_agrees_with_pade() {
        let l = build_laplacian_1d(&Grid1D::new(6).unwrap()).scaled(0.01);
        let ours = expm_matrix(&l, 0.7).unwrap();
        let reference = (l.real().unwrap() * -0.7).exp();
        let diff = ours.iter().zip(reference.iter()).map(|(a, b)| (a.re - b).abs()).fold(0.0, f64::max);
        assert!(diff < 1e-12, "{diff}");
    }

    #[test]
    fn inverse_times_matrix_is_identity() {
        let l = build_laplacian_1d(&Grid1D::new(20).unwrap());
        let inv = inverse(&l).unwrap();
        let id = l.real().unwrap() * inv;
        let defect = (id - DMatrix::identity(20, 20)).abs().max();
        assert!(defect < 1e-10);
    }
}
