//! Dense complex operator algebra over labeled product bases.
//!
//! Every Hamiltonian, collapse operator and density matrix in the crate is an
//! [`Operator`]: a square complex matrix that carries the [`Basis`] it is
//! expressed in. Two-atom bases are atom1-major products of per-atom level
//! lists, so `|m n>` sits at index `m * dim2 + n`.

mod basis;
mod driven;

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use basis::{Basis, BasisLabel};
pub use driven::{DriveTerm, DrivenHamiltonian, Tone};

pub type C64 = Complex64;

/// Largest operator dimension accepted by [`tensor`].
pub const MAX_DIM: usize = 10_000;

#[inline]
pub(crate) fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Numerical tolerances shared by the algebra and the integrators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub equality: f64,
    pub hermiticity: f64,
    pub normalization: f64,
    /// Allowed |Tr rho - 1| for density matrices handed to the algebra.
    pub trace: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            equality: 1e-12,
            hermiticity: 1e-12,
            normalization: 1e-10,
            trace: 1e-8,
        }
    }
}

/// Dense square operator over a labeled basis.
#[derive(Clone, PartialEq)]
pub struct Operator {
    basis: Arc<Basis>,
    mat: DMatrix<C64>,
}

impl Operator {
    pub fn zeros(basis: &Arc<Basis>) -> Self {
        let d = basis.dim();
        Operator {
            basis: basis.clone(),
            mat: DMatrix::zeros(d, d),
        }
    }

    pub fn identity(basis: &Arc<Basis>) -> Self {
        let d = basis.dim();
        Operator {
            basis: basis.clone(),
            mat: DMatrix::identity(d, d),
        }
    }

    pub fn from_matrix(basis: &Arc<Basis>, mat: DMatrix<C64>) -> Result<Self> {
        let d = basis.dim();
        if mat.nrows() != d || mat.ncols() != d {
            return Err(Error::DimensionMismatch {
                left: d,
                right: mat.nrows().max(mat.ncols()),
            });
        }
        Ok(Operator {
            basis: basis.clone(),
            mat,
        })
    }

    pub fn from_fn(basis: &Arc<Basis>, f: impl FnMut(usize, usize) -> C64) -> Self {
        let d = basis.dim();
        Operator {
            basis: basis.clone(),
            mat: DMatrix::from_fn(d, d, f),
        }
    }

    /// `|bra_label><ket_label|`-style single matrix unit, addressed by level labels.
    pub fn transition(basis: &Arc<Basis>, to: &[&str], from: &[&str]) -> Result<Self> {
        let i = basis.index_of(to)?;
        let j = basis.index_of(from)?;
        let mut op = Operator::zeros(basis);
        op.mat[(i, j)] = c(1.0, 0.0);
        Ok(op)
    }

    /// Outer product `|a><b|`.
    pub fn outer(a: &Ket, b: &Ket) -> Result<Self> {
        check_same(&a.basis, &b.basis)?;
        let mat = &a.amps * b.amps.adjoint();
        Ok(Operator {
            basis: a.basis.clone(),
            mat,
        })
    }

    pub fn projector(k: &Ket) -> Self {
        Operator {
            basis: k.basis.clone(),
            mat: &k.amps * k.amps.adjoint(),
        }
    }

    pub fn basis(&self) -> &Arc<Basis> {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.mat
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.mat
    }

    /// Row-major flat copy of the entries.
    pub fn flatten(&self) -> Vec<C64> {
        let d = self.dim();
        let mut out = Vec::with_capacity(d * d);
        for i in 0..d {
            for j in 0..d {
                out.push(self.mat[(i, j)]);
            }
        }
        out
    }

    pub fn dagger(&self) -> Self {
        Operator {
            basis: self.basis.clone(),
            mat: self.mat.adjoint(),
        }
    }

    pub fn scale(&self, s: C64) -> Self {
        Operator {
            basis: self.basis.clone(),
            mat: &self.mat * s,
        }
    }

    pub fn scale_re(&self, s: f64) -> Self {
        self.scale(c(s, 0.0))
    }

    pub fn trace(&self) -> C64 {
        self.mat.trace()
    }

    /// Largest entrywise modulus.
    pub fn max_abs(&self) -> f64 {
        self.mat.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise `|self - other|`.
    pub fn max_diff(&self, other: &Operator) -> Result<f64> {
        check_same(&self.basis, &other.basis)?;
        Ok(self
            .mat
            .iter()
            .zip(other.mat.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    /// Spectral norm of a Hermitian operator (largest |eigenvalue|).
    pub fn hermitian_norm(&self) -> f64 {
        self.eigenvalues_hermitian()
            .iter()
            .map(|e| e.abs())
            .fold(0.0, f64::max)
    }

    /// Operator 2-norm via singular values.
    pub fn norm2(&self) -> f64 {
        if self.mat.iter().all(|z| *z == C64::new(0.0, 0.0)) {
            return 0.0;
        }
        self.mat.clone().singular_values().max()
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn eigenvalues_hermitian(&self) -> Vec<f64> {
        let h = (&self.mat + self.mat.adjoint()) * c(0.5, 0.0);
        let mut ev: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
        ev
    }

    /// `<a|self|b>`.
    pub fn element(&self, a: &Ket, b: &Ket) -> Result<C64> {
        check_same(&self.basis, &a.basis)?;
        check_same(&self.basis, &b.basis)?;
        Ok((a.amps.adjoint() * &self.mat * &b.amps)[(0, 0)])
    }

    pub fn apply(&self, k: &Ket) -> Result<Ket> {
        check_same(&self.basis, &k.basis)?;
        Ok(Ket {
            basis: k.basis.clone(),
            amps: &self.mat * &k.amps,
        })
    }

    /// `U^dag self U` for a change of basis whose columns are the new basis vectors.
    pub fn conjugate_by(&self, u: &DMatrix<C64>) -> DMatrix<C64> {
        u.adjoint() * &self.mat * u
    }

    pub fn checked_add(&self, rhs: &Operator) -> Result<Operator> {
        check_same(&self.basis, &rhs.basis)?;
        Ok(Operator {
            basis: self.basis.clone(),
            mat: &self.mat + &rhs.mat,
        })
    }

    pub fn checked_mul(&self, rhs: &Operator) -> Result<Operator> {
        check_same(&self.basis, &rhs.basis)?;
        Ok(Operator {
            basis: self.basis.clone(),
            mat: &self.mat * &rhs.mat,
        })
    }

    /// Nonzero entries as `(row, col, value)` triplets, row-major.
    pub fn nonzeros(&self) -> Vec<(usize, usize, C64)> {
        let d = self.dim();
        let mut out = Vec::new();
        for i in 0..d {
            for j in 0..d {
                let z = self.mat[(i, j)];
                if z.re != 0.0 || z.im != 0.0 {
                    out.push((i, j, z));
                }
            }
        }
        out
    }
}

impl Index<(usize, usize)> for Operator {
    type Output = C64;
    fn index(&self, idx: (usize, usize)) -> &C64 {
        &self.mat[idx]
    }
}

impl IndexMut<(usize, usize)> for Operator {
    fn index_mut(&mut self, idx: (usize, usize)) -> &mut C64 {
        &mut self.mat[idx]
    }
}

// Operator arithmetic panics on basis mismatch; use the checked_* forms where
// the bases come from user input.
impl<'a> Add<&'a Operator> for &'a Operator {
    type Output = Operator;
    fn add(self, rhs: &'a Operator) -> Operator {
        self.checked_add(rhs).expect("operator bases differ")
    }
}

impl<'a> Sub<&'a Operator> for &'a Operator {
    type Output = Operator;
    fn sub(self, rhs: &'a Operator) -> Operator {
        check_same(&self.basis, &rhs.basis).expect("operator bases differ");
        Operator {
            basis: self.basis.clone(),
            mat: &self.mat - &rhs.mat,
        }
    }
}

impl<'a> Mul<&'a Operator> for &'a Operator {
    type Output = Operator;
    fn mul(self, rhs: &'a Operator) -> Operator {
        self.checked_mul(rhs).expect("operator bases differ")
    }
}

impl fmt::Debug for Operator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Operator(dim = {})", self.dim())?;
        for i in 0..self.dim() {
            write!(f, "  {:>6} |", self.basis.label(i))?;
            for j in 0..self.dim() {
                let z = self.mat[(i, j)];
                write!(f, " {:+.4e}{:+.4e}i", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// State vector over a labeled basis.
#[derive(Clone, Debug, PartialEq)]
pub struct Ket {
    basis: Arc<Basis>,
    amps: DVector<C64>,
}

impl Ket {
    pub fn basis_state(basis: &Arc<Basis>, labels: &[&str]) -> Result<Self> {
        let i = basis.index_of(labels)?;
        let mut amps = DVector::zeros(basis.dim());
        amps[i] = c(1.0, 0.0);
        Ok(Ket {
            basis: basis.clone(),
            amps,
        })
    }

    pub fn from_amplitudes(basis: &Arc<Basis>, amps: Vec<C64>) -> Result<Self> {
        if amps.len() != basis.dim() {
            return Err(Error::DimensionMismatch {
                left: basis.dim(),
                right: amps.len(),
            });
        }
        Ok(Ket {
            basis: basis.clone(),
            amps: DVector::from_vec(amps),
        })
    }

    /// Normalized superposition `sum_k w_k |label_k>`.
    pub fn superposition(basis: &Arc<Basis>, terms: &[(C64, &[&str])]) -> Result<Self> {
        let mut amps = DVector::zeros(basis.dim());
        for (w, labels) in terms {
            amps[basis.index_of(labels)?] += *w;
        }
        Ket {
            basis: basis.clone(),
            amps,
        }
        .normalize()
    }

    pub fn normalize(self) -> Result<Self> {
        let n = self.amps.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::InvalidParameter(
                "cannot normalize a zero vector".into(),
            ));
        }
        Ok(Ket {
            basis: self.basis,
            amps: self.amps / c(n, 0.0),
        })
    }

    pub fn basis(&self) -> &Arc<Basis> {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.norm_squared()
    }

    pub fn inner(&self, other: &Ket) -> Result<C64> {
        check_same(&self.basis, &other.basis)?;
        Ok(self.amps.dotc(&other.amps))
    }

    pub fn scale(&self, s: C64) -> Ket {
        Ket {
            basis: self.basis.clone(),
            amps: &self.amps * s,
        }
    }
}

pub(crate) fn check_same(a: &Arc<Basis>, b: &Arc<Basis>) -> Result<()> {
    if Arc::ptr_eq(a, b) || a == b {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            left: a.dim(),
            right: b.dim(),
        })
    }
}

/// Kronecker product with atom1-major label composition.
pub fn tensor(a: &Operator, b: &Operator) -> Result<Operator> {
    let (m, n) = (a.dim(), b.dim());
    let dim = m
        .checked_mul(n)
        .ok_or(Error::DimensionOverflow(usize::MAX))?;
    if dim > MAX_DIM {
        return Err(Error::DimensionOverflow(dim));
    }
    let basis = Arc::new(Basis::product(&a.basis, &b.basis));
    let mat = a.mat.kronecker(&b.mat);
    Ok(Operator { basis, mat })
}

/// `<psi|rho|psi>` for a normalized ket and a unit-trace Hermitian density matrix.
pub fn fidelity(psi: &Ket, rho: &Operator) -> Result<f64> {
    fidelity_with(psi, rho, &Tolerances::default())
}

pub fn fidelity_with(psi: &Ket, rho: &Operator, tol: &Tolerances) -> Result<f64> {
    if psi.dim() != rho.dim() {
        return Err(Error::DimensionMismatch {
            left: psi.dim(),
            right: rho.dim(),
        });
    }
    let herm = hermitize_check(rho);
    if herm > tol.hermiticity.max(1e-10) {
        return Err(Error::NotHermitian(herm));
    }
    let tr = rho.trace();
    if (tr.re - 1.0).abs() > tol.trace || tr.im.abs() > tol.trace {
        return Err(Error::TraceNotUnit(tr.re));
    }
    let v = rho.element(psi, psi)?;
    debug_assert!(v.im.abs() < 1e-10, "imaginary fidelity part {}", v.im);
    Ok(v.re)
}

/// `ab - ba`.
pub fn commutator(a: &Operator, b: &Operator) -> Result<Operator> {
    check_same(&a.basis, &b.basis)?;
    Ok(Operator {
        basis: a.basis.clone(),
        mat: &a.mat * &b.mat - &b.mat * &a.mat,
    })
}

/// Largest entrywise `|a - a^dag|`.
pub fn hermitize_check(a: &Operator) -> f64 {
    let d = a.dim();
    let mut worst = 0.0f64;
    for i in 0..d {
        for j in i..d {
            worst = worst.max((a.mat[(i, j)] - a.mat[(j, i)].conj()).norm());
        }
    }
    worst
}
