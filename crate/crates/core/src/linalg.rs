//! Dense two-qubit operator algebra.
//!
//! Operators are stored as complex matrices of dimension 2 (one qubit) or
//! 4 (two qubits, subsystem A is the left tensor factor). Spectra are computed
//! on the real symmetric embedding `[[Re, -Im], [Im, Re]]`, whose eigenvalues
//! are those of the complex operator with doubled multiplicity.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Maximum `‖M - M†‖` (entrywise max) accepted before symmetrization.
pub const HERMITIAN_GATE: f64 = 1e-10;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Which tensor factor of a two-qubit operator an operation refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Subsystem {
    A,
    B,
}

/// Returns `σ_i` for `i = 0..=3`, with `σ_0 = 1`.
pub fn pauli(i: usize) -> DMatrix<Complex64> {
    let e = match i {
        0 => [ONE, ZERO, ZERO, ONE],
        1 => [ZERO, ONE, ONE, ZERO],
        2 => [ZERO, -I, I, ZERO],
        3 => [ONE, ZERO, ZERO, -ONE],
        _ => panic!("pauli index {i} out of range"),
    };
    DMatrix::from_row_slice(2, 2, &e)
}

/// `σ_i ⊗ σ_j` as a 4×4 matrix.
pub fn pauli_product(i: usize, j: usize) -> DMatrix<Complex64> {
    pauli(i).kronecker(&pauli(j))
}

/// A Hermitian operator on one or two qubits.
#[derive(Clone, PartialEq)]
pub struct HermitianOp {
    m: DMatrix<Complex64>,
}

impl fmt::Debug for HermitianOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "HermitianOp{}", self.m)
    }
}

fn hermitian_residual(m: &DMatrix<Complex64>) -> f64 {
    let n = m.nrows();
    let mut r: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            r = r.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    r
}

impl HermitianOp {
    /// Validates and symmetrizes `m`. Rejects non-square input, dimensions
    /// other than 2 and 4, and anything further than [`HERMITIAN_GATE`] from
    /// Hermitian.
    pub fn new(m: DMatrix<Complex64>) -> Result<Self> {
        if m.nrows() != m.ncols() || !(m.nrows() == 2 || m.nrows() == 4) {
            return Err(Error::BadDimension(m.nrows().max(m.ncols())));
        }
        let residual = hermitian_residual(&m);
        if residual > HERMITIAN_GATE || !residual.is_finite() {
            return Err(Error::NotHermitian { residual });
        }
        Ok(Self::symmetrized(m))
    }

    fn symmetrized(m: DMatrix<Complex64>) -> Self {
        let h = (&m + m.adjoint()) * Complex64::new(0.5, 0.0);
        Self { m: h }
    }

    pub fn from_real_diagonal(d: &[f64]) -> Result<Self> {
        let v: Vec<Complex64> = d.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        Self::new(DMatrix::from_diagonal(&nalgebra::DVector::from_vec(v)))
    }

    pub fn identity(dim: usize) -> Self {
        Self { m: DMatrix::identity(dim, dim) }
    }

    pub fn zeros(dim: usize) -> Self {
        Self { m: DMatrix::zeros(dim, dim) }
    }

    /// Single-qubit operator `(c0·1 + Σ_k v_k σ_k)`.
    pub fn qubit(c0: f64, v: [f64; 3]) -> Self {
        let mut m = pauli(0) * Complex64::new(c0, 0.0);
        for (k, &vk) in v.iter().enumerate() {
            m += pauli(k + 1) * Complex64::new(vk, 0.0);
        }
        Self { m }
    }

    /// Projector `|ψ⟩⟨ψ|` (not normalized for you).
    pub fn projector(psi: &[Complex64]) -> Result<Self> {
        let v = nalgebra::DVector::from_column_slice(psi);
        Self::new(&v * v.adjoint())
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.m
    }

    pub fn trace(&self) -> f64 {
        self.m.trace().re
    }

    /// `Tr[self · other]`, real for Hermitian arguments.
    pub fn trace_product(&self, other: &HermitianOp) -> f64 {
        assert_eq!(self.dim(), other.dim(), "dimension mismatch");
        let n = self.dim();
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                acc += (self.m[(i, j)] * other.m[(j, i)]).re;
            }
        }
        acc
    }

    /// `[[Re, -Im], [Im, Re]]`, a real symmetric matrix of twice the dimension.
    pub fn real_embedding(&self) -> DMatrix<f64> {
        real_embedding(&self.m)
    }

    /// Eigenvalues in ascending order (each listed once).
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = SymmetricEigen::new(self.real_embedding()).eigenvalues.iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        // the embedding doubles every eigenvalue
        ev.into_iter().step_by(2).collect()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        min_eigenvalue(self)
    }

    pub fn scale(&self, c: f64) -> Self {
        Self { m: &self.m * Complex64::new(c, 0.0) }
    }

    /// Transpose (equivalently complex conjugate for Hermitian operators).
    pub fn transpose(&self) -> Self {
        Self { m: self.m.transpose() }
    }
}

impl Add for &HermitianOp {
    type Output = HermitianOp;
    fn add(self, rhs: &HermitianOp) -> HermitianOp {
        HermitianOp { m: &self.m + &rhs.m }
    }
}

impl Sub for &HermitianOp {
    type Output = HermitianOp;
    fn sub(self, rhs: &HermitianOp) -> HermitianOp {
        HermitianOp { m: &self.m - &rhs.m }
    }
}

impl Neg for &HermitianOp {
    type Output = HermitianOp;
    fn neg(self) -> HermitianOp {
        HermitianOp { m: -&self.m }
    }
}

impl Mul<f64> for &HermitianOp {
    type Output = HermitianOp;
    fn mul(self, c: f64) -> HermitianOp {
        self.scale(c)
    }
}

pub(crate) fn real_embedding(m: &DMatrix<Complex64>) -> DMatrix<f64> {
    let n = m.nrows();
    let mut r = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            let z = m[(i, j)];
            r[(i, j)] = z.re;
            r[(i + n, j + n)] = z.re;
            r[(i, j + n)] = -z.im;
            r[(i + n, j)] = z.im;
        }
    }
    r
}

/// Coefficients of a two-qubit operator in the product Pauli basis:
/// `M = Σ_{i,j} c[i][j] σ_i ⊗ σ_j`, hence `c[i][j] = Tr[M (σ_i⊗σ_j)] / 4`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PauliCoeffs(pub [[f64; 4]; 4]);

impl PauliCoeffs {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[i][j]
    }

    pub fn assemble(&self) -> HermitianOp {
        pauli_assemble(self)
    }

    /// Largest absolute difference between two coefficient tables.
    pub fn max_abs_diff(&self, other: &PauliCoeffs) -> f64 {
        let mut d: f64 = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                d = d.max((self.0[i][j] - other.0[i][j]).abs());
            }
        }
        d
    }
}

/// Expands a 4×4 Hermitian operator in the `σ_i ⊗ σ_j` basis.
pub fn pauli_expand(m: &HermitianOp) -> Result<PauliCoeffs> {
    if m.dim() != 4 {
        return Err(Error::BadDimension(m.dim()));
    }
    let mut c = [[0.0; 4]; 4];
    for (i, row) in c.iter_mut().enumerate() {
        for (j, cij) in row.iter_mut().enumerate() {
            let p = pauli_product(i, j);
            let mut acc = Complex64::new(0.0, 0.0);
            for r in 0..4 {
                for s in 0..4 {
                    acc += m.m[(r, s)] * p[(s, r)];
                }
            }
            *cij = acc.re / 4.0;
        }
    }
    Ok(PauliCoeffs(c))
}

/// Raw-matrix variant of [`pauli_expand`]; rejects non-Hermitian input.
pub fn pauli_expand_matrix(m: &DMatrix<Complex64>) -> Result<PauliCoeffs> {
    pauli_expand(&HermitianOp::new(m.clone())?)
}

pub fn pauli_assemble(c: &PauliCoeffs) -> HermitianOp {
    let mut m = DMatrix::<Complex64>::zeros(4, 4);
    for i in 0..4 {
        for j in 0..4 {
            let cij = c.0[i][j];
            if cij != 0.0 {
                m += pauli_product(i, j) * Complex64::new(cij, 0.0);
            }
        }
    }
    HermitianOp::symmetrized(m)
}

/// Kronecker product `a ⊗ b` of two single-qubit operators.
pub fn tensor(a: &HermitianOp, b: &HermitianOp) -> Result<HermitianOp> {
    if a.dim() != 2 {
        return Err(Error::BadDimension(a.dim()));
    }
    if b.dim() != 2 {
        return Err(Error::BadDimension(b.dim()));
    }
    Ok(HermitianOp { m: a.m.kronecker(&b.m) })
}

/// Traces out one qubit of a two-qubit matrix, keeping the other. Works for
/// non-Hermitian arguments; used internally for `Tr_B[W (1 ⊗ β)]` and friends.
pub(crate) fn partial_trace_matrix(m: &DMatrix<Complex64>, keep: Subsystem) -> DMatrix<Complex64> {
    let mut r = DMatrix::<Complex64>::zeros(2, 2);
    for x in 0..2 {
        for y in 0..2 {
            let mut acc = ZERO;
            for k in 0..2 {
                acc += match keep {
                    Subsystem::A => m[(2 * x + k, 2 * y + k)],
                    Subsystem::B => m[(2 * k + x, 2 * k + y)],
                };
            }
            r[(x, y)] = acc;
        }
    }
    r
}

/// Reduced operator on the kept subsystem.
pub fn partial_trace(m: &HermitianOp, keep: Subsystem) -> Result<HermitianOp> {
    if m.dim() != 4 {
        return Err(Error::BadDimension(m.dim()));
    }
    Ok(HermitianOp::symmetrized(partial_trace_matrix(&m.m, keep)))
}

/// Transposes the chosen tensor factor.
pub fn partial_transpose(m: &HermitianOp, on: Subsystem) -> Result<HermitianOp> {
    if m.dim() != 4 {
        return Err(Error::BadDimension(m.dim()));
    }
    let mut r = DMatrix::<Complex64>::zeros(4, 4);
    for a in 0..2 {
        for b in 0..2 {
            for c in 0..2 {
                for d in 0..2 {
                    // element ⟨a b| M |c d⟩
                    let v = m.m[(2 * a + b, 2 * c + d)];
                    match on {
                        Subsystem::A => r[(2 * c + b, 2 * a + d)] = v,
                        Subsystem::B => r[(2 * a + d, 2 * c + b)] = v,
                    }
                }
            }
        }
    }
    Ok(HermitianOp { m: r })
}

/// Smallest eigenvalue, from a symmetric eigensolve of the real embedding.
pub fn min_eigenvalue(m: &HermitianOp) -> f64 {
    SymmetricEigen::new(m.real_embedding()).eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
}
