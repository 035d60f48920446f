//! Two-qubit witnesses in the Pauli basis, and the honest assignment channel.

use std::f64::consts::FRAC_PI_4;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{
    self, partial_trace, partial_trace_matrix, pauli_assemble, pauli_expand, tensor, HermitianOp, PauliCoeffs,
    Subsystem,
};

/// Minimum eigenvalue accepted for a density operator.
pub const STATE_PSD_TOL: f64 = 1e-8;

/// A witness `W = Σ w_ij σ_i ⊗ σ_j` together with its assembled matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Witness {
    coeffs: PauliCoeffs,
    matrix: HermitianOp,
}

impl Witness {
    pub fn from_coeffs(coeffs: PauliCoeffs) -> Self {
        let matrix = pauli_assemble(&coeffs);
        Self { coeffs, matrix }
    }

    pub fn from_operator(op: &HermitianOp) -> Result<Self> {
        Ok(Self::from_coeffs(pauli_expand(op)?))
    }

    /// The Bell witness `W_{π/4}`.
    pub fn bell() -> Self {
        build_theta_witness(FRAC_PI_4).expect("π/4 is in range")
    }

    pub fn coeffs(&self) -> &PauliCoeffs {
        &self.coeffs
    }

    pub fn matrix(&self) -> &HermitianOp {
        &self.matrix
    }

    /// `w_{i,j}`
    pub fn w(&self, i: usize, j: usize) -> f64 {
        self.coeffs.0[i][j]
    }

    /// Multiplies every coefficient by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        let mut k = self.coeffs;
        k.0.iter_mut().flatten().for_each(|x| *x *= c);
        Self::from_coeffs(k)
    }
}

/// A no-click assignment `(a_1, a_2, a_3)`: the mean outcome reported for each
/// setting when the detector does not fire.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AssignmentVector(pub [f64; 3]);

impl AssignmentVector {
    pub const ZERO: Self = Self([0.0; 3]);

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// `1/2 + Σ a_i σ_i / 2`
    pub fn operator(&self) -> HermitianOp {
        HermitianOp::qubit(0.5, self.0.map(|x| 0.5 * x))
    }
}

fn check_theta(theta: f64) -> Result<()> {
    if !(theta > 0.0 && theta <= FRAC_PI_4 + 1e-15) {
        return Err(Error::InvalidInput(format!("theta={theta} outside (0, π/4]")));
    }
    Ok(())
}

fn check_eta(eta: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::InvalidInput(format!("eta={eta} outside [0, 1]")));
    }
    Ok(())
}

/// `W_θ = cos²θ·1⊗1 − |Ψ_θ⟩⟨Ψ_θ|`, built from its Pauli coefficients.
pub fn build_theta_witness(theta: f64) -> Result<Witness> {
    check_theta(theta)?;
    let (s2, c2) = (2.0 * theta).sin_cos();
    let mut w = PauliCoeffs::default();
    w.0[0][0] = 0.5 * c2 + 0.25;
    w.0[0][3] = 0.25 * c2;
    w.0[3][0] = 0.25 * c2;
    w.0[1][1] = -0.25 * s2;
    w.0[2][2] = 0.25 * s2;
    w.0[3][3] = -0.25;
    Ok(Witness::from_coeffs(w))
}

/// `|Ψ_θ⟩⟨Ψ_θ|` with `|Ψ_θ⟩ = sinθ|00⟩ + cosθ|11⟩`.
pub fn build_target_state(theta: f64) -> Result<HermitianOp> {
    check_theta(theta)?;
    let z = Complex64::new(0.0, 0.0);
    HermitianOp::projector(&[Complex64::new(theta.sin(), 0.0), z, z, Complex64::new(theta.cos(), 0.0)])
}

/// Checks unit trace and positivity to [`STATE_PSD_TOL`].
pub fn validate_state(rho: &HermitianOp) -> Result<()> {
    if rho.dim() != 4 {
        return Err(Error::BadDimension(rho.dim()));
    }
    let tr = rho.trace();
    if (tr - 1.0).abs() > STATE_PSD_TOL {
        return Err(Error::InvalidState(format!("trace {tr} != 1")));
    }
    let lmin = linalg::min_eigenvalue(rho);
    if lmin < -STATE_PSD_TOL {
        return Err(Error::InvalidState(format!("min eigenvalue {lmin:.3e}")));
    }
    Ok(())
}

/// `Tr[W ρ]` for a validated density operator.
pub fn expectation(w: &Witness, rho: &HermitianOp) -> Result<f64> {
    validate_state(rho)?;
    Ok(w.matrix.trace_product(rho))
}

/// Honest-detector image of `ρ` under the assignment post-processing:
/// `η²ρ + η(1−η) ρ^A⊗β + (1−η)η α⊗ρ^B + (1−η)² α⊗β`.
///
/// The assignments are not required to be valid (see [`is_valid_assignment`]).
pub fn assignment_channel(
    rho: &HermitianOp,
    a: &AssignmentVector,
    b: &AssignmentVector,
    eta: f64,
) -> Result<HermitianOp> {
    check_eta(eta)?;
    if rho.dim() != 4 {
        return Err(Error::BadDimension(rho.dim()));
    }
    let tr = rho.trace();
    if (tr - 1.0).abs() > STATE_PSD_TOL {
        return Err(Error::InvalidState(format!("trace {tr} != 1")));
    }
    let alpha = a.operator();
    let beta = b.operator();
    let rho_a = partial_trace(rho, Subsystem::A)?;
    let rho_b = partial_trace(rho, Subsystem::B)?;
    let l = 1.0 - eta;
    let mut out = rho.scale(eta * eta);
    out = &out + &tensor(&rho_a, &beta)?.scale(eta * l);
    out = &out + &tensor(&alpha, &rho_b)?.scale(l * eta);
    out = &out + &tensor(&alpha, &beta)?.scale(l * l);
    Ok(out)
}

/// Adjoint of [`assignment_channel`] applied to `W`, so that
/// `Tr[W_eff ρ] = Tr[W · channel(ρ)]` for every unit-trace `ρ`.
pub fn effective_witness(w: &Witness, a: &AssignmentVector, b: &AssignmentVector, eta: f64) -> Result<HermitianOp> {
    check_eta(eta)?;
    let alpha = a.operator();
    let beta = b.operator();
    let id2 = HermitianOp::identity(2);
    let wm = w.matrix.matrix();
    let l = 1.0 - eta;

    let w_beta = wm * tensor(&id2, &beta)?.matrix();
    let on_a = HermitianOp::new(partial_trace_matrix(&w_beta, Subsystem::A))?;
    let alpha_w = wm * tensor(&alpha, &id2)?.matrix();
    let on_b = HermitianOp::new(partial_trace_matrix(&alpha_w, Subsystem::B))?;
    let constant = w.matrix.trace_product(&tensor(&alpha, &beta)?);

    let mut out = w.matrix.scale(eta * eta);
    out = &out + &tensor(&on_a, &id2)?.scale(eta * l);
    out = &out + &tensor(&id2, &on_b)?.scale(l * eta);
    out = &out + &HermitianOp::identity(4).scale(l * l * constant);
    Ok(out)
}

/// Bell-witness value on the Bell state after the honest assignment channel:
/// `(1 − η² − η − (1−η)² Tr[αᵀβ]) / 2`.
pub fn bell_assignment_value(a: &AssignmentVector, b: &AssignmentVector, eta: f64) -> f64 {
    let overlap = a.operator().transpose().trace_product(&b.operator());
    let l = 1.0 - eta;
    0.5 * (1.0 - eta * eta - eta - l * l * overlap)
}

/// `α ≥ 0`, i.e. `a₁² + a₂² + a₃² ≤ 1`.
pub fn is_valid_assignment(a: &AssignmentVector) -> bool {
    a.0.iter().map(|x| x * x).sum::<f64>() <= 1.0 + 1e-12
}
