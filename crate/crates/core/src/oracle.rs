//! Closed-form optima and explicit optimal attacks for the Bell witness.
//!
//! The ensembles built here are exact feasible points of the conic programs,
//! so they certify the closed-form values independently of the solver.

use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lattice::ClickPattern;
use crate::linalg::{tensor, HermitianOp};
use crate::model::{ConicProgram, EnsembleEvaluation, StrategyEnsemble};
use crate::witness::AssignmentVector;

/// `1/√3`, where the optimal attack changes shape.
pub const ETA_UPPER_BOUNDARY: f64 = 0.577_350_269_189_625_8;
/// `1/3`, the second branch point of the attack parameters.
pub const ETA_LOWER_BOUNDARY: f64 = 1.0 / 3.0;

/// Minimum of the Bell witness over separable attacks under discarding.
pub fn discard_bell_min(eta: f64) -> Result<f64> {
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(Error::InvalidInput(format!("eta must lie in (0, 1], got {eta}")));
    }
    Ok(if eta > ETA_UPPER_BOUNDARY { 0.25 - 0.25 / (eta * eta) } else { -0.5 })
}

/// Minimum of the Bell witness over separable attacks with the zero assignment.
pub fn assignment_bell_min_zero(eta: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::InvalidInput(format!("eta must lie in [0, 1], got {eta}")));
    }
    Ok(if eta > ETA_UPPER_BOUNDARY { 0.0 } else { 0.25 - 0.75 * eta * eta })
}

/// Strategy variants for which the explicit attack is known.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleStrategy {
    Discard,
    /// Assignment with `a = b = 0`.
    AssignmentZero,
}

impl OracleStrategy {
    pub fn closed_form(self, eta: f64) -> Result<f64> {
        match self {
            OracleStrategy::Discard => discard_bell_min(eta),
            OracleStrategy::AssignmentZero => assignment_bell_min_zero(eta),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AppendixBranch {
    /// `η > 1/√3`
    High,
    /// `1/3 < η ≤ 1/√3`
    Middle,
    /// `η ≤ 1/3`
    Low,
}

impl AppendixBranch {
    pub fn for_eta(eta: f64) -> Self {
        if eta > ETA_UPPER_BOUNDARY {
            AppendixBranch::High
        } else if eta > ETA_LOWER_BOUNDARY {
            AppendixBranch::Middle
        } else {
            AppendixBranch::Low
        }
    }
}

impl fmt::Display for AppendixBranch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AppendixBranch::High => "eta > 1/sqrt(3)",
            AppendixBranch::Middle => "1/3 < eta <= 1/sqrt(3)",
            AppendixBranch::Low => "eta <= 1/3",
        })
    }
}

const ROUNDING: f64 = 1e-14;

/// Weights `p0..p4` of the optimal attack.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AppendixParams {
    pub eta: f64,
    pub p: [f64; 5],
}

impl AppendixParams {
    /// Parameters from the branch that contains `eta`.
    pub fn new(eta: f64) -> Result<Self> {
        if !(eta > 0.0 && eta <= 1.0) {
            return Err(Error::InvalidInput(format!("eta must lie in (0, 1], got {eta}")));
        }
        Self::from_branch(AppendixBranch::for_eta(eta), eta)
    }

    /// Evaluates one branch's formulas at `eta`, which need not lie in the
    /// branch. Fails if any weight comes out negative.
    pub fn from_branch(branch: AppendixBranch, eta: f64) -> Result<Self> {
        let e2 = eta * eta;
        let mut p = match branch {
            AppendixBranch::High => {
                [0.0, (3.0 * e2 - 1.0) / 2.0, (1.0 - eta).powi(2) / 2.0, (1.0 - eta) * (2.0 * eta - 1.0) / 2.0, 0.0]
            }
            AppendixBranch::Middle => {
                [0.0, 0.0, (1.0 - 3.0 * eta).powi(2) / 6.0, (6.0 * eta - 1.0 - 7.0 * e2) / 4.0, (1.0 - 3.0 * e2) / 6.0]
            }
            AppendixBranch::Low => [(1.0 - 3.0 * eta).powi(2), 0.0, 0.0, e2 / 2.0, eta - 2.0 * e2],
        };
        // branch points leave rounding-level negatives behind
        for v in p.iter_mut().filter(|v| v.abs() <= ROUNDING) {
            *v = 0.0;
        }
        let negative: Vec<String> =
            p.iter().enumerate().filter(|(_, &v)| v < 0.0).map(|(k, v)| format!("p{k}={v:.6e}")).collect();
        if !negative.is_empty() {
            return Err(Error::NegativeBranch { eta, detail: format!("branch {branch}: {}", negative.join(", ")) });
        }
        Ok(Self { eta, p })
    }

    /// Total weight `p0 + p1 + 9 p2 + 6 p3 + 6 p4`; 1 for a valid attack.
    pub fn total_weight(&self) -> f64 {
        let p = &self.p;
        p[0] + p[1] + 9.0 * p[2] + 6.0 * p[3] + 6.0 * p[4]
    }
}

fn product_mixture(pairs: &[([Complex64; 2], [Complex64; 2])]) -> HermitianOp {
    let mut acc = HermitianOp::zeros(4);
    for (a, b) in pairs {
        let pa = HermitianOp::projector(a).expect("qubit projector");
        let pb = HermitianOp::projector(b).expect("qubit projector");
        acc = &acc + &tensor(&pa, &pb).expect("two qubits");
    }
    acc.scale(1.0 / pairs.len() as f64)
}

/// `(|++⟩⟨++| + |−−⟩⟨−−|)/2`
pub fn rho_xx() -> HermitianOp {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let plus = [Complex64::new(h, 0.0), Complex64::new(h, 0.0)];
    let minus = [Complex64::new(h, 0.0), Complex64::new(-h, 0.0)];
    product_mixture(&[(plus, plus), (minus, minus)])
}

/// `(|+i,−i⟩⟨+i,−i| + |−i,+i⟩⟨−i,+i|)/2`, built from the `σ₂` eigenstates.
pub fn rho_yy() -> HermitianOp {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let plus_i = [Complex64::new(h, 0.0), Complex64::new(0.0, h)];
    let minus_i = [Complex64::new(h, 0.0), Complex64::new(0.0, -h)];
    product_mixture(&[(plus_i, minus_i), (minus_i, plus_i)])
}

/// `(|00⟩⟨00| + |11⟩⟨11|)/2`
pub fn rho_zz() -> HermitianOp {
    let zero = [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)];
    let one = [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)];
    product_mixture(&[(zero, zero), (one, one)])
}

const XX_P2: [[u8; 6]; 3] = [[1, 0, 0, 1, 0, 0], [1, 0, 1, 1, 1, 0], [1, 1, 0, 1, 0, 1]];
const XX_P3: [[u8; 6]; 2] = [[1, 0, 0, 1, 1, 1], [1, 1, 1, 1, 0, 0]];
const YY_P2: [[u8; 6]; 3] = [[0, 1, 0, 0, 1, 0], [0, 1, 1, 1, 1, 0], [1, 1, 0, 0, 1, 1]];
const YY_P3: [[u8; 6]; 2] = [[0, 1, 0, 1, 1, 1], [1, 1, 1, 0, 1, 0]];
const ZZ_P2: [[u8; 6]; 3] = [[0, 0, 1, 0, 0, 1], [0, 1, 1, 1, 0, 1], [1, 0, 1, 0, 1, 1]];
const ZZ_P3: [[u8; 6]; 2] = [[0, 0, 1, 1, 1, 1], [1, 1, 1, 0, 0, 1]];

/// Places the attack with the given weights on the click patterns.
///
/// The same ensemble is optimal for both [`OracleStrategy`] variants.
pub fn ensemble_from_params(params: &AppendixParams) -> StrategyEnsemble {
    let [p0, p1, p2, p3, p4] = params.p;
    let mixed = HermitianOp::identity(4).scale(0.25);
    let (xx, yy, zz) = (rho_xx(), rho_yy(), rho_zz());
    let mut ens = StrategyEnsemble::zero();
    let mut put = |bits: [u8; 6], rho: HermitianOp| {
        ens.set(ClickPattern::from_bits(bits), rho).expect("two-qubit operator");
    };
    put([0; 6], mixed.scale(p0));
    put([1; 6], (&(&xx + &yy) + &zz).scale(p1 / 3.0));
    for (family, rho) in [(&XX_P2, &xx), (&YY_P2, &yy), (&ZZ_P2, &zz)] {
        for &bits in family {
            put(bits, rho.scale(p2));
        }
    }
    for (family, rho) in [(&XX_P3, &xx), (&YY_P3, &yy), (&ZZ_P3, &zz)] {
        for &bits in family {
            put(bits, rho.scale(p3));
        }
    }
    for k in 0..6 {
        let mut bits = [0u8; 6];
        bits[k] = 1;
        put(bits, mixed.scale(p4));
    }
    ens
}

/// Explicit optimal attack at `eta`. The strategy only selects the domain
/// check; the ensemble is the same for both.
pub fn build_appendix_ensemble(eta: f64, strategy: OracleStrategy) -> Result<StrategyEnsemble> {
    strategy.closed_form(eta)?;
    Ok(ensemble_from_params(&AppendixParams::new(eta)?))
}

pub type FeasibilityReport = EnsembleEvaluation;

impl EnsembleEvaluation {
    /// All equalities within `tol` and every block eigenvalue above `-tol`.
    pub fn is_feasible(&self, tol: f64) -> bool {
        self.max_equality_residual <= tol && self.min_eigenvalue >= -tol
    }
}

/// Residuals and objective of `ens` in program `p`.
pub fn verify_feasibility(ens: &StrategyEnsemble, p: &ConicProgram) -> FeasibilityReport {
    p.evaluate(ens)
}

/// `max_ρ Tr[αᵀ ρ]` over single-qubit states, `(1 + ‖a‖)/2`. A value above 1
/// means a product attack can fake a violation with one party undetected.
pub fn necessity_extremal_value(a: &AssignmentVector) -> f64 {
    0.5 * (1.0 + a.norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{partial_transpose, pauli_product, Subsystem};
    use crate::model::{build_assignment_program, build_discard_program};
    use crate::witness::{is_valid_assignment, Witness};

    fn corr(rho: &HermitianOp, i: usize) -> f64 {
        rho.trace_product(&HermitianOp::new(pauli_product(i, i)).unwrap())
    }

    #[test]
    fn boundary_constant() {
        assert!((ETA_UPPER_BOUNDARY - 1.0 / 3f64.sqrt()).abs() <= f64::EPSILON);
    }

    #[test]
    fn closed_form_examples() {
        assert_eq!(discard_bell_min(1.0).unwrap(), 0.0);
        assert_eq!(discard_bell_min(ETA_UPPER_BOUNDARY).unwrap(), -0.5);
        assert!((discard_bell_min(0.8).unwrap() + 0.140625).abs() < 1e-15);
        assert!(discard_bell_min(0.0).is_err());
        assert_eq!(assignment_bell_min_zero(0.9).unwrap(), 0.0);
        assert!(assignment_bell_min_zero(ETA_UPPER_BOUNDARY).unwrap().abs() < 1e-15);
        assert!((assignment_bell_min_zero(0.4).unwrap() - 0.13).abs() < 1e-15);
        assert!(assignment_bell_min_zero(1.5).is_err());
    }

    #[test]
    fn branch_continuity() {
        let s = ETA_UPPER_BOUNDARY;
        let above = s * (1.0 + 1e-15);
        assert!((discard_bell_min(above).unwrap() - discard_bell_min(s).unwrap()).abs() < 1e-12);
        assert!((assignment_bell_min_zero(above).unwrap() - assignment_bell_min_zero(s).unwrap()).abs() < 1e-12);

        let third = ETA_LOWER_BOUNDARY;
        let mid = AppendixParams::from_branch(AppendixBranch::Middle, third).unwrap();
        let low = AppendixParams::from_branch(AppendixBranch::Low, third).unwrap();
        for k in 0..5 {
            assert!((mid.p[k] - low.p[k]).abs() < 1e-12, "p{k}");
        }
        let mid = AppendixParams::from_branch(AppendixBranch::Middle, s).unwrap();
        let high = AppendixParams::from_branch(AppendixBranch::High, s).unwrap();
        // same objective p1 + 9 p2 + 6 p3 on both sides, different supports
        let obj = |p: &AppendixParams| p.p[1] + 9.0 * p.p[2] + 6.0 * p.p[3];
        assert!((obj(&mid) - obj(&high)).abs() < 1e-12);
    }

    #[test]
    fn parameter_examples() {
        let one = AppendixParams::new(1.0).unwrap();
        assert_eq!(one.p, [0.0, 1.0, 0.0, 0.0, 0.0]);
        let half = AppendixParams::new(0.5).unwrap();
        let want = [0.0, 0.0, 1.0 / 24.0, 1.0 / 16.0, 1.0 / 24.0];
        for k in 0..5 {
            assert!((half.p[k] - want[k]).abs() < 1e-15);
        }
        for k in 1..=20 {
            let eta = k as f64 / 20.0;
            assert!((AppendixParams::new(eta).unwrap().total_weight() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn out_of_branch_weights_are_rejected() {
        // the high-branch p1 is negative well below 1/√3
        let err = AppendixParams::from_branch(AppendixBranch::High, 0.3).unwrap_err();
        assert!(matches!(err, Error::NegativeBranch { .. }));
        assert!(err.to_string().contains("p1"));
        assert!(AppendixParams::new(1.2).is_err());
    }

    #[test]
    fn resource_states() {
        let (xx, yy, zz) = (rho_xx(), rho_yy(), rho_zz());
        assert!((corr(&xx, 1) - 1.0).abs() < 1e-15);
        assert!((corr(&yy, 2) + 1.0).abs() < 1e-15);
        assert!((corr(&zz, 3) - 1.0).abs() < 1e-15);
        for rho in [&xx, &yy, &zz] {
            assert!((rho.trace() - 1.0).abs() < 1e-15);
            assert!(rho.min_eigenvalue() > -1e-15);
            assert!(partial_transpose(rho, Subsystem::A).unwrap().min_eigenvalue() > -1e-15);
        }
    }

    #[test]
    fn appendix_ensemble_examples() {
        let ens = build_appendix_ensemble(1.0, OracleStrategy::Discard).unwrap();
        let all = ClickPattern::from_bits([1; 6]);
        let mix = (&(&rho_xx() + &rho_yy()) + &rho_zz()).scale(1.0 / 3.0);
        assert!((ens.get(all) - &mix).matrix().iter().all(|v| v.norm() < 1e-15));
        assert!((ens.total_trace() - 1.0).abs() < 1e-15);

        let prog = build_discard_program(&Witness::bell(), 0.9).unwrap();
        let rep = verify_feasibility(&build_appendix_ensemble(0.9, OracleStrategy::Discard).unwrap(), &prog);
        assert!((rep.objective - (0.25 - 0.25 / 0.81)).abs() < 1e-12);
        assert!(rep.is_feasible(1e-12));

        let z = AssignmentVector::ZERO;
        let prog = build_assignment_program(&Witness::bell(), &z, &z, 0.5).unwrap();
        let rep = verify_feasibility(&build_appendix_ensemble(0.5, OracleStrategy::AssignmentZero).unwrap(), &prog);
        assert!((rep.objective - (0.25 - 3.0 / 16.0)).abs() < 1e-12);
        assert!(rep.is_feasible(1e-12));
    }

    #[test]
    fn zero_ensemble_misses_normalization() {
        let prog = build_discard_program(&Witness::bell(), 0.7).unwrap();
        let rep = verify_feasibility(&StrategyEnsemble::zero(), &prog);
        assert!((rep.max_equality_residual - 1.0).abs() < 1e-15);
    }

    #[test]
    fn grid_feasibility() {
        let w = Witness::bell();
        let z = AssignmentVector::ZERO;
        for k in 1..=20 {
            let eta = k as f64 * 0.05;
            for s in [OracleStrategy::Discard, OracleStrategy::AssignmentZero] {
                let prog = match s {
                    OracleStrategy::Discard => build_discard_program(&w, eta),
                    OracleStrategy::AssignmentZero => build_assignment_program(&w, &z, &z, eta),
                }
                .unwrap();
                let rep = verify_feasibility(&build_appendix_ensemble(eta, s).unwrap(), &prog);
                assert!(rep.is_feasible(1e-12), "{s:?} eta={eta}: {rep:?}");
                assert!((rep.objective - s.closed_form(eta).unwrap()).abs() < 1e-12, "{s:?} eta={eta}");
            }
        }
    }

    #[test]
    fn necessity_examples() {
        assert_eq!(necessity_extremal_value(&AssignmentVector::ZERO), 0.5);
        assert_eq!(necessity_extremal_value(&AssignmentVector([1.0, 0.0, 0.0])), 1.0);
        let v = necessity_extremal_value(&AssignmentVector([1.0, 1.0, 1.0]));
        assert!((v - (1.0 + 3f64.sqrt()) / 2.0).abs() < 1e-15);
        assert!(!is_valid_assignment(&AssignmentVector([1.0, 1.0, 1.0])));
    }
}
