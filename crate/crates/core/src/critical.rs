//! Critical detection efficiency: the smallest η at which the worst-case
//! separable value still lies strictly above the best entangled value.

use crate::error::{Error, Result};
use crate::linalg::HermitianOp;
use crate::model::{build_program, Strategy};
use crate::solver::{self, SolveReport};
use crate::witness::{build_target_state, build_theta_witness, effective_witness, expectation, Witness};

/// Accuracy the solver guarantees for reported optima.
pub const SOLVER_TOLERANCE: f64 = 1e-6;
/// `g(η)` must exceed this for entanglement to count as detectable.
pub const DETECTION_GATE: f64 = 2.0 * SOLVER_TOLERANCE;
pub const MAX_BISECTIONS: usize = 60;
pub const DEFAULT_TOLERANCE: f64 = 1e-4;
pub const DEFAULT_BRACKET: (f64, f64) = (0.3, 1.0);
/// Detection efficiency a loophole-free CHSH test needs, `2(√2 − 1) ≈ 0.83`.
/// Kept for comparison only; nothing here derives it.
pub const CHSH_EFFICIENCY: f64 = 0.83;

/// A witness, the target state it is tuned to, and a post-processing strategy.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub witness: Witness,
    pub target: HermitianOp,
    pub strategy: Strategy,
}

impl Scenario {
    /// `W_θ` together with `|Ψ_θ⟩`.
    pub fn theta(theta: f64, strategy: Strategy) -> Result<Self> {
        Ok(Self { witness: build_theta_witness(theta)?, target: build_target_state(theta)?, strategy })
    }

    /// Optimal separable attack value at `eta`.
    pub fn separable_min(&self, eta: f64) -> Result<f64> {
        if let (Strategy::Assignment { a, b }, 0.0) = (&self.strategy, eta) {
            // nothing is ever detected: the observation is α⊗β regardless of the source
            return Ok(effective_witness(&self.witness, a, b, 0.0)?.trace() / 4.0);
        }
        let report = self.solve(eta)?;
        if !report.is_optimal() {
            return Err(Error::SolveFailed { eta, status: report.status.to_string() });
        }
        Ok(report.optimum)
    }

    /// Full solver report at `eta`.
    pub fn solve(&self, eta: f64) -> Result<SolveReport> {
        Ok(solver::solve(&build_program(&self.witness, &self.strategy, eta)?))
    }

    /// Best value an honest entangled source can show at `eta`.
    pub fn entangled_value(&self, eta: f64) -> Result<f64> {
        entangled_value(&self.witness, &self.strategy, &self.target, eta)
    }
}

/// Discard: the honest target value, unaffected by symmetric losses.
/// Assignment: the smallest eigenvalue of the effective witness.
pub fn entangled_value(w: &Witness, strategy: &Strategy, target: &HermitianOp, eta: f64) -> Result<f64> {
    match strategy {
        Strategy::Discard => expectation(w, target),
        Strategy::Assignment { a, b } => Ok(effective_witness(w, a, b, eta)?.min_eigenvalue()),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveSample {
    pub eta: f64,
    pub separable_min: f64,
    pub entangled_value: f64,
}

impl CurveSample {
    pub fn gap(&self) -> f64 {
        self.separable_min - self.entangled_value
    }

    pub fn detectable(&self) -> bool {
        self.gap() > DETECTION_GATE
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CriticalResult {
    pub eta_crit: f64,
    /// Final `(lo, hi)`: undetectable at `lo`, detectable at `hi`.
    pub bracket: (f64, f64),
    pub iterations: usize,
    /// Every probe in evaluation order.
    pub curve: Vec<CurveSample>,
}

fn sample(s: &Scenario, eta: f64) -> Result<CurveSample> {
    Ok(CurveSample { eta, separable_min: s.separable_min(eta)?, entangled_value: s.entangled_value(eta)? })
}

/// `g` must not decrease with η by more than the detection gate.
fn check_monotone(curve: &[CurveSample]) -> Result<()> {
    let mut sorted: Vec<&CurveSample> = curve.iter().collect();
    sorted.sort_by(|x, y| x.eta.total_cmp(&y.eta));
    let mut running: Option<&CurveSample> = None;
    for c in sorted {
        if let Some(prev) = running {
            if prev.gap() > c.gap() + DETECTION_GATE {
                return Err(Error::NonMonotone { eta_lo: prev.eta, eta_hi: c.eta, g_lo: prev.gap(), g_hi: c.gap() });
            }
        }
        if running.is_none_or(|r| c.gap() > r.gap()) {
            running = Some(c);
        }
    }
    Ok(())
}

/// Bisection over [`DEFAULT_BRACKET`].
pub fn find_critical_eta(s: &Scenario, tol: f64) -> Result<CriticalResult> {
    find_critical_eta_in(s, tol, DEFAULT_BRACKET)
}

pub fn find_critical_eta_in(s: &Scenario, tol: f64, bracket: (f64, f64)) -> Result<CriticalResult> {
    let (mut lo, mut hi) = bracket;
    if !(tol >= SOLVER_TOLERANCE) {
        return Err(Error::InvalidInput(format!("tolerance must be at least {SOLVER_TOLERANCE}, got {tol}")));
    }
    if !(0.0 <= lo && lo < hi && hi <= 1.0) {
        return Err(Error::InvalidInput(format!("bad bracket [{lo}, {hi}]")));
    }
    let mut curve = vec![sample(s, lo)?, sample(s, hi)?];
    if curve[0].detectable() || !curve[1].detectable() {
        return Err(Error::NoSignChange { lo, hi, g_lo: curve[0].gap(), g_hi: curve[1].gap() });
    }
    check_monotone(&curve)?;
    let mut iterations = 0;
    while hi - lo > tol && iterations < MAX_BISECTIONS {
        let mid = 0.5 * (lo + hi);
        let c = sample(s, mid)?;
        curve.push(c);
        check_monotone(&curve)?;
        if c.detectable() {
            hi = mid;
        } else {
            lo = mid;
        }
        iterations += 1;
    }
    Ok(CriticalResult { eta_crit: 0.5 * (lo + hi), bracket: (lo, hi), iterations, curve })
}
