//! Solves [`ConicProgram`]s and certifies the answer.
//!
//! Each 4×4 Hermitian PSD block is replaced by its 8×8 real symmetric
//! embedding; the equalities and objective act on the Pauli coordinates
//! directly. The returned ensemble is re-evaluated against the original
//! program so that the reported residuals do not depend on solver internals.

mod ipm;

use std::fmt;
use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector};

use crate::linalg::{pauli_product, real_embedding};
use crate::model::{ConeMap, ConicProgram, Coords, StrategyEnsemble};

use ipm::{Cone, IpmOptions, Outcome, RealProgram};

/// `status = Optimal` requires equalities within this (relative) residual.
pub const EQUALITY_GATE: f64 = 1e-6;
/// `status = Optimal` requires every PSD block above this eigenvalue.
pub const EIGENVALUE_GATE: f64 = -1e-7;
/// Residual and relative-gap level at which a stalled run still counts.
const NEAR_OPTIMAL: f64 = 1e-7;
/// Phase-1 violation above which a program is declared infeasible.
const INFEASIBLE_GATE: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    NumericalFailure,
}

impl fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::Infeasible => "infeasible",
            SolveStatus::NumericalFailure => "numerical_failure",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Residuals {
    pub max_equality_violation: f64,
    pub min_block_eigenvalue: f64,
    pub duality_gap: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub status: SolveStatus,
    /// Objective value of `ensemble` (including the constant term).
    pub optimum: f64,
    pub ensemble: StrategyEnsemble,
    pub residuals: Residuals,
    pub iterations: usize,
}

impl SolveReport {
    pub fn is_optimal(&self) -> bool {
        self.status == SolveStatus::Optimal
    }
}

#[derive(Debug, Clone)]
pub struct SolverOptions {
    pub max_iter: usize,
    /// Print one line per interior-point iteration to standard error.
    pub verbose: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { max_iter: 120, verbose: false }
    }
}

/// Embedded basis matrices `embed(±σ_i⊗σ_j / 4)` for both cone maps.
fn cone_basis(map: ConeMap) -> &'static [DMatrix<f64>] {
    static ID: OnceLock<Vec<DMatrix<f64>>> = OnceLock::new();
    static PT: OnceLock<Vec<DMatrix<f64>>> = OnceLock::new();
    let build = |map: ConeMap| {
        (0..16)
            .map(|p| {
                let (i, j) = (p / 4, p % 4);
                real_embedding(&pauli_product(i, j)) * (0.25 * map.sign(i, j))
            })
            .collect::<Vec<_>>()
    };
    match map {
        ConeMap::Identity => ID.get_or_init(|| build(ConeMap::Identity)),
        ConeMap::PartialTransposeA => PT.get_or_init(|| build(ConeMap::PartialTransposeA)),
    }
}

fn lower(p: &ConicProgram) -> RealProgram {
    let nblocks = p.blocks.len();
    let n = 16 * nblocks;
    let groups = (0..nblocks).map(|b| 16 * b..16 * (b + 1)).collect();
    let cones = p
        .psd_blocks
        .iter()
        .map(|pb| Cone { group: pb.block, basis: cone_basis(pb.map).to_vec(), offset: DMatrix::zeros(8, 8) })
        .collect();
    let m = p.equalities.len();
    let mut a = DMatrix::zeros(m, n);
    let mut b = DVector::zeros(m);
    for (r, e) in p.equalities.iter().enumerate() {
        b[r] = e.rhs;
        for t in &e.lhs.terms {
            a[(r, 16 * t.block + 4 * t.i + t.j)] += t.coeff;
        }
    }
    let mut c = DVector::zeros(n);
    for t in &p.objective.terms {
        c[16 * t.block + 4 * t.i + t.j] += t.coeff;
    }
    // unit objective scale: stopping rules become invariant under c -> k·c,
    // and the optimum is re-evaluated on the unscaled program anyway
    let scale = c.amax();
    if scale > 0.0 {
        c /= scale;
    }
    RealProgram { groups, cones, a, b, c }
}

/// Minimizes total absolute equality violation over the cone constraints.
fn phase_one(real: &RealProgram) -> RealProgram {
    let n = real.nvars();
    let m = real.a.nrows();
    let mut groups = real.groups.clone();
    let mut cones: Vec<Cone> =
        real.cones.iter().map(|k| Cone { group: k.group, basis: k.basis.clone(), offset: k.offset.clone() }).collect();
    for k in 0..2 * m {
        let g = groups.len();
        groups.push(n + k..n + k + 1);
        cones.push(Cone { group: g, basis: vec![DMatrix::from_element(1, 1, 1.0)], offset: DMatrix::zeros(1, 1) });
    }
    let mut a = DMatrix::zeros(m, n + 2 * m);
    a.columns_mut(0, n).copy_from(&real.a);
    for r in 0..m {
        a[(r, n + r)] = 1.0;
        a[(r, n + m + r)] = -1.0;
    }
    let mut c = DVector::zeros(n + 2 * m);
    c.rows_mut(n, 2 * m).fill(1.0);
    RealProgram { groups, cones, a, b: real.b.clone(), c }
}

fn coords_from(x: &DVector<f64>, nblocks: usize) -> Vec<Coords> {
    (0..nblocks).map(|b| std::array::from_fn(|i| std::array::from_fn(|j| x[16 * b + 4 * i + j]))).collect()
}

pub fn solve(p: &ConicProgram) -> SolveReport {
    solve_with(p, &SolverOptions::default())
}

pub fn solve_with(p: &ConicProgram, options: &SolverOptions) -> SolveReport {
    let real = lower(p);
    let opts = IpmOptions { max_iter: options.max_iter, verbose: options.verbose, ..IpmOptions::default() };
    let run = ipm::solve(&real, &opts);

    let values = coords_from(&run.x, p.blocks.len());
    let eval = p.evaluate_values(&values);
    let residuals = Residuals {
        max_equality_violation: eval.max_equality_residual,
        min_block_eigenvalue: eval.min_eigenvalue,
        duality_gap: Some(run.gap),
    };
    let relgap = run.gap / run.pcost.abs().max(1.0);
    // iterates past this point lose dual accuracy to conditioning; the best
    // one seen is accepted if it is this close and passes the primal gates
    let near_optimal = run.pres <= NEAR_OPTIMAL && run.dres <= NEAR_OPTIMAL && relgap <= NEAR_OPTIMAL;
    let certified = eval.max_equality_residual <= EQUALITY_GATE && eval.min_eigenvalue >= EIGENVALUE_GATE;

    let status = if (run.outcome == Outcome::Converged || near_optimal) && certified {
        SolveStatus::Optimal
    } else {
        let p1 = ipm::solve(&phase_one(&real), &IpmOptions { verbose: options.verbose, ..IpmOptions::default() });
        if options.verbose {
            eprintln!("phase 1: {:?}, violation {:.3e}", p1.outcome, p1.pcost);
        }
        if p1.outcome == Outcome::Converged && p1.pcost > INFEASIBLE_GATE {
            SolveStatus::Infeasible
        } else {
            SolveStatus::NumericalFailure
        }
    };

    SolveReport {
        status,
        optimum: eval.objective,
        ensemble: StrategyEnsemble::from_coords(&values),
        residuals,
        iterations: run.iterations,
    }
}
