//! Conic programs for the worst-case separable value of a witness.
//!
//! Every hidden-variable value `λ` (a [`ClickPattern`]) carries an unnormalized
//! two-qubit operator `ρ_λ`. Blocks are parameterized by their Pauli
//! expectations `x_ij = Tr[ρ σ_i⊗σ_j]`, so `ρ = Σ x_ij σ_i⊗σ_j / 4` and every
//! constraint and objective of both post-processing strategies is a sparse
//! linear functional of these coordinates.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::{ClickViolation, Error, Result};
use crate::lattice::{enumerate_patterns, ClickPattern, PATTERN_COUNT, SETTINGS};
use crate::linalg::{self, pauli_assemble, pauli_expand, HermitianOp, PauliCoeffs, Subsystem};
use crate::witness::{AssignmentVector, Witness};

/// Expectation coordinates `x[i][j] = Tr[ρ σ_i⊗σ_j]` of one block.
pub type Coords = [[f64; 4]; 4];

/// Feasibility gate for equalities, relative to `max(1, |rhs|)`.
pub const EQUALITY_TOL: f64 = 1e-6;

/// How the unknowns are post-processed when a detector does not click.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Strategy {
    /// Only rounds where the relevant detectors clicked are kept.
    Discard,
    /// No-click rounds are replaced by the fixed outcome biases `a` and `b`.
    Assignment { a: AssignmentVector, b: AssignmentVector },
}

impl Strategy {
    pub fn name(&self) -> &'static str {
        match self {
            Strategy::Discard => "discard",
            Strategy::Assignment { .. } => "assignment",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockRole {
    State(ClickPattern),
    Observed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VariableBlock {
    pub label: String,
    pub role: BlockRole,
}

/// Linear map from a variable block to the matrix that must be PSD.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConeMap {
    Identity,
    /// Partial transpose on Alice's qubit: flips the sign of every `x_2j`.
    PartialTransposeA,
}

impl ConeMap {
    /// Sign applied to coordinate `(i, j)`.
    pub fn sign(self, i: usize, _j: usize) -> f64 {
        match self {
            ConeMap::Identity => 1.0,
            ConeMap::PartialTransposeA if i == 2 => -1.0,
            ConeMap::PartialTransposeA => 1.0,
        }
    }
}

/// A 4×4 Hermitian matrix constrained to be PSD.
#[derive(Debug, Clone, PartialEq)]
pub struct PsdBlock {
    pub label: String,
    pub block: usize,
    pub map: ConeMap,
}

impl PsdBlock {
    pub const SIZE: usize = 4;

    pub fn matrix(&self, x: &Coords) -> HermitianOp {
        let mut c = PauliCoeffs::default();
        for i in 0..4 {
            for j in 0..4 {
                c.0[i][j] = 0.25 * self.map.sign(i, j) * x[i][j];
            }
        }
        pauli_assemble(&c)
    }
}

/// `coeff · x_ij` of variable block `block`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Term {
    pub block: usize,
    pub i: usize,
    pub j: usize,
    pub coeff: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct LinearFunctional {
    pub constant: f64,
    pub terms: Vec<Term>,
}

impl LinearFunctional {
    pub fn evaluate(&self, values: &[Coords]) -> f64 {
        self.constant + self.terms.iter().map(|t| t.coeff * values[t.block][t.i][t.j]).sum::<f64>()
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            constant: c * self.constant,
            terms: self.terms.iter().map(|t| Term { coeff: c * t.coeff, ..*t }).collect(),
        }
    }
}

/// Accumulates terms, merging repeated `(block, i, j)` keys.
#[derive(Default)]
struct FunctionalBuilder {
    constant: f64,
    terms: BTreeMap<(usize, usize, usize), f64>,
}

impl FunctionalBuilder {
    fn add(&mut self, block: usize, i: usize, j: usize, coeff: f64) {
        if coeff != 0.0 {
            *self.terms.entry((block, i, j)).or_insert(0.0) += coeff;
        }
    }

    fn add_over<'a>(&mut self, blocks: impl IntoIterator<Item = &'a ClickPattern>, i: usize, j: usize, coeff: f64) {
        for p in blocks {
            self.add(p.code(), i, j, coeff);
        }
    }

    fn finish(self) -> LinearFunctional {
        LinearFunctional {
            constant: self.constant,
            terms: self
                .terms
                .into_iter()
                .filter(|&(_, c)| c != 0.0)
                .map(|((block, i, j), coeff)| Term { block, i, j, coeff })
                .collect(),
        }
    }
}

/// What an equality constraint expresses. Setting indices are 0-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EqualityKind {
    ClickA(usize),
    ClickB(usize),
    ClickJoint(usize, usize),
    Normalization,
    /// Alice's marginal for setting `i` does not depend on whether Bob's
    /// detector for setting `j` fires.
    MarginalA(usize, usize),
    MarginalB(usize, usize),
    /// Pauli coordinate `(i, j)` of the observed-state block.
    ObservedTie(usize, usize),
}

impl EqualityKind {
    /// Click-rate and normalization constraints.
    pub fn is_trace_type(&self) -> bool {
        matches!(
            self,
            EqualityKind::ClickA(_)
                | EqualityKind::ClickB(_)
                | EqualityKind::ClickJoint(..)
                | EqualityKind::Normalization
        )
    }

    pub fn label(&self) -> String {
        match *self {
            EqualityKind::ClickA(i) => format!("A{}", i + 1),
            EqualityKind::ClickB(j) => format!("B{}", j + 1),
            EqualityKind::ClickJoint(i, j) => format!("A{}B{}", i + 1, j + 1),
            EqualityKind::Normalization => "total".into(),
            EqualityKind::MarginalA(i, j) => format!("marginalA{}|B{}", i + 1, j + 1),
            EqualityKind::MarginalB(i, j) => format!("marginalB{}|A{}", j + 1, i + 1),
            EqualityKind::ObservedTie(i, j) => format!("observed{i}{j}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Equality {
    pub kind: EqualityKind,
    pub lhs: LinearFunctional,
    pub rhs: f64,
}

impl Equality {
    pub fn residual(&self, values: &[Coords]) -> f64 {
        (self.lhs.evaluate(values) - self.rhs).abs() / self.rhs.abs().max(1.0)
    }
}

/// A minimization over PSD blocks with linear equalities and objective.
#[derive(Debug, Clone, PartialEq)]
pub struct ConicProgram {
    pub strategy: Strategy,
    pub eta: f64,
    pub blocks: Vec<VariableBlock>,
    /// State blocks by pattern code, then their partial transposes, then the
    /// observed block when present.
    pub psd_blocks: Vec<PsdBlock>,
    pub equalities: Vec<Equality>,
    pub objective: LinearFunctional,
    /// Set for the `η = 0` assignment program, where the observed state is
    /// undefined and the value is fixed by the assignments alone.
    pub degenerate: bool,
}

impl ConicProgram {
    pub fn observed_block(&self) -> Option<usize> {
        self.blocks.iter().position(|b| b.role == BlockRole::Observed)
    }

    pub fn trace_equality_count(&self) -> usize {
        self.equalities.iter().filter(|e| e.kind.is_trace_type()).count()
    }

    /// Same program with the objective multiplied by `c`.
    pub fn with_scaled_objective(&self, c: f64) -> Self {
        Self { objective: self.objective.scaled(c), ..self.clone() }
    }

    /// Coordinates of every variable block for a given ensemble. The observed
    /// block, when present, is filled from the defining relation of the
    /// observed state.
    pub fn block_values(&self, ens: &StrategyEnsemble) -> Vec<Coords> {
        let mut values: Vec<Coords> = ens.coords();
        if self.observed_block().is_some() {
            values.push(observed_coords(&values[..PATTERN_COUNT], self.eta));
        }
        values
    }

    pub fn evaluate(&self, ens: &StrategyEnsemble) -> EnsembleEvaluation {
        let values = self.block_values(ens);
        self.evaluate_values(&values)
    }

    pub(crate) fn evaluate_values(&self, values: &[Coords]) -> EnsembleEvaluation {
        let mut worst = (0.0, String::new());
        for e in &self.equalities {
            let r = e.residual(values);
            if r > worst.0 || worst.1.is_empty() {
                worst = (r, e.kind.label());
            }
        }
        let mut min_eig = f64::INFINITY;
        let mut worst_block = String::new();
        for p in &self.psd_blocks {
            let l = linalg::min_eigenvalue(&p.matrix(&values[p.block]));
            if l < min_eig {
                min_eig = l;
                worst_block = p.label.clone();
            }
        }
        EnsembleEvaluation {
            objective: self.objective.evaluate(values),
            max_equality_residual: worst.0,
            worst_equality: worst.1,
            min_eigenvalue: min_eig,
            worst_block,
        }
    }

    /// Writes the program in SDPA sparse format (`.dat-s`).
    ///
    /// Variables are the Pauli coordinates `x_ij`, block-major
    /// (`16·block + 4·i + j`). Cone blocks appear as real symmetric 8×8
    /// embeddings in this order: state blocks by pattern code ascending,
    /// their partial transposes in the same order, then the observed block.
    /// A final diagonal block holds each equality as a pair of inequalities.
    /// The objective constant is recorded in the header comment only.
    pub fn to_sdpa(&self) -> String {
        let nvars = 16 * self.blocks.len();
        let mut out = String::new();
        let _ = writeln!(
            out,
            "\"lossy-witness {} eta={} objective_constant={}\"",
            self.strategy.name(),
            self.eta,
            self.objective.constant
        );
        let _ = writeln!(out, "{nvars}");
        let _ = writeln!(out, "{}", self.psd_blocks.len() + 1);
        let mut sizes: Vec<String> = self.psd_blocks.iter().map(|_| (2 * PsdBlock::SIZE).to_string()).collect();
        sizes.push(format!("-{}", 2 * self.equalities.len()));
        let _ = writeln!(out, "{}", sizes.join(" "));

        let mut c = vec![0.0; nvars];
        for t in &self.objective.terms {
            c[16 * t.block + 4 * t.i + t.j] += t.coeff;
        }
        let cs: Vec<String> = c.iter().map(|v| format!("{v:.17e}")).collect();
        let _ = writeln!(out, "{}", cs.join(" "));

        for (k, p) in self.psd_blocks.iter().enumerate() {
            for i in 0..4 {
                for j in 0..4 {
                    let mut e = PauliCoeffs::default();
                    e.0[i][j] = 0.25 * p.map.sign(i, j);
                    let f = pauli_assemble(&e).real_embedding();
                    let var = 16 * p.block + 4 * i + j + 1;
                    for r in 0..8 {
                        for s in r..8 {
                            if f[(r, s)] != 0.0 {
                                let _ = writeln!(out, "{var} {} {} {} {:.17e}", k + 1, r + 1, s + 1, f[(r, s)]);
                            }
                        }
                    }
                }
            }
        }
        let lp = self.psd_blocks.len() + 1;
        for (m, e) in self.equalities.iter().enumerate() {
            let (pos, neg) = (2 * m + 1, 2 * m + 2);
            if e.rhs != 0.0 {
                let _ = writeln!(out, "0 {lp} {pos} {pos} {:.17e}", e.rhs);
                let _ = writeln!(out, "0 {lp} {neg} {neg} {:.17e}", -e.rhs);
            }
            for t in &e.lhs.terms {
                let var = 16 * t.block + 4 * t.i + t.j + 1;
                let _ = writeln!(out, "{var} {lp} {pos} {pos} {:.17e}", t.coeff);
                let _ = writeln!(out, "{var} {lp} {neg} {neg} {:.17e}", -t.coeff);
            }
        }
        out
    }
}

/// Objective value and feasibility residuals of an ensemble in a program.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleEvaluation {
    pub objective: f64,
    pub max_equality_residual: f64,
    pub worst_equality: String,
    /// Minimum eigenvalue over all PSD blocks (states, partial transposes and
    /// the observed state).
    pub min_eigenvalue: f64,
    pub worst_block: String,
}

/// Unnormalized operators `ρ_λ`, one per click pattern.
#[derive(Debug, Clone, PartialEq)]
pub struct StrategyEnsemble {
    states: Vec<HermitianOp>,
}

impl Default for StrategyEnsemble {
    fn default() -> Self {
        Self::zero()
    }
}

impl StrategyEnsemble {
    pub fn zero() -> Self {
        Self { states: vec![HermitianOp::zeros(4); PATTERN_COUNT] }
    }

    pub fn set(&mut self, p: ClickPattern, rho: HermitianOp) -> Result<()> {
        if rho.dim() != 4 {
            return Err(Error::BadDimension(rho.dim()));
        }
        self.states[p.code()] = rho;
        Ok(())
    }

    pub fn get(&self, p: ClickPattern) -> &HermitianOp {
        &self.states[p.code()]
    }

    pub fn iter(&self) -> impl Iterator<Item = (ClickPattern, &HermitianOp)> {
        enumerate_patterns().into_iter().zip(self.states.iter())
    }

    pub fn total_trace(&self) -> f64 {
        self.states.iter().map(HermitianOp::trace).sum()
    }

    /// `ρ_λ = q(λ) ρ`, with `q` the product of independent click
    /// probabilities `η` over the six detector responses.
    pub fn honest(rho: &HermitianOp, eta: f64) -> Result<Self> {
        let mut ens = Self::zero();
        for p in enumerate_patterns() {
            let q: f64 = p.bits().iter().map(|&b| if b == 1 { eta } else { 1.0 - eta }).product();
            ens.set(p, rho.scale(q))?;
        }
        Ok(ens)
    }

    pub(crate) fn from_coords(values: &[Coords]) -> Self {
        let states = values[..PATTERN_COUNT]
            .iter()
            .map(|x| {
                let mut c = PauliCoeffs::default();
                for i in 0..4 {
                    for j in 0..4 {
                        c.0[i][j] = 0.25 * x[i][j];
                    }
                }
                pauli_assemble(&c)
            })
            .collect();
        Self { states }
    }

    pub fn coords(&self) -> Vec<Coords> {
        self.states
            .iter()
            .map(|s| {
                let c = pauli_expand(s).expect("ensemble blocks are 4x4");
                c.0.map(|row| row.map(|v| 4.0 * v))
            })
            .collect()
    }
}

fn trace_constraints(eta: f64) -> Vec<(EqualityKind, Vec<ClickPattern>, f64)> {
    let all = enumerate_patterns();
    let mut out = Vec::new();
    for i in 0..SETTINGS {
        out.push((EqualityKind::ClickA(i), all.iter().copied().filter(|p| p.clicks_a(i)).collect(), eta));
    }
    for j in 0..SETTINGS {
        out.push((EqualityKind::ClickB(j), all.iter().copied().filter(|p| p.clicks_b(j)).collect(), eta));
    }
    for i in 0..SETTINGS {
        for j in 0..SETTINGS {
            out.push((
                EqualityKind::ClickJoint(i, j),
                all.iter().copied().filter(|p| p.clicks_a(i) && p.clicks_b(j)).collect(),
                eta * eta,
            ));
        }
    }
    out.push((EqualityKind::Normalization, all, 1.0));
    out
}

/// Coordinates of the observed state implied by the conditioned statistics.
fn observed_coords(states: &[Coords], eta: f64) -> Coords {
    let mut o = [[0.0; 4]; 4];
    o[0][0] = 1.0;
    for (code, x) in states.iter().enumerate() {
        let p = ClickPattern::from_code(code).expect("64 states");
        for s in 0..SETTINGS {
            if p.clicks_a(s) {
                o[s + 1][0] += x[s + 1][0] / eta;
            }
            if p.clicks_b(s) {
                o[0][s + 1] += x[0][s + 1] / eta;
            }
            for t in 0..SETTINGS {
                if p.clicks_a(s) && p.clicks_b(t) {
                    o[s + 1][t + 1] += x[s + 1][t + 1] / (eta * eta);
                }
            }
        }
    }
    o
}

/// Ties the observed block (coordinates `o_ij`) to the state blocks.
fn observed_ties(observed: usize, eta: f64) -> Vec<Equality> {
    let mut out = Vec::with_capacity(16);
    for i in 0..4 {
        for j in 0..4 {
            let mut f = FunctionalBuilder::default();
            f.add(observed, i, j, 1.0);
            let rhs = if i == 0 && j == 0 { 1.0 } else { 0.0 };
            for p in enumerate_patterns() {
                let in_a = i == 0 || p.clicks_a(i - 1);
                let in_b = j == 0 || p.clicks_b(j - 1);
                if (i, j) != (0, 0) && in_a && in_b {
                    let power = i32::from(i != 0) + i32::from(j != 0);
                    f.add(p.code(), i, j, -1.0 / eta.powi(power));
                }
            }
            out.push(Equality { kind: EqualityKind::ObservedTie(i, j), lhs: f.finish(), rhs });
        }
    }
    out
}

fn skeleton(strategy: Strategy, eta: f64, with_observed: bool) -> ConicProgram {
    let patterns = enumerate_patterns();
    let mut blocks: Vec<VariableBlock> =
        patterns.iter().map(|&p| VariableBlock { label: format!("rho{p}"), role: BlockRole::State(p) }).collect();
    let mut psd_blocks: Vec<PsdBlock> = patterns
        .iter()
        .map(|&p| PsdBlock { label: format!("rho{p}"), block: p.code(), map: ConeMap::Identity })
        .collect();
    psd_blocks.extend(patterns.iter().map(|&p| PsdBlock {
        label: format!("rho{p}^TA"),
        block: p.code(),
        map: ConeMap::PartialTransposeA,
    }));

    let mut equalities: Vec<Equality> = trace_constraints(eta)
        .into_iter()
        .map(|(kind, members, rhs)| {
            let mut f = FunctionalBuilder::default();
            f.add_over(&members, 0, 0, 1.0);
            Equality { kind, lhs: f.finish(), rhs }
        })
        .collect();

    if with_observed {
        let observed = blocks.len();
        blocks.push(VariableBlock { label: "rho_observed".into(), role: BlockRole::Observed });
        psd_blocks.push(PsdBlock { label: "rho_observed".into(), block: observed, map: ConeMap::Identity });
        equalities.extend(observed_ties(observed, eta));
    }

    ConicProgram {
        strategy,
        eta,
        blocks,
        psd_blocks,
        equalities,
        objective: LinearFunctional::default(),
        degenerate: false,
    }
}

/// Worst-case value of `W` under the discard strategy at efficiency `η`.
pub fn build_discard_program(w: &Witness, eta: f64) -> Result<ConicProgram> {
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(Error::InvalidInput(format!("discard program needs eta in (0, 1], got {eta}")));
    }
    let mut prog = skeleton(Strategy::Discard, eta, true);
    let sets = crate::lattice::lambda_sets();
    let mut f = FunctionalBuilder { constant: w.w(0, 0), ..Default::default() };
    for s in 0..SETTINGS {
        f.add_over(&sets.set_a[s], s + 1, 0, w.w(s + 1, 0) / eta);
        f.add_over(&sets.set_b[s], 0, s + 1, w.w(0, s + 1) / eta);
    }
    for s in 0..SETTINGS {
        for t in 0..SETTINGS {
            let wij = w.w(s + 1, t + 1);
            if wij != 0.0 {
                f.add_over(&sets.cell(s, t, true, true), s + 1, t + 1, wij / (eta * eta));
            }
        }
    }
    prog.objective = f.finish();
    Ok(prog)
}

/// Worst-case value of `W` under the assignment strategy with no-click biases
/// `a`, `b` at efficiency `η`.
pub fn build_assignment_program(
    w: &Witness,
    a: &AssignmentVector,
    b: &AssignmentVector,
    eta: f64,
) -> Result<ConicProgram> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::InvalidInput(format!("assignment program needs eta in [0, 1], got {eta}")));
    }
    let (av, bv) = (a.0, b.0);
    let degenerate = eta == 0.0;
    let mut prog = skeleton(Strategy::Assignment { a: *a, b: *b }, eta, !degenerate);
    prog.degenerate = degenerate;
    let sets = crate::lattice::lambda_sets();

    let mut f = FunctionalBuilder { constant: w.w(0, 0), ..Default::default() };
    for s in 0..SETTINGS {
        let wa = w.w(s + 1, 0);
        f.add_over(&sets.set_a[s], s + 1, 0, wa);
        f.add_over(&sets.complement_a(s), 0, 0, wa * av[s]);
        let wb = w.w(0, s + 1);
        f.add_over(&sets.set_b[s], 0, s + 1, wb);
        f.add_over(&sets.complement_b(s), 0, 0, wb * bv[s]);
    }
    for s in 0..SETTINGS {
        for t in 0..SETTINGS {
            let wij = w.w(s + 1, t + 1);
            if wij == 0.0 {
                continue;
            }
            f.add_over(&sets.cell(s, t, true, true), s + 1, t + 1, wij);
            f.add_over(&sets.cell(s, t, true, false), s + 1, 0, wij * bv[t]);
            f.add_over(&sets.cell(s, t, false, true), 0, t + 1, wij * av[s]);
            f.add_over(&sets.cell(s, t, false, false), 0, 0, wij * av[s] * bv[t]);
        }
    }
    prog.objective = f.finish();

    for s in 0..SETTINGS {
        for t in 0..SETTINGS {
            let mut fa = FunctionalBuilder::default();
            fa.add_over(&sets.cell(s, t, true, false), s + 1, 0, 1.0);
            fa.add_over(&sets.set_a[s], s + 1, 0, -(1.0 - eta));
            prog.equalities.push(Equality { kind: EqualityKind::MarginalA(s, t), lhs: fa.finish(), rhs: 0.0 });
        }
    }
    for s in 0..SETTINGS {
        for t in 0..SETTINGS {
            let mut fb = FunctionalBuilder::default();
            fb.add_over(&sets.cell(s, t, false, true), 0, t + 1, 1.0);
            fb.add_over(&sets.set_b[t], 0, t + 1, -(1.0 - eta));
            prog.equalities.push(Equality { kind: EqualityKind::MarginalB(s, t), lhs: fb.finish(), rhs: 0.0 });
        }
    }
    Ok(prog)
}

/// Dispatches on the strategy.
pub fn build_program(w: &Witness, strategy: &Strategy, eta: f64) -> Result<ConicProgram> {
    match strategy {
        Strategy::Discard => build_discard_program(w, eta),
        Strategy::Assignment { a, b } => build_assignment_program(w, a, b, eta),
    }
}

/// State the experimenters reconstruct from the click-conditioned statistics.
/// Fails, listing every violated constraint, unless the ensemble reproduces
/// the click rates `η`, `η²` and unit total weight to 1e-6.
pub fn observed_state(ens: &StrategyEnsemble, eta: f64) -> Result<HermitianOp> {
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(Error::InvalidInput(format!("eta={eta} outside (0, 1]")));
    }
    let traces: Vec<f64> = ens.states.iter().map(HermitianOp::trace).collect();
    let violations: Vec<ClickViolation> = trace_constraints(eta)
        .into_iter()
        .filter_map(|(kind, members, rhs)| {
            let actual: f64 = members.iter().map(|p| traces[p.code()]).sum();
            ((actual - rhs).abs() > EQUALITY_TOL * rhs.abs().max(1.0)).then(|| ClickViolation {
                constraint: kind.label(),
                expected: rhs,
                actual,
            })
        })
        .collect();
    if !violations.is_empty() {
        return Err(Error::ClickRateViolation(violations));
    }
    let o = observed_coords(&ens.coords(), eta);
    Ok(pauli_assemble(&PauliCoeffs(o.map(|row| row.map(|v| 0.25 * v)))))
}

/// `ρ^{T_A}` of a single block, for diagnostics.
pub fn block_partial_transpose(rho: &HermitianOp) -> Result<HermitianOp> {
    linalg::partial_transpose(rho, Subsystem::A)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::witness::{build_target_state, expectation};
    use std::f64::consts::PI;

    #[test]
    fn discard_structure() {
        let p = build_discard_program(&Witness::bell(), 0.8).unwrap();
        assert_eq!(p.blocks.len(), 65);
        assert_eq!(p.psd_blocks.len(), 64 + 64 + 1);
        assert_eq!(p.trace_equality_count(), 16);
        assert_eq!(p.equalities.len(), 16 + 16);
        assert!(p.psd_blocks[..64].iter().all(|b| b.map == ConeMap::Identity));
        assert!(p.psd_blocks[64..128]
            .iter()
            .enumerate()
            .all(|(k, b)| b.map == ConeMap::PartialTransposeA && b.block == k));
        assert_eq!(p.psd_blocks[128].block, 64);
        for e in &p.equalities {
            assert!(e.lhs.terms.iter().all(|t| t.block < p.blocks.len()));
        }
    }

    #[test]
    fn discard_rejects_zero_eta() {
        assert!(build_discard_program(&Witness::bell(), 0.0).is_err());
        assert!(build_discard_program(&Witness::bell(), 1.2).is_err());
    }

    #[test]
    fn assignment_structure() {
        let z = AssignmentVector::ZERO;
        let p = build_assignment_program(&Witness::bell(), &z, &z, 0.6).unwrap();
        assert_eq!(p.trace_equality_count(), 16);
        let marg = p
            .equalities
            .iter()
            .filter(|e| matches!(e.kind, EqualityKind::MarginalA(..) | EqualityKind::MarginalB(..)))
            .count();
        assert_eq!(marg, 18);
        assert!(!p.degenerate);

        let p0 = build_assignment_program(&Witness::bell(), &z, &z, 0.0).unwrap();
        assert!(p0.degenerate);
        assert!(p0.observed_block().is_none());
        assert!(build_assignment_program(&Witness::bell(), &z, &z, -0.1).is_err());
    }

    #[test]
    fn honest_ensemble_discard_objective_is_plain_expectation() {
        // product state, hence separable
        let rho_a = HermitianOp::qubit(0.5, [0.2, -0.3, 0.1]);
        let rho_b = HermitianOp::qubit(0.5, [0.0, 0.3, -0.3]);
        let rho = crate::linalg::tensor(&rho_a, &rho_b).unwrap();
        for &theta in &[PI / 4.0, PI / 6.0] {
            let w = crate::witness::build_theta_witness(theta).unwrap();
            for &eta in &[0.35, 0.6, 1.0] {
                let ens = StrategyEnsemble::honest(&rho, eta).unwrap();
                let prog = build_discard_program(&w, eta).unwrap();
                let ev = prog.evaluate(&ens);
                let want = expectation(&w, &rho).unwrap();
                assert!((ev.objective - want).abs() < 1e-12, "eta={eta}");
                assert!(ev.max_equality_residual < 1e-12);
                assert!(ev.min_eigenvalue > -1e-12);
            }
        }
    }

    #[test]
    fn honest_ensemble_assignment_objective_matches_channel() {
        let rho = build_target_state(PI / 5.0).unwrap();
        let a = AssignmentVector([0.3, -0.5, 0.2]);
        let b = AssignmentVector([-0.1, 0.6, 0.4]);
        let w = crate::witness::build_theta_witness(PI / 5.0).unwrap();
        for &eta in &[0.3, 0.7, 1.0] {
            let ens = StrategyEnsemble::honest(&rho, eta).unwrap();
            let prog = build_assignment_program(&w, &a, &b, eta).unwrap();
            let ev = prog.evaluate(&ens);
            let out = crate::witness::assignment_channel(&rho, &a, &b, eta).unwrap();
            let want = w.matrix().trace_product(&out);
            assert!((ev.objective - want).abs() < 1e-12, "eta={eta}: {} vs {want}", ev.objective);
            assert!(ev.max_equality_residual < 1e-12, "{}", ev.worst_equality);
        }
    }

    #[test]
    fn observed_state_of_honest_ensemble() {
        let rho = build_target_state(PI / 6.0).unwrap();
        for &eta in &[0.4, 0.9] {
            let ens = StrategyEnsemble::honest(&rho, eta).unwrap();
            let obs = observed_state(&ens, eta).unwrap();
            assert!((obs.matrix() - rho.matrix()).iter().all(|z| z.norm() < 1e-12));
        }
    }

    #[test]
    fn observed_state_rejects_uniform_ensemble() {
        let mut ens = StrategyEnsemble::zero();
        for p in enumerate_patterns() {
            ens.set(p, HermitianOp::identity(4).scale(1.0 / 256.0)).unwrap();
        }
        match observed_state(&ens, 0.8) {
            Err(Error::ClickRateViolation(v)) => {
                // marginals are 1/2, joints 1/4: all 15 click constraints fail
                assert_eq!(v.len(), 15);
                assert!(v.iter().any(|c| c.constraint == "A2B3"));
            }
            other => panic!("expected violation, got {other:?}"),
        }
        // at η = 1/2 the uniform ensemble has exactly the right click rates
        assert!(observed_state(&ens, 0.5).is_ok());
    }

    #[test]
    fn sdpa_export_layout() {
        let p = build_discard_program(&Witness::bell(), 0.7).unwrap();
        let text = p.to_sdpa();
        let lines: Vec<&str> = text.lines().collect();
        assert!(lines[0].starts_with('"'));
        assert_eq!(lines[1], "1040");
        assert_eq!(lines[2], "130");
        let sizes: Vec<&str> = lines[3].split_whitespace().collect();
        assert_eq!(sizes.len(), 130);
        assert_eq!(sizes[0], "8");
        assert_eq!(sizes[129], format!("-{}", 2 * p.equalities.len()));
        assert_eq!(lines[4].split_whitespace().count(), 1040);
        for l in &lines[5..] {
            let f: Vec<&str> = l.split_whitespace().collect();
            assert_eq!(f.len(), 5);
            let (r, s): (usize, usize) = (f[2].parse().unwrap(), f[3].parse().unwrap());
            assert!(r <= s);
        }
    }
}
