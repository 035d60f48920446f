//! Command-line front end.
//!
//! Every command writes machine-readable output (CSV or `key=value` lines)
//! and reports through its exit code: 0 on success, 1 when a solve or check
//! fails, 2 on a usage error.

use std::f64::consts::{FRAC_PI_4, PI};
use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use crate::critical::{find_critical_eta_in, Scenario, DEFAULT_TOLERANCE};
use crate::error::{Error, Result};
use crate::model::{build_assignment_program, build_discard_program, Strategy};
use crate::oracle::{
    assignment_bell_min_zero, discard_bell_min, ensemble_from_params, verify_feasibility, AppendixBranch,
    AppendixParams, OracleStrategy, ETA_LOWER_BOUNDARY, ETA_UPPER_BOUNDARY,
};
use crate::solver;
use crate::witness::{assignment_channel, expectation, AssignmentVector, Witness};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Gate for the feasibility and objective checks of the explicit attack.
const EXACT_GATE: f64 = 1e-12;
/// Gate for solver versus closed form.
const AGREEMENT_GATE: f64 = 1e-5;
/// Grid points this close to a branch boundary are moved onto it.
const SNAP: f64 = 1e-12;
/// Weight added to `p3` by `verify --self-test`.
const SELF_TEST_PERTURBATION: f64 = 1e-3;

#[derive(Debug, Parser)]
#[command(name = "lossy-witness", version, about = "Worst-case witness values under lossy detection")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Separable minimum and entangled value over an efficiency grid (CSV).
    Sweep(CommonArgs),
    /// Bisection for the critical detection efficiency.
    Critical(CommonArgs),
    /// Explicit-attack feasibility and solver agreement for the Bell witness.
    Verify {
        #[command(flatten)]
        common: CommonArgs,
        /// Perturb the attack weights; the feasibility checks must then fail.
        #[arg(long)]
        self_test: bool,
    },
    /// Entangled floor versus honest target value, assignment only (CSV).
    Floor(CommonArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum StrategyArg {
    Discard,
    Assignment,
}

#[derive(Debug, Args)]
struct CommonArgs {
    #[arg(long, value_enum, default_value = "discard")]
    strategy: StrategyArg,
    /// Witness angle: decimal radians or `pi/4`, `pi/6`, `2pi/9`, ...
    #[arg(long, default_value = "pi/4", value_parser = parse_theta)]
    theta: f64,
    #[arg(long, value_name = "X,Y,Z", allow_hyphen_values = true, value_parser = parse_vector)]
    assign_a: Option<AssignmentVector>,
    #[arg(long, value_name = "X,Y,Z", allow_hyphen_values = true, value_parser = parse_vector)]
    assign_b: Option<AssignmentVector>,
    #[arg(long)]
    eta_start: Option<f64>,
    #[arg(long)]
    eta_stop: Option<f64>,
    #[arg(long)]
    eta_step: Option<f64>,
    /// Bisection tolerance on eta.
    #[arg(long)]
    tol: Option<f64>,
    /// Output file; CSV goes to standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Parses `pi/4`, `2pi/5`, `3*pi/8`, `pi` or a plain decimal.
pub fn parse_theta(s: &str) -> std::result::Result<f64, String> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect::<String>().to_lowercase();
    let Some(pos) = t.find("pi") else {
        return t.parse::<f64>().map_err(|e| format!("bad angle {s:?}: {e}"));
    };
    let head = t[..pos].trim_end_matches('*');
    let tail = &t[pos + 2..];
    let num = if head.is_empty() { 1.0 } else { head.parse::<f64>().map_err(|e| format!("bad angle {s:?}: {e}"))? };
    let den = match tail.strip_prefix('/') {
        Some(d) => d.parse::<f64>().map_err(|e| format!("bad angle {s:?}: {e}"))?,
        None if tail.is_empty() => 1.0,
        None => return Err(format!("bad angle {s:?}")),
    };
    if den == 0.0 {
        return Err(format!("bad angle {s:?}: zero denominator"));
    }
    // exact constant for the common case so that oracle comparisons apply
    if num == 1.0 && den == 4.0 {
        return Ok(FRAC_PI_4);
    }
    Ok(num * PI / den)
}

pub fn parse_vector(s: &str) -> std::result::Result<AssignmentVector, String> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("bad component {p:?}: {e}")))
        .collect::<std::result::Result<_, _>>()?;
    let v: [f64; 3] = parts.try_into().map_err(|p: Vec<f64>| format!("expected 3 components, got {}", p.len()))?;
    Ok(AssignmentVector(v))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommandKind {
    Sweep,
    Critical,
    Verify,
    Floor,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: CommandKind,
    pub strategy: Strategy,
    pub theta: f64,
    /// `(start, stop, step)`
    pub eta_grid: (f64, f64, f64),
    pub tolerance: f64,
    pub output_path: Option<PathBuf>,
    pub self_test: bool,
}

impl RunConfig {
    fn from_args(command: CommandKind, args: &CommonArgs, self_test: bool) -> Result<Self> {
        let (start, stop, step) = match command {
            CommandKind::Sweep => (0.4, 1.0, 0.05),
            CommandKind::Critical => (0.3, 1.0, 0.05),
            CommandKind::Verify => (0.05, 1.0, 0.05),
            CommandKind::Floor => (0.0, 1.0, 0.05),
        };
        let strategy = match args.strategy {
            StrategyArg::Discard => {
                if args.assign_a.is_some() || args.assign_b.is_some() {
                    return Err(Error::InvalidInput("assignment vectors need --strategy assignment".into()));
                }
                Strategy::Discard
            }
            StrategyArg::Assignment => Strategy::Assignment {
                a: args.assign_a.unwrap_or(AssignmentVector::ZERO),
                b: args.assign_b.unwrap_or(AssignmentVector::ZERO),
            },
        };
        let cfg = Self {
            command,
            strategy,
            theta: args.theta,
            eta_grid: (args.eta_start.unwrap_or(start), args.eta_stop.unwrap_or(stop), args.eta_step.unwrap_or(step)),
            tolerance: args.tol.unwrap_or(DEFAULT_TOLERANCE),
            output_path: args.out.clone(),
            self_test,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let (start, stop, step) = self.eta_grid;
        if !(0.0 <= start && start <= stop && stop <= 1.0) {
            return Err(Error::InvalidInput(format!("eta grid [{start}, {stop}] must lie within [0, 1]")));
        }
        if !(step > 0.0) {
            return Err(Error::InvalidInput(format!("eta step must be positive, got {step}")));
        }
        if !(self.theta > 0.0 && self.theta <= FRAC_PI_4 + 1e-15) {
            return Err(Error::InvalidInput(format!("theta {} outside (0, pi/4]", self.theta)));
        }
        if !(self.tolerance >= 1e-8) {
            return Err(Error::InvalidInput(format!("tolerance must be at least 1e-8, got {}", self.tolerance)));
        }
        if self.command == CommandKind::Floor && self.strategy == Strategy::Discard {
            return Err(Error::InvalidInput("floor is defined for the assignment strategy only".into()));
        }
        if self.strategy == Strategy::Discard && start == 0.0 && self.command != CommandKind::Verify {
            return Err(Error::InvalidInput("discard strategy needs eta > 0".into()));
        }
        Ok(())
    }

    /// Grid points in ascending order, snapped to the branch boundaries.
    pub fn grid(&self) -> Vec<f64> {
        let (start, stop, step) = self.eta_grid;
        let n = ((stop - start) / step + 1e-9).floor() as usize;
        (0..=n).map(|k| snap((start + k as f64 * step).min(1.0))).collect()
    }

    /// Witness is `W_{π/4}` and the attack has a closed form.
    fn oracle(&self) -> Option<OracleStrategy> {
        if self.theta != FRAC_PI_4 {
            return None;
        }
        match self.strategy {
            Strategy::Discard => Some(OracleStrategy::Discard),
            Strategy::Assignment { a, b } if a == AssignmentVector::ZERO && b == AssignmentVector::ZERO => {
                Some(OracleStrategy::AssignmentZero)
            }
            Strategy::Assignment { .. } => None,
        }
    }
}

fn snap(eta: f64) -> f64 {
    for b in [ETA_LOWER_BOUNDARY, ETA_UPPER_BOUNDARY, 1.0] {
        if (eta - b).abs() <= SNAP {
            return b;
        }
    }
    eta
}

/// `%.12g`-style formatting, independent of locale.
pub fn fmt_g(x: f64) -> String {
    const P: i32 = 12;
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.*e}", (P - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..P).contains(&exp) {
        let m = strip_zeros(mantissa);
        format!("{m}e{}{:02}", if exp < 0 { '-' } else { '+' }, exp.abs())
    } else {
        strip_zeros(&format!("{:.*}", (P - 1 - exp) as usize, x)).to_string()
    }
}

fn strip_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Entry point used by the binary. Returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let (kind, common, self_test) = match &cli.command {
        Command::Sweep(c) => (CommandKind::Sweep, c, false),
        Command::Critical(c) => (CommandKind::Critical, c, false),
        Command::Verify { common, self_test } => (CommandKind::Verify, common, *self_test),
        Command::Floor(c) => (CommandKind::Floor, c, false),
    };
    let cfg = match RunConfig::from_args(kind, common, self_test) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    match execute(&cfg) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_FAILURE
        }
    }
}

/// Runs a validated configuration, writing to the configured output.
pub fn execute(cfg: &RunConfig) -> Result<i32> {
    let stdout = std::io::stdout();
    let mut text = stdout.lock();
    match cfg.command {
        CommandKind::Sweep => {
            let (csv, ok) = cmd_sweep(cfg)?;
            emit(cfg, &csv, &mut text)?;
            Ok(if ok { EXIT_OK } else { EXIT_FAILURE })
        }
        CommandKind::Floor => {
            let csv = cmd_floor(cfg)?;
            emit(cfg, &csv, &mut text)?;
            Ok(EXIT_OK)
        }
        CommandKind::Critical => {
            let (report, csv, ok) = cmd_critical(cfg)?;
            text.write_all(report.as_bytes())?;
            if let Some(path) = &cfg.output_path {
                std::fs::write(path, csv)?;
            }
            Ok(if ok { EXIT_OK } else { EXIT_FAILURE })
        }
        CommandKind::Verify => {
            let (report, ok) = cmd_verify(cfg)?;
            text.write_all(report.as_bytes())?;
            Ok(if ok { EXIT_OK } else { EXIT_FAILURE })
        }
    }
}

fn emit(cfg: &RunConfig, csv: &str, stdout: &mut impl Write) -> Result<()> {
    match &cfg.output_path {
        Some(path) => std::fs::write(path, csv)?,
        None => stdout.write_all(csv.as_bytes())?,
    }
    Ok(())
}

fn scenario(cfg: &RunConfig) -> Result<Scenario> {
    Scenario::theta(cfg.theta, cfg.strategy)
}

/// One row of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub eta: f64,
    pub separable_min: Option<f64>,
    pub entangled_value: f64,
    pub oracle_value: Option<f64>,
    /// Certified residual of the solver's ensemble, or the failure status.
    pub residual: std::result::Result<f64, String>,
}

impl SweepRow {
    fn csv(&self) -> String {
        let opt = |v: Option<f64>| v.map(fmt_g).unwrap_or_default();
        let residual = match &self.residual {
            Ok(r) => fmt_g(*r),
            Err(status) => status.clone(),
        };
        format!(
            "{},{},{},{},{}\n",
            fmt_g(self.eta),
            opt(self.separable_min),
            fmt_g(self.entangled_value),
            opt(self.oracle_value),
            residual
        )
    }
}

fn sweep_row(s: &Scenario, oracle: Option<OracleStrategy>, eta: f64) -> Result<SweepRow> {
    let entangled_value = s.entangled_value(eta)?;
    let oracle_value = oracle.map(|o| o.closed_form(eta)).transpose()?;
    if eta == 0.0 {
        // analytic, see Scenario::separable_min
        return Ok(SweepRow {
            eta,
            separable_min: Some(s.separable_min(eta)?),
            entangled_value,
            oracle_value,
            residual: Ok(0.0),
        });
    }
    let report = s.solve(eta)?;
    let r = &report.residuals;
    let residual = r.max_equality_violation.max(-r.min_block_eigenvalue).max(0.0);
    let (separable_min, residual) =
        if report.is_optimal() { (Some(report.optimum), Ok(residual)) } else { (None, Err(report.status.to_string())) };
    Ok(SweepRow { eta, separable_min, entangled_value, oracle_value, residual })
}

pub const SWEEP_HEADER: &str = "eta,separable_min,entangled_value,oracle_value,residual\n";

/// CSV text and whether every grid point solved to optimality.
pub fn cmd_sweep(cfg: &RunConfig) -> Result<(String, bool)> {
    let s = scenario(cfg)?;
    let oracle = cfg.oracle();
    let rows: Vec<SweepRow> = cfg.grid().par_iter().map(|&eta| sweep_row(&s, oracle, eta)).collect::<Result<_>>()?;
    let mut csv = String::from(SWEEP_HEADER);
    for row in &rows {
        csv.push_str(&row.csv());
    }
    Ok((csv, rows.iter().all(|r| r.residual.is_ok())))
}

pub const FLOOR_HEADER: &str = "eta,entangled_floor,bell_state_value\n";

/// Minimum eigenvalue of the effective witness next to the honest value of
/// the target state. The two differ once the assignments are not symmetric.
pub fn cmd_floor(cfg: &RunConfig) -> Result<String> {
    let s = scenario(cfg)?;
    let Strategy::Assignment { a, b } = cfg.strategy else {
        return Err(Error::InvalidInput("floor is defined for the assignment strategy only".into()));
    };
    let mut csv = String::from(FLOOR_HEADER);
    for eta in cfg.grid() {
        let floor = s.entangled_value(eta)?;
        let honest = expectation(&s.witness, &assignment_channel(&s.target, &a, &b, eta)?)?;
        writeln!(csv, "{},{},{}", fmt_g(eta), fmt_g(floor), fmt_g(honest)).expect("string write");
    }
    Ok(csv)
}

pub const CRITICAL_HEADER: &str = "eta,separable_min,entangled_value,gap\n";

/// Text report, CSV of the probes, and success.
pub fn cmd_critical(cfg: &RunConfig) -> Result<(String, String, bool)> {
    let s = scenario(cfg)?;
    let (lo, hi, _) = cfg.eta_grid;
    let r = find_critical_eta_in(&s, cfg.tolerance, (lo, hi))?;
    let last = r.curve.iter().rev().find(|c| c.eta == r.bracket.0).copied();
    let mut report = String::new();
    writeln!(
        report,
        "eta_crit={} bracket=[{},{}] iterations={} strategy={} theta={}",
        fmt_g(r.eta_crit),
        fmt_g(r.bracket.0),
        fmt_g(r.bracket.1),
        r.iterations,
        cfg.strategy.name(),
        fmt_g(cfg.theta),
    )
    .expect("string write");
    if let Some(c) = last {
        writeln!(report, "gap_at_lower_end={}", fmt_g(c.gap())).expect("string write");
    }
    let mut curve = r.curve.clone();
    curve.sort_by(|x, y| x.eta.total_cmp(&y.eta));
    let mut csv = String::from(CRITICAL_HEADER);
    for c in &curve {
        writeln!(csv, "{},{},{},{}", fmt_g(c.eta), fmt_g(c.separable_min), fmt_g(c.entangled_value), fmt_g(c.gap()))
            .expect("string write");
    }
    Ok((report, csv, true))
}

/// Result of one verification check.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckLine {
    pub check: &'static str,
    pub strategy: &'static str,
    pub eta: f64,
    pub residual: f64,
    pub gate: f64,
}

impl CheckLine {
    pub fn passed(&self) -> bool {
        self.residual <= self.gate
    }

    fn line(&self) -> String {
        format!(
            "check={} strategy={} eta={} residual={} gate={} result={}\n",
            self.check,
            self.strategy,
            fmt_g(self.eta),
            fmt_g(self.residual),
            fmt_g(self.gate),
            if self.passed() { "pass" } else { "fail" }
        )
    }
}

fn oracle_name(s: OracleStrategy) -> &'static str {
    match s {
        OracleStrategy::Discard => "discard",
        OracleStrategy::AssignmentZero => "assignment_zero",
    }
}

fn verify_point(w: &Witness, s: OracleStrategy, eta: f64, self_test: bool) -> Result<Vec<CheckLine>> {
    let z = AssignmentVector::ZERO;
    let program = match s {
        OracleStrategy::Discard => build_discard_program(w, eta)?,
        OracleStrategy::AssignmentZero => build_assignment_program(w, &z, &z, eta)?,
    };
    let mut params = AppendixParams::new(eta)?;
    if self_test {
        params.p[3] += SELF_TEST_PERTURBATION;
    }
    let closed = s.closed_form(eta)?;
    let rep = verify_feasibility(&ensemble_from_params(&params), &program);
    let solved = solver::solve(&program);
    let agreement = if solved.is_optimal() { (solved.optimum - closed).abs() } else { f64::INFINITY };
    let line = |check, residual, gate| CheckLine { check, strategy: oracle_name(s), eta, residual, gate };
    Ok(vec![
        line("feasibility", rep.max_equality_residual.max(-rep.min_eigenvalue).max(0.0), EXACT_GATE),
        line("objective", (rep.objective - closed).abs(), EXACT_GATE),
        line("solver_agreement", agreement, AGREEMENT_GATE),
    ])
}

/// Both closed forms agree across `1/√3`, and the parameter branches meet at
/// `1/3`.
fn continuity_checks() -> Result<Vec<CheckLine>> {
    let s = ETA_UPPER_BOUNDARY;
    let above = s * (1.0 + 4.0 * f64::EPSILON);
    let mid = AppendixParams::from_branch(AppendixBranch::Middle, ETA_LOWER_BOUNDARY)?;
    let low = AppendixParams::from_branch(AppendixBranch::Low, ETA_LOWER_BOUNDARY)?;
    let params = mid.p.iter().zip(&low.p).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    Ok(vec![
        CheckLine {
            check: "continuity",
            strategy: "discard",
            eta: s,
            residual: (discard_bell_min(above)? - discard_bell_min(s)?).abs(),
            gate: EXACT_GATE,
        },
        CheckLine {
            check: "continuity",
            strategy: "assignment_zero",
            eta: s,
            residual: (assignment_bell_min_zero(above)? - assignment_bell_min_zero(s)?).abs(),
            gate: EXACT_GATE,
        },
        CheckLine {
            check: "branch_parameters",
            strategy: "both",
            eta: ETA_LOWER_BOUNDARY,
            residual: params,
            gate: EXACT_GATE,
        },
    ])
}

/// Report text and whether every check passed.
pub fn cmd_verify(cfg: &RunConfig) -> Result<(String, bool)> {
    let w = Witness::bell();
    let grid: Vec<f64> = cfg.grid().into_iter().filter(|&e| e > 0.0).collect();
    let jobs: Vec<(OracleStrategy, f64)> = [OracleStrategy::Discard, OracleStrategy::AssignmentZero]
        .into_iter()
        .flat_map(|s| grid.iter().map(move |&e| (s, e)))
        .collect();
    let per_point: Vec<Vec<CheckLine>> =
        jobs.par_iter().map(|&(s, eta)| verify_point(&w, s, eta, cfg.self_test)).collect::<Result<_>>()?;
    let mut lines: Vec<CheckLine> = per_point.into_iter().flatten().collect();
    lines.extend(continuity_checks()?);
    let failed = lines.iter().filter(|l| !l.passed()).count();
    let mut report: String = lines.iter().map(CheckLine::line).collect();
    writeln!(report, "summary checks={} failed={}", lines.len(), failed).expect("string write");
    Ok((report, failed == 0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(command: CommandKind, strategy: Strategy, grid: (f64, f64, f64)) -> RunConfig {
        RunConfig {
            command,
            strategy,
            theta: FRAC_PI_4,
            eta_grid: grid,
            tolerance: 1e-3,
            output_path: None,
            self_test: false,
        }
    }

    #[test]
    fn g_formatting() {
        assert_eq!(fmt_g(0.0), "0");
        assert_eq!(fmt_g(-0.0), "0");
        assert_eq!(fmt_g(1.0), "1");
        assert_eq!(fmt_g(0.45), "0.45");
        assert_eq!(fmt_g(-0.140625), "-0.140625");
        assert_eq!(fmt_g(1.0 / 3.0), "0.333333333333");
        assert_eq!(fmt_g(0.0001), "0.0001");
        assert_eq!(fmt_g(1.5e-5), "1.5e-05");
        assert_eq!(fmt_g(-2.25e-11), "-2.25e-11");
        assert_eq!(fmt_g(123456789012345.0), "1.23456789012e+14");
        assert_eq!(fmt_g(0.4 + 0.05 * 3.0), "0.55");
    }

    #[test]
    fn theta_syntax() {
        assert_eq!(parse_theta("pi/4").unwrap(), FRAC_PI_4);
        assert!((parse_theta("pi/6").unwrap() - PI / 6.0).abs() < 1e-16);
        assert!((parse_theta("2pi/9").unwrap() - 2.0 * PI / 9.0).abs() < 1e-16);
        assert!((parse_theta("3*pi/16").unwrap() - 3.0 * PI / 16.0).abs() < 1e-16);
        assert_eq!(parse_theta("0.5").unwrap(), 0.5);
        assert!(parse_theta("pi/0").is_err());
        assert!(parse_theta("pie").is_err());
        assert!(parse_theta("x").is_err());
    }

    #[test]
    fn vector_syntax() {
        assert_eq!(parse_vector("1,-1,0.5").unwrap(), AssignmentVector([1.0, -1.0, 0.5]));
        assert!(parse_vector("1,2").is_err());
        assert!(parse_vector("1,a,2").is_err());
    }

    #[test]
    fn grid_and_snapping() {
        let c = cfg(CommandKind::Sweep, Strategy::Discard, (0.4, 1.0, 0.05));
        let g = c.grid();
        assert_eq!(g.len(), 13);
        assert_eq!(*g.last().unwrap(), 1.0);
        assert_eq!(snap(1.0 / 3.0 + 5e-13), ETA_LOWER_BOUNDARY);
        assert_eq!(snap(ETA_UPPER_BOUNDARY - 5e-13), ETA_UPPER_BOUNDARY);
        assert_eq!(snap(0.5), 0.5);
    }

    #[test]
    fn config_validation() {
        let mut c = cfg(CommandKind::Sweep, Strategy::Discard, (0.4, 1.0, 0.05));
        assert!(c.validate().is_ok());
        c.eta_grid = (0.4, 1.2, 0.05);
        assert!(c.validate().is_err());
        c.eta_grid = (0.4, 1.0, 0.0);
        assert!(c.validate().is_err());
        c.eta_grid = (0.0, 1.0, 0.1);
        assert!(c.validate().is_err(), "discard at eta=0");
        c.eta_grid = (0.4, 1.0, 0.05);
        c.theta = 1.0;
        assert!(c.validate().is_err());
        c.theta = FRAC_PI_4;
        c.tolerance = 1e-9;
        assert!(c.validate().is_err());
        let f = cfg(CommandKind::Floor, Strategy::Discard, (0.0, 1.0, 0.1));
        assert!(f.validate().is_err());
    }

    #[test]
    fn floor_examples() {
        let z = AssignmentVector::ZERO;
        let c = cfg(CommandKind::Floor, Strategy::Assignment { a: z, b: z }, (0.6, 0.6, 0.1));
        let csv = cmd_floor(&c).unwrap();
        let row: Vec<f64> = csv.lines().nth(1).unwrap().split(',').map(|v| v.parse().unwrap()).collect();
        assert!((row[1] + 0.02).abs() < 1e-11 && (row[2] + 0.02).abs() < 1e-11, "{csv}");

        let x = AssignmentVector([1.0, 0.0, 0.0]);
        let c = cfg(CommandKind::Floor, Strategy::Assignment { a: x, b: x }, (0.8, 1.0, 0.2));
        let csv = cmd_floor(&c).unwrap();
        let rows: Vec<Vec<f64>> =
            csv.lines().skip(1).map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect();
        assert!((rows[0][2] + 0.24).abs() < 1e-11);
        assert!(rows[0][1] <= rows[0][2] + 1e-12);
        assert!((rows[1][1] + 0.5).abs() < 1e-11, "channel is the identity at eta=1");
    }

    #[test]
    fn honest_value_matches_bell_formula() {
        let a = AssignmentVector([0.3, -0.4, 0.2]);
        let b = AssignmentVector([-0.5, 0.1, 0.6]);
        let c = cfg(CommandKind::Floor, Strategy::Assignment { a, b }, (0.0, 1.0, 0.25));
        let csv = cmd_floor(&c).unwrap();
        for l in csv.lines().skip(1) {
            let v: Vec<f64> = l.split(',').map(|x| x.parse().unwrap()).collect();
            let want = crate::witness::bell_assignment_value(&a, &b, v[0]);
            assert!((v[2] - want).abs() < 1e-11, "{l}");
        }
    }

    #[test]
    fn verify_self_test_fails_feasibility() {
        let c = RunConfig { self_test: true, ..cfg(CommandKind::Verify, Strategy::Discard, (0.5, 0.5, 0.1)) };
        let (report, ok) = cmd_verify(&c).unwrap();
        assert!(!ok);
        assert!(report.contains("check=feasibility strategy=discard eta=0.5"));
        assert!(report.lines().any(|l| l.starts_with("check=feasibility") && l.ends_with("result=fail")));
        assert!(report.lines().any(|l| l.starts_with("check=solver_agreement") && l.ends_with("result=pass")));
    }
}
