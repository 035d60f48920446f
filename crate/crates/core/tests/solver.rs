use std::f64::consts::PI;

use lossy_witness::lattice::ClickPattern;
use lossy_witness::linalg::{tensor, HermitianOp};
use lossy_witness::model::{build_assignment_program, build_discard_program, ConicProgram, StrategyEnsemble};
use lossy_witness::oracle::{build_appendix_ensemble, AppendixParams, OracleStrategy};
use lossy_witness::solver::{self, SolveStatus};
use lossy_witness::witness::{build_theta_witness, AssignmentVector, Witness};
use proptest::prelude::*;
use rayon::prelude::*;

fn bell_program(s: OracleStrategy, eta: f64) -> ConicProgram {
    let w = Witness::bell();
    let z = AssignmentVector::ZERO;
    match s {
        OracleStrategy::Discard => build_discard_program(&w, eta).unwrap(),
        OracleStrategy::AssignmentZero => build_assignment_program(&w, &z, &z, eta).unwrap(),
    }
}

#[test]
fn bell_examples() {
    let cases = [
        (OracleStrategy::Discard, 0.9, 0.25 - 1.0 / (4.0 * 0.81)),
        (OracleStrategy::Discard, 0.5, -0.5),
        (OracleStrategy::AssignmentZero, 0.8, 0.0),
        (OracleStrategy::AssignmentZero, 0.5, 0.0625),
    ];
    for (s, eta, want) in cases {
        let r = solver::solve(&bell_program(s, eta));
        assert_eq!(r.status, SolveStatus::Optimal, "{s:?} at {eta}");
        assert!((r.optimum - want).abs() < 1e-6, "{s:?} at {eta}: {} vs {want}", r.optimum);
        assert!(r.residuals.max_equality_violation <= solver::EQUALITY_GATE);
        assert!(r.residuals.min_block_eigenvalue >= solver::EIGENVALUE_GATE);
    }
}

#[test]
fn returned_ensemble_reproduces_optimum() {
    for (theta, eta) in [(PI / 4.0, 0.7), (PI / 6.0, 0.85), (PI / 5.0, 0.45)] {
        let w = build_theta_witness(theta).unwrap();
        let x = AssignmentVector([0.3, 0.0, -0.4]);
        for p in [build_discard_program(&w, eta).unwrap(), build_assignment_program(&w, &x, &x, eta).unwrap()] {
            let r = solver::solve(&p);
            assert!(r.is_optimal());
            let again = p.evaluate(&r.ensemble);
            assert!((again.objective - r.optimum).abs() <= 1e-8, "{} vs {}", again.objective, r.optimum);
        }
    }
}

#[test]
fn optimum_never_exceeds_explicit_attack() {
    let grid: Vec<f64> = (0..13).map(|k| 0.4 + 0.05 * k as f64).collect();
    let worst = grid
        .par_iter()
        .flat_map_iter(|&eta| {
            [OracleStrategy::Discard, OracleStrategy::AssignmentZero].into_iter().map(move |s| {
                let p = bell_program(s, eta);
                let attack = p.evaluate(&build_appendix_ensemble(eta, s).unwrap()).objective;
                let r = solver::solve(&p);
                assert!(r.is_optimal(), "{s:?} at {eta}");
                r.optimum - attack
            })
        })
        .reduce(|| f64::NEG_INFINITY, f64::max);
    assert!(worst <= 1e-6, "optimum above explicit attack by {worst:e}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(4))]

    #[test]
    fn objective_scaling_is_linear(c in 0.2f64..5.0, eta in 0.4f64..1.0) {
        let p = bell_program(OracleStrategy::Discard, eta);
        let base = solver::solve(&p);
        let scaled = solver::solve(&p.with_scaled_objective(c));
        prop_assert!(base.is_optimal() && scaled.is_optimal());
        prop_assert!((scaled.optimum - c * base.optimum).abs() <= 1e-9, "{} vs {}", scaled.optimum, c * base.optimum);
    }
}

// Independent upper bound: the attack's click-pattern layout with its weights
// from the closed-form branch, but with tunable product-state resources.

const XX_P2: [[u8; 6]; 3] = [[1, 0, 0, 1, 0, 0], [1, 0, 1, 1, 1, 0], [1, 1, 0, 1, 0, 1]];
const XX_P3: [[u8; 6]; 2] = [[1, 0, 0, 1, 1, 1], [1, 1, 1, 1, 0, 0]];
const YY_P2: [[u8; 6]; 3] = [[0, 1, 0, 0, 1, 0], [0, 1, 1, 1, 1, 0], [1, 1, 0, 0, 1, 1]];
const YY_P3: [[u8; 6]; 2] = [[0, 1, 0, 1, 1, 1], [1, 1, 1, 0, 1, 0]];
const ZZ_P2: [[u8; 6]; 3] = [[0, 0, 1, 0, 0, 1], [0, 1, 1, 1, 0, 1], [1, 0, 1, 0, 1, 1]];
const ZZ_P3: [[u8; 6]; 2] = [[0, 0, 1, 1, 1, 1], [1, 1, 1, 0, 0, 1]];

fn bloch(v: [f64; 3]) -> HermitianOp {
    HermitianOp::qubit(0.5, v.map(|x| 0.5 * x))
}

/// `q·|u⟩⟨u|⊗|v⟩⟨v| + (1−q)·|u'⟩⟨u'|⊗|v'⟩⟨v'|` with the pairs tilted by `phi`
/// from the equator towards `+z`.
fn tilted_pair(axis: usize, anti: bool, phi: f64, q: f64) -> HermitianOp {
    let (c, s) = (phi.cos(), phi.sin());
    let dir = |sign: f64| {
        let mut v = [0.0, 0.0, s];
        v[axis] = sign * c;
        v
    };
    let bob_sign = if anti { -1.0 } else { 1.0 };
    let first = tensor(&bloch(dir(1.0)), &bloch(dir(bob_sign))).unwrap();
    let second = tensor(&bloch(dir(-1.0)), &bloch(dir(-bob_sign))).unwrap();
    &first.scale(q) + &second.scale(1.0 - q)
}

fn biased_zz(q: f64) -> HermitianOp {
    let up = tensor(&bloch([0.0, 0.0, 1.0]), &bloch([0.0, 0.0, 1.0])).unwrap();
    let down = tensor(&bloch([0.0, 0.0, -1.0]), &bloch([0.0, 0.0, -1.0])).unwrap();
    &up.scale(q) + &down.scale(1.0 - q)
}

/// `x = [phi_x, q_x, phi_y, q_y, q_z, z_single]`
fn search_ensemble(eta: f64, x: &[f64; 6]) -> StrategyEnsemble {
    let [p0, p1, p2, p3, p4] = AppendixParams::new(eta).unwrap().p;
    let xx = tilted_pair(0, false, x[0], x[1]);
    let yy = tilted_pair(1, true, x[2], x[3]);
    let zz = biased_zz(x[4]);
    let single = tensor(&bloch([0.0, 0.0, x[5]]), &bloch([0.0, 0.0, x[5]])).unwrap();
    let mut ens = StrategyEnsemble::zero();
    let mut put = |bits: [u8; 6], rho: HermitianOp| ens.set(ClickPattern::from_bits(bits), rho).unwrap();
    put([0; 6], single.scale(p0));
    put([1; 6], (&(&xx + &yy) + &zz).scale(p1 / 3.0));
    for (family, rho) in [(&XX_P2, &xx), (&YY_P2, &yy), (&ZZ_P2, &zz)] {
        family.iter().for_each(|&b| put(b, rho.scale(p2)));
    }
    for (family, rho) in [(&XX_P3, &xx), (&YY_P3, &yy), (&ZZ_P3, &zz)] {
        family.iter().for_each(|&b| put(b, rho.scale(p3)));
    }
    for k in 0..6 {
        let mut bits = [0u8; 6];
        bits[k] = 1;
        put(bits, single.scale(p4));
    }
    ens
}

const BOUNDS: [(f64, f64); 6] = [(-1.2, 1.2), (0.0, 1.0), (-1.2, 1.2), (0.0, 1.0), (0.0, 1.0), (-1.0, 1.0)];

fn feasible_value(p: &ConicProgram, x: &[f64; 6]) -> f64 {
    if x.iter().zip(BOUNDS).any(|(v, (lo, hi))| *v < lo || *v > hi) {
        return f64::INFINITY;
    }
    let e = p.evaluate(&search_ensemble(p.eta, x));
    if e.max_equality_residual <= 1e-12 && e.min_eigenvalue >= -1e-12 {
        e.objective
    } else {
        f64::INFINITY
    }
}

fn local_search_upper_bound(p: &ConicProgram) -> f64 {
    // coarse grid
    let phis = [-0.9, -0.45, 0.0, 0.45, 0.9];
    let qs = [0.25, 0.5, 0.75];
    let mut best = ([0.0, 0.5, 0.0, 0.5, 0.5, 0.0], f64::INFINITY);
    for &a in &phis {
        for &b in &qs {
            for &c in &phis {
                for &d in &qs {
                    for &e in &qs {
                        for &f in &[-0.5, 0.0, 0.5] {
                            let x = [a, b, c, d, e, f];
                            let v = feasible_value(p, &x);
                            if v < best.1 {
                                best = (x, v);
                            }
                        }
                    }
                }
            }
        }
    }
    // coordinate descent with shrinking steps
    let (mut x, mut v) = best;
    let mut step = 0.2;
    while step > 1e-7 {
        let mut improved = false;
        for k in 0..6 {
            for dir in [1.0, -1.0] {
                let mut y = x;
                y[k] += dir * step;
                let vy = feasible_value(p, &y);
                if vy < v {
                    (x, v) = (y, vy);
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    v
}

#[test]
fn non_bell_optimum_below_local_search_attack() {
    let w = build_theta_witness(PI / 6.0).unwrap();
    let p = build_discard_program(&w, 0.75).unwrap();
    let bound = local_search_upper_bound(&p);
    assert!(bound.is_finite(), "search found no feasible point");
    let r = solver::solve(&p);
    assert!(r.is_optimal());
    assert!(r.optimum <= bound + 1e-6, "solver {} above attack {bound}", r.optimum);
    // the attack family is not optimal for this witness, but it is a real attack
    assert!(bound < 0.0, "{bound}");
}
