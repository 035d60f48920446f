//! Infeasible-start primal-dual interior-point method for real symmetric cones.
//!
//! Problem form:
//!
//! ```text
//! minimize    cᵀx
//! subject to  S_k(x) = F_k + Σ_p x_p B_kp  ⪰ 0     for every cone k
//!             A x = b
//! ```
//!
//! with dual `maximize bᵀy + Σ_k ⟨F_k, Z_k⟩` s.t. `Σ_k B_kᵀ Z_k + Aᵀy = c`,
//! `Z_k ⪰ 0`. Every cone depends on a single contiguous group of variables, so
//! the scaled normal matrix `Σ_k B_kᵀ (W_k⁻¹ ⊗ W_k⁻¹) B_k` is block diagonal
//! and the equalities are handled through a small Schur complement.
//!
//! Search directions use Nesterov-Todd scaling with a Mehrotra
//! predictor-corrector step.

use std::ops::Range;

use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};

pub(crate) struct Cone {
    pub group: usize,
    /// One matrix per variable of the group, in group order.
    pub basis: Vec<DMatrix<f64>>,
    pub offset: DMatrix<f64>,
}

impl Cone {
    pub fn dim(&self) -> usize {
        self.offset.nrows()
    }

    fn apply(&self, xg: &[f64]) -> DMatrix<f64> {
        let mut m = self.offset.clone();
        for (b, &v) in self.basis.iter().zip(xg) {
            if v != 0.0 {
                m += b * v;
            }
        }
        m
    }

    fn apply_linear(&self, xg: &[f64]) -> DMatrix<f64> {
        let n = self.dim();
        let mut m = DMatrix::zeros(n, n);
        for (b, &v) in self.basis.iter().zip(xg) {
            if v != 0.0 {
                m += b * v;
            }
        }
        m
    }

    /// `⟨B_p, M⟩` for every variable of the group.
    fn adjoint(&self, m: &DMatrix<f64>) -> Vec<f64> {
        self.basis.iter().map(|b| b.dot(m)).collect()
    }
}

pub(crate) struct RealProgram {
    pub groups: Vec<Range<usize>>,
    pub cones: Vec<Cone>,
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
    pub c: DVector<f64>,
}

impl RealProgram {
    pub fn nvars(&self) -> usize {
        self.c.len()
    }

    fn cone_values(&self, x: &DVector<f64>) -> Vec<DMatrix<f64>> {
        self.cones.iter().map(|k| k.apply(&x.as_slice()[self.groups[k.group].clone()])).collect()
    }

    /// `Σ_k B_kᵀ Z_k`
    fn adjoint_sum(&self, z: &[DMatrix<f64>]) -> DVector<f64> {
        let mut out = DVector::zeros(self.nvars());
        for (k, zk) in self.cones.iter().zip(z) {
            let r = self.groups[k.group].clone();
            for (o, v) in out.as_mut_slice()[r].iter_mut().zip(k.adjoint(zk)) {
                *o += v;
            }
        }
        out
    }
}

/// Iterations without improvement before giving up.
const STAGNATION: usize = 6;

#[derive(Debug, Clone)]
pub(crate) struct IpmOptions {
    pub max_iter: usize,
    pub feas_tol: f64,
    pub gap_tol: f64,
    pub verbose: bool,
}

impl Default for IpmOptions {
    fn default() -> Self {
        Self { max_iter: 120, feas_tol: 1e-9, gap_tol: 1e-9, verbose: false }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Outcome {
    Converged,
    Stalled,
    IterationLimit,
}

pub(crate) struct IpmResult {
    pub outcome: Outcome,
    pub x: DVector<f64>,
    pub pcost: f64,
    pub pres: f64,
    pub dres: f64,
    pub gap: f64,
    pub iterations: usize,
}

/// Nesterov-Todd scaling of one cone: `R⁻¹ S R⁻ᵀ = Rᵀ Z R = diag(λ)`.
struct Scaling {
    r: DMatrix<f64>,
    r_inv: DMatrix<f64>,
    lambda: DVector<f64>,
}

fn nt_scaling(s: &DMatrix<f64>, z: &DMatrix<f64>) -> Option<Scaling> {
    let ls = Cholesky::new(s.clone())?.l();
    let lz = Cholesky::new(z.clone())?.l();
    let (_, lambda, v_t) = checked_svd(lz.transpose() * &ls)?;
    let v = v_t.transpose();
    if lambda.iter().any(|&l| !(l > 0.0)) {
        return None;
    }
    let inv_sqrt = DMatrix::from_diagonal(&lambda.map(|l| 1.0 / l.sqrt()));
    let sqrt = DMatrix::from_diagonal(&lambda.map(f64::sqrt));
    let r = &ls * &v * inv_sqrt;
    let ls_inv = ls.solve_lower_triangular(&DMatrix::identity(s.nrows(), s.nrows()))?;
    let r_inv = sqrt * v.transpose() * ls_inv;
    Some(Scaling { r, r_inv, lambda })
}

type Svd = (DMatrix<f64>, DVector<f64>, DMatrix<f64>);

/// SVD with a reconstruction check. The bidiagonal solver can stop early on
/// nearly diagonal input with clustered singular values; one-sided Jacobi
/// takes over when it does.
fn checked_svd(m: DMatrix<f64>) -> Option<Svd> {
    let tol = 1e-12 * m.amax().max(f64::MIN_POSITIVE);
    let accurate = |(u, sv, v_t): Svd| {
        let err = (&u * DMatrix::from_diagonal(&sv) * &v_t - &m).amax();
        (err <= tol).then_some((u, sv, v_t))
    };
    [f64::EPSILON, 1e-18]
        .into_iter()
        .find_map(|eps| {
            let svd = m.clone().try_svd(true, true, eps, 10_000)?;
            accurate((svd.u?, svd.singular_values, svd.v_t?))
        })
        .or_else(|| accurate(jacobi_svd(&m)?))
}

/// One-sided (Hestenes) Jacobi SVD of a square nonsingular matrix.
fn jacobi_svd(m: &DMatrix<f64>) -> Option<Svd> {
    let n = m.ncols();
    let mut u = m.clone();
    let mut v = DMatrix::<f64>::identity(n, n);
    for _ in 0..60 {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let a = u.column(p).norm_squared();
                let b = u.column(q).norm_squared();
                let g = u.column(p).dot(&u.column(q));
                if g.abs() <= f64::EPSILON * (a * b).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (b - a) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for w in [&mut u, &mut v] {
                    for r in 0..n {
                        let (x, y) = (w[(r, p)], w[(r, q)]);
                        w[(r, p)] = c * x - s * y;
                        w[(r, q)] = s * x + c * y;
                    }
                }
            }
        }
        if !rotated {
            let mut order: Vec<usize> = (0..n).collect();
            let norms: Vec<f64> = (0..n).map(|k| u.column(k).norm()).collect();
            order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]));
            if norms.iter().any(|&x| !(x > 0.0)) {
                return None;
            }
            let sv = DVector::from_iterator(n, order.iter().map(|&k| norms[k]));
            let uu = DMatrix::from_fn(n, n, |r, k| u[(r, order[k])] / norms[order[k]]);
            let vv = DMatrix::from_fn(n, n, |r, k| v[(r, order[k])]);
            return Some((uu, sv, vv.transpose()));
        }
    }
    None
}

fn sym(m: DMatrix<f64>) -> DMatrix<f64> {
    (&m + m.transpose()) * 0.5
}

/// Solves `Λ∘Q = T` (Jordan product) for diagonal `Λ`.
fn lyap_diag(lambda: &DVector<f64>, t: &DMatrix<f64>) -> DMatrix<f64> {
    let n = lambda.len();
    DMatrix::from_fn(n, n, |i, j| 2.0 * t[(i, j)] / (lambda[i] + lambda[j]))
}

/// Largest `α ≤ cap` keeping `diag(λ) + α·D ⪰ 0`.
fn max_step(lambda: &DVector<f64>, d: &DMatrix<f64>, cap: f64) -> f64 {
    let n = lambda.len();
    let scaled = DMatrix::from_fn(n, n, |i, j| d[(i, j)] / (lambda[i] * lambda[j]).sqrt());
    let lmin = SymmetricEigen::new(sym(scaled)).eigenvalues.min();
    if lmin >= 0.0 {
        cap
    } else {
        cap.min(-1.0 / lmin)
    }
}

fn min_eig(m: &DMatrix<f64>) -> f64 {
    SymmetricEigen::new(sym(m.clone())).eigenvalues.min()
}

/// Factorized KKT operator `[H Aᵀ; A 0]` with block-diagonal `H`.
/// Factored KKT system. Each block of `H` is kept as `GᵀG`, where the columns
/// of `G` are the scaled basis matrices `R⁻¹ B_p R⁻ᵀ` of every cone touching
/// the group; a QR factorization of `G` avoids squaring its condition number.
struct Kkt<'a> {
    prog: &'a RealProgram,
    /// Stacked `G` per group and its triangular QR factor.
    g: Vec<DMatrix<f64>>,
    r: Vec<DMatrix<f64>>,
    /// Triangular factor of the Schur complement `A H⁻¹ Aᵀ`.
    schur: Option<DMatrix<f64>>,
}

impl<'a> Kkt<'a> {
    fn new(prog: &'a RealProgram, r_inv: &[DMatrix<f64>]) -> Option<Self> {
        let mut columns: Vec<Vec<Vec<f64>>> = prog.groups.iter().map(|g| vec![Vec::new(); g.len()]).collect();
        for (k, ri) in prog.cones.iter().zip(r_inv) {
            for (p, b) in k.basis.iter().enumerate() {
                let scaled = ri * b * ri.transpose();
                columns[k.group][p].extend_from_slice(scaled.as_slice());
            }
        }
        let mut g = Vec::with_capacity(columns.len());
        let mut r = Vec::with_capacity(columns.len());
        for cols in columns {
            let rows = cols.first().map_or(0, Vec::len);
            if rows < cols.len() {
                return None;
            }
            let gm = DMatrix::from_fn(rows, cols.len(), |i, j| cols[j][i]);
            let rm = gm.clone().qr().r();
            if rm.diagonal().iter().any(|d| !(d.abs() > 0.0 && d.is_finite())) {
                return None;
            }
            g.push(gm);
            r.push(rm);
        }
        let m = prog.a.nrows();
        let schur = if m == 0 {
            None
        } else {
            // P = R⁻ᵀ Aᵀ per group, so that A H⁻¹ Aᵀ = PᵀP
            let at = prog.a.transpose();
            let mut pm = DMatrix::zeros(prog.nvars(), m);
            for (grp, rg) in prog.groups.iter().zip(&r) {
                let sub = at.rows(grp.start, grp.len()).into_owned();
                pm.rows_mut(grp.start, grp.len()).copy_from(&rg.tr_solve_upper_triangular(&sub)?);
            }
            let rs = pm.qr().r();
            if rs.diagonal().iter().any(|d| !(d.abs() > 0.0 && d.is_finite())) {
                return None;
            }
            Some(rs)
        };
        Some(Self { prog, g, r, schur })
    }

    fn h_solve(&self, rhs: &DVector<f64>) -> DVector<f64> {
        let mut out = DVector::zeros(rhs.len());
        for (grp, rg) in self.prog.groups.iter().zip(&self.r) {
            let sub = rhs.rows(grp.start, grp.len()).into_owned();
            let t = rg.tr_solve_upper_triangular(&sub).expect("nonsingular factor");
            out.rows_mut(grp.start, grp.len()).copy_from(&rg.solve_upper_triangular(&t).expect("nonsingular factor"));
        }
        out
    }

    fn h_apply(&self, x: &DVector<f64>) -> DVector<f64> {
        let mut out = DVector::zeros(x.len());
        for (grp, gm) in self.prog.groups.iter().zip(&self.g) {
            let sub = x.rows(grp.start, grp.len()).into_owned();
            out.rows_mut(grp.start, grp.len()).copy_from(&gm.tr_mul(&(gm * sub)));
        }
        out
    }

    fn solve_once(&self, r1: &DVector<f64>, r2: &DVector<f64>) -> (DVector<f64>, DVector<f64>) {
        let hr1 = self.h_solve(r1);
        let Some(rs) = &self.schur else {
            return (hr1, DVector::zeros(0));
        };
        // (A H⁻¹ Aᵀ) y = A H⁻¹ r1 − r2
        let rhs = &self.prog.a * &hr1 - r2;
        let t = rs.tr_solve_upper_triangular(&rhs).expect("nonsingular factor");
        let y = rs.solve_upper_triangular(&t).expect("nonsingular factor");
        let x = hr1 - self.h_solve(&(self.prog.a.transpose() * &y));
        (x, y)
    }

    /// Solves `[H Aᵀ; A 0][x; y] = [r1; r2]`, refining while the residual shrinks.
    fn solve(&self, r1: &DVector<f64>, r2: &DVector<f64>) -> (DVector<f64>, DVector<f64>) {
        let residual = |x: &DVector<f64>, y: &DVector<f64>| {
            let mut e1 = r1 - self.h_apply(x);
            if !y.is_empty() {
                e1 -= self.prog.a.transpose() * y;
            }
            let e2 = r2 - &self.prog.a * x;
            let size = e1.norm() + e2.norm();
            (e1, e2, size)
        };
        let (mut x, mut y) = self.solve_once(r1, r2);
        let (mut e1, mut e2, mut size) = residual(&x, &y);
        for _ in 0..REFINE_STEPS {
            let (dx, dy) = self.solve_once(&e1, &e2);
            let (nx, ny) = (&x + dx, &y + dy);
            let (n1, n2, nsize) = residual(&nx, &ny);
            if !(nsize < 0.5 * size) {
                if nsize < size {
                    (x, y) = (nx, ny);
                }
                break;
            }
            (x, y, e1, e2, size) = (nx, ny, n1, n2, nsize);
        }
        (x, y)
    }
}

/// Upper bound on iterative-refinement passes per KKT solve.
const REFINE_STEPS: usize = 20;

fn norm_all(ms: &[DMatrix<f64>]) -> f64 {
    ms.iter().map(|m| m.norm_squared()).sum::<f64>().sqrt()
}

/// Shifts `m` (all cones together) so that its smallest eigenvalue is 1 when it
/// is not already comfortably interior.
fn shift_interior(ms: &mut [DMatrix<f64>]) {
    let t = ms.iter().map(|m| -min_eig(m)).fold(f64::NEG_INFINITY, f64::max);
    let nrm = norm_all(ms).max(1.0);
    if t >= -1e-8 * nrm {
        for m in ms.iter_mut() {
            let n = m.nrows();
            *m += DMatrix::identity(n, n) * (1.0 + t);
        }
    }
}

/// Re-scales after a step taken in scaled space: `s̃ = diag(λ) + α dS̃` and
/// `z̃ = diag(λ) + α dZ̃` must be positive definite. Factors are formed from the
/// well-conditioned `Λ^{-1/2} s̃ Λ^{-1/2}` so that tiny eigenvalues survive.
fn rescale(sc: &Scaling, dst: &DMatrix<f64>, dzt: &DMatrix<f64>, alpha: f64) -> Option<Scaling> {
    let n = sc.lambda.len();
    let half = sc.lambda.map(f64::sqrt);
    let factor = |d: &DMatrix<f64>| -> Option<DMatrix<f64>> {
        let m = DMatrix::from_fn(n, n, |i, j| {
            let base = if i == j { 1.0 } else { 0.0 };
            base + alpha * d[(i, j)] / (half[i] * half[j])
        });
        let l = Cholesky::new(sym(m))?.l();
        Some(DMatrix::from_diagonal(&half) * l)
    };
    let l1 = factor(dst)?;
    let l2 = factor(dzt)?;
    let (u, lambda, v_t) = checked_svd(l2.transpose() * &l1)?;
    let v = v_t.transpose();
    if lambda.iter().any(|&l| !(l > 0.0 && l.is_finite())) {
        return None;
    }
    let r = &sc.r * l1 * v * DMatrix::from_diagonal(&lambda.map(|l| 1.0 / l.sqrt()));
    let r_inv = DMatrix::from_diagonal(&lambda.map(|l| 1.0 / l.sqrt())) * u.transpose() * l2.transpose() * &sc.r_inv;
    Some(Scaling { r, r_inv, lambda })
}

pub(crate) fn solve(prog: &RealProgram, opts: &IpmOptions) -> IpmResult {
    let n = prog.nvars();
    let m = prog.a.nrows();
    let nu: f64 = prog.cones.iter().map(|k| k.dim() as f64).sum();

    // starting point: least-norm primal slack and dual variable
    let identity: Vec<DMatrix<f64>> = prog.cones.iter().map(|k| DMatrix::identity(k.dim(), k.dim())).collect();
    let kkt0 = Kkt::new(prog, &identity).expect("initial KKT system is positive definite");
    let offsets: Vec<DMatrix<f64>> = prog.cones.iter().map(|k| k.offset.clone()).collect();
    let (mut x, _) = kkt0.solve(&(-prog.adjoint_sum(&offsets)), &prog.b);
    let mut s0 = prog.cone_values(&x);
    shift_interior(&mut s0);
    let (u, mut y) = kkt0.solve(&prog.c, &DVector::zeros(m));
    let mut z0: Vec<DMatrix<f64>> =
        prog.cones.iter().map(|k| k.apply_linear(&u.as_slice()[prog.groups[k.group].clone()])).collect();
    shift_interior(&mut z0);
    // the iterate (s, z) is carried as its scaling: s = R Λ Rᵀ, z = R⁻ᵀ Λ R⁻¹
    let mut scalings: Vec<Scaling> = s0
        .iter()
        .zip(&z0)
        .map(|(sk, zk)| {
            nt_scaling(sk, zk).unwrap_or_else(|| {
                let id = DMatrix::identity(sk.nrows(), sk.nrows());
                nt_scaling(&id, &id).expect("identity scaling")
            })
        })
        .collect();

    let bnorm = 1.0 + prog.b.norm();
    let cnorm = 1.0 + prog.c.norm();
    let fnorm = 1.0 + norm_all(&offsets);

    let snapshot = |x: &DVector<f64>, outcome, pcost, pres, dres, gap, it| IpmResult {
        outcome,
        x: x.clone(),
        pcost,
        pres,
        dres,
        gap,
        iterations: it,
    };
    // best iterate so far by max(pres, dres, relgap); returned when progress stops
    let mut best: Option<(f64, IpmResult)> = None;
    let finish = |best: Option<(f64, IpmResult)>, outcome| {
        let mut r = best.expect("at least one iterate").1;
        r.outcome = outcome;
        r
    };

    for it in 0..=opts.max_iter {
        let s: Vec<DMatrix<f64>> =
            scalings.iter().map(|sc| sym(&sc.r * DMatrix::from_diagonal(&sc.lambda) * sc.r.transpose())).collect();
        let z: Vec<DMatrix<f64>> = scalings
            .iter()
            .map(|sc| sym(sc.r_inv.transpose() * DMatrix::from_diagonal(&sc.lambda) * &sc.r_inv))
            .collect();
        let sx = prog.cone_values(&x);
        let r_c: Vec<DMatrix<f64>> = sx.iter().zip(&s).map(|(a, b)| a - b).collect();
        let r_p = &prog.b - &prog.a * &x;
        let r_d = &prog.c - prog.adjoint_sum(&z) - if m > 0 { prog.a.transpose() * &y } else { DVector::zeros(n) };
        let gap: f64 = scalings.iter().map(|sc| sc.lambda.norm_squared()).sum();
        let pcost = prog.c.dot(&x);
        let dcost = prog.b.dot(&y) + offsets.iter().zip(&z).map(|(f, zk)| f.dot(zk)).sum::<f64>();
        let pres = (r_p.norm() / bnorm).max(norm_all(&r_c) / fnorm);
        let dres = r_d.norm() / cnorm;
        let relgap = gap / pcost.abs().max(1.0);
        if opts.verbose {
            eprintln!(
                "ipm {it:3}  pcost {pcost:+.10e}  dcost {dcost:+.10e}  gap {gap:.2e}  pres {pres:.2e}  dres {dres:.2e}"
            );
        }
        if !(pres.is_finite() && dres.is_finite() && gap.is_finite()) {
            return finish(best, Outcome::Stalled);
        }
        if pres <= opts.feas_tol && dres <= opts.feas_tol && (gap <= opts.gap_tol || relgap <= opts.gap_tol) {
            return snapshot(&x, Outcome::Converged, pcost, pres, dres, gap, it);
        }
        let merit = pres.max(dres).max(relgap);
        if best.as_ref().is_none_or(|(bm, _)| merit < *bm) {
            best = Some((merit, snapshot(&x, Outcome::Stalled, pcost, pres, dres, gap, it)));
        }
        let best_it = best.as_ref().map_or(it, |(_, b)| b.iterations);
        if it == opts.max_iter {
            return finish(best, Outcome::IterationLimit);
        }
        if it >= best_it + STAGNATION {
            return finish(best, Outcome::Stalled);
        }

        let mu = gap / nu;
        let r_inv: Vec<DMatrix<f64>> = scalings.iter().map(|sc| sc.r_inv.clone()).collect();
        let Some(kkt) = Kkt::new(prog, &r_inv) else {
            if opts.verbose {
                eprintln!("ipm: normal matrix not positive definite");
            }
            return finish(best, Outcome::Stalled);
        };

        // direction for a given complementarity target T_k (in scaled space)
        let direction = |targets: &[DMatrix<f64>]| {
            let q: Vec<DMatrix<f64>> = scalings.iter().zip(targets).map(|(sc, t)| lyap_diag(&sc.lambda, t)).collect();
            // g = r_d − Bᵀ R⁻ᵀ (Q − R⁻¹ r_c R⁻ᵀ) R⁻¹
            let mix: Vec<DMatrix<f64>> = scalings
                .iter()
                .zip(&q)
                .zip(&r_c)
                .map(|((sc, qk), rc)| {
                    let rct = &sc.r_inv * rc * sc.r_inv.transpose();
                    sc.r_inv.transpose() * (qk - rct) * &sc.r_inv
                })
                .collect();
            let g = &r_d - prog.adjoint_sum(&mix);
            let (dx, ny) = kkt.solve(&(-g), &r_p);
            let dy = -ny;
            // scaled space: dS̃ = R⁻¹ (B dx + r_c) R⁻ᵀ, dZ̃ = Q − dS̃
            let dst: Vec<DMatrix<f64>> = prog
                .cones
                .iter()
                .zip(&scalings)
                .zip(&r_c)
                .map(|((k, sc), rc)| {
                    let ds = k.apply_linear(&dx.as_slice()[prog.groups[k.group].clone()]) + rc;
                    sym(&sc.r_inv * ds * sc.r_inv.transpose())
                })
                .collect();
            let dzt: Vec<DMatrix<f64>> = q.iter().zip(&dst).map(|(qk, d)| sym(qk - d)).collect();
            (dx, dy, dst, dzt)
        };
        let step_len = |dst: &[DMatrix<f64>], dzt: &[DMatrix<f64>]| -> f64 {
            let mut a: f64 = 1.0;
            for (sc, (ds, dz)) in scalings.iter().zip(dst.iter().zip(dzt)) {
                a = max_step(&sc.lambda, ds, a);
                a = max_step(&sc.lambda, dz, a);
            }
            a
        };

        // predictor
        let aff_targets: Vec<DMatrix<f64>> =
            scalings.iter().map(|sc| -DMatrix::from_diagonal(&sc.lambda.map(|l| l * l))).collect();
        let (_, _, dst_a, dzt_a) = direction(&aff_targets);
        let alpha_aff = step_len(&dst_a, &dzt_a);
        let gap_aff: f64 = scalings
            .iter()
            .zip(dst_a.iter().zip(&dzt_a))
            .map(|(sc, (ds, dz))| {
                let l = DMatrix::from_diagonal(&sc.lambda);
                (&l + ds * alpha_aff).dot(&(&l + dz * alpha_aff))
            })
            .sum();
        let sigma = (gap_aff.max(0.0) / gap).powi(3).clamp(0.0, 1.0);

        // corrector
        let targets: Vec<DMatrix<f64>> = scalings
            .iter()
            .zip(dst_a.iter().zip(&dzt_a))
            .map(|(sc, (a, b))| {
                let nk = sc.lambda.len();
                let corr = sym(a * b);
                DMatrix::identity(nk, nk) * (sigma * mu) - DMatrix::from_diagonal(&sc.lambda.map(|l| l * l)) - corr
            })
            .collect();
        let (dx, dy, dst, dzt) = direction(&targets);
        let mut alpha = (0.99 * step_len(&dst, &dzt)).min(1.0);
        let next = loop {
            if alpha < 1e-12 {
                if opts.verbose {
                    eprintln!("ipm: step length vanished");
                }
                return finish(best, Outcome::Stalled);
            }
            let next: Option<Vec<Scaling>> =
                scalings.iter().zip(dst.iter().zip(&dzt)).map(|(sc, (ds, dz))| rescale(sc, ds, dz, alpha)).collect();
            match next {
                Some(n) => break n,
                None => alpha *= 0.5,
            }
        };
        x += &dx * alpha;
        y += &dy * alpha;
        scalings = next;
    }
    unreachable!("loop returns on the last iteration")
}
