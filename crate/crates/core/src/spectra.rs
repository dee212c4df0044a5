//! Principal eigenvalues of the linearized dispersal-plus-potential operators
//! `psi -> L psi + c psi` and the matching Rayleigh quotients.
//!
//! In w = psi/P coordinates the discrete problem is a symmetric generalized
//! eigenproblem `A w = sigma B w` with `B = diag(h P)` positive, reduced here
//! to a symmetric tridiagonal matrix `C = B^{-1/2} (A + h diag(cP)) B^{-1/2}`.
//! The largest eigenvalue is located by Sturm-count bisection (deterministic
//! to rounding) and the eigenvector by inverse iteration, whose iterates stay
//! entrywise positive because the shifted matrix is an M-matrix.

use crate::domain::{positive_hull_coefficients, SpatialField};
use crate::dynamics::{Scenario, Species};
use crate::error::{Error, Result};
use crate::operator::DispersalOperator;

/// Linearized sub-problem: dispersal operator plus a potential.
#[derive(Debug, Clone)]
pub struct LinearizedProblem {
    pub op: DispersalOperator,
    pub potential: SpatialField,
}

impl LinearizedProblem {
    pub fn new(op: DispersalOperator, potential: SpatialField) -> Result<Self> {
        if op.grid() != potential.grid() {
            return Err(Error::GridMismatch);
        }
        Ok(LinearizedProblem { op, potential })
    }
}

/// Principal eigenvalue and positive eigenfunction (normalized to max 1).
#[derive(Debug, Clone)]
pub struct EigenResult {
    pub sigma1: f64,
    pub psi: SpatialField,
    pub residual: f64,
    pub iterations: usize,
}

const MAX_ITERATIONS: usize = 10_000;

/// Symmetric tridiagonal reduction (diag, off) of a linearized problem.
fn symmetric_tridiagonal(problem: &LinearizedProblem) -> (Vec<f64>, Vec<f64>) {
    let grid = problem.op.grid();
    let n = grid.n_cells();
    let h = grid.h();
    let p = problem.op.strategy().values();
    let c = problem.potential.values();
    let g = problem.op.conductances();

    let mut diag = vec![0.0; n];
    let mut off = vec![0.0; n - 1];
    for i in 0..n {
        let gm = if i > 0 { g[i - 1] } else { 0.0 };
        let gp = if i < n - 1 { g[i] } else { 0.0 };
        diag[i] = c[i] - (gm + gp) / (h * p[i]);
    }
    for i in 0..n - 1 {
        off[i] = g[i] / (h * (p[i] * p[i + 1]).sqrt());
    }
    (diag, off)
}

/// Number of eigenvalues strictly below `lambda` (Sturm count via LDL^T).
fn count_below(diag: &[f64], off: &[f64], lambda: f64, pivmin: f64) -> usize {
    let mut count = 0;
    let mut d = diag[0] - lambda;
    if d.abs() < pivmin {
        d = -pivmin;
    }
    if d < 0.0 {
        count += 1;
    }
    for i in 1..diag.len() {
        d = (diag[i] - lambda) - off[i - 1] * off[i - 1] / d;
        if d.abs() < pivmin {
            d = -pivmin;
        }
        if d < 0.0 {
            count += 1;
        }
    }
    count
}

/// Bisect for the largest eigenvalue. Returns (lo, hi, iterations) with the
/// eigenvalue bracketed at a few-ulp width.
fn bisect_largest(diag: &[f64], off: &[f64]) -> (f64, f64, usize) {
    let n = diag.len();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let radius =
            if i > 0 { off[i - 1].abs() } else { 0.0 } + if i < n - 1 { off[i].abs() } else { 0.0 };
        lo = lo.min(diag[i] - radius);
        hi = hi.max(diag[i] + radius);
    }
    let scale = lo.abs().max(hi.abs()).max(1e-300);
    let pivmin = f64::MIN_POSITIVE.max(1e-30 * scale);
    let mut iterations = 0;
    while hi - lo > 2.0 * f64::EPSILON * lo.abs().max(hi.abs()) + 4.0 * f64::MIN_POSITIVE {
        iterations += 1;
        if iterations > 200 {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if count_below(diag, off, mid, pivmin) >= n {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    (lo, hi, iterations)
}

fn tri_mat_vec(diag: &[f64], off: &[f64], x: &[f64]) -> Vec<f64> {
    let n = diag.len();
    (0..n)
        .map(|i| {
            let mut v = diag[i] * x[i];
            if i > 0 {
                v += off[i - 1] * x[i - 1];
            }
            if i < n - 1 {
                v += off[i] * x[i + 1];
            }
            v
        })
        .collect()
}

/// Solve `(shift I - C) z = y` by Thomas elimination. For `shift` above the
/// spectrum this is a positive-definite M-matrix, so elimination is stable and
/// positive right-hand sides give positive solutions.
fn shifted_solve(diag: &[f64], off: &[f64], shift: f64, y: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let tiny = 1e-305;
    let guard = |v: f64| if v.abs() < tiny { tiny } else { v };
    let mut main: Vec<f64> = (0..n).map(|i| shift - diag[i]).collect();
    let mut rhs = y.to_vec();
    for i in 1..n {
        let m = -off[i - 1] / guard(main[i - 1]);
        main[i] -= m * -off[i - 1];
        rhs[i] -= m * rhs[i - 1];
    }
    let mut z = vec![0.0; n];
    z[n - 1] = rhs[n - 1] / guard(main[n - 1]);
    for i in (0..n - 1).rev() {
        z[i] = (rhs[i] + off[i] * z[i + 1]) / guard(main[i]);
    }
    z
}

/// Compute the principal eigenvalue and eigenfunction of `L psi + c psi`.
pub fn principal_eigen(problem: &LinearizedProblem) -> Result<EigenResult> {
    let grid = problem.op.grid();
    let n = grid.n_cells();
    let h = grid.h();
    let (diag, off) = symmetric_tridiagonal(problem);

    let (lo, hi, bisect_iters) = bisect_largest(&diag, &off);
    let scale = diag.iter().fold(0.0_f64, |m, &v| m.max(v.abs()))
        + 2.0 * off.iter().fold(0.0_f64, |m, &v| m.max(v.abs()));
    let shift = hi + 16.0 * f64::EPSILON * scale.max(1.0);

    let mut y = vec![1.0 / (n as f64).sqrt(); n];
    let mut best_y = y.clone();
    let mut best_rho = 0.5 * (lo + hi);
    let mut best_resid = f64::INFINITY;
    let mut iterations = bisect_iters;
    for inv_it in 0..MAX_ITERATIONS {
        iterations += 1;
        let z = shifted_solve(&diag, &off, shift, &y);
        let norm = z.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !norm.is_finite() || norm == 0.0 {
            return Err(Error::EigenNotConverged { iterations });
        }
        y = z.iter().map(|v| v / norm).collect();
        let cy = tri_mat_vec(&diag, &off, &y);
        let rho: f64 = y.iter().zip(&cy).map(|(a, b)| a * b).sum();
        let resid = y
            .iter()
            .zip(&cy)
            .fold(0.0_f64, |m, (&yi, &cyi)| m.max((cyi - rho * yi).abs()));
        if resid < best_resid {
            best_resid = resid;
            best_rho = rho;
            best_y = y.clone();
        }
        let y_sup = y.iter().fold(0.0_f64, |m, &v| m.max(v.abs()));
        // stop at the rounding floor, or once progress stalls
        if resid <= 8.0 * f64::EPSILON * scale.max(1.0) * y_sup {
            break;
        }
        if inv_it >= 2 && resid > 0.5 * best_resid {
            break;
        }
    }
    let sigma = best_rho;

    // map back: psi = P w with w = y / sqrt(h P)
    let p = problem.op.strategy().values();
    let mut psi: Vec<f64> = (0..n).map(|i| best_y[i] * (p[i] / h).sqrt()).collect();
    if psi.iter().sum::<f64>() < 0.0 {
        for v in &mut psi {
            *v = -*v;
        }
    }
    let max = psi.iter().fold(0.0_f64, |m, &v| m.max(v.abs()));
    for v in &mut psi {
        *v /= max;
    }
    let psi = SpatialField::new(grid, psi)?;

    // honest residual in psi coordinates through the flux-form operator
    let lpsi = problem.op.apply(&psi)?;
    let c = problem.potential.values();
    let mut residual: f64 = 0.0;
    for i in 0..n {
        residual = residual
            .max((lpsi.values()[i] + c[i] * psi.values()[i] - sigma * psi.values()[i]).abs());
    }
    // the nominal bound degenerates when c and sigma both vanish; floor it
    // at the rounding scale of the reduced matrix
    let c_sup = problem.potential.sup_norm();
    let floor = 64.0 * f64::EPSILON * scale * psi.sup_norm();
    let bound = (1e-8 * (c_sup + sigma.abs()) * psi.sup_norm()).max(floor);
    if !(psi.min_value() > 0.0) || residual > bound {
        return Err(Error::EigenNotConverged { iterations });
    }

    Ok(EigenResult {
        sigma1: sigma,
        psi,
        residual,
        iterations,
    })
}

/// Discrete Rayleigh quotient
/// `[-sum G (dw)^2 + h sum c t^2/P] / (h sum t^2/P)` with `w = t/P`;
/// bounded above by the principal eigenvalue of the same problem.
pub fn rayleigh_quotient(problem: &LinearizedProblem, trial: &SpatialField) -> Result<f64> {
    let grid = problem.op.grid();
    if trial.grid() != grid {
        return Err(Error::GridMismatch);
    }
    let n = grid.n_cells();
    let h = grid.h();
    let p = problem.op.strategy().values();
    let t = trial.values();
    let c = problem.potential.values();
    let g = problem.op.conductances();

    let mut grad_term = 0.0;
    for i in 0..n - 1 {
        let dw = t[i + 1] / p[i + 1] - t[i] / p[i];
        grad_term += g[i] * dw * dw;
    }
    let mut pot = 0.0;
    let mut denom = 0.0;
    for i in 0..n {
        let t2p = t[i] * t[i] / p[i];
        pot += c[i] * t2p;
        denom += t2p;
    }
    if denom == 0.0 {
        return Err(Error::ZeroField);
    }
    Ok((-grad_term + h * pot) / (h * denom))
}

/// Where a witness trial function certifies instability.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WitnessSite {
    /// Invasion problem of v at the semi-trivial state (u*, 0).
    SemiTrivialU,
    /// Invasion problem of u at the semi-trivial state (0, v*).
    SemiTrivialV,
}

#[derive(Debug, Clone)]
pub struct Witness {
    pub name: String,
    pub site: WitnessSite,
    pub quotient: f64,
}

/// Eigenvalues of the invasion linearizations at the trivial and both
/// semi-trivial states, plus Rayleigh lower-bound witnesses.
#[derive(Debug, Clone)]
pub struct InstabilityReport {
    pub zero_u: EigenResult,
    pub zero_v: EigenResult,
    pub invader_v_at_semi_u: EigenResult,
    pub invader_u_at_semi_v: EigenResult,
    pub witnesses: Vec<Witness>,
}

/// Build the invasion linearization of one species against a resident
/// profile: operator of the invader, potential `r_eff (1 - resident/K)`.
pub fn invasion_problem(
    scenario: &Scenario,
    invader: Species,
    resident: &SpatialField,
) -> Result<LinearizedProblem> {
    let op = match invader {
        Species::U => scenario.operator_u()?,
        Species::V => scenario.operator_v()?,
    };
    let r_eff = scenario.effective_growth(invader);
    let k = &scenario.carrying_capacity;
    let factor = resident.zip_with(k, |res, kv| 1.0 - res / kv);
    let potential = r_eff.zip_with(&factor, |r, f| r * f);
    LinearizedProblem::new(op, potential)
}

pub fn instability_certificates(
    scenario: &Scenario,
    u_star: &SpatialField,
    v_star: &SpatialField,
) -> Result<InstabilityReport> {
    let grid = scenario.grid;
    let zero = SpatialField::constant(grid, 0.0);
    let zero_u = principal_eigen(&invasion_problem(scenario, Species::U, &zero)?)?;
    let zero_v = principal_eigen(&invasion_problem(scenario, Species::V, &zero)?)?;

    let prob_semi_u = invasion_problem(scenario, Species::V, u_star)?;
    let prob_semi_v = invasion_problem(scenario, Species::U, v_star)?;
    let invader_v_at_semi_u = principal_eigen(&prob_semi_u)?;
    let invader_u_at_semi_v = principal_eigen(&prob_semi_v)?;

    let p = &scenario.species_u.strategy;
    let q = &scenario.species_v.strategy;
    let k = &scenario.carrying_capacity;
    let mut witnesses = Vec::new();

    if let Ok(Some((alpha, beta))) = positive_hull_coefficients(k, p, q, 1e-8) {
        witnesses.push(Witness {
            name: "sqrt_beta_Q".into(),
            site: WitnessSite::SemiTrivialU,
            quotient: rayleigh_quotient(&prob_semi_u, &q.scale(beta.sqrt()))?,
        });
        witnesses.push(Witness {
            name: "sqrt_alpha_P".into(),
            site: WitnessSite::SemiTrivialV,
            quotient: rayleigh_quotient(&prob_semi_v, &p.scale(alpha.sqrt()))?,
        });
    }

    let sqrt_kp = k.zip_with(p, |a, b| (a * b).sqrt());
    witnesses.push(Witness {
        name: "sqrt_KP".into(),
        site: WitnessSite::SemiTrivialV,
        quotient: rayleigh_quotient(&prob_semi_v, &sqrt_kp)?,
    });

    let same_strategy = p
        .values()
        .iter()
        .zip(q.values())
        .all(|(&a, &b)| (a - b).abs() <= 1e-12 * a.abs().max(b.abs()));
    if same_strategy {
        witnesses.push(Witness {
            name: "v_star".into(),
            site: WitnessSite::SemiTrivialV,
            quotient: rayleigh_quotient(&prob_semi_v, v_star)?,
        });
    }

    Ok(InstabilityReport {
        zero_u,
        zero_v,
        invader_v_at_semi_u,
        invader_u_at_semi_v,
        witnesses,
    })
}

/// Sup norm of `div[a grad(K/P)]` on the grid: the non-correspondence
/// predicate is satisfied when this is materially nonzero.
pub fn noncorrespondence(a: &SpatialField, p: &SpatialField, k: &SpatialField) -> Result<f64> {
    let op = DispersalOperator::assemble(a, p, 1.0)?;
    Ok(op.apply(k)?.sup_norm())
}
