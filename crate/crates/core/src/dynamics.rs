//! Time integration of the two-species competition system and the
//! single-species stationary problems.
//!
//! One semi-implicit step per species: dispersal implicit (one tridiagonal
//! solve), logistic reaction explicit. The stepping matrix `I - dt*L` is an
//! M-matrix, so positive right-hand sides stay positive.

use crate::domain::{integrate, Grid1D, SpatialField};
use crate::error::{Error, Result};
use crate::operator::DispersalOperator;
use crate::tridiag::TridiagFactor;

/// Dispersal strategy plus the per-species rate multipliers d and r_mult.
#[derive(Debug, Clone)]
pub struct SpeciesParams {
    pub strategy: SpatialField,
    pub d: f64,
    pub r_mult: f64,
}

impl SpeciesParams {
    fn validate(&self, label: &str) -> Result<()> {
        self.strategy.require_positive(label)?;
        if !(self.d > 0.0) || !self.d.is_finite() {
            return Err(Error::InvalidParam {
                name: "d",
                message: format!("must be positive, got {}", self.d),
            });
        }
        if !(self.r_mult > 0.0) || !self.r_mult.is_finite() {
            return Err(Error::InvalidParam {
                name: "r_mult",
                message: format!("must be positive, got {}", self.r_mult),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy)]
pub struct StepperConfig {
    pub dt: f64,
    pub t_end: f64,
    pub tol_steady: f64,
    pub record_every: usize,
}

impl Default for StepperConfig {
    fn default() -> Self {
        StepperConfig {
            dt: 1e-3,
            t_end: 5000.0,
            tol_steady: 1e-9,
            record_every: 1000,
        }
    }
}

impl StepperConfig {
    fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.t_end > 0.0 && self.dt <= self.t_end) {
            return Err(Error::InvalidParam {
                name: "dt",
                message: format!("need 0 < dt <= t_end, got dt={} t_end={}", self.dt, self.t_end),
            });
        }
        if !(self.tol_steady > 0.0) {
            return Err(Error::InvalidParam {
                name: "tol_steady",
                message: format!("must be positive, got {}", self.tol_steady),
            });
        }
        if self.record_every == 0 {
            return Err(Error::InvalidParam {
                name: "record_every",
                message: "must be at least 1".into(),
            });
        }
        Ok(())
    }
}

/// A full problem instance.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub grid: Grid1D,
    pub carrying_capacity: SpatialField,
    pub growth: SpatialField,
    pub advection: SpatialField,
    pub species_u: SpeciesParams,
    pub species_v: SpeciesParams,
    pub u0: SpatialField,
    pub v0: SpatialField,
    pub stepper: StepperConfig,
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        for (f, name) in [
            (&self.carrying_capacity, "K"),
            (&self.growth, "r"),
            (&self.advection, "a"),
        ] {
            if f.grid() != self.grid {
                return Err(Error::GridMismatch);
            }
            f.require_positive(name)?;
        }
        self.species_u.validate("P")?;
        self.species_v.validate("Q")?;
        if self.species_u.strategy.grid() != self.grid
            || self.species_v.strategy.grid() != self.grid
            || self.u0.grid() != self.grid
            || self.v0.grid() != self.grid
        {
            return Err(Error::GridMismatch);
        }
        for (f, name) in [(&self.u0, "u0"), (&self.v0, "v0")] {
            if f.min_value() < 0.0 {
                return Err(Error::InvalidParam {
                    name: "init",
                    message: format!("{name} must be nonnegative"),
                });
            }
        }
        self.stepper.validate()
    }

    pub fn operator_u(&self) -> Result<DispersalOperator> {
        DispersalOperator::assemble(&self.advection, &self.species_u.strategy, self.species_u.d)
    }

    pub fn operator_v(&self) -> Result<DispersalOperator> {
        DispersalOperator::assemble(&self.advection, &self.species_v.strategy, self.species_v.d)
    }

    /// Effective growth profile `r_mult * r` for one species.
    pub fn effective_growth(&self, species: Species) -> SpatialField {
        let m = match species {
            Species::U => self.species_u.r_mult,
            Species::V => self.species_v.r_mult,
        };
        self.growth.scale(m)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Species {
    U,
    V,
}

#[derive(Debug, Clone)]
pub struct State {
    pub t: f64,
    pub u: SpatialField,
    pub v: SpatialField,
}

#[derive(Debug, Clone, Copy)]
pub struct Sample {
    pub t: f64,
    pub mass_u: f64,
    pub mass_v: f64,
    pub sup_u: f64,
    pub sup_v: f64,
    pub rate_u: f64,
    pub rate_v: f64,
}

#[derive(Debug, Clone, Default)]
pub struct TimeSeries {
    pub samples: Vec<Sample>,
}

/// Prefactored semi-implicit stepper for one scenario.
pub struct Engine {
    dt: f64,
    factor_u: TridiagFactor,
    factor_v: TridiagFactor,
    r_eff_u: Vec<f64>,
    r_eff_v: Vec<f64>,
    k: Vec<f64>,
    min_k: f64,
    neg_floor: f64,
    // dt * max(r1, r2) * max(r), reused by the per-step reaction bound
    reaction_scale: f64,
    scratch: Vec<f64>,
}

fn implicit_factor(op: &DispersalOperator, dt: f64) -> Result<TridiagFactor> {
    let (sub, diag, sup) = op.bands();
    let n = diag.len();
    let msub: Vec<f64> = sub.iter().map(|&v| -dt * v).collect();
    let mdiag: Vec<f64> = diag.iter().map(|&v| 1.0 - dt * v).collect();
    let msup: Vec<f64> = sup.iter().map(|&v| -dt * v).collect();
    debug_assert!(mdiag.iter().all(|&v| v > 0.0));
    debug_assert_eq!(msub.len(), n);
    TridiagFactor::new(&msub, &mdiag, &msup)
}

impl Engine {
    pub fn new(scenario: &Scenario) -> Result<Self> {
        scenario.validate()?;
        let dt = scenario.stepper.dt;
        let op_u = scenario.operator_u()?;
        let op_v = scenario.operator_v()?;
        let factor_u = implicit_factor(&op_u, dt)?;
        let factor_v = implicit_factor(&op_v, dt)?;
        let r_eff_u = scenario.effective_growth(Species::U).values().to_vec();
        let r_eff_v = scenario.effective_growth(Species::V).values().to_vec();
        let k = scenario.carrying_capacity.values().to_vec();
        let min_k = scenario.carrying_capacity.min_value();
        let sup_k = scenario.carrying_capacity.sup_norm();
        let max_r = scenario.growth.max_value();
        let max_mult = scenario.species_u.r_mult.max(scenario.species_v.r_mult);
        Ok(Engine {
            dt,
            factor_u,
            factor_v,
            r_eff_u,
            r_eff_v,
            k,
            min_k,
            neg_floor: -1e-10 * sup_k,
            reaction_scale: dt * max_mult * max_r,
            scratch: vec![0.0; scenario.grid.n_cells()],
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Advance (u, v) by one step in place; returns the residual rates
    /// `(||du||_inf/dt, ||dv||_inf/dt)`.
    pub fn step_in_place(&mut self, u: &mut [f64], v: &mut [f64]) -> Result<(f64, f64)> {
        let n = u.len();
        let sup_u = sup(u);
        let sup_v = sup(v);
        let bound = self.reaction_scale * (1.0 + 2.0 * (sup_u + sup_v) / self.min_k);
        if bound >= 1.0 {
            return Err(Error::TimestepTooLarge {
                detail: format!(
                    "reaction bound dt*max(r1,r2)*max(r)*(1+2(|u|+|v|)/min K) = {bound:.3e} >= 1"
                ),
            });
        }

        let dt = self.dt;
        let rhs = &mut self.scratch;
        for i in 0..n {
            let crowd = 1.0 - (u[i] + v[i]) / self.k[i];
            rhs[i] = u[i] + dt * self.r_eff_u[i] * u[i] * crowd;
        }
        self.factor_u.solve_in_place(rhs);
        let mut rate_u: f64 = 0.0;
        for i in 0..n {
            rate_u = rate_u.max((rhs[i] - u[i]).abs());
        }
        rate_u /= dt;
        // v's reaction uses the pre-step u
        let new_u: Vec<f64> = rhs.clone();

        for i in 0..n {
            let crowd = 1.0 - (u[i] + v[i]) / self.k[i];
            rhs[i] = v[i] + dt * self.r_eff_v[i] * v[i] * crowd;
        }
        self.factor_v.solve_in_place(rhs);
        let mut rate_v: f64 = 0.0;
        for i in 0..n {
            rate_v = rate_v.max((rhs[i] - v[i]).abs());
        }
        rate_v /= dt;

        u.copy_from_slice(&new_u);
        v.copy_from_slice(rhs);

        let min_uv = sup_min(u).min(sup_min(v));
        if min_uv < self.neg_floor {
            return Err(Error::TimestepTooLarge {
                detail: format!(
                    "negativity {min_uv:.3e} beyond floor {:.3e}; reduce dt",
                    self.neg_floor
                ),
            });
        }
        Ok((rate_u, rate_v))
    }
}

fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn sup_min(v: &[f64]) -> f64 {
    v.iter().fold(f64::INFINITY, |m, &x| m.min(x))
}

/// One semi-implicit step of the full system.
pub fn step(state: &State, scenario: &Scenario) -> Result<State> {
    let mut engine = Engine::new(scenario)?;
    let mut u = state.u.values().to_vec();
    let mut v = state.v.values().to_vec();
    engine.step_in_place(&mut u, &mut v)?;
    Ok(State {
        t: state.t + scenario.stepper.dt,
        u: SpatialField::new(scenario.grid, u)?,
        v: SpatialField::new(scenario.grid, v)?,
    })
}

/// Number of consecutive sub-tolerance steps required before declaring steady.
const STEADY_STREAK: usize = 10;

/// Integrate to `t_end` or until both residual rates stay below
/// `tol_steady * max(||u||, ||v||, 1)` for [`STEADY_STREAK`] steps.
pub fn run(scenario: &Scenario) -> Result<(TimeSeries, State, bool)> {
    let mut engine = Engine::new(scenario)?;
    let dt = scenario.stepper.dt;
    let record_every = scenario.stepper.record_every;
    let tol = scenario.stepper.tol_steady;
    let n_steps = (scenario.stepper.t_end / dt).round() as usize;

    let mut u = scenario.u0.values().to_vec();
    let mut v = scenario.v0.values().to_vec();
    let mut series = TimeSeries::default();
    series.samples.push(make_sample(
        0.0,
        &u,
        &v,
        scenario.grid,
        0.0,
        0.0,
    ));

    let mut steady = false;
    let mut streak = 0usize;
    let mut t = 0.0;
    let mut last_recorded_t = 0.0;
    for k in 0..n_steps {
        let (rate_u, rate_v) = engine.step_in_place(&mut u, &mut v)?;
        t = (k + 1) as f64 * dt;
        if (k + 1) % record_every == 0 {
            series
                .samples
                .push(make_sample(t, &u, &v, scenario.grid, rate_u, rate_v));
            last_recorded_t = t;
        }
        let scale = sup(&u).max(sup(&v)).max(1.0);
        if rate_u < tol * scale && rate_v < tol * scale {
            streak += 1;
            if streak >= STEADY_STREAK {
                steady = true;
                if last_recorded_t < t {
                    series
                        .samples
                        .push(make_sample(t, &u, &v, scenario.grid, rate_u, rate_v));
                }
                break;
            }
        } else {
            streak = 0;
        }
        if k + 1 == n_steps && last_recorded_t < t {
            series
                .samples
                .push(make_sample(t, &u, &v, scenario.grid, rate_u, rate_v));
        }
    }

    let state = State {
        t,
        u: SpatialField::new(scenario.grid, u)?,
        v: SpatialField::new(scenario.grid, v)?,
    };
    Ok((series, state, steady))
}

fn make_sample(t: f64, u: &[f64], v: &[f64], grid: Grid1D, rate_u: f64, rate_v: f64) -> Sample {
    let uf = SpatialField::new(grid, u.to_vec()).expect("finite state");
    let vf = SpatialField::new(grid, v.to_vec()).expect("finite state");
    Sample {
        t,
        mass_u: integrate(&uf),
        mass_v: integrate(&vf),
        sup_u: sup(u),
        sup_v: sup(v),
        rate_u,
        rate_v,
    }
}

/// Converged single-species stationary profile.
#[derive(Debug, Clone)]
pub struct SteadySolve {
    pub field: SpatialField,
    pub residual: f64,
    pub t: f64,
}

/// Sup-norm residual of the stationary single-species equation
/// `L u + r_eff u (1 - u/K) = 0`.
pub fn stationary_residual(
    op: &DispersalOperator,
    r_eff: &SpatialField,
    k: &SpatialField,
    u: &SpatialField,
) -> Result<f64> {
    let lu = op.apply(u)?;
    let mut resid: f64 = 0.0;
    for i in 0..u.len() {
        let reaction = r_eff.values()[i] * u.values()[i] * (1.0 - u.values()[i] / k.values()[i]);
        resid = resid.max((lu.values()[i] + reaction).abs());
    }
    Ok(resid)
}

/// Time-march one species alone (the other identically zero) to its
/// stationary profile. Initial guess defaults to K.
pub fn solve_single_steady(
    scenario: &Scenario,
    species: Species,
    initial: Option<&SpatialField>,
) -> Result<SteadySolve> {
    scenario.validate()?;
    let params = match species {
        Species::U => &scenario.species_u,
        Species::V => &scenario.species_v,
    };
    let op = DispersalOperator::assemble(&scenario.advection, &params.strategy, params.d)?;
    let r_eff = scenario.effective_growth(species);
    let k = &scenario.carrying_capacity;
    let dt = scenario.stepper.dt;
    let tol = scenario.stepper.tol_steady;
    let factor = implicit_factor(&op, dt)?;

    let mut u = match initial {
        Some(f) => {
            if f.grid() != scenario.grid {
                return Err(Error::GridMismatch);
            }
            f.require_positive("initial guess")?;
            f.values().to_vec()
        }
        None => k.values().to_vec(),
    };

    let n = u.len();
    let kv = k.values();
    let rv = r_eff.values();
    let resid_bound = 1e-8 * r_eff.zip_with(k, |a, b| a * b).sup_norm();
    let n_steps = (scenario.stepper.t_end / dt).round() as usize;
    let mut streak = 0usize;
    let mut rhs = vec![0.0; n];
    let mut t = 0.0;
    for step_idx in 0..n_steps {
        for i in 0..n {
            rhs[i] = u[i] + dt * rv[i] * u[i] * (1.0 - u[i] / kv[i]);
        }
        factor.solve_in_place(&mut rhs);
        let mut rate: f64 = 0.0;
        for i in 0..n {
            rate = rate.max((rhs[i] - u[i]).abs());
        }
        rate /= dt;
        std::mem::swap(&mut u, &mut rhs);
        t = (step_idx + 1) as f64 * dt;
        if rate < tol * sup(&u).max(1.0) {
            streak += 1;
            if streak >= STEADY_STREAK {
                let field = SpatialField::new(scenario.grid, u.clone())?;
                let residual = stationary_residual(&op, &r_eff, k, &field)?;
                if residual <= resid_bound {
                    return Ok(SteadySolve { field, residual, t });
                }
                // rate criterion met but residual still too large: keep going
                streak = 0;
            }
        } else {
            streak = 0;
        }
    }
    let field = SpatialField::new(scenario.grid, u)?;
    let residual = stationary_residual(&op, &r_eff, k, &field)?;
    Err(Error::NotConverged { t, residual })
}
