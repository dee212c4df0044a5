//! Integral identities and inequalities of the stationary theory, instability
//! thresholds, and competition-outcome prediction and classification.

use crate::domain::{
    integrate, linearly_independent, positive_hull_coefficients, SpatialField,
};
use crate::dynamics::{Scenario, State, TimeSeries};
use crate::error::{Error, Result};

/// Two-sided check outcome with its relative error.
#[derive(Debug, Clone)]
pub struct IdentityReport {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub relative_error: f64,
    pub satisfied: bool,
}

impl IdentityReport {
    fn equality(name: impl Into<String>, lhs: f64, rhs: f64, tol: f64) -> Self {
        let relative_error = rel_err(lhs, rhs);
        IdentityReport {
            name: name.into(),
            lhs,
            rhs,
            relative_error,
            satisfied: relative_error < tol,
        }
    }

    fn with_satisfied(name: impl Into<String>, lhs: f64, rhs: f64, satisfied: bool) -> Self {
        IdentityReport {
            name: name.into(),
            lhs,
            rhs,
            relative_error: rel_err(lhs, rhs),
            satisfied,
        }
    }
}

fn rel_err(lhs: f64, rhs: f64) -> f64 {
    (lhs - rhs).abs() / lhs.abs().max(rhs.abs()).max(1e-300)
}

/// Discrete analogue of `int weight |grad g|^2 / g^2 dx`: interface gradients
/// with arithmetic-mean weight and arithmetic-mean interface values of g^2,
/// matching the finite-volume inner product.
fn gradient_quotient_integral(g: &SpatialField, weight: &SpatialField) -> f64 {
    let h = g.grid().h();
    let gv = g.values();
    let wv = weight.values();
    let mut total = 0.0;
    for i in 0..gv.len() - 1 {
        let wm = 0.5 * (wv[i] + wv[i + 1]);
        let gsq = 0.5 * (gv[i] * gv[i] + gv[i + 1] * gv[i + 1]);
        let dg = (gv[i + 1] - gv[i]) / h;
        total += wm * dg * dg / gsq * h;
    }
    total
}

/// Stationary-state identity: `int r_eff P (u*/K - 1) = int a_eff |grad(u*/P)|^2/(u*/P)^2`
/// with `a_eff = d * a` and `r_eff = r_mult * r`. Satisfied below 1% relative error.
pub fn check_identity_eq_u2_1(
    u_star: &SpatialField,
    k: &SpatialField,
    p: &SpatialField,
    r_eff: &SpatialField,
    a_eff: &SpatialField,
) -> Result<IdentityReport> {
    u_star.require_positive("u_star")?;
    let lhs = integrate(&r_eff.zip_with(&p.zip_with(&u_star.zip_with(k, |u, kk| u / kk - 1.0), |pv, f| pv * f), |r, f| r * f));
    let w = u_star.zip_with(p, |u, pv| u / pv);
    let rhs = gradient_quotient_integral(&w, a_eff);
    Ok(IdentityReport::equality("identity_stationary_mass", lhs, rhs, 0.01))
}

/// Strict inequality `int r K > int r u*` with margin `1e-10 * int r K`.
pub fn check_inequality_lsteady1(
    name: impl Into<String>,
    star: &SpatialField,
    k: &SpatialField,
    r: &SpatialField,
) -> IdentityReport {
    let lhs = integrate(&r.zip_with(k, |a, b| a * b));
    let rhs = integrate(&r.zip_with(star, |a, b| a * b));
    IdentityReport::with_satisfied(name, lhs, rhs, lhs - rhs > 1e-10 * lhs.abs())
}

/// Identities satisfied by a converged coexistence state (shared growth `r`):
/// the zero balance, the nonnegative carrying-capacity deficits, and the
/// gradient-quotient identity of the second species.
pub fn check_coexistence_identities(
    u_s: &SpatialField,
    v_s: &SpatialField,
    k: &SpatialField,
    r: &SpatialField,
    q: &SpatialField,
    a2_eff: &SpatialField,
) -> Result<Vec<IdentityReport>> {
    u_s.require_positive("u_s")?;
    v_s.require_positive("v_s")?;
    let s = u_s.zip_with(v_s, |a, b| a + b);
    let deficit = s.zip_with(k, |sv, kv| 1.0 - sv / kv);
    let int_rk = integrate(&r.zip_with(k, |a, b| a * b));

    // sum of both stationary equations integrates to zero
    let balance = integrate(&r.zip_with(&s.zip_with(&deficit, |sv, f| sv * f), |rv, f| rv * f));
    let zero_balance = IdentityReport::with_satisfied(
        "coexistence_zero_balance",
        balance,
        0.0,
        balance.abs() < 1e-8 * int_rk.abs(),
    );

    // rK deficit is nonnegative, vanishing only at the ideal free pair
    let rk_deficit = integrate(&r.zip_with(&k.zip_with(&deficit, |kv, f| kv * f), |rv, f| rv * f));
    let deficit_sign = IdentityReport::with_satisfied(
        "coexistence_rk_deficit_nonnegative",
        rk_deficit,
        0.0,
        rk_deficit > -1e-10 * int_rk.abs(),
    );

    // the deficit equals its own square-weighted form
    let rk_deficit_sq = integrate(&r.zip_with(
        &k.zip_with(&deficit, |kv, f| kv * f * f),
        |rv, f| rv * f,
    ));
    let deficit_identity = IdentityReport::with_satisfied(
        "coexistence_deficit_identity",
        rk_deficit,
        rk_deficit_sq,
        (rk_deficit - rk_deficit_sq).abs() < 1e-8 * int_rk.abs(),
    );

    // gradient-quotient identity of the v equation
    let lhs = integrate(&r.zip_with(
        &q.zip_with(&deficit, |qv, f| -qv * f),
        |rv, f| rv * f,
    ));
    let wv = v_s.zip_with(q, |v, qv| v / qv);
    let rhs = gradient_quotient_integral(&wv, a2_eff);
    let grad_identity = IdentityReport::with_satisfied(
        "coexistence_v_gradient_identity",
        lhs,
        rhs,
        rhs >= 0.0 && (lhs - rhs).abs() <= (0.01 * lhs.abs().max(rhs.abs())).max(1e-8 * int_rk.abs()),
    );

    Ok(vec![zero_balance, deficit_sign, deficit_identity, grad_identity])
}

/// Instability thresholds of the first species against the resident v*.
#[derive(Debug, Clone, Copy)]
pub struct ThresholdReport {
    pub m: f64,
    pub d_star: f64,
    pub r_star: f64,
}

/// `M = int r K (1 - v*/K)`, `d* = r1 M / int a |grad sqrt(K/P)|^2`,
/// `r* = d1 / M * int a |grad sqrt(K/P)|^2`.
pub fn thresholds(scenario: &Scenario, v_star: &SpatialField) -> Result<ThresholdReport> {
    let k = &scenario.carrying_capacity;
    let r = &scenario.growth;
    let a = &scenario.advection;
    let p = &scenario.species_u.strategy;
    let m = integrate(&r.zip_with(&k.zip_with(&v_star.zip_with(k, |v, kk| 1.0 - v / kk), |kv, f| kv * f), |rv, f| rv * f));
    if m <= 0.0 {
        return Err(Error::HypothesisNotMet(format!(
            "threshold mass M = {m:.3e} is not positive (K, Q dependence?)"
        )));
    }
    let sqrt_kp = k.zip_with(p, |kv, pv| (kv / pv).sqrt());
    let gq = crate::domain::gradient_sq_weighted(&sqrt_kp, a);
    if gq == 0.0 {
        return Err(Error::HypothesisNotMet(
            "gradient integral vanishes: P is proportional to K".into(),
        ));
    }
    Ok(ThresholdReport {
        m,
        d_star: scenario.species_u.r_mult * m / gq,
        r_star: scenario.species_u.d * gq / m,
    })
}

/// Predicted or observed competition outcome.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Outcome {
    Coexistence { alpha: f64, beta: f64 },
    ExclusionUWins,
    ExclusionVWins,
    Extinction,
    Undetermined,
}

impl Outcome {
    /// Variant name used for `--expect` matching.
    pub fn variant(&self) -> &'static str {
        match self {
            Outcome::Coexistence { .. } => "coexistence",
            Outcome::ExclusionUWins => "exclusion_u",
            Outcome::ExclusionVWins => "exclusion_v",
            Outcome::Extinction => "extinction",
            Outcome::Undetermined => "undetermined",
        }
    }

    pub fn same_variant(&self, other: &Outcome) -> bool {
        self.variant() == other.variant()
    }

    /// Swap the roles of the two species.
    pub fn mirrored(&self) -> Outcome {
        match *self {
            Outcome::Coexistence { alpha, beta } => Outcome::Coexistence {
                alpha: beta,
                beta: alpha,
            },
            Outcome::ExclusionUWins => Outcome::ExclusionVWins,
            Outcome::ExclusionVWins => Outcome::ExclusionUWins,
            other => other,
        }
    }
}

impl std::fmt::Display for Outcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Outcome::Coexistence { alpha, beta } => write!(f, "CoexistenceAt({alpha};{beta})"),
            Outcome::ExclusionUWins => write!(f, "ExclusionUWins"),
            Outcome::ExclusionVWins => write!(f, "ExclusionVWins"),
            Outcome::Extinction => write!(f, "Extinction"),
            Outcome::Undetermined => write!(f, "Undetermined"),
        }
    }
}

/// Numeric tolerances used by prediction and classification.
#[derive(Debug, Clone, Copy)]
pub struct OutcomeConfig {
    /// Linear-independence tolerance for sampled fields.
    pub independence_tol: f64,
    /// Positive-hull membership tolerance.
    pub hull_tol: f64,
    /// Extinction threshold relative to the carrying capacity.
    pub extinct_rel: f64,
    /// Coexistence threshold relative to the carrying capacity.
    pub coexist_rel: f64,
    /// Hull-fit tolerance when labelling an observed coexistence state.
    pub fit_tol: f64,
}

impl Default for OutcomeConfig {
    fn default() -> Self {
        OutcomeConfig {
            independence_tol: 1e-8,
            hull_tol: 1e-8,
            extinct_rel: 1e-6,
            coexist_rel: 1e-3,
            fit_tol: 1e-3,
        }
    }
}

fn same_field(a: &SpatialField, b: &SpatialField) -> bool {
    a.values()
        .iter()
        .zip(b.values())
        .all(|(&x, &y)| (x - y).abs() <= 1e-12 * x.abs().max(y.abs()))
}

/// Decision procedure over the theorem hypotheses; `Undetermined` outside them.
pub fn predict_outcome(scenario: &Scenario, cfg: &OutcomeConfig) -> Result<Outcome> {
    let p = &scenario.species_u.strategy;
    let q = &scenario.species_v.strategy;
    let k = &scenario.carrying_capacity;
    let (d1, d2) = (scenario.species_u.d, scenario.species_v.d);
    let (r1, r2) = (scenario.species_u.r_mult, scenario.species_v.r_mult);
    let tol = cfg.independence_tol;

    if linearly_independent(p, q, tol)? {
        if let Some((alpha, beta)) = positive_hull_coefficients(k, p, q, cfg.hull_tol)? {
            return Ok(Outcome::Coexistence { alpha, beta });
        }
    }

    let p_prop_k = !linearly_independent(p, k, tol)?;
    let q_prop_k = !linearly_independent(q, k, tol)?;
    let rates_equal = d1 == d2 && r1 == r2;
    if p_prop_k && !q_prop_k && rates_equal {
        return Ok(Outcome::ExclusionUWins);
    }
    if q_prop_k && !p_prop_k && rates_equal {
        return Ok(Outcome::ExclusionVWins);
    }

    if same_field(p, q) && !p_prop_k {
        if r1 == r2 && d1 < d2 {
            return Ok(Outcome::ExclusionUWins);
        }
        if r1 == r2 && d2 < d1 {
            return Ok(Outcome::ExclusionVWins);
        }
        if d1 == d2 && r1 > r2 {
            return Ok(Outcome::ExclusionUWins);
        }
        if d1 == d2 && r2 > r1 {
            return Ok(Outcome::ExclusionVWins);
        }
    }

    Ok(Outcome::Undetermined)
}

fn mass_nonincreasing(series: &TimeSeries, pick: impl Fn(&crate::dynamics::Sample) -> f64) -> bool {
    let n = series.samples.len();
    if n < 2 {
        return true;
    }
    let start = (n as f64 * 0.9).floor() as usize;
    let start = start.min(n - 2);
    let masses: Vec<f64> = series.samples[start..].iter().map(&pick).collect();
    let peak = masses.iter().fold(0.0_f64, |m, &v| m.max(v.abs()));
    masses
        .windows(2)
        .all(|w| w[1] <= w[0] + 1e-12 * peak + 1e-300)
}

/// Classify a finished run. Inconclusive data yields `Undetermined`.
pub fn classify_outcome(
    scenario: &Scenario,
    final_state: &State,
    series: &TimeSeries,
    steady: bool,
    cfg: &OutcomeConfig,
) -> Outcome {
    let ksup = scenario.carrying_capacity.sup_norm();
    let sup_u = final_state.u.sup_norm();
    let sup_v = final_state.v.sup_norm();

    let extinct_u = sup_u < cfg.extinct_rel * ksup && mass_nonincreasing(series, |s| s.mass_u);
    let extinct_v = sup_v < cfg.extinct_rel * ksup && mass_nonincreasing(series, |s| s.mass_v);

    match (extinct_u, extinct_v) {
        (true, true) => Outcome::Extinction,
        (false, true) => Outcome::ExclusionUWins,
        (true, false) => Outcome::ExclusionVWins,
        (false, false) => {
            if steady && sup_u > cfg.coexist_rel * ksup && sup_v > cfg.coexist_rel * ksup {
                let total = final_state.u.zip_with(&final_state.v, |a, b| a + b);
                match positive_hull_coefficients(
                    &total,
                    &scenario.species_u.strategy,
                    &scenario.species_v.strategy,
                    cfg.fit_tol,
                ) {
                    Ok(Some((alpha, beta))) => Outcome::Coexistence { alpha, beta },
                    _ => Outcome::Undetermined,
                }
            } else {
                Outcome::Undetermined
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{parse_profile, Grid1D};
    use crate::dynamics::{Sample, SpeciesParams, StepperConfig};

    fn unit_grid(n: usize) -> Grid1D {
        Grid1D::unit(n).unwrap()
    }

    fn field(g: Grid1D, text: &str) -> SpatialField {
        SpatialField::sample(&parse_profile(text).unwrap(), g).unwrap()
    }

    fn scenario_with(g: Grid1D, k: &str, p: &str, q: &str, d: (f64, f64), rm: (f64, f64)) -> Scenario {
        let kf = field(g, k);
        Scenario {
            grid: g,
            carrying_capacity: kf.clone(),
            growth: SpatialField::constant(g, 1.0),
            advection: SpatialField::constant(g, 1.0),
            species_u: SpeciesParams {
                strategy: field(g, p),
                d: d.0,
                r_mult: rm.0,
            },
            species_v: SpeciesParams {
                strategy: field(g, q),
                d: d.1,
                r_mult: rm.1,
            },
            u0: kf.scale(0.3),
            v0: kf.scale(0.3),
            stepper: StepperConfig::default(),
        }
    }

    #[test]
    fn identity_vanishes_for_ideal_free_strategy() {
        let g = unit_grid(128);
        let k = field(g, "2 + 0.5*cos(pi*x)");
        let p = k.scale(0.5);
        let r = SpatialField::constant(g, 1.0);
        let a = SpatialField::constant(g, 1.0);
        // u* = K exactly when P is proportional to K
        let rep = check_identity_eq_u2_1(&k, &k, &p, &r, &a).unwrap();
        assert!(rep.lhs.abs() < 1e-10 && rep.rhs.abs() < 1e-10);
        assert!(rep.satisfied);
    }

    #[test]
    fn lsteady1_equality_when_u_star_is_k() {
        let g = unit_grid(64);
        let k = field(g, "2 + 0.5*cos(pi*x)");
        let r = SpatialField::constant(g, 1.0);
        let rep = check_inequality_lsteady1("lsteady1_u", &k, &k, &r);
        assert!(!rep.satisfied); // no strict margin at equality
        assert!(rep.relative_error < 1e-14);
    }

    #[test]
    fn thresholds_product_identity() {
        let g = unit_grid(128);
        let sc = scenario_with(
            g,
            "2 + 0.5*cos(pi*x)",
            "1 + 0.2*cos(2*pi*x)",
            "1",
            (0.7, 1.0),
            (1.3, 1.0),
        );
        // stand-in resident below K keeps M positive
        let v_star = sc.carrying_capacity.scale(0.9);
        let rep = thresholds(&sc, &v_star).unwrap();
        assert!(rep.m > 0.0);
        let prod = rep.d_star * rep.r_star;
        let expect = sc.species_u.d * sc.species_u.r_mult;
        assert!(
            (prod - expect).abs() <= 1e-14 * expect.abs(),
            "{prod} vs {expect}"
        );
    }

    #[test]
    fn thresholds_reject_proportional_strategy() {
        let g = unit_grid(64);
        let mut sc = scenario_with(g, "2 + 0.5*cos(pi*x)", "1", "1", (1.0, 1.0), (1.0, 1.0));
        sc.species_u.strategy = sc.carrying_capacity.scale(0.5);
        let v_star = sc.carrying_capacity.scale(0.9);
        assert!(matches!(
            thresholds(&sc, &v_star),
            Err(Error::HypothesisNotMet(_))
        ));
    }

    #[test]
    fn predict_coexistence_from_hull() {
        let g = unit_grid(64);
        let sc = scenario_with(
            g,
            "(1 + 0.5*cos(pi*x)) + 2",
            "1 + 0.5*cos(pi*x)",
            "1",
            (1.0, 1.0),
            (1.0, 1.0),
        );
        match predict_outcome(&sc, &OutcomeConfig::default()).unwrap() {
            Outcome::Coexistence { alpha, beta } => {
                assert!((alpha - 1.0).abs() < 1e-8 && (beta - 2.0).abs() < 1e-8);
            }
            other => panic!("expected coexistence, got {other:?}"),
        }
    }

    #[test]
    fn predict_ideal_free_exclusion() {
        let g = unit_grid(64);
        let mut sc = scenario_with(g, "2 + 0.5*cos(pi*x)", "1", "1", (1.0, 1.0), (1.0, 1.0));
        sc.species_u.strategy = sc.carrying_capacity.scale(0.5);
        assert_eq!(
            predict_outcome(&sc, &OutcomeConfig::default()).unwrap(),
            Outcome::ExclusionUWins
        );
    }

    #[test]
    fn predict_faster_diffuser_loses() {
        let g = unit_grid(64);
        let sc = scenario_with(g, "2 + cos(pi*x)", "1", "1", (1.0, 4.0), (1.0, 1.0));
        assert_eq!(
            predict_outcome(&sc, &OutcomeConfig::default()).unwrap(),
            Outcome::ExclusionUWins
        );
        let sc = scenario_with(g, "2 + cos(pi*x)", "1", "1", (4.0, 1.0), (1.0, 1.0));
        assert_eq!(
            predict_outcome(&sc, &OutcomeConfig::default()).unwrap(),
            Outcome::ExclusionVWins
        );
    }

    #[test]
    fn predict_higher_growth_wins() {
        let g = unit_grid(64);
        let sc = scenario_with(g, "2 + cos(pi*x)", "1", "1", (1.0, 1.0), (2.0, 1.0));
        assert_eq!(
            predict_outcome(&sc, &OutcomeConfig::default()).unwrap(),
            Outcome::ExclusionUWins
        );
    }

    #[test]
    fn predict_undetermined_outside_hypotheses() {
        // distinct strategies, K outside the hull, unequal rates
        let g = unit_grid(64);
        let sc = scenario_with(
            g,
            "2 + cos(2*pi*x)",
            "1 + 0.5*cos(pi*x)",
            "1",
            (1.0, 3.0),
            (1.0, 1.0),
        );
        assert_eq!(
            predict_outcome(&sc, &OutcomeConfig::default()).unwrap(),
            Outcome::Undetermined
        );
    }

    #[test]
    fn prediction_mirrors_under_relabeling() {
        let g = unit_grid(64);
        let cfg = OutcomeConfig::default();
        let sc = scenario_with(g, "2 + cos(pi*x)", "1", "1", (1.0, 4.0), (1.0, 1.0));
        let swapped = {
            let mut s = sc.clone();
            std::mem::swap(&mut s.species_u, &mut s.species_v);
            s
        };
        let a = predict_outcome(&sc, &cfg).unwrap();
        let b = predict_outcome(&swapped, &cfg).unwrap();
        assert_eq!(a.mirrored(), b);
    }

    fn mk_series(masses: &[(f64, f64)]) -> TimeSeries {
        TimeSeries {
            samples: masses
                .iter()
                .enumerate()
                .map(|(i, &(mu, mv))| Sample {
                    t: i as f64,
                    mass_u: mu,
                    mass_v: mv,
                    sup_u: mu,
                    sup_v: mv,
                    rate_u: 0.0,
                    rate_v: 0.0,
                })
                .collect(),
        }
    }

    #[test]
    fn classify_exclusion_and_constructed_coexistence() {
        let g = unit_grid(64);
        let sc = scenario_with(
            g,
            "(1 + 0.5*cos(pi*x)) + 2",
            "1 + 0.5*cos(pi*x)",
            "1",
            (1.0, 1.0),
            (1.0, 1.0),
        );
        let cfg = OutcomeConfig::default();
        let k = sc.carrying_capacity.clone();

        // final (K, 0): u wins
        let state = State {
            t: 100.0,
            u: k.clone(),
            v: SpatialField::constant(g, 0.0),
        };
        let series = mk_series(&[(2.0, 1.0), (2.0, 0.5), (2.0, 0.0), (2.0, 0.0)]);
        assert_eq!(
            classify_outcome(&sc, &state, &series, true, &cfg),
            Outcome::ExclusionUWins
        );

        // final (1*P, 2*Q): labelled with the fitted pair
        let state = State {
            t: 100.0,
            u: sc.species_u.strategy.clone(),
            v: sc.species_v.strategy.scale(2.0),
        };
        let series = mk_series(&[(1.0, 2.0), (1.0, 2.0)]);
        match classify_outcome(&sc, &state, &series, true, &cfg) {
            Outcome::Coexistence { alpha, beta } => {
                assert!((alpha - 1.0).abs() < 1e-8 && (beta - 2.0).abs() < 1e-8);
            }
            other => panic!("expected coexistence, got {other:?}"),
        }
    }

    #[test]
    fn classify_unresolved_transient_is_undetermined() {
        let g = unit_grid(64);
        let sc = scenario_with(
            g,
            "(1 + 0.5*cos(pi*x)) + 2",
            "1 + 0.5*cos(pi*x)",
            "1",
            (1.0, 1.0),
            (1.0, 1.0),
        );
        let cfg = OutcomeConfig::default();
        let state = State {
            t: 100.0,
            u: sc.carrying_capacity.scale(0.4),
            v: sc.carrying_capacity.scale(0.4),
        };
        let series = mk_series(&[(1.0, 1.0), (1.1, 1.1)]);
        assert_eq!(
            classify_outcome(&sc, &state, &series, false, &cfg),
            Outcome::Undetermined
        );
    }

    #[test]
    fn coexistence_identities_at_ideal_free_pair() {
        let g = unit_grid(128);
        let p = field(g, "1 + 0.5*cos(pi*x)");
        let q = SpatialField::constant(g, 1.0);
        let k = p.zip_with(&q, |a, b| a + 2.0 * b);
        let r = SpatialField::constant(g, 1.0);
        let a2 = SpatialField::constant(g, 1.0);
        let u_s = p.clone();
        let v_s = q.scale(2.0);
        let reports = check_coexistence_identities(&u_s, &v_s, &k, &r, &q, &a2).unwrap();
        for rep in &reports {
            assert!(rep.satisfied, "{}: lhs={} rhs={}", rep.name, rep.lhs, rep.rhs);
        }
        // zero balance and deficits vanish exactly at the ideal free pair
        assert!(reports[0].lhs.abs() < 1e-12);
        assert!(reports[1].lhs.abs() < 1e-12);
    }

    #[test]
    fn relative_error_definition() {
        let rep = IdentityReport::equality("x", 2.0, 1.0, 0.5);
        assert!((rep.relative_error - 0.5).abs() < 1e-15);
        let rep = IdentityReport::equality("x", 0.0, 0.0, 0.5);
        assert_eq!(rep.relative_error, 0.0);
    }
}
