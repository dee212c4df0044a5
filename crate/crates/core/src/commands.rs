//! Command implementations behind the `disperse` CLI: simulate, steady,
//! eigen, verify, sweep. Each command loads a scenario file, runs the
//! requested pipeline, writes deterministic CSV outputs plus a manifest, and
//! reports `name,status,detail` lines.

use std::path::{Path, PathBuf};
use std::time::Instant;

use crate::analysis::{
    check_coexistence_identities, check_identity_eq_u2_1, check_inequality_lsteady1,
    classify_outcome, predict_outcome, thresholds, Outcome, OutcomeConfig,
};
use crate::domain::{linearly_independent, SpatialField};
use crate::dynamics::{run, solve_single_steady, Scenario, Species, SteadySolve};
use crate::error::{Error, Result};
use crate::report::{
    checks_csv, eigen_csv, field_csv, fmt_f64, profiles_csv, timeseries_csv, CheckRow, ReportLine,
    RunManifest, Status,
};
use crate::scenario::{ResolvedScenario, ScenarioDoc};
use crate::spectra::{
    instability_certificates, invasion_problem, principal_eigen, noncorrespondence,
    rayleigh_quotient, WitnessSite,
};

/// Common CLI options.
#[derive(Debug, Clone, Default)]
pub struct CommandOpts {
    pub out_dir: PathBuf,
    pub expect: Option<String>,
    pub seed: Option<u64>,
    pub n_cells: Option<usize>,
    pub dt: Option<f64>,
}

/// What a command produced: its exit code and the printed report lines.
#[derive(Debug)]
pub struct CommandOutput {
    pub exit_code: i32,
    pub lines: Vec<ReportLine>,
}

fn load(path: &Path, opts: &CommandOpts) -> Result<(ResolvedScenario, ScenarioDoc)> {
    let text = std::fs::read_to_string(path)?;
    let mut doc = ScenarioDoc::parse(&text)?;
    if let Some(seed) = opts.seed {
        doc.set("run", "seed", seed.to_string());
    }
    if let Some(n) = opts.n_cells {
        doc.set("grid", "n_cells", n.to_string());
    }
    if let Some(dt) = opts.dt {
        doc.set("stepper", "dt", format!("{dt}"));
    }
    let resolved = crate::scenario::resolve(&doc)?;
    Ok((resolved, doc))
}

fn write_outputs(out_dir: &Path, files: &[(&str, String)]) -> Result<Vec<String>> {
    std::fs::create_dir_all(out_dir)?;
    let mut written = Vec::new();
    for (name, content) in files {
        crate::report::write_text(&out_dir.join(name), content)?;
        written.push(name.to_string());
    }
    Ok(written)
}

fn manifest(
    out_dir: &Path,
    hash: u64,
    command: &str,
    outputs: Vec<String>,
    started: Instant,
    summary: &str,
) -> Result<()> {
    let m = RunManifest {
        scenario_hash: hash,
        command: command.to_string(),
        outputs,
        wall_ms: started.elapsed().as_millis(),
        summary: summary.to_string(),
    };
    crate::report::write_text(&out_dir.join("manifest.txt"), &m.text())?;
    Ok(())
}

/// Run the dynamics, classify the outcome, and emit timeseries/profile CSVs.
pub fn cmd_simulate(path: &Path, opts: &CommandOpts) -> Result<CommandOutput> {
    let started = Instant::now();
    let (rs, _) = load(path, opts)?;
    let scenario = &rs.scenario;
    let (series, final_state, steady) = run(scenario)?;
    let cfg = OutcomeConfig::default();
    let outcome = classify_outcome(scenario, &final_state, &series, steady, &cfg);

    let mut files: Vec<(&str, String)> = Vec::new();
    if rs.run.outputs.iter().any(|o| o == "timeseries") {
        files.push(("timeseries.csv", timeseries_csv(&series)));
    }
    if rs.run.outputs.iter().any(|o| o == "profiles") {
        files.push((
            "profiles.csv",
            profiles_csv(scenario.grid, &final_state.u, &final_state.v),
        ));
    }

    let mut lines = vec![
        ReportLine::new(
            "run",
            Status::Info,
            format!(
                "t_final={} steady={steady} samples={}",
                final_state.t,
                series.samples.len()
            ),
        ),
        ReportLine::new("outcome", Status::Info, outcome.to_string()),
    ];

    let mut exit_code = 0;
    if let Some(expect) = &opts.expect {
        let matched = outcome.variant() == expect.as_str();
        lines.push(ReportLine::new(
            "expectation",
            if matched { Status::Pass } else { Status::Fail },
            format!("expected {expect}, observed {}", outcome.variant()),
        ));
        if !matched {
            exit_code = 2;
        }
    }

    let report = lines_csv(&lines);
    files.push(("report.csv", report));
    let written = write_outputs(&opts.out_dir, &files)?;
    manifest(
        &opts.out_dir,
        rs.hash,
        "simulate",
        written,
        started,
        &outcome.to_string(),
    )?;
    Ok(CommandOutput { exit_code, lines })
}

/// Solve both single-species stationary problems.
pub fn cmd_steady(path: &Path, opts: &CommandOpts) -> Result<CommandOutput> {
    let started = Instant::now();
    let (rs, _) = load(path, opts)?;
    let scenario = &rs.scenario;
    let u = solve_single_steady(scenario, Species::U, None)?;
    let v = solve_single_steady(scenario, Species::V, None)?;

    let lines = vec![
        ReportLine::new(
            "steady_u",
            Status::Pass,
            format!("residual={} t={}", fmt_f64(u.residual), u.t),
        ),
        ReportLine::new(
            "steady_v",
            Status::Pass,
            format!("residual={} t={}", fmt_f64(v.residual), v.t),
        ),
    ];
    let files = [
        ("steady_u.csv", field_csv(&u.field)),
        ("steady_v.csv", field_csv(&v.field)),
        ("report.csv", lines_csv(&lines)),
    ];
    let written = write_outputs(&opts.out_dir, &files)?;
    manifest(&opts.out_dir, rs.hash, "steady", written, started, "ok")?;
    Ok(CommandOutput {
        exit_code: 0,
        lines,
    })
}

/// Principal eigenvalues of the invasion linearizations at the trivial and
/// both semi-trivial states.
pub fn cmd_eigen(path: &Path, opts: &CommandOpts) -> Result<CommandOutput> {
    let started = Instant::now();
    let (rs, _) = load(path, opts)?;
    let scenario = &rs.scenario;
    let u = solve_single_steady(scenario, Species::U, None)?;
    let v = solve_single_steady(scenario, Species::V, None)?;
    let report = instability_certificates(scenario, &u.field, &v.field)?;

    let mut lines = Vec::new();
    let mut eigen_rows = String::from("name,sigma1,residual,iterations\n");
    for (name, res) in [
        ("zero_u", &report.zero_u),
        ("zero_v", &report.zero_v),
        ("semi_u_invader_v", &report.invader_v_at_semi_u),
        ("semi_v_invader_u", &report.invader_u_at_semi_v),
    ] {
        eigen_rows.push_str(&format!(
            "{name},{},{},{}\n",
            fmt_f64(res.sigma1),
            fmt_f64(res.residual),
            res.iterations
        ));
        lines.push(ReportLine::new(
            format!("eigen_{name}"),
            Status::Info,
            format!("sigma1={},residual={},iterations={}", fmt_f64(res.sigma1), fmt_f64(res.residual), res.iterations),
        ));
    }
    for w in &report.witnesses {
        lines.push(ReportLine::new(
            format!("witness_{}", w.name),
            Status::Info,
            format!("site={:?} quotient={}", w.site, fmt_f64(w.quotient)),
        ));
    }

    let files = [
        ("eigen_zero_u.csv", eigen_csv(&report.zero_u)),
        ("eigen_zero_v.csv", eigen_csv(&report.zero_v)),
        ("eigen_semi_u.csv", eigen_csv(&report.invader_v_at_semi_u)),
        ("eigen_semi_v.csv", eigen_csv(&report.invader_u_at_semi_v)),
        ("eigen_report.csv", eigen_rows),
        ("report.csv", lines_csv(&lines)),
    ];
    let written = write_outputs(&opts.out_dir, &files)?;
    manifest(&opts.out_dir, rs.hash, "eigen", written, started, "ok")?;
    Ok(CommandOutput {
        exit_code: 0,
        lines,
    })
}

fn lines_csv(lines: &[ReportLine]) -> String {
    let mut out = String::from("name,status,detail\n");
    for l in lines {
        out.push_str(&l.line());
        out.push('\n');
    }
    out
}

/// Everything `verify` needs to keep around per check.
pub struct VerifyReport {
    pub rows: Vec<CheckRow>,
    pub lines: Vec<ReportLine>,
    pub passed: bool,
}

struct Verifier {
    rows: Vec<CheckRow>,
    lines: Vec<ReportLine>,
    failed: usize,
}

impl Verifier {
    fn new() -> Self {
        Verifier {
            rows: Vec::new(),
            lines: Vec::new(),
            failed: 0,
        }
    }

    fn check(&mut self, name: &str, lhs: f64, rhs: f64, rel_err: f64, ok: bool, detail: String) {
        self.rows.push(CheckRow {
            name: name.to_string(),
            lhs,
            rhs,
            rel_err,
            satisfied: ok,
        });
        let status = if ok { Status::Pass } else { Status::Fail };
        if !ok {
            self.failed += 1;
        }
        self.lines.push(ReportLine::new(name, status, detail));
    }

    fn check_report(&mut self, rep: &crate::analysis::IdentityReport) {
        self.check(
            &rep.name.clone(),
            rep.lhs,
            rep.rhs,
            rep.relative_error,
            rep.satisfied,
            format!("lhs={} rhs={}", fmt_f64(rep.lhs), fmt_f64(rep.rhs)),
        );
    }

    fn skip(&mut self, name: &str, reason: impl Into<String>) {
        self.lines
            .push(ReportLine::new(name, Status::Skip, reason.into()));
    }

    fn info(&mut self, name: &str, detail: impl Into<String>) {
        self.lines
            .push(ReportLine::new(name, Status::Info, detail.into()));
    }
}

/// Run the full verification battery applicable to a scenario: operator
/// structure, stationary solves, identities and inequalities, thresholds,
/// eigenvalue signs, and prediction against the observed outcome.
pub fn verify_scenario(rs: &ResolvedScenario) -> Result<VerifyReport> {
    let sc = &rs.scenario;
    let cfg = OutcomeConfig::default();
    let mut v = Verifier::new();
    let tol_ind = cfg.independence_tol;

    // operator structure
    let op_u = sc.operator_u()?;
    let op_v = sc.operator_v()?;
    let probe = SpatialField::from_fn(sc.grid, |x| {
        1.0 + 0.5 * (2.0 * std::f64::consts::PI * x + 0.3).sin()
    });
    for (name, op) in [("operator_u", &op_u), ("operator_v", &op_v)] {
        let kernel = op.kernel_residual();
        v.check(
            &format!("{name}_kernel"),
            kernel,
            0.0,
            kernel,
            kernel <= 1e-13,
            format!("|L P|/|P| = {}", fmt_f64(kernel)),
        );
        let cons = op.conservation_residual(&probe)?;
        v.check(
            &format!("{name}_conservation"),
            cons,
            0.0,
            cons,
            cons <= 1e-12,
            format!("|h sum L u|/|u| = {}", fmt_f64(cons)),
        );
    }

    // the trivial state repels both species
    let zero = SpatialField::constant(sc.grid, 0.0);
    let min_r = sc.growth.min_value();
    for (name, species, mult) in [
        ("zero_repeller_u", Species::U, sc.species_u.r_mult),
        ("zero_repeller_v", Species::V, sc.species_v.r_mult),
    ] {
        let res = principal_eigen(&invasion_problem(sc, species, &zero)?)?;
        let floor = mult * min_r;
        v.check(
            name,
            res.sigma1,
            floor,
            0.0,
            res.sigma1 >= floor - 1e-10 * floor.abs().max(1.0),
            format!("sigma1={} >= min r_eff={}", fmt_f64(res.sigma1), fmt_f64(floor)),
        );
    }

    // single-species stationary states
    let u_star = solve_single_steady(sc, Species::U, None)?;
    let v_star = solve_single_steady(sc, Species::V, None)?;
    v.info(
        "steady_u",
        format!("residual={} t={}", fmt_f64(u_star.residual), u_star.t),
    );
    v.info(
        "steady_v",
        format!("residual={} t={}", fmt_f64(v_star.residual), v_star.t),
    );

    verify_stationary_checks(&mut v, sc, &u_star, &v_star, tol_ind)?;

    // thresholds need both independence hypotheses
    let p = &sc.species_u.strategy;
    let q = &sc.species_v.strategy;
    let k = &sc.carrying_capacity;
    let kp_ind = linearly_independent(k, p, tol_ind)?;
    let kq_ind = linearly_independent(k, q, tol_ind)?;
    if kp_ind && kq_ind {
        let th = thresholds(sc, &v_star.field)?;
        v.check(
            "threshold_mass_positive",
            th.m,
            0.0,
            0.0,
            th.m > 0.0,
            format!("M={}", fmt_f64(th.m)),
        );
        let prod = th.d_star * th.r_star;
        let expect = sc.species_u.d * sc.species_u.r_mult;
        v.check(
            "threshold_product",
            prod,
            expect,
            (prod - expect).abs() / expect.abs().max(1e-300),
            (prod - expect).abs() <= 1e-14 * expect.abs(),
            format!("d*={} r*={}", fmt_f64(th.d_star), fmt_f64(th.r_star)),
        );
        v.info(
            "thresholds",
            format!("M={} d_star={} r_star={}", fmt_f64(th.m), fmt_f64(th.d_star), fmt_f64(th.r_star)),
        );
    } else {
        v.skip("thresholds", "hypothesis not met: K,P or K,Q dependent");
    }

    // invasion eigenvalues and witnesses
    let certs = instability_certificates(sc, &u_star.field, &v_star.field)?;
    v.info(
        "eigen_semi_u",
        format!("sigma1={}", fmt_f64(certs.invader_v_at_semi_u.sigma1)),
    );
    v.info(
        "eigen_semi_v",
        format!("sigma1={}", fmt_f64(certs.invader_u_at_semi_v.sigma1)),
    );
    for w in &certs.witnesses {
        let sigma = match w.site {
            WitnessSite::SemiTrivialU => certs.invader_v_at_semi_u.sigma1,
            WitnessSite::SemiTrivialV => certs.invader_u_at_semi_v.sigma1,
        };
        v.check(
            &format!("variational_bound_{}", w.name),
            w.quotient,
            sigma,
            0.0,
            w.quotient <= sigma + 1e-10,
            format!("quotient={} sigma1={}", fmt_f64(w.quotient), fmt_f64(sigma)),
        );
    }

    // theorem-specific eigen sign requirements
    let prediction = predict_outcome(sc, &cfg)?;
    v.info("prediction", prediction.to_string());
    match prediction {
        Outcome::Coexistence { .. } => {
            v.check(
                "instability_semi_u",
                certs.invader_v_at_semi_u.sigma1,
                0.0,
                0.0,
                certs.invader_v_at_semi_u.sigma1 > 0.0,
                format!("sigma1={}", fmt_f64(certs.invader_v_at_semi_u.sigma1)),
            );
            v.check(
                "instability_semi_v",
                certs.invader_u_at_semi_v.sigma1,
                0.0,
                0.0,
                certs.invader_u_at_semi_v.sigma1 > 0.0,
                format!("sigma1={}", fmt_f64(certs.invader_u_at_semi_v.sigma1)),
            );
            for w in &certs.witnesses {
                if w.name == "sqrt_beta_Q" || w.name == "sqrt_alpha_P" {
                    v.check(
                        &format!("witness_positive_{}", w.name),
                        w.quotient,
                        0.0,
                        0.0,
                        w.quotient > 0.0,
                        format!("quotient={}", fmt_f64(w.quotient)),
                    );
                }
            }
        }
        Outcome::ExclusionUWins | Outcome::ExclusionVWins => {
            // the losing resident is invadable
            let (name, sigma) = if prediction == Outcome::ExclusionUWins {
                ("instability_semi_v", certs.invader_u_at_semi_v.sigma1)
            } else {
                ("instability_semi_u", certs.invader_v_at_semi_u.sigma1)
            };
            v.check(
                name,
                sigma,
                0.0,
                0.0,
                sigma > 0.0,
                format!("sigma1={}", fmt_f64(sigma)),
            );
        }
        _ => {}
    }

    // full dynamics against the prediction
    let (series, final_state, steady) = run(sc)?;
    let observed = classify_outcome(sc, &final_state, &series, steady, &cfg);
    v.info(
        "observed",
        format!("{observed} (steady={steady}, t={})", final_state.t),
    );
    if !prediction.same_variant(&Outcome::Undetermined) {
        v.check(
            "predicted_vs_observed",
            0.0,
            0.0,
            0.0,
            prediction.same_variant(&observed),
            format!("predicted {prediction}, observed {observed}"),
        );
    } else {
        v.skip("predicted_vs_observed", "prediction undetermined");
    }

    // coexistence identities on the settled state
    if observed.same_variant(&Outcome::Coexistence {
        alpha: 1.0,
        beta: 1.0,
    }) && sc.species_u.r_mult == sc.species_v.r_mult
    {
        let r_eff = sc.effective_growth(Species::U);
        let a2_eff = sc.advection.scale(sc.species_v.d);
        for rep in check_coexistence_identities(
            &final_state.u,
            &final_state.v,
            k,
            &r_eff,
            q,
            &a2_eff,
        )? {
            v.check_report(&rep);
        }
    } else {
        v.skip(
            "coexistence_identities",
            "no coexistence state or unequal growth multipliers",
        );
    }

    let passed = v.failed == 0;
    Ok(VerifyReport {
        rows: v.rows,
        lines: v.lines,
        passed,
    })
}

fn verify_stationary_checks(
    v: &mut Verifier,
    sc: &Scenario,
    u_star: &SteadySolve,
    v_star: &SteadySolve,
    tol_ind: f64,
) -> Result<()> {
    let k = &sc.carrying_capacity;
    for (label, star, params, species) in [
        ("u", u_star, &sc.species_u, Species::U),
        ("v", v_star, &sc.species_v, Species::V),
    ] {
        let strat = &params.strategy;
        let r_eff = sc.effective_growth(species);
        let a_eff = sc.advection.scale(params.d);
        let rep = check_identity_eq_u2_1(&star.field, k, strat, &r_eff, &a_eff)?;
        v.check(
            &format!("identity_stationary_mass_{label}"),
            rep.lhs,
            rep.rhs,
            rep.relative_error,
            rep.satisfied,
            format!("lhs={} rhs={}", fmt_f64(rep.lhs), fmt_f64(rep.rhs)),
        );
        if linearly_independent(strat, k, tol_ind)? {
            v.check(
                &format!("inequality_deficit_positive_{label}"),
                rep.lhs,
                0.0,
                0.0,
                rep.lhs > 0.0 && rep.rhs > 0.0,
                format!("lhs={}", fmt_f64(rep.lhs)),
            );
        } else {
            v.skip(
                &format!("inequality_deficit_positive_{label}"),
                "hypothesis not met: strategy proportional to K",
            );
        }

        let nc = noncorrespondence(&sc.advection, strat, k)?;
        let nc_scale = 1e-10 * k.sup_norm() / (sc.grid.h() * sc.grid.h());
        if nc > nc_scale {
            let ineq = check_inequality_lsteady1(
                format!("inequality_rk_mass_{label}"),
                &star.field,
                k,
                &sc.growth,
            );
            v.check_report(&ineq);
        } else {
            v.skip(
                &format!("inequality_rk_mass_{label}"),
                "hypothesis not met: div[a grad(K/P)] vanishes",
            );
        }
    }
    Ok(())
}

/// Run the verification battery and write `checks.csv` / `report.csv`.
pub fn cmd_verify(path: &Path, opts: &CommandOpts) -> Result<CommandOutput> {
    let started = Instant::now();
    let (rs, _) = load(path, opts)?;
    let report = verify_scenario(&rs)?;

    let files = [
        ("checks.csv", checks_csv(&report.rows)),
        ("report.csv", lines_csv(&report.lines)),
    ];
    let written = write_outputs(&opts.out_dir, &files)?;
    let summary = if report.passed { "all checks passed" } else { "failures" };
    manifest(&opts.out_dir, rs.hash, "verify", written, started, summary)?;
    Ok(CommandOutput {
        exit_code: if report.passed { 0 } else { 1 },
        lines: report.lines,
    })
}

/// Axis of a parameter sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    D1,
    D2,
    R1,
    R2,
}

impl std::str::FromStr for SweepAxis {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "d1" => Ok(SweepAxis::D1),
            "d2" => Ok(SweepAxis::D2),
            "r1" => Ok(SweepAxis::R1),
            "r2" => Ok(SweepAxis::R2),
            other => Err(Error::InvalidParam {
                name: "axis",
                message: format!("must be one of d1, d2, r1, r2; got `{other}`"),
            }),
        }
    }
}

impl SweepAxis {
    fn apply(self, doc: &mut ScenarioDoc, value: f64) {
        let (section, key) = match self {
            SweepAxis::D1 => ("species_u", "d"),
            SweepAxis::D2 => ("species_v", "d"),
            SweepAxis::R1 => ("species_u", "r_mult"),
            SweepAxis::R2 => ("species_v", "r_mult"),
        };
        doc.set(section, key, fmt_f64(value));
    }

    fn name(self) -> &'static str {
        match self {
            SweepAxis::D1 => "d1",
            SweepAxis::D2 => "d2",
            SweepAxis::R1 => "r1",
            SweepAxis::R2 => "r2",
        }
    }
}

/// Sweep one parameter over a linear range; one outcome row per value.
pub fn cmd_sweep(
    path: &Path,
    axis: SweepAxis,
    from: f64,
    to: f64,
    count: usize,
    opts: &CommandOpts,
) -> Result<CommandOutput> {
    let started = Instant::now();
    if count == 0 {
        return Err(Error::InvalidParam {
            name: "count",
            message: "need at least one sweep point".into(),
        });
    }
    let text = std::fs::read_to_string(path)?;
    let base = ScenarioDoc::parse(&text)?;
    let cfg = OutcomeConfig::default();

    let mut csv = String::from("param,value,outcome,\"sigma1_at_(0,v*)\",\"sigma1_at_(u*,0)\"\n");
    let mut lines = Vec::new();
    let mut hash = 0u64;
    for i in 0..count {
        let value = if count == 1 {
            from
        } else {
            from + (to - from) * i as f64 / (count - 1) as f64
        };
        let mut doc = base.clone();
        if let Some(seed) = opts.seed {
            doc.set("run", "seed", seed.to_string());
        }
        if let Some(n) = opts.n_cells {
            doc.set("grid", "n_cells", n.to_string());
        }
        if let Some(dt) = opts.dt {
            doc.set("stepper", "dt", format!("{dt}"));
        }
        axis.apply(&mut doc, value);
        let rs = crate::scenario::resolve(&doc)?;
        hash = rs.hash;
        let sc = &rs.scenario;

        let u_star = solve_single_steady(sc, Species::U, None)?;
        let v_star = solve_single_steady(sc, Species::V, None)?;
        let sigma_at_v = principal_eigen(&invasion_problem(sc, Species::U, &v_star.field)?)?;
        let sigma_at_u = principal_eigen(&invasion_problem(sc, Species::V, &u_star.field)?)?;
        let (series, final_state, steady) = run(sc)?;
        let outcome = classify_outcome(sc, &final_state, &series, steady, &cfg);
        csv.push_str(&format!(
            "{},{},\"{}\",{},{}\n",
            axis.name(),
            fmt_f64(value),
            outcome,
            fmt_f64(sigma_at_v.sigma1),
            fmt_f64(sigma_at_u.sigma1),
        ));
        lines.push(ReportLine::new(
            format!("sweep_{}", i),
            Status::Info,
            format!("{}={} -> {}", axis.name(), fmt_f64(value), outcome),
        ));
    }

    let files = [("sweep.csv", csv), ("report.csv", lines_csv(&lines))];
    let written = write_outputs(&opts.out_dir, &files)?;
    manifest(&opts.out_dir, hash, "sweep", written, started, "ok")?;
    Ok(CommandOutput {
        exit_code: 0,
        lines,
    })
}

/// Evaluate a Rayleigh quotient for an external trial expression; exposed for
/// scripting parity with the library API.
pub fn quotient_for_trial(
    sc: &Scenario,
    invader: Species,
    resident: &SpatialField,
    trial: &SpatialField,
) -> Result<f64> {
    rayleigh_quotient(&invasion_problem(sc, invader, resident)?, trial)
}
