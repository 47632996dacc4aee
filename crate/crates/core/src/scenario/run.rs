//! Evaluation of checks and trajectories.

use std::sync::Arc;

use nalgebra::DVector;
use rayon::prelude::*;

use super::build::{compile, Compiled};
use super::report::{CheckReport, ResidualReport, TrajectoryMetric, TrajectoryReport, SCHEMA_VERSION};
use super::spec::{CheckKind, CheckSpec, ModeSpec, Regime, Scenario, TrajectorySpec};
use crate::constraints::ConstraintKind;
use crate::dynamics::{alpha_dot, force_at, kinetic_energy, reconstruct_force, State};
use crate::error::{Error, Result};
use crate::fluids::{
    full_space_split, relativistic_euler_residual, steady_euler_residual, Background,
};
use crate::geometry::{
    christoffel_with, field_value, metric_at, metric_compatibility_defect, DiffMode, ScalarField,
    VectorField,
};
use crate::integrate::{convergence_ratio, integrate_second_order, lift_comparison};
use crate::intermediate::{
    hamilton_jacobi_residual_momentum, intermediate_residual, intermediate_residual_with,
    lagrangian_defect, prolongation_defect_with, vorticity_identity_gap,
};
use crate::sampling::{derive_seed, sample_box};

/// States with `|2T|` below this are skipped by state checks of the
/// relativistic system, whose modified force is undefined on the null cone.
pub const NULL_SAMPLE_MARGIN: f64 = 0.05;

/// Accepted `|g(u, u) - 1|` for the orthogonality check.
pub const UNIT_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunOptions {
    /// Replaces the scenario seed.
    pub seed: Option<u64>,
    /// Replaces every check tolerance.
    pub tolerance: Option<f64>,
    /// Worker threads; the global pool when unset. Results do not depend on it.
    pub threads: Option<usize>,
}

fn mode(m: ModeSpec) -> DiffMode {
    match m {
        ModeSpec::Auto => DiffMode::Auto,
        ModeSpec::Fd => DiffMode::FiniteDifference,
    }
}

fn state_kind(kind: CheckKind) -> bool {
    matches!(kind, CheckKind::AlphaDot | CheckKind::NewtonRoundTrip)
}

fn missing(what: &str, kind: CheckKind) -> Error {
    Error::Validation(format!("check kind `{}` needs {what}", kind.name()))
}

/// Verifies that the scenario provides what each check reads.
pub(crate) fn check_requirements(c: &Compiled) -> Result<()> {
    for check in &c.scenario.checks {
        let kind = check.kind;
        let regime = c.fluid.as_ref().map(|f| f.regime);
        let need_regime = |ok: &[Regime]| -> Result<()> {
            match regime {
                Some(r) if ok.contains(&r) => Ok(()),
                _ => Err(missing(
                    &format!(
                        "a fluid in regime {}",
                        ok.iter().map(|r| format!("{r:?}").to_lowercase()).collect::<Vec<_>>().join(" or ")
                    ),
                    kind,
                )),
            }
        };
        match kind {
            CheckKind::Intermediate | CheckKind::Prolongation | CheckKind::Vorticity => {
                if c.field.is_none() {
                    return Err(missing("a `field`", kind));
                }
            }
            CheckKind::Euler => need_regime(&[Regime::Steady, Regime::Static, Regime::Flrw, Regime::Relativistic])?,
            CheckKind::Bernoulli | CheckKind::BernoulliFromEuler | CheckKind::Split => {
                need_regime(&[Regime::Static, Regime::Flrw])?
            }
            CheckKind::EulerVsIntermediate => need_regime(&[Regime::Steady])?,
            CheckKind::Orthogonality => need_regime(&[Regime::Relativistic])?,
            CheckKind::HamiltonJacobi => {
                if c.hamilton_jacobi.is_none() {
                    return Err(missing("a `hamilton_jacobi` table", kind));
                }
            }
            CheckKind::Lagrangian => {
                if c.hamilton_jacobi.as_ref().and_then(|h| h.action.as_ref()).is_none() {
                    return Err(missing("`hamilton_jacobi.action`", kind));
                }
            }
            CheckKind::MetricCompatibility
            | CheckKind::ChristoffelSymmetry
            | CheckKind::AlphaDot
            | CheckKind::NewtonRoundTrip => {}
        }
    }
    Ok(())
}

fn state_of(n: usize, p: &[f64]) -> Result<State> {
    State::new(p[..n].to_vec(), p[n..].to_vec())
}

fn near_null(c: &Compiled, s: &State) -> Result<bool> {
    let relativistic = c
        .constrained
        .as_ref()
        .is_some_and(|sys| sys.kind() == ConstraintKind::Relativistic);
    Ok(relativistic && (2.0 * kinetic_energy(c.metric.as_ref(), s)?).abs() < NULL_SAMPLE_MARGIN)
}

/// The norm a check reports at one sample; `None` when the sample is skipped.
fn eval_point(c: &Compiled, check: &CheckSpec, p: &[f64]) -> Result<Option<f64>> {
    let md = mode(check.mode);
    let metric = c.metric.as_ref();
    let n = c.chart.dim;
    let norm = match check.kind {
        CheckKind::Intermediate => {
            let field = c.field.as_deref().expect("validated");
            intermediate_residual_with(metric, c.system_force.as_ref(), field, p, md)?.norm
        }
        CheckKind::Prolongation => {
            let field = c.field.as_deref().expect("validated");
            prolongation_defect_with(field, &c.newton, p, md)?
        }
        CheckKind::Vorticity => {
            let field = c.field.as_deref().expect("validated");
            vorticity_identity_gap(metric, field, p, md)?.amax()
        }
        CheckKind::MetricCompatibility => metric_compatibility_defect(metric, p, md)?,
        CheckKind::ChristoffelSymmetry => {
            let auto = christoffel_with(metric, p, DiffMode::Auto)?;
            let fd = christoffel_with(metric, p, DiffMode::FiniteDifference)?;
            auto.symmetry_defect().max(auto.max_abs_diff(&fd))
        }
        CheckKind::AlphaDot => {
            let s = state_of(n, p)?;
            if near_null(c, &s)? {
                return Ok(None);
            }
            alpha_dot(c.system_force.as_ref(), &s)?.abs()
        }
        CheckKind::NewtonRoundTrip => {
            let s = state_of(n, p)?;
            if near_null(c, &s)? {
                return Ok(None);
            }
            let back = reconstruct_force(metric, &c.newton, &s)?;
            (back - force_at(c.system_force.as_ref(), &s)?).amax()
        }
        CheckKind::HamiltonJacobi => {
            let hj = c.hamilton_jacobi.as_ref().expect("validated");
            hamilton_jacobi_residual_momentum(metric, hj.potential.as_ref(), hj.momentum.as_ref(), p, md)?
        }
        CheckKind::Lagrangian => {
            let hj = c.hamilton_jacobi.as_ref().expect("validated");
            lagrangian_defect(metric, hj.action.as_deref().expect("validated"), p)?
        }
        CheckKind::Euler
        | CheckKind::Bernoulli
        | CheckKind::BernoulliFromEuler
        | CheckKind::EulerVsIntermediate
        | CheckKind::Split
        | CheckKind::Orthogonality => fluid_norm(c, check.kind, p)?,
    };
    Ok(Some(norm))
}

fn fluid_norm(c: &Compiled, kind: CheckKind, p: &[f64]) -> Result<f64> {
    let f = c.fluid.as_ref().expect("validated");
    let metric = c.metric.as_ref();
    let v: &dyn VectorField = f.velocity.as_ref();
    let pressure: &dyn ScalarField = f.pressure.as_ref();
    let density: &dyn ScalarField = f.density.as_ref();
    match (f.regime, kind) {
        (Regime::Steady, CheckKind::Euler) => {
            Ok(steady_euler_residual(metric, v, pressure, density, p, f.body_force.as_deref())?.amax())
        }
        (Regime::Steady, CheckKind::EulerVsIntermediate) => {
            let euler = steady_euler_residual(metric, v, pressure, density, p, f.body_force.as_deref())?;
            let mut terms: Vec<Arc<dyn crate::dynamics::ForceForm>> = vec![Arc::new(
                crate::dynamics::IntegrableForce::new(f.pressure.clone(), f.density.clone())?,
            )];
            if let Some(b) = &f.body_force {
                terms.push(b.clone());
            }
            let force = crate::dynamics::SumForce::new(terms)?;
            let inter = intermediate_residual(metric, &force, v, p)?;
            Ok((euler - inter.residual).amax())
        }
        (Regime::Relativistic, CheckKind::Euler) => {
            Ok(relativistic_euler_residual(metric, v, pressure, density, p)?.amax())
        }
        (Regime::Relativistic, CheckKind::Orthogonality) => {
            let u = field_value(v, p)?;
            let at = metric_at(metric, p)?;
            let norm_sq = at.inner(&u, &u);
            if (norm_sq - 1.0).abs() > UNIT_TOL {
                return Err(Error::Validation(format!(
                    "orthogonality needs a unit velocity, g(u, u) = {norm_sq}"
                )));
            }
            let r = relativistic_euler_residual(metric, v, pressure, density, p)?;
            Ok(at.inner(&r, &u).abs())
        }
        (Regime::Static | Regime::Flrw, _) => {
            let bg = c.background.as_ref().expect("validated");
            unsteady_norm(bg, f, kind, p)
        }
        _ => unreachable!("requirements validated"),
    }
}

fn unsteady_norm(bg: &Background, f: &super::build::CompiledFluid, kind: CheckKind, tx: &[f64]) -> Result<f64> {
    let v: &dyn VectorField = f.velocity.as_ref();
    let pressure: &dyn ScalarField = f.pressure.as_ref();
    let density: &dyn ScalarField = f.density.as_ref();
    match kind {
        CheckKind::Euler => Ok(bg.euler_residual(v, pressure, density, tx)?.amax()),
        CheckKind::Bernoulli => Ok(bg.bernoulli_residual(v, pressure, density, tx)?.abs()),
        CheckKind::BernoulliFromEuler => {
            let e = bg.euler_residual(v, pressure, density, tx)?;
            let b = bg.bernoulli_residual(v, pressure, density, tx)?;
            Ok((b - bg.pair(&e, v, tx)?).abs())
        }
        CheckKind::Split => {
            let split = full_space_split(bg, f.velocity.clone(), f.pressure.clone(), f.density.clone(), tx)?;
            let e = bg.euler_residual(v, pressure, density, tx)?;
            let b = bg.bernoulli_residual(v, pressure, density, tx)?;
            let time_part = match bg {
                Background::Static(_) => -b,
                Background::Flrw { a, .. } => {
                    let scale = a.value(tx[0])?;
                    scale * scale * b
                }
            };
            let n = e.len();
            let expected_constrained =
                DVector::from_iterator(n + 1, std::iter::once(0.0).chain(e.iter().copied()));
            let expected_section =
                DVector::from_iterator(n + 1, std::iter::once(time_part).chain(e.iter().copied()));
            Ok((split.constrained - expected_constrained)
                .amax()
                .max((split.on_section - expected_section).amax()))
        }
        _ => unreachable!("requirements validated"),
    }
}

/// Sum by recursive halving; the grouping depends only on the length.
fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 8 {
        return xs.iter().sum();
    }
    let (a, b) = xs.split_at(xs.len() / 2);
    pairwise_sum(a) + pairwise_sum(b)
}

fn run_check(c: &Compiled, check: &CheckSpec, seed: u64, tolerance: f64) -> CheckReport {
    let n = c.chart.dim;
    let count = check.count.unwrap_or(c.count);
    let (lower, upper) = if state_kind(check.kind) {
        (
            [c.lower.clone(), c.velocity_lower.clone()].concat(),
            [c.upper.clone(), c.velocity_upper.clone()].concat(),
        )
    } else {
        (c.lower.clone(), c.upper.clone())
    };
    let mut report = CheckReport {
        name: check.name.clone(),
        kind: check.kind,
        mode: check.mode,
        tolerance,
        samples: 0,
        skipped: 0,
        max_norm: None,
        mean_norm: None,
        worst_point: None,
        passed: false,
        error: None,
    };
    let points = match sample_box(&lower, &upper, count, derive_seed(seed, &check.name)) {
        Ok(p) => p,
        Err(e) => {
            report.error = Some(e.to_string());
            return report;
        }
    };
    let results: Vec<Result<Option<f64>>> = points.par_iter().map(|p| eval_point(c, check, p)).collect();
    let mut norms = Vec::with_capacity(results.len());
    let mut worst: Option<(f64, usize)> = None;
    for (i, r) in results.into_iter().enumerate() {
        match r {
            Ok(Some(v)) => {
                if worst.is_none_or(|(w, _)| v > w) {
                    worst = Some((v, i));
                }
                norms.push(v);
            }
            Ok(None) => report.skipped += 1,
            Err(e) => {
                report.error = Some(format!("sample {i} at {:?}: {e}", points[i]));
                break;
            }
        }
    }
    report.samples = norms.len();
    if let Some((w, i)) = worst {
        report.max_norm = Some(w);
        report.mean_norm = Some(pairwise_sum(&norms) / norms.len() as f64);
        let p = &points[i];
        report.worst_point = Some(if state_kind(check.kind) { p[..n].to_vec() } else { p.clone() });
    }
    if report.error.is_none() && norms.is_empty() {
        report.error = Some("no admissible samples".into());
    }
    report.passed = report.error.is_none() && report.max_norm.is_some_and(|m| m <= tolerance);
    report
}

fn metric_entry(metric: &str, value: f64, tolerance: Option<f64>, pass: impl Fn(f64, f64) -> bool) -> TrajectoryMetric {
    TrajectoryMetric {
        metric: metric.to_string(),
        value,
        tolerance,
        passed: tolerance.is_none_or(|tol| pass(value, tol)),
    }
}

fn run_trajectory(c: &Compiled, t: &TrajectorySpec) -> TrajectoryReport {
    let mut report = TrajectoryReport {
        name: t.name.clone(),
        steps: 0,
        metrics: Vec::new(),
        passed: false,
        error: None,
    };
    if let Err(e) = trajectory_metrics(c, t, &mut report) {
        report.error = Some(e.to_string());
    }
    report.passed = report.error.is_none() && report.metrics.iter().all(|m| m.passed);
    report
}

fn trajectory_metrics(c: &Compiled, t: &TrajectorySpec, report: &mut TrajectoryReport) -> Result<()> {
    let state0 = c.initial_state(t)?;
    let traj = integrate_second_order(&c.newton, &state0, t.t_end, t.dt)?;
    report.steps = traj.len() - 1;
    let below = |v: f64, tol: f64| v <= tol;
    report.metrics.push(metric_entry(
        "kinetic-drift",
        traj.kinetic_drift(c.metric.as_ref())?,
        t.kinetic_tolerance,
        below,
    ));
    if c.chart.time {
        report
            .metrics
            .push(metric_entry("tdot-drift", traj.velocity_drift(0), t.tdot_tolerance, below));
    }
    if let (Some(field), None) = (&c.field, &t.xdot0) {
        if field.input_dim() == field.dim() {
            let cmp = lift_comparison(field.as_ref(), &c.newton, &t.x0, t.t_end, t.dt)?;
            report
                .metrics
                .push(metric_entry("lift-distance", cmp.position, t.lift_tolerance, below));
            report
                .metrics
                .push(metric_entry("lift-velocity-distance", cmp.velocity, None, below));
        }
    }
    if let Some(tol) = t.order_tolerance {
        let ratio = convergence_ratio(&c.newton, &state0, t.t_end, t.dt)?;
        report.metrics.push(metric_entry("rk4-ratio", ratio, Some(tol), |r, tol| {
            (r / 16.0 - 1.0).abs() <= tol
        }));
    }
    Ok(())
}

/// Compiles and runs every check and trajectory of a scenario.
///
/// Errors only for an invalid scenario; evaluation failures are recorded in
/// the report.
pub fn run_scenario(scenario: &Scenario, opts: &RunOptions) -> Result<ResidualReport> {
    let compiled = compile(scenario)?;
    check_requirements(&compiled)?;
    if let Some(tol) = opts.tolerance {
        if !(tol >= 0.0) {
            return Err(Error::Validation(format!("tolerance must be >= 0, got {tol}")));
        }
    }
    let seed = opts.seed.unwrap_or(scenario.seed);
    let work = || {
        let checks = compiled
            .scenario
            .checks
            .iter()
            .map(|check| run_check(&compiled, check, seed, opts.tolerance.unwrap_or(check.tolerance)))
            .collect::<Vec<_>>();
        let trajectories = compiled
            .scenario
            .trajectories
            .par_iter()
            .map(|t| run_trajectory(&compiled, t))
            .collect::<Vec<_>>();
        (checks, trajectories)
    };
    let (checks, trajectories) = match opts.threads {
        Some(k) => rayon::ThreadPoolBuilder::new()
            .num_threads(k.max(1))
            .build()
            .map_err(|e| Error::Validation(format!("thread pool: {e}")))?
            .install(work),
        None => work(),
    };
    let passed = checks.iter().all(|c| c.passed) && trajectories.iter().all(|t| t.passed);
    let mut report = ResidualReport {
        schema_version: SCHEMA_VERSION,
        scenario: scenario.name.clone(),
        scenario_digest: super::report::scenario_digest(scenario),
        seed,
        passed,
        checks,
        trajectories,
        digest: String::new(),
    };
    report.digest = report.compute_digest();
    Ok(report)
}
