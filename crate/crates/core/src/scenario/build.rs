//! Turns a parsed [`Scenario`] into metric, force and field objects.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use super::spec::{
    ConstraintSpec, ForceKind, ForceSpec, FluidSpec, HamiltonJacobiSpec, MetricSpec, Regime,
    Scenario, TrajectorySpec,
};
use crate::constraints::{relativistic_correction, time_constrain, ConstrainedSystem};
use crate::dynamics::{
    lorentz_force, newton_field, ExactForce, FnForce, ForceForm, IntegrableForce, NewtonField,
    State, ZeroForce,
};
use crate::error::{Error, Result};
use crate::expr::{Chart, Expr};
use crate::fluids::Background;
use crate::geometry::{
    builtin, ExprMetric, ExprScalar, ExprVectorField, MetricField, ScaleFactor, VectorField,
};

/// Largest chart dimension a scenario may declare.
pub const MAX_SCENARIO_DIM: usize = 8;

pub(crate) fn context<T>(what: &str, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        Error::Validation(msg) => Error::Validation(format!("{what}: {msg}")),
        other => Error::Validation(format!("{what}: {other}")),
    })
}

fn parse(what: &str, src: &str) -> Result<Expr> {
    context(what, src.parse::<Expr>().map_err(Error::from))
}

fn need<'a, T>(what: &str, v: &'a Option<T>) -> Result<&'a T> {
    v.as_ref()
        .ok_or_else(|| Error::Validation(format!("missing `{what}`")))
}

struct MetricBuild {
    metric: ExprMetric,
    background: Option<Background>,
    bounds: Option<(Vec<f64>, Vec<f64>)>,
}

fn build_metric(spec: &MetricSpec, path: &str) -> Result<MetricBuild> {
    let forms = [
        spec.builtin.is_some(),
        spec.components.is_some(),
        spec.spatial.is_some(),
    ];
    if forms.iter().filter(|f| **f).count() != 1 {
        return Err(Error::Validation(format!(
            "{path}: give exactly one of `builtin`, `components`, `spatial`"
        )));
    }
    if spec.scale.is_some() && spec.spatial.is_none() {
        return Err(Error::Validation(format!("{path}: `scale` needs `spatial`")));
    }
    if let Some(name) = &spec.builtin {
        let dim = spec.dim.unwrap_or(2);
        check_dim(path, dim)?;
        let b = context(path, builtin(name, dim))?;
        let background = match (&b.flrw, name.as_str()) {
            (Some((a, h)), _) => Some(Background::Flrw {
                h: Arc::new(h.clone()),
                a: ScaleFactor::from_expr(a.clone())?,
            }),
            (None, "static") => Some(Background::Static(Arc::new(builtin("curved", dim - 1)?.metric))),
            (None, "minkowski") => Some(Background::Flrw {
                h: Arc::new(builtin("euclidean", dim - 1)?.metric),
                a: ScaleFactor::from_expr(Expr::num(1.0))?,
            }),
            _ => None,
        };
        return Ok(MetricBuild {
            metric: b.metric,
            background,
            bounds: Some((b.lower, b.upper)),
        });
    }
    if let Some(rows) = &spec.components {
        let dim = rows.len();
        check_dim(path, dim)?;
        if spec.time && dim < 2 {
            return Err(Error::Validation(format!("{path}: a time chart needs dimension >= 2")));
        }
        if let Some(d) = spec.dim {
            if d != dim {
                return Err(Error::Validation(format!(
                    "{path}: `dim` = {d} but {dim} component rows"
                )));
            }
        }
        let chart = Chart { dim, time: spec.time };
        let mut comps = Vec::with_capacity(dim);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != dim {
                return Err(Error::Validation(format!(
                    "{path}.components[{i}] has {} entries, expected {dim}",
                    row.len()
                )));
            }
            let parsed = row
                .iter()
                .enumerate()
                .map(|(j, s)| parse(&format!("{path}.components[{i}][{j}]"), s))
                .collect::<Result<Vec<_>>>()?;
            comps.push(parsed);
        }
        let metric = context(path, ExprMetric::new(chart, comps))?;
        return Ok(MetricBuild {
            metric,
            background: None,
            bounds: None,
        });
    }
    let inner_spec = spec.spatial.as_deref().expect("checked above");
    let inner = build_metric(inner_spec, &format!("{path}.spatial"))?;
    if inner.metric.chart().time {
        return Err(Error::Validation(format!("{path}.spatial must be a spatial metric")));
    }
    check_dim(path, inner.metric.dim() + 1)?;
    let h = inner.metric;
    let (metric, background, t_box) = match &spec.scale {
        Some(src) => {
            let a = parse(&format!("{path}.scale"), src)?;
            let metric = context(path, ExprMetric::flrw(&a, &h))?;
            let scale = context(&format!("{path}.scale"), ScaleFactor::from_expr(a))?;
            (metric, Background::Flrw { h: Arc::new(h), a: scale }, (0.5, 2.0))
        }
        None => {
            let metric = context(path, ExprMetric::static_product(&h))?;
            (metric, Background::Static(Arc::new(h)), (-1.0, 1.0))
        }
    };
    let bounds = inner.bounds.map(|(mut lo, mut hi)| {
        lo.insert(0, t_box.0);
        hi.insert(0, t_box.1);
        (lo, hi)
    });
    Ok(MetricBuild {
        metric,
        background: Some(background),
        bounds,
    })
}

fn check_dim(path: &str, dim: usize) -> Result<()> {
    if dim == 0 || dim > MAX_SCENARIO_DIM {
        return Err(Error::Validation(format!(
            "{path}: dimension must be between 1 and {MAX_SCENARIO_DIM}, got {dim}"
        )));
    }
    Ok(())
}

fn scalar(chart: Chart, what: &str, src: &str) -> Result<Arc<ExprScalar>> {
    let e = parse(what, src)?;
    Ok(Arc::new(context(what, ExprScalar::new(chart, e))?))
}

fn exprs(chart: Chart, what: &str, srcs: &[String]) -> Result<Vec<Expr>> {
    srcs.iter()
        .enumerate()
        .map(|(i, s)| {
            let e = parse(&format!("{what}[{i}]"), s)?;
            context(&format!("{what}[{i}]"), chart.check(&e))?;
            Ok(e)
        })
        .collect()
}

fn vector(chart: Chart, what: &str, srcs: &[String]) -> Result<Arc<ExprVectorField>> {
    let comps = exprs(chart, what, srcs)?;
    Ok(Arc::new(context(what, ExprVectorField::new(chart, comps))?))
}

fn covector_force(chart: Chart, what: &str, srcs: &[String]) -> Result<FnForce> {
    if srcs.len() != chart.dim {
        return Err(Error::Validation(format!(
            "{what} has {} components, expected {}",
            srcs.len(),
            chart.dim
        )));
    }
    let comps = exprs(chart, what, srcs)?;
    Ok(FnForce::positional(chart.dim, what.to_string(), move |x| {
        let b = chart.bindings(x);
        let vals = comps.iter().map(|e| e.eval(&b)).collect::<Result<Vec<_>>>()?;
        Ok(DVector::from_vec(vals))
    }))
}

fn build_force(chart: Chart, spec: Option<&ForceSpec>) -> Result<Arc<dyn ForceForm>> {
    let Some(spec) = spec else {
        return Ok(Arc::new(ZeroForce { dim: chart.dim }));
    };
    let force: Arc<dyn ForceForm> = match spec.kind {
        ForceKind::None => Arc::new(ZeroForce { dim: chart.dim }),
        ForceKind::Potential => {
            let phi = scalar(chart, "force.potential", need("force.potential", &spec.potential)?)?;
            Arc::new(ExactForce::new(phi))
        }
        ForceKind::Pressure => {
            let p = scalar(chart, "force.pressure", need("force.pressure", &spec.pressure)?)?;
            let rho = scalar(chart, "force.density", need("force.density", &spec.density)?)?;
            Arc::new(IntegrableForce::new(p, rho)?)
        }
        ForceKind::Lorentz => {
            let rows = need("force.two_form", &spec.two_form)?;
            let n = chart.dim;
            if rows.len() != n || rows.iter().any(|r| r.len() != n) {
                return Err(Error::Validation(format!("force.two_form must be {n}x{n}")));
            }
            let mut entries = Vec::with_capacity(n * n);
            for (i, row) in rows.iter().enumerate() {
                entries.extend(exprs(chart, &format!("force.two_form[{i}]"), row)?);
            }
            Arc::new(lorentz_force(n, move |x| {
                let b = chart.bindings(x);
                let vals = entries.iter().map(|e| e.eval(&b)).collect::<Result<Vec<_>>>()?;
                Ok(DMatrix::from_row_slice(n, n, &vals))
            }))
        }
        ForceKind::Components => Arc::new(covector_force(
            chart,
            "force.components",
            need("force.components", &spec.components)?,
        )?),
    };
    Ok(force)
}

/// Fluid data on the scenario chart.
pub struct CompiledFluid {
    pub regime: Regime,
    pub velocity: Arc<ExprVectorField>,
    pub pressure: Arc<ExprScalar>,
    /// `ρ`, or `μ` in the relativistic regime.
    pub density: Arc<ExprScalar>,
    pub body_force: Option<Arc<dyn ForceForm>>,
}

fn build_fluid(chart: Chart, spec: &FluidSpec, background: Option<&Background>) -> Result<CompiledFluid> {
    let spatial = matches!(spec.regime, Regime::Static | Regime::Flrw);
    if spatial {
        match (spec.regime, background) {
            (Regime::Static, Some(Background::Static(_))) | (Regime::Flrw, Some(Background::Flrw { .. })) => {}
            _ => {
                return Err(Error::Validation(format!(
                    "fluid regime `{}` needs a metric of the matching block form (use `spatial`, with `scale` for FLRW)",
                    match spec.regime {
                        Regime::Static => "static",
                        _ => "flrw",
                    }
                )))
            }
        }
    }
    let expected = if spatial { chart.dim - 1 } else { chart.dim };
    if spec.velocity.len() != expected {
        return Err(Error::Validation(format!(
            "fluid.velocity has {} components, expected {expected}",
            spec.velocity.len()
        )));
    }
    let velocity = vector(chart, "fluid.velocity", &spec.velocity)?;
    let pressure = scalar(chart, "fluid.pressure", &spec.pressure)?;
    let density = match spec.regime {
        Regime::Relativistic => scalar(
            chart,
            "fluid.energy_density",
            need("fluid.energy_density", &spec.energy_density)?,
        )?,
        _ => scalar(chart, "fluid.density", need("fluid.density", &spec.density)?)?,
    };
    let body_force = match &spec.body_force {
        Some(f) if spec.regime == Regime::Steady => {
            Some(Arc::new(covector_force(chart, "fluid.body_force", f)?) as Arc<dyn ForceForm>)
        }
        Some(_) => {
            return Err(Error::Validation("fluid.body_force is only used by the steady regime".into()))
        }
        None => None,
    };
    Ok(CompiledFluid {
        regime: spec.regime,
        velocity,
        pressure,
        density,
        body_force,
    })
}

pub struct CompiledHamiltonJacobi {
    pub potential: Arc<ExprScalar>,
    pub action: Option<Arc<ExprScalar>>,
    /// `dS`, symbolic when an action is given.
    pub momentum: Arc<dyn VectorField>,
}

fn build_hj(chart: Chart, spec: &HamiltonJacobiSpec) -> Result<CompiledHamiltonJacobi> {
    let potential = scalar(chart, "hamilton_jacobi.potential", &spec.potential)?;
    match (&spec.action, &spec.momentum) {
        (Some(src), None) => {
            let action = scalar(chart, "hamilton_jacobi.action", src)?;
            let comps = (0..chart.dim)
                .map(|k| action.expr().differentiate(chart.var(k)))
                .collect();
            let momentum = Arc::new(ExprVectorField::new(chart, comps)?);
            Ok(CompiledHamiltonJacobi {
                potential,
                action: Some(action),
                momentum,
            })
        }
        (None, Some(p)) => {
            if p.len() != chart.dim {
                return Err(Error::Validation(format!(
                    "hamilton_jacobi.momentum has {} components, expected {}",
                    p.len(),
                    chart.dim
                )));
            }
            Ok(CompiledHamiltonJacobi {
                potential,
                action: None,
                momentum: vector(chart, "hamilton_jacobi.momentum", p)?,
            })
        }
        _ => Err(Error::Validation(
            "hamilton_jacobi needs exactly one of `action`, `momentum`".into(),
        )),
    }
}

/// A validated scenario with every object built.
pub struct Compiled {
    pub scenario: Scenario,
    pub chart: Chart,
    pub metric: Arc<dyn MetricField>,
    pub background: Option<Background>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub count: usize,
    pub velocity_lower: Vec<f64>,
    pub velocity_upper: Vec<f64>,
    pub base_force: Arc<dyn ForceForm>,
    pub constrained: Option<ConstrainedSystem>,
    /// The modified force when a constraint is set, the base force otherwise.
    pub system_force: Arc<dyn ForceForm>,
    pub newton: NewtonField,
    pub field: Option<Arc<ExprVectorField>>,
    pub fluid: Option<CompiledFluid>,
    pub hamilton_jacobi: Option<CompiledHamiltonJacobi>,
}

impl Compiled {
    /// `(x0, xdot0)`, with `xdot0` defaulting to the field value at `x0`.
    pub fn initial_state(&self, t: &TrajectorySpec) -> Result<State> {
        let xdot = match (&t.xdot0, &self.field) {
            (Some(v), _) => v.clone(),
            (None, Some(field)) => field.value(&t.x0)?.as_slice().to_vec(),
            (None, None) => {
                return Err(Error::Validation(format!(
                    "trajectory `{}`: `xdot0` is required without a field",
                    t.name
                )))
            }
        };
        State::new(t.x0.clone(), xdot)
    }
}

fn bounds(name: &str, given: &Option<Vec<f64>>, default: Option<&Vec<f64>>, dim: usize) -> Result<Vec<f64>> {
    let v = match (given, default) {
        (Some(v), _) => v.clone(),
        (None, Some(d)) => d.clone(),
        (None, None) => {
            return Err(Error::Validation(format!(
                "sample.{name} is required for metrics without a default box"
            )))
        }
    };
    if v.len() != dim {
        return Err(Error::Validation(format!(
            "sample.{name} has {} entries, expected {dim}",
            v.len()
        )));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::Validation(format!("sample.{name} must be finite")));
    }
    Ok(v)
}

pub fn compile(scenario: &Scenario) -> Result<Compiled> {
    let mb = build_metric(&scenario.metric, "metric")?;
    let chart = mb.metric.chart();
    let n = chart.dim;
    let metric: Arc<dyn MetricField> = Arc::new(mb.metric);

    let lower = bounds("lower", &scenario.sample.lower, mb.bounds.as_ref().map(|b| &b.0), n)?;
    let upper = bounds("upper", &scenario.sample.upper, mb.bounds.as_ref().map(|b| &b.1), n)?;
    if lower.iter().zip(&upper).any(|(lo, hi)| lo > hi) {
        return Err(Error::Validation("sample.lower must not exceed sample.upper".into()));
    }
    let unit = vec![1.0; n];
    let minus_unit = vec![-1.0; n];
    let velocity_lower = bounds("velocity_lower", &scenario.sample.velocity_lower, Some(&minus_unit), n)?;
    let velocity_upper = bounds("velocity_upper", &scenario.sample.velocity_upper, Some(&unit), n)?;

    let base_force = build_force(chart, scenario.force.as_ref())?;
    let constrained = match scenario.constraint {
        ConstraintSpec::None => None,
        ConstraintSpec::Time => {
            if !chart.time {
                return Err(Error::Validation(
                    "the time constraint needs a metric with a time coordinate".into(),
                ));
            }
            Some(time_constrain(metric.clone(), base_force.clone(), 0)?)
        }
        ConstraintSpec::Relativistic => Some(relativistic_correction(metric.clone(), base_force.clone())?),
    };
    let (system_force, newton) = match &constrained {
        Some(sys) => (sys.modified_force(), sys.newton_field()),
        None => (base_force.clone(), newton_field(metric.clone(), base_force.clone())?),
    };
    let field = match &scenario.field {
        Some(f) => {
            if f.components.len() != n {
                return Err(Error::Validation(format!(
                    "field has {} components, expected {n}",
                    f.components.len()
                )));
            }
            Some(vector(chart, "field.components", &f.components)?)
        }
        None => None,
    };
    let fluid = scenario
        .fluid
        .as_ref()
        .map(|f| build_fluid(chart, f, mb.background.as_ref()))
        .transpose()?;
    let hamilton_jacobi = scenario
        .hamilton_jacobi
        .as_ref()
        .map(|h| build_hj(chart, h))
        .transpose()?;
    let mut names = std::collections::BTreeSet::new();
    for c in &scenario.checks {
        if !names.insert(c.name.as_str()) {
            return Err(Error::Validation(format!("duplicate check name `{}`", c.name)));
        }
        if !(c.tolerance >= 0.0) {
            return Err(Error::Validation(format!("check `{}`: tolerance must be >= 0", c.name)));
        }
    }
    for t in &scenario.trajectories {
        if t.x0.len() != n || t.xdot0.as_ref().is_some_and(|v| v.len() != n) {
            return Err(Error::Validation(format!(
                "trajectory `{}`: initial state must have {n} components",
                t.name
            )));
        }
        if t.xdot0.is_none() && field.is_none() {
            return Err(Error::Validation(format!(
                "trajectory `{}`: `xdot0` is required without a field",
                t.name
            )));
        }
    }
    Ok(Compiled {
        scenario: scenario.clone(),
        chart,
        metric,
        background: mb.background,
        lower,
        upper,
        count: scenario.sample.count.unwrap_or(100),
        velocity_lower,
        velocity_upper,
        base_force,
        constrained,
        system_force,
        newton,
        field,
        fluid,
        hamilton_jacobi,
    })
}
