//! Randomized checks of the field identities on generated polynomial data.

use std::sync::Arc;

use rand::Rng;
use rayon::prelude::*;

use crate::error::Result;
use crate::expr::{Chart, Expr};
use crate::fluids::{steady_euler_residual, Background};
use crate::geometry::{
    builtin, christoffel_with, covariant_acceleration, metric_at, metric_compatibility_defect,
    scalar_differential, DiffMode, ExprScalar, ExprVectorField, MetricField,
    ScaleFactor,
};
use crate::intermediate::vorticity_identity_gap;
use crate::sampling::{derive_seed, rng};

/// Maximum of one identity over a number of random trials.
#[derive(Debug, Clone, PartialEq)]
pub struct IdentityResult {
    pub name: &'static str,
    pub trials: usize,
    pub max: f64,
    pub tolerance: f64,
}

impl IdentityResult {
    pub fn passed(&self) -> bool {
        self.max <= self.tolerance
    }
}

/// A polynomial of total degree at most 3 in the chart variables with
/// coefficients drawn from `[-1, 1]`.
pub fn random_polynomial(chart: Chart, r: &mut impl Rng) -> Expr {
    let n = chart.dim;
    let mut terms = vec![Expr::num(r.random_range(-1.0..1.0))];
    let monomial = |vars: &[usize], r: &mut dyn rand::RngCore| {
        let c = r.random_range(-1.0..1.0);
        let body = vars
            .iter()
            .map(|&k| Expr::Var(chart.var(k)))
            .reduce(Expr::mul)
            .expect("non-empty");
        Expr::mul(Expr::num(c), body)
    };
    for i in 0..n {
        terms.push(monomial(&[i], r));
        for j in i..n {
            terms.push(monomial(&[i, j], r));
        }
    }
    // a few cubic terms keep the Jacobians non-constant
    for _ in 0..n {
        let idx = [r.random_range(0..n), r.random_range(0..n), r.random_range(0..n)];
        terms.push(monomial(&idx, r));
    }
    Expr::sum(terms)
}

pub fn random_field(chart: Chart, components: usize, r: &mut impl Rng) -> Result<ExprVectorField> {
    let comps = (0..components).map(|_| random_polynomial(chart, r)).collect();
    ExprVectorField::new(chart, comps)
}

/// A density `1 + Σ c_k x_k²` with `c_k ∈ [0, 1)`, bounded away from zero.
pub fn random_density(chart: Chart, r: &mut impl Rng) -> Result<ExprScalar> {
    let terms = std::iter::once(Expr::num(1.0)).chain((0..chart.dim).map(|k| {
        let x = Expr::Var(chart.var(k));
        Expr::mul(Expr::num(r.random_range(0.0..1.0)), Expr::mul(x.clone(), x))
    }));
    ExprScalar::new(chart, Expr::sum(terms))
}

fn point_in(lower: &[f64], upper: &[f64], r: &mut impl Rng) -> Vec<f64> {
    lower
        .iter()
        .zip(upper)
        .map(|(lo, hi)| if lo == hi { *lo } else { r.random_range(*lo..*hi) })
        .collect()
}

fn suite(
    name: &'static str,
    trials: usize,
    seed: u64,
    tolerance: f64,
    trial: impl Fn(&mut rand_chacha::ChaCha8Rng) -> Result<f64> + Sync,
) -> Result<IdentityResult> {
    let values = (0..trials)
        .into_par_iter()
        .map(|i| trial(&mut rng(derive_seed(seed, &format!("{name}/{i}")))))
        .collect::<Result<Vec<f64>>>()?;
    Ok(IdentityResult {
        name,
        trials,
        max: values.into_iter().fold(0.0, f64::max),
        tolerance,
    })
}

/// Runs every identity suite on a builtin metric.
///
/// `steady-paths` compares the Lamb-form Euler residual with the covariant
/// one, relative to `1 + max |residual|`.
///
/// The Bernoulli suites need a spatial metric, which they use as `g^s` for a
/// static background and as `h` for an FLRW background with `a = 2 + sin t`.
pub fn run_identities(metric_name: &str, dim: usize, trials: usize, seed: u64) -> Result<Vec<IdentityResult>> {
    let b = builtin(metric_name, dim)?;
    let metric: Arc<dyn MetricField> = Arc::new(b.metric.clone());
    let chart = b.metric.chart();
    let (lower, upper) = (b.lower.clone(), b.upper.clone());
    let n = chart.dim;
    let point = |r: &mut rand_chacha::ChaCha8Rng| point_in(&lower, &upper, r);

    let mut out = vec![
        suite("vorticity", trials, seed, 1e-10, |r| {
            let v = random_field(chart, n, r)?;
            Ok(vorticity_identity_gap(metric.as_ref(), &v, &point(r), DiffMode::Auto)?.amax())
        })?,
        suite("vorticity-fd", trials, seed, 1e-6, |r| {
            let v = random_field(chart, n, r)?;
            Ok(vorticity_identity_gap(metric.as_ref(), &v, &point(r), DiffMode::FiniteDifference)?.amax())
        })?,
        suite("metric-compatibility", trials, seed, 1e-10, |r| {
            metric_compatibility_defect(metric.as_ref(), &point(r), DiffMode::Auto)
        })?,
        suite("metric-compatibility-fd", trials, seed, 1e-6, |r| {
            metric_compatibility_defect(metric.as_ref(), &point(r), DiffMode::FiniteDifference)
        })?,
        suite("christoffel-fd", trials, seed, 1e-6, |r| {
            let x = point(r);
            let auto = christoffel_with(metric.as_ref(), &x, DiffMode::Auto)?;
            let fd = christoffel_with(metric.as_ref(), &x, DiffMode::FiniteDifference)?;
            Ok(auto.symmetry_defect().max(auto.max_abs_diff(&fd)))
        })?,
        suite("steady-paths", trials, seed, 1e-12, |r| {
            let v = random_field(chart, n, r)?;
            let p = ExprScalar::new(chart, random_polynomial(chart, r))?;
            let rho = random_density(chart, r)?;
            let x = point(r);
            let lamb = steady_euler_residual(metric.as_ref(), &v, &p, &rho, &x, None)?;
            let at = metric_at(metric.as_ref(), &x)?;
            let rho_x = crate::geometry::scalar_value(&rho, &x)?;
            let covariant = covariant_acceleration(metric.as_ref(), &v, &x)?
                + at.sharp(&scalar_differential(&p, &x, DiffMode::Auto)?) / rho_x;
            let scale = 1.0 + lamb.amax().max(covariant.amax());
            Ok((lamb - covariant).amax() / scale)
        })?,
    ];

    if !chart.time {
        let h = Arc::new(b.metric.clone());
        let backgrounds = [
            ("bernoulli-from-euler-static", Background::Static(h.clone())),
            (
                "bernoulli-from-euler-flrw",
                Background::Flrw {
                    h: h.clone(),
                    a: ScaleFactor::from_expr("2 + sin(t)".parse()?)?,
                },
            ),
        ];
        let st = Chart::spacetime(n);
        let (mut lo, mut hi) = (lower.clone(), upper.clone());
        lo.insert(0, -1.0);
        hi.insert(0, 1.0);
        for (name, bg) in backgrounds {
            out.push(suite(name, trials, seed, 1e-10, |r| {
                let v = random_field(st, n, r)?;
                let p = ExprScalar::new(st, random_polynomial(st, r))?;
                let rho = random_density(st, r)?;
                let tx = point_in(&lo, &hi, r);
                let e = bg.euler_residual(&v, &p, &rho, &tx)?;
                let bern = bg.bernoulli_residual(&v, &p, &rho, &tx)?;
                Ok((bern - bg.pair(&e, &v, &tx)?).abs())
            })?);
        }
    }
    Ok(out)
}
