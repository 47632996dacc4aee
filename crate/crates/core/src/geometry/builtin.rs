use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;

use super::fields::{metric_partials, DiffMode, ExprMetric, MetricField};
use super::{christoffel, ChristoffelTable};
use crate::error::{Error, Result};
use crate::expr::{Bindings, Chart, Expr, Var};

/// Names accepted by [`builtin`].
pub const BUILTIN_NAMES: &[&str] = &[
    "euclidean",
    "minkowski",
    "polar",
    "sphere",
    "curved",
    "static",
    "flrw-linear",
    "flrw-exp",
    "flrw-sin",
    "flrw-curved",
];

/// A named metric together with a coordinate box on which it is regular.
#[derive(Debug, Clone)]
pub struct Builtin {
    pub name: String,
    pub metric: ExprMetric,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    /// Scale factor and spatial metric for the FLRW family.
    pub flrw: Option<(Expr, ExprMetric)>,
}

fn num(c: f64) -> Expr {
    Expr::Num(c)
}

fn euclidean(n: usize) -> Result<ExprMetric> {
    Ok(ExprMetric::diagonal(Chart::spatial(n), vec![num(1.0); n])?.with_signature(vec![1; n]))
}

/// `(1 + x1^2) δ_ij + ½ sin(x_i) sin(x_j)`, positive definite everywhere.
fn curved(n: usize) -> Result<ExprMetric> {
    let chart = Chart::spatial(n);
    let conformal: Expr = "1 + x1^2".parse()?;
    let s = |i: usize| Expr::apply(crate::expr::Func::Sin, Expr::x(i as u32 + 1));
    let comps = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let rank_one = Expr::mul(num(0.5), Expr::mul(s(i.min(j)), s(i.max(j))));
                    if i == j {
                        Expr::add(conformal.clone(), rank_one)
                    } else {
                        rank_one
                    }
                })
                .collect()
        })
        .collect();
    Ok(ExprMetric::new(chart, comps)?.with_signature(vec![1; n]))
}

/// Looks up a builtin metric of total dimension `dim`.
pub fn builtin(name: &str, dim: usize) -> Result<Builtin> {
    if dim == 0 {
        return Err(Error::Validation("dimension must be at least 1".into()));
    }
    let needs_time = |min: usize| -> Result<usize> {
        if dim < min {
            Err(Error::Validation(format!("builtin `{name}` needs dimension >= {min}")))
        } else {
            Ok(dim - 1)
        }
    };
    let cube = |n: usize, lo: f64, hi: f64| (vec![lo; n], vec![hi; n]);
    let flrw = |scale: &str, spatial: ExprMetric, t_box: (f64, f64)| -> Result<Builtin> {
        let a: Expr = scale.parse()?;
        let n = spatial.chart().dim;
        let metric = ExprMetric::flrw(&a, &spatial)?;
        let (mut lower, mut upper) = cube(n, -1.0, 1.0);
        lower.insert(0, t_box.0);
        upper.insert(0, t_box.1);
        Ok(Builtin {
            name: name.to_string(),
            metric,
            lower,
            upper,
            flrw: Some((a, spatial)),
        })
    };
    let plain = |metric: ExprMetric, (lower, upper): (Vec<f64>, Vec<f64>)| Builtin {
        name: name.to_string(),
        metric,
        lower,
        upper,
        flrw: None,
    };
    match name {
        "euclidean" => Ok(plain(euclidean(dim)?, cube(dim, -1.0, 1.0))),
        "minkowski" => {
            let n = needs_time(2)?;
            let mut diag = vec![num(-1.0); dim];
            diag[0] = num(1.0);
            let mut sig = vec![-1; dim];
            sig[0] = 1;
            let m = ExprMetric::diagonal(Chart::spacetime(n), diag)?.with_signature(sig);
            Ok(plain(m, cube(dim, -1.0, 1.0)))
        }
        "polar" | "sphere" => {
            if dim != 2 {
                return Err(Error::Validation(format!("builtin `{name}` is two-dimensional")));
            }
            let (g22, lower, upper) = if name == "polar" {
                ("x1^2", vec![0.5, -3.0], vec![2.0, 3.0])
            } else {
                ("sin(x1)^2", vec![0.3, -3.0], vec![2.8, 3.0])
            };
            let m = ExprMetric::diagonal(Chart::spatial(2), vec![num(1.0), g22.parse()?])?
                .with_signature(vec![1, 1]);
            Ok(plain(m, (lower, upper)))
        }
        "curved" => Ok(plain(curved(dim)?, cube(dim, -1.0, 1.0))),
        "static" => {
            let n = needs_time(2)?;
            let m = ExprMetric::static_product(&curved(n)?)?;
            Ok(plain(m, cube(dim, -1.0, 1.0)))
        }
        "flrw-linear" => flrw("t", euclidean(needs_time(2)?)?, (0.5, 2.0)),
        "flrw-exp" => flrw("exp(t)", euclidean(needs_time(2)?)?, (-1.0, 1.0)),
        "flrw-sin" => flrw("2 + sin(t)", euclidean(needs_time(2)?)?, (-2.0, 2.0)),
        "flrw-curved" => flrw("2 + sin(t)", curved(needs_time(2)?)?, (-2.0, 2.0)),
        _ => Err(Error::Validation(format!(
            "unknown builtin metric `{name}` (known: {})",
            BUILTIN_NAMES.join(", ")
        ))),
    }
}

type TimeFn = Arc<dyn Fn(f64) -> Result<f64> + Send + Sync>;

/// Scale factor `a(t)` with its rate `da/dt`.
#[derive(Clone)]
pub struct ScaleFactor {
    value: TimeFn,
    rate: TimeFn,
    expr: Option<Expr>,
}

impl ScaleFactor {
    pub fn from_expr(expr: Expr) -> Result<Self> {
        Chart::spacetime(0).check(&expr)?;
        let rate_expr = expr.differentiate(Var::T);
        let (e1, e2) = (expr.clone(), rate_expr);
        Ok(ScaleFactor {
            value: Arc::new(move |t| e1.eval(&Bindings::new(Some(t), &[]))),
            rate: Arc::new(move |t| e2.eval(&Bindings::new(Some(t), &[]))),
            expr: Some(expr),
        })
    }

    pub fn parse(src: &str) -> Result<Self> {
        ScaleFactor::from_expr(src.parse()?)
    }

    pub fn from_fns(
        value: impl Fn(f64) -> f64 + Send + Sync + 'static,
        rate: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        ScaleFactor {
            value: Arc::new(move |t| Ok(value(t))),
            rate: Arc::new(move |t| Ok(rate(t))),
            expr: None,
        }
    }

    pub fn constant(a: f64) -> Self {
        ScaleFactor::from_fns(move |_| a, |_| 0.0)
    }

    pub fn value(&self, t: f64) -> Result<f64> {
        (self.value)(t)
    }

    pub fn rate(&self, t: f64) -> Result<f64> {
        (self.rate)(t)
    }

    /// `a(t)` and `da/dt`, failing if `a` vanishes.
    pub fn eval(&self, t: f64) -> Result<(f64, f64)> {
        let a = self.value(t)?;
        if a == 0.0 || !a.is_finite() {
            return Err(Error::ZeroScaleFactor { t });
        }
        let rate = self.rate(t)?;
        if !rate.is_finite() {
            return Err(Error::non_finite("scale factor rate", &[t]));
        }
        Ok((a, rate))
    }

    pub fn expr(&self) -> Option<&Expr> {
        self.expr.as_ref()
    }
}

impl fmt::Debug for ScaleFactor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.expr {
            Some(e) => write!(f, "ScaleFactor({e})"),
            None => write!(f, "ScaleFactor(<fn>)"),
        }
    }
}

/// `g = dt^2 - a(t)^2 h` assembled from a spatial metric and a scale factor.
#[derive(Clone)]
pub struct FlrwMetric {
    spatial: Arc<dyn MetricField>,
    scale: ScaleFactor,
}

impl FlrwMetric {
    pub fn new(spatial: Arc<dyn MetricField>, scale: ScaleFactor) -> Self {
        FlrwMetric { spatial, scale }
    }

    pub fn spatial(&self) -> &dyn MetricField {
        self.spatial.as_ref()
    }

    pub fn scale(&self) -> &ScaleFactor {
        &self.scale
    }

    /// Christoffel symbols from the closed-form FLRW table:
    /// `Γ^0_ij = a ȧ h_ij`, `Γ^k_0j = (ȧ/a) δ^k_j`, `Γ^k_ij = Γ'^k_ij` of `h`,
    /// all others zero.
    pub fn closed_form_christoffel(&self, coords: &[f64]) -> Result<ChristoffelTable> {
        let n = self.spatial.dim();
        if coords.len() != n + 1 {
            return Err(Error::mismatch("FLRW point", n + 1, coords.len()));
        }
        let (t, x) = (coords[0], &coords[1..]);
        let (a, rate) = self.scale.eval(t)?;
        let h = self.spatial.components(x)?;
        let spatial_gamma = christoffel(self.spatial.as_ref(), x)?;
        let mut table = ChristoffelTable::zeros(n + 1);
        for i in 0..n {
            for j in 0..n {
                table.set(0, i + 1, j + 1, a * rate * h[(i, j)]);
            }
            table.set(i + 1, 0, i + 1, rate / a);
            table.set(i + 1, i + 1, 0, rate / a);
        }
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    table.set(k + 1, i + 1, j + 1, spatial_gamma.get(k, i, j));
                }
            }
        }
        Ok(table)
    }
}

impl fmt::Debug for FlrwMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FlrwMetric")
            .field("spatial_dim", &self.spatial.dim())
            .field("scale", &self.scale)
            .finish()
    }
}

/// `g = dt^2 + g^s` with a time-independent spatial metric.
#[derive(Clone)]
pub struct StaticMetric {
    spatial: Arc<dyn MetricField>,
}

impl StaticMetric {
    pub fn new(spatial: Arc<dyn MetricField>) -> Self {
        StaticMetric { spatial }
    }

    pub fn spatial(&self) -> &dyn MetricField {
        self.spatial.as_ref()
    }
}

impl fmt::Debug for StaticMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "StaticMetric(spatial_dim = {})", self.spatial.dim())
    }
}

impl MetricField for StaticMetric {
    fn dim(&self) -> usize {
        self.spatial.dim() + 1
    }

    fn components(&self, coords: &[f64]) -> Result<DMatrix<f64>> {
        let n = self.spatial.dim();
        let mut g = DMatrix::zeros(n + 1, n + 1);
        g[(0, 0)] = 1.0;
        g.view_mut((1, 1), (n, n))
            .copy_from(&self.spatial.components(&coords[1..])?);
        Ok(g)
    }

    fn partials(&self, coords: &[f64]) -> Option<Result<Vec<DMatrix<f64>>>> {
        let n = self.spatial.dim();
        let build = || -> Result<Vec<DMatrix<f64>>> {
            let dh = metric_partials(self.spatial.as_ref(), &coords[1..], DiffMode::Auto)?;
            let mut out = vec![DMatrix::zeros(n + 1, n + 1)];
            for dk in dh {
                let mut m = DMatrix::zeros(n + 1, n + 1);
                m.view_mut((1, 1), (n, n)).copy_from(&dk);
                out.push(m);
            }
            Ok(out)
        };
        Some(build())
    }

    fn signature(&self) -> Option<Vec<i8>> {
        let spatial = self.spatial.signature()?;
        Some(std::iter::once(1).chain(spatial).collect())
    }
}

impl MetricField for FlrwMetric {
    fn dim(&self) -> usize {
        self.spatial.dim() + 1
    }

    fn components(&self, coords: &[f64]) -> Result<DMatrix<f64>> {
        let n = self.spatial.dim();
        let a = self.scale.value(coords[0])?;
        let h = self.spatial.components(&coords[1..])?;
        let mut g = DMatrix::zeros(n + 1, n + 1);
        g[(0, 0)] = 1.0;
        g.view_mut((1, 1), (n, n)).copy_from(&(h * (-a * a)));
        Ok(g)
    }

    fn partials(&self, coords: &[f64]) -> Option<Result<Vec<DMatrix<f64>>>> {
        let n = self.spatial.dim();
        let build = || -> Result<Vec<DMatrix<f64>>> {
            let t = coords[0];
            let x = &coords[1..];
            let a = self.scale.value(t)?;
            let rate = self.scale.rate(t)?;
            let h = self.spatial.components(x)?;
            let dh = metric_partials(self.spatial.as_ref(), x, DiffMode::Auto)?;
            let mut out = Vec::with_capacity(n + 1);
            let mut dt = DMatrix::zeros(n + 1, n + 1);
            dt.view_mut((1, 1), (n, n)).copy_from(&(h * (-2.0 * a * rate)));
            out.push(dt);
            for dk in dh {
                let mut m = DMatrix::zeros(n + 1, n + 1);
                m.view_mut((1, 1), (n, n)).copy_from(&(dk * (-a * a)));
                out.push(m);
            }
            Ok(out)
        };
        Some(build())
    }

    fn signature(&self) -> Option<Vec<i8>> {
        let spatial = self.spatial.signature()?;
        Some(std::iter::once(1).chain(spatial.into_iter().map(|s| -s)).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::super::{christoffel_with, metric_at};
    use super::*;

    #[test]
    fn every_builtin_is_regular_on_its_box() {
        for name in BUILTIN_NAMES {
            let dim = if matches!(*name, "polar" | "sphere") { 2 } else { 3 };
            let b = builtin(name, dim).unwrap();
            for corner in [&b.lower, &b.upper] {
                metric_at(&b.metric, corner).unwrap();
            }
        }
    }

    #[test]
    fn unknown_and_undersized() {
        assert!(builtin("kerr", 4).is_err());
        assert!(builtin("minkowski", 1).is_err());
        assert!(builtin("polar", 3).is_err());
    }

    #[test]
    fn structured_flrw_matches_expression_flrw() {
        let b = builtin("flrw-curved", 3).unwrap();
        let (a, h) = b.flrw.clone().unwrap();
        let structured = FlrwMetric::new(Arc::new(h), ScaleFactor::from_expr(a).unwrap());
        let p = [0.4, 0.3, -0.6];
        let g1 = b.metric.components(&p).unwrap();
        let g2 = structured.components(&p).unwrap();
        assert!((g1 - g2).amax() < 1e-15);
        let c1 = christoffel_with(&b.metric, &p, DiffMode::Auto).unwrap();
        let c2 = christoffel_with(&structured, &p, DiffMode::Auto).unwrap();
        assert!(c1.max_abs_diff(&c2) < 1e-13);
    }

    #[test]
    fn structured_static_matches_expression_static() {
        let b = builtin("static", 3).unwrap();
        let s = StaticMetric::new(Arc::new(builtin("curved", 2).unwrap().metric));
        let p = [0.4, 0.3, -0.6];
        assert!((b.metric.components(&p).unwrap() - s.components(&p).unwrap()).amax() < 1e-15);
        let c1 = christoffel(&b.metric, &p).unwrap();
        let c2 = christoffel(&s, &p).unwrap();
        assert!(c1.max_abs_diff(&c2) < 1e-14);
    }

    #[test]
    fn zero_scale_factor() {
        let a = ScaleFactor::parse("t").unwrap();
        assert!(matches!(a.eval(0.0), Err(Error::ZeroScaleFactor { .. })));
        assert!(ScaleFactor::parse("x1").is_err());
    }
}
