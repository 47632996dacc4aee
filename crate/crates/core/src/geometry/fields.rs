//! Metric, scalar and vector fields on a single coordinate chart.
//!
//! Each trait exposes point values and, optionally, exact first derivatives.
//! Operators that need derivatives go through [`metric_partials`],
//! [`scalar_differential`] and [`field_jacobian`], which fall back to central
//! finite differences when no exact derivative is available or when
//! [`DiffMode::FiniteDifference`] is requested.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use super::fd;
use crate::error::{ensure_finite, Error, Result};
use crate::expr::{Chart, Expr};

/// How derivatives are obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DiffMode {
    /// Exact derivatives where the field provides them, finite differences otherwise.
    #[default]
    Auto,
    /// Finite differences everywhere.
    FiniteDifference,
}

/// Pseudo-Riemannian metric `g_ij(x)` in a chart.
pub trait MetricField: Send + Sync {
    fn dim(&self) -> usize;

    fn components(&self, x: &[f64]) -> Result<DMatrix<f64>>;

    /// `[dg/dx^0, .., dg/dx^{n-1}]` when known exactly.
    fn partials(&self, _x: &[f64]) -> Option<Result<Vec<DMatrix<f64>>>> {
        None
    }

    /// Signs of the eigenvalues, when fixed by construction.
    fn signature(&self) -> Option<Vec<i8>> {
        None
    }
}

/// Scalar function on a chart.
pub trait ScalarField: Send + Sync {
    fn input_dim(&self) -> usize;

    fn value(&self, x: &[f64]) -> Result<f64>;

    /// Exact `[df/dx^0, ..]` if available.
    fn differential(&self, _x: &[f64]) -> Option<Result<DVector<f64>>> {
        None
    }
}

/// Vector field `v^k(x)`.
///
/// `input_dim` may exceed `dim` by one: such a field is a spatial field
/// parameterized by time, read at coordinates `(t, x1..xn)`.
pub trait VectorField: Send + Sync {
    fn dim(&self) -> usize;

    fn input_dim(&self) -> usize {
        self.dim()
    }

    fn value(&self, x: &[f64]) -> Result<DVector<f64>>;

    /// `J[(k, j)] = dv^k/dx^j` if available.
    fn jacobian(&self, _x: &[f64]) -> Option<Result<DMatrix<f64>>> {
        None
    }

    /// True for spatial fields read at `(t, x)`.
    fn time_dependent(&self) -> bool {
        self.input_dim() == self.dim() + 1
    }
}

fn check_len(what: &str, expected: usize, x: &[f64]) -> Result<()> {
    if x.len() != expected {
        return Err(Error::mismatch(what, expected, x.len()));
    }
    ensure_finite(what, x, x)
}

pub fn metric_partials(
    metric: &dyn MetricField,
    x: &[f64],
    mode: DiffMode,
) -> Result<Vec<DMatrix<f64>>> {
    check_len("metric point", metric.dim(), x)?;
    if mode == DiffMode::Auto {
        if let Some(exact) = metric.partials(x) {
            let parts = exact?;
            for p in &parts {
                ensure_finite("metric partials", x, p.as_slice())?;
            }
            return Ok(parts);
        }
    }
    let parts = fd::matrix_partials(x, |p| metric.components(p))?;
    for p in &parts {
        ensure_finite("metric partials", x, p.as_slice())?;
    }
    Ok(parts)
}

/// `df` as a covector.
pub fn scalar_differential(
    field: &dyn ScalarField,
    x: &[f64],
    mode: DiffMode,
) -> Result<DVector<f64>> {
    check_len("scalar point", field.input_dim(), x)?;
    let d = match (mode, field.differential(x)) {
        (DiffMode::Auto, Some(exact)) => exact?,
        _ => fd::gradient(x, |p| field.value(p))?,
    };
    ensure_finite("scalar differential", x, d.as_slice())?;
    Ok(d)
}

pub fn field_jacobian(field: &dyn VectorField, x: &[f64], mode: DiffMode) -> Result<DMatrix<f64>> {
    check_len("field point", field.input_dim(), x)?;
    let j = match (mode, field.jacobian(x)) {
        (DiffMode::Auto, Some(exact)) => exact?,
        _ => fd::jacobian(x, field.dim(), |p| field.value(p))?,
    };
    ensure_finite("field jacobian", x, j.as_slice())?;
    Ok(j)
}

pub(crate) fn field_value(field: &dyn VectorField, x: &[f64]) -> Result<DVector<f64>> {
    check_len("field point", field.input_dim(), x)?;
    let v = field.value(x)?;
    if v.len() != field.dim() {
        return Err(Error::mismatch("field value", field.dim(), v.len()));
    }
    ensure_finite("vector field", x, v.as_slice())?;
    Ok(v)
}

pub(crate) fn scalar_value(field: &dyn ScalarField, x: &[f64]) -> Result<f64> {
    check_len("scalar point", field.input_dim(), x)?;
    let v = field.value(x)?;
    ensure_finite("scalar field", x, &[v])?;
    Ok(v)
}

// ---------------------------------------------------------------------------
// Closure-backed fields

type MatFn = Arc<dyn Fn(&[f64]) -> DMatrix<f64> + Send + Sync>;
type MatsFn = Arc<dyn Fn(&[f64]) -> Vec<DMatrix<f64>> + Send + Sync>;
type VecFn = Arc<dyn Fn(&[f64]) -> DVector<f64> + Send + Sync>;
type RealFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// Metric given by closures.
#[derive(Clone)]
pub struct FnMetric {
    dim: usize,
    components: MatFn,
    partials: Option<MatsFn>,
    signature: Option<Vec<i8>>,
}

impl FnMetric {
    pub fn new(dim: usize, components: impl Fn(&[f64]) -> DMatrix<f64> + Send + Sync + 'static) -> Self {
        FnMetric {
            dim,
            components: Arc::new(components),
            partials: None,
            signature: None,
        }
    }

    pub fn with_partials(
        mut self,
        partials: impl Fn(&[f64]) -> Vec<DMatrix<f64>> + Send + Sync + 'static,
    ) -> Self {
        self.partials = Some(Arc::new(partials));
        self
    }

    pub fn with_signature(mut self, signature: Vec<i8>) -> Self {
        self.signature = Some(signature);
        self
    }
}

impl fmt::Debug for FnMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FnMetric")
            .field("dim", &self.dim)
            .field("analytic_partials", &self.partials.is_some())
            .finish()
    }
}

impl MetricField for FnMetric {
    fn dim(&self) -> usize {
        self.dim
    }

    fn components(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        let g = (self.components)(x);
        ensure_finite("metric", x, g.as_slice())?;
        Ok(g)
    }

    fn partials(&self, x: &[f64]) -> Option<Result<Vec<DMatrix<f64>>>> {
        self.partials.as_ref().map(|p| Ok(p(x)))
    }

    fn signature(&self) -> Option<Vec<i8>> {
        self.signature.clone()
    }
}

/// Scalar field given by closures.
#[derive(Clone)]
pub struct FnScalar {
    input_dim: usize,
    value: RealFn,
    differential: Option<VecFn>,
}

impl FnScalar {
    pub fn new(input_dim: usize, value: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        FnScalar {
            input_dim,
            value: Arc::new(value),
            differential: None,
        }
    }

    pub fn constant(input_dim: usize, c: f64) -> Self {
        FnScalar::new(input_dim, move |_| c)
            .with_differential(move |x| DVector::zeros(x.len()))
    }

    pub fn with_differential(
        mut self,
        d: impl Fn(&[f64]) -> DVector<f64> + Send + Sync + 'static,
    ) -> Self {
        self.differential = Some(Arc::new(d));
        self
    }
}

impl fmt::Debug for FnScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FnScalar").field("input_dim", &self.input_dim).finish()
    }
}

impl ScalarField for FnScalar {
    fn input_dim(&self) -> usize {
        self.input_dim
    }

    fn value(&self, x: &[f64]) -> Result<f64> {
        Ok((self.value)(x))
    }

    fn differential(&self, x: &[f64]) -> Option<Result<DVector<f64>>> {
        self.differential.as_ref().map(|d| Ok(d(x)))
    }
}

/// Vector field given by closures.
#[derive(Clone)]
pub struct FnVectorField {
    dim: usize,
    input_dim: usize,
    value: VecFn,
    jacobian: Option<MatFn>,
}

impl FnVectorField {
    pub fn new(dim: usize, value: impl Fn(&[f64]) -> DVector<f64> + Send + Sync + 'static) -> Self {
        FnVectorField {
            dim,
            input_dim: dim,
            value: Arc::new(value),
            jacobian: None,
        }
    }

    /// A spatial field of `dim` components read at `(t, x)`.
    pub fn time_dependent(
        dim: usize,
        value: impl Fn(&[f64]) -> DVector<f64> + Send + Sync + 'static,
    ) -> Self {
        FnVectorField {
            dim,
            input_dim: dim + 1,
            value: Arc::new(value),
            jacobian: None,
        }
    }

    pub fn constant(components: Vec<f64>) -> Self {
        let n = components.len();
        let v = DVector::from_vec(components);
        FnVectorField::new(n, move |_| v.clone()).with_jacobian(move |_| DMatrix::zeros(n, n))
    }

    pub fn with_jacobian(
        mut self,
        jac: impl Fn(&[f64]) -> DMatrix<f64> + Send + Sync + 'static,
    ) -> Self {
        self.jacobian = Some(Arc::new(jac));
        self
    }
}

impl fmt::Debug for FnVectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FnVectorField")
            .field("dim", &self.dim)
            .field("input_dim", &self.input_dim)
            .finish()
    }
}

impl VectorField for FnVectorField {
    fn dim(&self) -> usize {
        self.dim
    }

    fn input_dim(&self) -> usize {
        self.input_dim
    }

    fn value(&self, x: &[f64]) -> Result<DVector<f64>> {
        Ok((self.value)(x))
    }

    fn jacobian(&self, x: &[f64]) -> Option<Result<DMatrix<f64>>> {
        self.jacobian.as_ref().map(|j| Ok(j(x)))
    }
}

// ---------------------------------------------------------------------------
// Expression-backed fields: exact derivatives by symbolic differentiation.

/// Scalar field given by an expression.
#[derive(Debug, Clone, PartialEq)]
pub struct ExprScalar {
    chart: Chart,
    expr: Expr,
    differential: Vec<Expr>,
}

impl ExprScalar {
    pub fn new(chart: Chart, expr: Expr) -> Result<Self> {
        chart.check(&expr)?;
        let differential = (0..chart.dim).map(|k| expr.differentiate(chart.var(k))).collect();
        Ok(ExprScalar {
            chart,
            expr,
            differential,
        })
    }

    pub fn parse(chart: Chart, src: &str) -> Result<Self> {
        ExprScalar::new(chart, src.parse()?)
    }

    pub fn expr(&self) -> &Expr {
        &self.expr
    }

    pub fn chart(&self) -> Chart {
        self.chart
    }
}

impl ScalarField for ExprScalar {
    fn input_dim(&self) -> usize {
        self.chart.dim
    }

    fn value(&self, x: &[f64]) -> Result<f64> {
        self.expr.eval(&self.chart.bindings(x))
    }

    fn differential(&self, x: &[f64]) -> Option<Result<DVector<f64>>> {
        let b = self.chart.bindings(x);
        Some(
            self.differential
                .iter()
                .map(|d| d.eval(&b))
                .collect::<Result<Vec<_>>>()
                .map(DVector::from_vec),
        )
    }
}

/// Vector field given by component expressions.
#[derive(Debug, Clone, PartialEq)]
pub struct ExprVectorField {
    chart: Chart,
    components: Vec<Expr>,
    jacobian: Vec<Vec<Expr>>,
}

impl ExprVectorField {
    /// `chart` describes the input coordinates. A field with one component
    /// fewer than a space-time chart is a spatial field read at `(t, x)`.
    pub fn new(chart: Chart, components: Vec<Expr>) -> Result<Self> {
        let n = components.len();
        if n != chart.dim && !(chart.time && n + 1 == chart.dim) {
            return Err(Error::mismatch("vector field components", chart.dim, n));
        }
        for c in &components {
            chart.check(c)?;
        }
        let jacobian = components
            .iter()
            .map(|c| (0..chart.dim).map(|j| c.differentiate(chart.var(j))).collect())
            .collect();
        Ok(ExprVectorField {
            chart,
            components,
            jacobian,
        })
    }

    pub fn parse(chart: Chart, srcs: &[&str]) -> Result<Self> {
        let comps = srcs
            .iter()
            .map(|s| s.parse::<Expr>().map_err(Error::from))
            .collect::<Result<Vec<_>>>()?;
        ExprVectorField::new(chart, comps)
    }

    pub fn components(&self) -> &[Expr] {
        &self.components
    }

    pub fn chart(&self) -> Chart {
        self.chart
    }
}

impl VectorField for ExprVectorField {
    fn dim(&self) -> usize {
        self.components.len()
    }

    fn input_dim(&self) -> usize {
        self.chart.dim
    }

    fn value(&self, x: &[f64]) -> Result<DVector<f64>> {
        let b = self.chart.bindings(x);
        self.components
            .iter()
            .map(|c| c.eval(&b))
            .collect::<Result<Vec<_>>>()
            .map(DVector::from_vec)
    }

    fn jacobian(&self, x: &[f64]) -> Option<Result<DMatrix<f64>>> {
        let b = self.chart.bindings(x);
        let rows = self.components.len();
        let cols = self.chart.dim;
        let mut out = DMatrix::zeros(rows, cols);
        for (k, row) in self.jacobian.iter().enumerate() {
            for (j, e) in row.iter().enumerate() {
                match e.eval(&b) {
                    Ok(v) => out[(k, j)] = v,
                    Err(err) => return Some(Err(err)),
                }
            }
        }
        Some(Ok(out))
    }
}

/// Metric given by a symmetric matrix of expressions.
#[derive(Debug, Clone, PartialEq)]
pub struct ExprMetric {
    chart: Chart,
    components: Vec<Vec<Expr>>,
    partials: Vec<Vec<Vec<Expr>>>,
    signature: Option<Vec<i8>>,
}

impl ExprMetric {
    pub fn new(chart: Chart, components: Vec<Vec<Expr>>) -> Result<Self> {
        let n = chart.dim;
        if components.len() != n {
            return Err(Error::mismatch("metric rows", n, components.len()));
        }
        for (i, row) in components.iter().enumerate() {
            if row.len() != n {
                return Err(Error::mismatch("metric columns", n, row.len()));
            }
            for (j, e) in row.iter().enumerate() {
                chart.check(e)?;
                if components[j][i] != *e {
                    return Err(Error::Validation(format!(
                        "metric component ({i},{j}) = `{e}` differs from ({j},{i}) = `{}`",
                        components[j][i]
                    )));
                }
            }
        }
        let partials = (0..n)
            .map(|k| {
                let var = chart.var(k);
                components
                    .iter()
                    .map(|row| row.iter().map(|e| e.differentiate(var)).collect())
                    .collect()
            })
            .collect();
        Ok(ExprMetric {
            chart,
            components,
            partials,
            signature: None,
        })
    }

    pub fn parse(chart: Chart, rows: &[Vec<&str>]) -> Result<Self> {
        let comps = rows
            .iter()
            .map(|row| {
                row.iter()
                    .map(|s| s.parse::<Expr>().map_err(Error::from))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        ExprMetric::new(chart, comps)
    }

    pub fn diagonal(chart: Chart, diag: Vec<Expr>) -> Result<Self> {
        let n = diag.len();
        let mut comps = vec![vec![Expr::Num(0.0); n]; n];
        for (i, d) in diag.into_iter().enumerate() {
            comps[i][i] = d;
        }
        ExprMetric::new(chart, comps)
    }

    /// `dt^2 + g^s` on `(t, x1..xn)` for a spatial metric `g^s`.
    pub fn static_product(spatial: &ExprMetric) -> Result<Self> {
        Self::warped_product(&Expr::Num(1.0), spatial, Expr::Num(1.0))
    }

    /// `dt^2 - a(t)^2 h` on `(t, x1..xn)`.
    pub fn flrw(scale: &Expr, h: &ExprMetric) -> Result<Self> {
        let factor = Expr::neg(Expr::pow(scale.clone(), Expr::Num(2.0)));
        Self::warped_product(&factor, h, Expr::Num(1.0))
    }

    fn warped_product(factor: &Expr, spatial: &ExprMetric, g00: Expr) -> Result<Self> {
        if spatial.chart.time {
            return Err(Error::Validation("spatial metric must not use t".into()));
        }
        let n = spatial.chart.dim;
        let chart = Chart::spacetime(n);
        let mut comps = vec![vec![Expr::Num(0.0); n + 1]; n + 1];
        comps[0][0] = g00;
        for i in 0..n {
            for j in 0..n {
                comps[i + 1][j + 1] = Expr::mul(factor.clone(), spatial.components[i][j].clone());
            }
        }
        let mut m = ExprMetric::new(chart, comps)?;
        if let Some(sig) = &spatial.signature {
            let sign = if factor.as_num().is_some_and(|c| c > 0.0) { 1 } else { -1 };
            m.signature = Some(std::iter::once(1).chain(sig.iter().map(|s| s * sign)).collect());
        }
        Ok(m)
    }

    pub fn with_signature(mut self, signature: Vec<i8>) -> Self {
        self.signature = Some(signature);
        self
    }

    pub fn chart(&self) -> Chart {
        self.chart
    }

    pub fn component(&self, i: usize, j: usize) -> &Expr {
        &self.components[i][j]
    }
}

impl MetricField for ExprMetric {
    fn dim(&self) -> usize {
        self.chart.dim
    }

    fn components(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        eval_matrix(&self.components, &self.chart.bindings(x))
    }

    fn partials(&self, x: &[f64]) -> Option<Result<Vec<DMatrix<f64>>>> {
        let b = self.chart.bindings(x);
        Some(self.partials.iter().map(|m| eval_matrix(m, &b)).collect())
    }

    fn signature(&self) -> Option<Vec<i8>> {
        self.signature.clone()
    }
}

fn eval_matrix(m: &[Vec<Expr>], b: &crate::expr::Bindings<'_>) -> Result<DMatrix<f64>> {
    let n = m.len();
    let mut out = DMatrix::zeros(n, n);
    for (i, row) in m.iter().enumerate() {
        for (j, e) in row.iter().enumerate() {
            out[(i, j)] = e.eval(b)?;
        }
    }
    Ok(out)
}

macro_rules! forward_arc {
    ($trait:ident { $($body:tt)* }) => {
        impl<T: $trait + ?Sized> $trait for Arc<T> { $($body)* }
        impl<T: $trait + ?Sized> $trait for &T { $($body)* }
    };
}

forward_arc!(MetricField {
    fn dim(&self) -> usize { (**self).dim() }
    fn components(&self, x: &[f64]) -> Result<DMatrix<f64>> { (**self).components(x) }
    fn partials(&self, x: &[f64]) -> Option<Result<Vec<DMatrix<f64>>>> { (**self).partials(x) }
    fn signature(&self) -> Option<Vec<i8>> { (**self).signature() }
});

forward_arc!(ScalarField {
    fn input_dim(&self) -> usize { (**self).input_dim() }
    fn value(&self, x: &[f64]) -> Result<f64> { (**self).value(x) }
    fn differential(&self, x: &[f64]) -> Option<Result<DVector<f64>>> { (**self).differential(x) }
});

forward_arc!(VectorField {
    fn dim(&self) -> usize { (**self).dim() }
    fn input_dim(&self) -> usize { (**self).input_dim() }
    fn value(&self, x: &[f64]) -> Result<DVector<f64>> { (**self).value(x) }
    fn jacobian(&self, x: &[f64]) -> Option<Result<DMatrix<f64>>> { (**self).jacobian(x) }
});

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn expr_metric_partials_match_fd() {
        let m = ExprMetric::parse(
            Chart::spatial(2),
            &[vec!["1 + x1^2", "x1*x2"], vec!["x1*x2", "exp(x2)"]],
        )
        .unwrap();
        let x = [0.3, -0.7];
        let exact = metric_partials(&m, &x, DiffMode::Auto).unwrap();
        let approx = metric_partials(&m, &x, DiffMode::FiniteDifference).unwrap();
        for (a, b) in exact.iter().zip(&approx) {
            assert!((a - b).amax() < 1e-9);
        }
    }

    #[test]
    fn asymmetric_metric_rejected() {
        let err = ExprMetric::parse(Chart::spatial(2), &[vec!["1", "x1"], vec!["0", "1"]]);
        assert!(matches!(err, Err(Error::Validation(_))));
    }

    #[test]
    fn time_dependent_expr_field() {
        let v = ExprVectorField::parse(Chart::spacetime(1), &["1/t^2"]).unwrap();
        assert!(v.time_dependent());
        let j = field_jacobian(&v, &[2.0, 0.0], DiffMode::Auto).unwrap();
        assert_eq!(j.shape(), (1, 2));
        assert!((j[(0, 0)] + 0.25).abs() < 1e-15);
    }

    #[test]
    fn wrong_point_length() {
        let m = ExprMetric::diagonal(Chart::spatial(2), vec![Expr::Num(1.0), Expr::Num(1.0)]).unwrap();
        assert!(matches!(
            metric_partials(&m, &[1.0], DiffMode::Auto),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}
