//! Coordinate-chart differential geometry.
//!
//! Metric evaluation with an invertibility floor, Levi-Civita Christoffel
//! symbols, the musical isomorphisms, gradients and the covariant
//! acceleration `v^j d_j v^k + Γ^k_ij v^i v^j` of a vector field.

mod builtin;
pub mod fd;
mod fields;

use nalgebra::{DMatrix, DVector};

pub use builtin::{builtin, Builtin, FlrwMetric, ScaleFactor, StaticMetric, BUILTIN_NAMES};
pub use fields::{
    field_jacobian, metric_partials, scalar_differential, DiffMode, ExprMetric, ExprScalar,
    ExprVectorField, FnMetric, FnScalar, FnVectorField, MetricField, ScalarField, VectorField,
};
pub(crate) use fields::{field_value, scalar_value};

use crate::error::{ensure_finite, Error, PointDisplay, Result};

/// Smallest admissible `|det g|`.
pub const DET_FLOOR: f64 = 1e-12;

/// Metric components and their inverse at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricAt {
    pub g: DMatrix<f64>,
    pub inverse: DMatrix<f64>,
}

impl MetricAt {
    pub fn dim(&self) -> usize {
        self.g.nrows()
    }

    pub fn flat(&self, v: &DVector<f64>) -> DVector<f64> {
        &self.g * v
    }

    pub fn sharp(&self, w: &DVector<f64>) -> DVector<f64> {
        &self.inverse * w
    }

    pub fn inner(&self, a: &DVector<f64>, b: &DVector<f64>) -> f64 {
        a.dot(&(&self.g * b))
    }
}

pub fn metric_at(metric: &dyn MetricField, x: &[f64]) -> Result<MetricAt> {
    if x.len() != metric.dim() {
        return Err(Error::mismatch("metric point", metric.dim(), x.len()));
    }
    ensure_finite("point", x, x)?;
    let g = metric.components(x)?;
    if g.shape() != (metric.dim(), metric.dim()) {
        return Err(Error::mismatch("metric matrix", metric.dim(), g.nrows()));
    }
    ensure_finite("metric", x, g.as_slice())?;
    let det = g.determinant();
    if !(det.abs() >= DET_FLOOR) {
        return Err(Error::SingularMetric {
            det,
            point: PointDisplay::from(x),
        });
    }
    let inverse = g.clone().try_inverse().ok_or(Error::SingularMetric {
        det,
        point: PointDisplay::from(x),
    })?;
    Ok(MetricAt { g, inverse })
}

/// Christoffel symbols `Γ^k_ij` at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct ChristoffelTable {
    dim: usize,
    values: Vec<f64>,
}

impl ChristoffelTable {
    pub fn zeros(dim: usize) -> Self {
        ChristoffelTable {
            dim,
            values: vec![0.0; dim * dim * dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `Γ^k_ij`.
    pub fn get(&self, k: usize, i: usize, j: usize) -> f64 {
        self.values[(k * self.dim + i) * self.dim + j]
    }

    pub fn set(&mut self, k: usize, i: usize, j: usize, value: f64) {
        self.values[(k * self.dim + i) * self.dim + j] = value;
    }

    /// `Γ^k_ij a^i b^j`.
    pub fn contract(&self, a: &DVector<f64>, b: &DVector<f64>) -> DVector<f64> {
        let n = self.dim;
        DVector::from_fn(n, |k, _| {
            let mut s = 0.0;
            for i in 0..n {
                for j in 0..n {
                    s += self.get(k, i, j) * a[i] * b[j];
                }
            }
            s
        })
    }

    pub fn max_abs_diff(&self, other: &ChristoffelTable) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Largest `|Γ^k_ij - Γ^k_ji|`.
    pub fn symmetry_defect(&self) -> f64 {
        let n = self.dim;
        let mut worst: f64 = 0.0;
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    worst = worst.max((self.get(k, i, j) - self.get(k, j, i)).abs());
                }
            }
        }
        worst
    }
}

/// Levi-Civita symbols `Γ^k_ij = ½ g^kl (d_i g_jl + d_j g_il - d_l g_ij)`.
pub fn christoffel(metric: &dyn MetricField, x: &[f64]) -> Result<ChristoffelTable> {
    christoffel_with(metric, x, DiffMode::Auto)
}

pub fn christoffel_with(
    metric: &dyn MetricField,
    x: &[f64],
    mode: DiffMode,
) -> Result<ChristoffelTable> {
    let at = metric_at(metric, x)?;
    let dg = metric_partials(metric, x, mode)?;
    Ok(levi_civita(&at, &dg))
}

pub(crate) fn levi_civita(at: &MetricAt, dg: &[DMatrix<f64>]) -> ChristoffelTable {
    let n = at.dim();
    let mut first_kind = vec![0.0; n * n * n];
    for l in 0..n {
        for i in 0..n {
            for j in i..n {
                let v = 0.5 * (dg[i][(j, l)] + dg[j][(i, l)] - dg[l][(i, j)]);
                first_kind[(l * n + i) * n + j] = v;
                first_kind[(l * n + j) * n + i] = v;
            }
        }
    }
    let mut table = ChristoffelTable::zeros(n);
    for k in 0..n {
        for i in 0..n {
            for j in i..n {
                let mut s = 0.0;
                for l in 0..n {
                    s += at.inverse[(k, l)] * first_kind[(l * n + i) * n + j];
                }
                table.set(k, i, j, s);
                table.set(k, j, i, s);
            }
        }
    }
    table
}

/// `v_i = g_ij v^j`.
pub fn flat(metric: &dyn MetricField, x: &[f64], v: &DVector<f64>) -> Result<DVector<f64>> {
    let at = metric_at(metric, x)?;
    check_vec("vector", at.dim(), v)?;
    Ok(at.flat(v))
}

/// `w^i = g^ij w_j`.
pub fn sharp(metric: &dyn MetricField, x: &[f64], w: &DVector<f64>) -> Result<DVector<f64>> {
    let at = metric_at(metric, x)?;
    check_vec("covector", at.dim(), w)?;
    Ok(at.sharp(w))
}

/// `grad f = g^ij d_j f`.
pub fn gradient(metric: &dyn MetricField, f: &dyn ScalarField, x: &[f64]) -> Result<DVector<f64>> {
    gradient_with(metric, f, x, DiffMode::Auto)
}

pub fn gradient_with(
    metric: &dyn MetricField,
    f: &dyn ScalarField,
    x: &[f64],
    mode: DiffMode,
) -> Result<DVector<f64>> {
    let at = metric_at(metric, x)?;
    let df = scalar_differential(f, x, mode)?;
    check_vec("scalar differential", at.dim(), &df)?;
    Ok(at.sharp(&df))
}

/// `v^∇v = v^j d_j v^k + Γ^k_ij v^i v^j` for a field on the full chart.
pub fn covariant_acceleration(
    metric: &dyn MetricField,
    field: &dyn VectorField,
    x: &[f64],
) -> Result<DVector<f64>> {
    covariant_acceleration_with(metric, field, x, DiffMode::Auto)
}

pub fn covariant_acceleration_with(
    metric: &dyn MetricField,
    field: &dyn VectorField,
    x: &[f64],
    mode: DiffMode,
) -> Result<DVector<f64>> {
    let n = metric.dim();
    if field.dim() != n || field.input_dim() != n {
        return Err(Error::mismatch("vector field dimension", n, field.dim()));
    }
    let gamma = christoffel_with(metric, x, mode)?;
    let v = field_value(field, x)?;
    let jac = field_jacobian(field, x, mode)?;
    Ok(&jac * &v + gamma.contract(&v, &v))
}

/// Largest `|d_k g_ij - Γ^l_ki g_lj - Γ^l_kj g_il|`; zero for the Levi-Civita connection.
pub fn metric_compatibility_defect(
    metric: &dyn MetricField,
    x: &[f64],
    mode: DiffMode,
) -> Result<f64> {
    let at = metric_at(metric, x)?;
    let dg = metric_partials(metric, x, mode)?;
    let gamma = christoffel_with(metric, x, mode)?;
    let n = at.dim();
    let mut worst: f64 = 0.0;
    for (k, dgk) in dg.iter().enumerate() {
        for i in 0..n {
            for j in 0..n {
                let mut r = dgk[(i, j)];
                for l in 0..n {
                    r -= gamma.get(l, k, i) * at.g[(l, j)] + gamma.get(l, k, j) * at.g[(i, l)];
                }
                worst = worst.max(r.abs());
            }
        }
    }
    Ok(worst)
}

fn check_vec(what: &str, n: usize, v: &DVector<f64>) -> Result<()> {
    if v.len() != n {
        return Err(Error::mismatch(what, n, v.len()));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Chart;

    fn polar() -> ExprMetric {
        ExprMetric::parse(Chart::spatial(2), &[vec!["1", "0"], vec!["0", "x1^2"]]).unwrap()
    }

    fn flrw_linear() -> ExprMetric {
        let h = ExprMetric::parse(Chart::spatial(1), &[vec!["1"]]).unwrap();
        ExprMetric::flrw(&"t".parse().unwrap(), &h).unwrap()
    }

    #[test]
    fn euclidean_christoffels_vanish() {
        let e = builtin("euclidean", 3).unwrap().metric;
        let gamma = christoffel(&e, &[0.3, -1.0, 2.0]).unwrap();
        assert_eq!(gamma, ChristoffelTable::zeros(3));
    }

    #[test]
    fn flrw_christoffels_at_t2() {
        let g = flrw_linear();
        let gamma = christoffel(&g, &[2.0, 0.7]).unwrap();
        assert!((gamma.get(0, 1, 1) - 2.0).abs() < 1e-14);
        assert!((gamma.get(1, 0, 1) - 0.5).abs() < 1e-14);
        assert_eq!(gamma.get(0, 0, 0), 0.0);
        assert_eq!(gamma.get(1, 0, 0), 0.0);
    }

    #[test]
    fn polar_christoffels_match_fd_oracle() {
        // oracle: Levi-Civita formula with hand-coded central differences of g
        let g = |r: f64| [[1.0, 0.0], [0.0, r * r]];
        let r = 2.0;
        let h = 1e-5;
        let dr_gtt = (g(r + h)[1][1] - g(r - h)[1][1]) / (2.0 * h);
        let gamma_r_tt = -0.5 * dr_gtt / g(r)[0][0];
        let gamma_t_rt = 0.5 * dr_gtt / g(r)[1][1];
        assert!((gamma_r_tt + 2.0).abs() < 1e-8);
        assert!((gamma_t_rt - 0.5).abs() < 1e-8);

        let gamma = christoffel(&polar(), &[2.0, 0.4]).unwrap();
        assert!((gamma.get(0, 1, 1) - gamma_r_tt).abs() < 1e-8);
        assert!((gamma.get(1, 0, 1) - gamma_t_rt).abs() < 1e-8);
        assert!((gamma.get(1, 1, 0) - gamma_t_rt).abs() < 1e-8);
    }

    #[test]
    fn flat_examples() {
        let e = builtin("euclidean", 2).unwrap().metric;
        let v = DVector::from_vec(vec![3.0, 4.0]);
        assert_eq!(flat(&e, &[0.0, 0.0], &v).unwrap(), v);

        let mink = builtin("minkowski", 2).unwrap().metric;
        let v = DVector::from_vec(vec![1.0, 1.0]);
        assert_eq!(flat(&mink, &[0.0, 0.0], &v).unwrap(), DVector::from_vec(vec![1.0, -1.0]));

        let v = DVector::from_vec(vec![0.0, 1.0]);
        let w = flat(&flrw_linear(), &[2.0, 0.0], &v).unwrap();
        assert_eq!(w, DVector::from_vec(vec![0.0, -4.0]));
        let back = sharp(&flrw_linear(), &[2.0, 0.0], &w).unwrap();
        assert!((back - v).amax() < 1e-12);
    }

    #[test]
    fn gradient_examples() {
        let e = builtin("euclidean", 2).unwrap().metric;
        let f = ExprScalar::parse(Chart::spatial(2), "x1^2 + x2^2").unwrap();
        let g = gradient(&e, &f, &[1.0, 2.0]).unwrap();
        assert_eq!(g, DVector::from_vec(vec![2.0, 4.0]));

        let spatial = builtin("curved", 2).unwrap().metric;
        let product = ExprMetric::static_product(&spatial).unwrap();
        let t = ExprScalar::parse(Chart::spacetime(2), "t").unwrap();
        let g = gradient(&product, &t, &[0.3, 0.2, -0.5]).unwrap();
        assert!((g - DVector::from_vec(vec![1.0, 0.0, 0.0])).amax() < 1e-15);

        let x = ExprScalar::parse(Chart::spacetime(1), "x1").unwrap();
        let g = gradient(&flrw_linear(), &x, &[2.0, 0.0]).unwrap();
        assert!((g - DVector::from_vec(vec![0.0, -0.25])).amax() < 1e-15);
    }

    #[test]
    fn covariant_acceleration_examples() {
        let e = builtin("euclidean", 2).unwrap().metric;
        let c = FnVectorField::constant(vec![1.0, -2.0]);
        assert_eq!(covariant_acceleration(&e, &c, &[0.5, 0.5]).unwrap(), DVector::zeros(2));

        let rot = ExprVectorField::parse(Chart::spatial(2), &["-x2", "x1"]).unwrap();
        let a = covariant_acceleration(&e, &rot, &[1.0, 2.0]).unwrap();
        assert_eq!(a, DVector::from_vec(vec![-1.0, -2.0]));

        let d_theta = ExprVectorField::parse(Chart::spatial(2), &["0", "1"]).unwrap();
        let a = covariant_acceleration(&polar(), &d_theta, &[2.0, 0.1]).unwrap();
        assert!((a - DVector::from_vec(vec![-2.0, 0.0])).amax() < 1e-14);
    }

    #[test]
    fn singular_metric_is_rejected() {
        let m = polar();
        assert!(matches!(christoffel(&m, &[0.0, 1.0]), Err(Error::SingularMetric { .. })));
        let nan = FnMetric::new(1, |_| DMatrix::from_element(1, 1, f64::NAN));
        assert!(matches!(christoffel(&nan, &[0.0]), Err(Error::NonFinite { .. })));
    }

    #[test]
    fn metric_compatibility_on_polar() {
        let d = metric_compatibility_defect(&polar(), &[1.3, 0.2], DiffMode::Auto).unwrap();
        assert!(d < 1e-14);
        let d = metric_compatibility_defect(&polar(), &[1.3, 0.2], DiffMode::FiniteDifference)
            .unwrap();
        assert!(d < 1e-8);
    }
}
