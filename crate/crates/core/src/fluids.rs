//! Euler and Bernoulli residuals.
//!
//! Steady flows live on the full chart. Unsteady flows are spatial fields
//! read at `(t, x)` over a static metric `dt² + g^s` or an FLRW metric
//! `dt² - a(t)² h`; pressure and density may be read at `(t, x)` or at `x`.
//! Pressure enters with the same sign as a potential: the force is `dP/ρ`.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::constraints::time_constrain;
use crate::dynamics::{density_at, force_at, IntegrableForce, State, DENSITY_FLOOR};
use crate::error::{Error, PointDisplay, Result};
use crate::geometry::{
    christoffel, covariant_acceleration, field_jacobian, field_value, metric_at, metric_partials,
    scalar_differential, scalar_value, DiffMode, FlrwMetric, MetricField, ScalarField,
    ScaleFactor, StaticMetric, VectorField,
};
use crate::intermediate::flat_field_derivatives;

// ---------------------------------------------------------------------------
// Spatial reads of (t, x)-dependent data

struct SpatialScalar {
    dx: DVector<f64>,
}

fn read_scalar(f: &dyn ScalarField, tx: &[f64]) -> Result<SpatialScalar> {
    let n = tx.len() - 1;
    if f.input_dim() == n + 1 {
        let d = scalar_differential(f, tx, DiffMode::Auto)?;
        Ok(SpatialScalar {
            dx: d.rows(1, n).into_owned(),
        })
    } else if f.input_dim() == n {
        Ok(SpatialScalar {
            dx: scalar_differential(f, &tx[1..], DiffMode::Auto)?,
        })
    } else {
        Err(Error::mismatch("scalar field input", n + 1, f.input_dim()))
    }
}

fn read_density(f: &dyn ScalarField, tx: &[f64]) -> Result<f64> {
    let n = tx.len() - 1;
    if f.input_dim() == n + 1 {
        density_at(f, tx)
    } else if f.input_dim() == n {
        density_at(f, &tx[1..]).map_err(|e| match e {
            Error::ZeroDensity { .. } => Error::ZeroDensity {
                point: PointDisplay::from(tx),
            },
            other => other,
        })
    } else {
        Err(Error::mismatch("density input", n + 1, f.input_dim()))
    }
}

struct SpatialVector {
    value: DVector<f64>,
    dt: DVector<f64>,
    /// `J[(k, j)] = d_j v^k` over the spatial coordinates.
    dx: DMatrix<f64>,
}

fn read_field(v: &dyn VectorField, tx: &[f64]) -> Result<SpatialVector> {
    let n = tx.len() - 1;
    if v.dim() != n {
        return Err(Error::mismatch("fluid velocity dimension", n, v.dim()));
    }
    if v.input_dim() == n + 1 {
        let jac = field_jacobian(v, tx, DiffMode::Auto)?;
        Ok(SpatialVector {
            value: field_value(v, tx)?,
            dt: jac.column(0).into_owned(),
            dx: jac.columns(1, n).into_owned(),
        })
    } else if v.input_dim() == n {
        Ok(SpatialVector {
            value: field_value(v, &tx[1..])?,
            dt: DVector::zeros(n),
            dx: field_jacobian(v, &tx[1..], DiffMode::Auto)?,
        })
    } else {
        Err(Error::mismatch("fluid velocity input", n + 1, v.input_dim()))
    }
}

fn check_spacetime_point(spatial_dim: usize, tx: &[f64]) -> Result<()> {
    if tx.len() != spatial_dim + 1 {
        return Err(Error::mismatch("(t, x) point", spatial_dim + 1, tx.len()));
    }
    Ok(())
}

/// `(∂_t K, d_x K)` for `K = ½ h(v, v)` with `h` independent of `t`.
fn half_square_derivatives(
    h: &dyn MetricField,
    v: &SpatialVector,
    x: &[f64],
) -> Result<(f64, DVector<f64>)> {
    let g = metric_at(h, x)?.g;
    let dg = metric_partials(h, x, DiffMode::Auto)?;
    let gv = &g * &v.value;
    let dt = gv.dot(&v.dt);
    let dx = DVector::from_fn(v.value.len(), |k, _| {
        gv.dot(&v.dx.column(k)) + 0.5 * v.value.dot(&(&dg[k] * &v.value))
    });
    Ok((dt, dx))
}

// ---------------------------------------------------------------------------
// Steady

/// `v^∇v + grad P/ρ (+ sharp(v*f))` on the full chart.
///
/// Evaluated in Lamb form, `sharp(ι_v dv♭ + dT(v) + dP/ρ + v*f)`, so that no
/// Christoffel symbol enters.
pub fn steady_euler_residual(
    metric: &dyn MetricField,
    v: &dyn VectorField,
    pressure: &dyn ScalarField,
    density: &dyn ScalarField,
    x: &[f64],
    body_force: Option<&dyn crate::dynamics::ForceForm>,
) -> Result<DVector<f64>> {
    let n = metric.dim();
    if v.dim() != n || v.input_dim() != n {
        return Err(Error::mismatch("fluid velocity dimension", n, v.dim()));
    }
    let rho = density_at(density, x)?;
    let at = metric_at(metric, x)?;
    let (b, dt) = flat_field_derivatives(metric, v, x, DiffMode::Auto)?;
    let vx = field_value(v, x)?;
    let interior = (&b - b.transpose()).transpose() * &vx;
    let mut covector = interior + dt + scalar_differential(pressure, x, DiffMode::Auto)? / rho;
    if let Some(f) = body_force {
        let state = State::new(x.to_vec(), vx.as_slice().to_vec())?;
        covector += force_at(f, &state)?;
    }
    Ok(at.sharp(&covector))
}

// ---------------------------------------------------------------------------
// Unsteady over a static metric

/// `∂_t v + v^∇v + grad^s P/ρ` with respect to the spatial metric `g^s`.
pub fn unsteady_euler_residual_static(
    gs: &dyn MetricField,
    v: &dyn VectorField,
    pressure: &dyn ScalarField,
    density: &dyn ScalarField,
    tx: &[f64],
) -> Result<DVector<f64>> {
    check_spacetime_point(gs.dim(), tx)?;
    let x = &tx[1..];
    let rho = read_density(density, tx)?;
    let vel = read_field(v, tx)?;
    let p = read_scalar(pressure, tx)?;
    let at = metric_at(gs, x)?;
    let gamma = christoffel(gs, x)?;
    Ok(&vel.dt + &vel.dx * &vel.value + gamma.contract(&vel.value, &vel.value) + at.sharp(&p.dx) / rho)
}

/// `v(P)/ρ + v(½ g^s(v,v)) + ∂_t(½ g^s(v,v))`.
pub fn bernoulli_residual_static(
    gs: &dyn MetricField,
    v: &dyn VectorField,
    pressure: &dyn ScalarField,
    density: &dyn ScalarField,
    tx: &[f64],
) -> Result<f64> {
    check_spacetime_point(gs.dim(), tx)?;
    let x = &tx[1..];
    let rho = read_density(density, tx)?;
    let vel = read_field(v, tx)?;
    let p = read_scalar(pressure, tx)?;
    let (k_t, k_x) = half_square_derivatives(gs, &vel, x)?;
    Ok(vel.value.dot(&p.dx) / rho + vel.value.dot(&k_x) + k_t)
}

// ---------------------------------------------------------------------------
// FLRW

/// `∂_t v + v^∇'v + 2(ȧ/a) v - (1/a²) grad^h P/ρ`.
pub fn flrw_euler_residual(
    h: &dyn MetricField,
    a: &ScaleFactor,
    v: &dyn VectorField,
    pressure: &dyn ScalarField,
    density: &dyn ScalarField,
    tx: &[f64],
) -> Result<DVector<f64>> {
    check_spacetime_point(h.dim(), tx)?;
    let x = &tx[1..];
    let (scale, rate) = a.eval(tx[0])?;
    let rho = read_density(density, tx)?;
    let vel = read_field(v, tx)?;
    let p = read_scalar(pressure, tx)?;
    let at = metric_at(h, x)?;
    let gamma = christoffel(h, x)?;
    Ok(&vel.dt
        + &vel.dx * &vel.value
        + gamma.contract(&vel.value, &vel.value)
        + &vel.value * (2.0 * rate / scale)
        - at.sharp(&p.dx) / (scale * scale * rho))
}

/// `2(ȧ/a) h(v,v) + ½ ∂_t h(v,v) + ½ v(h(v,v)) - v(P)/(a² ρ)`.
pub fn flrw_bernoulli_residual(
    h: &dyn MetricField,
    a: &ScaleFactor,
    v: &dyn VectorField,
    pressure: &dyn ScalarField,
    density: &dyn ScalarField,
    tx: &[f64],
) -> Result<f64> {
    check_spacetime_point(h.dim(), tx)?;
    let x = &tx[1..];
    let (scale, rate) = a.eval(tx[0])?;
    let rho = read_density(density, tx)?;
    let vel = read_field(v, tx)?;
    let p = read_scalar(pressure, tx)?;
    let at = metric_at(h, x)?;
    // with K = ½ h(v,v): ½ ∂_t h(v,v) = ∂_t K and ½ v(h(v,v)) = v(K)
    let (k_t, k_x) = half_square_derivatives(h, &vel, x)?;
    let hvv = at.inner(&vel.value, &vel.value);
    Ok(2.0 * rate / scale * hvv + k_t + vel.value.dot(&k_x)
        - vel.value.dot(&p.dx) / (scale * scale * rho))
}

// ---------------------------------------------------------------------------
// Relativistic

/// `(μ + P) u^∇u + grad P - u(P) u`.
pub fn relativistic_euler_residual(
    metric: &dyn MetricField,
    u: &dyn VectorField,
    pressure: &dyn ScalarField,
    energy_density: &dyn ScalarField,
    x: &[f64],
) -> Result<DVector<f64>> {
    let at = metric_at(metric, x)?;
    let uu = field_value(u, x)?;
    let norm_sq = at.inner(&uu, &uu);
    if !(norm_sq > 0.0) {
        return Err(Error::NotTimelike {
            norm_sq,
            point: PointDisplay::from(x),
        });
    }
    let p = scalar_value(pressure, x)?;
    let zeta = scalar_value(energy_density, x)? + p;
    if zeta.abs() < DENSITY_FLOOR {
        return Err(Error::ZeroEnthalpy {
            point: PointDisplay::from(x),
        });
    }
    let dp = scalar_differential(pressure, x, DiffMode::Auto)?;
    let accel = covariant_acceleration(metric, u, x)?;
    let u_p = dp.dot(&uu);
    Ok(accel * zeta + at.sharp(&dp) - uu * u_p)
}

// ---------------------------------------------------------------------------
// Full-space split

/// Background geometry of an unsteady flow.
#[derive(Clone)]
pub enum Background {
    /// `dt² + g^s`.
    Static(Arc<dyn MetricField>),
    /// `dt² - a(t)² h`.
    Flrw {
        h: Arc<dyn MetricField>,
        a: ScaleFactor,
    },
}

impl Background {
    pub fn spatial(&self) -> &Arc<dyn MetricField> {
        match self {
            Background::Static(gs) => gs,
            Background::Flrw { h, .. } => h,
        }
    }

    pub fn full_metric(&self) -> Arc<dyn MetricField> {
        match self {
            Background::Static(gs) => Arc::new(StaticMetric::new(gs.clone())),
            Background::Flrw { h, a } => Arc::new(FlrwMetric::new(h.clone(), a.clone())),
        }
    }

    pub fn euler_residual(
        &self,
        v: &dyn VectorField,
        pressure: &dyn ScalarField,
        density: &dyn ScalarField,
        tx: &[f64],
    ) -> Result<DVector<f64>> {
        match self {
            Background::Static(gs) => unsteady_euler_residual_static(gs.as_ref(), v, pressure, density, tx),
            Background::Flrw { h, a } => flrw_euler_residual(h.as_ref(), a, v, pressure, density, tx),
        }
    }

    pub fn bernoulli_residual(
        &self,
        v: &dyn VectorField,
        pressure: &dyn ScalarField,
        density: &dyn ScalarField,
        tx: &[f64],
    ) -> Result<f64> {
        match self {
            Background::Static(gs) => bernoulli_residual_static(gs.as_ref(), v, pressure, density, tx),
            Background::Flrw { h, a } => flrw_bernoulli_residual(h.as_ref(), a, v, pressure, density, tx),
        }
    }

    /// `⟨r, v⟩` in the spatial metric.
    pub fn pair(&self, r: &DVector<f64>, v: &dyn VectorField, tx: &[f64]) -> Result<f64> {
        let vel = read_field(v, tx)?;
        Ok(metric_at(self.spatial().as_ref(), &tx[1..])?.inner(r, &vel.value))
    }
}

/// `v̄ = ∂/∂t + v` on the full chart.
pub struct LiftedField {
    inner: Arc<dyn VectorField>,
}

impl LiftedField {
    pub fn new(v: Arc<dyn VectorField>) -> Self {
        LiftedField { inner: v }
    }
}

impl VectorField for LiftedField {
    fn dim(&self) -> usize {
        self.inner.dim() + 1
    }

    fn value(&self, tx: &[f64]) -> Result<DVector<f64>> {
        let v = if self.inner.time_dependent() {
            self.inner.value(tx)?
        } else {
            self.inner.value(&tx[1..])?
        };
        Ok(DVector::from_iterator(v.len() + 1, std::iter::once(1.0).chain(v.iter().copied())))
    }

    fn jacobian(&self, tx: &[f64]) -> Option<Result<DMatrix<f64>>> {
        let n = self.inner.dim();
        let build = |j: DMatrix<f64>, offset: usize| {
            let mut full = DMatrix::zeros(n + 1, n + 1);
            full.view_mut((1, offset), (n, j.ncols())).copy_from(&j);
            full
        };
        if self.inner.time_dependent() {
            Some(self.inner.jacobian(tx)?.map(|j| build(j, 0)))
        } else {
            Some(self.inner.jacobian(&tx[1..])?.map(|j| build(j, 1)))
        }
    }
}

/// A scalar on space read at `(t, x)`.
pub struct OnSpacetime {
    inner: Arc<dyn ScalarField>,
}

impl OnSpacetime {
    /// Wraps `f` so it reads `(t, x)`; fields that already do are returned as is.
    pub fn wrap(f: Arc<dyn ScalarField>, spatial_dim: usize) -> Arc<dyn ScalarField> {
        if f.input_dim() == spatial_dim {
            Arc::new(OnSpacetime { inner: f })
        } else {
            f
        }
    }
}

impl ScalarField for OnSpacetime {
    fn input_dim(&self) -> usize {
        self.inner.input_dim() + 1
    }

    fn value(&self, tx: &[f64]) -> Result<f64> {
        self.inner.value(&tx[1..])
    }

    fn differential(&self, tx: &[f64]) -> Option<Result<DVector<f64>>> {
        let d = self.inner.differential(&tx[1..])?;
        Some(d.map(|d| DVector::from_iterator(d.len() + 1, std::iter::once(0.0).chain(d.iter().copied()))))
    }
}

/// Full-space residuals of `v̄ = ∂/∂t + v` under the time-constrained system.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitResidual {
    /// Multiplier fixed pointwise by `D̄ṫ = 0`; the residual is `(0, Euler)`.
    pub constrained: DVector<f64>,
    /// Multiplier `-(v̄(T(v̄)) + v̄(P)/ρ) / v̄(t)` that makes `T + U` constant
    /// along the section. The time component carries the Bernoulli residual:
    /// `-B` over a static metric and `a² B` over FLRW.
    pub on_section: DVector<f64>,
}

pub fn full_space_split(
    background: &Background,
    v: Arc<dyn VectorField>,
    pressure: Arc<dyn ScalarField>,
    density: Arc<dyn ScalarField>,
    tx: &[f64],
) -> Result<SplitResidual> {
    let n = background.spatial().dim();
    check_spacetime_point(n, tx)?;
    let metric = background.full_metric();
    let lifted = LiftedField::new(v);
    let pressure = OnSpacetime::wrap(pressure, n);
    let density = OnSpacetime::wrap(density, n);
    let force = Arc::new(IntegrableForce::new(pressure.clone(), density.clone())?);

    let system = time_constrain(metric.clone(), force.clone(), 0)?;
    let constrained = crate::intermediate::intermediate_residual(
        metric.as_ref(),
        system.modified_force().as_ref(),
        &lifted,
        tx,
    )?
    .residual;

    let at = metric_at(metric.as_ref(), tx)?;
    let vbar = field_value(&lifted, tx)?;
    let (_, d_kinetic) = flat_field_derivatives(metric.as_ref(), &lifted, tx, DiffMode::Auto)?;
    let rho = density_at(density.as_ref(), tx)?;
    let dp = scalar_differential(pressure.as_ref(), tx, DiffMode::Auto)?;
    let lambda = -(vbar.dot(&d_kinetic) + vbar.dot(&dp) / rho) / vbar[0];
    let mut alpha = dp / rho;
    alpha[0] += lambda;
    let on_section = covariant_acceleration(metric.as_ref(), &lifted, tx)? + at.sharp(&alpha);

    Ok(SplitResidual {
        constrained,
        on_section,
    })
}
