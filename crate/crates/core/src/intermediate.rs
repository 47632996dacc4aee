//! Intermediate integrals.
//!
//! A vector field `v` is an intermediate integral of the Newton field of `α`
//! when `v^∇v + grad(v*α) = 0`, where `v*α` is `α` evaluated at `(x, v(x))`.
//! Equivalently the second-order field agrees with `v_* v` along the section.

use nalgebra::{DMatrix, DVector};

use crate::dynamics::{force_at, ForceForm, SecondOrderField, State};
use crate::error::{Error, Result};
use crate::geometry::{
    covariant_acceleration_with, fd, field_jacobian, field_value, metric_at, metric_partials,
    scalar_differential, scalar_value, DiffMode, MetricField, ScalarField, VectorField,
};

#[derive(Debug, Clone, PartialEq)]
pub struct IntermediateResidual {
    pub point: Vec<f64>,
    pub residual: DVector<f64>,
    /// `sqrt(|g(r, r)|)`.
    pub norm: f64,
}

/// The state `(x, v(x))`.
pub fn section(field: &dyn VectorField, x: &[f64]) -> Result<State> {
    let v = field_value(field, x)?;
    State::new(x.to_vec(), v.as_slice().to_vec())
}

/// `v*α` at `x`: the force evaluated with `ẋ := v(x)`.
pub fn pullback(force: &dyn ForceForm, field: &dyn VectorField, x: &[f64]) -> Result<DVector<f64>> {
    force_at(force, &section(field, x)?)
}

fn check_full(metric: &dyn MetricField, field: &dyn VectorField) -> Result<()> {
    let n = metric.dim();
    if field.dim() != n || field.input_dim() != n {
        return Err(Error::mismatch("vector field dimension", n, field.dim()));
    }
    Ok(())
}

/// `v^∇v + sharp(v*α)`.
pub fn intermediate_residual(
    metric: &dyn MetricField,
    force: &dyn ForceForm,
    field: &dyn VectorField,
    x: &[f64],
) -> Result<IntermediateResidual> {
    intermediate_residual_with(metric, force, field, x, DiffMode::Auto)
}

pub fn intermediate_residual_with(
    metric: &dyn MetricField,
    force: &dyn ForceForm,
    field: &dyn VectorField,
    x: &[f64],
    mode: DiffMode,
) -> Result<IntermediateResidual> {
    check_full(metric, field)?;
    let at = metric_at(metric, x)?;
    let accel = covariant_acceleration_with(metric, field, x, mode)?;
    let residual = accel + at.sharp(&pullback(force, field, x)?);
    let norm = at.inner(&residual, &residual).abs().sqrt();
    Ok(IntermediateResidual {
        point: x.to_vec(),
        residual,
        norm,
    })
}

/// Terms of `ι_v dv♭ + dT(v) = (v^∇v)♭`, all as covectors.
#[derive(Debug, Clone, PartialEq)]
pub struct VorticityTerms {
    /// `ι_v dv♭`.
    pub interior: DVector<f64>,
    /// `d(½ g(v, v))`.
    pub energy: DVector<f64>,
    /// `(v^∇v)♭` through the Christoffel symbols.
    pub acceleration: DVector<f64>,
}

impl VorticityTerms {
    pub fn gap(&self) -> DVector<f64> {
        &self.interior + &self.energy - &self.acceleration
    }
}

/// Derivatives of `v♭` and of `T(v)`, without Christoffel symbols.
///
/// Returns `(B, dT)` with `B[(i, j)] = d_i (v♭)_j`.
pub(crate) fn flat_field_derivatives(
    metric: &dyn MetricField,
    field: &dyn VectorField,
    x: &[f64],
    mode: DiffMode,
) -> Result<(DMatrix<f64>, DVector<f64>)> {
    let n = metric.dim();
    match mode {
        DiffMode::Auto => {
            let g = metric_at(metric, x)?.g;
            let dg = metric_partials(metric, x, mode)?;
            let v = field_value(field, x)?;
            let jac = field_jacobian(field, x, mode)?;
            let gv_jac = &g * &jac;
            let mut b = DMatrix::zeros(n, n);
            let mut dt = DVector::zeros(n);
            for i in 0..n {
                let dg_v = &dg[i] * &v;
                let col = dg_v.clone() + gv_jac.column(i);
                b.set_row(i, &col.transpose());
                dt[i] = 0.5 * v.dot(&dg_v) + v.dot(&gv_jac.column(i));
            }
            Ok((b, dt))
        }
        DiffMode::FiniteDifference => {
            let flat_v = |p: &[f64]| -> Result<DVector<f64>> {
                let g = metric_at(metric, p)?.g;
                Ok(g * field_value(field, p)?)
            };
            // fd::jacobian gives J[(j, i)] = d_i (v♭)_j
            let b = fd::jacobian(x, n, flat_v)?.transpose();
            let dt = fd::gradient(x, |p| {
                let g = metric_at(metric, p)?.g;
                let v = field_value(field, p)?;
                Ok(0.5 * v.dot(&(g * &v)))
            })?;
            Ok((b, dt))
        }
    }
}

/// Evaluates both sides of the vorticity identity by independent paths.
pub fn vorticity_terms(
    metric: &dyn MetricField,
    field: &dyn VectorField,
    x: &[f64],
    mode: DiffMode,
) -> Result<VorticityTerms> {
    check_full(metric, field)?;
    let (b, energy) = flat_field_derivatives(metric, field, x, mode)?;
    let v = field_value(field, x)?;
    // (ι_v dβ)_j = v^i (d_i β_j - d_j β_i)
    let interior = (&b - b.transpose()).transpose() * &v;
    let at = metric_at(metric, x)?;
    let acceleration = at.flat(&covariant_acceleration_with(metric, field, x, mode)?);
    Ok(VorticityTerms {
        interior,
        energy,
        acceleration,
    })
}

/// `ι_v dv♭ + dT(v) - (v^∇v)♭`, identically zero.
pub fn vorticity_identity_gap(
    metric: &dyn MetricField,
    field: &dyn VectorField,
    x: &[f64],
    mode: DiffMode,
) -> Result<DVector<f64>> {
    Ok(vorticity_terms(metric, field, x, mode)?.gap())
}

/// `‖accel(x, v(x)) - J_v v‖_∞`.
pub fn prolongation_defect(
    field: &dyn VectorField,
    sof: &dyn SecondOrderField,
    x: &[f64],
) -> Result<f64> {
    prolongation_defect_with(field, sof, x, DiffMode::Auto)
}

pub fn prolongation_defect_with(
    field: &dyn VectorField,
    sof: &dyn SecondOrderField,
    x: &[f64],
    mode: DiffMode,
) -> Result<f64> {
    if field.dim() != sof.dim() || field.input_dim() != sof.dim() {
        return Err(Error::mismatch("vector field dimension", sof.dim(), field.dim()));
    }
    let state = section(field, x)?;
    let pushed = field_jacobian(field, x, mode)? * state.velocity();
    Ok((sof.accel(&state)? - pushed).amax())
}

/// The covector field `dS`, viewed as components over the chart.
pub struct Differential<'a> {
    scalar: &'a dyn ScalarField,
    mode: DiffMode,
}

impl<'a> Differential<'a> {
    pub fn new(scalar: &'a dyn ScalarField, mode: DiffMode) -> Self {
        Differential { scalar, mode }
    }
}

impl VectorField for Differential<'_> {
    fn dim(&self) -> usize {
        self.scalar.input_dim()
    }

    fn value(&self, x: &[f64]) -> Result<DVector<f64>> {
        scalar_differential(self.scalar, x, self.mode)
    }
}

/// `grad S = sharp(dS)`.
pub struct GradientField<'a> {
    metric: &'a dyn MetricField,
    scalar: &'a dyn ScalarField,
    mode: DiffMode,
}

impl<'a> GradientField<'a> {
    pub fn new(metric: &'a dyn MetricField, scalar: &'a dyn ScalarField) -> Self {
        GradientField {
            metric,
            scalar,
            mode: DiffMode::Auto,
        }
    }
}

impl VectorField for GradientField<'_> {
    fn dim(&self) -> usize {
        self.metric.dim()
    }

    fn value(&self, x: &[f64]) -> Result<DVector<f64>> {
        let at = metric_at(self.metric, x)?;
        Ok(at.sharp(&scalar_differential(self.scalar, x, self.mode)?))
    }
}

/// `‖d(H(p))‖_∞` with `H = ½ g^ij p_i p_j + U` and `p` a covector field.
///
/// `p = dS` gives the Hamilton–Jacobi residual of `S`.
pub fn hamilton_jacobi_residual_momentum(
    metric: &dyn MetricField,
    potential: &dyn ScalarField,
    momentum: &dyn VectorField,
    x: &[f64],
    mode: DiffMode,
) -> Result<f64> {
    let n = metric.dim();
    if momentum.dim() != n || momentum.input_dim() != n || potential.input_dim() != n {
        return Err(Error::mismatch("Hamilton-Jacobi data", n, momentum.dim()));
    }
    let at = metric_at(metric, x)?;
    let dg = metric_partials(metric, x, mode)?;
    let p = field_value(momentum, x)?;
    let jac = field_jacobian(momentum, x, mode)?;
    let du = scalar_differential(potential, x, mode)?;
    let p_up = at.sharp(&p);
    // d_k(½ g^ij p_i p_j) = p^i d_k p_i - ½ p^a (d_k g_ab) p^b
    let mut dh = DVector::zeros(n);
    for k in 0..n {
        dh[k] = p_up.dot(&jac.column(k)) - 0.5 * p_up.dot(&(&dg[k] * &p_up)) + du[k];
    }
    Ok(dh.amax())
}

/// `‖d(H(grad S))‖_∞` with `H = T + U`.
pub fn hamilton_jacobi_residual(
    metric: &dyn MetricField,
    potential: &dyn ScalarField,
    action: &dyn ScalarField,
    x: &[f64],
) -> Result<f64> {
    let momentum = Differential::new(action, DiffMode::Auto);
    hamilton_jacobi_residual_momentum(metric, potential, &momentum, x, DiffMode::Auto)
}

/// `H(grad S)` at `x`.
pub fn hamiltonian_on_section(
    metric: &dyn MetricField,
    potential: &dyn ScalarField,
    action: &dyn ScalarField,
    x: &[f64],
) -> Result<f64> {
    let at = metric_at(metric, x)?;
    let p = scalar_differential(action, x, DiffMode::Auto)?;
    Ok(0.5 * p.dot(&at.sharp(&p)) + scalar_value(potential, x)?)
}

/// `‖d(grad S)♭‖_∞`, the antisymmetric part of the derivative of
/// `(grad S)♭`. Zero for every `S`; a check on the differentiation code.
pub fn lagrangian_defect(metric: &dyn MetricField, action: &dyn ScalarField, x: &[f64]) -> Result<f64> {
    let v = GradientField::new(metric, action);
    let (b, _) = flat_field_derivatives(metric, &v, x, DiffMode::FiniteDifference)?;
    Ok((&b - b.transpose()).amax())
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::dynamics::{newton_field, FnField, IntegrableForce, ZeroForce};
    use crate::expr::Chart;
    use crate::geometry::{builtin, ExprScalar, ExprVectorField, FnScalar, FnVectorField};

    fn euclid(n: usize) -> Arc<dyn MetricField> {
        Arc::new(builtin("euclidean", n).unwrap().metric)
    }

    fn pressure_force(p: &str) -> IntegrableForce {
        let c = Chart::spatial(2);
        IntegrableForce::new(
            Arc::new(ExprScalar::parse(c, p).unwrap()),
            Arc::new(ExprScalar::parse(c, "1").unwrap()),
        )
        .unwrap()
    }

    #[test]
    fn rigid_rotation_is_intermediate() {
        let e = euclid(2);
        let force = pressure_force("x1^2 + x2^2");
        let v = ExprVectorField::parse(Chart::spatial(2), &["-sqrt(2)*x2", "sqrt(2)*x1"]).unwrap();
        for p in [[0.3, -0.7], [1.5, 2.0]] {
            let r = intermediate_residual(e.as_ref(), &force, &v, &p).unwrap();
            assert!(r.residual.amax() < 1e-14, "{r:?}");
        }
        let zero = FnVectorField::constant(vec![0.0, 0.0]);
        let r = intermediate_residual(e.as_ref(), &force, &zero, &[1.0, -3.0]).unwrap();
        assert_eq!(r.residual, DVector::from_vec(vec![2.0, -6.0]));
        assert!((r.norm - 40f64.sqrt()).abs() < 1e-14);

        let c = FnVectorField::constant(vec![0.4, 1.1]);
        let r = intermediate_residual(e.as_ref(), &ZeroForce { dim: 2 }, &c, &[1.0, 0.0]).unwrap();
        assert_eq!(r.norm, 0.0);
    }

    #[test]
    fn vorticity_rotation_example() {
        let e = euclid(2);
        let v = ExprVectorField::parse(Chart::spatial(2), &["-x2", "x1"]).unwrap();
        let terms = vorticity_terms(e.as_ref(), &v, &[1.0, 2.0], DiffMode::Auto).unwrap();
        // dv♭ = 2 dx∧dy, ι_v(2 dx∧dy) = 2(v^x dy - v^y dx) = (-2, -4); dT = (1, 2)
        assert_eq!(terms.interior, DVector::from_vec(vec![-2.0, -4.0]));
        assert_eq!(terms.energy, DVector::from_vec(vec![1.0, 2.0]));
        assert_eq!(&terms.interior + &terms.energy, DVector::from_vec(vec![-1.0, -2.0]));
        assert_eq!(terms.gap(), DVector::zeros(2));
    }

    #[test]
    fn vorticity_of_gradient_field() {
        let e = euclid(2);
        let s = ExprScalar::parse(Chart::spatial(2), "sin(x1)*x2^2").unwrap();
        let v = GradientField::new(e.as_ref(), &s);
        for mode in [DiffMode::Auto, DiffMode::FiniteDifference] {
            let terms = vorticity_terms(e.as_ref(), &v, &[0.4, -0.9], mode).unwrap();
            assert!(terms.interior.amax() < 1e-7);
            assert!(terms.gap().amax() < 1e-6);
        }
        let zero = FnVectorField::constant(vec![0.0, 0.0]);
        let gap = vorticity_identity_gap(e.as_ref(), &zero, &[0.1, 0.2], DiffMode::Auto).unwrap();
        assert_eq!(gap, DVector::zeros(2));
    }

    #[test]
    fn vorticity_on_curved_metric() {
        let m = builtin("curved", 3).unwrap().metric;
        let v = ExprVectorField::parse(Chart::spatial(3), &["x2*x3", "sin(x1)", "x1^2 - x3"])
            .unwrap();
        let p = [0.3, -0.4, 0.8];
        assert!(vorticity_identity_gap(&m, &v, &p, DiffMode::Auto).unwrap().amax() < 1e-13);
        assert!(
            vorticity_identity_gap(&m, &v, &p, DiffMode::FiniteDifference)
                .unwrap()
                .amax()
                < 1e-7
        );
    }

    #[test]
    fn prolongation_examples() {
        let free1 = FnField::free(1);
        let c = FnVectorField::constant(vec![2.5]);
        assert_eq!(prolongation_defect(&c, &free1, &[0.7]).unwrap(), 0.0);

        let id = ExprVectorField::parse(Chart::spatial(1), &["x1"]).unwrap();
        assert_eq!(prolongation_defect(&id, &free1, &[0.7]).unwrap(), 0.7);
        assert_eq!(prolongation_defect(&id, &free1, &[0.0]).unwrap(), 0.0);

        // ẗ = 0, ẍ = 0 with v = x ∂/∂t
        let free2 = FnField::free(2);
        let v = ExprVectorField::parse(Chart::spacetime(1), &["x1", "0"]).unwrap();
        for p in [[0.0, 1.0], [2.0, -3.0]] {
            assert_eq!(prolongation_defect(&v, &free2, &p).unwrap(), 0.0);
        }
    }

    #[test]
    fn prolongation_agrees_with_residual() {
        let e = euclid(2);
        let force = Arc::new(pressure_force("x1^2 + x2^2"));
        let d = newton_field(e.clone(), force.clone()).unwrap();
        let good = ExprVectorField::parse(Chart::spatial(2), &["-sqrt(2)*x2", "sqrt(2)*x1"]).unwrap();
        let bad = ExprVectorField::parse(Chart::spatial(2), &["-x2", "x1"]).unwrap();
        let p = [0.5, 0.25];
        assert!(prolongation_defect(&good, &d, &p).unwrap() < 1e-14);
        assert!(prolongation_defect(&bad, &d, &p).unwrap() > 0.1);
        assert!(intermediate_residual(e.as_ref(), force.as_ref(), &bad, &p).unwrap().norm > 0.1);
    }

    #[test]
    fn hamilton_jacobi_examples() {
        let e = euclid(2);
        let zero = FnScalar::constant(2, 0.0);
        let linear = ExprScalar::parse(Chart::spatial(2), "3*x1 + 4*x2").unwrap();
        assert_eq!(hamiltonian_on_section(e.as_ref(), &zero, &linear, &[0.1, 0.2]).unwrap(), 12.5);
        assert_eq!(hamilton_jacobi_residual(e.as_ref(), &zero, &linear, &[0.1, 0.2]).unwrap(), 0.0);
        assert_eq!(lagrangian_defect(e.as_ref(), &linear, &[0.1, 0.2]).unwrap(), 0.0);

        let e1 = euclid(1);
        let zero1 = FnScalar::constant(1, 0.0);
        let sq = ExprScalar::parse(Chart::spatial(1), "x1^2").unwrap();
        assert_eq!(hamiltonian_on_section(e1.as_ref(), &zero1, &sq, &[0.5]).unwrap(), 0.5);
        let r = hamilton_jacobi_residual(e1.as_ref(), &zero1, &sq, &[0.5]).unwrap();
        assert!((r - 2.0).abs() < 1e-8);
        assert_eq!(hamilton_jacobi_residual(e1.as_ref(), &zero1, &sq, &[0.0]).unwrap(), 0.0);
    }

    #[test]
    fn oscillator_action_is_lagrangian_intermediate() {
        // S' = sqrt(2E - x^2) with E = 1/2
        let e1 = euclid(1);
        let s = FnScalar::new(1, |x| 0.5 * (x[0] * (1.0 - x[0] * x[0]).sqrt() + x[0].asin()))
            .with_differential(|x| DVector::from_vec(vec![(1.0 - x[0] * x[0]).sqrt()]));
        let u = ExprScalar::parse(Chart::spatial(1), "x1^2/2").unwrap();
        let force = crate::dynamics::ExactForce::new(Arc::new(u.clone()));
        let v = GradientField::new(e1.as_ref(), &s);
        assert_eq!(field_value(&v, &[0.0]).unwrap()[0], 1.0);
        for x in [-0.9, -0.3, 0.0, 0.6, 0.9] {
            let r = intermediate_residual(e1.as_ref(), &force, &v, &[x]).unwrap();
            assert!(r.norm < 1e-9, "x = {x}: {}", r.norm);
            assert!(hamilton_jacobi_residual(e1.as_ref(), &u, &s, &[x]).unwrap() < 1e-9);
        }
    }
}
