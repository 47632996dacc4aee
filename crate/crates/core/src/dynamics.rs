//! Tangent-bundle dynamics.
//!
//! A [`State`] is a point `(x, ẋ)` of the tangent bundle. Forces are
//! horizontal 1-forms `α_i(x, ẋ)` stored covariantly; they are raised with the
//! metric only inside [`NewtonField`], which realizes
//! `ẍ^k = -(g^kj α_j + Γ^k_ij ẋ^i ẋ^j)`.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::constraints::ConstraintKind;
use crate::error::{ensure_finite, Error, PointDisplay, Result};
use crate::geometry::{
    christoffel_with, metric_at, scalar_differential, scalar_value, DiffMode, MetricField,
    ScalarField,
};

/// Smallest admissible `|ρ|` for forces of the form `dP/ρ`.
pub const DENSITY_FLOOR: f64 = 1e-12;

/// Antisymmetry tolerance for Lorentz two-forms.
pub const ANTISYMMETRY_TOL: f64 = 1e-12;

/// A point `(x, ẋ)` of the tangent bundle.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub x: Vec<f64>,
    pub xdot: Vec<f64>,
}

impl State {
    pub fn new(x: Vec<f64>, xdot: Vec<f64>) -> Result<Self> {
        if x.len() != xdot.len() {
            return Err(Error::mismatch("state velocity", x.len(), xdot.len()));
        }
        ensure_finite("state position", &x, &x)?;
        ensure_finite("state velocity", &x, &xdot)?;
        Ok(State { x, xdot })
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    pub fn velocity(&self) -> DVector<f64> {
        DVector::from_column_slice(&self.xdot)
    }
}

/// Liouville form evaluated at a state: `θ_i = g_ij ẋ^j`.
pub fn theta(metric: &dyn MetricField, state: &State) -> Result<DVector<f64>> {
    let g = metric_components(metric, &state.x)?;
    Ok(g * state.velocity())
}

/// `T = ½ g_ij ẋ^i ẋ^j`.
pub fn kinetic_energy(metric: &dyn MetricField, state: &State) -> Result<f64> {
    let v = state.velocity();
    let g = metric_components(metric, &state.x)?;
    let t = 0.5 * v.dot(&(g * &v));
    ensure_finite("kinetic energy", &state.x, &[t])?;
    Ok(t)
}

fn metric_components(metric: &dyn MetricField, x: &[f64]) -> Result<DMatrix<f64>> {
    if x.len() != metric.dim() {
        return Err(Error::mismatch("metric point", metric.dim(), x.len()));
    }
    let g = metric.components(x)?;
    ensure_finite("metric", x, g.as_slice())?;
    Ok(g)
}

/// Horizontal 1-form `α_i(x, ẋ) dx^i` on the tangent bundle.
pub trait ForceForm: Send + Sync {
    fn dim(&self) -> usize;

    fn components(&self, state: &State) -> Result<DVector<f64>>;

    fn velocity_dependent(&self) -> bool {
        true
    }

    fn label(&self) -> String;
}

impl<T: ForceForm + ?Sized> ForceForm for Arc<T> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn components(&self, state: &State) -> Result<DVector<f64>> {
        (**self).components(state)
    }
    fn velocity_dependent(&self) -> bool {
        (**self).velocity_dependent()
    }
    fn label(&self) -> String {
        (**self).label()
    }
}

impl<T: ForceForm + ?Sized> ForceForm for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn components(&self, state: &State) -> Result<DVector<f64>> {
        (**self).components(state)
    }
    fn velocity_dependent(&self) -> bool {
        (**self).velocity_dependent()
    }
    fn label(&self) -> String {
        (**self).label()
    }
}

/// Components of `force` at `state`, checked for dimension and finiteness.
pub fn force_at(force: &dyn ForceForm, state: &State) -> Result<DVector<f64>> {
    if state.dim() != force.dim() {
        return Err(Error::mismatch("force state", force.dim(), state.dim()));
    }
    let a = force.components(state)?;
    if a.len() != force.dim() {
        return Err(Error::mismatch("force components", force.dim(), a.len()));
    }
    ensure_finite(&format!("force {}", force.label()), &state.x, a.as_slice())?;
    Ok(a)
}

/// `α̇ = α_i(x, ẋ) ẋ^i`.
pub fn alpha_dot(force: &dyn ForceForm, state: &State) -> Result<f64> {
    let a = force_at(force, state)?;
    let value = a.dot(&state.velocity());
    ensure_finite("alpha dot", &state.x, &[value])?;
    Ok(value)
}

/// Largest `|α̇|` over `states`. Zero classifies the force as relativistic.
pub fn relativistic_defect(
    metric: &dyn MetricField,
    force: &dyn ForceForm,
    states: &[State],
) -> Result<f64> {
    if force.dim() != metric.dim() {
        return Err(Error::mismatch("force dimension", metric.dim(), force.dim()));
    }
    if states.is_empty() {
        return Err(Error::Validation("relativistic defect needs at least one state".into()));
    }
    states
        .iter()
        .try_fold(0.0_f64, |worst, s| Ok(worst.max(alpha_dot(force, s)?.abs())))
}

// ---------------------------------------------------------------------------
// Concrete forces

#[derive(Debug, Clone, Copy)]
pub struct ZeroForce {
    pub dim: usize,
}

impl ForceForm for ZeroForce {
    fn dim(&self) -> usize {
        self.dim
    }
    fn components(&self, _state: &State) -> Result<DVector<f64>> {
        Ok(DVector::zeros(self.dim))
    }
    fn velocity_dependent(&self) -> bool {
        false
    }
    fn label(&self) -> String {
        "0".into()
    }
}

/// `α = dΦ`.
#[derive(Clone)]
pub struct ExactForce {
    potential: Arc<dyn ScalarField>,
    mode: DiffMode,
}

impl ExactForce {
    pub fn new(potential: Arc<dyn ScalarField>) -> Self {
        ExactForce {
            potential,
            mode: DiffMode::Auto,
        }
    }

    pub fn with_mode(mut self, mode: DiffMode) -> Self {
        self.mode = mode;
        self
    }
}

impl ForceForm for ExactForce {
    fn dim(&self) -> usize {
        self.potential.input_dim()
    }
    fn components(&self, state: &State) -> Result<DVector<f64>> {
        scalar_differential(self.potential.as_ref(), &state.x, self.mode)
    }
    fn velocity_dependent(&self) -> bool {
        false
    }
    fn label(&self) -> String {
        "dPhi".into()
    }
}

/// `α = dP/ρ`.
#[derive(Clone)]
pub struct IntegrableForce {
    pressure: Arc<dyn ScalarField>,
    density: Arc<dyn ScalarField>,
    mode: DiffMode,
}

impl IntegrableForce {
    pub fn new(pressure: Arc<dyn ScalarField>, density: Arc<dyn ScalarField>) -> Result<Self> {
        if pressure.input_dim() != density.input_dim() {
            return Err(Error::mismatch(
                "density dimension",
                pressure.input_dim(),
                density.input_dim(),
            ));
        }
        Ok(IntegrableForce {
            pressure,
            density,
            mode: DiffMode::Auto,
        })
    }

    pub fn with_mode(mut self, mode: DiffMode) -> Self {
        self.mode = mode;
        self
    }
}

/// `ρ(x)`, rejecting values below [`DENSITY_FLOOR`].
pub(crate) fn density_at(density: &dyn ScalarField, x: &[f64]) -> Result<f64> {
    let rho = scalar_value(density, x)?;
    if rho.abs() < DENSITY_FLOOR {
        return Err(Error::ZeroDensity {
            point: PointDisplay::from(x),
        });
    }
    Ok(rho)
}

impl ForceForm for IntegrableForce {
    fn dim(&self) -> usize {
        self.pressure.input_dim()
    }
    fn components(&self, state: &State) -> Result<DVector<f64>> {
        let rho = density_at(self.density.as_ref(), &state.x)?;
        Ok(scalar_differential(self.pressure.as_ref(), &state.x, self.mode)? / rho)
    }
    fn velocity_dependent(&self) -> bool {
        false
    }
    fn label(&self) -> String {
        "dP/rho".into()
    }
}

type TwoFormFn = Arc<dyn Fn(&State) -> Result<DMatrix<f64>> + Send + Sync>;

/// Lorentz-type force `α_j = ẋ^i F_ij` built from a two-form `F(x, ẋ)`.
#[derive(Clone)]
pub struct LorentzForce {
    dim: usize,
    field: TwoFormFn,
}

/// Lorentz force from a two-form depending on position only.
pub fn lorentz_force(
    dim: usize,
    f: impl Fn(&[f64]) -> Result<DMatrix<f64>> + Send + Sync + 'static,
) -> LorentzForce {
    LorentzForce {
        dim,
        field: Arc::new(move |s: &State| f(&s.x)),
    }
}

impl LorentzForce {
    /// Two-form that may also depend on the velocity.
    pub fn velocity_dependent(
        dim: usize,
        f: impl Fn(&State) -> Result<DMatrix<f64>> + Send + Sync + 'static,
    ) -> Self {
        LorentzForce {
            dim,
            field: Arc::new(f),
        }
    }

    /// `F` at a state, checked for antisymmetry.
    pub fn two_form(&self, state: &State) -> Result<DMatrix<f64>> {
        let f = (self.field)(state)?;
        if f.shape() != (self.dim, self.dim) {
            return Err(Error::mismatch("two-form", self.dim, f.nrows()));
        }
        ensure_finite("two-form", &state.x, f.as_slice())?;
        let defect = (&f + f.transpose()).amax();
        if defect > ANTISYMMETRY_TOL {
            return Err(Error::NotAntisymmetric {
                defect,
                point: PointDisplay::from(state.x.as_slice()),
            });
        }
        Ok(f)
    }
}

impl fmt::Debug for LorentzForce {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LorentzForce(dim = {})", self.dim)
    }
}

impl ForceForm for LorentzForce {
    fn dim(&self) -> usize {
        self.dim
    }
    fn components(&self, state: &State) -> Result<DVector<f64>> {
        let f = self.two_form(state)?;
        Ok(f.transpose() * state.velocity())
    }
    fn label(&self) -> String {
        "i_xdot F".into()
    }
}

/// Sum of several forces.
#[derive(Clone)]
pub struct SumForce {
    dim: usize,
    terms: Vec<Arc<dyn ForceForm>>,
}

impl SumForce {
    pub fn new(terms: Vec<Arc<dyn ForceForm>>) -> Result<Self> {
        let dim = terms
            .first()
            .map(|t| t.dim())
            .ok_or_else(|| Error::Validation("empty force sum".into()))?;
        if let Some(bad) = terms.iter().find(|t| t.dim() != dim) {
            return Err(Error::mismatch("force sum term", dim, bad.dim()));
        }
        Ok(SumForce { dim, terms })
    }
}

impl ForceForm for SumForce {
    fn dim(&self) -> usize {
        self.dim
    }
    fn components(&self, state: &State) -> Result<DVector<f64>> {
        self.terms
            .iter()
            .try_fold(DVector::zeros(self.dim), |acc, t| Ok(acc + force_at(t.as_ref(), state)?))
    }
    fn velocity_dependent(&self) -> bool {
        self.terms.iter().any(|t| t.velocity_dependent())
    }
    fn label(&self) -> String {
        let parts: Vec<String> = self.terms.iter().map(|t| t.label()).collect();
        parts.join(" + ")
    }
}

type StateVecFn = Arc<dyn Fn(&State) -> Result<DVector<f64>> + Send + Sync>;

/// Force given by a closure.
#[derive(Clone)]
pub struct FnForce {
    dim: usize,
    f: StateVecFn,
    velocity_dependent: bool,
    label: String,
}

impl FnForce {
    pub fn new(
        dim: usize,
        label: impl Into<String>,
        f: impl Fn(&State) -> Result<DVector<f64>> + Send + Sync + 'static,
    ) -> Self {
        FnForce {
            dim,
            f: Arc::new(f),
            velocity_dependent: true,
            label: label.into(),
        }
    }

    /// Force depending on position only.
    pub fn positional(
        dim: usize,
        label: impl Into<String>,
        f: impl Fn(&[f64]) -> Result<DVector<f64>> + Send + Sync + 'static,
    ) -> Self {
        FnForce {
            dim,
            f: Arc::new(move |s: &State| f(&s.x)),
            velocity_dependent: false,
            label: label.into(),
        }
    }
}

impl ForceForm for FnForce {
    fn dim(&self) -> usize {
        self.dim
    }
    fn components(&self, state: &State) -> Result<DVector<f64>> {
        (self.f)(state)
    }
    fn velocity_dependent(&self) -> bool {
        self.velocity_dependent
    }
    fn label(&self) -> String {
        self.label.clone()
    }
}

// ---------------------------------------------------------------------------
// Second-order fields

/// Where a second-order field came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Provenance {
    Geodesic,
    Newton { force: String },
    Constrained { kind: ConstraintKind, force: String },
    Custom(String),
}

/// A second-order equation `ẍ = f(x, ẋ)` on the tangent bundle.
pub trait SecondOrderField: Send + Sync {
    fn dim(&self) -> usize;

    fn accel(&self, state: &State) -> Result<DVector<f64>>;

    fn provenance(&self) -> Provenance;
}

impl<T: SecondOrderField + ?Sized> SecondOrderField for Arc<T> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn accel(&self, state: &State) -> Result<DVector<f64>> {
        (**self).accel(state)
    }
    fn provenance(&self) -> Provenance {
        (**self).provenance()
    }
}

impl<T: SecondOrderField + ?Sized> SecondOrderField for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn accel(&self, state: &State) -> Result<DVector<f64>> {
        (**self).accel(state)
    }
    fn provenance(&self) -> Provenance {
        (**self).provenance()
    }
}

/// Newton field of a metric and a force form.
#[derive(Clone)]
pub struct NewtonField {
    metric: Arc<dyn MetricField>,
    force: Option<Arc<dyn ForceForm>>,
    mode: DiffMode,
    provenance: Provenance,
}

/// `ẍ^k = -(g^kj α_j + Γ^k_ij ẋ^i ẋ^j)`.
pub fn newton_field(metric: Arc<dyn MetricField>, force: Arc<dyn ForceForm>) -> Result<NewtonField> {
    if force.dim() != metric.dim() {
        return Err(Error::mismatch("force dimension", metric.dim(), force.dim()));
    }
    let provenance = Provenance::Newton {
        force: force.label(),
    };
    Ok(NewtonField {
        metric,
        force: Some(force),
        mode: DiffMode::Auto,
        provenance,
    })
}

/// Force-free motion.
pub fn geodesic_field(metric: Arc<dyn MetricField>) -> NewtonField {
    NewtonField {
        metric,
        force: None,
        mode: DiffMode::Auto,
        provenance: Provenance::Geodesic,
    }
}

impl NewtonField {
    pub fn with_mode(mut self, mode: DiffMode) -> Self {
        self.mode = mode;
        self
    }

    pub(crate) fn with_provenance(mut self, provenance: Provenance) -> Self {
        self.provenance = provenance;
        self
    }

    pub fn metric(&self) -> &Arc<dyn MetricField> {
        &self.metric
    }

    pub fn force(&self) -> Option<&Arc<dyn ForceForm>> {
        self.force.as_ref()
    }
}

impl fmt::Debug for NewtonField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("NewtonField")
            .field("dim", &self.metric.dim())
            .field("provenance", &self.provenance)
            .finish()
    }
}

impl SecondOrderField for NewtonField {
    fn dim(&self) -> usize {
        self.metric.dim()
    }

    fn accel(&self, state: &State) -> Result<DVector<f64>> {
        let at = metric_at(self.metric.as_ref(), &state.x)?;
        if state.dim() != at.dim() {
            return Err(Error::mismatch("state", at.dim(), state.dim()));
        }
        let v = state.velocity();
        let gamma = christoffel_with(self.metric.as_ref(), &state.x, self.mode)?;
        let mut acc = -gamma.contract(&v, &v);
        if let Some(force) = &self.force {
            acc -= at.sharp(&force_at(force.as_ref(), state)?);
        }
        ensure_finite("acceleration", &state.x, acc.as_slice())?;
        Ok(acc)
    }

    fn provenance(&self) -> Provenance {
        self.provenance.clone()
    }
}

/// Second-order field given by a closure.
#[derive(Clone)]
pub struct FnField {
    dim: usize,
    f: StateVecFn,
    label: String,
}

impl FnField {
    pub fn new(
        dim: usize,
        label: impl Into<String>,
        f: impl Fn(&State) -> Result<DVector<f64>> + Send + Sync + 'static,
    ) -> Self {
        FnField {
            dim,
            f: Arc::new(f),
            label: label.into(),
        }
    }

    /// `ẍ = 0` in `dim` coordinates.
    pub fn free(dim: usize) -> Self {
        FnField::new(dim, "free", move |_| Ok(DVector::zeros(dim)))
    }
}

impl SecondOrderField for FnField {
    fn dim(&self) -> usize {
        self.dim
    }
    fn accel(&self, state: &State) -> Result<DVector<f64>> {
        let a = (self.f)(state)?;
        if a.len() != self.dim {
            return Err(Error::mismatch("acceleration", self.dim, a.len()));
        }
        ensure_finite("acceleration", &state.x, a.as_slice())?;
        Ok(a)
    }
    fn provenance(&self) -> Provenance {
        Provenance::Custom(self.label.clone())
    }
}

/// Inverse of the Newton correspondence: `α_j = -g_kj (ẍ^k + Γ^k_il ẋ^i ẋ^l)`.
pub fn reconstruct_force(
    metric: &dyn MetricField,
    field: &dyn SecondOrderField,
    state: &State,
) -> Result<DVector<f64>> {
    let at = metric_at(metric, &state.x)?;
    let v = state.velocity();
    let gamma = christoffel_with(metric, &state.x, DiffMode::Auto)?;
    let acc = field.accel(state)?;
    Ok(-at.flat(&(acc + gamma.contract(&v, &v))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Chart;
    use crate::geometry::{builtin, ExprScalar};

    fn st(x: &[f64], v: &[f64]) -> State {
        State::new(x.to_vec(), v.to_vec()).unwrap()
    }

    fn metric(name: &str, dim: usize) -> Arc<dyn MetricField> {
        Arc::new(builtin(name, dim).unwrap().metric)
    }

    #[test]
    fn kinetic_energy_examples() {
        let e = metric("euclidean", 2);
        assert_eq!(kinetic_energy(e.as_ref(), &st(&[0.0, 0.0], &[3.0, 4.0])).unwrap(), 12.5);
        let m = metric("minkowski", 2);
        assert_eq!(kinetic_energy(m.as_ref(), &st(&[0.0, 0.0], &[2.0, 1.0])).unwrap(), 1.5);
        let c = metric("curved", 2);
        assert_eq!(kinetic_energy(c.as_ref(), &st(&[0.4, 0.1], &[0.0, 0.0])).unwrap(), 0.0);
    }

    #[test]
    fn alpha_dot_examples() {
        let dx = FnForce::positional(2, "dx", |_| Ok(DVector::from_vec(vec![1.0, 0.0])));
        assert_eq!(alpha_dot(&dx, &st(&[0.0, 0.0], &[2.0, 3.0])).unwrap(), 2.0);

        let phi = ExprScalar::parse(Chart::spacetime(1), "x1").unwrap();
        let exact = ExactForce::new(Arc::new(phi));
        assert_eq!(alpha_dot(&exact, &st(&[0.3, 0.2], &[2.0, 1.0])).unwrap(), 1.0);
    }

    #[test]
    fn lorentz_contraction() {
        // α_j = ẋ^i F_ij with F_01 = 1: α_0 = ẋ^1 F_10 = -b, α_1 = ẋ^0 F_01 = a
        let f = lorentz_force(2, |_| Ok(DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0])));
        let (a, b) = (0.7, -1.9);
        let alpha = f.components(&st(&[0.0, 0.0], &[a, b])).unwrap();
        assert_eq!(alpha, DVector::from_vec(vec![-b, a]));
        assert_eq!(alpha_dot(&f, &st(&[1.0, 2.0], &[a, b])).unwrap(), 0.0);

        let zero = lorentz_force(3, |_| Ok(DMatrix::zeros(3, 3)));
        assert_eq!(zero.components(&st(&[0.0; 3], &[1.0, 2.0, 3.0])).unwrap(), DVector::zeros(3));
    }

    #[test]
    fn lorentz_rejects_symmetric_part() {
        let f = lorentz_force(2, |_| Ok(DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0])));
        assert!(matches!(
            f.components(&st(&[0.0, 0.0], &[1.0, 1.0])),
            Err(Error::NotAntisymmetric { .. })
        ));
    }

    #[test]
    fn newton_field_examples() {
        let e = metric("euclidean", 2);
        let dx = FnForce::positional(2, "dx", |_| Ok(DVector::from_vec(vec![1.0, 0.0])));
        let d = newton_field(e, Arc::new(dx)).unwrap();
        assert_eq!(d.accel(&st(&[0.3, 0.9], &[1.0, -2.0])).unwrap(), DVector::from_vec(vec![-1.0, 0.0]));

        let polar = metric("polar", 2);
        let g = geodesic_field(polar);
        let a = g.accel(&st(&[2.0, 0.0], &[0.0, 1.0])).unwrap();
        assert!((a - DVector::from_vec(vec![2.0, 0.0])).amax() < 1e-14);

        let c = geodesic_field(metric("curved", 3));
        assert_eq!(c.accel(&st(&[0.1, 0.2, 0.3], &[0.0; 3])).unwrap(), DVector::zeros(3));
        assert_eq!(c.provenance(), Provenance::Geodesic);
    }

    #[test]
    fn zero_force_newton_equals_geodesic() {
        let m = metric("curved", 2);
        let a = newton_field(m.clone(), Arc::new(ZeroForce { dim: 2 })).unwrap();
        let b = geodesic_field(m);
        let s = st(&[0.4, -0.3], &[1.2, 0.5]);
        assert_eq!(a.accel(&s).unwrap(), b.accel(&s).unwrap());
    }

    #[test]
    fn force_reconstruction_round_trip() {
        let m = metric("curved", 2);
        let phi = ExprScalar::parse(Chart::spatial(2), "sin(x1)*x2 + x2^3").unwrap();
        let force: Arc<dyn ForceForm> = Arc::new(ExactForce::new(Arc::new(phi)));
        let d = newton_field(m.clone(), force.clone()).unwrap();
        let s = st(&[0.4, -0.3], &[1.2, 0.5]);
        let back = reconstruct_force(m.as_ref(), &d, &s).unwrap();
        assert!((back - force.components(&s).unwrap()).amax() < 1e-10);
    }

    #[test]
    fn relativistic_defect_classifies() {
        let m = metric("minkowski", 2);
        let states: Vec<State> = (0..20)
            .map(|k| {
                let s = k as f64 * 0.37;
                st(&[s.sin(), s.cos()], &[1.0 + s, s.sin()])
            })
            .collect();
        let lorentz = lorentz_force(2, |x| {
            let b = x[0].exp();
            Ok(DMatrix::from_row_slice(2, 2, &[0.0, b, -b, 0.0]))
        });
        assert!(relativistic_defect(m.as_ref(), &lorentz, &states).unwrap() < 1e-14);
        let phi = ExprScalar::parse(Chart::spacetime(1), "x1").unwrap();
        let exact = ExactForce::new(Arc::new(phi));
        assert!(relativistic_defect(m.as_ref(), &exact, &states).unwrap() > 0.0);
        assert_eq!(
            relativistic_defect(m.as_ref(), &ZeroForce { dim: 2 }, &states).unwrap(),
            0.0
        );
    }

    #[test]
    fn zero_density_is_reported() {
        let p = ExprScalar::parse(Chart::spatial(1), "x1").unwrap();
        let rho = ExprScalar::parse(Chart::spatial(1), "0").unwrap();
        let f = IntegrableForce::new(Arc::new(p), Arc::new(rho)).unwrap();
        assert!(matches!(f.components(&st(&[1.0], &[0.0])), Err(Error::ZeroDensity { .. })));
    }
}
