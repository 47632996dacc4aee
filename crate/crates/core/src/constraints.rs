//! Time constraint and relativistic correction.
//!
//! Both modify a force form by a multiple of a fixed 1-form:
//!
//! * time constraint: `ᾱ = α + λ dt` with `λ = ẍ^t / g^tt`, where `ẍ^t` is the
//!   time acceleration of the base Newton field. The modified field then keeps
//!   `ṫ = g^{tj} p_j = ẋ^t` constant.
//! * relativistic correction: `α̂ = α - (α̇/θ̇) θ` with `θ_i = g_ij ẋ^j` and
//!   `θ̇ = 2T`. The modified force satisfies `α̂_i ẋ^i = 0`, so `T` is conserved.

use std::fmt;
use std::sync::Arc;

use nalgebra::DVector;

use crate::dynamics::{
    alpha_dot, force_at, newton_field, theta, ForceForm, NewtonField, Provenance,
    SecondOrderField, State,
};
use crate::error::{Error, PointDisplay, Result};
use crate::geometry::{metric_at, scalar_differential, DiffMode, MetricField, ScalarField};

/// Smallest admissible `|g^tt|`.
pub const TIME_FLOOR: f64 = 1e-12;

/// Smallest admissible `|θ̇| = |2T|`.
pub const NULL_FLOOR: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ConstraintKind {
    Time,
    Relativistic,
}

impl fmt::Display for ConstraintKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ConstraintKind::Time => "time",
            ConstraintKind::Relativistic => "relativistic",
        })
    }
}

struct Inner {
    kind: ConstraintKind,
    metric: Arc<dyn MetricField>,
    base: Arc<dyn ForceForm>,
    base_field: NewtonField,
    time_index: usize,
}

/// A force form together with its canonical modification.
#[derive(Clone)]
pub struct ConstrainedSystem {
    inner: Arc<Inner>,
}

/// Time constraint along coordinate `time_index`.
pub fn time_constrain(
    metric: Arc<dyn MetricField>,
    force: Arc<dyn ForceForm>,
    time_index: usize,
) -> Result<ConstrainedSystem> {
    if time_index >= metric.dim() {
        return Err(Error::mismatch("time index", metric.dim(), time_index));
    }
    ConstrainedSystem::new(ConstraintKind::Time, metric, force, time_index)
}

/// Relativistic correction `α̂ = α - (α̇/θ̇) θ`.
pub fn relativistic_correction(
    metric: Arc<dyn MetricField>,
    force: Arc<dyn ForceForm>,
) -> Result<ConstrainedSystem> {
    ConstrainedSystem::new(ConstraintKind::Relativistic, metric, force, 0)
}

impl ConstrainedSystem {
    fn new(
        kind: ConstraintKind,
        metric: Arc<dyn MetricField>,
        base: Arc<dyn ForceForm>,
        time_index: usize,
    ) -> Result<Self> {
        let base_field = newton_field(metric.clone(), base.clone())?;
        Ok(ConstrainedSystem {
            inner: Arc::new(Inner {
                kind,
                metric,
                base,
                base_field,
                time_index,
            }),
        })
    }

    pub fn kind(&self) -> ConstraintKind {
        self.inner.kind
    }

    pub fn metric(&self) -> &Arc<dyn MetricField> {
        &self.inner.metric
    }

    pub fn base_force(&self) -> Arc<dyn ForceForm> {
        self.inner.base.clone()
    }

    pub fn modified_force(&self) -> Arc<dyn ForceForm> {
        Arc::new(ModifiedForce(self.clone()))
    }

    /// Newton field of the modified force.
    pub fn newton_field(&self) -> NewtonField {
        let provenance = Provenance::Constrained {
            kind: self.kind(),
            force: self.inner.base.label(),
        };
        newton_field(self.inner.metric.clone(), self.modified_force())
            .expect("dimensions checked at construction")
            .with_provenance(provenance)
    }

    /// The 1-form the multiplier scales: `dt` or `θ`.
    pub fn direction(&self, state: &State) -> Result<DVector<f64>> {
        match self.kind() {
            ConstraintKind::Time => {
                let mut dt = DVector::zeros(self.inner.metric.dim());
                dt[self.inner.time_index] = 1.0;
                Ok(dt)
            }
            ConstraintKind::Relativistic => theta(self.inner.metric.as_ref(), state),
        }
    }

    /// `λ` for the time constraint, `-α̇/θ̇` for the relativistic correction.
    pub fn multiplier(&self, state: &State) -> Result<f64> {
        match self.kind() {
            ConstraintKind::Time => {
                let at = metric_at(self.inner.metric.as_ref(), &state.x)?;
                let k = self.inner.time_index;
                let g_tt = at.inverse[(k, k)];
                if g_tt.abs() < TIME_FLOOR {
                    return Err(Error::DegenerateTimeDirection {
                        value: g_tt.abs(),
                        point: PointDisplay::from(state.x.as_slice()),
                    });
                }
                // ṫ = g^{tj} g_jk ẋ^k is ẋ^t, so Dṫ is the base time acceleration
                let t_ddot = self.inner.base_field.accel(state)?[k];
                Ok(t_ddot / g_tt)
            }
            ConstraintKind::Relativistic => {
                let two_t = two_kinetic(self.inner.metric.as_ref(), state)?;
                Ok(-alpha_dot(self.inner.base.as_ref(), state)? / two_t)
            }
        }
    }

    /// `max_i |(modified - base - multiplier · direction)_i|`; zero by construction.
    pub fn proportionality_defect(&self, state: &State) -> Result<f64> {
        let modified = force_at(&ModifiedForce(self.clone()), state)?;
        let base = force_at(self.inner.base.as_ref(), state)?;
        let expected = self.direction(state)? * self.multiplier(state)?;
        Ok((modified - base - expected).amax())
    }
}

impl fmt::Debug for ConstrainedSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ConstrainedSystem")
            .field("kind", &self.inner.kind)
            .field("base", &self.inner.base.label())
            .finish()
    }
}

fn two_kinetic(metric: &dyn MetricField, state: &State) -> Result<f64> {
    let two_t = theta(metric, state)?.dot(&state.velocity());
    if two_t.abs() < NULL_FLOOR {
        return Err(Error::NullVelocity { two_t });
    }
    Ok(two_t)
}

struct ModifiedForce(ConstrainedSystem);

impl ForceForm for ModifiedForce {
    fn dim(&self) -> usize {
        self.0.inner.base.dim()
    }

    fn components(&self, state: &State) -> Result<DVector<f64>> {
        let sys = &self.0;
        let base = force_at(sys.inner.base.as_ref(), state)?;
        let lambda = sys.multiplier(state)?;
        Ok(base + sys.direction(state)? * lambda)
    }

    fn label(&self) -> String {
        let base = self.0.inner.base.label();
        match self.0.kind() {
            ConstraintKind::Time => format!("{base} + lambda dt"),
            ConstraintKind::Relativistic => format!("({base})^"),
        }
    }
}

/// Coordinate form of the relativistic correction:
/// `α̂_i = α_i - sgn(θ̇) α_j u^j u_i` with `u = ẋ/√|θ̇|`.
pub fn corrected_force_coordinates(
    metric: &dyn MetricField,
    force: &dyn ForceForm,
    state: &State,
) -> Result<DVector<f64>> {
    let at = metric_at(metric, &state.x)?;
    let v = state.velocity();
    let two_t = at.inner(&v, &v);
    if two_t.abs() < NULL_FLOOR {
        return Err(Error::NullVelocity { two_t });
    }
    let u = v / two_t.abs().sqrt();
    let u_low = at.flat(&u);
    let alpha = force_at(force, state)?;
    let along = alpha.dot(&u);
    Ok(alpha - u_low * (two_t.signum() * along))
}

/// Raised correction of a conservative force `dΦ`:
/// `α̂^k = Φ_,i (g^ik - sgn(θ̇) u^k u^i)`.
pub fn conservative_correction_raised(
    metric: &dyn MetricField,
    potential: &dyn ScalarField,
    state: &State,
) -> Result<DVector<f64>> {
    let at = metric_at(metric, &state.x)?;
    let v = state.velocity();
    let two_t = at.inner(&v, &v);
    if two_t.abs() < NULL_FLOOR {
        return Err(Error::NullVelocity { two_t });
    }
    let u = v / two_t.abs().sqrt();
    let d_phi = scalar_differential(potential, &state.x, DiffMode::Auto)?;
    let projector = &at.inverse - (&u * u.transpose()) * two_t.signum();
    Ok(projector * d_phi)
}
