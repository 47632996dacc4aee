//! The TOML document model.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    #[serde(default)]
    pub seed: u64,
    pub metric: MetricSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub force: Option<ForceSpec>,
    #[serde(default)]
    pub constraint: ConstraintSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field: Option<FieldSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fluid: Option<FluidSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hamilton_jacobi: Option<HamiltonJacobiSpec>,
    #[serde(default)]
    pub sample: SampleSpec,
    #[serde(default, rename = "check")]
    pub checks: Vec<CheckSpec>,
    #[serde(default, rename = "trajectory")]
    pub trajectories: Vec<TrajectorySpec>,
}

/// One of: `builtin` (+ `dim`); `components` (+ `time`); `spatial` alone for
/// `dt² + g^s`; `spatial` with `scale` for `dt² - a(t)² h`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub builtin: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub components: Option<Vec<Vec<String>>>,
    #[serde(default)]
    pub time: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spatial: Option<Box<MetricSpec>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ForceKind {
    None,
    Potential,
    Pressure,
    Lorentz,
    Components,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForceSpec {
    pub kind: ForceKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub potential: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pressure: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub density: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub two_form: Option<Vec<Vec<String>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub components: Option<Vec<String>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConstraintSpec {
    #[default]
    None,
    Time,
    Relativistic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldSpec {
    pub components: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    Steady,
    Static,
    Flrw,
    Relativistic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FluidSpec {
    pub regime: Regime,
    pub velocity: Vec<String>,
    pub pressure: String,
    /// `ρ` for classical regimes.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub density: Option<String>,
    /// `μ` for the relativistic regime.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub energy_density: Option<String>,
    /// Extra covector `f_i(x)` added to the steady force.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub body_force: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HamiltonJacobiSpec {
    pub potential: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub action: Option<String>,
    /// Components of `dS`, for actions with no closed form in the DSL.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub momentum: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lower: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub upper: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub count: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub velocity_lower: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub velocity_upper: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckKind {
    /// `max |v^∇v + grad(v*α)|` for the system force.
    Intermediate,
    /// `max |accel(x, v) - J_v v|` for the system field.
    Prolongation,
    /// Vorticity identity gap for the field.
    Vorticity,
    /// `max |∇g|`.
    MetricCompatibility,
    /// `max |Γ^k_ij - Γ^k_ji|`.
    ChristoffelSymmetry,
    /// Regime Euler residual.
    Euler,
    /// Regime Bernoulli residual.
    Bernoulli,
    /// `|bernoulli - ⟨euler, v⟩|`.
    BernoulliFromEuler,
    /// Steady Euler against the intermediate residual of `dP/ρ (+ f)`.
    EulerVsIntermediate,
    /// Full-space split of the time-constrained system.
    Split,
    /// `|g(residual, u)|` for the relativistic regime.
    Orthogonality,
    /// `max |α̇|` of the system force over sampled states.
    AlphaDot,
    /// Newton correspondence round trip over sampled states.
    NewtonRoundTrip,
    /// `‖d(H(grad S))‖`.
    HamiltonJacobi,
    /// `‖d(grad S)♭‖`.
    Lagrangian,
}

impl CheckKind {
    pub fn name(self) -> &'static str {
        match self {
            CheckKind::Intermediate => "intermediate",
            CheckKind::Prolongation => "prolongation",
            CheckKind::Vorticity => "vorticity",
            CheckKind::MetricCompatibility => "metric-compatibility",
            CheckKind::ChristoffelSymmetry => "christoffel-symmetry",
            CheckKind::Euler => "euler",
            CheckKind::Bernoulli => "bernoulli",
            CheckKind::BernoulliFromEuler => "bernoulli-from-euler",
            CheckKind::EulerVsIntermediate => "euler-vs-intermediate",
            CheckKind::Split => "split",
            CheckKind::Orthogonality => "orthogonality",
            CheckKind::AlphaDot => "alpha-dot",
            CheckKind::NewtonRoundTrip => "newton-round-trip",
            CheckKind::HamiltonJacobi => "hamilton-jacobi",
            CheckKind::Lagrangian => "lagrangian",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModeSpec {
    #[default]
    Auto,
    Fd,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckSpec {
    pub name: String,
    pub kind: CheckKind,
    pub tolerance: f64,
    #[serde(default)]
    pub mode: ModeSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub count: Option<usize>,
}

/// Integration scheme; fixed-step RK4 is the only one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    #[default]
    Rk4,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrajectorySpec {
    pub name: String,
    pub x0: Vec<f64>,
    /// Defaults to the field value at `x0`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub xdot0: Option<Vec<f64>>,
    pub t_end: f64,
    pub dt: f64,
    #[serde(default)]
    pub method: Method,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kinetic_tolerance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tdot_tolerance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lift_tolerance: Option<f64>,
    /// Accepted deviation of the RK4 step-halving ratio from 16, relative.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order_tolerance: Option<f64>,
}
