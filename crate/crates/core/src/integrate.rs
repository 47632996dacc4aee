//! Fixed-step RK4 for second-order fields and for flows of vector fields.

use std::fmt;
use std::io::Write;

use nalgebra::DVector;

use crate::dynamics::{kinetic_energy, SecondOrderField, State};
use crate::error::{Error, Result};
use crate::geometry::{field_value, MetricField, VectorField};

/// Sequence of states sampled at parameter values `times`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<State>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn last(&self) -> Option<&State> {
        self.states.last()
    }

    fn push(&mut self, t: f64, s: State) {
        self.times.push(t);
        self.states.push(s);
    }

    /// `max_s |2T(s) - 2T(0)|`.
    pub fn kinetic_drift(&self, metric: &dyn MetricField) -> Result<f64> {
        let Some(first) = self.states.first() else {
            return Ok(0.0);
        };
        let t0 = kinetic_energy(metric, first)?;
        self.states.iter().try_fold(0.0_f64, |worst, s| {
            Ok(worst.max((2.0 * (kinetic_energy(metric, s)? - t0)).abs()))
        })
    }

    /// `max_s |ẋ^k(s) - ẋ^k(0)|`.
    pub fn velocity_drift(&self, k: usize) -> f64 {
        let Some(first) = self.states.first() else {
            return 0.0;
        };
        self.states
            .iter()
            .map(|s| (s.xdot[k] - first.xdot[k]).abs())
            .fold(0.0, f64::max)
    }

    /// Writes `s,x0..,xdot0..,T,tdot`. `tdot` is `ẋ^0` when `time_chart`, empty otherwise.
    pub fn write_csv(
        &self,
        out: &mut dyn Write,
        metric: &dyn MetricField,
        time_chart: bool,
    ) -> Result<()> {
        let n = metric.dim();
        let io = |e: std::io::Error| Error::Validation(format!("writing trajectory: {e}"));
        let mut header = vec!["s".to_string()];
        header.extend((0..n).map(|i| format!("x{i}")));
        header.extend((0..n).map(|i| format!("xdot{i}")));
        header.push("T".into());
        header.push("tdot".into());
        writeln!(out, "{}", header.join(",")).map_err(io)?;
        for (t, s) in self.times.iter().zip(&self.states) {
            let mut row = vec![fmt_float(*t)];
            row.extend(s.x.iter().map(|v| fmt_float(*v)));
            row.extend(s.xdot.iter().map(|v| fmt_float(*v)));
            row.push(fmt_float(kinetic_energy(metric, s)?));
            row.push(if time_chart { fmt_float(s.xdot[0]) } else { String::new() });
            writeln!(out, "{}", row.join(",")).map_err(io)?;
        }
        Ok(())
    }
}

/// Scientific notation with 17 significant digits, enough to round-trip.
pub(crate) fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

/// Integration stopped early; `partial` holds every state reached.
#[derive(Debug, Clone, PartialEq)]
pub struct Aborted {
    pub partial: Trajectory,
    pub error: Error,
}

impl fmt::Display for Aborted {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let t = self.partial.times.last().copied().unwrap_or(0.0);
        write!(f, "integration aborted after s = {t}: {}", self.error)
    }
}

impl std::error::Error for Aborted {}

impl From<Aborted> for Error {
    fn from(a: Aborted) -> Self {
        a.error
    }
}

/// Parameter values `0, dt, 2dt, .., t_end`; the last step may be shorter.
fn grid(t_end: f64, dt: f64) -> Result<Vec<f64>> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::Validation(format!("step must be positive, got {dt}")));
    }
    if !(t_end >= 0.0 && t_end.is_finite()) {
        return Err(Error::Validation(format!("end time must be non-negative, got {t_end}")));
    }
    let n = (t_end / dt - 1e-9).ceil().max(0.0) as usize;
    let mut times: Vec<f64> = (0..n).map(|k| k as f64 * dt).collect();
    times.push(t_end);
    Ok(times)
}

fn rk4_step(
    sof: &dyn SecondOrderField,
    s: &State,
    h: f64,
) -> Result<State> {
    let x = DVector::from_column_slice(&s.x);
    let v = s.velocity();
    let eval = |x: &DVector<f64>, v: &DVector<f64>| -> Result<DVector<f64>> {
        let st = State::new(x.as_slice().to_vec(), v.as_slice().to_vec())?;
        sof.accel(&st)
    };
    let a1 = eval(&x, &v)?;
    let (x2, v2) = (&x + &v * (h / 2.0), &v + &a1 * (h / 2.0));
    let a2 = eval(&x2, &v2)?;
    let (x3, v3) = (&x + &v2 * (h / 2.0), &v + &a2 * (h / 2.0));
    let a3 = eval(&x3, &v3)?;
    let (x4, v4) = (&x + &v3 * h, &v + &a3 * h);
    let a4 = eval(&x4, &v4)?;
    let xn = x + (v + &v2 * 2.0 + &v3 * 2.0 + &v4) * (h / 6.0);
    let vn = s.velocity() + (a1 + a2 * 2.0 + a3 * 2.0 + a4) * (h / 6.0);
    State::new(xn.as_slice().to_vec(), vn.as_slice().to_vec())
}

/// Classic RK4 on `(ẋ, ẍ)`.
pub fn integrate_second_order(
    sof: &dyn SecondOrderField,
    state0: &State,
    t_end: f64,
    dt: f64,
) -> std::result::Result<Trajectory, Aborted> {
    let mut traj = Trajectory::default();
    let fail = |partial: Trajectory, error: Error| Aborted { partial, error };
    if state0.dim() != sof.dim() {
        return Err(fail(traj, Error::mismatch("initial state", sof.dim(), state0.dim())));
    }
    let times = match grid(t_end, dt) {
        Ok(t) => t,
        Err(e) => return Err(fail(traj, e)),
    };
    traj.push(0.0, state0.clone());
    for w in times.windows(2) {
        let current = traj.states.last().expect("non-empty");
        match rk4_step(sof, current, w[1] - w[0]) {
            Ok(next) => traj.push(w[1], next),
            Err(e) => return Err(fail(traj, e)),
        }
    }
    Ok(traj)
}

/// `|e(dt)| / |e(dt/2)|` for the final state, against a reference run at `dt/16`.
/// Close to 16 for a fourth-order method in its asymptotic regime.
pub fn convergence_ratio(
    sof: &dyn SecondOrderField,
    state0: &State,
    t_end: f64,
    dt: f64,
) -> Result<f64> {
    let end = |h: f64| -> Result<DVector<f64>> {
        let traj = integrate_second_order(sof, state0, t_end, h)?;
        let s = traj.last().expect("trajectory has the initial state");
        Ok(DVector::from_iterator(
            2 * s.dim(),
            s.x.iter().chain(&s.xdot).copied(),
        ))
    };
    let reference = end(dt / 16.0)?;
    let coarse = (end(dt)? - &reference).norm();
    let fine = (end(dt / 2.0)? - &reference).norm();
    if fine == 0.0 {
        return Err(Error::Validation("step-halving error vanished; ratio undefined".into()));
    }
    Ok(coarse / fine)
}

/// Points of an integral curve of a vector field.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Curve {
    pub times: Vec<f64>,
    pub points: Vec<Vec<f64>>,
}

/// RK4 on `ẋ = v(x)`.
pub fn integrate_flow(v: &dyn VectorField, x0: &[f64], t_end: f64, dt: f64) -> Result<Curve> {
    if v.input_dim() != v.dim() {
        return Err(Error::Validation("flow needs an autonomous vector field".into()));
    }
    let times = grid(t_end, dt)?;
    let f = |x: &DVector<f64>| field_value(v, x.as_slice());
    let mut x = DVector::from_column_slice(x0);
    f(&x)?;
    let mut curve = Curve {
        times: vec![0.0],
        points: vec![x0.to_vec()],
    };
    for w in times.windows(2) {
        let h = w[1] - w[0];
        let k1 = f(&x)?;
        let k2 = f(&(&x + &k1 * (h / 2.0)))?;
        let k3 = f(&(&x + &k2 * (h / 2.0)))?;
        let k4 = f(&(&x + &k3 * h))?;
        x += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
        curve.times.push(w[1]);
        curve.points.push(x.as_slice().to_vec());
    }
    Ok(curve)
}

/// Attaches `ẋ(s) := v(x(s))` to a curve.
pub fn lift(curve: &Curve, v: &dyn VectorField) -> Result<Trajectory> {
    let mut traj = Trajectory::default();
    for (t, p) in curve.times.iter().zip(&curve.points) {
        let vel = field_value(v, p)?;
        traj.push(*t, State::new(p.clone(), vel.as_slice().to_vec())?);
    }
    Ok(traj)
}

/// Sup-distances between a lifted flow and a second-order trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LiftComparison {
    pub position: f64,
    pub velocity: f64,
}

pub fn lift_comparison(
    v: &dyn VectorField,
    sof: &dyn SecondOrderField,
    x0: &[f64],
    t_end: f64,
    dt: f64,
) -> Result<LiftComparison> {
    let lifted = lift(&integrate_flow(v, x0, t_end, dt)?, v)?;
    let start = lifted.states.first().expect("curve starts at x0");
    let dynamic = integrate_second_order(sof, start, t_end, dt)?;
    let dist = |a: &[f64], b: &[f64]| {
        a.iter()
            .zip(b)
            .map(|(p, q)| (p - q) * (p - q))
            .sum::<f64>()
            .sqrt()
    };
    let mut cmp = LiftComparison {
        position: 0.0,
        velocity: 0.0,
    };
    for (a, b) in lifted.states.iter().zip(&dynamic.states) {
        cmp.position = cmp.position.max(dist(&a.x, &b.x));
        cmp.velocity = cmp.velocity.max(dist(&a.xdot, &b.xdot));
    }
    Ok(cmp)
}

/// Sup over samples of the position distance between the lift of the flow of
/// `v` and the trajectory of `sof` from `(x0, v(x0))`.
pub fn compare_lift_vs_dynamics(
    v: &dyn VectorField,
    sof: &dyn SecondOrderField,
    x0: &[f64],
    t_end: f64,
    dt: f64,
) -> Result<f64> {
    Ok(lift_comparison(v, sof, x0, t_end, dt)?.position)
}

#[cfg(test)]
mod tests {
    use std::f64::consts::{E, FRAC_PI_2};
    use std::sync::Arc;

    use super::*;
    use crate::dynamics::{geodesic_field, newton_field, FnField, FnForce, IntegrableForce};
    use crate::expr::Chart;
    use crate::geometry::{builtin, ExprScalar, ExprVectorField, FnVectorField};

    fn st(x: &[f64], v: &[f64]) -> State {
        State::new(x.to_vec(), v.to_vec()).unwrap()
    }

    #[test]
    fn grid_ends_exactly() {
        let g = grid(1.0, 1e-3).unwrap();
        assert_eq!(g.len(), 1001);
        assert_eq!(*g.last().unwrap(), 1.0);
        let g = grid(1.0, 0.3).unwrap();
        assert_eq!(g.len(), 5);
        assert!((g[4] - g[3] - 0.1).abs() < 1e-15);
        assert_eq!(grid(0.0, 0.1).unwrap(), vec![0.0]);
        assert!(grid(1.0, 0.0).is_err());
        assert!(grid(-1.0, 0.1).is_err());
    }

    #[test]
    fn free_particle() {
        let t = integrate_second_order(&FnField::free(1), &st(&[0.0], &[1.0]), 1.0, 0.01).unwrap();
        assert!((t.last().unwrap().x[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn constant_force_parabola() {
        let e = Arc::new(builtin("euclidean", 1).unwrap().metric);
        let dx = FnForce::positional(1, "dx", |_| Ok(DVector::from_vec(vec![1.0])));
        let d = newton_field(e, Arc::new(dx)).unwrap();
        let t = integrate_second_order(&d, &st(&[0.0], &[0.0]), 1.0, 0.01).unwrap();
        assert!((t.last().unwrap().x[0] + 0.5).abs() < 1e-10);
    }

    #[test]
    fn polar_geodesic_is_straight() {
        let g = geodesic_field(Arc::new(builtin("polar", 2).unwrap().metric));
        let t = integrate_second_order(&g, &st(&[1.0, 0.0], &[0.0, 1.0]), 1.0, 1e-3).unwrap();
        // Cartesian oracle: the line x = 1, y = s
        for (s, state) in t.times.iter().zip(&t.states) {
            let (r, th) = (state.x[0], state.x[1]);
            assert!((r * th.cos() - 1.0).abs() < 1e-6);
            assert!((r * th.sin() - s).abs() < 1e-6);
        }
    }

    #[test]
    fn aborts_with_partial_trajectory() {
        let blowup = FnField::new(1, "blowup", |s| Ok(DVector::from_vec(vec![s.x[0].powi(8)])));
        let err = integrate_second_order(&blowup, &st(&[1.0], &[50.0]), 10.0, 0.1).unwrap_err();
        assert!(!err.partial.is_empty());
        assert!(matches!(err.error, Error::NonFinite { .. }));
    }

    #[test]
    fn flows_and_lift() {
        let c = FnVectorField::constant(vec![1.0, 0.0]);
        let curve = integrate_flow(&c, &[0.0, 0.0], 2.0, 0.1).unwrap();
        let end = curve.points.last().unwrap();
        assert!((end[0] - 2.0).abs() < 1e-12 && end[1].abs() < 1e-15);

        let rot = ExprVectorField::parse(Chart::spatial(2), &["-x2", "x1"]).unwrap();
        let curve = integrate_flow(&rot, &[1.0, 0.0], FRAC_PI_2, 1e-3).unwrap();
        let end = curve.points.last().unwrap();
        assert!(end[0].abs() < 1e-8 && (end[1] - 1.0).abs() < 1e-8);

        let lifted = lift(&curve, &rot).unwrap();
        assert_eq!(lifted.states[0], st(&[1.0, 0.0], &[0.0, 1.0]));
    }

    #[test]
    fn lift_comparison_examples() {
        let c = FnVectorField::constant(vec![0.3]);
        let d = compare_lift_vs_dynamics(&c, &FnField::free(1), &[0.2], 1.0, 1e-2).unwrap();
        assert!(d < 1e-12);

        let id = ExprVectorField::parse(Chart::spatial(1), &["x1"]).unwrap();
        let d = compare_lift_vs_dynamics(&id, &FnField::free(1), &[1.0], 1.0, 1e-3).unwrap();
        assert!((d - (E - 2.0)).abs() < 1e-9);

        let e = Arc::new(builtin("euclidean", 2).unwrap().metric);
        let chart = Chart::spatial(2);
        let force = IntegrableForce::new(
            Arc::new(ExprScalar::parse(chart, "x1^2 + x2^2").unwrap()),
            Arc::new(ExprScalar::parse(chart, "1").unwrap()),
        )
        .unwrap();
        let d = newton_field(e, Arc::new(force)).unwrap();
        let rot = ExprVectorField::parse(chart, &["-sqrt(2)*x2", "sqrt(2)*x1"]).unwrap();
        let cmp = lift_comparison(&rot, &d, &[0.8, -0.3], 1.0, 1e-3).unwrap();
        assert!(cmp.position < 1e-6 && cmp.velocity < 1e-6);
    }

    #[test]
    fn fourth_order_convergence() {
        let pendulum = FnField::new(1, "pendulum", |s| Ok(DVector::from_vec(vec![-s.x[0].sin()])));
        let r = convergence_ratio(&pendulum, &st(&[1.0], &[0.0]), 2.0, 0.1).unwrap();
        assert!((r - 16.0).abs() < 0.2 * 16.0, "ratio {r}");
    }

    #[test]
    fn csv_layout() {
        let m = builtin("minkowski", 2).unwrap().metric;
        let g = geodesic_field(Arc::new(m.clone()));
        let t = integrate_second_order(&g, &st(&[0.0, 0.0], &[2.0, 1.0]), 0.2, 0.1).unwrap();
        let mut buf = Vec::new();
        t.write_csv(&mut buf, &m, true).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "s,x0,x1,xdot0,xdot1,T,tdot");
        assert_eq!(lines.len(), 4);
        let fields: Vec<f64> = lines[1].split(',').map(|f| f.parse().unwrap()).collect();
        assert_eq!(fields, vec![0.0, 0.0, 0.0, 2.0, 1.0, 1.5, 2.0]);
    }
}
