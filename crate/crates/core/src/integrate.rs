//! Time advancement: classical RK4 for the nonstiff tendencies, exact
//! Fourier-space substeps for the stiff linear operators, Strang or Lie
//! splitting between the two, and a fixed CFL step.

use std::fmt;
use std::str::FromStr;

use log::{debug, warn};
use num_complex::Complex64;

use crate::diagnostics::{Failure, FailureKind, RunReport, Snapshot};
use crate::error::{Error, Result};
use crate::model::{eval_law, PressureLaw, State, Tendency, RHO_FLOOR};
use crate::schemes::{slightly_compressible_init, SchemeConfig, SchemeKind, StiffOperator};
use crate::spectral::{
    check_eps, gradient_part, leray_project, transform_forward, transform_inverse, ScalarField,
    Spectrum, VectorField, DIM,
};

/// Any nodal value beyond this magnitude is treated as a blow-up.
pub const BLOWUP_THRESHOLD: f64 = 1e8;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Splitting {
    #[default]
    Strang,
    Lie,
}

impl FromStr for Splitting {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "strang" => Ok(Splitting::Strang),
            "lie" => Ok(Splitting::Lie),
            other => Err(Error::param("splitting", format!("unknown splitting `{other}`"))),
        }
    }
}

impl fmt::Display for Splitting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Splitting::Strang => "strang",
            Splitting::Lie => "lie",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TimeControls {
    pub t_final: f64,
    pub cfl: f64,
    pub dt_override: Option<f64>,
    pub splitting: Splitting,
    /// Diagnostics are recorded every this many steps, and at the end.
    pub output_every: usize,
    /// Sobolev index of the monitored norm.
    pub sobolev_index: f64,
    /// Keep the state of every recorded snapshot in the report.
    pub keep_states: bool,
}

impl TimeControls {
    pub fn new(t_final: f64) -> Self {
        TimeControls {
            t_final,
            cfl: 0.4,
            dt_override: None,
            splitting: Splitting::Strang,
            output_every: 1,
            sobolev_index: 3.0,
            keep_states: false,
        }
    }

    pub fn with_dt(mut self, dt: f64) -> Self {
        self.dt_override = Some(dt);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_final >= 0.0 && self.t_final.is_finite()) {
            return Err(Error::param("t_final", format!("must be nonnegative, got {}", self.t_final)));
        }
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return Err(Error::param("cfl", format!("must lie in (0, 1], got {}", self.cfl)));
        }
        if let Some(dt) = self.dt_override {
            if !(dt > 0.0 && dt.is_finite()) {
                return Err(Error::param("dt_override", format!("must be positive, got {dt}")));
            }
        }
        if self.output_every == 0 {
            return Err(Error::param("output_every", "must be at least 1"));
        }
        if !(self.sobolev_index >= 0.0 && self.sobolev_index.is_finite()) {
            return Err(Error::param("sobolev_index", "must be nonnegative"));
        }
        Ok(())
    }
}

/// Largest characteristic speed `max(|v|_1 + sqrt(f rho))` over the nodes.
pub fn max_speed(state: &State, law: &PressureLaw) -> Result<f64> {
    state.check_positive()?;
    let f = eval_law(law, &state.rho_tilde, state.rho_bar, &state.v);
    let mut speed = 0.0_f64;
    for node in 0..f.values().len() {
        let rho = state.rho_tilde.values()[node] + state.rho_bar;
        let fr = f.values()[node] * rho;
        if !(fr > 0.0) {
            return Err(Error::HyperbolicityLoss { product: fr });
        }
        let v1: f64 = state.v.at(node).iter().map(|c| c.abs()).sum();
        speed = speed.max(v1 + fr.sqrt());
    }
    Ok(speed)
}

/// `cfl * dx / max_speed`, or the override when one is set.
pub fn cfl_dt(state: &State, law: &PressureLaw, controls: &TimeControls) -> Result<f64> {
    let dt = controls.cfl * state.grid().dx() / max_speed(state, law)?;
    match controls.dt_override {
        Some(o) => {
            if o > dt {
                warn!("dt override {o:.3e} exceeds the CFL step {dt:.3e}");
            }
            Ok(o)
        }
        None => Ok(dt),
    }
}

/// Additional `cfl * eps * dx` bound for the acoustic operator when it is
/// integrated explicitly instead of exactly.
pub fn acoustic_dt_cap(eps: f64, dx: f64, cfl: f64) -> f64 {
    cfl * eps * dx
}

/// Minimal vector-space interface needed by [`rk4_step`].
pub trait Rk4Vector: Clone {
    type Rate;

    fn add_scaled(&self, a: f64, rate: &Self::Rate) -> Self;
    fn rate_is_finite(rate: &Self::Rate) -> bool;
}

impl Rk4Vector for State {
    type Rate = Tendency;

    fn add_scaled(&self, a: f64, rate: &Tendency) -> Self {
        State::add_scaled(self, a, rate)
    }

    fn rate_is_finite(rate: &Tendency) -> bool {
        rate.is_finite()
    }
}

impl Rk4Vector for f64 {
    type Rate = f64;

    fn add_scaled(&self, a: f64, rate: &f64) -> Self {
        self + a * rate
    }

    fn rate_is_finite(rate: &f64) -> bool {
        rate.is_finite()
    }
}

impl Rk4Vector for Vec<f64> {
    type Rate = Vec<f64>;

    fn add_scaled(&self, a: f64, rate: &Vec<f64>) -> Self {
        self.iter().zip(rate).map(|(y, r)| y + a * r).collect()
    }

    fn rate_is_finite(rate: &Vec<f64>) -> bool {
        rate.iter().all(|r| r.is_finite())
    }
}

/// One classical fourth-order Runge–Kutta step of `y' = rhs(t, y)`.
pub fn rk4_step<Y, F>(t: f64, y: &Y, dt: f64, mut rhs: F) -> Result<Y>
where
    Y: Rk4Vector,
    F: FnMut(f64, &Y) -> Result<Y::Rate>,
{
    let mut eval = |t: f64, y: &Y| -> Result<Y::Rate> {
        let k = rhs(t, y)?;
        if Y::rate_is_finite(&k) {
            Ok(k)
        } else {
            Err(Error::NonFinite("right-hand side"))
        }
    };
    let half = 0.5 * dt;
    let k1 = eval(t, y)?;
    let k2 = eval(t + half, &y.add_scaled(half, &k1))?;
    let k3 = eval(t + half, &y.add_scaled(half, &k2))?;
    let k4 = eval(t + dt, &y.add_scaled(dt, &k3))?;
    Ok(y
        .add_scaled(dt / 6.0, &k1)
        .add_scaled(dt / 3.0, &k2)
        .add_scaled(dt / 3.0, &k3)
        .add_scaled(dt / 6.0, &k4))
}

/// Solves the stiff linear part exactly over `dt`.
pub fn stiff_exact_substep(state: &State, op: StiffOperator, dt: f64) -> Result<State> {
    match op {
        StiffOperator::None => Ok(state.clone()),
        StiffOperator::ProjectionPenalty { eps } => {
            check_eps(eps)?;
            let decay = (-dt / eps).exp();
            let grad = gradient_part(&state.v);
            let mut out = state.clone();
            out.v = leray_project(&state.v);
            out.v.axpy(decay, &grad);
            Ok(out)
        }
        StiffOperator::AcousticPair { eps } => {
            check_eps(eps)?;
            let p = state.p_tilde.as_ref().ok_or(Error::MissingPressure)?;
            let (p_new, v_new) = acoustic_rotation(p, &state.v, eps, dt);
            let mut out = state.clone();
            out.p_tilde = Some(p_new);
            out.v = v_new;
            Ok(out)
        }
    }
}

/// Exact flow of `P' = -div(v)/eps`, `v' = -grad(P)/eps`. In Fourier space
/// only the longitudinal velocity `n . v` couples to `P`; the pair rotates
/// with frequency `|k|/eps`.
fn acoustic_rotation(p: &ScalarField, v: &VectorField, eps: f64, dt: f64) -> (ScalarField, VectorField) {
    let grid = p.grid().clone();
    let mut ps = transform_forward(p);
    let mut vs: [Spectrum; DIM] = std::array::from_fn(|j| transform_forward(v.component(j)));
    let i = Complex64::i();
    for mode in 0..grid.len() {
        let k = grid.xi_derivative(mode);
        let kappa = k.iter().map(|c| c * c).sum::<f64>().sqrt();
        if kappa == 0.0 {
            continue;
        }
        let n: [f64; DIM] = std::array::from_fn(|j| k[j] / kappa);
        let (s, c) = (kappa * dt / eps).sin_cos();
        let p0 = ps.coeffs()[mode];
        let u0: Complex64 = (0..DIM).map(|j| n[j] * vs[j].coeffs()[mode]).sum();
        let p1 = c * p0 - i * s * u0;
        let u1 = -i * s * p0 + c * u0;
        ps.coeffs_mut()[mode] = p1;
        for j in 0..DIM {
            vs[j].coeffs_mut()[mode] += n[j] * (u1 - u0);
        }
    }
    let v_new = VectorField::from_parts(std::array::from_fn(|j| transform_inverse(&vs[j])));
    (transform_inverse(&ps), v_new)
}

/// One split step: stiff, nonstiff RK4, stiff (Strang) or stiff then
/// nonstiff (Lie). With no stiff operator this is a plain RK4 step.
pub fn split_step(
    t: f64,
    state: &State,
    dt: f64,
    scheme: &SchemeConfig,
    law: &PressureLaw,
    splitting: Splitting,
) -> Result<State> {
    let stiff = scheme.split_rhs(state, law)?.stiff;
    let nonstiff = |_t: f64, y: &State| Ok(scheme.split_rhs(y, law)?.nonstiff);
    match (stiff, splitting) {
        (StiffOperator::None, _) => rk4_step(t, state, dt, nonstiff),
        (op, Splitting::Strang) => {
            let y = stiff_exact_substep(state, op, 0.5 * dt)?;
            let y = rk4_step(t, &y, dt, nonstiff)?;
            stiff_exact_substep(&y, op, 0.5 * dt)
        }
        (op, Splitting::Lie) => {
            let y = stiff_exact_substep(state, op, dt)?;
            rk4_step(t, &y, dt, nonstiff)
        }
    }
}

/// Applies the scheme's initial-data conventions: the slightly compressible
/// velocity for B and C, and the artificial pressure block for C only.
pub fn prepare_initial(initial: &State, scheme: &SchemeConfig) -> Result<State> {
    let mut s = initial.clone();
    match scheme.kind {
        SchemeKind::ContinuousProjection | SchemeKind::ArtificialCompressibility => {
            if let Some(v1) = &scheme.v0_1 {
                s.v = slightly_compressible_init(&s.v, v1, scheme.eps)?;
            }
        }
        _ => {}
    }
    if scheme.kind == SchemeKind::ArtificialCompressibility {
        if s.p_tilde.is_none() {
            s.p_tilde = Some(match &scheme.p_tilde_0 {
                Some(p) => p.clone(),
                None => ScalarField::zeros(s.grid()),
            });
        }
    } else {
        s.p_tilde = None;
    }
    if let Some(p) = &s.p_tilde {
        if p.grid() != s.grid() {
            return Err(Error::DimensionMismatch("p_tilde_0 on a different grid".into()));
        }
    }
    Ok(s)
}

fn classify(err: &Error) -> Option<FailureKind> {
    match err {
        Error::NonPositiveDensity { .. } => Some(FailureKind::PositivityLoss),
        Error::NonFinite(_) | Error::HyperbolicityLoss { .. } => Some(FailureKind::NumericalBlowup),
        _ => None,
    }
}

fn check_step(state: &State) -> Option<FailureKind> {
    let t = Tendency {
        rho: state.rho_tilde.clone(),
        p: state.p_tilde.clone(),
        v: state.v.clone(),
    };
    if !state.is_finite() || t.max_abs() > BLOWUP_THRESHOLD {
        Some(FailureKind::NumericalBlowup)
    } else if state.min_density() <= RHO_FLOOR {
        Some(FailureKind::PositivityLoss)
    } else {
        None
    }
}

/// Integrates to `t_final` and records diagnostics.
pub fn run_simulation(
    initial: &State,
    scheme: &SchemeConfig,
    law: &PressureLaw,
    controls: &TimeControls,
) -> Result<RunReport> {
    run_simulation_with(initial, scheme, law, controls, |_, _, _| Ok(()))
}

/// Like [`run_simulation`], calling `observer(step, time, state)` at every
/// recorded snapshot.
pub fn run_simulation_with<O>(
    initial: &State,
    scheme: &SchemeConfig,
    law: &PressureLaw,
    controls: &TimeControls,
    mut observer: O,
) -> Result<RunReport>
where
    O: FnMut(usize, f64, &State) -> Result<()>,
{
    controls.validate()?;
    scheme.validate(law)?;
    let mut state = prepare_initial(initial, scheme)?;
    if !state.is_finite() {
        return Err(Error::NonFinite("initial state"));
    }
    let dt_nominal = cfl_dt(&state, law, controls)?;
    let steps = if controls.t_final == 0.0 {
        0
    } else {
        (controls.t_final / dt_nominal - 1e-9).ceil().max(1.0) as usize
    };
    let dt = if steps == 0 { dt_nominal } else { controls.t_final / steps as f64 };
    debug!("scheme {} dt = {dt:.6e}, {steps} steps", scheme.kind);

    let mut report = RunReport::new(scheme.kind, scheme.kind.uses_eps().then_some(scheme.eps), dt, state.clone());
    let record = |report: &mut RunReport, t: f64, s: &State| -> Result<()> {
        report.push(Snapshot::measure(t, s, controls.sobolev_index)?);
        if controls.keep_states {
            report.states.push(s.clone());
        }
        Ok(())
    };
    record(&mut report, 0.0, &state)?;
    observer(0, 0.0, &state)?;

    for step in 1..=steps {
        let t = (step - 1) as f64 * dt;
        let next = match split_step(t, &state, dt, scheme, law, controls.splitting) {
            Ok(next) => next,
            Err(e) => match classify(&e) {
                Some(kind) => {
                    warn!("run stopped at t = {t:.6}: {e}");
                    report.failure = Some(Failure { kind, time: t });
                    break;
                }
                None => return Err(e),
            },
        };
        if let Some(kind) = check_step(&next) {
            warn!("run stopped at t = {t:.6}: {kind}");
            report.failure = Some(Failure { kind, time: t });
            break;
        }
        state = next;
        let t_now = if step == steps { controls.t_final } else { step as f64 * dt };
        report.steps = step;
        report.final_time = t_now;
        if step % controls.output_every == 0 || step == steps {
            record(&mut report, t_now, &state)?;
            observer(step, t_now, &state)?;
        }
    }
    report.final_state = state;
    Ok(report)
}
