use log::warn;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::integrate::{cfl_dt, prepare_initial, run_simulation_with, TimeControls};
use crate::model::symbol::analyze_symbol;
use crate::model::{eval_law, recover_pressure, PressureFunction, PressureLaw, State};
use crate::schemes::{oracle_pressure, SchemeConfig, SchemeKind};
use crate::spectral::{ScalarField, DIM};

use super::fit::{growth_fit, linear_fit, slope_through_origin, GrowthFit, LineFit};
use super::report::RunReport;

/// Empirical penalty constant `max_t ||(I - P)v|| / eps` of a Scheme B run.
pub fn penalty_bound_check(report: &RunReport, eps: f64) -> Result<f64> {
    if report.scheme != SchemeKind::ContinuousProjection {
        return Err(Error::WrongScheme {
            expected: "b",
            found: report.scheme.to_string(),
        });
    }
    if report.penalty_norm.is_empty() {
        return Err(Error::MissingData("penalty norm"));
    }
    if !(eps > 0.0) {
        return Err(Error::param("eps", "must be positive"));
    }
    Ok(report.max_penalty_norm() / eps)
}

/// Empirical divergence constant `max_t ||div v|| / eps` of a Scheme C run.
pub fn divergence_constant(report: &RunReport, eps: f64) -> Result<f64> {
    if report.scheme != SchemeKind::ArtificialCompressibility {
        return Err(Error::WrongScheme {
            expected: "c",
            found: report.scheme.to_string(),
        });
    }
    if report.div_norm.is_empty() {
        return Err(Error::MissingData("divergence norm"));
    }
    Ok(report.max_div_norm() / eps)
}

/// `||a - b|| / ||b||`, falling back to the absolute difference when the
/// reference vanishes.
pub fn relative_distance(diff: f64, reference: f64) -> f64 {
    if reference > 1e-14 {
        diff / reference
    } else {
        diff
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OracleDistances {
    pub v_distance: f64,
    pub rho_distance: f64,
    pub pressure_distance: f64,
}

impl OracleDistances {
    pub fn max(&self) -> f64 {
        self.v_distance.max(self.rho_distance).max(self.pressure_distance)
    }
}

fn centered(p: &ScalarField) -> ScalarField {
    let m = p.mean();
    p.map(|x| x - m)
}

/// Relative distances between a Scheme A run and the reduction oracle at
/// their final time, including the recovered pressure against `Q - phi(rho)`.
pub fn oracle_compare(
    general: &RunReport,
    oracle: &RunReport,
    law: &PressureLaw,
) -> Result<OracleDistances> {
    if !law.is_reducible() {
        return Err(Error::NotReducible(law.to_string()));
    }
    if general.scheme != SchemeKind::MollifiedProjected {
        return Err(Error::WrongScheme {
            expected: "a",
            found: general.scheme.to_string(),
        });
    }
    if oracle.scheme != SchemeKind::ReductionOracle {
        return Err(Error::WrongScheme {
            expected: "oracle",
            found: oracle.scheme.to_string(),
        });
    }
    let (a, o) = (&general.final_state, &oracle.final_state);
    if a.grid() != o.grid() {
        return Err(Error::Incompatible("different grids".into()));
    }
    if general.dt != oracle.dt || general.final_time != oracle.final_time {
        return Err(Error::Incompatible(format!(
            "dt {} vs {}, final time {} vs {}",
            general.dt, oracle.dt, general.final_time, oracle.final_time
        )));
    }
    let v_distance = relative_distance((&a.v - &o.v).norm(), o.v.norm());
    let rho_distance = relative_distance((&a.rho_tilde - &o.rho_tilde).norm(), o.rho_tilde.norm());
    let p_general = centered(&recover_pressure(a, law)?);
    let p_oracle = oracle_pressure(o, law)?;
    let pressure_distance =
        relative_distance((&p_general - &p_oracle).norm(), p_oracle.norm());
    Ok(OracleDistances {
        v_distance,
        rho_distance,
        pressure_distance,
    })
}

/// State of `report` at the largest recorded time not exceeding `t`.
fn state_at(report: &RunReport, t: f64) -> Result<(&State, f64)> {
    if (report.final_time - t).abs() <= 1e-12 * t.max(1.0) {
        return Ok((&report.final_state, report.final_time));
    }
    if report.states.len() != report.times.len() {
        return Err(Error::Incompatible(format!(
            "run ends at {} and stores no intermediate states to compare at {t}",
            report.final_time
        )));
    }
    let idx = report
        .times
        .iter()
        .rposition(|&s| s <= t * (1.0 + 1e-12))
        .ok_or_else(|| Error::Incompatible(format!("no snapshot before {t}")))?;
    Ok((&report.states[idx], report.times[idx]))
}

/// `L^2` distances of `(rho_tilde, v)` between each run and the reference,
/// at the latest time common to all of them.
pub fn scheme_distance(runs: &[RunReport], reference: &RunReport) -> Result<(f64, Vec<f64>)> {
    let common = runs
        .iter()
        .map(|r| r.final_time)
        .fold(reference.final_time, f64::min);
    if runs.iter().chain(std::iter::once(reference)).any(|r| r.final_time != common) {
        warn!("runs end at different times; comparing at t = {common}");
    }
    let (ref_state, t_ref) = state_at(reference, common)?;
    let mut out = Vec::with_capacity(runs.len());
    for r in runs {
        if r.final_state.grid() != ref_state.grid() {
            return Err(Error::Incompatible("different grids".into()));
        }
        let (s, t) = state_at(r, common)?;
        if (t - t_ref).abs() > 1e-9 * common.max(1.0) {
            warn!("comparing snapshots at t = {t} and t = {t_ref}");
        }
        out.push(s.l2_distance(ref_state));
    }
    Ok((common, out))
}

/// Whether `values` never increases by more than a relative `tol`.
pub fn is_nonincreasing(values: &[f64], tol: f64) -> bool {
    values.windows(2).all(|w| w[1] <= w[0] * (1.0 + tol))
}

/// Symmetrizer-weighted distance `sqrt(mean(A0(u_ref) w . w))`, `w = a - b`,
/// with `A0 = diag(f/rho, 1, .., 1)` frozen at `reference`.
pub fn weighted_separation(a: &State, b: &State, reference: &State, law: &dyn PressureFunction) -> f64 {
    let f = eval_law(law, &reference.rho_tilde, reference.rho_bar, &reference.v);
    let mut sum = 0.0;
    for node in 0..f.values().len() {
        let rho = reference.rho_tilde.values()[node] + reference.rho_bar;
        let w0 = a.rho_tilde.values()[node] - b.rho_tilde.values()[node];
        sum += f.values()[node] / rho * w0 * w0;
        for j in 0..DIM {
            let wj = a.v.component(j).values()[node] - b.v.component(j).values()[node];
            sum += wj * wj;
        }
        if let (Some(pa), Some(pb)) = (&a.p_tilde, &b.p_tilde) {
            let wp = pa.values()[node] - pb.values()[node];
            sum += wp * wp;
        }
    }
    (sum / f.values().len() as f64).sqrt()
}

/// Twin-run separation history and its Gronwall check.
#[derive(Clone, Debug, PartialEq)]
pub struct Separation {
    pub times: Vec<f64>,
    pub w: Vec<f64>,
    /// `ln W(t) - ln W(0)`; empty when `W(0) = 0`.
    pub log_growth: Vec<f64>,
    /// Exponent fitted on the first tenth of the run (empirical).
    pub early_rate: f64,
    /// Least-squares line through the whole log-growth history.
    pub line: Option<LineFit>,
    /// `ln W(t) - ln W(0) <= early_rate t + ln 2` at every snapshot.
    pub bounded: bool,
}

impl Separation {
    /// RMS deviation of the log-growth from a straight line, relative to the
    /// total growth `|slope| T` the line predicts over the run.
    pub fn linearity_defect(&self) -> f64 {
        match (&self.line, self.times.last()) {
            (Some(l), Some(&t)) if l.slope != 0.0 && t > 0.0 => l.rms_residual / (l.slope.abs() * t),
            (Some(l), _) if l.rms_residual == 0.0 => 0.0,
            _ => f64::INFINITY,
        }
    }
}

/// Runs twin simulations from `base` and `base + delta cos(x)` (one Fourier
/// mode of the density) with a shared step, and measures the weighted
/// separation at every recorded time.
pub fn uniqueness_separation(
    base: &State,
    scheme: &SchemeConfig,
    law: &PressureLaw,
    controls: &TimeControls,
    delta: f64,
) -> Result<Separation> {
    if !(delta >= 0.0 && delta.is_finite()) {
        return Err(Error::param("delta", "must be nonnegative"));
    }
    let mut perturbed = base.clone();
    let bump = ScalarField::from_fn(base.grid(), |x, _| {
        delta * (2.0 * std::f64::consts::PI * x / base.grid().length()).cos()
    });
    perturbed.rho_tilde.axpy(1.0, &bump);
    perturbed.check_positive()?;

    let mut controls = controls.clone();
    if controls.dt_override.is_none() {
        controls.dt_override = Some(cfl_dt(&prepare_initial(base, scheme)?, law, &controls)?);
    }
    let run = |init: &State| -> Result<(RunReport, Vec<State>)> {
        let mut states = Vec::new();
        let report = run_simulation_with(init, scheme, law, &controls, |_, _, s| {
            states.push(s.clone());
            Ok(())
        })?;
        if let Some(f) = report.failure {
            return Err(Error::TwinFailure {
                kind: f.kind.to_string(),
                time: f.time,
            });
        }
        Ok((report, states))
    };
    let (one, two) = rayon::join(|| run(&perturbed), || run(base));
    let (report, s1) = one?;
    let (_, s2) = two?;

    let w: Vec<f64> = s1
        .iter()
        .zip(&s2)
        .map(|(a, b)| weighted_separation(a, b, b, law))
        .collect();
    let times = report.times.clone();
    if w[0] == 0.0 {
        return Ok(Separation {
            times,
            w,
            log_growth: Vec::new(),
            early_rate: 0.0,
            line: None,
            bounded: true,
        });
    }
    let log_growth: Vec<f64> = w.iter().map(|x| (x / w[0]).ln()).collect();
    let horizon = *times.last().unwrap();
    let mut early = times.iter().take_while(|&&t| t <= 0.1 * horizon).count();
    early = early.max(2).min(times.len());
    let early_rate = slope_through_origin(&times[..early], &log_growth[..early]).unwrap_or(0.0);
    let bounded = times
        .iter()
        .zip(&log_growth)
        .all(|(t, g)| *g <= early_rate.max(0.0) * t + std::f64::consts::LN_2);
    let line = linear_fit(&times, &log_growth);
    Ok(Separation {
        times,
        w,
        log_growth,
        early_rate,
        line,
        bounded,
    })
}

/// Exponential fit of `hs_norm(t) / hs_norm(0)` of a successful run.
pub fn energy_shape(report: &RunReport) -> Option<GrowthFit> {
    growth_fit(&report.times, &report.hs_norm)
}

/// Worst case found by [`hyperbolicity_scan`].
#[derive(Clone, Debug, PartialEq)]
pub struct HyperbolicityReport {
    pub samples: usize,
    pub min_f: f64,
    pub min_f_over_rho: f64,
    pub max_imag: f64,
    pub min_middle_multiplicity: usize,
    pub max_middle_multiplicity: usize,
    /// `(state index, node, f rho)` of the first node with `f rho <= 0`.
    pub loss: Option<(usize, usize, f64)>,
}

impl HyperbolicityReport {
    pub fn hyperbolic(&self) -> bool {
        self.loss.is_none()
            && self.max_imag <= crate::model::symbol::IMAG_TOL
            && self.min_middle_multiplicity == DIM - 1
            && self.max_middle_multiplicity == DIM - 1
    }
}

/// Checks `f` and `f/rho` at every node of every state, and the symbol
/// spectrum at `n_samples` random (state, node, direction) triples.
pub fn hyperbolicity_scan(
    trajectory: &[State],
    law: &dyn PressureFunction,
    n_samples: usize,
    seed: u64,
) -> Result<HyperbolicityReport> {
    let mut report = HyperbolicityReport {
        samples: 0,
        min_f: f64::INFINITY,
        min_f_over_rho: f64::INFINITY,
        max_imag: 0.0,
        min_middle_multiplicity: usize::MAX,
        max_middle_multiplicity: 0,
        loss: None,
    };
    if trajectory.is_empty() {
        return Err(Error::MissingData("trajectory"));
    }
    let fields: Vec<ScalarField> = trajectory
        .iter()
        .map(|s| eval_law(law, &s.rho_tilde, s.rho_bar, &s.v))
        .collect();
    for (k, (s, f)) in trajectory.iter().zip(&fields).enumerate() {
        for (node, &fv) in f.values().iter().enumerate() {
            let rho = s.rho_tilde.values()[node] + s.rho_bar;
            report.min_f = report.min_f.min(fv);
            report.min_f_over_rho = report.min_f_over_rho.min(fv / rho);
            if fv * rho <= 0.0 && report.loss.is_none() {
                report.loss = Some((k, node, fv * rho));
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..n_samples {
        let k = rng.gen_range(0..trajectory.len());
        let s = &trajectory[k];
        let node = rng.gen_range(0..s.grid().len());
        let theta: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
        let mag: f64 = rng.gen_range(0.5..4.0);
        let xi = [mag * theta.cos(), mag * theta.sin()];
        let rho = s.rho_tilde.values()[node] + s.rho_bar;
        let a = analyze_symbol(rho, &s.v.at(node), fields[k].values()[node], &xi)?;
        report.samples += 1;
        report.max_imag = report.max_imag.max(a.max_imag);
        report.min_middle_multiplicity = report.min_middle_multiplicity.min(a.middle_multiplicity);
        report.max_middle_multiplicity = report.max_middle_multiplicity.max(a.middle_multiplicity);
    }
    if report.samples == 0 {
        report.min_middle_multiplicity = 0;
    }
    Ok(report)
}
