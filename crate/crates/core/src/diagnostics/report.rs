use std::fmt;

use crate::error::Result;
use crate::model::State;
use crate::schemes::SchemeKind;
use crate::spectral::{divergence, gradient_part};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FailureKind {
    PositivityLoss,
    NumericalBlowup,
}

impl fmt::Display for FailureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FailureKind::PositivityLoss => "positivity loss",
            FailureKind::NumericalBlowup => "numerical blow-up",
        })
    }
}

/// Why and when a run stopped early. `time` is the last valid time.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Failure {
    pub kind: FailureKind,
    pub time: f64,
}

/// One row of diagnostics.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Snapshot {
    pub time: f64,
    pub hs_norm: f64,
    pub kinetic: f64,
    pub div_norm: f64,
    pub penalty_norm: f64,
    pub min_rho: f64,
}

impl Snapshot {
    pub fn measure(time: f64, state: &State, sobolev_index: f64) -> Result<Self> {
        Ok(Snapshot {
            time,
            hs_norm: state.sobolev_norm(sobolev_index)?,
            kinetic: 0.5 * state.v.dot(&state.v),
            div_norm: divergence(&state.v).norm(),
            penalty_norm: gradient_part(&state.v).norm(),
            min_rho: state.min_density(),
        })
    }
}

/// Diagnostic time series of a single run.
#[derive(Clone, Debug, PartialEq)]
pub struct RunReport {
    pub scheme: SchemeKind,
    pub eps: Option<f64>,
    pub dt: f64,
    pub steps: usize,
    pub final_time: f64,
    pub times: Vec<f64>,
    pub hs_norm: Vec<f64>,
    pub kinetic: Vec<f64>,
    pub div_norm: Vec<f64>,
    pub penalty_norm: Vec<f64>,
    pub min_rho: Vec<f64>,
    pub failure: Option<Failure>,
    pub final_state: State,
    /// States at the recorded times, when requested.
    pub states: Vec<State>,
}

impl RunReport {
    pub fn new(scheme: SchemeKind, eps: Option<f64>, dt: f64, state: State) -> Self {
        RunReport {
            scheme,
            eps,
            dt,
            steps: 0,
            final_time: 0.0,
            times: Vec::new(),
            hs_norm: Vec::new(),
            kinetic: Vec::new(),
            div_norm: Vec::new(),
            penalty_norm: Vec::new(),
            min_rho: Vec::new(),
            failure: None,
            final_state: state,
            states: Vec::new(),
        }
    }

    pub fn push(&mut self, s: Snapshot) {
        self.times.push(s.time);
        self.hs_norm.push(s.hs_norm);
        self.kinetic.push(s.kinetic);
        self.div_norm.push(s.div_norm);
        self.penalty_norm.push(s.penalty_norm);
        self.min_rho.push(s.min_rho);
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn snapshot(&self, i: usize) -> Snapshot {
        Snapshot {
            time: self.times[i],
            hs_norm: self.hs_norm[i],
            kinetic: self.kinetic[i],
            div_norm: self.div_norm[i],
            penalty_norm: self.penalty_norm[i],
            min_rho: self.min_rho[i],
        }
    }

    pub fn snapshots(&self) -> impl Iterator<Item = Snapshot> + '_ {
        (0..self.len()).map(|i| self.snapshot(i))
    }

    pub fn succeeded(&self) -> bool {
        self.failure.is_none()
    }

    pub fn max_div_norm(&self) -> f64 {
        self.div_norm.iter().copied().fold(0.0, f64::max)
    }

    pub fn max_penalty_norm(&self) -> f64 {
        self.penalty_norm.iter().copied().fold(0.0, f64::max)
    }

    pub fn max_hs_norm(&self) -> f64 {
        self.hs_norm.iter().copied().fold(0.0, f64::max)
    }

    pub fn min_density(&self) -> f64 {
        self.min_rho.iter().copied().fold(f64::INFINITY, f64::min)
    }
}
