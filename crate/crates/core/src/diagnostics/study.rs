use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::integrate::{run_simulation, TimeControls};
use crate::model::{PressureLaw, State};
use crate::schemes::{SchemeConfig, SchemeKind};

use super::checks::{divergence_constant, penalty_bound_check, scheme_distance};
use super::fit::convergence_rate;
use super::report::RunReport;

/// One epsilon of a sweep.
#[derive(Clone, Debug)]
pub struct StudyRow {
    pub eps: f64,
    pub run: RunReport,
    /// Distance to the reference at the common final time.
    pub distance: f64,
    /// `max_t ||(I - P)v|| / eps` (Scheme B only).
    pub penalty_constant: Option<f64>,
    /// `max_t ||div v|| / eps` (Scheme C only).
    pub divergence_constant: Option<f64>,
}

/// An epsilon sweep of one scheme measured against a reference run.
/// Fitted quantities are empirical.
#[derive(Clone, Debug)]
pub struct StudyReport {
    pub scheme: SchemeKind,
    pub rows: Vec<StudyRow>,
    pub reference: RunReport,
    pub common_time: f64,
    /// Observed order of `distance ~ eps^p`.
    pub rate: Option<f64>,
}

impl StudyReport {
    pub fn eps_values(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.eps).collect()
    }

    pub fn distances(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.distance).collect()
    }
}

/// Runs `template` at every `eps` in parallel, plus `reference`, from the
/// same initial data, and compares each run with the reference.
pub fn run_study(
    initial: &State,
    template: &SchemeConfig,
    reference: &SchemeConfig,
    law: &PressureLaw,
    controls: &TimeControls,
    eps_list: &[f64],
) -> Result<StudyReport> {
    if eps_list.is_empty() {
        return Err(Error::param("eps_list", "must not be empty"));
    }
    let mut controls = controls.clone();
    controls.keep_states = true;
    let configs: Vec<SchemeConfig> = eps_list
        .iter()
        .map(|&eps| SchemeConfig {
            eps,
            ..template.clone()
        })
        .collect();
    let (runs, reference) = rayon::join(
        || {
            configs
                .par_iter()
                .map(|c| run_simulation(initial, c, law, &controls))
                .collect::<Result<Vec<_>>>()
        },
        || run_simulation(initial, reference, law, &controls),
    );
    let (runs, reference) = (runs?, reference?);
    let (common_time, distances) = scheme_distance(&runs, &reference)?;
    let mut rows = Vec::with_capacity(runs.len());
    for ((run, eps), distance) in runs.into_iter().zip(eps_list).zip(&distances) {
        let penalty_constant = penalty_bound_check(&run, *eps).ok();
        let divergence_constant = divergence_constant(&run, *eps).ok();
        rows.push(StudyRow {
            eps: *eps,
            run,
            distance: *distance,
            penalty_constant,
            divergence_constant,
        });
    }
    Ok(StudyReport {
        scheme: template.kind,
        rate: convergence_rate(eps_list, &distances),
        rows,
        reference,
        common_time,
    })
}
