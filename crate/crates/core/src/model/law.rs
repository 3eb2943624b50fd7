use std::fmt;

use crate::error::{Error, Result};

/// Scalar coefficient `f(rho, v)` of the compressible pressure term.
pub trait PressureFunction: Send + Sync {
    fn name(&self) -> String;

    fn eval(&self, rho: f64, v: &[f64]) -> f64;

    /// Velocity gradient of `f`.
    fn grad_v(&self, rho: f64, v: &[f64]) -> Vec<f64>;

    /// Partial derivative of `f` in `rho`.
    fn grad_rho(&self, rho: f64, v: &[f64]) -> f64;

    /// Antiderivative `phi(rho)` with `phi' = f`, when `f` ignores `v`.
    fn phi(&self, _rho: f64) -> Option<f64> {
        None
    }
}

/// The shipped pressure laws.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PressureLaw {
    /// `f = f_bar`
    Constant { f_bar: f64 },
    /// `f = gamma / rho`, the `gamma grad(log rho)` pressure of biofilm models.
    Biofilm { gamma: f64 },
    /// `f = f_bar + c |v|^2`
    Kinetic { f_bar: f64, c: f64 },
    /// `f = f_bar + a rho`
    AffineRho { f_bar: f64, a: f64 },
}

impl PressureLaw {
    /// Builds a law from its config id and parameter list; missing
    /// parameters take the documented defaults.
    pub fn from_id(id: &str, params: &[f64]) -> Result<Self> {
        let get = |i: usize, default: f64| params.get(i).copied().unwrap_or(default);
        let (law, arity) = match id {
            "constant" => (PressureLaw::Constant { f_bar: get(0, 1.0) }, 1),
            "biofilm" => (PressureLaw::Biofilm { gamma: get(0, 0.5) }, 1),
            "kinetic" => (
                PressureLaw::Kinetic {
                    f_bar: get(0, 1.0),
                    c: get(1, 1.0),
                },
                2,
            ),
            "affine_rho" => (
                PressureLaw::AffineRho {
                    f_bar: get(0, 1.0),
                    a: get(1, 1.0),
                },
                2,
            ),
            other => {
                return Err(Error::param("law.id", format!("unknown pressure law `{other}`")));
            }
        };
        if params.len() > arity {
            return Err(Error::param(
                "law.params",
                format!("`{id}` takes at most {arity} parameters, got {}", params.len()),
            ));
        }
        if params.iter().any(|p| !p.is_finite()) {
            return Err(Error::param("law.params", "parameters must be finite"));
        }
        Ok(law)
    }

    pub fn id(&self) -> &'static str {
        match self {
            PressureLaw::Constant { .. } => "constant",
            PressureLaw::Biofilm { .. } => "biofilm",
            PressureLaw::Kinetic { .. } => "kinetic",
            PressureLaw::AffineRho { .. } => "affine_rho",
        }
    }

    pub fn params(&self) -> Vec<f64> {
        match *self {
            PressureLaw::Constant { f_bar } => vec![f_bar],
            PressureLaw::Biofilm { gamma } => vec![gamma],
            PressureLaw::Kinetic { f_bar, c } => vec![f_bar, c],
            PressureLaw::AffineRho { f_bar, a } => vec![f_bar, a],
        }
    }

    /// True when `f` depends on the density alone.
    pub fn is_reducible(&self) -> bool {
        self.phi(1.0).is_some()
    }
}

impl fmt::Display for PressureLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{:?}", self.id(), self.params())
    }
}

fn speed_sq(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum()
}

impl PressureFunction for PressureLaw {
    fn name(&self) -> String {
        self.to_string()
    }

    fn eval(&self, rho: f64, v: &[f64]) -> f64 {
        match *self {
            PressureLaw::Constant { f_bar } => f_bar,
            PressureLaw::Biofilm { gamma } => gamma / rho,
            PressureLaw::Kinetic { f_bar, c } => f_bar + c * speed_sq(v),
            PressureLaw::AffineRho { f_bar, a } => f_bar + a * rho,
        }
    }

    fn grad_v(&self, _rho: f64, v: &[f64]) -> Vec<f64> {
        match *self {
            PressureLaw::Kinetic { c, .. } => v.iter().map(|x| 2.0 * c * x).collect(),
            _ => vec![0.0; v.len()],
        }
    }

    fn grad_rho(&self, rho: f64, _v: &[f64]) -> f64 {
        match *self {
            PressureLaw::Biofilm { gamma } => -gamma / (rho * rho),
            PressureLaw::AffineRho { a, .. } => a,
            _ => 0.0,
        }
    }

    fn phi(&self, rho: f64) -> Option<f64> {
        match *self {
            PressureLaw::Constant { f_bar } => Some(f_bar * rho),
            PressureLaw::Biofilm { gamma } => Some(gamma * rho.ln()),
            PressureLaw::Kinetic { f_bar, c: 0.0 } => Some(f_bar * rho),
            PressureLaw::Kinetic { .. } => None,
            PressureLaw::AffineRho { f_bar, a } => Some(f_bar * rho + 0.5 * a * rho * rho),
        }
    }
}

/// Verdicts of [`check_admissible`].
#[derive(Clone, Debug, PartialEq)]
pub struct AdmissibilityReport {
    /// `f > 0` on every sample.
    pub positive: bool,
    /// `grad_v f` parallel to `v` wherever `|v| > 0`.
    pub gradient_parallel: bool,
    /// Fitted `alpha = (grad_v f . v)/|v|^2 >= 0` wherever `|v| > 0`.
    pub alpha_nonnegative: bool,
    /// `alpha` vanishes on every sample: admissible, but degenerate.
    pub degenerate: bool,
    pub alpha_min: f64,
    pub alpha_max: f64,
    /// Analytic gradients agree with central differences.
    pub gradient_consistent: bool,
    pub max_gradient_error: f64,
}

impl AdmissibilityReport {
    pub fn admissible(&self) -> bool {
        self.positive && self.gradient_parallel && self.alpha_nonnegative
    }
}

const FD_STEP: f64 = 1e-6;
const FD_REL_TOL: f64 = 1e-5;
const PARALLEL_TOL: f64 = 1e-8;
const ALPHA_TOL: f64 = 1e-12;

/// Checks the admissibility conditions (positivity, velocity gradient
/// parallel to `v` with nonnegative factor) on a set of `(rho, v)` samples,
/// and cross-checks the law's analytic gradients by central differences.
pub fn check_admissible(
    law: &dyn PressureFunction,
    samples: &[(f64, Vec<f64>)],
) -> Result<AdmissibilityReport> {
    if let Some((rho, _)) = samples.iter().find(|(rho, _)| !(*rho > 0.0)) {
        return Err(Error::param("samples", format!("density must be positive, got {rho}")));
    }
    let mut report = AdmissibilityReport {
        positive: true,
        gradient_parallel: true,
        alpha_nonnegative: true,
        degenerate: true,
        alpha_min: f64::INFINITY,
        alpha_max: f64::NEG_INFINITY,
        gradient_consistent: true,
        max_gradient_error: 0.0,
    };
    for (rho, v) in samples {
        let rho = *rho;
        if !(law.eval(rho, v) > 0.0) {
            report.positive = false;
        }
        let g = law.grad_v(rho, v);
        let v2 = speed_sq(v);
        if v2 > 0.0 {
            let gv: f64 = g.iter().zip(v).map(|(a, b)| a * b).sum();
            let alpha = gv / v2;
            let g_norm = speed_sq(&g).sqrt();
            let orth = g
                .iter()
                .zip(v)
                .map(|(gj, vj)| (gj - alpha * vj).powi(2))
                .sum::<f64>()
                .sqrt();
            if orth > PARALLEL_TOL * g_norm {
                report.gradient_parallel = false;
            }
            if alpha < -ALPHA_TOL {
                report.alpha_nonnegative = false;
            }
            if alpha.abs() > ALPHA_TOL {
                report.degenerate = false;
            }
            report.alpha_min = report.alpha_min.min(alpha);
            report.alpha_max = report.alpha_max.max(alpha);
        }

        let mut err: f64 = 0.0;
        let mut vp = v.clone();
        for (j, gj) in g.iter().enumerate() {
            vp[j] = v[j] + FD_STEP;
            let fp = law.eval(rho, &vp);
            vp[j] = v[j] - FD_STEP;
            let fm = law.eval(rho, &vp);
            vp[j] = v[j];
            let fd = (fp - fm) / (2.0 * FD_STEP);
            err = err.max((fd - gj).abs() / gj.abs().max(1.0));
        }
        let h = FD_STEP * rho.max(1.0);
        let fd_rho = (law.eval(rho + h, v) - law.eval(rho - h, v)) / (2.0 * h);
        let gr = law.grad_rho(rho, v);
        err = err.max((fd_rho - gr).abs() / gr.abs().max(1.0));
        report.max_gradient_error = report.max_gradient_error.max(err);
    }
    report.gradient_consistent = report.max_gradient_error <= FD_REL_TOL;
    if report.alpha_min > report.alpha_max {
        report.alpha_min = 0.0;
        report.alpha_max = 0.0;
    }
    Ok(report)
}
