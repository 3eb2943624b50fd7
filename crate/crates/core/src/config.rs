//! Line-oriented `key = value` run configuration.
//!
//! Blank lines and lines starting with `#` are ignored. Keys are dotted
//! (`grid.n`, `scheme.eps`, ...); every key is validated and unknown keys
//! are rejected. Overrides (`key=value`) are applied after the file and
//! are reported as line 0 in errors.

use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::integrate::{Splitting, TimeControls};
use crate::io::read_field_dump_with_length;
use crate::model::{PressureLaw, State};
use crate::schemes::{SandwichMode, SchemeConfig, SchemeKind};
use crate::spectral::{Grid, MollifierKind, ScalarField, VectorField};

/// Scheme A mollification scale used when `scheme.eps` is absent.
pub const DEFAULT_EPS_A: f64 = 1e-3;
/// Scheme A mollification scale of the `oracle` subcommand when `scheme.eps` is absent.
pub const DEFAULT_ORACLE_EPS: f64 = 1e-6;
pub const DEFAULT_EPS_LIST: [f64; 4] = [0.2, 0.1, 0.05, 0.025];

const KEYS: &[&str] = &[
    "grid.n",
    "grid.length",
    "scheme.kind",
    "scheme.eps",
    "scheme.mollifier",
    "scheme.cutoff_ratio",
    "scheme.splitting",
    "scheme.sandwich",
    "law.id",
    "law.params",
    "law.rho_bar",
    "init.preset",
    "init.amplitude",
    "init.velocity",
    "init.file",
    "init.v0_1",
    "init.v0_1_amplitude",
    "time.t_final",
    "time.cfl",
    "time.dt_override",
    "output.dir",
    "output.every_steps",
    "output.fields",
    "study.eps_list",
    "study.reference_eps",
    "diagnostics.sobolev_index",
    "diagnostics.seed",
    "diagnostics.scan_samples",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Preset {
    TaylorGreen,
    Shear,
    QuiescentDensityBump,
    CustomFile,
}

impl FromStr for Preset {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "taylor_green" => Ok(Preset::TaylorGreen),
            "shear" => Ok(Preset::Shear),
            "quiescent_density_bump" => Ok(Preset::QuiescentDensityBump),
            "custom_file" => Ok(Preset::CustomFile),
            other => Err(format!(
                "unknown preset `{other}` (taylor_green, shear, quiescent_density_bump, custom_file)"
            )),
        }
    }
}

/// Compressible velocity perturbation added for Schemes B and C.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum V01Preset {
    None,
    /// `grad(cos x cos y)`
    Gradient,
}

#[derive(Clone, Debug, PartialEq)]
pub struct InitConfig {
    pub preset: Preset,
    /// Density perturbation amplitude.
    pub amplitude: f64,
    /// Velocity amplitude.
    pub velocity: f64,
    pub file: Option<PathBuf>,
    pub v0_1: V01Preset,
    pub v0_1_amplitude: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Config {
    pub n: usize,
    pub length: f64,
    pub scheme: SchemeKind,
    /// As given; see [`Config::eps`] for the resolved value.
    pub eps: Option<f64>,
    pub mollifier: MollifierKind,
    pub splitting: Splitting,
    pub sandwich: SandwichMode,
    pub law: PressureLaw,
    pub rho_bar: Option<f64>,
    pub init: InitConfig,
    pub t_final: f64,
    pub cfl: f64,
    pub dt_override: Option<f64>,
    pub output_dir: PathBuf,
    pub output_every: usize,
    pub output_fields: bool,
    pub eps_list: Vec<f64>,
    pub reference_eps: f64,
    pub sobolev_index: f64,
    pub seed: u64,
    pub scan_samples: usize,
}

struct Entry {
    value: String,
    line: usize,
}

struct Raw(BTreeMap<String, Entry>);

fn err(line: usize, key: &str, message: impl Into<String>) -> Error {
    Error::Config {
        line,
        key: key.to_string(),
        message: message.into(),
    }
}

impl Raw {
    fn insert(&mut self, key: &str, value: &str, line: usize, allow_replace: bool) -> Result<()> {
        if !KEYS.contains(&key) {
            return Err(err(line, key, "unknown key"));
        }
        if !allow_replace {
            if let Some(prev) = self.0.get(key) {
                return Err(err(line, key, format!("duplicate key (first set on line {})", prev.line)));
            }
        }
        self.0.insert(
            key.to_string(),
            Entry {
                value: value.to_string(),
                line,
            },
        );
        Ok(())
    }

    fn get<T: FromStr>(&self, key: &str) -> Result<Option<(T, usize)>> {
        match self.0.get(key) {
            None => Ok(None),
            Some(e) => e
                .value
                .parse::<T>()
                .map(|v| Some((v, e.line)))
                .map_err(|_| err(e.line, key, format!("cannot parse `{}`", e.value))),
        }
    }

    fn required<T: FromStr>(&self, key: &str) -> Result<(T, usize)> {
        self.get(key)?.ok_or_else(|| err(0, key, "missing required key"))
    }

    fn real(&self, key: &str, default: f64, ok: impl Fn(f64) -> bool, range: &str) -> Result<f64> {
        match self.get::<f64>(key)? {
            None => Ok(default),
            Some((v, _)) if v.is_finite() && ok(v) => Ok(v),
            Some((v, line)) => Err(err(line, key, format!("{v} out of range: {range}"))),
        }
    }

    fn opt_real(&self, key: &str, ok: impl Fn(f64) -> bool, range: &str) -> Result<Option<f64>> {
        match self.get::<f64>(key)? {
            None => Ok(None),
            Some((v, _)) if v.is_finite() && ok(v) => Ok(Some(v)),
            Some((v, line)) => Err(err(line, key, format!("{v} out of range: {range}"))),
        }
    }

    fn list(&self, key: &str) -> Result<Option<(Vec<f64>, usize)>> {
        match self.0.get(key) {
            None => Ok(None),
            Some(e) => parse_list(&e.value)
                .map(|v| Some((v, e.line)))
                .map_err(|m| err(e.line, key, m)),
        }
    }

    fn line(&self, key: &str) -> usize {
        self.0.get(key).map_or(0, |e| e.line)
    }
}

/// Parses a comma-separated list of reals.
pub fn parse_list(s: &str) -> Result<Vec<f64>, String> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| format!("cannot parse `{}` as a number", t.trim()))
        })
        .collect()
}

fn split_pair(text: &str) -> Option<(&str, &str)> {
    let (k, v) = text.split_once('=')?;
    Some((k.trim(), v.trim()))
}

/// Parses configuration text, then applies `key=value` overrides.
pub fn parse_config(text: &str, overrides: &[String]) -> Result<Config> {
    let mut raw = Raw(BTreeMap::new());
    for (idx, line) in text.lines().enumerate() {
        let lineno = idx + 1;
        let body = line.trim();
        if body.is_empty() || body.starts_with('#') {
            continue;
        }
        let (key, value) =
            split_pair(body).ok_or_else(|| err(lineno, body, "expected `key = value`"))?;
        raw.insert(key, value, lineno, false)?;
    }
    for o in overrides {
        let (key, value) =
            split_pair(o).ok_or_else(|| err(0, o, "override must look like `key=value`"))?;
        raw.insert(key, value, 0, true)?;
    }
    build(&raw)
}

pub fn load_config(path: &Path, overrides: &[String]) -> Result<Config> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config(&text, overrides)
}

fn build(raw: &Raw) -> Result<Config> {
    let (n, n_line) = raw.required::<usize>("grid.n")?;
    if n < 8 || n % 2 != 0 {
        return Err(err(n_line, "grid.n", "n must be even >= 8"));
    }
    if n > 4096 {
        return Err(err(n_line, "grid.n", "n must not exceed 4096"));
    }
    let length = raw.real("grid.length", TAU, |v| v > 0.0, "> 0")?;

    let (kind_text, kind_line) = raw.required::<String>("scheme.kind")?;
    let scheme = SchemeKind::from_str(&kind_text)
        .map_err(|_| err(kind_line, "scheme.kind", format!("unknown scheme `{kind_text}` (a, b, c, oracle)")))?;
    let eps = raw.opt_real("scheme.eps", |v| v > 0.0, "> 0")?;
    if eps.is_none()
        && matches!(scheme, SchemeKind::ContinuousProjection | SchemeKind::ArtificialCompressibility)
    {
        return Err(err(0, "scheme.eps", format!("required for scheme {scheme}")));
    }
    let ratio = raw.real("scheme.cutoff_ratio", 1.0, |v| v > 0.0, "> 0")?;
    let mollifier = match raw.get::<String>("scheme.mollifier")? {
        None => MollifierKind::GaussianMultiplier,
        Some((m, line)) => match m.as_str() {
            "gaussian" => MollifierKind::GaussianMultiplier,
            "sharp_cutoff" => MollifierKind::SharpCutoff { ratio },
            other => {
                return Err(err(line, "scheme.mollifier", format!("unknown mollifier `{other}` (gaussian, sharp_cutoff)")))
            }
        },
    };
    let splitting = match raw.get::<String>("scheme.splitting")? {
        None => Splitting::Strang,
        Some((s, line)) => Splitting::from_str(&s)
            .map_err(|_| err(line, "scheme.splitting", format!("unknown splitting `{s}` (strang, lie)")))?,
    };
    let sandwich = match raw.get::<String>("scheme.sandwich")? {
        None => SandwichMode::Cancelled,
        Some((s, line)) => match s.as_str() {
            "cancelled" => SandwichMode::Cancelled,
            "literal" => SandwichMode::Literal,
            other => {
                return Err(err(line, "scheme.sandwich", format!("unknown mode `{other}` (cancelled, literal)")))
            }
        },
    };

    let (law_id, law_line) = raw.required::<String>("law.id")?;
    let params = raw.list("law.params")?.map(|(v, _)| v).unwrap_or_default();
    let law = PressureLaw::from_id(&law_id, &params).map_err(|e| match e {
        Error::InvalidParameter { name, reason } => {
            let line = if name == "law.id" { law_line } else { raw.line(name) };
            err(line, name, reason)
        }
        other => other,
    })?;
    if scheme == SchemeKind::ReductionOracle && !law.is_reducible() {
        return Err(err(law_line, "law.id", format!("scheme oracle needs a density-only law, got `{law_id}`")));
    }
    let rho_bar = raw.opt_real("law.rho_bar", |v| v > 0.0, "> 0")?;

    let preset = match raw.get::<String>("init.preset")? {
        None => Preset::TaylorGreen,
        Some((p, line)) => Preset::from_str(&p).map_err(|m| err(line, "init.preset", m))?,
    };
    let file = raw.get::<PathBuf>("init.file")?.map(|(p, _)| p);
    if preset == Preset::CustomFile && file.is_none() {
        return Err(err(0, "init.file", "required for preset custom_file"));
    }
    let v0_1 = match raw.get::<String>("init.v0_1")? {
        None => V01Preset::None,
        Some((p, line)) => match p.as_str() {
            "none" => V01Preset::None,
            "gradient" => V01Preset::Gradient,
            other => return Err(err(line, "init.v0_1", format!("unknown preset `{other}` (none, gradient)"))),
        },
    };
    let init = InitConfig {
        preset,
        amplitude: raw.real("init.amplitude", 0.1, |v| v.abs() < 1.0, "|amplitude| < 1")?,
        velocity: raw.real("init.velocity", 1.0, |_| true, "finite")?,
        file,
        v0_1,
        v0_1_amplitude: raw.real("init.v0_1_amplitude", 1.0, |_| true, "finite")?,
    };

    let (t_final, t_line) = raw.required::<f64>("time.t_final")?;
    if !(t_final >= 0.0 && t_final.is_finite()) {
        return Err(err(t_line, "time.t_final", format!("{t_final} out of range: >= 0")));
    }
    let cfl = raw.real("time.cfl", 0.4, |v| v > 0.0 && v <= 1.0, "(0, 1]")?;
    let dt_override = raw.opt_real("time.dt_override", |v| v > 0.0, "> 0")?;

    let output_dir = raw
        .get::<PathBuf>("output.dir")?
        .map_or_else(|| PathBuf::from("output"), |(p, _)| p);
    let output_every = match raw.get::<usize>("output.every_steps")? {
        None => 1,
        Some((0, line)) => return Err(err(line, "output.every_steps", "must be >= 1")),
        Some((k, _)) => k,
    };
    let output_fields = raw.get::<bool>("output.fields")?.is_some_and(|(b, _)| b);

    let eps_list = match raw.list("study.eps_list")? {
        None => DEFAULT_EPS_LIST.to_vec(),
        Some((v, line)) => {
            if v.is_empty() || v.iter().any(|e| *e <= 0.0) {
                return Err(err(line, "study.eps_list", "needs one or more positive values"));
            }
            v
        }
    };
    let reference_eps = raw.real("study.reference_eps", DEFAULT_EPS_A, |v| v > 0.0, "> 0")?;
    let sobolev_index = raw.real("diagnostics.sobolev_index", 3.0, |v| v >= 0.0, ">= 0")?;
    let seed = raw.get::<u64>("diagnostics.seed")?.map_or(0, |(s, _)| s);
    let scan_samples = raw.get::<usize>("diagnostics.scan_samples")?.map_or(256, |(s, _)| s);

    Ok(Config {
        n,
        length,
        scheme,
        eps,
        mollifier,
        splitting,
        sandwich,
        law,
        rho_bar,
        init,
        t_final,
        cfl,
        dt_override,
        output_dir,
        output_every,
        output_fields,
        eps_list,
        reference_eps,
        sobolev_index,
        seed,
        scan_samples,
    })
}

fn wrapped(d: f64) -> f64 {
    let d = d.rem_euclid(TAU);
    if d > PI {
        d - TAU
    } else {
        d
    }
}

impl Config {
    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.n, self.length)
    }

    /// Resolved `eps`: the configured value, or the Scheme A default.
    pub fn eps(&self) -> f64 {
        self.eps.unwrap_or(DEFAULT_EPS_A)
    }

    pub fn scheme_config(&self, grid: &Grid) -> SchemeConfig {
        let mut s = SchemeConfig::new(self.scheme, self.eps());
        s.mollifier = self.mollifier;
        s.sandwich = self.sandwich;
        if self.init.v0_1 == V01Preset::Gradient {
            s.v0_1 = Some(self.v0_1_field(grid));
        }
        s
    }

    pub fn time_controls(&self) -> TimeControls {
        TimeControls {
            t_final: self.t_final,
            cfl: self.cfl,
            dt_override: self.dt_override,
            splitting: self.splitting,
            output_every: self.output_every,
            sobolev_index: self.sobolev_index,
            keep_states: false,
        }
    }

    fn v0_1_field(&self, grid: &Grid) -> VectorField {
        let k = TAU / self.length;
        let a = self.init.v0_1_amplitude;
        VectorField::from_fn(grid, |x, y| {
            let (x, y) = (k * x, k * y);
            [-a * x.sin() * y.cos(), -a * x.cos() * y.sin()]
        })
    }

    /// Initial state of the configured preset. Presets are written for the
    /// `2 pi` torus and rescaled to `grid.length`.
    pub fn initial_state(&self) -> Result<State> {
        let grid = self.grid()?;
        let k = TAU / self.length;
        let (a, u) = (self.init.amplitude, self.init.velocity);
        let (rho, v) = match self.init.preset {
            Preset::TaylorGreen => (
                ScalarField::from_fn(&grid, |x, y| 1.0 + a * (k * x).sin() * (k * y).sin()),
                VectorField::from_fn(&grid, |x, y| {
                    let (x, y) = (k * x, k * y);
                    [u * x.sin() * y.cos(), -u * x.cos() * y.sin()]
                }),
            ),
            Preset::Shear => (
                ScalarField::from_fn(&grid, |x, _| 1.0 + a * (k * x).sin()),
                VectorField::from_fn(&grid, |_, y| [u * (k * y).sin(), 0.0]),
            ),
            Preset::QuiescentDensityBump => (
                ScalarField::from_fn(&grid, |x, y| {
                    let (dx, dy) = (wrapped(k * x - PI), wrapped(k * y - PI));
                    1.0 + a * (-(dx * dx + dy * dy) / 0.5).exp()
                }),
                VectorField::zeros(&grid),
            ),
            Preset::CustomFile => {
                let path = self.init.file.as_ref().expect("validated");
                let dump = read_field_dump_with_length(path, self.length)?;
                if dump.state.grid() != &grid {
                    return Err(Error::Incompatible(format!(
                        "{} holds n = {}, config has grid.n = {}",
                        path.display(),
                        dump.state.grid().n(),
                        self.n
                    )));
                }
                let mut s = dump.state;
                if let Some(rb) = self.rho_bar {
                    let rho = s.density();
                    s = State::new(rho.map(|r| r - rb), s.v, rb, s.p_tilde)?;
                }
                return Ok(s);
            }
        };
        State::from_physical(&rho, v, self.rho_bar)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "grid.n = 64\nscheme.kind = a\nlaw.id = constant\ntime.t_final = 0.5\n";

    fn config_err(r: Result<Config>) -> (usize, String, String) {
        match r {
            Err(Error::Config { line, key, message }) => (line, key, message),
            other => panic!("expected config error, got {other:?}"),
        }
    }

    #[test]
    fn minimal_config_has_defaults() {
        let c = parse_config(MINIMAL, &[]).unwrap();
        assert_eq!(c.n, 64);
        assert_eq!(c.length, TAU);
        assert_eq!(c.scheme, SchemeKind::MollifiedProjected);
        assert_eq!(c.eps(), DEFAULT_EPS_A);
        assert_eq!(c.law, PressureLaw::Constant { f_bar: 1.0 });
        assert_eq!(c.cfl, 0.4);
        assert_eq!(c.splitting, Splitting::Strang);
        assert_eq!(c.eps_list, DEFAULT_EPS_LIST.to_vec());
        assert_eq!(c.sobolev_index, 3.0);
        assert_eq!(c.init.preset, Preset::TaylorGreen);
        let s = c.initial_state().unwrap();
        assert!((s.rho_bar - 1.0).abs() < 1e-14);
    }

    #[test]
    fn odd_grid_rejected() {
        let (line, key, msg) = config_err(parse_config(&MINIMAL.replace("64", "63"), &[]));
        assert_eq!((line, key.as_str()), (1, "grid.n"));
        assert!(msg.contains("n must be even >= 8"));
    }

    #[test]
    fn scheme_b_needs_eps() {
        let (_, key, _) = config_err(parse_config(&MINIMAL.replace("kind = a", "kind = b"), &[]));
        assert_eq!(key, "scheme.eps");
        let ok = parse_config(&MINIMAL.replace("kind = a", "kind = b"), &["scheme.eps=0.1".into()]).unwrap();
        assert_eq!(ok.eps(), 0.1);
    }

    #[test]
    fn unknown_and_duplicate_keys() {
        let (line, key, _) = config_err(parse_config(&format!("{MINIMAL}grid.m = 3\n"), &[]));
        assert_eq!((line, key.as_str()), (5, "grid.m"));
        let (line, key, msg) = config_err(parse_config(&format!("{MINIMAL}grid.n = 32\n"), &[]));
        assert_eq!((line, key.as_str()), (5, "grid.n"));
        assert!(msg.contains("line 1"));
        let (line, _, _) = config_err(parse_config(MINIMAL, &["nope=1".into()]));
        assert_eq!(line, 0);
    }

    #[test]
    fn ranges_checked() {
        let (line, key, _) = config_err(parse_config(&format!("{MINIMAL}time.cfl = 1.5\n"), &[]));
        assert_eq!((line, key.as_str()), (5, "time.cfl"));
        let (_, key, _) = config_err(parse_config(MINIMAL, &["time.t_final=-1".into()]));
        assert_eq!(key, "time.t_final");
        let (_, key, _) = config_err(parse_config(MINIMAL, &["study.eps_list=0.1,-0.2".into()]));
        assert_eq!(key, "study.eps_list");
        let (_, key, _) = config_err(parse_config(&MINIMAL.replace("t_final", "t_finl"), &[]));
        assert_eq!(key, "time.t_finl");
    }

    #[test]
    fn overrides_replace_values() {
        let c = parse_config(
            &format!("# comment\n\n{MINIMAL}"),
            &["grid.n=32".into(), "law.id=kinetic".into(), "law.params=2, 0.5".into()],
        )
        .unwrap();
        assert_eq!(c.n, 32);
        assert_eq!(c.law, PressureLaw::Kinetic { f_bar: 2.0, c: 0.5 });
    }

    #[test]
    fn oracle_needs_reducible_law() {
        let text = MINIMAL.replace("kind = a", "kind = oracle").replace("constant", "kinetic");
        let (_, key, _) = config_err(parse_config(&text, &[]));
        assert_eq!(key, "law.id");
    }

    #[test]
    fn presets_build_valid_states() {
        for p in ["taylor_green", "shear", "quiescent_density_bump"] {
            let c = parse_config(MINIMAL, &[format!("init.preset={p}"), "grid.n=16".into()]).unwrap();
            let s = c.initial_state().unwrap();
            assert!(crate::spectral::divergence(&s.v).norm() < 1e-12, "{p}");
            assert!(s.min_density() > 0.0);
        }
        let c = parse_config(MINIMAL, &["grid.length=1.0".into(), "grid.n=16".into()]).unwrap();
        let s = c.initial_state().unwrap();
        assert!(crate::spectral::divergence(&s.v).norm() < 1e-12);
    }

    #[test]
    fn gradient_v0_1_is_a_gradient() {
        let c = parse_config(
            &MINIMAL.replace("kind = a", "kind = b"),
            &["scheme.eps=0.1".into(), "init.v0_1=gradient".into(), "grid.n=16".into()],
        )
        .unwrap();
        let g = c.grid().unwrap();
        let v1 = c.scheme_config(&g).v0_1.unwrap();
        assert!(crate::spectral::leray_project(&v1).norm() < 1e-13);
        assert!(v1.norm() > 0.1);
    }
}
