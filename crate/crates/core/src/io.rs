//! Binary field dumps and diagnostic CSV files.
//!
//! Field dump layout (all little-endian):
//!
//! | bytes | content |
//! |-------|---------|
//! | 4     | magic `CIFD` |
//! | 4     | `u32` version, currently 1 |
//! | 4     | `u32` n |
//! | 4     | `u32` ncomp, 3 or 4 |
//! | 8     | `f64` time |
//! | 8     | `f64` rho_bar |
//! | 8 ncomp n^2 | `f64` blocks `rho_tilde, [P~,] v1, v2`, node `(i, j)` at `i n + j` |

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::diagnostics::{RunReport, Snapshot, StudyReport};
use crate::error::{Error, Result};
use crate::model::State;
use crate::spectral::{Grid, ScalarField, VectorField};

pub const MAGIC: &[u8; 4] = b"CIFD";
pub const VERSION: u32 = 1;
const HEADER_LEN: usize = 4 + 4 + 4 + 4 + 8 + 8;

pub const DIAGNOSTICS_HEADER: &str = "time,hs_norm,kinetic,div_norm,penalty_norm,min_rho";
pub const STUDY_HEADER: &str =
    "eps,final_time,distance,penalty_constant,div_constant,max_hs_norm,min_rho,failure,failure_time";

#[derive(Clone, Debug, PartialEq)]
pub struct FieldDump {
    pub time: f64,
    pub state: State,
}

pub fn encode_field_dump(state: &State, time: f64) -> Vec<u8> {
    let n = state.grid().n();
    let ncomp = state.ncomp();
    let mut out = Vec::with_capacity(HEADER_LEN + 8 * ncomp * n * n);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(n as u32).to_le_bytes());
    out.extend_from_slice(&(ncomp as u32).to_le_bytes());
    out.extend_from_slice(&time.to_le_bytes());
    out.extend_from_slice(&state.rho_bar.to_le_bytes());
    let mut blocks = vec![&state.rho_tilde];
    blocks.extend(state.p_tilde.as_ref());
    blocks.extend(state.v.components());
    for b in blocks {
        for x in b.values() {
            out.extend_from_slice(&x.to_le_bytes());
        }
    }
    out
}

fn u32_at(bytes: &[u8], at: usize) -> u32 {
    u32::from_le_bytes(bytes[at..at + 4].try_into().unwrap())
}

fn f64_at(bytes: &[u8], at: usize) -> f64 {
    f64::from_le_bytes(bytes[at..at + 8].try_into().unwrap())
}

/// Decodes a dump onto a grid of side `length`.
pub fn decode_field_dump(bytes: &[u8], length: f64) -> Result<FieldDump> {
    if bytes.len() < 8 {
        return Err(Error::Format(format!("file too short ({} bytes)", bytes.len())));
    }
    if &bytes[..4] != MAGIC {
        return Err(Error::Format("bad magic".into()));
    }
    let version = u32_at(bytes, 4);
    if version != VERSION {
        return Err(Error::UnsupportedVersion(version));
    }
    if bytes.len() < HEADER_LEN {
        return Err(Error::Format("truncated header".into()));
    }
    let n = u32_at(bytes, 8) as usize;
    let ncomp = u32_at(bytes, 12) as usize;
    if ncomp != 3 && ncomp != 4 {
        return Err(Error::Format(format!("ncomp must be 3 or 4, got {ncomp}")));
    }
    let time = f64_at(bytes, 16);
    let rho_bar = f64_at(bytes, 24);
    let grid = Grid::new(n, length).map_err(|e| Error::Format(e.to_string()))?;
    let expected = HEADER_LEN + 8 * ncomp * n * n;
    if bytes.len() != expected {
        return Err(Error::Format(format!(
            "expected {expected} bytes for n = {n}, ncomp = {ncomp}, found {}",
            bytes.len()
        )));
    }
    let block = |k: usize| -> Result<ScalarField> {
        let start = HEADER_LEN + 8 * k * n * n;
        let values = (0..n * n).map(|i| f64_at(bytes, start + 8 * i)).collect();
        ScalarField::new(&grid, values)
    };
    let rho_tilde = block(0)?;
    let (p_tilde, off) = if ncomp == 4 { (Some(block(1)?), 2) } else { (None, 1) };
    let v = VectorField::new([block(off)?, block(off + 1)?])?;
    Ok(FieldDump {
        time,
        state: State::new(rho_tilde, v, rho_bar, p_tilde)?,
    })
}

pub fn write_field_dump(state: &State, time: f64, path: &Path) -> Result<()> {
    fs::write(path, encode_field_dump(state, time)).map_err(|e| Error::io(path, e))
}

/// Reads a dump onto the `2 pi` torus.
pub fn read_field_dump(path: &Path) -> Result<FieldDump> {
    read_field_dump_with_length(path, std::f64::consts::TAU)
}

pub fn read_field_dump_with_length(path: &Path, length: f64) -> Result<FieldDump> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_field_dump(&bytes, length)
}

/// Shortest representation that round-trips (17 significant digits).
fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn diagnostics_csv(report: &RunReport) -> String {
    let mut out = String::from(DIAGNOSTICS_HEADER);
    out.push('\n');
    for s in report.snapshots() {
        let row = [s.time, s.hs_norm, s.kinetic, s.div_norm, s.penalty_norm, s.min_rho];
        out.push_str(&row.map(num).join(","));
        out.push('\n');
    }
    out
}

pub fn write_diagnostics_csv(report: &RunReport, path: &Path) -> Result<()> {
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(diagnostics_csv(report).as_bytes())
        .map_err(|e| Error::io(path, e))
}

pub fn parse_diagnostics_csv(text: &str) -> Result<Vec<Snapshot>> {
    let mut lines = text.lines();
    if lines.next() != Some(DIAGNOSTICS_HEADER) {
        return Err(Error::Format("missing diagnostics header".into()));
    }
    lines
        .enumerate()
        .map(|(i, line)| {
            let v: Vec<f64> = line
                .split(',')
                .map(|c| c.parse::<f64>())
                .collect::<Result<_, _>>()
                .map_err(|_| Error::Format(format!("bad number on row {}", i + 1)))?;
            if v.len() != 6 {
                return Err(Error::Format(format!("row {} has {} columns", i + 1, v.len())));
            }
            Ok(Snapshot {
                time: v[0],
                hs_norm: v[1],
                kinetic: v[2],
                div_norm: v[3],
                penalty_norm: v[4],
                min_rho: v[5],
            })
        })
        .collect()
}

pub fn read_diagnostics_csv(path: &Path) -> Result<Vec<Snapshot>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_diagnostics_csv(&text)
}

pub fn study_csv(study: &StudyReport) -> String {
    let opt = |x: Option<f64>| x.map(num).unwrap_or_default();
    let mut out = String::from(STUDY_HEADER);
    out.push('\n');
    for r in &study.rows {
        let (kind, time) = match r.run.failure {
            Some(f) => (
                match f.kind {
                    crate::diagnostics::FailureKind::PositivityLoss => "positivity_loss",
                    crate::diagnostics::FailureKind::NumericalBlowup => "numerical_blowup",
                },
                num(f.time),
            ),
            None => ("none", String::new()),
        };
        let cells = [
            num(r.eps),
            num(r.run.final_time),
            num(r.distance),
            opt(r.penalty_constant),
            opt(r.divergence_constant),
            num(r.run.max_hs_norm()),
            num(r.run.min_density()),
            kind.to_string(),
            time,
        ];
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

pub fn write_study_csv(study: &StudyReport, path: &Path) -> Result<()> {
    fs::write(path, study_csv(study)).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrate::{run_simulation, TimeControls};
    use crate::model::PressureLaw;
    use crate::schemes::{SchemeConfig, SchemeKind};

    fn state(with_p: bool) -> State {
        let g = Grid::periodic(8).unwrap();
        let p = with_p.then(|| ScalarField::from_fn(&g, |x, y| (x * y).sin() / 3.0));
        State::new(
            ScalarField::from_fn(&g, |x, y| 0.1 * (x - 2.0 * y).cos() + 1e-17 * x),
            VectorField::from_fn(&g, |x, y| [x.sin() / 7.0, std::f64::consts::PI * y.cos()]),
            1.3,
            p,
        )
        .unwrap()
    }

    #[test]
    fn dump_round_trip_is_bit_exact() {
        for with_p in [false, true] {
            let s = state(with_p);
            let bytes = encode_field_dump(&s, 0.1 + 0.2);
            assert_eq!(bytes.len(), HEADER_LEN + 8 * s.ncomp() * 64);
            let back = decode_field_dump(&bytes, std::f64::consts::TAU).unwrap();
            assert_eq!(back.time.to_bits(), (0.1f64 + 0.2).to_bits());
            assert_eq!(back.state, s);
            assert_eq!(encode_field_dump(&back.state, back.time), bytes);
        }
    }

    #[test]
    fn dump_errors() {
        let mut bytes = encode_field_dump(&state(false), 0.0);
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(matches!(decode_field_dump(&bad, 1.0), Err(Error::Format(_))));
        let mut v2 = bytes.clone();
        v2[4..8].copy_from_slice(&2u32.to_le_bytes());
        assert!(matches!(decode_field_dump(&v2, 1.0), Err(Error::UnsupportedVersion(2))));
        bytes.truncate(bytes.len() - 1);
        assert!(matches!(decode_field_dump(&bytes, 1.0), Err(Error::Format(_))));
        assert!(matches!(decode_field_dump(b"CI", 1.0), Err(Error::Format(_))));
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let g = Grid::periodic(16).unwrap();
        let s = State::new(
            ScalarField::from_fn(&g, |x, y| 0.1 * x.sin() * y.sin()),
            VectorField::from_fn(&g, |x, y| [x.sin() * y.cos(), -x.cos() * y.sin()]),
            1.0,
            None,
        )
        .unwrap();
        let r = run_simulation(
            &s,
            &SchemeConfig::new(SchemeKind::MollifiedProjected, 0.1),
            &PressureLaw::Constant { f_bar: 1.0 },
            &TimeControls::new(0.1),
        )
        .unwrap();
        let text = diagnostics_csv(&r);
        let back = parse_diagnostics_csv(&text).unwrap();
        assert_eq!(back, r.snapshots().collect::<Vec<_>>());
        assert_eq!(text.lines().count(), r.len() + 1);

        let r0 = run_simulation(
            &s,
            &SchemeConfig::new(SchemeKind::MollifiedProjected, 0.1),
            &PressureLaw::Constant { f_bar: 1.0 },
            &TimeControls::new(0.0),
        )
        .unwrap();
        let text = diagnostics_csv(&r0);
        assert_eq!(text.lines().count(), 2);
        assert_eq!(parse_diagnostics_csv(&text).unwrap()[0].time, 0.0);
    }
}
