//! CSV and JSON file formats.
//!
//! - profiles: header `r,u` (physical) or `t,w` (Emden-Fowler);
//! - trajectories: header `t,w,w1,w2,w3`, JSON sidecar
//!   `{termination, steps, rejected_steps}`;
//! - energy audits: header `t,E,dE_formula,dE_numeric`, JSON sidecar
//!   `{monotone, max_violation, median_identity_gap}`.
//!
//! Floats are written with Rust's shortest round-trip formatting, so output
//! is byte-stable for fixed inputs.

use std::io::{Read, Write};

use serde::Serialize;

use crate::coeffs::{CoefficientSet, Params};
use crate::dopri::{State, Termination};
use crate::energy::MonotonicityAudit;
use crate::error::{Error, Result};
use crate::ode::Trajectory;
use crate::transform::{EFProfile, RadialProfile};

fn csv_err(e: csv::Error) -> Error {
    let line = e.position().map(|p| p.line()).unwrap_or(0);
    match e.kind() {
        csv::ErrorKind::Io(_) => Error::Io(e.to_string()),
        _ => Error::Csv { line, message: e.to_string() },
    }
}

fn fmt(x: f64) -> String {
    format!("{x:?}")
}

fn write_rows<W: Write>(out: W, header: &[&str], rows: impl Iterator<Item = Vec<f64>>) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header).map_err(csv_err)?;
    for row in rows {
        w.write_record(row.into_iter().map(fmt)).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a numeric CSV with exactly the given header; every value must be a
/// finite decimal float.
pub fn read_rows<R: Read>(input: R, header: &[&str]) -> Result<Vec<Vec<f64>>> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(input);
    let found = reader.headers().map_err(csv_err)?.clone();
    if found.iter().collect::<Vec<_>>() != header {
        return Err(Error::Csv {
            line: 1,
            message: format!("expected header `{}`, found `{}`", header.join(","), found.iter().collect::<Vec<_>>().join(",")),
        });
    }
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(csv_err)?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        if record.len() != header.len() {
            return Err(Error::Csv { line, message: format!("expected {} fields, found {}", header.len(), record.len()) });
        }
        let row = record
            .iter()
            .map(|field| match field.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                _ => Err(Error::Csv { line, message: format!("`{field}` is not a finite decimal number") }),
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    Ok(rows)
}

pub fn write_radial_profile<W: Write>(out: W, profile: &RadialProfile) -> Result<()> {
    write_rows(out, &["r", "u"], profile.samples().iter().map(|&(r, u)| vec![r, u]))
}

pub fn write_ef_profile<W: Write>(out: W, profile: &EFProfile) -> Result<()> {
    write_rows(out, &["t", "w"], profile.samples().iter().map(|&(t, w)| vec![t, w]))
}

pub fn read_radial_profile<R: Read>(input: R, params: &Params) -> Result<RadialProfile> {
    let rows = read_rows(input, &["r", "u"])?;
    RadialProfile::new(params.clone(), rows.into_iter().map(|r| (r[0], r[1])).collect())
}

pub fn read_ef_profile<R: Read>(input: R, params: &Params) -> Result<EFProfile> {
    let rows = read_rows(input, &["t", "w"])?;
    EFProfile::new(params.clone(), rows.into_iter().map(|r| (r[0], r[1])).collect())
}

pub const TRAJECTORY_HEADER: [&str; 5] = ["t", "w", "w1", "w2", "w3"];

pub fn write_trajectory<W: Write>(out: W, traj: &Trajectory) -> Result<()> {
    write_rows(
        out,
        &TRAJECTORY_HEADER,
        traj.states.iter().map(|s| vec![s.t, s.y[0], s.y[1], s.y[2], s.y[3]]),
    )
}

/// Reads states back; the termination reason lives in the sidecar and is
/// recorded here as [`Termination::ReachedEnd`].
pub fn read_trajectory<R: Read>(input: R, params: &Params) -> Result<Trajectory> {
    let rows = read_rows(input, &TRAJECTORY_HEADER)?;
    let states = rows.into_iter().map(|r| State::new(r[0], [r[1], r[2], r[3], r[4]])).collect();
    Trajectory::from_states(params.clone(), states, Termination::ReachedEnd)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrajectorySidecar {
    pub termination: Termination,
    pub steps: usize,
    pub rejected_steps: usize,
    /// Fitted slope of `ln w` over the first five units of t (shooting only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub initial_rate: Option<f64>,
}

impl TrajectorySidecar {
    pub fn new(traj: &Trajectory) -> Self {
        TrajectorySidecar {
            termination: traj.termination,
            steps: traj.accepted_steps,
            rejected_steps: traj.rejected_steps,
            initial_rate: None,
        }
    }
}

pub const ENERGY_HEADER: [&str; 4] = ["t", "E", "dE_formula", "dE_numeric"];

pub fn write_energy<W: Write>(out: W, audit: &MonotonicityAudit) -> Result<()> {
    write_rows(
        out,
        &ENERGY_HEADER,
        audit.records.iter().map(|r| vec![r.t, r.energy, r.de_formula, r.de_numeric]),
    )
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnergySidecar {
    pub monotone: bool,
    pub max_violation: f64,
    pub median_identity_gap: f64,
}

impl From<&MonotonicityAudit> for EnergySidecar {
    fn from(a: &MonotonicityAudit) -> Self {
        EnergySidecar { monotone: a.monotone, max_violation: a.max_violation, median_identity_gap: a.median_identity_gap }
    }
}

/// Coefficients with exact values as `num/den` strings and float views.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoefficientsJson {
    pub n: u32,
    pub p: String,
    pub exact: ExactJson,
    pub float: FloatJson,
    #[serde(rename = "C_pn")]
    pub c_pn: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[allow(non_snake_case)]
pub struct ExactJson {
    pub K0: String,
    pub K1: String,
    pub K2: String,
    pub K3: String,
    pub J1: String,
    pub gamma0: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[allow(non_snake_case)]
pub struct FloatJson {
    pub K0: f64,
    pub K1: f64,
    pub K2: f64,
    pub K3: f64,
    pub J1: f64,
    pub gamma0: f64,
}

impl From<&CoefficientSet> for CoefficientsJson {
    fn from(c: &CoefficientSet) -> Self {
        let f = c.floats();
        CoefficientsJson {
            n: c.n,
            p: c.p.to_string(),
            exact: ExactJson {
                K0: c.k0.to_string(),
                K1: c.k1.to_string(),
                K2: c.k2.to_string(),
                K3: c.k3.to_string(),
                J1: c.j1.to_string(),
                gamma0: c.gamma0.to_string(),
            },
            float: FloatJson { K0: f.k0, K1: f.k1, K2: f.k2, K3: f.k3, J1: f.j1, gamma0: f.gamma0 },
            c_pn: f.c_pn,
        }
    }
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("report types serialize") + "\n"
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeffs::compute_coefficients;
    use crate::rational::int;

    fn five_seven() -> Params {
        Params::strict(5, int(7)).unwrap()
    }

    #[test]
    fn trajectory_csv_round_trip() {
        let params = five_seven();
        let states = vec![State::new(0.0, [1.0, 0.5, -0.25, 1e-9]), State::new(-0.1, [1.1, 0.3, 2e22, 0.0])];
        let traj = Trajectory::from_states(params.clone(), states, Termination::ReachedEnd).unwrap();
        let mut buf = Vec::new();
        write_trajectory(&mut buf, &traj).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("t,w,w1,w2,w3\n"));
        let back = read_trajectory(buf.as_slice(), &params).unwrap();
        assert_eq!(back.states, traj.states);
    }

    #[test]
    fn malformed_csv_reports_line() {
        let params = five_seven();
        let input = "r,u\n0.1,1\n0.2,oops\n";
        match read_radial_profile(input.as_bytes(), &params) {
            Err(Error::Csv { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        let input = "r,v\n0.1,1\n";
        assert!(matches!(read_radial_profile(input.as_bytes(), &params), Err(Error::Csv { line: 1, .. })));
        let input = "r,u\n0.1,1\n0.2\n";
        assert!(matches!(read_radial_profile(input.as_bytes(), &params), Err(Error::Csv { line: 3, .. })));
        let input = "r,u\n0.1,inf\n";
        assert!(matches!(read_radial_profile(input.as_bytes(), &params), Err(Error::Csv { line: 2, .. })));
    }

    #[test]
    fn coefficient_json_uses_fractions() {
        let json = to_json(&CoefficientsJson::from(&compute_coefficients(&five_seven())));
        assert!(json.contains("\"K0\": \"112/81\""));
        assert!(json.contains("\"J1\": \"-22/9\""));
    }
}
