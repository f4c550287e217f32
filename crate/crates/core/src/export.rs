//! Text exports with fixed numeric formatting so reruns are byte-identical.
//!
//! Profile CSV columns: `stage,x_m,T_K,Q_W,kind`.
//! Sweep CSV columns: `length_m,stage,T_c_K,T_h_K,criterion_flags`.
//! Numbers are written in scientific notation with nine significant digits.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::feasibility::{CriteriaReport, LengthSweepResult};
use crate::geometry::Stage;
use crate::profile::StageProfile;

/// Version tag embedded in JSON exports.
pub const EXPORT_VERSION: u32 = 1;

pub const PROFILE_HEADER: [&str; 5] = ["stage", "x_m", "T_K", "Q_W", "kind"];
pub const SWEEP_HEADER: [&str; 5] = ["length_m", "stage", "T_c_K", "T_h_K", "criterion_flags"];

/// Formats a number with nine significant digits.
pub fn fmt_num(v: f64) -> String {
    format!("{v:.8e}")
}

fn csv_error(e: impl std::fmt::Display) -> Error {
    Error::Io(e.to_string())
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w.into_inner().map_err(csv_error)?;
    String::from_utf8(bytes).map_err(csv_error)
}

/// Writes one or more stage profiles as CSV.
pub fn profiles_csv<'a>(profiles: impl IntoIterator<Item = &'a StageProfile>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(PROFILE_HEADER).map_err(csv_error)?;
    for p in profiles {
        for pt in &p.points {
            w.write_record([
                p.stage.name().to_string(),
                fmt_num(pt.x),
                fmt_num(pt.t),
                fmt_num(pt.q),
                pt.kind.as_str().to_string(),
            ])
            .map_err(csv_error)?;
        }
    }
    finish(w)
}

#[derive(Serialize)]
struct ProfileDoc<'a> {
    export_version: u32,
    profiles: Vec<&'a StageProfile>,
}

/// Writes stage profiles as a versioned JSON document.
pub fn profiles_json<'a>(profiles: impl IntoIterator<Item = &'a StageProfile>) -> Result<String> {
    let doc = ProfileDoc {
        export_version: EXPORT_VERSION,
        profiles: profiles.into_iter().collect(),
    };
    serde_json::to_string_pretty(&doc).map_err(csv_error)
}

/// Criterion flags such as `i=pass;ii=pass;iii=fail`.
pub fn criterion_flags(report: &CriteriaReport) -> String {
    report
        .results
        .iter()
        .map(|r| {
            format!(
                "{}={}",
                r.criterion.label(),
                if r.pass { "pass" } else { "fail" }
            )
        })
        .collect::<Vec<_>>()
        .join(";")
}

/// Writes a length sweep as CSV. Failed solves get one row with empty
/// temperatures and an `error:` flag.
pub fn sweep_csv(sweep: &LengthSweepResult) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(SWEEP_HEADER).map_err(csv_error)?;
    for row in &sweep.rows {
        match &row.outcome {
            Ok(entry) => {
                let flags = criterion_flags(&entry.criteria);
                for e in &entry.extremes {
                    w.write_record([
                        fmt_num(row.length),
                        e.stage.name().to_string(),
                        fmt_num(e.t_c),
                        fmt_num(e.t_h),
                        flags.clone(),
                    ])
                    .map_err(csv_error)?;
                }
            }
            Err(msg) => {
                w.write_record([
                    fmt_num(row.length),
                    String::new(),
                    String::new(),
                    String::new(),
                    format!("error:{msg}"),
                ])
                .map_err(csv_error)?;
            }
        }
    }
    finish(w)
}

#[derive(Serialize)]
struct SweepDoc<'a> {
    export_version: u32,
    #[serde(flatten)]
    sweep: &'a LengthSweepResult,
}

pub fn sweep_json(sweep: &LengthSweepResult) -> Result<String> {
    serde_json::to_string_pretty(&SweepDoc {
        export_version: EXPORT_VERSION,
        sweep,
    })
    .map_err(csv_error)
}

/// One profile CSV row: stage, x, T, Q and point kind.
pub type ProfileRow = (Stage, f64, f64, f64, String);

/// Parses a profile CSV back into rows.
pub fn read_profile_csv(text: &str) -> Result<Vec<ProfileRow>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header: Vec<String> = r
        .headers()
        .map_err(csv_error)?
        .iter()
        .map(str::to_string)
        .collect();
    if header != PROFILE_HEADER {
        return Err(Error::Io(format!("unexpected profile header {header:?}")));
    }
    r.records()
        .map(|rec| {
            let rec = rec.map_err(csv_error)?;
            let num = |i: usize| -> Result<f64> {
                rec[i]
                    .parse()
                    .map_err(|_| Error::Io(format!("bad number `{}`", &rec[i])))
            };
            let stage = Stage::from_name(&rec[0])
                .ok_or_else(|| Error::Io(format!("bad stage `{}`", &rec[0])))?;
            Ok((stage, num(1)?, num(2)?, num(3)?, rec[4].to_string()))
        })
        .collect()
}
