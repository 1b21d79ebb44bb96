//! Result files. Every file carries the resolved run description: JSON
//! summaries under `"config"`, CSV files in `#` comment lines.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::ResolvedRun;
use crate::error::{Error, Result};
use crate::protocols::{Record, SweepPoint};

pub const TRAJECTORY_COLUMNS: &str =
    "t_ns,t_kappa_c,phi_rad,n_c,n_h,n_r,theta_c_mk,theta_c_entropy_mk,J_c,J_h,J_r";
pub const TRAJECTORY_UNITS: &str =
    "# units: t_ns ns, t_kappa_c 1, phi_rad rad, n_* photons, theta_* mK, J_* aW (positive from bath into mode)";
pub const SWEEP_COLUMNS: &str = "param_value,theta_c_mk,ratio,J_c,J_h,J_r,cop_current,cop_freq,residual";

/// Output directory: explicit flag, then config, then `BOSONIC_FRIDGE_OUT`,
/// then `./out`.
pub fn resolve_dir(flag: Option<&Path>, run: &ResolvedRun) -> PathBuf {
    flag.map(Path::to_path_buf)
        .or_else(|| run.output.dir.clone())
        .or_else(|| std::env::var_os("BOSONIC_FRIDGE_OUT").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"))
}

fn config_comment(run: &ResolvedRun) -> Result<String> {
    let json = serde_json::to_string(run).map_err(|e| Error::Config(e.to_string()))?;
    Ok(format!("# config: {json}\n"))
}

fn num(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else {
        format!("{x:e}")
    }
}

fn opt(x: Option<f64>) -> String {
    x.map_or_else(|| "nan".into(), num)
}

pub fn trajectory_csv(run: &ResolvedRun, records: &[Record]) -> Result<String> {
    let mut s = config_comment(run)?;
    s.push_str(TRAJECTORY_UNITS);
    s.push('\n');
    s.push_str(TRAJECTORY_COLUMNS);
    s.push('\n');
    for r in records {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{},{}",
            num(r.t_ns),
            num(r.t_kappa_c),
            num(r.phi_rad),
            num(r.n[0]),
            num(r.n[1]),
            num(r.n[2]),
            num(r.theta_c_mk),
            opt(r.theta_c_entropy_mk),
            num(r.j_attowatt[0]),
            num(r.j_attowatt[1]),
            num(r.j_attowatt[2]),
        );
    }
    Ok(s)
}

pub fn sweep_csv(run: &ResolvedRun, points: &[SweepPoint]) -> Result<String> {
    let mut s = config_comment(run)?;
    s.push_str("# units: theta_c_mk mK, J_* aW, residual ‖L ρ‖₂; failed points carry nan and an error comment\n");
    s.push_str(SWEEP_COLUMNS);
    s.push('\n');
    for p in points {
        match &p.outcome {
            Ok(r) => {
                let _ = writeln!(
                    s,
                    "{},{},{},{},{},{},{},{},{}",
                    num(p.value),
                    num(r.theta_c_mk),
                    num(r.ratio),
                    num(r.j_attowatt[0]),
                    num(r.j_attowatt[1]),
                    num(r.j_attowatt[2]),
                    opt(r.cop_current),
                    num(r.cop_freq),
                    num(r.residual),
                );
            }
            Err(e) => {
                let _ = writeln!(s, "# error at {}: {}", num(p.value), e.replace('\n', " "));
                let _ = writeln!(s, "{},nan,nan,nan,nan,nan,nan,nan,nan", num(p.value));
            }
        }
    }
    Ok(s)
}

#[derive(Serialize)]
struct Summary<'a, T: Serialize> {
    command: &'a str,
    config: &'a ResolvedRun,
    #[serde(flatten)]
    result: &'a T,
}

pub fn summary_json<T: Serialize>(command: &str, run: &ResolvedRun, result: &T) -> Result<String> {
    let s = Summary {
        command,
        config: run,
        result,
    };
    let mut text = serde_json::to_string_pretty(&s).map_err(|e| Error::Config(e.to_string()))?;
    text.push('\n');
    Ok(text)
}

/// Writes `contents` to `dir/name`, creating the directory.
pub fn write(dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join(name);
    fs::write(&path, contents)?;
    Ok(path)
}
