//! CSV emission with a commented provenance header.

use std::io::Write;

use crate::config::SweepConfig;
use crate::error::CliError;

pub const ARTIFACT_VERSION: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"));

/// 17 significant digits, enough to round-trip any `f64`.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{x:.16e}")
    }
}

/// Missing values become empty fields.
pub fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

pub fn write_header(out: &mut dyn Write, command: &str, cfg: &SweepConfig) -> Result<(), CliError> {
    writeln!(out, "# {ARTIFACT_VERSION}")?;
    writeln!(out, "# schema_version: {}", cfg.schema_version)?;
    writeln!(out, "# command: {command}")?;
    writeln!(out, "# config:")?;
    for line in cfg.to_toml().lines() {
        if line.is_empty() {
            writeln!(out, "#")?;
        } else {
            writeln!(out, "#   {line}")?;
        }
    }
    Ok(())
}

pub fn write_row<S: AsRef<str>>(out: &mut dyn Write, fields: &[S]) -> Result<(), CliError> {
    let mut first = true;
    for f in fields {
        if !first {
            out.write_all(b",")?;
        }
        out.write_all(f.as_ref().as_bytes())?;
        first = false;
    }
    out.write_all(b"\n")?;
    Ok(())
}
