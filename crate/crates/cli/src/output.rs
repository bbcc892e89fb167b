//! Report encoders.
//!
//! CSV: header row, comma separator, LF line endings, shortest round-trip
//! floats; the run configuration is echoed as leading `#` comment lines.
//! JSON: one object with `config` and `result` and/or `rows`.

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::args::RunConfig;
use crate::CliError;

/// `x` with 15 significant digits.
pub fn sig(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        return "0".into();
    }
    let magnitude = x.abs().log10().floor() as i32;
    if (-5..15).contains(&magnitude) {
        let decimals = (14 - magnitude).max(0) as usize;
        format!("{x:.decimals$}")
    } else {
        format!("{x:.14e}")
    }
}

pub fn opt_sig(x: Option<f64>) -> String {
    x.map(sig).unwrap_or_else(|| "-".into())
}

pub fn to_json<R: Serialize, W: Serialize>(
    config: &RunConfig,
    result: Option<&R>,
    rows: Option<&[W]>,
) -> Result<String, CliError> {
    let mut obj = serde_json::Map::new();
    obj.insert("config".into(), serde_json::to_value(config).map_err(CliError::encode)?);
    if let Some(result) = result {
        obj.insert("result".into(), serde_json::to_value(result).map_err(CliError::encode)?);
    }
    if let Some(rows) = rows {
        obj.insert("rows".into(), serde_json::to_value(rows).map_err(CliError::encode)?);
    }
    let mut text = serde_json::to_string_pretty(&serde_json::Value::Object(obj)).map_err(CliError::encode)?;
    text.push('\n');
    Ok(text)
}

fn config_comment(config: &RunConfig) -> Result<String, CliError> {
    let json = serde_json::to_string(config).map_err(CliError::encode)?;
    Ok(format!("# config {json}\n"))
}

/// Rows only, no comment lines.
pub fn csv_table<W: Serialize>(rows: &[W]) -> Result<String, CliError> {
    let mut writer = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    for row in rows {
        writer.serialize(row).map_err(CliError::encode)?;
    }
    let bytes = writer.into_inner().map_err(|e| CliError::encode(e.into_error()))?;
    String::from_utf8(bytes).map_err(CliError::encode)
}

pub fn to_csv<W: Serialize>(config: &RunConfig, rows: &[W]) -> Result<String, CliError> {
    Ok(config_comment(config)? + &csv_table(rows)?)
}

/// Parses a table written by [`to_csv`] (comment lines are skipped).
pub fn parse_csv<W: DeserializeOwned>(text: &str) -> Result<Vec<W>, CliError> {
    csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes())
        .deserialize()
        .collect::<Result<Vec<W>, _>>()
        .map_err(CliError::encode)
}
