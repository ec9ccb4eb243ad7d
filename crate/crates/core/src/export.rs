//! CSV and JSON persistence of trade-off curves.

use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::curve::{CurveSpec, TradeoffPoint};
use crate::error::{Error, Result};

pub const CSV_HEADER: &str = "phi,x_fid,y_fid,kappa_opt,g_opt";
pub const TOOL_NAME: &str = "tradeoff";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(Error::InvalidParams(format!("unknown format {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub tool: String,
    pub version: String,
    pub spec: CurveSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl Metadata {
    pub fn new(spec: CurveSpec, seed: Option<u64>) -> Self {
        Self {
            tool: TOOL_NAME.to_string(),
            version: TOOL_VERSION.to_string(),
            spec,
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveDocument {
    pub metadata: Metadata,
    pub points: Vec<TradeoffPoint>,
}

/// Formats like C's `%.12g`.
pub fn format_g12(x: f64) -> String {
    const DIGITS: i32 = 12;
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    // The exponent after rounding to DIGITS significant digits.
    let sci = format!("{:.*e}", (DIGITS - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..DIGITS).contains(&exp) {
        let m = strip_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    } else {
        strip_zeros(&format!("{:.*}", (DIGITS - 1 - exp) as usize, x)).to_string()
    }
}

fn strip_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn to_csv(points: &[TradeoffPoint]) -> String {
    let mut out = String::with_capacity(64 * (points.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for p in points {
        let row = [p.phi, p.x_fid, p.y_fid, p.kappa_opt, p.g_opt].map(format_g12);
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

pub fn to_json(points: &[TradeoffPoint], metadata: &Metadata) -> Result<String> {
    let doc = CurveDocument {
        metadata: metadata.clone(),
        points: points.to_vec(),
    };
    serde_json::to_string_pretty(&doc).map_err(|source| Error::Json {
        path: PathBuf::new(),
        source,
    })
}

pub fn export(points: &[TradeoffPoint], format: Format, path: &Path, metadata: &Metadata) -> Result<()> {
    let body = match format {
        Format::Csv => to_csv(points),
        Format::Json => to_json(points, metadata).map_err(|e| with_path(e, path))?,
    };
    fs::write(path, body).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn with_path(e: Error, path: &Path) -> Error {
    match e {
        Error::Json { source, .. } => Error::Json {
            path: path.to_path_buf(),
            source,
        },
        other => other,
    }
}

pub fn read_json(path: &Path) -> Result<CurveDocument> {
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|source| Error::Json {
        path: path.to_path_buf(),
        source,
    })
}

/// File name of one member of a thermal batch, `ed_thermal_N{nbar}_eta{eta}.csv`.
pub fn thermal_batch_file_name(nbar: f64, eta: f64, format: Format) -> String {
    format!("ed_thermal_N{nbar}_eta{eta}.{}", format.extension())
}
