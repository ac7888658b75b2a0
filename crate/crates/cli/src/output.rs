use std::io::Write;
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::manifest::OutputDigest;
use crate::CliError;

/// 17 significant digits, `inf`/`-inf`/`nan` for non-finite values.
pub fn num(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        format!("{v:.16e}")
    }
}

pub fn row(fields: &[String]) -> String {
    let mut s = fields.join(",");
    s.push('\n');
    s
}

pub fn json<T: Serialize>(v: &T) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(v)
        .map_err(|e| CliError::Numeric(format!("cannot encode JSON: {e}")))?;
    s.push('\n');
    Ok(s)
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

pub fn write(path: Option<&Path>, text: &str) -> Result<OutputDigest, CliError> {
    let sha256 = hex(&Sha256::digest(text.as_bytes()));
    let name = match path {
        Some(p) => {
            std::fs::write(p, text)
                .map_err(|e| CliError::Usage(format!("{}: {e}", p.display())))?;
            p.display().to_string()
        }
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| CliError::Numeric(format!("stdout: {e}")))?;
            "-".into()
        }
    };
    Ok(OutputDigest {
        path: name,
        sha256,
        bytes: text.len(),
    })
}
