use std::ffi::OsString;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde_json::Value;

/// Splice `--key value` pairs from a JSON config file right after the subcommand, so that
/// flags given on the command line (which come later) take precedence.
pub fn merge(args: Vec<OsString>) -> Result<Vec<OsString>> {
    let Some(pos) = args.iter().position(|a| a == "--config" || a.to_string_lossy().starts_with("--config=")) else {
        return Ok(args);
    };
    let path = match args[pos].to_string_lossy().strip_prefix("--config=") {
        Some(p) => p.to_string(),
        None => args
            .get(pos + 1)
            .context("--config needs a file")?
            .to_string_lossy()
            .into_owned(),
    };
    let extra = flags_from_file(Path::new(&path))?;
    // the subcommand is the first positional argument
    let mut i = 1;
    while i < args.len() {
        let a = args[i].to_string_lossy();
        if a == "--config" || a == "--output" || a == "-o" {
            i += 2;
        } else if a.starts_with('-') {
            i += 1;
        } else {
            break;
        }
    }
    if i >= args.len() {
        return Ok(args);
    }
    let mut out = args[..=i].to_vec();
    out.extend(extra);
    out.extend_from_slice(&args[i + 1..]);
    Ok(out)
}

fn flags_from_file(path: &Path) -> Result<Vec<OsString>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
    let json: Value = serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
    let Value::Object(map) = json else {
        bail!("config {} must hold a JSON object", path.display());
    };
    let mut out = Vec::new();
    for (key, value) in map {
        let flag = format!("--{}", key.replace('_', "-"));
        match value {
            Value::Bool(true) => out.push(flag.into()),
            Value::Bool(false) | Value::Null => {}
            Value::Number(n) => {
                out.push(flag.into());
                out.push(n.to_string().into());
            }
            Value::String(s) => {
                out.push(flag.into());
                out.push(s.into());
            }
            other => bail!("config key '{key}': unsupported value {other}"),
        }
    }
    Ok(out)
}
