//! Input loading with content hashes, config echo headers and atomic output.

use std::io::Write;
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use rieszlab::measure::read_measure;
use rieszlab::DiscreteMeasure;

use crate::CliError;

pub struct Loaded {
    pub measure: DiscreteMeasure,
    pub sha256: String,
}

pub fn load(path: &Path) -> Result<Loaded, CliError> {
    let bytes = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
    let sha256 = format!("{:x}", Sha256::digest(&bytes));
    let measure = read_measure(bytes.as_slice()).map_err(CliError::from)?;
    Ok(Loaded { measure, sha256 })
}

/// Header lines (without the `#` prefix): tool version, command, input hashes,
/// then the resolved config as flattened TOML.
pub fn header<T: Serialize>(command: &str, inputs: &[(&str, &Loaded)], config: &T) -> Result<Vec<String>, CliError> {
    let mut lines = vec![
        format!("rieszlab {}", env!("CARGO_PKG_VERSION")),
        format!("command = \"{command}\""),
    ];
    for (name, l) in inputs {
        lines.push(format!("{name}-sha256 = \"{}\"", l.sha256));
    }
    let body = toml::to_string(config).map_err(|e| CliError::Validation(format!("config echo failed: {e}")))?;
    lines.extend(body.lines().filter(|l| !l.trim().is_empty()).map(str::to_owned));
    Ok(lines)
}

pub fn with_header(header: &[String], body: &str) -> String {
    let mut s = String::new();
    for h in header {
        s.push_str("# ");
        s.push_str(h);
        s.push('\n');
    }
    s.push_str(body);
    s
}

/// Write to `path` through a temporary file in the same directory, or to stdout.
pub fn emit(path: Option<&Path>, contents: &str) -> Result<(), CliError> {
    let Some(path) = path else {
        let mut out = std::io::stdout().lock();
        return out
            .write_all(contents.as_bytes())
            .and_then(|_| out.flush())
            .map_err(|e| CliError::io(Path::new("<stdout>"), e));
    };
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| CliError::io(dir, e))?;
    tmp.write_all(contents.as_bytes()).map_err(|e| CliError::io(path, e))?;
    tmp.persist(path).map_err(|e| CliError::io(path, e.error))?;
    Ok(())
}
