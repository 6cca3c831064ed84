use std::io::{Read, Write};
use std::path::Path;

use crate::CliError;

/// Reads a whole file, or standard input for `-`.
pub fn read_text(path: &str) -> Result<String, CliError> {
    let mut text = String::new();
    if path == "-" {
        std::io::stdin()
            .read_to_string(&mut text)
            .map_err(|e| CliError::Io(format!("stdin: {e}")))?;
    } else {
        text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{path}: {e}")))?;
    }
    Ok(text)
}

/// Writes `content` to standard output for `-`, otherwise to a temporary
/// file next to `path` that is then renamed over it. Existing non-regular
/// files such as `/dev/null` are written in place.
pub fn write_text(path: &str, content: &str) -> Result<(), CliError> {
    if path == "-" {
        let mut out = std::io::stdout().lock();
        return out
            .write_all(content.as_bytes())
            .and_then(|_| out.flush())
            .map_err(|e| CliError::Io(format!("stdout: {e}")));
    }
    let io_err = |e: std::io::Error| CliError::Io(format!("{path}: {e}"));
    let target = Path::new(path);
    // Devices and pipes cannot be replaced by a rename.
    if std::fs::metadata(target).is_ok_and(|m| !m.is_file()) {
        return std::fs::write(target, content).map_err(io_err);
    }
    let dir = match target.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io_err)?;
    tmp.write_all(content.as_bytes()).map_err(io_err)?;
    tmp.as_file().sync_all().map_err(io_err)?;
    tmp.persist(target).map_err(|e| io_err(e.error))?;
    Ok(())
}
