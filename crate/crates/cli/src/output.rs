//! Atomic file emission with reproducibility headers.

use std::io::Write;
use std::path::{Path, PathBuf};

use crate::CliError;

/// Writes bytes to a temp file in the target directory, then renames into
/// place, so a failed run never leaves a partial output.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    std::fs::create_dir_all(dir)
        .map_err(|e| CliError::config(format!("cannot create {}: {e}", dir.display())))?;
    let tmp: PathBuf = path.with_extension("tmp");
    {
        let mut f = std::fs::File::create(&tmp)
            .map_err(|e| CliError::config(format!("cannot create {}: {e}", tmp.display())))?;
        f.write_all(bytes)
            .map_err(|e| CliError::config(format!("cannot write {}: {e}", tmp.display())))?;
        f.sync_all()
            .map_err(|e| CliError::config(format!("cannot sync {}: {e}", tmp.display())))?;
    }
    std::fs::rename(&tmp, path)
        .map_err(|e| CliError::config(format!("cannot move output into {}: {e}", path.display())))
}

/// `# workfluct digest=<hex> seed=<n>`: the header line embedded at the top
/// of every CSV output.
pub fn csv_header_line(digest: &str, seed: u64) -> String {
    format!("# workfluct digest={digest} seed={seed}\n")
}

/// Writes a CSV with the reproducibility header, a column header and rows.
pub fn write_csv(
    path: &Path,
    digest: &str,
    seed: u64,
    columns: &str,
    rows: &str,
) -> Result<(), CliError> {
    let mut text = csv_header_line(digest, seed);
    text.push_str(columns);
    text.push('\n');
    text.push_str(rows);
    write_atomic(path, text.as_bytes())
}

/// Writes pretty JSON (with trailing newline).
pub fn write_json(path: &Path, value: &serde_json::Value) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::config(format!("cannot encode JSON: {e}")))?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}
