use std::io::Write;
use std::path::{Path, PathBuf};

use serde_json::Value;

use super::{Project, FORMAT_VERSION};

#[derive(Debug, thiserror::Error)]
pub enum ProjectFileError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}: invalid project file at byte {offset}: {message}", path.display())]
    Parse { path: PathBuf, offset: usize, message: String },
    #[error("{}: project format version {found} cannot be read by this version, which reads {expected}", path.display())]
    Migration { path: PathBuf, found: String, expected: u32 },
}

/// The canonical file contents: pretty JSON and a trailing newline.
pub fn to_json(project: &Project) -> String {
    let mut json = serde_json::to_string_pretty(project).expect("projects serialize");
    json.push('\n');
    json
}

/// Writes the project atomically: a crash leaves either the old or the new
/// file, never a mix.
pub fn save(project: &Project, path: &Path) -> Result<(), ProjectFileError> {
    let io = |source| ProjectFileError::Io { path: path.to_path_buf(), source };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(to_json(project).as_bytes()).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

/// Byte offset of a 1-based line/column position.
fn byte_offset(bytes: &[u8], line: usize, column: usize) -> usize {
    let line_start: usize = bytes
        .split(|&b| b == b'\n')
        .take(line.saturating_sub(1))
        .map(|l| l.len() + 1)
        .sum();
    (line_start + column.saturating_sub(1)).min(bytes.len())
}

pub fn load(path: &Path) -> Result<Project, ProjectFileError> {
    let bytes = std::fs::read(path).map_err(|source| ProjectFileError::Io { path: path.to_path_buf(), source })?;
    from_slice(&bytes, path)
}

fn from_slice(bytes: &[u8], path: &Path) -> Result<Project, ProjectFileError> {
    let parse_error = |e: serde_json::Error| ProjectFileError::Parse {
        path: path.to_path_buf(),
        offset: byte_offset(bytes, e.line(), e.column()),
        message: e.to_string(),
    };
    let value: Value = serde_json::from_slice(bytes).map_err(parse_error)?;
    match value.get("formatVersion") {
        Some(v) if v.as_u64() == Some(u64::from(FORMAT_VERSION)) => {}
        found => {
            return Err(ProjectFileError::Migration {
                path: path.to_path_buf(),
                found: found.map_or_else(|| "none".to_string(), Value::to_string),
                expected: FORMAT_VERSION,
            })
        }
    }
    serde_json::from_slice(bytes).map_err(parse_error)
}
