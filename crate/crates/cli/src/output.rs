//! Atomic file output, round-trip CSV formatting and run manifests.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

/// Column-oriented CSV table; every float is printed with 17 significant digits.
pub struct Table {
    header: Vec<&'static str>,
    body: String,
}

pub enum Cell<'a> {
    Num(f64),
    Int(u64),
    Text(&'a str),
}

impl Table {
    pub fn new(header: &[&'static str]) -> Self {
        Self { header: header.to_vec(), body: String::new() }
    }

    pub fn row(&mut self, cells: &[Cell]) {
        debug_assert_eq!(cells.len(), self.header.len());
        for (i, c) in cells.iter().enumerate() {
            if i > 0 {
                self.body.push(',');
            }
            match c {
                Cell::Num(v) => write!(self.body, "{v:.16e}").unwrap(),
                Cell::Int(v) => write!(self.body, "{v}").unwrap(),
                Cell::Text(s) => self.body.push_str(s),
            }
        }
        self.body.push('\n');
    }

    /// Shorthand for an all-numeric row.
    pub fn nums(&mut self, values: &[f64]) {
        let cells: Vec<Cell> = values.iter().map(|&v| Cell::Num(v)).collect();
        self.row(&cells);
    }

    pub fn render(&self) -> String {
        let mut s = self.header.join(",");
        s.push('\n');
        s.push_str(&self.body);
        s
    }
}

/// Writes through a temporary file in the target directory, then renames it
/// into place so readers never see a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).with_context(|| format!("cannot write into {}", dir.display()))?;
    tmp.write_all(bytes)?;
    #[cfg(unix)]
    {
        // temporary files are created owner-only; outputs should not be
        use std::os::unix::fs::PermissionsExt;
        tmp.as_file().set_permissions(std::fs::Permissions::from_mode(0o644))?;
    }
    tmp.as_file().sync_all()?;
    tmp.persist(path).with_context(|| format!("cannot rename into {}", path.display()))?;
    Ok(())
}

#[derive(Debug, Serialize)]
pub struct OutputFile {
    pub path: PathBuf,
    pub sha256: String,
    pub bytes: usize,
}

/// Collects the files a run writes, for its manifest.
#[derive(Default)]
pub struct Outputs {
    files: Vec<OutputFile>,
}

impl Outputs {
    pub fn write(&mut self, path: &Path, contents: &[u8]) -> Result<()> {
        // an unwritable destination is the caller's to fix
        write_atomic(path, contents).map_err(|e| crate::UsageError(format!("{e:#}")))?;
        self.files.push(OutputFile { path: path.to_path_buf(), sha256: hex::encode(Sha256::digest(contents)), bytes: contents.len() });
        Ok(())
    }

    pub fn table(&mut self, path: &Path, table: &Table) -> Result<()> {
        self.write(path, table.render().as_bytes())
    }

    pub fn json<T: Serialize>(&mut self, path: &Path, value: &T) -> Result<()> {
        let mut s = serde_json::to_string_pretty(value)?;
        s.push('\n');
        self.write(path, s.as_bytes())
    }

    pub fn into_files(self) -> Vec<OutputFile> {
        self.files
    }
}

/// Everything needed to reproduce a run.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub tool_version: &'static str,
    pub subcommand: &'static str,
    /// SHA-256 of the canonical parameter set the run used.
    pub config_hash: String,
    pub config_path: Option<PathBuf>,
    /// The subcommand's arguments as parsed, defaults included.
    pub overrides: serde_json::Value,
    pub rng_seed: Option<u64>,
    pub outputs: Vec<OutputFile>,
    pub wall_time_s: f64,
}

/// `traj.csv -> traj.<suffix>` next to the main output.
pub fn sidecar(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "out".into());
    path.with_file_name(format!("{stem}.{suffix}"))
}
