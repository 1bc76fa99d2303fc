//! Atomic file emission and run manifests.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

use crate::config::RunConfig;
use crate::error::CliError;

/// Directory for temporary files; `DICKE_SCRATCH` overrides the default of
/// writing next to the destination.
fn scratch_dir(dest: &Path) -> PathBuf {
    match std::env::var_os("DICKE_SCRATCH") {
        Some(dir) if !dir.is_empty() => PathBuf::from(dir),
        _ => match dest.parent() {
            Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
            _ => PathBuf::from("."),
        },
    }
}

/// Files written so far by one run; removed again if the run fails.
#[derive(Debug, Default)]
pub struct OutputSet {
    written: Vec<PathBuf>,
}

impl OutputSet {
    pub fn files(&self) -> &[PathBuf] {
        &self.written
    }

    /// Write `dest` through a temporary file so readers never see a partial
    /// file.
    pub fn write<F>(&mut self, dest: &Path, fill: F) -> Result<(), CliError>
    where
        F: FnOnce(&mut dyn Write) -> Result<(), CliError>,
    {
        if let Some(parent) = dest.parent().filter(|p| !p.as_os_str().is_empty()) {
            fs::create_dir_all(parent).map_err(CliError::io(format!("cannot create `{}`", parent.display())))?;
        }
        let scratch = scratch_dir(dest);
        fs::create_dir_all(&scratch).map_err(CliError::io(format!("cannot create `{}`", scratch.display())))?;
        let tmp = tempfile::NamedTempFile::new_in(&scratch)
            .map_err(CliError::io(format!("cannot create a temporary file in `{}`", scratch.display())))?;
        {
            let mut w = BufWriter::new(tmp.as_file());
            fill(&mut w)?;
            w.flush().map_err(CliError::io(format!("cannot write `{}`", dest.display())))?;
        }
        if let Err(e) = tmp.persist(dest) {
            // rename fails across filesystems; fall back to a copy
            let tmp = e.file;
            if let Err(err) = fs::copy(tmp.path(), dest) {
                let _ = fs::remove_file(dest);
                return Err(CliError::Io { context: format!("cannot write `{}`", dest.display()), source: err });
            }
        }
        self.written.push(dest.to_path_buf());
        Ok(())
    }

    pub fn rollback(&mut self) {
        for f in self.written.drain(..) {
            let _ = fs::remove_file(&f);
        }
    }
}

/// `<output>.manifest.json`
pub fn manifest_path(output: &Path) -> PathBuf {
    let mut name = output.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".manifest.json");
    output.with_file_name(name)
}

/// `<stem><suffix>` next to `output`.
pub fn sibling(output: &Path, suffix: &str) -> PathBuf {
    let stem = output.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    output.with_file_name(format!("{stem}{suffix}"))
}

#[derive(Debug, Serialize)]
pub struct RunManifest<'a> {
    pub config: &'a RunConfig,
    pub code_version: &'static str,
    pub started_unix: u64,
    pub wall_time_s: f64,
    pub outputs: Vec<String>,
    /// Requested tolerances and what the run actually achieved.
    pub tolerances: Value,
    /// Fock-cutoff verdict, when the command involves the field.
    pub truncation: Value,
    /// Command-specific results.
    pub summary: Value,
}

impl RunManifest<'_> {
    pub fn write(&self, set: &mut OutputSet, output: &Path) -> Result<(), CliError> {
        let text = serde_json::to_string_pretty(self).map_err(|e| CliError::Config(e.to_string()))?;
        set.write(&manifest_path(output), |w| {
            writeln!(w, "{text}").map_err(CliError::io("cannot write manifest"))
        })
    }
}
