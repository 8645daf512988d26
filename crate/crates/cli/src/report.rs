//! Errors, exit codes and output files.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};
use thiserror::Error;

use modal_barrier::ErrorKind;

#[derive(Debug, Error)]
#[error("{module}: {message}")]
pub struct CliError {
    pub kind: ErrorKind,
    pub module: &'static str,
    pub message: String,
}

impl CliError {
    pub fn invalid(module: &'static str, message: impl Into<String>) -> Self {
        Self {
            kind: ErrorKind::Validation,
            module,
            message: message.into(),
        }
    }

    pub fn io(path: &Path, err: std::io::Error) -> Self {
        Self {
            kind: ErrorKind::Io,
            module: "io",
            message: format!("{}: {err}", path.display()),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self.kind {
            ErrorKind::Validation => 1,
            ErrorKind::Io => 2,
            ErrorKind::Numeric => 3,
        }
    }

    /// One JSON object on one line, for stderr.
    pub fn to_json(&self) -> String {
        let kind = match self.kind {
            ErrorKind::Validation => "validation",
            ErrorKind::Io => "io",
            ErrorKind::Numeric => "numeric",
        };
        json!({
            "error": {
                "module": self.module,
                "kind": kind,
                "cause": self.message,
                "exit_code": self.exit_code(),
            }
        })
        .to_string()
    }
}

impl From<modal_barrier::Error> for CliError {
    fn from(e: modal_barrier::Error) -> Self {
        Self {
            kind: e.kind(),
            module: e.module(),
            message: e.to_string(),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

pub fn read_file(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

/// Where a command's primary CSV and its sidecar go.
#[derive(Debug, Clone, clap::Args)]
pub struct OutputArgs {
    /// Output file; standard output when omitted.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    /// Sidecar JSON with version, resolved config and statistics.
    /// Defaults to `<output>.json` when --output is given.
    #[arg(long)]
    pub sidecar: Option<PathBuf>,
}

impl OutputArgs {
    fn sidecar_path(&self) -> Option<PathBuf> {
        self.sidecar.clone().or_else(|| {
            self.output.as_ref().map(|o| {
                let mut s = o.clone().into_os_string();
                s.push(".json");
                PathBuf::from(s)
            })
        })
    }

    pub fn emit(&self, command: &str, body: &str, config: Value, stats: Option<Value>) -> CliResult<()> {
        match &self.output {
            Some(path) => fs::write(path, body).map_err(|e| CliError::io(path, e))?,
            None => {
                let mut out = std::io::stdout().lock();
                out.write_all(body.as_bytes())
                    .and_then(|_| out.flush())
                    .map_err(|e| CliError::io(Path::new("<stdout>"), e))?;
            }
        }
        if let Some(path) = self.sidecar_path() {
            let mut doc = json!({
                "tool": "modal-barrier",
                "version": env!("CARGO_PKG_VERSION"),
                "command": command,
                "config": config,
            });
            if let Some(stats) = stats {
                doc["stats"] = stats;
            }
            let text = serde_json::to_string_pretty(&doc).expect("sidecar serializes") + "\n";
            fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
        }
        Ok(())
    }
}
