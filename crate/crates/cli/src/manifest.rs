use std::path::{Path, PathBuf};

use chaplygin_core::diagnostics::write_atomic;
use chaplygin_core::{Error, ProblemConfig};
use serde::Serialize;

use crate::Status;

#[derive(Debug, Serialize)]
pub struct StageRecord {
    pub name: &'static str,
    pub ok: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Provenance of one invocation, written as `manifest.json` when it ends.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: &'static str,
    pub version: &'static str,
    pub config_path: PathBuf,
    pub config: Option<ProblemConfig>,
    pub started_at: String,
    pub finished_at: Option<String>,
    pub stages: Vec<StageRecord>,
    pub outputs: Vec<PathBuf>,
    pub exit_code: Option<u8>,
}

fn now() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}

impl RunManifest {
    pub fn new(command: &'static str, config_path: &Path) -> Self {
        Self {
            command,
            version: env!("CARGO_PKG_VERSION"),
            config_path: config_path.to_path_buf(),
            config: None,
            started_at: now(),
            finished_at: None,
            stages: Vec::new(),
            outputs: Vec::new(),
            exit_code: None,
        }
    }

    /// Records the outcome of one stage. On error the message is printed and
    /// `failure` is returned as the status.
    pub fn record<T>(&mut self, name: &'static str, failure: Status, result: Result<T, Error>) -> Result<T, Status> {
        match result {
            Ok(value) => {
                self.stages.push(StageRecord { name, ok: true, error: None });
                Ok(value)
            }
            Err(err) => {
                eprintln!("error: {err}");
                self.stages.push(StageRecord {
                    name,
                    ok: false,
                    error: Some(err.to_string()),
                });
                Err(failure)
            }
        }
    }

    pub fn fail(&mut self, name: &'static str, message: String) -> Status {
        eprintln!("error: {message}");
        self.stages.push(StageRecord {
            name,
            ok: false,
            error: Some(message),
        });
        Status::ConfigError
    }

    /// Writes a file and lists it among the outputs.
    pub fn output(&mut self, path: PathBuf, contents: &[u8]) -> Result<(), Error> {
        write_atomic(&path, contents)?;
        self.outputs.push(path);
        Ok(())
    }

    /// Stamps the end time and writes `manifest.json` into `dir` if that
    /// directory exists.
    pub fn finish(mut self, dir: &Path, status: Status) -> Status {
        self.finished_at = Some(now());
        self.exit_code = Some(status as u8);
        if !dir.is_dir() {
            return status;
        }
        let path = dir.join("manifest.json");
        let written = serde_json::to_string_pretty(&self)
            .map_err(Error::from)
            .and_then(|text| write_atomic(&path, format!("{text}\n").as_bytes()));
        match written {
            Ok(()) => status,
            Err(err) => {
                eprintln!("error: {err}");
                if status == Status::Ok {
                    Status::SolverFailure
                } else {
                    status
                }
            }
        }
    }
}
