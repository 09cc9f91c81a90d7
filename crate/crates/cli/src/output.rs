use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::{json, Value};

use aitwin_core::{Error, SCHEMA_VERSION};

/// Process exit codes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Ok = 0,
    Io = 1,
    Invalid = 2,
    Unmet = 3,
    Diverged = 4,
}

#[derive(Debug)]
pub struct Failure {
    pub status: Status,
    pub error: String,
}

impl Failure {
    pub fn invalid(msg: impl Display) -> Self {
        Failure {
            status: Status::Invalid,
            error: msg.to_string(),
        }
    }

    pub fn io(path: &Path, e: impl Display) -> Self {
        Failure {
            status: Status::Io,
            error: format!("{}: {e}", path.display()),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::Io(_) => Status::Io,
            Error::Divergence { .. } => Status::Diverged,
            _ => Status::Invalid,
        };
        Failure {
            status,
            error: e.to_string(),
        }
    }
}

pub struct Outcome {
    pub status: Status,
    pub summary: String,
}

pub type CmdResult = Result<Outcome, Failure>;

pub fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::io(path, e))
}

/// Parse a JSON settings file, naming it in errors.
pub fn read_config<T: serde::de::DeserializeOwned + Default>(path: Option<&Path>) -> Result<T, Failure> {
    match path {
        None => Ok(T::default()),
        Some(p) => serde_json::from_str(&read(p)?)
            .map_err(|e| Failure::invalid(format!("config {}: {e}", p.display()))),
    }
}

/// Report directory for one command run. Report payloads carry no
/// timestamps; those go to `run_metadata.json`.
pub struct Output {
    dir: PathBuf,
    command: &'static str,
    started: Instant,
    files: Vec<String>,
}

impl Output {
    pub fn new(dir: &Path, command: &'static str) -> Result<Self, Failure> {
        std::fs::create_dir_all(dir).map_err(|e| Failure::io(dir, e))?;
        Ok(Output {
            dir: dir.to_path_buf(),
            command,
            started: Instant::now(),
            files: Vec::new(),
        })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    pub fn text(&mut self, name: &str, body: &str) -> Result<(), Failure> {
        let path = self.path(name);
        std::fs::write(&path, body).map_err(|e| Failure::io(&path, e))?;
        self.files.push(name.to_string());
        Ok(())
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), Failure> {
        let mut body = serde_json::to_string_pretty(value).map_err(Failure::invalid)?;
        body.push('\n');
        self.text(name, &body)
    }

    /// Standard report: command, seed, resolved config and result.
    pub fn report<T: Serialize>(&mut self, name: &str, seed: u64, config: Value, result: &T) -> Result<(), Failure> {
        let body = json!({
            "schema_version": SCHEMA_VERSION,
            "command": self.command,
            "seed": seed,
            "config": config,
            "result": result,
        });
        self.json(name, &body)
    }

    pub fn finish(mut self, status: Status, summary: String) -> CmdResult {
        let now = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs_f64())
            .unwrap_or(0.0);
        let meta = json!({
            "schema_version": SCHEMA_VERSION,
            "command": self.command,
            "finished_unix_s": now,
            "elapsed_ms": self.started.elapsed().as_secs_f64() * 1e3,
            "exit_code": status as u8,
            "files": self.files.clone(),
            "version": env!("CARGO_PKG_VERSION"),
        });
        self.json("run_metadata.json", &meta)?;
        Ok(Outcome { status, summary })
    }
}
