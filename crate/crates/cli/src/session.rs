use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::PathBuf;

use crate::CliError;

pub const SESSION_ENV: &str = "BLAMEWORTHY_SESSION";
const DEFAULT_DIR: &str = "blameworthy-session";

/// Append-only record of every command and its output.
///
/// `history.txt` holds the text of every run; `reports.jsonl` holds one
/// blame report per line.
pub struct Session {
    dir: PathBuf,
}

impl Session {
    pub fn from_env() -> Session {
        let dir = std::env::var_os(SESSION_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from(DEFAULT_DIR));
        Session { dir }
    }

    fn open(&self, name: &str) -> Result<fs::File, CliError> {
        let io = |source| CliError::Io { path: self.dir.clone(), source };
        fs::create_dir_all(&self.dir).map_err(io)?;
        OpenOptions::new().create(true).append(true).open(self.dir.join(name)).map_err(io)
    }

    pub fn append(&self, command: &str, output: &str) -> Result<(), CliError> {
        let mut f = self.open("history.txt")?;
        write!(f, "$ blameworthy {command}\n{output}\n").map_err(|source| CliError::Io { path: self.dir.join("history.txt"), source })
    }

    pub fn record_report(&mut self, json: &str) -> Result<(), CliError> {
        let compact: serde_json::Value = serde_json::from_str(json).expect("report JSON is valid");
        let mut f = self.open("reports.jsonl")?;
        writeln!(f, "{compact}").map_err(|source| CliError::Io { path: self.dir.join("reports.jsonl"), source })
    }
}
