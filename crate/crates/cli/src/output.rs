use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use equitel_core::Error;
use serde_json::{json, Value};

use crate::Format;

/// A finished command: the JSON document plus optional secondary renderings.
pub struct Report {
    pub json: Value,
    pub md: Option<String>,
    pub csv: Option<String>,
    /// Process exit code once the report is written.
    pub exit: u8,
}

impl Report {
    /// Exit 0 when `passed`, 2 otherwise.
    pub fn new(json: Value, passed: bool) -> Self {
        Report { json, md: None, csv: None, exit: if passed { 0 } else { 2 } }
    }

    /// A structured "no solution exists" answer: exit 4.
    pub fn refusal(json: Value) -> Self {
        Report { json, md: None, csv: None, exit: 4 }
    }

    pub fn with_md(mut self, md: String) -> Self {
        self.md = Some(md);
        self
    }

    pub fn with_csv(mut self, csv: String) -> Self {
        self.csv = Some(csv);
        self
    }

    pub fn render(&self, format: Format) -> Result<String, CliError> {
        let missing = |what: &str| CliError::Usage(format!("this command has no {what} output"));
        match format {
            Format::Json => {
                let mut s = serde_json::to_string_pretty(&self.json).expect("values serialize");
                s.push('\n');
                Ok(s)
            }
            Format::Md => self.md.clone().ok_or_else(|| missing("markdown")),
            Format::Csv => self.csv.clone().ok_or_else(|| missing("CSV")),
        }
    }
}

#[derive(Debug)]
pub enum CliError {
    Core(Error),
    Io(PathBuf, std::io::Error),
    Usage(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Core(Error::Json(e))
    }
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) => match e {
                Error::Refused(_) | Error::NoSolutionInFamily(_) | Error::Infeasible(_) => 4,
                Error::Json(_)
                | Error::InvalidInput(_)
                | Error::UnknownPreset(_)
                | Error::NotAPermutation { .. }
                | Error::SizeCapExceeded { .. } => 3,
                _ => 2,
            },
            CliError::Io(..) | CliError::Usage(_) => 3,
        }
    }

    fn kind(&self) -> &'static str {
        match self.exit_code() {
            2 => "verification_failure",
            4 => "refusal",
            _ => "schema_error",
        }
    }

    pub fn to_json(&self) -> Value {
        let message = match self {
            CliError::Core(e) => e.to_string(),
            CliError::Io(p, e) => format!("{}: {e}", p.display()),
            CliError::Usage(m) => m.clone(),
        };
        json!({ "error": self.kind(), "message": message })
    }
}

pub fn read_json(path: &Path) -> Result<Value, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Io(path.to_path_buf(), e))?;
    Ok(serde_json::from_str(&text)?)
}

/// Writes via a sibling temporary file and a rename, so readers never see
/// a partial report.
pub fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    let io = |e| CliError::Io(path.to_path_buf(), e);
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, text).map_err(io)?;
    fs::rename(&tmp, path).map_err(io)
}

pub fn write(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => write_file(p, text),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes()).map_err(|e| CliError::Io("<stdout>".into(), e))
        }
    }
}
