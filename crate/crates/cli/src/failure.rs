//! Exit codes and the JSON error object printed on stderr.

use std::fmt;
use std::io;
use std::path::Path;

use recorder_core::integrity::{AttestError, VerifyError};
use recorder_core::model::ValidationReport;
use recorder_core::sim::SimError;
use recorder_core::store::StoreError;
use recorder_core::RecordError;
use serde_json::{json, Map, Value};

/// One code per failure class. Success is 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitKind {
    /// Unexpected internal error.
    Internal,
    /// Bad command line.
    Usage,
    /// A config, scenario, consent file or argument value is invalid.
    Invalid,
    /// A file could not be read or written.
    Io,
    /// The session directory is missing or unreadable.
    Session,
    /// The attestation service could not be reached.
    Unavailable,
    /// Recording stopped before the scenario ended.
    RecordFailed,
    /// Verification found a modified, missing or reordered segment.
    Tampered,
    /// Verification found an unattested segment.
    Gap,
    /// A service failed to start or stopped with an error.
    Server,
}

impl ExitKind {
    pub const ALL: [ExitKind; 10] = [
        ExitKind::Internal,
        ExitKind::Usage,
        ExitKind::Invalid,
        ExitKind::Io,
        ExitKind::Session,
        ExitKind::Unavailable,
        ExitKind::RecordFailed,
        ExitKind::Tampered,
        ExitKind::Gap,
        ExitKind::Server,
    ];

    pub fn code(self) -> i32 {
        match self {
            ExitKind::Internal => 1,
            ExitKind::Usage => 2,
            ExitKind::Invalid => 3,
            ExitKind::Io => 4,
            ExitKind::Session => 5,
            ExitKind::Unavailable => 6,
            ExitKind::RecordFailed => 7,
            ExitKind::Tampered => 8,
            ExitKind::Gap => 9,
            ExitKind::Server => 10,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ExitKind::Internal => "internal",
            ExitKind::Usage => "usage",
            ExitKind::Invalid => "invalid",
            ExitKind::Io => "io",
            ExitKind::Session => "session",
            ExitKind::Unavailable => "unavailable",
            ExitKind::RecordFailed => "record_failed",
            ExitKind::Tampered => "tampered",
            ExitKind::Gap => "gap",
            ExitKind::Server => "server",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Failure {
    pub kind: ExitKind,
    pub message: String,
    /// Extra fields merged into the error object.
    pub detail: Map<String, Value>,
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.kind.name(), self.message)
    }
}

impl std::error::Error for Failure {}

impl Failure {
    pub fn new(kind: ExitKind, message: impl Into<String>) -> Self {
        Failure {
            kind,
            message: message.into(),
            detail: Map::new(),
        }
    }

    pub fn with(mut self, key: &str, value: impl serde::Serialize) -> Self {
        self.detail.insert(
            key.into(),
            serde_json::to_value(value).unwrap_or(Value::Null),
        );
        self
    }

    pub fn invalid(report: ValidationReport, what: &str) -> Self {
        Failure::new(ExitKind::Invalid, format!("invalid {what}: {report}")).with("report", report)
    }

    pub fn io(path: &Path, e: io::Error) -> Self {
        Failure::new(ExitKind::Io, format!("{}: {e}", path.display())).with("path", path)
    }

    pub fn internal(e: impl fmt::Display) -> Self {
        Failure::new(ExitKind::Internal, e.to_string())
    }

    pub fn to_json(&self) -> Value {
        let mut obj = Map::new();
        obj.insert("error".into(), json!(self.kind.name()));
        obj.insert("code".into(), json!(self.kind.code()));
        obj.insert("message".into(), json!(self.message));
        obj.extend(self.detail.clone());
        Value::Object(obj)
    }

    /// Prints the error object on stderr and returns the exit code.
    pub fn report(&self) -> i32 {
        eprintln!("{}", self.to_json());
        self.kind.code()
    }
}

pub fn store_failure(dir: &Path, e: StoreError) -> Failure {
    match e {
        StoreError::Io(e) if e.kind() == io::ErrorKind::NotFound => Failure::new(
            ExitKind::Session,
            format!("no session at {}", dir.display()),
        )
        .with("path", dir),
        StoreError::NotFound(m) => Failure::new(ExitKind::Session, m).with("path", dir),
        StoreError::Io(e) => Failure::io(dir, e),
        other => Failure::new(ExitKind::Session, other.to_string()).with("path", dir),
    }
}

pub fn attest_failure(e: AttestError) -> Failure {
    match e {
        AttestError::Unavailable(m) => Failure::new(ExitKind::Unavailable, m),
        other => Failure::internal(other),
    }
}

pub fn verify_failure(dir: &Path, e: VerifyError) -> Failure {
    match e {
        VerifyError::Service(e) => attest_failure(e),
        VerifyError::Io(e) if e.kind() == io::ErrorKind::NotFound => Failure::new(
            ExitKind::Session,
            format!("no session at {}", dir.display()),
        )
        .with("path", dir),
        VerifyError::Io(e) => Failure::io(dir, e),
        VerifyError::Manifest(m) => Failure::new(ExitKind::Session, m).with("path", dir),
    }
}

pub fn record_failure(root: &Path, e: RecordError) -> Failure {
    match e {
        RecordError::Config(r) => Failure::invalid(r, "config"),
        RecordError::Sim(SimError::Scenario(r)) => Failure::invalid(r, "scenario"),
        RecordError::Sim(e) => Failure::new(ExitKind::Invalid, e.to_string()),
        RecordError::Store(StoreError::Io(e)) => Failure::io(root, e),
        RecordError::Store(e) => Failure::new(ExitKind::RecordFailed, e.to_string()),
        RecordError::Aborted { t_ms, manifest, .. } => Failure::new(
            ExitKind::RecordFailed,
            format!("session aborted at t_ms={t_ms}"),
        )
        .with("t_ms", t_ms)
        .with("session_id", manifest.session_id),
    }
}

/// Treats a closed stdout (`| head`) as success.
pub fn ignore_broken_pipe(e: io::Error) -> Result<(), Failure> {
    if e.kind() == io::ErrorKind::BrokenPipe {
        Ok(())
    } else {
        Err(Failure::new(ExitKind::Io, format!("stdout: {e}")))
    }
}

/// Reads and decodes a JSON file, reporting the failing field path.
pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path, what: &str) -> Result<T, Failure> {
    let bytes = std::fs::read(path).map_err(|e| Failure::io(path, e))?;
    let de = &mut serde_json::Deserializer::from_slice(&bytes);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let field = e.path().to_string();
        let mut r = ValidationReport::default();
        r.push(
            if field == "." { String::new() } else { field },
            e.into_inner().to_string(),
        );
        Failure::invalid(r, what).with("path", path)
    })
}
