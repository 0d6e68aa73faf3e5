//! The attestation service: holds a secret nonce per segment hash.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};

use chrono::{DateTime, Utc};
use rand::RngCore;
use serde::{Deserialize, Serialize};
use uuid::Uuid;

use crate::model::Digest32;

/// `SHA-256(h || nonce)` over the fixed 64-byte concatenation.
pub fn attestation_of(h: &Digest32, nonce: &Digest32) -> Digest32 {
    let mut buf = [0u8; 64];
    buf[..32].copy_from_slice(h.as_bytes());
    buf[32..].copy_from_slice(nonce.as_bytes());
    Digest32::of(&buf)
}

/// What clients may see of a stored record. The nonce is not part of it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttestationView {
    pub seq: u64,
    #[serde(rename = "h_hex")]
    pub h: Digest32,
    #[serde(rename = "a_hex")]
    pub a: Digest32,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AttestError {
    #[error("attestation service unavailable: {0}")]
    Unavailable(String),
    #[error("seq {seq} is not after the last attested seq {last}")]
    OutOfOrder { seq: u64, last: u64 },
    #[error("seq {0} was already attested with a different hash")]
    Conflict(u64),
    #[error("attestation service error: {0}")]
    Internal(String),
}

pub trait AttestationService: Send + Sync {
    /// Issues (or re-issues, for an identical retry) the attestation of `h`.
    fn attest(&self, session: Uuid, seq: u64, h: Digest32) -> Result<Digest32, AttestError>;

    /// Whether `next_prev` equals the attestation the service issued for
    /// `(seq, h)`.
    fn verify(
        &self,
        session: Uuid,
        seq: u64,
        h: Digest32,
        next_prev: Digest32,
    ) -> Result<bool, AttestError>;

    fn attestations(&self, session: Uuid) -> Result<Vec<AttestationView>, AttestError>;
}

impl<T: AttestationService + ?Sized> AttestationService for Arc<T> {
    fn attest(&self, session: Uuid, seq: u64, h: Digest32) -> Result<Digest32, AttestError> {
        (**self).attest(session, seq, h)
    }
    fn verify(
        &self,
        session: Uuid,
        seq: u64,
        h: Digest32,
        next_prev: Digest32,
    ) -> Result<bool, AttestError> {
        (**self).verify(session, seq, h, next_prev)
    }
    fn attestations(&self, session: Uuid) -> Result<Vec<AttestationView>, AttestError> {
        (**self).attestations(session)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
struct StoredRecord {
    seq: u64,
    h: Digest32,
    nonce: Digest32,
    a: Digest32,
    issued_at: DateTime<Utc>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
struct Ledger {
    records: BTreeMap<u64, StoredRecord>,
}

/// In-process service, optionally persisted to one JSON file per session.
#[derive(Debug, Default)]
pub struct LocalAttestationService {
    dir: Option<PathBuf>,
    sessions: Mutex<BTreeMap<Uuid, Ledger>>,
}

impl LocalAttestationService {
    pub fn in_memory() -> Self {
        Self::default()
    }

    /// Persists ledgers under `dir`, loading any that already exist.
    pub fn open(dir: impl AsRef<Path>) -> io::Result<Self> {
        let dir = dir.as_ref().to_path_buf();
        fs::create_dir_all(&dir)?;
        let mut sessions = BTreeMap::new();
        for entry in fs::read_dir(&dir)? {
            let path = entry?.path();
            let Some(id) = path
                .file_stem()
                .and_then(|s| s.to_str())
                .and_then(|s| s.parse::<Uuid>().ok())
            else {
                continue;
            };
            if path.extension().is_some_and(|e| e == "json") {
                let ledger: Ledger = serde_json::from_slice(&fs::read(&path)?)
                    .map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))?;
                sessions.insert(id, ledger);
            }
        }
        Ok(LocalAttestationService {
            dir: Some(dir),
            sessions: Mutex::new(sessions),
        })
    }

    pub fn dir(&self) -> Option<&Path> {
        self.dir.as_deref()
    }

    fn persist(&self, id: Uuid, ledger: &Ledger) -> Result<(), AttestError> {
        let Some(dir) = &self.dir else { return Ok(()) };
        let bytes =
            serde_json::to_vec_pretty(ledger).map_err(|e| AttestError::Internal(e.to_string()))?;
        let target = dir.join(format!("{id}.json"));
        let tmp = dir.join(format!(".{id}.json.tmp"));
        fs::write(&tmp, bytes)
            .and_then(|_| fs::rename(&tmp, &target))
            .map_err(|e| AttestError::Internal(e.to_string()))
    }
}

impl AttestationService for LocalAttestationService {
    fn attest(&self, session: Uuid, seq: u64, h: Digest32) -> Result<Digest32, AttestError> {
        let mut sessions = self.sessions.lock().expect("attestation lock");
        let ledger = sessions.entry(session).or_default();
        if let Some(existing) = ledger.records.get(&seq) {
            return if existing.h == h {
                Ok(existing.a)
            } else {
                Err(AttestError::Conflict(seq))
            };
        }
        if let Some((&last, _)) = ledger.records.last_key_value() {
            if seq < last {
                return Err(AttestError::OutOfOrder { seq, last });
            }
        }
        let mut nonce = [0u8; 32];
        rand::rng().fill_bytes(&mut nonce);
        let nonce = Digest32(nonce);
        let a = attestation_of(&h, &nonce);
        ledger.records.insert(
            seq,
            StoredRecord {
                seq,
                h,
                nonce,
                a,
                issued_at: Utc::now(),
            },
        );
        let snapshot = ledger.clone();
        self.persist(session, &snapshot)?;
        Ok(a)
    }

    fn verify(
        &self,
        session: Uuid,
        seq: u64,
        h: Digest32,
        next_prev: Digest32,
    ) -> Result<bool, AttestError> {
        let sessions = self.sessions.lock().expect("attestation lock");
        Ok(sessions
            .get(&session)
            .and_then(|l| l.records.get(&seq))
            .is_some_and(|r| r.h == h && attestation_of(&r.h, &r.nonce) == next_prev))
    }

    fn attestations(&self, session: Uuid) -> Result<Vec<AttestationView>, AttestError> {
        let sessions = self.sessions.lock().expect("attestation lock");
        Ok(sessions
            .get(&session)
            .map(|l| {
                l.records
                    .values()
                    .map(|r| AttestationView {
                        seq: r.seq,
                        h: r.h,
                        a: r.a,
                    })
                    .collect()
            })
            .unwrap_or_default())
    }
}

/// A service that is never reachable.
#[derive(Debug, Default, Clone, Copy)]
pub struct OfflineService;

impl AttestationService for OfflineService {
    fn attest(&self, _: Uuid, _: u64, _: Digest32) -> Result<Digest32, AttestError> {
        Err(AttestError::Unavailable("offline".into()))
    }
    fn verify(&self, _: Uuid, _: u64, _: Digest32, _: Digest32) -> Result<bool, AttestError> {
        Err(AttestError::Unavailable("offline".into()))
    }
    fn attestations(&self, _: Uuid) -> Result<Vec<AttestationView>, AttestError> {
        Err(AttestError::Unavailable("offline".into()))
    }
}

/// Wraps a service and makes the listed `attest` calls (counted from zero)
/// fail as unavailable. Verification passes through.
pub struct FlakyService<S> {
    pub inner: S,
    down: BTreeSet<u64>,
    calls: AtomicU64,
}

impl<S> FlakyService<S> {
    pub fn new(inner: S, down_calls: impl IntoIterator<Item = u64>) -> Self {
        FlakyService {
            inner,
            down: down_calls.into_iter().collect(),
            calls: AtomicU64::new(0),
        }
    }
}

impl<S: AttestationService> AttestationService for FlakyService<S> {
    fn attest(&self, session: Uuid, seq: u64, h: Digest32) -> Result<Digest32, AttestError> {
        let call = self.calls.fetch_add(1, Ordering::SeqCst);
        if self.down.contains(&call) {
            return Err(AttestError::Unavailable(format!(
                "injected outage on call {call}"
            )));
        }
        self.inner.attest(session, seq, h)
    }
    fn verify(
        &self,
        session: Uuid,
        seq: u64,
        h: Digest32,
        next_prev: Digest32,
    ) -> Result<bool, AttestError> {
        self.inner.verify(session, seq, h, next_prev)
    }
    fn attestations(&self, session: Uuid) -> Result<Vec<AttestationView>, AttestError> {
        self.inner.attestations(session)
    }
}
