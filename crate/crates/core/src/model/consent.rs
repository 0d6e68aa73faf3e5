//! Consent registry: who may appear unblurred, and for whom.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConsentScope {
    /// Anyone may record this person unblurred.
    Global,
    /// Only the listed wearers may.
    GrantedTo(Vec<String>),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConsentRecord {
    pub person_id: String,
    /// Opaque token the face matcher uses to recognise this person.
    pub face_signature: String,
    pub scope: ConsentScope,
}

impl ConsentRecord {
    pub fn new(
        person_id: impl Into<String>,
        face_signature: impl Into<String>,
        scope: ConsentScope,
    ) -> Self {
        ConsentRecord {
            person_id: person_id.into(),
            face_signature: face_signature.into(),
            scope,
        }
    }

    pub fn permits(&self, wearer: &str) -> bool {
        match &self.scope {
            ConsentScope::Global => true,
            ConsentScope::GrantedTo(subjects) => subjects.iter().any(|s| s == wearer),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ConsentError {
    #[error("consent for {0:?} already exists")]
    Duplicate(String),
    #[error("no consent record for {0:?}")]
    NotFound(String),
    #[error("person_id and face_signature must be non-empty")]
    Empty,
}

/// Consent records keyed by person id.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "Vec<ConsentRecord>", into = "Vec<ConsentRecord>")]
pub struct ConsentRegistry {
    records: BTreeMap<String, ConsentRecord>,
}

impl From<Vec<ConsentRecord>> for ConsentRegistry {
    fn from(records: Vec<ConsentRecord>) -> Self {
        ConsentRegistry {
            records: records
                .into_iter()
                .map(|r| (r.person_id.clone(), r))
                .collect(),
        }
    }
}

impl From<ConsentRegistry> for Vec<ConsentRecord> {
    fn from(reg: ConsentRegistry) -> Self {
        reg.records.into_values().collect()
    }
}

impl ConsentRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, record: ConsentRecord) -> Result<(), ConsentError> {
        if record.person_id.is_empty() || record.face_signature.is_empty() {
            return Err(ConsentError::Empty);
        }
        if self.records.contains_key(&record.person_id) {
            return Err(ConsentError::Duplicate(record.person_id));
        }
        self.records.insert(record.person_id.clone(), record);
        Ok(())
    }

    pub fn remove(&mut self, person_id: &str) -> Result<ConsentRecord, ConsentError> {
        self.records
            .remove(person_id)
            .ok_or_else(|| ConsentError::NotFound(person_id.to_string()))
    }

    pub fn get(&self, person_id: &str) -> Option<&ConsentRecord> {
        self.records.get(person_id)
    }

    pub fn by_signature(&self, signature: &str) -> Option<&ConsentRecord> {
        self.records
            .values()
            .find(|r| r.face_signature == signature)
    }

    /// Whether `person_id` may appear unblurred on `wearer`'s recordings.
    /// Unknown people never may.
    pub fn permits(&self, person_id: Option<&str>, wearer: &str) -> bool {
        person_id
            .and_then(|p| self.records.get(p))
            .is_some_and(|r| r.permits(wearer))
    }

    pub fn records(&self) -> impl Iterator<Item = &ConsentRecord> {
        self.records.values()
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(id: &str, scope: ConsentScope) -> ConsentRecord {
        ConsentRecord {
            person_id: id.into(),
            face_signature: format!("sig-{id}"),
            scope,
        }
    }

    #[test]
    fn scope_rules() {
        let mut reg = ConsentRegistry::new();
        reg.insert(rec("celebrity", ConsentScope::Global)).unwrap();
        reg.insert(rec("spouse", ConsentScope::GrantedTo(vec!["alice".into()])))
            .unwrap();
        assert!(reg.permits(Some("celebrity"), "bob"));
        assert!(reg.permits(Some("spouse"), "alice"));
        assert!(!reg.permits(Some("spouse"), "bob"));
        assert!(!reg.permits(Some("stranger"), "alice"));
        assert!(!reg.permits(None, "alice"));
    }

    #[test]
    fn person_id_is_unique() {
        let mut reg = ConsentRegistry::new();
        reg.insert(rec("a", ConsentScope::Global)).unwrap();
        assert_eq!(
            reg.insert(rec("a", ConsentScope::GrantedTo(vec![]))),
            Err(ConsentError::Duplicate("a".into()))
        );
        reg.remove("a").unwrap();
        assert!(reg.remove("a").is_err());
    }

    #[test]
    fn scope_json_shape() {
        let json = serde_json::to_string(&vec![
            rec("a", ConsentScope::Global),
            rec("b", ConsentScope::GrantedTo(vec!["s1".into()])),
        ])
        .unwrap();
        assert!(json.contains(r#""scope":"global""#));
        assert!(json.contains(r#""scope":{"granted_to":["s1"]}"#));
        let reg: ConsentRegistry = serde_json::from_str(&json).unwrap();
        assert_eq!(reg.len(), 2);
    }
}
