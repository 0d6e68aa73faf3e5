use semver::Version;

pub const SCHEMA_VERSION: &str = "1.0.0";

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum VersionError {
    #[error("schema_version {0:?} is not a semantic version")]
    Malformed(String),
    #[error("unsupported schema major version {found} (this build reads {supported}.x)")]
    UnsupportedMajor { found: u64, supported: u64 },
}

/// Unknown major versions are refused; newer minors are read with a warning.
pub fn check_version(found: &str) -> Result<(), VersionError> {
    let ours = Version::parse(SCHEMA_VERSION).expect("valid constant");
    let theirs = Version::parse(found).map_err(|_| VersionError::Malformed(found.to_string()))?;
    if theirs.major != ours.major {
        return Err(VersionError::UnsupportedMajor {
            found: theirs.major,
            supported: ours.major,
        });
    }
    if theirs.minor > ours.minor {
        log::warn!("reading schema_version {found} written by a newer minor release");
    }
    Ok(())
}
