//! IO companion for the `biyu-core` engine: resource and corpus file
//! formats, the file-backed exchange cache, run orchestration and
//! manifests, evaluation over prediction files, audit worksheets and
//! editability trials, and plain-text report tables. The `biyu` binary
//! in this package wires it all into a CLI.

pub mod auditio;
pub mod cachestore;
pub mod configio;
pub mod corpus;
pub mod error;
pub mod evalio;
pub mod files;
#[cfg(feature = "live")]
pub mod live;
pub mod predictions;
pub mod report;
pub mod runner;

pub use error::{Error, Result};

/// Stub-backend fixture file for the CLI: responses keyed by digest or
/// template id, exactly the deterministic table the stub contract
/// requires.
#[derive(Debug, Clone, Default, serde::Serialize, serde::Deserialize)]
pub struct StubFixtureFile {
    #[serde(default)]
    pub templates: std::collections::BTreeMap<String, String>,
    #[serde(default)]
    pub digests: std::collections::BTreeMap<String, String>,
}

impl StubFixtureFile {
    pub fn load(path: &std::path::Path) -> Result<StubFixtureFile> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Parse {
            path: path.display().to_string(),
            line: 0,
            reason: e.to_string(),
        })
    }

    pub fn into_table(self) -> Result<biyu_core::gateway::FixtureTable> {
        let mut table = biyu_core::gateway::FixtureTable::new();
        for (template, response) in self.templates {
            table.insert_template(template, response);
        }
        for (hex, response) in self.digests {
            let digest = biyu_core::gateway::RequestDigest::from_hex(&hex)
                .ok_or_else(|| Error::Invalid(format!("bad digest {hex:?} in stub fixtures")))?;
            table.insert_digest(digest, response);
        }
        Ok(table)
    }
}
