//! LLM backend contract and the deterministic mock used for tests and
//! reproducible pipeline runs.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};

use sha2::{Digest, Sha256};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum BackendError {
    #[error("backend transport failure: {0}")]
    Transport(String),
    #[error("no canned response for request digest {digest}")]
    MissingFixture { digest: String },
}

/// Two text fields in, one text field out.
pub trait LlmBackend: Send + Sync {
    fn name(&self) -> &str;
    fn complete(&self, system: &str, user: &str) -> Result<String, BackendError>;
}

/// Stable digest of a (system, user) request pair; used as the fixture file
/// name for the mock backend.
pub fn request_digest(system: &str, user: &str) -> String {
    let mut hasher = Sha256::new();
    hasher.update((system.len() as u64).to_le_bytes());
    hasher.update(system.as_bytes());
    hasher.update(user.as_bytes());
    let digest = hasher.finalize();
    digest[..16].iter().map(|b| format!("{b:02x}")).collect()
}

/// Write one canned response into a fixture directory, returning its path.
pub fn write_fixture(
    dir: &Path,
    system: &str,
    user: &str,
    response: &str,
) -> std::io::Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(format!("{}.txt", request_digest(system, user)));
    std::fs::write(&path, response)?;
    Ok(path)
}

/// Deterministic mock backend: responses are looked up by request digest.
///
/// Identical (system, user) inputs always return identical output; unknown
/// requests are a hard error so fixture drift surfaces immediately.
pub struct MockBackend {
    responses: BTreeMap<String, String>,
}

impl MockBackend {
    pub fn new() -> Self {
        MockBackend {
            responses: BTreeMap::new(),
        }
    }

    /// Load every `<digest>.txt` file from a fixture directory.
    pub fn from_dir(dir: &Path) -> std::io::Result<Self> {
        let mut responses = BTreeMap::new();
        for entry in std::fs::read_dir(dir)? {
            let path = entry?.path();
            if path.extension().and_then(|e| e.to_str()) == Some("txt") {
                if let Some(stem) = path.file_stem().and_then(|s| s.to_str()) {
                    responses.insert(stem.to_string(), std::fs::read_to_string(&path)?);
                }
            }
        }
        Ok(MockBackend { responses })
    }

    /// Register a canned response for a concrete request.
    pub fn insert(&mut self, system: &str, user: &str, response: &str) {
        self.responses
            .insert(request_digest(system, user), response.to_string());
    }

    pub fn from_pairs<'a>(pairs: impl IntoIterator<Item = (&'a str, &'a str, &'a str)>) -> Self {
        let mut backend = MockBackend::new();
        for (system, user, response) in pairs {
            backend.insert(system, user, response);
        }
        backend
    }

    pub fn len(&self) -> usize {
        self.responses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.responses.is_empty()
    }
}

impl Default for MockBackend {
    fn default() -> Self {
        MockBackend::new()
    }
}

impl LlmBackend for MockBackend {
    fn name(&self) -> &str {
        "mock"
    }

    fn complete(&self, system: &str, user: &str) -> Result<String, BackendError> {
        let digest = request_digest(system, user);
        self.responses
            .get(&digest)
            .cloned()
            .ok_or(BackendError::MissingFixture { digest })
    }
}

/// Adapter for a real model behind a local process boundary.
///
/// The request is sent to the command's stdin as a JSON object with `system`
/// and `user` fields; stdout is taken verbatim as the response. Secrets reach
/// the process through an environment variable named in the configuration,
/// never through arguments or the manifest.
pub struct CommandBackend {
    name: String,
    command: PathBuf,
    args: Vec<String>,
    secret_env: Option<String>,
}

impl CommandBackend {
    pub fn new(
        name: &str,
        command: PathBuf,
        args: Vec<String>,
        secret_env: Option<String>,
    ) -> Self {
        CommandBackend {
            name: name.to_string(),
            command,
            args,
            secret_env,
        }
    }
}

impl LlmBackend for CommandBackend {
    fn name(&self) -> &str {
        &self.name
    }

    fn complete(&self, system: &str, user: &str) -> Result<String, BackendError> {
        let payload = serde_json::json!({ "system": system, "user": user });
        let mut cmd = Command::new(&self.command);
        cmd.args(&self.args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::null());
        if let Some(var) = &self.secret_env {
            match std::env::var(var) {
                Ok(value) => {
                    cmd.env(var, value);
                }
                Err(_) => {
                    return Err(BackendError::Transport(format!(
                        "secret environment variable {var} is not set"
                    )))
                }
            }
        }
        let mut child = cmd
            .spawn()
            .map_err(|e| BackendError::Transport(format!("spawn {:?}: {e}", self.command)))?;
        child
            .stdin
            .as_mut()
            .expect("stdin piped")
            .write_all(payload.to_string().as_bytes())
            .map_err(|e| BackendError::Transport(format!("write: {e}")))?;
        let out = child
            .wait_with_output()
            .map_err(|e| BackendError::Transport(format!("wait: {e}")))?;
        if !out.status.success() {
            return Err(BackendError::Transport(format!(
                "backend exited with {}",
                out.status
            )));
        }
        String::from_utf8(out.stdout).map_err(|e| BackendError::Transport(format!("utf8: {e}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digest_is_stable_and_unambiguous() {
        let a = request_digest("sys", "user");
        assert_eq!(a, request_digest("sys", "user"));
        // length prefix keeps ("ab","c") distinct from ("a","bc")
        assert_ne!(request_digest("ab", "c"), request_digest("a", "bc"));
    }

    #[test]
    fn mock_returns_registered_response() {
        let mut mock = MockBackend::new();
        mock.insert("s", "u", "out");
        assert_eq!(mock.complete("s", "u").unwrap(), "out");
        assert!(matches!(
            mock.complete("s", "other"),
            Err(BackendError::MissingFixture { .. })
        ));
    }

    #[test]
    fn mock_round_trips_through_fixture_dir() {
        let dir = tempfile::tempdir().unwrap();
        write_fixture(dir.path(), "sys", "user", "payload").unwrap();
        let mock = MockBackend::from_dir(dir.path()).unwrap();
        assert_eq!(mock.len(), 1);
        assert_eq!(mock.complete("sys", "user").unwrap(), "payload");
    }
}
