use super::CliError;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::path::Path;

/// Version string recorded in every manifest.
pub const VERSION: &str = concat!("v", env!("CARGO_PKG_VERSION"));

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub version: String,
    pub command: String,
    pub name: String,
    pub seed: u64,
    pub wall_time_s: f64,
    pub converged: Option<bool>,
    pub stop: Option<String>,
    /// numerical failure message when the run ended early
    pub failure: Option<String>,
    pub config: BTreeMap<String, String>,
    pub summary: BTreeMap<String, serde_json::Value>,
    /// file name to hex SHA-256
    pub artifacts: BTreeMap<String, String>,
}

impl Manifest {
    pub fn write(&self, dir: &Path) -> Result<(), CliError> {
        let path = dir.join(MANIFEST_FILE);
        let text = serde_json::to_string_pretty(self).expect("manifest serializes");
        std::fs::write(&path, text + "\n").map_err(|e| CliError::Io { path, source: e })
    }

    pub fn read(dir: &Path) -> Result<Self, CliError> {
        let path = dir.join(MANIFEST_FILE);
        if !path.exists() {
            return Err(CliError::MissingFile(path));
        }
        let text = std::fs::read_to_string(&path).map_err(|e| CliError::Io {
            path: path.clone(),
            source: e,
        })?;
        serde_json::from_str(&text).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))
    }
}

pub fn sha256_file(path: &Path) -> Result<String, CliError> {
    let bytes = std::fs::read(path).map_err(|e| CliError::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

/// Hashes of the named files inside `dir`.
pub fn hash_artifacts(dir: &Path, names: &[String]) -> Result<BTreeMap<String, String>, CliError> {
    names.iter().map(|n| Ok((n.clone(), sha256_file(&dir.join(n))?))).collect()
}

/// Names whose hashes differ between two artifact maps, including files
/// present in only one of them.
pub fn hash_mismatches(expected: &BTreeMap<String, String>, got: &BTreeMap<String, String>) -> Vec<String> {
    let mut out: Vec<String> = expected
        .iter()
        .filter(|(k, v)| got.get(*k) != Some(*v))
        .map(|(k, _)| k.clone())
        .collect();
    out.extend(got.keys().filter(|k| !expected.contains_key(*k)).cloned());
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sha256_of_known_input() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("abc.txt");
        std::fs::write(&p, "abc").unwrap();
        assert_eq!(
            sha256_file(&p).unwrap(),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn mismatch_detection() {
        let a: BTreeMap<String, String> = [("x".into(), "1".into()), ("y".into(), "2".into())].into();
        let mut b = a.clone();
        assert!(hash_mismatches(&a, &b).is_empty());
        b.insert("y".into(), "3".into());
        b.insert("z".into(), "4".into());
        assert_eq!(hash_mismatches(&a, &b), vec!["y".to_string(), "z".to_string()]);
    }

    #[test]
    fn manifest_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let m = Manifest {
            version: VERSION.into(),
            command: "solve".into(),
            name: "t".into(),
            seed: 9,
            wall_time_s: 0.5,
            converged: None,
            stop: None,
            failure: None,
            config: BTreeMap::new(),
            summary: BTreeMap::new(),
            artifacts: BTreeMap::new(),
        };
        m.write(dir.path()).unwrap();
        assert_eq!(Manifest::read(dir.path()).unwrap(), m);
        assert_eq!(VERSION, "v0.1.0");
    }
}
