use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

pub const LINEAR_LAGRANGIAN: &str =
    "i*hbar*psi^* * dpsi/dt - (hbar^2/(2*m))*dot(grad(psi*),grad(psi)) - V*psi^* *psi";

const BUNDLED: &[(&str, &str)] = &[
    ("gp_m2.lag", include_str!("../../corpus/gp_m2.lag")),
    ("gradient_coupling.lag", include_str!("../../corpus/gradient_coupling.lag")),
    ("gradient_quartic.lag", include_str!("../../corpus/gradient_quartic.lag")),
    ("linear.lag", include_str!("../../corpus/linear.lag")),
    ("log_density.lag", include_str!("../../corpus/log_density.lag")),
    ("log_power_m2.lag", include_str!("../../corpus/log_power_m2.lag")),
    ("phase_log.lag", include_str!("../../corpus/phase_log.lag")),
    ("power_m4.lag", include_str!("../../corpus/power_m4.lag")),
    ("quintic_m3.lag", include_str!("../../corpus/quintic_m3.lag")),
    ("root_n3.lag", include_str!("../../corpus/root_n3.lag")),
];

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("corpus missing: no .lag files in {0}")]
    Missing(PathBuf),
    #[error("reading {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Lagrangian sources keyed by file name.
#[derive(Clone, Debug, Default)]
pub struct Corpus {
    files: BTreeMap<String, String>,
}

impl Corpus {
    /// The files compiled into the library.
    pub fn bundled() -> Corpus {
        Corpus {
            files: BTreeMap::from_iter(BUNDLED.iter().map(|(k, v)| (k.to_string(), v.to_string()))),
        }
    }

    /// Directory shipped with the source tree.
    pub fn default_dir() -> PathBuf {
        Path::new(env!("CARGO_MANIFEST_DIR")).join("corpus")
    }

    pub fn load(dir: &Path) -> Result<Corpus, CorpusError> {
        let entries = fs::read_dir(dir).map_err(|_| CorpusError::Missing(dir.to_path_buf()))?;
        let mut files = BTreeMap::new();
        for entry in entries {
            let path = entry
                .map_err(|source| CorpusError::Io {
                    path: dir.to_path_buf(),
                    source,
                })?
                .path();
            if path.extension().is_some_and(|e| e == "lag") {
                let text = fs::read_to_string(&path).map_err(|source| CorpusError::Io {
                    path: path.clone(),
                    source,
                })?;
                let name = path.file_name().unwrap().to_string_lossy().into_owned();
                files.insert(name, text);
            }
        }
        if files.is_empty() {
            return Err(CorpusError::Missing(dir.to_path_buf()));
        }
        Ok(Corpus { files })
    }

    pub fn get(&self, name: &str) -> Option<&str> {
        self.files.get(name).map(String::as_str)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.files.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.files.len()
    }

    pub fn is_empty(&self) -> bool {
        self.files.is_empty()
    }
}
