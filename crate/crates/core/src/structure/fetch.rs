//! AlphaFold DB download. This is the only place the crate touches the network.

use std::path::{Path, PathBuf};
use std::time::Duration;

/// Default file server; override with [`FetchConfig::base_url`].
pub const ALPHAFOLD_FILES_URL: &str = "https://alphafold.ebi.ac.uk/files";
/// Environment variable naming an on-disk cache directory.
pub const CACHE_DIR_ENV: &str = "VAFM_CACHE_DIR";

#[derive(Debug, thiserror::Error)]
pub enum FetchError {
    #[error("{0:?} is not a UniProt accession")]
    InvalidAccession(String),
    #[error("accession {0} is not in the AlphaFold DB")]
    NotFound(String),
    #[error("network error: {0}")]
    NetworkError(String),
    #[error("cache I/O error at {path}: {source}")]
    Cache {
        path: PathBuf,
        source: std::io::Error,
    },
}

#[derive(Debug, Clone)]
pub struct FetchConfig {
    pub base_url: String,
    pub cache_dir: Option<PathBuf>,
    pub timeout: Duration,
}

impl Default for FetchConfig {
    fn default() -> Self {
        FetchConfig {
            base_url: ALPHAFOLD_FILES_URL.to_string(),
            cache_dir: None,
            timeout: Duration::from_secs(60),
        }
    }
}

impl FetchConfig {
    /// Default config with `cache_dir` taken from `VAFM_CACHE_DIR` when set.
    pub fn from_env() -> Self {
        FetchConfig {
            cache_dir: std::env::var_os(CACHE_DIR_ENV).map(PathBuf::from),
            ..Default::default()
        }
    }
}

/// UniProt accession syntax:
/// `[OPQ][0-9][A-Z0-9]{3}[0-9]` or `[A-NR-Z][0-9]([A-Z][A-Z0-9]{2}[0-9]){1,2}`.
pub fn is_uniprot_accession(s: &str) -> bool {
    let b = s.as_bytes();
    let digit = |c: u8| c.is_ascii_digit();
    let upper = |c: u8| c.is_ascii_uppercase();
    let alnum = |c: u8| digit(c) || upper(c);
    match b.len() {
        6 if matches!(b[0], b'O' | b'P' | b'Q') => {
            digit(b[1]) && b[2..5].iter().all(|&c| alnum(c)) && digit(b[5])
        }
        6 | 10 => {
            let first_ok = upper(b[0]) && !matches!(b[0], b'O' | b'P' | b'Q');
            first_ok
                && digit(b[1])
                && b[2..]
                    .chunks(4)
                    .all(|g| upper(g[0]) && alnum(g[1]) && alnum(g[2]) && digit(g[3]))
        }
        _ => false,
    }
}

pub fn model_file_name(accession: &str) -> String {
    format!("AF-{accession}-F1-model_v4.pdb")
}

pub fn model_url(base_url: &str, accession: &str) -> String {
    format!(
        "{}/{}",
        base_url.trim_end_matches('/'),
        model_file_name(accession)
    )
}

/// Downloads the AlphaFold DB model for `accession` and returns the PDB text.
///
/// The accession is validated before any request is made. When a cache
/// directory is configured, a cached copy is returned without touching the
/// network and successful downloads are written back to it.
pub fn fetch_alphafold(accession: &str, cfg: &FetchConfig) -> Result<String, FetchError> {
    if !is_uniprot_accession(accession) {
        return Err(FetchError::InvalidAccession(accession.to_string()));
    }
    let cached = cfg
        .cache_dir
        .as_ref()
        .map(|d| d.join(model_file_name(accession)));
    if let Some(path) = &cached {
        if path.is_file() {
            log::info!("using cached {}", path.display());
            return std::fs::read_to_string(path).map_err(|source| FetchError::Cache {
                path: path.clone(),
                source,
            });
        }
    }

    let url = model_url(&cfg.base_url, accession);
    log::info!("fetching {url}");
    let agent: ureq::Agent = ureq::Agent::config_builder()
        .timeout_global(Some(cfg.timeout))
        .build()
        .into();
    let text = match agent.get(&url).call() {
        Ok(mut resp) => resp
            .body_mut()
            .read_to_string()
            .map_err(|e| FetchError::NetworkError(e.to_string()))?,
        Err(ureq::Error::StatusCode(404)) => {
            return Err(FetchError::NotFound(accession.to_string()))
        }
        Err(e) => return Err(FetchError::NetworkError(e.to_string())),
    };

    if let Some(path) = &cached {
        write_cache(path, &text)?;
    }
    Ok(text)
}

fn write_cache(path: &Path, text: &str) -> Result<(), FetchError> {
    let io = |source| FetchError::Cache {
        path: path.to_path_buf(),
        source,
    };
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(io)?;
    }
    std::fs::write(path, text).map_err(io)
}
