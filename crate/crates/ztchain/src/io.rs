//! Chain files: one canonical JSON block per line.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use ztchain_core::ledger::{decode_jsonl, encode_jsonl, LedgerError};
use ztchain_core::{Chain, HashAlgorithm};

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{path}: {source}")]
    Format { path: PathBuf, source: LedgerError },
}

impl IoError {
    pub fn code(&self) -> &'static str {
        match self {
            IoError::Io { .. } => "IO_ERROR",
            IoError::Format { .. } => "FORMAT_ERROR",
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> IoError + '_ {
    move |source| IoError::Io { path: path.to_path_buf(), source }
}

/// Writes to a sibling temp file first so a crash never leaves a half
/// written chain behind.
pub fn save_chain(path: &Path, chain: &Chain) -> Result<(), IoError> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    let mut file = fs::File::create(&tmp).map_err(io_err(&tmp))?;
    file.write_all(encode_jsonl(chain).as_bytes()).map_err(io_err(&tmp))?;
    file.sync_all().map_err(io_err(&tmp))?;
    fs::rename(&tmp, path).map_err(io_err(path))
}

pub fn load_chain(path: &Path, algorithm: HashAlgorithm) -> Result<Chain, IoError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    decode_jsonl(&text, algorithm).map_err(|source| IoError::Format { path: path.to_path_buf(), source })
}

/// `Ok(None)` when the file does not exist yet.
pub fn load_chain_if_exists(path: &Path, algorithm: HashAlgorithm) -> Result<Option<Chain>, IoError> {
    match fs::metadata(path) {
        Ok(_) => load_chain(path, algorithm).map(Some),
        Err(e) if e.kind() == io::ErrorKind::NotFound => Ok(None),
        Err(e) => Err(io_err(path)(e)),
    }
}
