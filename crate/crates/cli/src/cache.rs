//! Binary cache of encoded training documents so repeated training runs
//! skip tokenization. Layout: magic "NCNN", version, provenance (seed and
//! config hash), document count and width, little-endian id arrays, then
//! one label byte per document. A cache whose provenance differs from the
//! current run is stale and gets rebuilt rather than trusted.

use std::path::Path;

use crate::binio::{Reader, Writer};
use crate::error::{CliError, Result};
use crate::io::Provenance;

const MAGIC: &[u8; 4] = b"NCNN";
const VERSION: u16 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct EncodedCache {
    pub provenance: Provenance,
    pub n_max: usize,
    /// Each document is exactly `n_max` ids, zero-padded at the tail.
    pub docs: Vec<Vec<u32>>,
    pub labels: Vec<bool>,
}

pub fn write_cache(path: &Path, cache: &EncodedCache) -> Result<()> {
    assert_eq!(cache.docs.len(), cache.labels.len());
    let mut w = Writer::new(MAGIC, VERSION);
    w.u64(cache.provenance.seed);
    let hash = cache.provenance.config_hash.as_bytes();
    w.u64(hash.len() as u64);
    w.raw(hash);
    w.u64(cache.docs.len() as u64);
    w.u64(cache.n_max as u64);
    for doc in &cache.docs {
        assert_eq!(doc.len(), cache.n_max);
        for &id in doc {
            w.u32(id);
        }
    }
    for &label in &cache.labels {
        w.u8(u8::from(label));
    }
    w.write_to(path)
}

pub fn read_cache(path: &Path) -> Result<EncodedCache> {
    let buf = std::fs::read(path).map_err(|e| CliError::in_file(path, e))?;
    let mut r = Reader::new(&buf, path);
    r.expect_magic(MAGIC, "dataset cache")?;
    r.expect_version(VERSION)?;
    let seed = r.u64()?;
    let hash_len = r.len_field("config hash")?;
    let config_hash = String::from_utf8(r.bytes(hash_len)?.to_vec())
        .map_err(|_| CliError::in_file(path, "config hash is not UTF-8"))?;
    let n_docs = r.len_field("document count")?;
    let n_max = r.len_field("document width")?;
    let mut docs = Vec::with_capacity(n_docs);
    for _ in 0..n_docs {
        let mut doc = Vec::with_capacity(n_max);
        for _ in 0..n_max {
            doc.push(r.u32()?);
        }
        docs.push(doc);
    }
    let mut labels = Vec::with_capacity(n_docs);
    for _ in 0..n_docs {
        labels.push(match r.u8()? {
            0 => false,
            1 => true,
            other => {
                return Err(CliError::in_file(path, format!("label byte {other} is not 0 or 1")))
            }
        });
    }
    r.finish()?;
    Ok(EncodedCache {
        provenance: Provenance { config_hash, seed },
        n_max,
        docs,
        labels,
    })
}

/// Returns the cached documents when the file exists and belongs to the
/// current run; a missing or stale cache yields `None`.
pub fn load_if_current(path: &Path, provenance: &Provenance) -> Result<Option<EncodedCache>> {
    if !path.exists() {
        return Ok(None);
    }
    let cache = read_cache(path)?;
    Ok(if cache.provenance == *provenance {
        Some(cache)
    } else {
        None
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> EncodedCache {
        EncodedCache {
            provenance: Provenance {
                config_hash: "deadbeef".to_string(),
                seed: 42,
            },
            n_max: 3,
            docs: vec![vec![2, 3, 0], vec![4, 0, 0]],
            labels: vec![true, false],
        }
    }

    #[test]
    fn cache_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cache.ncnn");
        let cache = sample();
        write_cache(&path, &cache).unwrap();
        assert_eq!(read_cache(&path).unwrap(), cache);
    }

    #[test]
    fn stale_cache_is_ignored_not_trusted() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cache.ncnn");
        let cache = sample();
        write_cache(&path, &cache).unwrap();
        assert!(load_if_current(&path, &cache.provenance).unwrap().is_some());
        let other = Provenance {
            config_hash: "deadbeef".to_string(),
            seed: 43,
        };
        assert!(load_if_current(&path, &other).unwrap().is_none());
        assert!(load_if_current(&dir.path().join("missing.ncnn"), &other)
            .unwrap()
            .is_none());
    }

    #[test]
    fn corrupt_magic_is_a_data_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cache.ncnn");
        std::fs::write(&path, b"JUNKxxxxxxxx").unwrap();
        let err = read_cache(&path).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn future_version_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cache.ncnn");
        let cache = sample();
        write_cache(&path, &cache).unwrap();
        let mut bytes = std::fs::read(&path).unwrap();
        bytes[4] = 9;
        std::fs::write(&path, &bytes).unwrap();
        let err = read_cache(&path).unwrap_err();
        assert!(err.to_string().contains("version 9"));
    }
}
