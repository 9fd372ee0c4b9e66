//! On-disk cache of character tables and L-values.
//!
//! Every payload is stored next to the SHA-256 of its exact JSON text. A
//! file or line whose checksum does not match is discarded and recomputed.

use lfourth::characters::{character_group, CharacterGroup};
use lfourth::lfunc::{LValueCache, LValueRecord};
use serde::{Deserialize, Serialize};
use serde_json::value::RawValue;
use sha2::{Digest, Sha256};
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

#[derive(Serialize, Deserialize)]
struct Envelope<'a> {
    sha256: String,
    #[serde(borrow)]
    payload: &'a RawValue,
}

fn digest(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

fn seal(payload: &str) -> io::Result<String> {
    let raw = RawValue::from_string(payload.to_owned()).map_err(io::Error::other)?;
    serde_json::to_string(&Envelope { sha256: digest(payload), payload: &raw }).map_err(io::Error::other)
}

/// Payload text of a sealed line, if intact.
fn open(line: &str) -> Option<&str> {
    let env: Envelope = serde_json::from_str(line).ok()?;
    (digest(env.payload.get()) == env.sha256).then(|| env.payload.get())
}

fn write_atomic(path: &Path, contents: &str) -> io::Result<()> {
    let dir = path.parent().expect("cache paths have a parent");
    fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

pub struct LValueFile {
    pub cache: LValueCache,
    loaded: usize,
    dirty: bool,
}

#[derive(Debug, Clone)]
pub struct DiskCache {
    root: PathBuf,
    enabled: bool,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct CacheStats {
    pub char_files: u64,
    pub char_bytes: u64,
    pub lval_files: u64,
    pub lval_records: u64,
    pub lval_bytes: u64,
    pub corrupt_entries: u64,
}

impl DiskCache {
    pub fn new(root: PathBuf, enabled: bool) -> Self {
        DiskCache { root, enabled }
    }

    fn chars_path(&self, q: u64) -> PathBuf {
        self.root.join("chars").join(format!("q={q}.json"))
    }

    fn lvals_path(&self, q: u64) -> PathBuf {
        self.root.join("lvals").join(format!("q={q}.jsonl"))
    }

    pub fn group(&self, q: u64) -> Result<CharacterGroup, crate::CliError> {
        if !self.enabled {
            return Ok(character_group(q)?);
        }
        let path = self.chars_path(q);
        if let Ok(text) = fs::read_to_string(&path) {
            match open(text.trim_end()).and_then(|p| serde_json::from_str::<CharacterGroup>(p).ok()) {
                Some(g) if g.q == q => return Ok(g),
                _ => eprintln!("warning: {} failed its checksum; recomputing", path.display()),
            }
        }
        let group = character_group(q)?;
        let payload = serde_json::to_string(&group).map_err(io::Error::other)?;
        write_atomic(&path, &(seal(&payload)? + "\n"))?;
        Ok(group)
    }

    pub fn lvalues(&self, q: u64) -> LValueFile {
        let cache = LValueCache::new();
        if !self.enabled {
            return LValueFile { cache, loaded: 0, dirty: false };
        }
        let path = self.lvals_path(q);
        let Ok(text) = fs::read_to_string(&path) else {
            return LValueFile { cache, loaded: 0, dirty: false };
        };
        let mut bad = 0;
        for line in text.lines() {
            match open(line).and_then(|p| serde_json::from_str::<LValueRecord>(p).ok()) {
                Some(rec) if rec.q == q => cache.insert(rec),
                _ => bad += 1,
            }
        }
        if bad > 0 {
            eprintln!("warning: dropped {bad} corrupt line(s) from {}; recomputing", path.display());
        }
        LValueFile { loaded: cache.len(), cache, dirty: bad > 0 }
    }

    /// Rewrite the L-value file if records were added or bad lines dropped.
    pub fn store_lvalues(&self, q: u64, file: &LValueFile) -> io::Result<()> {
        if !self.enabled || (!file.dirty && file.cache.len() == file.loaded) {
            return Ok(());
        }
        let mut out = String::new();
        for rec in file.cache.records() {
            out += &seal(&serde_json::to_string(&rec).map_err(io::Error::other)?)?;
            out.push('\n');
        }
        write_atomic(&self.lvals_path(q), &out)
    }

    pub fn stats(&self) -> io::Result<CacheStats> {
        let mut st = CacheStats::default();
        for (path, lines) in files(&self.root.join("chars"))? {
            st.char_files += 1;
            st.char_bytes += fs::metadata(&path)?.len();
            st.corrupt_entries += lines.iter().filter(|l| open(l).is_none()).count() as u64;
        }
        for (path, lines) in files(&self.root.join("lvals"))? {
            st.lval_files += 1;
            st.lval_bytes += fs::metadata(&path)?.len();
            for l in &lines {
                if open(l).is_some() {
                    st.lval_records += 1;
                } else {
                    st.corrupt_entries += 1;
                }
            }
        }
        Ok(st)
    }

    /// Remove every cache file; returns how many were removed.
    pub fn clear(&self) -> io::Result<u64> {
        let mut n = 0;
        for sub in ["chars", "lvals"] {
            let dir = self.root.join(sub);
            n += files(&dir)?.len() as u64;
            if dir.exists() {
                fs::remove_dir_all(&dir)?;
            }
        }
        Ok(n)
    }
}

fn files(dir: &Path) -> io::Result<Vec<(PathBuf, Vec<String>)>> {
    let mut out = Vec::new();
    if !dir.exists() {
        return Ok(out);
    }
    for entry in fs::read_dir(dir)? {
        let path = entry?.path();
        if path.is_file() && path.file_name().is_some_and(|n| n.to_string_lossy().starts_with("q=")) {
            let text = fs::read_to_string(&path).unwrap_or_default();
            out.push((path, text.lines().map(str::to_owned).collect()));
        }
    }
    out.sort();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seal_roundtrip_and_tamper() {
        let line = seal(r#"{"a":1.5}"#).unwrap();
        assert_eq!(open(&line), Some(r#"{"a":1.5}"#));
        let bad = line.replace("1.5", "1.6");
        assert_eq!(open(&bad), None);
        assert_eq!(open(&line[..line.len() - 3]), None);
    }
}
