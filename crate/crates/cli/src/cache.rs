//! On-disk cache of level tables.
//!
//! Layout, all integers little-endian:
//! `magic[8] version:u32 key[32] k:u32 depth:u32 layout:u8 levels:u32`,
//! then per level `len:u64` followed by `len` log-lengths, `len` log-weights
//! and, for type-class tables, `len` log-multiplicities as `f64`, and finally
//! the SHA-256 of everything before it.

use std::path::{Path, PathBuf};

use cookiezeta::levels::{Layout, Level, LevelTable, MAX_COMPRESSED_LEVEL};
use serde::Serialize;
use sha2::{Digest, Sha256};

pub const MAGIC: &[u8; 8] = b"CZLEVELS";
pub const VERSION: u32 = 1;
const HEADER: usize = 8 + 4 + 32 + 4 + 4 + 1 + 4;
const MAX_K: u32 = 64;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CacheError {
    #[error("CacheCorrupt: file is truncated")]
    Truncated,
    #[error("CacheCorrupt: checksum mismatch")]
    Checksum,
    #[error("CacheCorrupt: bad magic")]
    Magic,
    #[error("CacheCorrupt: unsupported version {0}")]
    Version(u32),
    #[error("CacheCorrupt: key does not match the configuration")]
    Key,
    #[error("CacheCorrupt: {0}")]
    Malformed(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CacheStatus {
    Disabled,
    Hit,
    Miss,
    /// The stored file failed to decode and was rebuilt.
    Recomputed,
}

/// Identity of a level table: what it was computed from.
#[derive(Debug, Serialize)]
pub struct CacheKey<'a> {
    pub map: &'a crate::config::MapSpec,
    pub potential: &'a crate::config::PotentialSpec,
    pub depth: usize,
    pub levels: usize,
}

impl CacheKey<'_> {
    pub fn digest(&self) -> [u8; 32] {
        Sha256::digest(serde_json::to_vec(self).expect("key serializes")).into()
    }
}

pub fn encode(table: &LevelTable, key: &[u8; 32]) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(key);
    out.extend_from_slice(&(table.k() as u32).to_le_bytes());
    out.extend_from_slice(&(table.depth() as u32).to_le_bytes());
    out.push(table.layout().code());
    out.extend_from_slice(&(table.max_level() as u32).to_le_bytes());
    for level in table.levels() {
        out.extend_from_slice(&(level.len() as u64).to_le_bytes());
        let mut put = |values: &[f64]| {
            values
                .iter()
                .for_each(|v| out.extend_from_slice(&v.to_le_bytes()))
        };
        put(&level.log_length);
        put(&level.log_weight);
        if let Some(m) = &level.log_multiplicity {
            put(m);
        }
    }
    let sum = Sha256::digest(&out);
    out.extend_from_slice(&sum);
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], CacheError> {
        let end = self.pos.checked_add(n).ok_or(CacheError::Truncated)?;
        let s = self.bytes.get(self.pos..end).ok_or(CacheError::Truncated)?;
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32, CacheError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64, CacheError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64s(&mut self, n: usize) -> Result<Vec<f64>, CacheError> {
        let raw = self.take(n.checked_mul(8).ok_or(CacheError::Truncated)?)?;
        Ok(raw
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect())
    }

    fn remaining(&self) -> usize {
        self.bytes.len() - self.pos
    }
}

/// Decodes a cache file; `expected_key` additionally pins the identity.
pub fn decode(bytes: &[u8], expected_key: Option<&[u8; 32]>) -> Result<LevelTable, CacheError> {
    if bytes.len() < HEADER + 32 {
        return Err(CacheError::Truncated);
    }
    let (body, sum) = bytes.split_at(bytes.len() - 32);
    if Sha256::digest(body).as_slice() != sum {
        return Err(CacheError::Checksum);
    }
    let mut r = Reader {
        bytes: body,
        pos: 0,
    };
    if r.take(8)? != MAGIC {
        return Err(CacheError::Magic);
    }
    let version = r.u32()?;
    if version != VERSION {
        return Err(CacheError::Version(version));
    }
    let key = r.take(32)?;
    if expected_key.is_some_and(|k| k.as_slice() != key) {
        return Err(CacheError::Key);
    }
    let k = r.u32()?;
    let depth = r.u32()? as usize;
    let layout = Layout::from_code(r.take(1)?[0])
        .ok_or_else(|| CacheError::Malformed("unknown layout".into()))?;
    let count = r.u32()? as usize;
    if !(2..=MAX_K).contains(&k) {
        return Err(CacheError::Malformed(format!("branch count {k}")));
    }
    if count == 0 || count > MAX_COMPRESSED_LEVEL {
        return Err(CacheError::Malformed(format!("level count {count}")));
    }
    let arrays = if layout == Layout::TypeClasses { 3 } else { 2 };
    let mut levels = Vec::with_capacity(count.min(64));
    for n in 1..=count {
        let len = r.u64()?;
        if len.saturating_mul(8 * arrays) > r.remaining() as u64 {
            return Err(CacheError::Truncated);
        }
        let len = len as usize;
        let log_length = r.f64s(len)?;
        let log_weight = r.f64s(len)?;
        let log_multiplicity = if layout == Layout::TypeClasses {
            Some(r.f64s(len)?)
        } else {
            None
        };
        levels.push(Level {
            n,
            log_length,
            log_weight,
            log_multiplicity,
        });
    }
    if r.remaining() != 0 {
        return Err(CacheError::Malformed("trailing bytes".into()));
    }
    LevelTable::from_levels(k as usize, depth, layout, levels)
        .map_err(|e| CacheError::Malformed(e.to_string()))
}

pub fn path_for(dir: &Path, key: &[u8; 32]) -> PathBuf {
    dir.join(format!("levels-{}.bin", hex::encode(key)))
}

/// Loads the table for `key` from `dir`, or builds it with `build` and
/// stores it. A file that fails to decode is rebuilt and overwritten.
pub fn load_or_build<F>(
    dir: Option<&Path>,
    key: &[u8; 32],
    build: F,
) -> Result<(LevelTable, CacheStatus), crate::CliError>
where
    F: FnOnce() -> Result<LevelTable, crate::CliError>,
{
    let Some(dir) = dir else {
        return Ok((build()?, CacheStatus::Disabled));
    };
    let path = path_for(dir, key);
    let status = match std::fs::read(&path) {
        Ok(bytes) => match decode(&bytes, Some(key)) {
            Ok(table) => return Ok((table, CacheStatus::Hit)),
            Err(_) => CacheStatus::Recomputed,
        },
        Err(_) => CacheStatus::Miss,
    };
    let table = build()?;
    std::fs::create_dir_all(dir)?;
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, encode(&table, key))?;
    std::fs::rename(&tmp, &path)?;
    Ok((table, status))
}

#[cfg(test)]
mod tests {
    use super::*;
    use cookiezeta::{fixtures, Potential};

    fn sample(compressed: bool) -> LevelTable {
        let map = fixtures::cantor();
        let psi = Potential::bernoulli(&[0.3, 0.7]);
        if compressed {
            LevelTable::type_classes(&map, &psi, 6).unwrap()
        } else {
            LevelTable::enumerate(&map, &psi, 6, 4).unwrap()
        }
    }

    #[test]
    fn round_trip_is_exact() {
        for compressed in [false, true] {
            let t = sample(compressed);
            let bytes = encode(&t, &[7; 32]);
            assert_eq!(decode(&bytes, Some(&[7; 32])).unwrap(), t);
            assert_eq!(encode(&decode(&bytes, None).unwrap(), &[7; 32]), bytes);
        }
    }

    #[test]
    fn corruption_is_detected() {
        let bytes = encode(&sample(false), &[1; 32]);
        assert_eq!(
            decode(&bytes[..bytes.len() - 1], None).unwrap_err(),
            CacheError::Checksum
        );
        assert_eq!(
            decode(&bytes[..10], None).unwrap_err(),
            CacheError::Truncated
        );
        let mut flipped = bytes.clone();
        flipped[60] ^= 1;
        assert_eq!(decode(&flipped, None).unwrap_err(), CacheError::Checksum);
        assert_eq!(decode(&bytes, Some(&[2; 32])).unwrap_err(), CacheError::Key);
    }

    #[test]
    fn truncated_file_is_rebuilt() {
        let dir = tempfile::tempdir().unwrap();
        let key = [3; 32];
        let (_, s) = load_or_build(Some(dir.path()), &key, || Ok(sample(false))).unwrap();
        assert_eq!(s, CacheStatus::Miss);
        let (_, s) = load_or_build(Some(dir.path()), &key, || unreachable!()).unwrap();
        assert_eq!(s, CacheStatus::Hit);
        let path = path_for(dir.path(), &key);
        let bytes = std::fs::read(&path).unwrap();
        std::fs::write(&path, &bytes[..bytes.len() / 2]).unwrap();
        let (t, s) = load_or_build(Some(dir.path()), &key, || Ok(sample(false))).unwrap();
        assert_eq!(s, CacheStatus::Recomputed);
        assert_eq!(t, sample(false));
        assert_eq!(std::fs::read(&path).unwrap(), bytes);
    }
}
