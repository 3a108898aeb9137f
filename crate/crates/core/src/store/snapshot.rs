//! Binary snapshot files.
//!
//! Layout (all integers little-endian):
//!
//! ```text
//! magic    8 bytes  "MOTRJSNP"
//! version  u32
//! count    u32      number of sections
//! section  tag [u8; 4], length u64, payload (JSON)   repeated `count` times
//! checksum 32 bytes SHA-256 of everything before it
//! ```

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::store::{Collections, IndexConfig, TrajectoryStore};

pub const SNAPSHOT_VERSION: u32 = 1;
const MAGIC: &[u8; 8] = b"MOTRJSNP";
const HEADER_LEN: usize = 16;
const CHECKSUM_LEN: usize = 32;

#[derive(Serialize, Deserialize)]
struct Meta {
    revision: u64,
    index_config: Option<IndexConfig>,
}

fn json<T: Serialize>(v: &T) -> Vec<u8> {
    serde_json::to_vec(v).expect("store collections serialize")
}

pub fn write_snapshot(store: &TrajectoryStore) -> Vec<u8> {
    let d = &store.data;
    let meta = Meta {
        revision: store.revision(),
        index_config: store.index_config(),
    };
    let sections: [(&[u8; 4], Vec<u8>); 11] = [
        (b"META", json(&meta)),
        (b"EVNT", json(&d.events)),
        (b"RAWT", json(&d.raw)),
        (b"STRC", json(&d.structured)),
        (b"SEMA", json(&d.semantic)),
        (b"REGN", json(&d.regions)),
        (b"ACTV", json(&d.activities)),
        (b"PROC", json(&d.processes)),
        (b"ASSC", json(&d.associations)),
        (b"DEVC", json(&d.devices)),
        (b"OBSV", json(&d.observations)),
    ];
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&SNAPSHOT_VERSION.to_le_bytes());
    out.extend_from_slice(&(sections.len() as u32).to_le_bytes());
    for (tag, payload) in &sections {
        out.extend_from_slice(*tag);
        out.extend_from_slice(&(payload.len() as u64).to_le_bytes());
        out.extend_from_slice(payload);
    }
    let digest = Sha256::digest(&out);
    out.extend_from_slice(&digest);
    out
}

struct Sections<'a> {
    body: &'a [u8],
}

impl<'a> Sections<'a> {
    fn next(&mut self) -> Result<([u8; 4], &'a [u8])> {
        if self.body.len() < 12 {
            return Err(Error::SnapshotFormat("section header runs past end of file".into()));
        }
        let tag: [u8; 4] = self.body[..4].try_into().expect("4 bytes");
        let len = u64::from_le_bytes(self.body[4..12].try_into().expect("8 bytes"));
        let len = usize::try_from(len)
            .ok()
            .filter(|&l| l <= self.body.len() - 12)
            .ok_or_else(|| Error::SnapshotFormat("section length runs past end of file".into()))?;
        let payload = &self.body[12..12 + len];
        self.body = &self.body[12 + len..];
        Ok((tag, payload))
    }
}

fn decode<T: DeserializeOwned>(tag: &[u8; 4], payload: &[u8]) -> Result<T> {
    serde_json::from_slice(payload)
        .map_err(|e| Error::SnapshotFormat(format!("section {}: {e}", String::from_utf8_lossy(tag))))
}

pub fn read_snapshot(bytes: &[u8]) -> Result<TrajectoryStore> {
    let magic_len = bytes.len().min(MAGIC.len());
    if bytes[..magic_len] != MAGIC[..magic_len] {
        return Err(Error::SnapshotFormat("not a snapshot file (bad magic)".into()));
    }
    if bytes.len() < HEADER_LEN + CHECKSUM_LEN {
        return Err(Error::SnapshotChecksum(format!(
            "file is truncated ({} bytes)",
            bytes.len()
        )));
    }
    let version = u32::from_le_bytes(bytes[8..12].try_into().expect("4 bytes"));
    if version != SNAPSHOT_VERSION {
        return Err(Error::SnapshotVersion {
            found: version,
            expected: SNAPSHOT_VERSION,
        });
    }
    let (content, stored) = bytes.split_at(bytes.len() - CHECKSUM_LEN);
    if Sha256::digest(content).as_slice() != stored {
        return Err(Error::SnapshotChecksum(
            "content does not match trailing checksum (truncated or corrupted)".into(),
        ));
    }
    let count = u32::from_le_bytes(content[12..16].try_into().expect("4 bytes"));
    let mut sections = Sections {
        body: &content[HEADER_LEN..],
    };
    let mut meta: Option<Meta> = None;
    let mut data = Collections::default();
    for _ in 0..count {
        let (tag, payload) = sections.next()?;
        match &tag {
            b"META" => meta = Some(decode(&tag, payload)?),
            b"EVNT" => data.events = decode(&tag, payload)?,
            b"RAWT" => data.raw = decode(&tag, payload)?,
            b"STRC" => data.structured = decode(&tag, payload)?,
            b"SEMA" => data.semantic = decode(&tag, payload)?,
            b"REGN" => data.regions = decode(&tag, payload)?,
            b"ACTV" => data.activities = decode(&tag, payload)?,
            b"PROC" => data.processes = decode(&tag, payload)?,
            b"ASSC" => data.associations = decode(&tag, payload)?,
            b"DEVC" => data.devices = decode(&tag, payload)?,
            b"OBSV" => data.observations = decode(&tag, payload)?,
            other => {
                return Err(Error::SnapshotFormat(format!(
                    "unknown section {}",
                    String::from_utf8_lossy(other)
                )))
            }
        }
    }
    if !sections.body.is_empty() {
        return Err(Error::SnapshotFormat("trailing bytes after last section".into()));
    }
    let meta = meta.ok_or_else(|| Error::SnapshotFormat("missing META section".into()))?;
    TrajectoryStore::from_parts(data, meta.revision, meta.index_config)
}

pub fn save_snapshot(path: impl AsRef<Path>, store: &TrajectoryStore) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, write_snapshot(store)).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn load_snapshot(path: impl AsRef<Path>) -> Result<TrajectoryStore> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    read_snapshot(&bytes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::store::canonical_export;

    #[test]
    fn empty_round_trip() {
        let s = TrajectoryStore::new();
        let back = read_snapshot(&write_snapshot(&s)).unwrap();
        assert_eq!(canonical_export(&back), canonical_export(&s));
        assert_eq!(back.revision(), 0);
    }

    #[test]
    fn every_truncation_is_a_checksum_error() {
        let bytes = write_snapshot(&TrajectoryStore::new());
        for cut in 8..bytes.len() {
            match read_snapshot(&bytes[..cut]) {
                Err(Error::SnapshotChecksum(_)) => {}
                other => panic!("cut at {cut}: {other:?}"),
            }
        }
    }

    #[test]
    fn version_and_magic_errors_are_distinct() {
        let mut bytes = write_snapshot(&TrajectoryStore::new());
        bytes[8] = 9;
        assert!(matches!(
            read_snapshot(&bytes),
            Err(Error::SnapshotVersion { found: 9, .. })
        ));
        assert!(matches!(read_snapshot(b"hello world"), Err(Error::SnapshotFormat(_))));
        let missing = load_snapshot("/nonexistent/dir/snap.bin").unwrap_err();
        assert!(matches!(missing, Error::Io { .. }));
    }

    #[test]
    fn flipped_byte_fails_checksum() {
        let mut bytes = write_snapshot(&TrajectoryStore::new());
        let mid = bytes.len() / 2;
        bytes[mid] ^= 0x40;
        assert!(matches!(read_snapshot(&bytes), Err(Error::SnapshotChecksum(_))));
    }
}
