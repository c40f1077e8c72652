//! On-disk snapshot corpus: one self-describing binary file per hour plus a
//! JSON index carrying the schema version, the generating config digest, and
//! per-file content digests. Regenerating with the same config reproduces
//! every byte, so store digests are comparable across runs.

use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::snapshot::Snapshot;
use crate::{Error, Result};

pub const STORE_VERSION: u32 = 1;
const HOUR_FILE_MAGIC: &[u8; 8] = b"NTNSNAP\0";

/// Index entry for one hour file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HourEntry {
    pub hour: u8,
    pub file: String,
    pub snapshot_count: u32,
    pub sha256: String,
}

/// The store's JSON index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoreIndex {
    pub version: u32,
    /// Digest of the scenario + corpus-shaping run settings.
    pub config_digest: String,
    pub seed: u64,
    pub snapshots_per_hour: u32,
    pub hours: Vec<HourEntry>,
}

/// Handle to a snapshot store directory.
#[derive(Debug, Clone)]
pub struct SnapshotStore {
    dir: PathBuf,
    pub index: StoreIndex,
}

impl SnapshotStore {
    /// Write a complete store: 24 hour files plus `index.json`.
    pub fn create(
        dir: &Path,
        config_digest: String,
        seed: u64,
        snapshots_per_hour: u32,
        mut generate_hour: impl FnMut(u8) -> Vec<Snapshot>,
    ) -> Result<SnapshotStore> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let mut hours = Vec::with_capacity(24);
        for hour in 0..24u8 {
            let snapshots = generate_hour(hour);
            let file = format!("hour_{hour:02}.bin");
            let path = dir.join(&file);
            let digest = write_hour_file(&path, &snapshots)?;
            hours.push(HourEntry {
                hour,
                file,
                snapshot_count: snapshots.len() as u32,
                sha256: digest,
            });
        }
        let index = StoreIndex {
            version: STORE_VERSION,
            config_digest,
            seed,
            snapshots_per_hour,
            hours,
        };
        let index_path = dir.join("index.json");
        let text = serde_json::to_string_pretty(&index)
            .map_err(|e| Error::format(&index_path, e.to_string()))?;
        std::fs::write(&index_path, text).map_err(|e| Error::io(&index_path, e))?;
        Ok(SnapshotStore {
            dir: dir.to_path_buf(),
            index,
        })
    }

    pub fn open(dir: &Path) -> Result<SnapshotStore> {
        let index_path = dir.join("index.json");
        let text = std::fs::read_to_string(&index_path).map_err(|e| Error::io(&index_path, e))?;
        let index: StoreIndex =
            serde_json::from_str(&text).map_err(|e| Error::format(&index_path, e.to_string()))?;
        if index.version != STORE_VERSION {
            return Err(Error::format(
                &index_path,
                format!("store version {} unsupported", index.version),
            ));
        }
        Ok(SnapshotStore {
            dir: dir.to_path_buf(),
            index,
        })
    }

    pub fn load_hour(&self, hour: u8) -> Result<Vec<Snapshot>> {
        let entry = self
            .index
            .hours
            .iter()
            .find(|e| e.hour == hour)
            .ok_or_else(|| {
                Error::format(self.dir.join("index.json"), format!("hour {hour} missing"))
            })?;
        read_hour_file(&self.dir.join(&entry.file))
    }

    /// Digest over the whole store contents (order-stable).
    pub fn digest(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(self.index.config_digest.as_bytes());
        for entry in &self.index.hours {
            hasher.update(entry.sha256.as_bytes());
        }
        hex_string(&hasher.finalize())
    }
}

fn write_hour_file(path: &Path, snapshots: &[Snapshot]) -> Result<String> {
    let body = bincode::serialize(snapshots).map_err(|e| Error::format(path, e.to_string()))?;
    let mut file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut hasher = Sha256::new();
    let mut write_all = |bytes: &[u8]| -> Result<()> {
        hasher.update(bytes);
        file.write_all(bytes).map_err(|e| Error::io(path, e))
    };
    write_all(HOUR_FILE_MAGIC)?;
    write_all(&STORE_VERSION.to_le_bytes())?;
    write_all(&(snapshots.len() as u32).to_le_bytes())?;
    write_all(&body)?;
    Ok(hex_string(&hasher.finalize()))
}

fn read_hour_file(path: &Path) -> Result<Vec<Snapshot>> {
    let mut file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut header = [0u8; 16];
    file.read_exact(&mut header).map_err(|e| Error::io(path, e))?;
    if &header[..8] != HOUR_FILE_MAGIC {
        return Err(Error::format(path, "bad magic"));
    }
    let version = u32::from_le_bytes(header[8..12].try_into().unwrap());
    if version != STORE_VERSION {
        return Err(Error::format(path, format!("version {version} unsupported")));
    }
    let count = u32::from_le_bytes(header[12..16].try_into().unwrap());
    let mut body = Vec::new();
    file.read_to_end(&mut body).map_err(|e| Error::io(path, e))?;
    let snapshots: Vec<Snapshot> =
        bincode::deserialize(&body).map_err(|e| Error::format(path, e.to_string()))?;
    if snapshots.len() != count as usize {
        return Err(Error::format(
            path,
            format!("expected {count} snapshots, found {}", snapshots.len()),
        ));
    }
    Ok(snapshots)
}

fn hex_string(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}
