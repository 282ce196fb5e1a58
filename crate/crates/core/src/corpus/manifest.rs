use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io;
use std::path::Path;

use sha2::{Digest, Sha256};

use super::{CorpusEntry, CorpusError};

pub const MANIFEST_FILE: &str = "manifest.tsv";

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// `id<TAB>path<TAB>sha256` for every entry file, in entry then path order.
pub fn manifest_text(root: &Path, entries: &[CorpusEntry]) -> io::Result<String> {
    let mut out = String::from("# id\tpath\tsha256\n");
    for entry in entries {
        for file in entry.files() {
            let bytes = fs::read(root.join(&file))?;
            out.push_str(&format!("{}\t{}\t{}\n", entry.id, file, sha256_hex(&bytes)));
        }
    }
    Ok(out)
}

pub fn write_manifest(root: &Path, entries: &[CorpusEntry]) -> io::Result<()> {
    fs::write(root.join(MANIFEST_FILE), manifest_text(root, entries)?)
}

pub(super) fn verify(root: &Path, entries: &[CorpusEntry]) -> Result<(), CorpusError> {
    let path = root.join(MANIFEST_FILE);
    if !path.is_file() {
        if let Some(first) = entries.first() {
            return Err(CorpusError::Manifest {
                id: first.id.clone(),
                message: format!("no {MANIFEST_FILE} in corpus root"),
            });
        }
        return Ok(());
    }
    let text = super::read(&path)?;
    let mut listed: BTreeMap<String, BTreeMap<String, String>> = BTreeMap::new();
    for (idx, line) in text.lines().enumerate() {
        if line.starts_with('#') || line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        let [id, file, digest] = fields[..] else {
            return Err(CorpusError::Meta {
                path: path.clone(),
                line: idx + 1,
                message: "expected id, path and sha256".into(),
            });
        };
        listed
            .entry(id.to_string())
            .or_default()
            .insert(file.to_string(), digest.to_string());
    }

    for entry in entries {
        let err = |message: String| CorpusError::Manifest {
            id: entry.id.clone(),
            message,
        };
        let rows = listed
            .remove(&entry.id)
            .ok_or_else(|| err("not listed in manifest".into()))?;
        let on_disk: BTreeSet<String> = entry.files().into_iter().collect();
        let in_manifest: BTreeSet<String> = rows.keys().cloned().collect();
        if let Some(extra) = on_disk.difference(&in_manifest).next() {
            return Err(err(format!("{extra} not listed in manifest")));
        }
        if let Some(missing) = in_manifest.difference(&on_disk).next() {
            return Err(err(format!("{missing} listed in manifest but missing")));
        }
        for (file, digest) in rows {
            let bytes = fs::read(root.join(&file)).map_err(|source| CorpusError::Io {
                path: root.join(&file),
                source,
            })?;
            if sha256_hex(&bytes) != digest {
                return Err(err(format!("checksum mismatch for {file}")));
            }
        }
    }
    if let Some(id) = listed.into_keys().next() {
        return Err(CorpusError::Manifest {
            id,
            message: "listed in manifest but has no directory".into(),
        });
    }
    Ok(())
}
