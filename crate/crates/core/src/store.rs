//! On-disk artifacts: the descriptor cache and the representative file.
//!
//! Cache layout: one text header line
//!
//! ```text
//! shape-router-cache\tversion=1\ttag=<method_tag>\tmodels=<n>\trng=<algorithm>\n
//! ```
//!
//! followed by `n` binary records sorted by model id, each
//! `u32 id_len | id bytes | u32 bin_count | bin_count × f64`, all little
//! endian.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use crate::descriptor::D2Params;
use crate::error::{Error, Result};
use crate::representatives::{ClassRepresentatives, Representative, RepresentativeSet};
use crate::{rng, DescriptorMap, ModelId, ShapeDescriptor};

pub const CACHE_MAGIC: &str = "shape-router-cache";
pub const CACHE_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct DescriptorCache {
    pub method_tag: String,
    pub descriptors: DescriptorMap,
}

impl DescriptorCache {
    pub fn new(method_tag: impl Into<String>) -> Self {
        DescriptorCache {
            method_tag: method_tag.into(),
            descriptors: DescriptorMap::new(),
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = format!(
            "{CACHE_MAGIC}\tversion={CACHE_VERSION}\ttag={}\tmodels={}\trng={}\n",
            self.method_tag,
            self.descriptors.len(),
            rng::ALGORITHM
        )
        .into_bytes();
        for (id, d) in &self.descriptors {
            out.extend_from_slice(&(id.as_str().len() as u32).to_le_bytes());
            out.extend_from_slice(id.as_str().as_bytes());
            out.extend_from_slice(&(d.bin_count() as u32).to_le_bytes());
            for b in d.bins() {
                out.extend_from_slice(&b.to_le_bytes());
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let bad = |msg: &str| Error::Store(format!("corrupt descriptor cache: {msg}"));
        let newline = bytes
            .iter()
            .position(|&b| b == b'\n')
            .ok_or_else(|| bad("missing header"))?;
        let header = std::str::from_utf8(&bytes[..newline]).map_err(|_| bad("header is not UTF-8"))?;
        let mut fields = header.split('\t');
        if fields.next() != Some(CACHE_MAGIC) {
            return Err(bad("bad magic"));
        }
        let mut kv = BTreeMap::new();
        for f in fields {
            let (k, v) = f.split_once('=').ok_or_else(|| bad("malformed header field"))?;
            kv.insert(k, v);
        }
        if kv.get("version") != Some(&"1") {
            return Err(Error::Store(format!(
                "unsupported cache version {:?}",
                kv.get("version")
            )));
        }
        let method_tag = kv.get("tag").ok_or_else(|| bad("missing tag"))?.to_string();
        let models: usize = kv
            .get("models")
            .and_then(|m| m.parse().ok())
            .ok_or_else(|| bad("missing model count"))?;
        if kv.get("rng") != Some(&rng::ALGORITHM) {
            return Err(Error::Store("cache was built with a different random source".into()));
        }
        let expected_bins = D2Params::from_tag(&method_tag).ok().map(|p| p.bins);
        let tag: Arc<str> = method_tag.as_str().into();

        let mut rest = &bytes[newline + 1..];
        let mut take = |n: usize| -> Result<&[u8]> {
            if rest.len() < n {
                return Err(bad("truncated record"));
            }
            let (head, tail) = rest.split_at(n);
            rest = tail;
            Ok(head)
        };
        let mut descriptors = DescriptorMap::new();
        for _ in 0..models {
            let len = u32::from_le_bytes(take(4)?.try_into().unwrap()) as usize;
            let id = std::str::from_utf8(take(len)?).map_err(|_| bad("model id is not UTF-8"))?;
            let id = ModelId::new(id);
            let bins = u32::from_le_bytes(take(4)?.try_into().unwrap()) as usize;
            if expected_bins.is_some_and(|b| b != bins) {
                return Err(bad(&format!("record {id} has {bins} bins, tag says {expected_bins:?}")));
            }
            let raw = take(bins * 8)?;
            let values = raw
                .chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
                .collect();
            let d = ShapeDescriptor::new(values, tag.clone())?;
            if descriptors.insert(id.clone(), d).is_some() {
                return Err(bad(&format!("duplicate model {id}")));
            }
        }
        if !rest.is_empty() {
            return Err(bad("trailing bytes"));
        }
        Ok(DescriptorCache {
            method_tag,
            descriptors,
        })
    }

    pub fn read(path: &Path) -> Result<Self> {
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&bytes)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_file(path, &self.to_bytes())
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn representatives_to_text(reps: &RepresentativeSet) -> String {
    let mut out = format!("# shape-router representatives\n# method_tag={}\n", reps.method_tag);
    for (class, r) in reps.iter() {
        let _ = writeln!(out, "{class}\t{}\t{}", r.subclass, r.model_id);
    }
    out
}

/// Inverse of [`representatives_to_text`]. Runner-ups are not persisted.
pub fn representatives_from_text(text: &str) -> Result<RepresentativeSet> {
    let mut reps = RepresentativeSet::default();
    let mut tag = None;
    for (i, line) in text.lines().enumerate() {
        if let Some(comment) = line.strip_prefix('#') {
            if let Some(t) = comment.trim().strip_prefix("method_tag=") {
                tag = Some(t.to_owned());
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let [class, subclass, id] = line.split('\t').collect::<Vec<_>>()[..] else {
            return Err(Error::Store(format!(
                "representative file line {}: expected `<class>\\t<subclass>\\t<model_id>`",
                i + 1
            )));
        };
        let entry = Representative {
            subclass: subclass.to_owned(),
            model_id: id.into(),
            runner_up: None,
        };
        match reps.classes.iter_mut().find(|c| c.class == class) {
            Some(c) => c.entries.push(entry),
            None => reps.classes.push(ClassRepresentatives {
                class: class.to_owned(),
                entries: vec![entry],
            }),
        }
    }
    reps.method_tag = tag.ok_or_else(|| Error::Store("representative file lacks method_tag".into()))?;
    Ok(reps)
}

pub fn write_representatives(path: &Path, reps: &RepresentativeSet) -> Result<()> {
    write_file(path, representatives_to_text(reps).as_bytes())
}

pub fn read_representatives(path: &Path) -> Result<RepresentativeSet> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    representatives_from_text(&text)
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    write_file(path, text.as_bytes())
}

/// Every `*.off` file under `dir`, keyed by stem. Both flat directories and
/// the nested PSB layout (`db/<n>/m<id>/m<id>.off`) work; on duplicate
/// stems the first path in sorted order wins.
pub fn discover_meshes(dir: &Path) -> Result<BTreeMap<ModelId, PathBuf>> {
    let mut out = BTreeMap::new();
    let walker = walkdir::WalkDir::new(dir).sort_by_file_name();
    for entry in walker {
        let entry = entry.map_err(|e| {
            let path = e.path().unwrap_or(dir).to_path_buf();
            Error::io(path, e.into())
        })?;
        let path = entry.path();
        let is_off = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("off"));
        if entry.file_type().is_file() && is_off {
            let id = ModelId::new(crate::mesh::model_id_from_path(path));
            if out.contains_key(&id) {
                log::warn!("duplicate mesh for {id}: ignoring {}", path.display());
                continue;
            }
            out.insert(id, path.to_path_buf());
        }
    }
    Ok(out)
}
