//! Concurrent memo table with a stable on-disk format.
//!
//! File layout: one header line
//! `dp6cache v1 offset=<-1|+1> engine=<general|genus0>` followed by one
//! `<key>=<value>` line per entry, sorted by key. Keys contain `=` themselves,
//! so a line splits at its last `=`.

use std::fs;
use std::io::Write;
use std::path::Path;

use dashmap::DashMap;
use num_bigint::BigUint;

use crate::error::{Error, Result};
use crate::quadruple::Quadruple;
use crate::splitter::GenusOffset;

const MAGIC: &str = "dp6cache v1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EngineKind {
    General,
    Genus0,
}

impl EngineKind {
    pub fn tag(self) -> &'static str {
        match self {
            EngineKind::General => "general",
            EngineKind::Genus0 => "genus0",
        }
    }

    pub fn from_tag(s: &str) -> Result<Self> {
        match s {
            "general" => Ok(EngineKind::General),
            "genus0" => Ok(EngineKind::Genus0),
            _ => Err(Error::Parse(format!("engine `{s}`: expected general or genus0"))),
        }
    }
}

#[derive(Debug)]
pub struct MemoCache {
    engine: EngineKind,
    offset: GenusOffset,
    map: DashMap<Quadruple, BigUint>,
}

impl MemoCache {
    pub fn new(engine: EngineKind, offset: GenusOffset) -> Self {
        MemoCache { engine, offset, map: DashMap::new() }
    }

    pub fn engine(&self) -> EngineKind {
        self.engine
    }

    pub fn offset(&self) -> GenusOffset {
        self.offset
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn get(&self, q: &Quadruple) -> Option<BigUint> {
        self.map.get(q).map(|v| v.clone())
    }

    /// Inserts a value. Re-inserting the same value is a no-op (two workers
    /// may race on one key); a different value means the table is corrupt.
    pub fn put(&self, q: Quadruple, v: BigUint) -> Result<()> {
        use dashmap::mapref::entry::Entry;
        match self.map.entry(q) {
            Entry::Occupied(e) => {
                if *e.get() != v {
                    return Err(Error::CacheCorruption(format!(
                        "{}: stored {} but computed {}",
                        e.key(),
                        e.get(),
                        v
                    )));
                }
            }
            Entry::Vacant(e) => {
                e.insert(v);
            }
        }
        Ok(())
    }

    pub fn header(&self) -> String {
        format!("{MAGIC} offset={} engine={}", self.offset.tag(), self.engine.tag())
    }

    pub fn to_text(&self) -> String {
        let mut lines: Vec<(String, String)> = self
            .map
            .iter()
            .map(|e| (e.key().key(), e.value().to_string()))
            .collect();
        lines.sort();
        let mut out = self.header();
        out.push('\n');
        for (k, v) in lines {
            out.push_str(&k);
            out.push('=');
            out.push_str(&v);
            out.push('\n');
        }
        out
    }

    /// Parses a saved table, rejecting any header that does not match the
    /// expected engine and offset.
    pub fn from_text(text: &str, engine: EngineKind, offset: GenusOffset) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::CacheCorruption("empty cache file".into()))?;
        let rest = header
            .strip_prefix(MAGIC)
            .ok_or_else(|| Error::CacheMismatch(format!("unsupported cache header `{header}`")))?;
        let mut file_offset = None;
        let mut file_engine = None;
        for field in rest.split_whitespace() {
            if let Some(v) = field.strip_prefix("offset=") {
                file_offset = Some(GenusOffset::from_tag(v)?);
            } else if let Some(v) = field.strip_prefix("engine=") {
                file_engine = Some(EngineKind::from_tag(v)?);
            } else {
                return Err(Error::CacheMismatch(format!("unknown header field `{field}`")));
            }
        }
        if file_offset != Some(offset) || file_engine != Some(engine) {
            return Err(Error::CacheMismatch(format!(
                "cache header `{header}` does not match offset={} engine={}",
                offset.tag(),
                engine.tag()
            )));
        }
        let cache = MemoCache::new(engine, offset);
        for (i, line) in lines.enumerate() {
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .rsplit_once('=')
                .ok_or_else(|| Error::CacheCorruption(format!("line {}: no `=`", i + 2)))?;
            let q: Quadruple = k
                .parse()
                .map_err(|e| Error::CacheCorruption(format!("line {}: {e}", i + 2)))?;
            let v: BigUint = v
                .parse()
                .map_err(|_| Error::CacheCorruption(format!("line {}: bad value `{v}`", i + 2)))?;
            cache.put(q, v)?;
        }
        Ok(cache)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let tmp = path.with_extension("tmp");
        {
            let mut f = fs::File::create(&tmp)?;
            f.write_all(self.to_text().as_bytes())?;
            f.sync_all()?;
        }
        fs::rename(&tmp, path)?;
        Ok(())
    }

    pub fn load(path: &Path, engine: EngineKind, offset: GenusOffset) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        Self::from_text(&text, engine, offset)
    }

    /// Loads `path` if it exists, otherwise starts empty.
    pub fn open(path: &Path, engine: EngineKind, offset: GenusOffset) -> Result<Self> {
        if path.exists() {
            Self::load(path, engine, offset)
        } else {
            Ok(Self::new(engine, offset))
        }
    }
}
