//! On-disk preprocessing cache, so that preprocessing and generation can run
//! as separate invocations.
//!
//! The cache stores the preprocessing products together with a SHA-256 of
//! every source file. Loading re-parses the listed files and refuses to
//! continue if any of them changed.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::java::PreprocessResult;
use crate::parse::{parse_files, Forest, Language};

pub const CACHE_SCHEMA: &str = "acer-cache/1";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CachedFile {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CacheFile {
    pub schema_version: String,
    pub grammar: String,
    pub language: String,
    pub source_root: PathBuf,
    pub files: Vec<CachedFile>,
    pub products: PreprocessResult,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

impl CacheFile {
    pub fn new(source_root: &Path, forest: &Forest, products: PreprocessResult) -> CacheFile {
        CacheFile {
            schema_version: CACHE_SCHEMA.to_string(),
            grammar: forest.grammar().version(),
            language: forest.grammar().language().tag().to_string(),
            source_root: source_root.to_path_buf(),
            files: forest
                .files()
                .iter()
                .map(|f| CachedFile {
                    path: f.source.path.clone(),
                    sha256: sha256_hex(&f.source.content),
                })
                .collect(),
            products,
        }
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string(self).expect("cache serializes");
        text.push('\n');
        text
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }

    /// Parses a cache, checking the schema version before anything else.
    pub fn parse(text: &str) -> Result<CacheFile> {
        let value: serde_json::Value = serde_json::from_str(text)?;
        let found = value
            .get("schema_version")
            .and_then(|v| v.as_str())
            .unwrap_or("<missing>")
            .to_string();
        if found != CACHE_SCHEMA {
            return Err(Error::CacheVersion {
                expected: CACHE_SCHEMA.to_string(),
                found,
            });
        }
        Ok(serde_json::from_value(value)?)
    }

    pub fn read(path: &Path) -> Result<CacheFile> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    /// Re-parses the cached files from `root` (the recorded root when `None`)
    /// and checks that the grammar and every file are unchanged.
    pub fn load_forest(&self, root: Option<&Path>) -> Result<Forest> {
        let root = root.unwrap_or(&self.source_root);
        let language = Language::from_tag(&self.language)?;
        let paths: Vec<String> = self.files.iter().map(|f| f.path.clone()).collect();
        let forest = parse_files(root, language, &paths)?;
        if forest.grammar().version() != self.grammar {
            return Err(Error::CacheVersion {
                expected: forest.grammar().version(),
                found: self.grammar.clone(),
            });
        }
        if forest.len() != self.files.len() {
            let missing = self
                .files
                .iter()
                .find(|f| forest.file_id(&f.path).is_none())
                .map(|f| f.path.clone())
                .unwrap_or_default();
            return Err(Error::StaleCache(format!(
                "{missing} is no longer readable"
            )));
        }
        for (parsed, cached) in forest.files().iter().zip(&self.files) {
            if parsed.source.path != cached.path
                || sha256_hex(&parsed.source.content) != cached.sha256
            {
                return Err(Error::StaleCache(format!(
                    "{} changed since preprocessing",
                    cached.path
                )));
            }
        }
        Ok(forest)
    }
}
