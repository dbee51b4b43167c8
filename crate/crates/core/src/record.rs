//! Account and post records as exchanged in JSON Lines files.

use std::fmt;
use std::fs;
use std::io::BufRead;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Content class. The discriminant is the output-layer index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Class {
    Bot = 0,
    Fan = 1,
    Genuine = 2,
}

impl Class {
    pub const ALL: [Class; 3] = [Class::Bot, Class::Fan, Class::Genuine];
    pub const COUNT: usize = 3;

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Class> {
        Class::ALL.get(i).copied()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Class::Bot => "bot",
            Class::Fan => "fan",
            Class::Genuine => "genuine",
        }
    }
}

impl fmt::Display for Class {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Class {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "bot" => Ok(Class::Bot),
            "fan" => Ok(Class::Fan),
            "genuine" => Ok(Class::Genuine),
            other => Err(Error::invalid(format!("unknown class {other:?}"))),
        }
    }
}

/// Public metadata of one account.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileRecord {
    pub username: String,
    #[serde(default)]
    pub full_name: String,
    #[serde(default)]
    pub biography: String,
    pub follower_count: u64,
    pub followee_count: u64,
    pub media_count: u64,
    #[serde(default)]
    pub is_private: bool,
    #[serde(default)]
    pub is_verified: bool,
    #[serde(default)]
    pub has_external_url: bool,
    pub account_age_days: u64,
    #[serde(default)]
    pub photo_id: Option<String>,
}

impl ProfileRecord {
    pub fn validate(&self) -> Result<()> {
        if self.username.trim().is_empty() {
            return Err(Error::invalid("profile username is empty"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MediaType {
    Image,
    Video,
}

/// One published post.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PostRecord {
    pub post_id: String,
    pub publisher_id: String,
    #[serde(default)]
    pub caption: String,
    #[serde(default)]
    pub hashtags: Vec<String>,
    #[serde(default)]
    pub mentions: Vec<String>,
    #[serde(default)]
    pub tagged_users: Vec<String>,
    pub like_count: u64,
    pub comment_count: u64,
    pub media_type: MediaType,
    #[serde(default)]
    pub emoji_count: u64,
    #[serde(default)]
    pub has_url: bool,
    /// Epoch seconds.
    pub timestamp: i64,
}

impl PostRecord {
    pub fn validate(&self) -> Result<()> {
        if self.post_id.is_empty() {
            return Err(Error::invalid("post_id is empty"));
        }
        if self.publisher_id.is_empty() {
            return Err(Error::invalid("publisher_id is empty"));
        }
        Ok(())
    }
}

/// Records that can check their own invariants after parsing.
pub trait Validate {
    fn check(&self) -> Result<()>;
}

impl Validate for ProfileRecord {
    fn check(&self) -> Result<()> {
        self.validate()
    }
}

impl Validate for PostRecord {
    fn check(&self) -> Result<()> {
        self.validate()
    }
}

/// Parses a whole JSON Lines stream. Blank lines are skipped. The first
/// malformed or invalid line aborts the read with its 1-based line number,
/// and nothing parsed before it is returned.
pub fn read_jsonl<T, R>(reader: R) -> Result<Vec<T>>
where
    T: DeserializeOwned + Validate,
    R: BufRead,
{
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: T = serde_json::from_str(&line).map_err(|e| Error::Parse {
            line: i + 1,
            message: e.to_string(),
        })?;
        rec.check().map_err(|e| Error::Parse {
            line: i + 1,
            message: e.to_string(),
        })?;
        out.push(rec);
    }
    Ok(out)
}

pub fn write_jsonl<T: Serialize>(records: &[T]) -> Result<String> {
    let mut s = String::new();
    for r in records {
        s.push_str(&serde_json::to_string(r).map_err(|e| Error::invalid(e.to_string()))?);
        s.push('\n');
    }
    Ok(s)
}

/// Writes `bytes` to a sibling temporary file and renames it over `path`,
/// so readers never see a partially written file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let name = path
        .file_name()
        .ok_or_else(|| Error::invalid(format!("{} is not a file path", path.display())))?
        .to_string_lossy();
    let tmp = dir.join(format!(".{name}.tmp{}", std::process::id()));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result.map_err(Error::from)
}
