use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A source text plus its normalized form. Everything downstream —
/// annotation offsets, tag splicing, preprocessing — works against
/// `normalized_text`, never `raw_text`. Offsets are counted in Unicode
/// scalar values, not bytes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    pub raw_text: String,
    pub normalized_text: String,
}

impl Document {
    pub fn new(id: impl Into<String>, raw_text: impl Into<String>) -> Self {
        let raw_text = raw_text.into();
        let normalized_text = normalize(&raw_text);
        Document { id: id.into(), raw_text, normalized_text }
    }
}

/// Whitespace repair: collapses runs of spaces, tabs, CR and LF to a
/// single space and trims the ends. No other characters are touched, so
/// the function is idempotent and annotation offsets computed against its
/// output stay valid.
pub fn normalize(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut pending_space = false;
    for ch in text.chars() {
        if matches!(ch, ' ' | '\t' | '\r' | '\n') {
            pending_space = true;
        } else {
            if pending_space && !out.is_empty() {
                out.push(' ');
            }
            pending_space = false;
            out.push(ch);
        }
    }
    out
}

/// Read a UTF-8 text file into a [`Document`]. The document id is the
/// file stem.
///
/// A file whose content normalizes to the empty string is rejected unless
/// `allow_empty` is set.
pub fn read_document(path: &Path, allow_empty: bool) -> Result<Document> {
    let bytes = fs::read(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => {
            Error::Input(format!("input file not found: {}", path.display()))
        }
        _ => Error::io(path, e),
    })?;
    let text = String::from_utf8(bytes).map_err(|e| Error::Encoding {
        path: path.to_path_buf(),
        offset: e.utf8_error().valid_up_to(),
    })?;
    let id = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string());
    let doc = Document::new(id, text);
    if doc.normalized_text.is_empty() && !allow_empty {
        return Err(Error::Input(format!(
            "input file contains no text: {}",
            path.display()
        )));
    }
    Ok(doc)
}
