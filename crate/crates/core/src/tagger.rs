//! Splice each entity's bracketed tag list into the text right after its
//! mention: `Germany` becomes `Germany [Germany, Republic, ...]`.
//!
//! Splicing is offset-driven rather than surface-form matching, so
//! repeated or substring surface forms cannot mis-tag. Every insertion is
//! logged, which makes the operation exactly invertible.

use serde::{Deserialize, Serialize};

use crate::document::Document;
use crate::enrich::EnrichedEntity;
use crate::error::{Error, Result};

/// One logged insertion. Offsets and lengths count Unicode scalar values.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpliceRecord {
    /// Mention start in the original normalized text.
    pub offset: usize,
    pub surface_form: String,
    /// Characters inserted after the mention, including the leading space
    /// and the brackets.
    pub inserted_length: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaggedDocument {
    pub document_id: String,
    pub tagged_text: String,
    pub splice_log: Vec<SpliceRecord>,
}

fn bracket_segment(tags: &[String]) -> String {
    format!(" [{}]", tags.join(", "))
}

/// Insert ` [tag, tag, ...]` after every mention that has tags. Entities
/// with empty tag lists leave the text untouched. Offsets must be valid,
/// sorted and pairwise disjoint — run overlap resolution first.
pub fn tag_text(doc: &Document, entities: &[EnrichedEntity]) -> Result<TaggedDocument> {
    let chars: Vec<char> = doc.normalized_text.chars().collect();

    let mut prev_end = 0usize;
    for (i, entity) in entities.iter().enumerate() {
        let len = entity.surface_form.chars().count();
        let end = entity.offset + len;
        if i > 0 && entity.offset < prev_end {
            return Err(Error::Contract(format!(
                "entity spans overlap or are unsorted at offset {}",
                entity.offset
            )));
        }
        if end > chars.len()
            || !chars[entity.offset..end].iter().copied().eq(entity.surface_form.chars())
        {
            return Err(Error::Contract(format!(
                "entity {:?} does not match document {} at offset {}",
                entity.surface_form, doc.id, entity.offset
            )));
        }
        prev_end = end;
    }

    // Equivalent to applying insertions from the highest offset downward:
    // each splice lands after its mention with earlier offsets unshifted.
    let mut tagged = String::with_capacity(doc.normalized_text.len());
    let mut splice_log = Vec::new();
    let mut cursor = 0usize;
    for entity in entities {
        if entity.tags.is_empty() {
            continue;
        }
        let end = entity.offset + entity.surface_form.chars().count();
        tagged.extend(&chars[cursor..end]);
        let segment = bracket_segment(&entity.tags);
        splice_log.push(SpliceRecord {
            offset: entity.offset,
            surface_form: entity.surface_form.clone(),
            inserted_length: segment.chars().count(),
        });
        tagged.push_str(&segment);
        cursor = end;
    }
    tagged.extend(&chars[cursor..]);

    Ok(TaggedDocument { document_id: doc.id.clone(), tagged_text: tagged, splice_log })
}

/// Invert [`tag_text`]: remove every logged insertion and give back the
/// original normalized text. A log inconsistent with the text is an
/// integrity error.
pub fn strip_tags(tagged: &TaggedDocument) -> Result<String> {
    let chars: Vec<char> = tagged.tagged_text.chars().collect();
    let mut out = String::with_capacity(tagged.tagged_text.len());
    let mut cursor = 0usize;
    let mut shift = 0usize;
    for splice in &tagged.splice_log {
        let surface_len = splice.surface_form.chars().count();
        let segment_start = splice.offset + surface_len + shift;
        let segment_end = segment_start + splice.inserted_length;
        if segment_start < cursor || segment_end > chars.len() {
            return Err(Error::Contract(format!(
                "splice log inconsistent with tagged text at offset {}",
                splice.offset
            )));
        }
        let mention_start = segment_start - surface_len;
        if !chars[mention_start..segment_start].iter().copied().eq(splice.surface_form.chars()) {
            return Err(Error::Contract(format!(
                "splice log surface form {:?} not found before insertion",
                splice.surface_form
            )));
        }
        let segment: String = chars[segment_start..segment_end].iter().collect();
        if !(segment.starts_with(" [") && segment.ends_with(']')) {
            return Err(Error::Contract(format!(
                "logged insertion at offset {} is not a bracketed tag list",
                splice.offset
            )));
        }
        out.extend(&chars[cursor..segment_start]);
        cursor = segment_end;
        shift += splice.inserted_length;
    }
    out.extend(&chars[cursor..]);
    Ok(out)
}
