//! Summary file: the selected elements of each document plus selection metadata.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::{Document, Modality};
use crate::error::{Error, Result};
use crate::selector::SummarySelection;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryElement {
    pub id: String,
    pub ordinal: usize,
    pub modality: Modality,
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub image_path: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRecord {
    pub doc_id: String,
    pub title: String,
    pub objective: f64,
    pub selection_order: Vec<usize>,
    pub document_order: Vec<usize>,
    pub g: Vec<f64>,
    /// Selected elements in document order.
    pub elements: Vec<SummaryElement>,
}

impl SummaryRecord {
    pub fn new(doc: &Document, sel: &SummarySelection) -> Self {
        let elements = sel
            .document_order
            .iter()
            .map(|&o| {
                let e = &doc.elements[o];
                SummaryElement {
                    id: e.id.clone(),
                    ordinal: e.ordinal,
                    modality: e.modality,
                    text: e.text.clone(),
                    image_path: e.image_path.clone(),
                }
            })
            .collect();
        SummaryRecord {
            doc_id: doc.doc_id.clone(),
            title: doc.title.clone(),
            objective: sel.objective,
            selection_order: sel.selection_order.clone(),
            document_order: sel.document_order.clone(),
            g: sel.g.clone(),
            elements,
        }
    }

    /// Text sentences in document order, blank ones dropped.
    pub fn sentences(&self) -> Vec<String> {
        self.elements
            .iter()
            .filter(|e| e.modality == Modality::Text && !e.text.trim().is_empty())
            .map(|e| e.text.trim().to_string())
            .collect()
    }

    /// All selected text, captions included, joined in document order.
    pub fn joined_text(&self) -> String {
        self.elements
            .iter()
            .map(|e| e.text.trim())
            .filter(|t| !t.is_empty())
            .collect::<Vec<_>>()
            .join(" ")
    }

    pub fn image_ids(&self) -> Vec<String> {
        self.elements
            .iter()
            .filter(|e| e.modality == Modality::Image)
            .map(|e| e.id.clone())
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SummaryFile {
    pub summaries: Vec<SummaryRecord>,
}

impl SummaryFile {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text)
            .map_err(|e| Error::validation(format!("invalid summary file: {e}")))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        SummaryFile::parse(&text)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("summary serializes");
        s.push('\n');
        s
    }

    /// The record for `doc_id`, or the only record when `doc_id` is `None`.
    pub fn pick(&self, doc_id: Option<&str>) -> Result<&SummaryRecord> {
        match doc_id {
            Some(id) => self
                .summaries
                .iter()
                .find(|s| s.doc_id == id)
                .ok_or_else(|| Error::validation(format!("no summary for document {id}"))),
            None => match self.summaries.as_slice() {
                [only] => Ok(only),
                [] => Err(Error::validation("summary file is empty")),
                _ => Err(Error::validation(
                    "summary file holds several documents; choose one with --doc-id",
                )),
            },
        }
    }
}
