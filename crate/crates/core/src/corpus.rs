//! Document ingestion and embedding normalization.
//!
//! A corpus file holds one JSON document per line:
//!
//! ```text
//! {"doc_id": "...", "title": "...",
//!  "elements": [{"id": "...", "ordinal": 0, "modality": "text", "text": "...",
//!                "image_path": null, "embedding": [..]}],
//!  "ground_truth": {"selected_ids": ["..."], "gold_text": "..."}}
//! ```
//!
//! Embeddings are either raw (shifted and L1-normalized on load) or already
//! normalized, in which case they are only validated.

use std::collections::{BTreeSet, HashSet};
use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default post-shift offset keeping every coordinate strictly positive.
pub const DEFAULT_EPSILON: f64 = 1e-6;

/// Tolerance on the L1 norm of a normalized embedding.
pub const NORM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Modality {
    Text,
    Image,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContentElement {
    pub id: String,
    pub ordinal: usize,
    pub modality: Modality,
    /// Sentence for text elements, caption (possibly empty) for images.
    pub text: String,
    pub image_path: Option<String>,
    pub raw_embedding: Vec<f64>,
    /// Nonnegative, L1-normalized embedding. Empty until normalized.
    pub embedding: Vec<f64>,
}

impl ContentElement {
    pub fn is_image(&self) -> bool {
        self.modality == Modality::Image
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Document {
    pub doc_id: String,
    pub title: String,
    /// Elements sorted by ordinal; `elements[i].ordinal == i`.
    pub elements: Vec<ContentElement>,
}

impl Document {
    /// Builds a document, sorting elements by ordinal and checking that the
    /// ordinals are exactly `0..N`, ids are unique and raw embeddings share a
    /// dimension.
    pub fn new(
        doc_id: impl Into<String>,
        title: impl Into<String>,
        mut elements: Vec<ContentElement>,
    ) -> Result<Self> {
        let doc_id = doc_id.into();
        if elements.is_empty() {
            return Err(Error::validation(format!(
                "document {doc_id} has no elements"
            )));
        }
        elements.sort_by_key(|e| e.ordinal);
        let mut ids = HashSet::new();
        for (i, e) in elements.iter().enumerate() {
            if e.ordinal != i {
                return Err(Error::validation(format!(
                    "document {doc_id}: ordinals must be 0..{} without gaps or repeats (element {} has ordinal {})",
                    elements.len(),
                    e.id,
                    e.ordinal
                )));
            }
            if !ids.insert(e.id.as_str()) {
                return Err(Error::validation(format!(
                    "document {doc_id}: duplicate element id {}",
                    e.id
                )));
            }
        }
        let d = elements[0].raw_embedding.len();
        if d == 0 {
            return Err(Error::validation(format!(
                "document {doc_id}: element {} has an empty embedding",
                elements[0].id
            )));
        }
        for e in &elements {
            if e.raw_embedding.len() != d {
                return Err(Error::validation(format!(
                    "document {doc_id}: element {} has embedding dimension {}, expected {d}",
                    e.id,
                    e.raw_embedding.len()
                )));
            }
            if let Some(bad) = e.raw_embedding.iter().find(|v| !v.is_finite()) {
                return Err(Error::validation(format!(
                    "document {doc_id}: element {} has non-finite embedding value {bad}",
                    e.id
                )));
            }
        }
        Ok(Document {
            doc_id,
            title: title.into(),
            elements,
        })
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// Embedding dimension.
    pub fn dim(&self) -> usize {
        self.elements
            .first()
            .map(|e| e.raw_embedding.len())
            .unwrap_or(0)
    }

    pub fn is_normalized(&self) -> bool {
        self.elements
            .iter()
            .all(|e| e.embedding.len() == e.raw_embedding.len())
    }

    pub fn element_by_id(&self, id: &str) -> Option<&ContentElement> {
        self.elements.iter().find(|e| e.id == id)
    }

    /// Ordinals of the given ids, sorted ascending.
    pub fn ordinals_of<'a, I>(&self, ids: I) -> Result<Vec<usize>>
    where
        I: IntoIterator<Item = &'a String>,
    {
        let mut out = Vec::new();
        for id in ids {
            let e = self.element_by_id(id).ok_or_else(|| {
                Error::validation(format!("document {}: unknown element id {id}", self.doc_id))
            })?;
            out.push(e.ordinal);
        }
        out.sort_unstable();
        out.dedup();
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruthSummary {
    pub doc_id: String,
    pub selected_ids: BTreeSet<String>,
    pub gold_text: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorpusEntry {
    pub document: Document,
    pub ground_truth: Option<GroundTruthSummary>,
}

/// How embeddings in a corpus file are interpreted.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EmbeddingMode {
    /// Shift per dimension and L1-normalize on load.
    Raw { epsilon: f64 },
    /// Embeddings must already be nonnegative with unit L1 norm.
    PreNormalized,
}

impl Default for EmbeddingMode {
    fn default() -> Self {
        EmbeddingMode::Raw {
            epsilon: DEFAULT_EPSILON,
        }
    }
}

/// Shifts every dimension by its per-document minimum, adds `epsilon` and
/// divides each vector by its L1 norm.
pub fn normalize_document(doc: &Document, epsilon: f64) -> Result<Document> {
    if !(epsilon >= 0.0) || !epsilon.is_finite() {
        return Err(Error::validation(format!(
            "epsilon must be a finite nonnegative number, got {epsilon}"
        )));
    }
    let d = doc.dim();
    for e in &doc.elements {
        if e.raw_embedding.len() != d {
            return Err(Error::validation(format!(
                "document {}: element {} has embedding dimension {}, expected {d}",
                doc.doc_id,
                e.id,
                e.raw_embedding.len()
            )));
        }
    }
    let mut shift = vec![f64::INFINITY; d];
    for e in &doc.elements {
        for (s, &v) in shift.iter_mut().zip(&e.raw_embedding) {
            *s = s.min(v);
        }
    }

    let mut out = doc.clone();
    for e in &mut out.elements {
        let shifted: Vec<f64> = e
            .raw_embedding
            .iter()
            .zip(&shift)
            .map(|(&v, &s)| v - s + epsilon)
            .collect();
        let norm: f64 = shifted.iter().sum();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::validation(format!(
                "document {}: element {} has zero L1 norm after shifting",
                doc.doc_id, e.id
            )));
        }
        e.embedding = shifted.into_iter().map(|v| v / norm).collect();
    }
    Ok(out)
}

/// Checks that every embedding is nonnegative with unit L1 norm and copies the
/// raw embedding into the normalized slot.
pub fn accept_normalized(doc: &Document) -> Result<Document> {
    let mut out = doc.clone();
    for e in &mut out.elements {
        if let Some(v) = e.raw_embedding.iter().find(|v| **v < 0.0) {
            return Err(Error::validation(format!(
                "document {}: element {} has negative embedding entry {v}",
                doc.doc_id, e.id
            )));
        }
        let norm: f64 = e.raw_embedding.iter().sum();
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::validation(format!(
                "document {}: element {} has L1 norm {norm}, expected 1",
                doc.doc_id, e.id
            )));
        }
        e.embedding = e.raw_embedding.clone();
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// File format

#[derive(Debug, Serialize, Deserialize)]
struct ElementRecord {
    id: String,
    ordinal: usize,
    modality: Modality,
    #[serde(default)]
    text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    image_path: Option<String>,
    embedding: Vec<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
struct GroundTruthRecord {
    selected_ids: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    gold_text: Option<String>,
}

#[derive(Debug, Serialize, Deserialize)]
struct DocumentRecord {
    doc_id: String,
    #[serde(default)]
    title: String,
    elements: Vec<ElementRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    ground_truth: Option<GroundTruthRecord>,
}

fn malformed(line: usize, message: impl Into<String>) -> Error {
    Error::Malformed {
        line,
        message: message.into(),
    }
}

/// Parses one corpus line. `line_no` is 1-based and only used for errors.
pub fn parse_record(line: &str, line_no: usize, mode: EmbeddingMode) -> Result<CorpusEntry> {
    let rec: DocumentRecord =
        serde_json::from_str(line).map_err(|e| malformed(line_no, e.to_string()))?;
    let elements = rec
        .elements
        .into_iter()
        .map(|e| ContentElement {
            id: e.id,
            ordinal: e.ordinal,
            modality: e.modality,
            text: e.text,
            image_path: e.image_path,
            raw_embedding: e.embedding,
            embedding: Vec::new(),
        })
        .collect();
    let at_line = |e: Error| match e {
        Error::Validation(m) => malformed(line_no, m),
        other => other,
    };
    let doc = Document::new(rec.doc_id, rec.title, elements).map_err(at_line)?;
    let doc = match mode {
        EmbeddingMode::Raw { epsilon } => normalize_document(&doc, epsilon),
        EmbeddingMode::PreNormalized => accept_normalized(&doc),
    }
    .map_err(at_line)?;

    let ground_truth = match rec.ground_truth {
        None => None,
        Some(gt) => {
            for id in &gt.selected_ids {
                if doc.element_by_id(id).is_none() {
                    return Err(malformed(
                        line_no,
                        format!(
                            "document {}: ground truth references unknown element id {id}",
                            doc.doc_id
                        ),
                    ));
                }
            }
            Some(GroundTruthSummary {
                doc_id: doc.doc_id.clone(),
                selected_ids: gt.selected_ids.into_iter().collect(),
                gold_text: gt.gold_text,
            })
        }
    };
    Ok(CorpusEntry {
        document: doc,
        ground_truth,
    })
}

/// Parses a whole corpus. Blank lines are skipped.
pub fn parse_corpus(text: &str, mode: EmbeddingMode) -> Result<Vec<CorpusEntry>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| parse_record(l, i + 1, mode))
        .collect()
}

pub fn load_corpus(path: impl AsRef<Path>, mode: EmbeddingMode) -> Result<Vec<CorpusEntry>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_corpus(&text, mode)
}

/// Serializes one entry as a single corpus line carrying normalized embeddings.
pub fn record_line(entry: &CorpusEntry) -> Result<String> {
    let doc = &entry.document;
    if !doc.is_normalized() {
        return Err(Error::Usage(format!(
            "document {} must be normalized before it is written",
            doc.doc_id
        )));
    }
    let rec = DocumentRecord {
        doc_id: doc.doc_id.clone(),
        title: doc.title.clone(),
        elements: doc
            .elements
            .iter()
            .map(|e| ElementRecord {
                id: e.id.clone(),
                ordinal: e.ordinal,
                modality: e.modality,
                text: e.text.clone(),
                image_path: e.image_path.clone(),
                embedding: e.embedding.clone(),
            })
            .collect(),
        ground_truth: entry.ground_truth.as_ref().map(|gt| GroundTruthRecord {
            selected_ids: gt.selected_ids.iter().cloned().collect(),
            gold_text: gt.gold_text.clone(),
        }),
    };
    serde_json::to_string(&rec).map_err(|e| Error::Usage(e.to_string()))
}

pub fn write_corpus<W: Write>(mut out: W, entries: &[CorpusEntry]) -> Result<()> {
    for entry in entries {
        let line = record_line(entry)?;
        writeln!(out, "{line}").map_err(|e| Error::io("<corpus output>", e))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn element(id: &str, ordinal: usize, modality: Modality, emb: &[f64]) -> ContentElement {
        ContentElement {
            id: id.into(),
            ordinal,
            modality,
            text: format!("sentence {id}"),
            image_path: None,
            raw_embedding: emb.to_vec(),
            embedding: Vec::new(),
        }
    }

    #[test]
    fn shifts_and_normalizes_two_vectors() {
        let doc = Document::new(
            "d",
            "t",
            vec![
                element("e1", 0, Modality::Text, &[-1.0, 3.0]),
                element("e2", 1, Modality::Text, &[1.0, 1.0]),
            ],
        )
        .unwrap();
        let n = normalize_document(&doc, 1e-12).unwrap();
        let e1 = &n.elements[0].embedding;
        let e2 = &n.elements[1].embedding;
        assert!((e1[0] - 0.0).abs() < 1e-9 && (e1[1] - 1.0).abs() < 1e-9);
        assert!((e2[0] - 1.0).abs() < 1e-9 && (e2[1] - 0.0).abs() < 1e-9);
    }

    #[test]
    fn normalized_input_is_fixed_point_at_zero_epsilon() {
        let doc = Document::new(
            "d",
            "t",
            vec![
                element("a", 0, Modality::Text, &[0.0, 0.25, 0.75]),
                element("b", 1, Modality::Image, &[0.5, 0.0, 0.5]),
                element("c", 2, Modality::Text, &[0.2, 0.8, 0.0]),
            ],
        )
        .unwrap();
        let n = normalize_document(&doc, 0.0).unwrap();
        for e in &n.elements {
            for (a, b) in e.embedding.iter().zip(&e.raw_embedding) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn short_embedding_is_rejected() {
        let err = Document::new(
            "d",
            "t",
            vec![
                element("a", 0, Modality::Text, &[0.5, 0.5]),
                element("b", 1, Modality::Text, &[1.0]),
            ],
        )
        .unwrap_err();
        assert!(err.to_string().contains("element b"), "{err}");
    }

    #[test]
    fn zero_norm_without_epsilon_is_an_error() {
        let doc =
            Document::new("d", "t", vec![element("a", 0, Modality::Text, &[0.3, 0.7])]).unwrap();
        // A single element is its own minimum in every dimension.
        assert!(normalize_document(&doc, 0.0).is_err());
        let n = normalize_document(&doc, DEFAULT_EPSILON).unwrap();
        assert!((n.elements[0].embedding[0] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn ordinals_must_be_contiguous() {
        let err = Document::new(
            "d",
            "t",
            vec![
                element("a", 0, Modality::Text, &[1.0]),
                element("b", 2, Modality::Text, &[1.0]),
            ],
        );
        assert!(err.is_err());
    }

    #[test]
    fn elements_are_sorted_by_ordinal() {
        let doc = Document::new(
            "d",
            "t",
            vec![
                element("b", 1, Modality::Text, &[1.0]),
                element("a", 0, Modality::Text, &[1.0]),
            ],
        )
        .unwrap();
        assert_eq!(doc.elements[0].id, "a");
    }

    #[test]
    fn empty_corpus() {
        assert!(parse_corpus("", EmbeddingMode::default())
            .unwrap()
            .is_empty());
        assert!(parse_corpus("\n  \n", EmbeddingMode::default())
            .unwrap()
            .is_empty());
    }

    const TWO_RECORDS: &str = r#"{"doc_id":"first","title":"One","elements":[{"id":"s0","ordinal":0,"modality":"text","text":"a","embedding":[1,2]},{"id":"i0","ordinal":1,"modality":"image","text":"cap","image_path":"x.png","embedding":[3,-1]}],"ground_truth":{"selected_ids":["i0"]}}
{"doc_id":"second","title":"Two","elements":[{"id":"s0","ordinal":0,"modality":"text","text":"b","embedding":[0.5,0.5]}]}
"#;

    #[test]
    fn two_records_in_order() {
        let c = parse_corpus(TWO_RECORDS, EmbeddingMode::default()).unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!(c[0].document.doc_id, "first");
        assert_eq!(c[1].document.doc_id, "second");
        let gt = c[0].ground_truth.as_ref().unwrap();
        assert!(gt.selected_ids.contains("i0"));
        assert!(c[1].ground_truth.is_none());
        assert_eq!(
            c[0].document.elements[1].image_path.as_deref(),
            Some("x.png")
        );
    }

    #[test]
    fn unknown_ground_truth_id_names_doc_and_line() {
        let text = TWO_RECORDS.replace("\"i0\"]", "\"zz\"]");
        let err = parse_corpus(&text, EmbeddingMode::default()).unwrap_err();
        match err {
            Error::Malformed { line, message } => {
                assert_eq!(line, 1);
                assert!(
                    message.contains("first") && message.contains("zz"),
                    "{message}"
                );
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn malformed_line_reports_line_number() {
        let text = format!("{}\n{{not json", TWO_RECORDS.lines().next().unwrap());
        match parse_corpus(&text, EmbeddingMode::default()).unwrap_err() {
            Error::Malformed { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn pre_normalized_mode_validates() {
        let ok = r#"{"doc_id":"d","elements":[{"id":"a","ordinal":0,"modality":"text","embedding":[0.25,0.75]}]}"#;
        assert!(parse_corpus(ok, EmbeddingMode::PreNormalized).is_ok());
        let neg = r#"{"doc_id":"d","elements":[{"id":"a","ordinal":0,"modality":"text","embedding":[-0.25,1.25]}]}"#;
        assert!(parse_corpus(neg, EmbeddingMode::PreNormalized).is_err());
        let unnorm = r#"{"doc_id":"d","elements":[{"id":"a","ordinal":0,"modality":"text","embedding":[0.5,0.75]}]}"#;
        assert!(parse_corpus(unnorm, EmbeddingMode::PreNormalized).is_err());
    }

    #[test]
    fn written_corpus_reloads_identically() {
        let c = parse_corpus(TWO_RECORDS, EmbeddingMode::default()).unwrap();
        let mut buf = Vec::new();
        write_corpus(&mut buf, &c).unwrap();
        let back = parse_corpus(
            std::str::from_utf8(&buf).unwrap(),
            EmbeddingMode::PreNormalized,
        )
        .unwrap();
        for (a, b) in c.iter().zip(&back) {
            assert_eq!(a.document.doc_id, b.document.doc_id);
            assert_eq!(a.ground_truth, b.ground_truth);
            for (x, y) in a.document.elements.iter().zip(&b.document.elements) {
                assert_eq!(x.embedding, y.embedding);
                assert_eq!(x.ordinal, y.ordinal);
            }
        }
    }
}
