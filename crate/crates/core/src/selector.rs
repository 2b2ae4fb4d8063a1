//! Cardinality-constrained maximization of the objective in [`crate::dsf`].

use serde::{Deserialize, Serialize};

use crate::corpus::Document;
use crate::dsf::{SelectionState, WeightVector};
use crate::error::{Error, Result};

/// Largest document [`brute_force_select`] will enumerate.
pub const BRUTE_FORCE_MAX_N: usize = 20;

/// Characters per token used when sizing a summary against a token budget.
pub const CHARS_PER_TOKEN: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummarySelection {
    pub doc_id: String,
    /// Ordinals in the order they were picked.
    pub selection_order: Vec<usize>,
    /// The same ordinals sorted ascending.
    pub document_order: Vec<usize>,
    /// `f(A)` at the weights used for selection.
    pub objective: f64,
    /// `g_u(A)` per dimension.
    pub g: Vec<f64>,
}

impl SummarySelection {
    fn from_state(doc: &Document, state: &SelectionState, w: &WeightVector) -> Self {
        let mut document_order = state.selected().to_vec();
        document_order.sort_unstable();
        SummarySelection {
            doc_id: doc.doc_id.clone(),
            selection_order: state.selected().to_vec(),
            document_order,
            objective: state.objective(w),
            g: state.g_all(),
        }
    }

    pub fn len(&self) -> usize {
        self.selection_order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.selection_order.is_empty()
    }
}

/// How many elements a summary may hold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Budget {
    /// Exactly `min(k, N)` elements.
    Elements(usize),
    /// The longest greedy prefix whose text fits in this many tokens
    /// (at least one element).
    Tokens(usize),
}

/// Rough token count of an element's text.
pub fn estimate_tokens(text: &str) -> usize {
    text.chars().count().div_ceil(CHARS_PER_TOKEN)
}

fn check_inputs(doc: &Document, w: &WeightVector) -> Result<()> {
    if doc.is_empty() {
        return Err(Error::validation(format!(
            "document {} is empty",
            doc.doc_id
        )));
    }
    if w.dim() != doc.dim() {
        return Err(Error::validation(format!(
            "weights have dimension {}, document {} has {}",
            w.dim(),
            doc.doc_id,
            doc.dim()
        )));
    }
    Ok(())
}

/// Picks the unselected element with the largest marginal gain, lowest
/// ordinal first on ties.
fn best_candidate(doc: &Document, w: &WeightVector, state: &SelectionState) -> Option<usize> {
    let sqrt_g = state.sqrt_g();
    let mut best: Option<(usize, f64)> = None;
    for e in &doc.elements {
        if state.contains(e.ordinal) {
            continue;
        }
        let gain = state.gain_with_cache(w, e, &sqrt_g);
        match best {
            Some((_, g)) if gain <= g => {}
            _ => best = Some((e.ordinal, gain)),
        }
    }
    best.map(|(o, _)| o)
}

/// Greedy maximization under a [`Budget`].
pub fn greedy_with_budget(
    doc: &Document,
    w: &WeightVector,
    budget: Budget,
) -> Result<SummarySelection> {
    check_inputs(doc, w)?;
    let mut state = SelectionState::empty(doc)?;
    let mut tokens = 0usize;
    loop {
        if let Budget::Elements(k) = budget {
            if state.len() >= k {
                break;
            }
        }
        let Some(next) = best_candidate(doc, w, &state) else {
            break;
        };
        if let Budget::Tokens(limit) = budget {
            let t = estimate_tokens(&doc.elements[next].text);
            if !state.is_empty() && tokens + t > limit {
                break;
            }
            tokens += t;
        }
        state.apply(&doc.elements[next])?;
    }
    Ok(SummarySelection::from_state(doc, &state, w))
}

/// Greedily grows the selection to `min(k, N)` elements.
pub fn greedy_select(doc: &Document, w: &WeightVector, k: usize) -> Result<SummarySelection> {
    if k == 0 {
        return Err(Error::validation("K must be at least 1"));
    }
    greedy_with_budget(doc, w, Budget::Elements(k))
}

/// Exact maximizer of `f` over all subsets with `|A| ≤ k`. Ties go to the
/// lexicographically smallest ordinal list.
pub fn brute_force_select(doc: &Document, w: &WeightVector, k: usize) -> Result<SummarySelection> {
    check_inputs(doc, w)?;
    if k == 0 {
        return Err(Error::validation("K must be at least 1"));
    }
    let n = doc.len();
    if n > BRUTE_FORCE_MAX_N {
        return Err(Error::validation(format!(
            "brute force is limited to {BRUTE_FORCE_MAX_N} elements, document {} has {n}",
            doc.doc_id
        )));
    }
    let k = k.min(n);
    let mut best: Option<(f64, Vec<usize>)> = None;
    let mut current = Vec::with_capacity(k);
    enumerate(doc, w, k, 0, &mut current, &mut best)?;
    let (_, ordinals) = best.expect("a nonempty document has at least one subset");
    let state = SelectionState::from_ordinals(doc, &ordinals)?;
    Ok(SummarySelection::from_state(doc, &state, w))
}

fn enumerate(
    doc: &Document,
    w: &WeightVector,
    k: usize,
    start: usize,
    current: &mut Vec<usize>,
    best: &mut Option<(f64, Vec<usize>)>,
) -> Result<()> {
    if !current.is_empty() {
        let f = SelectionState::from_ordinals(doc, current)?.objective(w);
        let better = match best {
            None => true,
            Some((bf, bo)) => f > *bf || (f == *bf && current.as_slice() < bo.as_slice()),
        };
        if better {
            *best = Some((f, current.clone()));
        }
    }
    if current.len() == k {
        return Ok(());
    }
    for next in start..doc.len() {
        current.push(next);
        enumerate(doc, w, k, next + 1, current, best)?;
        current.pop();
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsf::fixtures::toy_doc;

    fn half() -> WeightVector {
        WeightVector::new(vec![0.5, 0.5]).unwrap()
    }

    #[test]
    fn greedy_on_toy_document() {
        let doc = toy_doc();
        let sel = greedy_select(&doc, &half(), 2).unwrap();
        assert_eq!(sel.selection_order, vec![2, 0]);
        assert_eq!(sel.document_order, vec![0, 2]);
        assert!((sel.objective - 1.82514).abs() < 1e-5);
        assert_eq!(sel.g.len(), 2);
    }

    #[test]
    fn greedy_fills_whole_document_when_k_exceeds_n() {
        let doc = toy_doc();
        let sel = greedy_select(&doc, &half(), 10).unwrap();
        assert_eq!(sel.document_order, vec![0, 1, 2]);
    }

    #[test]
    fn zero_weights_pick_first_ordinals() {
        let doc = toy_doc();
        let sel = greedy_select(&doc, &WeightVector::zeros(2), 2).unwrap();
        assert_eq!(sel.selection_order, vec![0, 1]);
        assert_eq!(sel.objective, 0.0);
    }

    #[test]
    fn brute_force_on_toy_document() {
        let doc = toy_doc();
        let opt = brute_force_select(&doc, &half(), 2).unwrap();
        assert_eq!(opt.document_order, vec![0, 1]);
        assert!((opt.objective - 1.87083).abs() < 1e-5);

        let one = brute_force_select(&doc, &half(), 1).unwrap();
        assert_eq!(one.document_order, vec![2]);
        assert!((one.objective - 2f64.sqrt()).abs() < 1e-12);

        let all = brute_force_select(&doc, &half(), 3).unwrap();
        assert_eq!(all.document_order, vec![0, 1, 2]);
    }

    #[test]
    fn k_zero_is_rejected() {
        assert!(greedy_select(&toy_doc(), &half(), 0).is_err());
        assert!(brute_force_select(&toy_doc(), &half(), 0).is_err());
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        assert!(greedy_select(&toy_doc(), &WeightVector::uniform(3), 1).is_err());
    }

    #[test]
    fn token_budget_takes_longest_fitting_prefix() {
        let mut doc = toy_doc();
        for e in &mut doc.elements {
            e.text = "x".repeat(40); // 10 tokens each
        }
        let full = greedy_select(&doc, &half(), 3).unwrap();
        let sel = greedy_with_budget(&doc, &half(), Budget::Tokens(25)).unwrap();
        assert_eq!(sel.selection_order, full.selection_order[..2]);
        let tiny = greedy_with_budget(&doc, &half(), Budget::Tokens(1)).unwrap();
        assert_eq!(tiny.len(), 1);
    }

    #[test]
    fn brute_force_guard() {
        use crate::corpus::{ContentElement, Document, Modality};
        let elements = (0..21)
            .map(|i| ContentElement {
                id: format!("e{i}"),
                ordinal: i,
                modality: Modality::Text,
                text: String::new(),
                image_path: None,
                raw_embedding: vec![1.0],
                embedding: vec![1.0],
            })
            .collect();
        let doc = Document::new("big", "", elements).unwrap();
        assert!(brute_force_select(&doc, &WeightVector::uniform(1), 2).is_err());
    }
}
