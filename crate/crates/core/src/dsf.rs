//! Deep submodular objective over multimodal content elements.
//!
//! For a document `D` with nonnegative, L1-normalized embeddings and a
//! selection `A ⊆ D` split into images `A_I` and text `A_T`, the objective is
//!
//! ```text
//! f(A) = Σ_u w_u · sqrt(g_u(A))
//! g_u(A) = (Σ_{x∈A} x_u) · (|D| + Σ_{y∈D∖A} y_u) + h_u(A)
//! h_u(A) = Σ_{x∈A_I} Σ_{y∈A_T} x_u y_u = (Σ_{x∈A_I} x_u) · (Σ_{y∈A_T} y_u)
//! ```
//!
//! which is the coverage, redundancy, alignment and size terms collected per
//! dimension. `g_u` is monotone submodular on normalized inputs, so `f` is too
//! for any `w ≥ 0`.
//!
//! [`SelectionState`] keeps the per-dimension sums so that adding an element or
//! scoring a candidate costs `O(d)`.

use serde::{Deserialize, Serialize};

use crate::corpus::{ContentElement, Document};
use crate::error::{Error, Result};

/// Nonnegative per-dimension weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct WeightVector(Vec<f64>);

impl WeightVector {
    pub fn new(w: Vec<f64>) -> Result<Self> {
        if w.is_empty() {
            return Err(Error::validation("weight vector must not be empty"));
        }
        if let Some((u, v)) = w
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.is_finite() && **v >= 0.0))
        {
            return Err(Error::validation(format!(
                "weight {u} is {v}; weights must be finite and nonnegative"
            )));
        }
        Ok(WeightVector(w))
    }

    /// `w_u = 1/d` for every dimension.
    pub fn uniform(d: usize) -> Self {
        WeightVector(vec![1.0 / d as f64; d])
    }

    pub fn zeros(d: usize) -> Self {
        WeightVector(vec![0.0; d])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        WeightVector::new(self.0.iter().map(|v| v * c).collect())
    }

    pub fn norm_sq(&self) -> f64 {
        self.0.iter().map(|v| v * v).sum()
    }

    /// Applies `w_u ← max(0, w_u − step_u)`.
    pub(crate) fn descend_projected(&mut self, step: &[f64]) {
        for (w, s) in self.0.iter_mut().zip(step) {
            *w = (*w - s).max(0.0);
        }
    }
}

impl TryFrom<Vec<f64>> for WeightVector {
    type Error = Error;

    fn try_from(w: Vec<f64>) -> Result<Self> {
        WeightVector::new(w)
    }
}

impl From<WeightVector> for Vec<f64> {
    fn from(w: WeightVector) -> Self {
        w.0
    }
}

#[inline]
fn g_value(n_doc: f64, doc_total: f64, sel: f64, img: f64, txt: f64) -> f64 {
    let g = sel * (n_doc + (doc_total - sel)) + img * txt;
    // Rounding can only push an exact zero slightly negative.
    g.max(0.0)
}

/// Per-dimension accumulators for a selection inside one document.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectionState {
    selected: Vec<usize>,
    in_set: Vec<bool>,
    sum_sel: Vec<f64>,
    sum_sel_img: Vec<f64>,
    sum_sel_txt: Vec<f64>,
    doc_totals: Vec<f64>,
    n_doc: f64,
}

impl SelectionState {
    /// The empty selection over a normalized document.
    pub fn empty(doc: &Document) -> Result<Self> {
        if !doc.is_normalized() {
            return Err(Error::Usage(format!(
                "document {} has not been normalized",
                doc.doc_id
            )));
        }
        let d = doc.dim();
        let mut doc_totals = vec![0.0; d];
        for e in &doc.elements {
            for (t, v) in doc_totals.iter_mut().zip(&e.embedding) {
                *t += v;
            }
        }
        Ok(SelectionState {
            selected: Vec::new(),
            in_set: vec![false; doc.len()],
            sum_sel: vec![0.0; d],
            sum_sel_img: vec![0.0; d],
            sum_sel_txt: vec![0.0; d],
            doc_totals,
            n_doc: doc.len() as f64,
        })
    }

    /// Builds the state for `ordinals` by inserting them in the given order.
    pub fn from_ordinals(doc: &Document, ordinals: &[usize]) -> Result<Self> {
        let mut state = SelectionState::empty(doc)?;
        for &o in ordinals {
            let e = doc.elements.get(o).ok_or_else(|| {
                Error::Usage(format!("document {} has no ordinal {o}", doc.doc_id))
            })?;
            state.apply(e)?;
        }
        Ok(state)
    }

    pub fn dim(&self) -> usize {
        self.sum_sel.len()
    }

    /// Selected ordinals in insertion order.
    pub fn selected(&self) -> &[usize] {
        &self.selected
    }

    pub fn len(&self) -> usize {
        self.selected.len()
    }

    pub fn is_empty(&self) -> bool {
        self.selected.is_empty()
    }

    pub fn contains(&self, ordinal: usize) -> bool {
        self.in_set.get(ordinal).copied().unwrap_or(false)
    }

    pub fn sum_selected(&self) -> &[f64] {
        &self.sum_sel
    }

    pub fn sum_selected_images(&self) -> &[f64] {
        &self.sum_sel_img
    }

    pub fn sum_selected_text(&self) -> &[f64] {
        &self.sum_sel_txt
    }

    pub fn doc_totals(&self) -> &[f64] {
        &self.doc_totals
    }

    /// `h_u(A)` in its factorized form.
    pub fn alignment(&self, u: usize) -> f64 {
        self.sum_sel_img[u] * self.sum_sel_txt[u]
    }

    pub fn g(&self, u: usize) -> f64 {
        g_value(
            self.n_doc,
            self.doc_totals[u],
            self.sum_sel[u],
            self.sum_sel_img[u],
            self.sum_sel_txt[u],
        )
    }

    pub fn g_all(&self) -> Vec<f64> {
        (0..self.dim()).map(|u| self.g(u)).collect()
    }

    /// `sqrt(g_u(A))` per dimension, which is also `∂f/∂w_u`.
    pub fn sqrt_g(&self) -> Vec<f64> {
        (0..self.dim()).map(|u| self.g(u).sqrt()).collect()
    }

    pub fn objective(&self, w: &WeightVector) -> f64 {
        debug_assert_eq!(w.dim(), self.dim());
        w.as_slice()
            .iter()
            .enumerate()
            .map(|(u, wu)| wu * self.g(u).sqrt())
            .sum()
    }

    fn check_candidate(&self, candidate: &ContentElement) -> Result<()> {
        if candidate.embedding.len() != self.dim() {
            return Err(Error::Usage(format!(
                "element {} has dimension {}, state has {}",
                candidate.id,
                candidate.embedding.len(),
                self.dim()
            )));
        }
        match self.in_set.get(candidate.ordinal) {
            None => Err(Error::Usage(format!(
                "element {} has ordinal {} outside the document",
                candidate.id, candidate.ordinal
            ))),
            Some(true) => Err(Error::Usage(format!(
                "element {} is already selected",
                candidate.id
            ))),
            Some(false) => Ok(()),
        }
    }

    /// `f(A ∪ {p}) − f(A)`, given `sqrt_g` holding `sqrt(g_u(A))`.
    ///
    /// The caller guarantees `p ∉ A`; this is the hot loop of greedy selection.
    pub fn gain_with_cache(
        &self,
        w: &WeightVector,
        candidate: &ContentElement,
        sqrt_g: &[f64],
    ) -> f64 {
        let image = candidate.is_image();
        let mut gain = 0.0;
        for (u, (&wu, &p)) in w.as_slice().iter().zip(&candidate.embedding).enumerate() {
            if wu == 0.0 {
                continue;
            }
            let sel = self.sum_sel[u] + p;
            let (img, txt) = if image {
                (self.sum_sel_img[u] + p, self.sum_sel_txt[u])
            } else {
                (self.sum_sel_img[u], self.sum_sel_txt[u] + p)
            };
            let g_new = g_value(self.n_doc, self.doc_totals[u], sel, img, txt);
            gain += wu * (g_new.sqrt() - sqrt_g[u]);
        }
        gain
    }

    pub fn marginal_gain(&self, w: &WeightVector, candidate: &ContentElement) -> Result<f64> {
        self.check_candidate(candidate)?;
        Ok(self.gain_with_cache(w, candidate, &self.sqrt_g()))
    }

    /// Adds `candidate` to the selection in place.
    pub fn apply(&mut self, candidate: &ContentElement) -> Result<()> {
        self.check_candidate(candidate)?;
        let side = if candidate.is_image() {
            &mut self.sum_sel_img
        } else {
            &mut self.sum_sel_txt
        };
        for ((s, t), &p) in self
            .sum_sel
            .iter_mut()
            .zip(side.iter_mut())
            .zip(&candidate.embedding)
        {
            *s += p;
            *t += p;
        }
        self.in_set[candidate.ordinal] = true;
        self.selected.push(candidate.ordinal);
        Ok(())
    }
}

/// `g_u(A)` for one dimension.
pub fn eval_g(state: &SelectionState, u: usize) -> f64 {
    state.g(u)
}

/// `f(A)` for the selection held by `state`.
pub fn eval_f(state: &SelectionState, w: &WeightVector) -> f64 {
    state.objective(w)
}

pub fn marginal_gain(
    state: &SelectionState,
    w: &WeightVector,
    candidate: &ContentElement,
) -> Result<f64> {
    state.marginal_gain(w, candidate)
}

/// Returns a new state with `candidate` added.
pub fn apply_element(state: &SelectionState, candidate: &ContentElement) -> Result<SelectionState> {
    let mut next = state.clone();
    next.apply(candidate)?;
    Ok(next)
}

/// `f` of an arbitrary subset given by ordinals.
pub fn objective_of(doc: &Document, w: &WeightVector, ordinals: &[usize]) -> Result<f64> {
    Ok(SelectionState::from_ordinals(doc, ordinals)?.objective(w))
}
