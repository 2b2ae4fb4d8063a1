//! Learning the objective weights from gold summaries.
//!
//! Training minimizes, per document, the hinge loss
//! `max(f(A_pred) − f(A*), 0) + (λ/2)‖w‖²` where `A_pred` is the greedy
//! maximizer at the current weights. Each sample alternates a greedy
//! selection at fixed `w` with one projected subgradient step at fixed
//! selections. `f` is linear in `w`, so the subgradient of the hinge term is
//! just `sqrt(g(A_pred)) − sqrt(g(A*))`; nothing is differentiated through the
//! square root.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{CorpusEntry, Document, GroundTruthSummary};
use crate::dsf::{SelectionState, WeightVector};
use crate::error::{Error, Result};
use crate::selector::{greedy_with_budget, Budget};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub lambda: f64,
    pub lr: f64,
    pub max_epochs: usize,
    pub patience: usize,
    pub tol: f64,
    pub budget: Budget,
    pub seed: u64,
    /// Only apply the hinge subgradient while the hinge is active. Turning
    /// this off applies the `sqrt(g)` difference on every step.
    pub gate_hinge: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            lambda: 0.1,
            lr: 0.01,
            max_epochs: 50,
            patience: 3,
            tol: 1e-4,
            budget: Budget::Tokens(3000),
            seed: 42,
            gate_hinge: true,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::validation(format!(
                "lambda must be >= 0, got {}",
                self.lambda
            )));
        }
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return Err(Error::validation(format!(
                "learning rate must be > 0, got {}",
                self.lr
            )));
        }
        if !(self.tol >= 0.0) {
            return Err(Error::validation(format!(
                "tol must be >= 0, got {}",
                self.tol
            )));
        }
        match self.budget {
            Budget::Elements(0) => Err(Error::validation("K must be at least 1")),
            _ => Ok(()),
        }
    }
}

/// Selections and objective values for one (document, gold) pair.
#[derive(Debug, Clone)]
pub struct SampleEval {
    pub predicted: SelectionState,
    pub gold: SelectionState,
    pub f_predicted: f64,
    pub f_gold: f64,
}

impl SampleEval {
    pub fn hinge(&self) -> f64 {
        (self.f_predicted - self.f_gold).max(0.0)
    }

    pub fn hinge_active(&self) -> bool {
        self.f_predicted - self.f_gold > 0.0
    }
}

fn gold_ordinals(doc: &Document, gold: &GroundTruthSummary) -> Result<Vec<usize>> {
    if gold.doc_id != doc.doc_id {
        return Err(Error::validation(format!(
            "ground truth for {} paired with document {}",
            gold.doc_id, doc.doc_id
        )));
    }
    doc.ordinals_of(&gold.selected_ids)
}

fn evaluate_with(
    doc: &Document,
    gold: &[usize],
    w: &WeightVector,
    budget: Budget,
) -> Result<SampleEval> {
    let sel = greedy_with_budget(doc, w, budget)?;
    let predicted = SelectionState::from_ordinals(doc, &sel.selection_order)?;
    let gold = SelectionState::from_ordinals(doc, gold)?;
    Ok(SampleEval {
        f_predicted: predicted.objective(w),
        f_gold: gold.objective(w),
        predicted,
        gold,
    })
}

pub fn evaluate_sample(
    doc: &Document,
    gold: &GroundTruthSummary,
    w: &WeightVector,
    budget: Budget,
) -> Result<SampleEval> {
    evaluate_with(doc, &gold_ordinals(doc, gold)?, w, budget)
}

/// `max(f(A_greedy) − f(A*), 0)` without the regularizer.
pub fn hinge_term(
    doc: &Document,
    gold: &GroundTruthSummary,
    w: &WeightVector,
    budget: Budget,
) -> Result<f64> {
    Ok(evaluate_sample(doc, gold, w, budget)?.hinge())
}

pub fn hinge_loss(
    doc: &Document,
    gold: &GroundTruthSummary,
    w: &WeightVector,
    budget: Budget,
    lambda: f64,
) -> Result<f64> {
    Ok(hinge_term(doc, gold, w, budget)? + 0.5 * lambda * w.norm_sq())
}

/// Subgradient of the hinge term with respect to `w` at fixed selections.
pub fn hinge_subgradient(eval: &SampleEval, gated: bool) -> Vec<f64> {
    let d = eval.predicted.dim();
    if gated && !eval.hinge_active() {
        return vec![0.0; d];
    }
    (0..d)
        .map(|u| eval.predicted.g(u).sqrt() - eval.gold.g(u).sqrt())
        .collect()
}

#[derive(Debug, Clone)]
pub struct StepOutcome {
    pub weights: WeightVector,
    pub hinge_active: bool,
    /// Loss at the weights before the step.
    pub loss: f64,
}

fn step_with(
    doc: &Document,
    gold: &[usize],
    w: &WeightVector,
    config: &TrainConfig,
) -> Result<StepOutcome> {
    let eval = evaluate_with(doc, gold, w, config.budget)?;
    let loss = eval.hinge() + 0.5 * config.lambda * w.norm_sq();
    let mut grad = hinge_subgradient(&eval, config.gate_hinge);
    for (g, wu) in grad.iter_mut().zip(w.as_slice()) {
        *g = config.lr * (*g + config.lambda * wu);
    }
    let mut next = w.clone();
    next.descend_projected(&grad);
    Ok(StepOutcome {
        weights: next,
        hinge_active: eval.hinge_active(),
        loss,
    })
}

/// One projected subgradient step on a single sample.
pub fn sgd_step(
    doc: &Document,
    gold: &GroundTruthSummary,
    w: &WeightVector,
    config: &TrainConfig,
) -> Result<StepOutcome> {
    step_with(doc, &gold_ordinals(doc, gold)?, w, config)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    /// Validation loss failed to improve by `tol` for `patience` epochs.
    Converged,
    MaxEpochs,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochStats {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_loss: f64,
    pub val_hinge: f64,
    pub hinge_active_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub initial_val_loss: f64,
    pub initial_val_hinge: f64,
    pub epochs: Vec<EpochStats>,
    /// Epoch whose weights were kept; 0 means the initial weights.
    pub best_epoch: usize,
    pub best_val_loss: f64,
    pub weights: WeightVector,
    pub stop_reason: StopReason,
}

struct Sample<'a> {
    doc: &'a Document,
    gold: Vec<usize>,
}

fn prepare<'a>(corpus: &'a [CorpusEntry], what: &str) -> Result<Vec<Sample<'a>>> {
    if corpus.is_empty() {
        return Err(Error::validation(format!("{what} corpus is empty")));
    }
    corpus
        .iter()
        .map(|entry| {
            let gt = entry.ground_truth.as_ref().ok_or_else(|| {
                Error::validation(format!(
                    "document {} in the {what} corpus has no ground truth",
                    entry.document.doc_id
                ))
            })?;
            Ok(Sample {
                doc: &entry.document,
                gold: gold_ordinals(&entry.document, gt)?,
            })
        })
        .collect()
}

fn mean_loss(samples: &[Sample], w: &WeightVector, config: &TrainConfig) -> Result<(f64, f64)> {
    let mut hinge = 0.0;
    for s in samples {
        hinge += evaluate_with(s.doc, &s.gold, w, config.budget)?.hinge();
    }
    let hinge = hinge / samples.len() as f64;
    Ok((hinge + 0.5 * config.lambda * w.norm_sq(), hinge))
}

/// Mean hinge term (without regularizer) of `w` over a corpus with ground truth.
pub fn mean_hinge(corpus: &[CorpusEntry], w: &WeightVector, budget: Budget) -> Result<f64> {
    let samples = prepare(corpus, "evaluation")?;
    let config = TrainConfig {
        budget,
        lambda: 0.0,
        ..TrainConfig::default()
    };
    Ok(mean_loss(&samples, w, &config)?.1)
}

pub fn train(
    train_corpus: &[CorpusEntry],
    val_corpus: &[CorpusEntry],
    config: &TrainConfig,
) -> Result<TrainReport> {
    train_with_observer(train_corpus, val_corpus, config, |_, _| {})
}

/// Like [`train`], calling `observe(epoch, &w)` after every update.
pub fn train_with_observer<F>(
    train_corpus: &[CorpusEntry],
    val_corpus: &[CorpusEntry],
    config: &TrainConfig,
    mut observe: F,
) -> Result<TrainReport>
where
    F: FnMut(usize, &WeightVector),
{
    config.validate()?;
    let train = prepare(train_corpus, "training")?;
    let val = prepare(val_corpus, "validation")?;
    let d = train[0].doc.dim();
    if let Some(s) = train.iter().chain(&val).find(|s| s.doc.dim() != d) {
        return Err(Error::validation(format!(
            "document {} has dimension {}, expected {d}",
            s.doc.doc_id,
            s.doc.dim()
        )));
    }

    let mut w = WeightVector::uniform(d);
    let (initial_val_loss, initial_val_hinge) = mean_loss(&val, &w, config)?;
    let mut best = (initial_val_loss, 0usize, w.clone());
    let mut stale = 0usize;
    let mut epochs = Vec::new();
    let mut stop_reason = StopReason::MaxEpochs;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut order: Vec<usize> = (0..train.len()).collect();

    for epoch in 1..=config.max_epochs {
        order.shuffle(&mut rng);
        let mut loss_sum = 0.0;
        let mut active = 0usize;
        for &i in &order {
            let s = &train[i];
            let out = step_with(s.doc, &s.gold, &w, config)?;
            loss_sum += out.loss;
            active += usize::from(out.hinge_active);
            w = out.weights;
            observe(epoch, &w);
        }
        let (val_loss, val_hinge) = mean_loss(&val, &w, config)?;
        log::debug!("epoch {epoch}: val_loss={val_loss:.6} val_hinge={val_hinge:.6}");
        epochs.push(EpochStats {
            epoch,
            train_loss: loss_sum / train.len() as f64,
            val_loss,
            val_hinge,
            hinge_active_fraction: active as f64 / train.len() as f64,
        });
        if val_loss < best.0 - config.tol {
            best = (val_loss, epoch, w.clone());
            stale = 0;
        } else {
            if val_loss < best.0 {
                best = (val_loss, epoch, w.clone());
            }
            stale += 1;
            if stale >= config.patience {
                stop_reason = StopReason::Converged;
                break;
            }
        }
    }

    let (best_val_loss, best_epoch, weights) = best;
    Ok(TrainReport {
        initial_val_loss,
        initial_val_hinge,
        epochs,
        best_epoch,
        best_val_loss,
        weights,
        stop_reason,
    })
}
