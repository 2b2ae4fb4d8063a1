use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use log::{info, warn};
use postdoc_core::color::{assign_roles, parse_palette, ColorRoles, DEFAULT_PALETTE};
use postdoc_core::corpus::{load_corpus, write_corpus, CorpusEntry, Document, EmbeddingMode};
use postdoc_core::dsf::WeightVector;
use postdoc_core::layout::{generate_layout, resolve_aspect_ratios, LayoutConfig, PosterLayout};
use postdoc_core::metrics::{self, MeanStd, Scores};
use postdoc_core::ngo::score_layout;
use postdoc_core::paraphrase::{
    paraphrase_offline, paraphrase_remote, ClientConfig, HttpChatClient, PosterContent,
};
use postdoc_core::render::render_svg;
use postdoc_core::selector::{greedy_with_budget, Budget};
use postdoc_core::summary::{SummaryFile, SummaryRecord};
use postdoc_core::trainer::{train, TrainConfig};
use postdoc_core::weights::WeightsFile;
use postdoc_core::{Error, Result};
use rayon::prelude::*;
use serde::Serialize;

use crate::output::{emit, pretty, write_atomic};
use crate::{BudgetArgs, Command, EmbeddingArgs, RemoteArgs};

impl EmbeddingArgs {
    fn mode(self) -> EmbeddingMode {
        if self.raw {
            EmbeddingMode::Raw {
                epsilon: self.epsilon,
            }
        } else {
            EmbeddingMode::PreNormalized
        }
    }
}

impl BudgetArgs {
    fn budget(self) -> Result<Budget> {
        match self.k {
            Some(0) => Err(Error::Validation("--k must be at least 1".into())),
            Some(k) => Ok(Budget::Elements(k)),
            None if self.token_budget == 0 => Err(Error::Validation(
                "--token-budget must be at least 1".into(),
            )),
            None => Ok(Budget::Tokens(self.token_budget)),
        }
    }
}

impl RemoteArgs {
    /// Client settings when the remote path was requested.
    fn client_config(&self) -> Option<ClientConfig> {
        if self.offline || !(self.remote || self.endpoint.is_some()) {
            return None;
        }
        let mut config = ClientConfig::default();
        if let Some(e) = &self.endpoint {
            config.endpoint = e.clone();
        }
        if let Some(m) = &self.model {
            config.model = m.clone();
        }
        if let Some(t) = self.temperature {
            config.temperature = t;
        }
        if let Some(t) = self.timeout {
            config.timeout_secs = t;
        }
        Some(config)
    }
}

pub fn run(command: Command) -> Result<()> {
    match command {
        Command::Ingest {
            input,
            out,
            pre_normalized,
            epsilon,
        } => ingest(&input, &out, pre_normalized, epsilon),
        Command::Train {
            corpus,
            val,
            out,
            report,
            lambda,
            lr,
            seed,
            max_epochs,
            patience,
            tol,
            ungated,
            budget,
            embeddings,
        } => {
            let config = TrainConfig {
                lambda,
                lr,
                max_epochs,
                patience,
                tol,
                budget: budget.budget()?,
                seed,
                gate_hinge: !ungated,
            };
            train_cmd(
                &corpus,
                &val,
                &out,
                report.as_deref(),
                config,
                embeddings.mode(),
            )
        }
        Command::Summarize {
            weights,
            doc,
            out,
            jobs,
            budget,
            embeddings,
        } => summarize(
            weights.as_deref(),
            &doc,
            &out,
            jobs,
            budget.budget()?,
            embeddings.mode(),
        ),
        Command::Evaluate {
            pred,
            gold,
            source,
            raw_cosine,
            out,
            jobs,
            embeddings,
        } => evaluate(
            &pred,
            &gold,
            source.as_deref(),
            raw_cosine,
            out.as_deref(),
            jobs,
            embeddings.mode(),
        ),
        Command::Paraphrase {
            summary,
            doc_id,
            out,
            remote,
        } => {
            let file = SummaryFile::load(&summary)?;
            let record = file.pick(doc_id.as_deref())?;
            let content = paraphrase(record, &remote)?;
            write_atomic(&out, content.to_json().as_bytes())
        }
        Command::Layout {
            content,
            config,
            out,
        } => {
            let content = PosterContent::load(&content)?;
            let layout = layout(&content, config.as_deref())?;
            write_atomic(&out, layout.to_json().as_bytes())
        }
        Command::ScoreLayout { layout, out } => {
            let layout = PosterLayout::load(&layout)?;
            emit(&pretty(&score_layout(&layout)?), out.as_deref())
        }
        Command::Palette { colors, out } => {
            emit(&roles(colors.as_deref())?.to_json(), out.as_deref())
        }
        Command::Render {
            layout,
            content,
            roles,
            font,
            out,
        } => {
            let layout = PosterLayout::load(&layout)?;
            let content = PosterContent::load(&content)?;
            let roles = ColorRoles::load(&roles)?;
            let svg = render_svg(&layout, &roles, &content, &font)?;
            write_atomic(&out, svg.as_bytes())
        }
        Command::Poster {
            doc,
            doc_id,
            weights,
            config,
            colors,
            font,
            out,
            budget,
            embeddings,
            remote,
        } => {
            let corpus = load_corpus(&doc, embeddings.mode())?;
            let document = pick_document(&corpus, doc_id.as_deref())?;
            let w = load_weights(weights.as_deref(), document.dim())?;
            let selection = greedy_with_budget(document, &w, budget.budget()?)?;
            let record = SummaryRecord::new(document, &selection);
            let content = paraphrase(&record, &remote)?;
            let layout = layout(&content, config.as_deref())?;
            let roles = roles(colors.as_deref())?;
            let svg = render_svg(&layout, &roles, &content, &font)?;
            write_atomic(&out, svg.as_bytes())
        }
    }
}

fn ingest(input: &Path, out: &Path, pre_normalized: bool, epsilon: f64) -> Result<()> {
    let mode = if pre_normalized {
        EmbeddingMode::PreNormalized
    } else {
        EmbeddingMode::Raw { epsilon }
    };
    let corpus = load_corpus(input, mode)?;
    let mut buf = Vec::new();
    write_corpus(&mut buf, &corpus)?;
    write_atomic(out, &buf)?;
    info!("wrote {} documents to {}", corpus.len(), out.display());
    Ok(())
}

/// ISO-8601 time from `SOURCE_DATE_EPOCH`, so reproducible builds stay
/// byte-identical. Unset means no timestamp.
fn creation_time() -> Result<Option<String>> {
    let Ok(raw) = std::env::var("SOURCE_DATE_EPOCH") else {
        return Ok(None);
    };
    let secs: i64 = raw
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("SOURCE_DATE_EPOCH is not an integer: {raw:?}")))?;
    let t = chrono::DateTime::from_timestamp(secs, 0)
        .ok_or_else(|| Error::Config(format!("SOURCE_DATE_EPOCH out of range: {secs}")))?;
    Ok(Some(t.format("%Y-%m-%dT%H:%M:%SZ").to_string()))
}

fn train_cmd(
    corpus: &Path,
    val: &Path,
    out: &Path,
    report_path: Option<&Path>,
    config: TrainConfig,
    mode: EmbeddingMode,
) -> Result<()> {
    let train_set = load_corpus(corpus, mode)?;
    let val_set = load_corpus(val, mode)?;
    let created_at = creation_time()?;
    let report = train(&train_set, &val_set, &config)?;
    info!(
        "best epoch {} of {}, validation loss {:.6} (initial {:.6})",
        report.best_epoch,
        report.epochs.len(),
        report.best_val_loss,
        report.initial_val_loss
    );
    let trained_on = corpus
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let mut file = WeightsFile::new(report.weights.clone(), trained_on, Some(config));
    file.created_at = created_at;
    write_atomic(out, file.to_json().as_bytes())?;
    emit(&pretty(&report), report_path)
}

fn load_weights(path: Option<&Path>, d: usize) -> Result<WeightVector> {
    match path {
        Some(p) => Ok(WeightsFile::load(p)?.expect_dim(d)?.clone()),
        None => Ok(WeightVector::uniform(d)),
    }
}

fn pool(jobs: usize) -> Result<rayon::ThreadPool> {
    if jobs == 0 {
        return Err(Error::Validation("--jobs must be at least 1".into()));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker threads: {e}")))
}

fn summarize(
    weights: Option<&Path>,
    doc: &Path,
    out: &Path,
    jobs: usize,
    budget: Budget,
    mode: EmbeddingMode,
) -> Result<()> {
    let corpus = load_corpus(doc, mode)?;
    let Some(first) = corpus.first() else {
        return Err(Error::Validation(format!(
            "{} holds no documents",
            doc.display()
        )));
    };
    let w = load_weights(weights, first.document.dim())?;
    let summaries = pool(jobs)?.install(|| {
        corpus
            .par_iter()
            .map(|entry| {
                let d = &entry.document;
                if d.dim() != w.dim() {
                    return Err(Error::Validation(format!(
                        "document {} has dimension {}, weights have {}",
                        d.doc_id,
                        d.dim(),
                        w.dim()
                    )));
                }
                let sel = greedy_with_budget(d, &w, budget)?;
                Ok(SummaryRecord::new(d, &sel))
            })
            .collect::<Result<Vec<_>>>()
    })?;
    write_atomic(out, SummaryFile { summaries }.to_json().as_bytes())
}

#[derive(Serialize)]
struct DocumentScores {
    doc_id: String,
    rouge_1: Scores,
    rouge_2: Scores,
    rouge_l: Scores,
    image_precision: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    coverage: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    diversity: Option<f64>,
}

#[derive(Serialize)]
struct EvaluationReport {
    documents: Vec<DocumentScores>,
    mean: BTreeMap<&'static str, MeanStd>,
}

fn reference_text(entry: &CorpusEntry) -> Result<String> {
    let doc = &entry.document;
    let gt = entry
        .ground_truth
        .as_ref()
        .ok_or_else(|| Error::Validation(format!("document {} has no ground truth", doc.doc_id)))?;
    if let Some(text) = &gt.gold_text {
        return Ok(text.clone());
    }
    let texts: Vec<&str> = doc
        .elements
        .iter()
        .filter(|e| gt.selected_ids.contains(&e.id))
        .map(|e| e.text.as_str())
        .filter(|t| !t.trim().is_empty())
        .collect();
    Ok(texts.join(" "))
}

fn embeddings_of<'a>(doc: &'a Document, ids: &[&str], raw: bool) -> Result<Vec<&'a [f64]>> {
    ids.iter()
        .map(|id| {
            let e = doc.element_by_id(id).ok_or_else(|| {
                Error::Validation(format!("document {} has no element {id}", doc.doc_id))
            })?;
            Ok(if raw {
                &e.raw_embedding[..]
            } else {
                &e.embedding[..]
            })
        })
        .collect()
}

fn score_document(
    summary: &SummaryRecord,
    gold: &CorpusEntry,
    source: Option<&CorpusEntry>,
    raw_cosine: bool,
) -> Result<DocumentScores> {
    let candidate = summary.joined_text();
    let reference = reference_text(gold)?;
    let gold_images: Vec<String> = gold
        .document
        .elements
        .iter()
        .filter(|e| e.is_image())
        .filter(|e| {
            gold.ground_truth
                .as_ref()
                .is_some_and(|g| g.selected_ids.contains(&e.id))
        })
        .map(|e| e.id.clone())
        .collect();
    let (coverage, diversity) = match source {
        None => (None, None),
        Some(src) => {
            let ids: Vec<&str> = summary.elements.iter().map(|e| e.id.as_str()).collect();
            let chosen = embeddings_of(&src.document, &ids, raw_cosine)?;
            let all: Vec<&[f64]> = src
                .document
                .elements
                .iter()
                .map(|e| {
                    if raw_cosine {
                        &e.raw_embedding[..]
                    } else {
                        &e.embedding[..]
                    }
                })
                .collect();
            (
                Some(metrics::coverage(&chosen, &all)?),
                Some(metrics::diversity(&chosen)?),
            )
        }
    };
    Ok(DocumentScores {
        doc_id: summary.doc_id.clone(),
        rouge_1: metrics::rouge_n(&candidate, &reference, 1)?,
        rouge_2: metrics::rouge_n(&candidate, &reference, 2)?,
        rouge_l: metrics::rouge_l(&candidate, &reference),
        image_precision: metrics::image_precision(&summary.image_ids(), &gold_images),
        coverage,
        diversity,
    })
}

fn by_id(corpus: &[CorpusEntry]) -> HashMap<&str, &CorpusEntry> {
    corpus
        .iter()
        .map(|e| (e.document.doc_id.as_str(), e))
        .collect()
}

fn evaluate(
    pred: &Path,
    gold: &Path,
    source: Option<&Path>,
    raw_cosine: bool,
    out: Option<&Path>,
    jobs: usize,
    mode: EmbeddingMode,
) -> Result<()> {
    let summaries = SummaryFile::load(pred)?.summaries;
    if summaries.is_empty() {
        return Err(Error::Validation(format!(
            "{} holds no summaries",
            pred.display()
        )));
    }
    let gold_corpus = load_corpus(gold, mode)?;
    let gold_by_id = by_id(&gold_corpus);
    let source_corpus = source.map(|p| load_corpus(p, mode)).transpose()?;
    let source_by_id = source_corpus.as_deref().map(by_id);
    if raw_cosine && source.is_none() {
        warn!("--raw-cosine has no effect without --source");
    }

    let documents = pool(jobs)?.install(|| {
        summaries
            .par_iter()
            .map(|s| {
                let missing =
                    |what: &str| Error::Validation(format!("no {what} document {}", s.doc_id));
                let g = *gold_by_id
                    .get(s.doc_id.as_str())
                    .ok_or_else(|| missing("gold"))?;
                let src = match &source_by_id {
                    None => None,
                    Some(m) => Some(*m.get(s.doc_id.as_str()).ok_or_else(|| missing("source"))?),
                };
                score_document(s, g, src, raw_cosine)
            })
            .collect::<Result<Vec<_>>>()
    })?;

    let column = |f: &dyn Fn(&DocumentScores) -> Option<f64>| {
        metrics::mean_std(&documents.iter().filter_map(f).collect::<Vec<_>>())
    };
    let mut mean = BTreeMap::new();
    mean.insert("rouge_1_f1", column(&|d| Some(d.rouge_1.f1)));
    mean.insert("rouge_2_f1", column(&|d| Some(d.rouge_2.f1)));
    mean.insert("rouge_l_f1", column(&|d| Some(d.rouge_l.f1)));
    mean.insert("image_precision", column(&|d| Some(d.image_precision)));
    if source.is_some() {
        mean.insert("coverage", column(&|d| d.coverage));
        mean.insert("diversity", column(&|d| d.diversity));
    }
    emit(&pretty(&EvaluationReport { documents, mean }), out)
}

fn pick_document<'a>(corpus: &'a [CorpusEntry], doc_id: Option<&str>) -> Result<&'a Document> {
    match (doc_id, corpus) {
        (Some(id), _) => corpus
            .iter()
            .map(|e| &e.document)
            .find(|d| d.doc_id == id)
            .ok_or_else(|| Error::Validation(format!("no document {id} in the corpus"))),
        (None, [only]) => Ok(&only.document),
        (None, []) => Err(Error::Validation("the corpus holds no documents".into())),
        (None, _) => Err(Error::Validation(
            "the corpus holds several documents; choose one with --doc-id".into(),
        )),
    }
}

fn paraphrase(record: &SummaryRecord, remote: &RemoteArgs) -> Result<PosterContent> {
    let Some(config) = remote.client_config() else {
        return paraphrase_offline(record);
    };
    let client = HttpChatClient::from_env(config)?;
    let outcome = paraphrase_remote(record, &client)?;
    if outcome.fell_back {
        warn!("the model reply had no usable topics; used the offline grouping");
    }
    Ok(outcome.content)
}

fn layout(content: &PosterContent, config: Option<&Path>) -> Result<PosterLayout> {
    let config = match config {
        Some(p) => LayoutConfig::load(p)?,
        None => LayoutConfig::default(),
    };
    generate_layout(content, &resolve_aspect_ratios(content), &config)
}

fn roles(colors: Option<&str>) -> Result<ColorRoles> {
    match colors {
        Some(list) => assign_roles(&parse_palette(list)?),
        None => assign_roles(&DEFAULT_PALETTE),
    }
}
