//! Summary quality metrics: ROUGE-1/2/L, multimodal coverage and diversity,
//! and image precision.
//!
//! ROUGE tokenization lowercases and splits on every run of non-alphanumeric
//! characters. There is no stemming and no stopword removal, so scores are
//! comparable only with other scores produced here.

use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Scores {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl Scores {
    fn from_counts(overlap: usize, candidate: usize, reference: usize) -> Self {
        if overlap == 0 || candidate == 0 || reference == 0 {
            return Scores::default();
        }
        let precision = overlap as f64 / candidate as f64;
        let recall = overlap as f64 / reference as f64;
        Scores {
            precision,
            recall,
            f1: 2.0 * precision * recall / (precision + recall),
        }
    }
}

pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .collect()
}

fn ngram_counts(tokens: &[String], n: usize) -> HashMap<&[String], usize> {
    let mut counts = HashMap::new();
    if tokens.len() >= n {
        for gram in tokens.windows(n) {
            *counts.entry(gram).or_insert(0) += 1;
        }
    }
    counts
}

/// Clipped n-gram overlap between token sequences.
pub fn rouge_n_tokens(candidate: &[String], reference: &[String], n: usize) -> Result<Scores> {
    if !(n == 1 || n == 2) {
        return Err(Error::validation(format!(
            "ROUGE-N supports n = 1 or 2, got {n}"
        )));
    }
    let cand = ngram_counts(candidate, n);
    let refs = ngram_counts(reference, n);
    let overlap = cand
        .iter()
        .map(|(g, c)| refs.get(g).map_or(0, |r| (*c).min(*r)))
        .sum();
    let total = |m: &HashMap<&[String], usize>| m.values().sum::<usize>();
    Ok(Scores::from_counts(overlap, total(&cand), total(&refs)))
}

pub fn rouge_n(candidate: &str, reference: &str, n: usize) -> Result<Scores> {
    rouge_n_tokens(&tokenize(candidate), &tokenize(reference), n)
}

fn lcs_len(a: &[String], b: &[String]) -> usize {
    let mut prev = vec![0usize; b.len() + 1];
    let mut cur = vec![0usize; b.len() + 1];
    for x in a {
        for (j, y) in b.iter().enumerate() {
            cur[j + 1] = if x == y {
                prev[j] + 1
            } else {
                cur[j].max(prev[j + 1])
            };
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

pub fn rouge_l_tokens(candidate: &[String], reference: &[String]) -> Scores {
    Scores::from_counts(
        lcs_len(candidate, reference),
        candidate.len(),
        reference.len(),
    )
}

/// Whole-text longest-common-subsequence ROUGE.
pub fn rouge_l(candidate: &str, reference: &str) -> Scores {
    rouge_l_tokens(&tokenize(candidate), &tokenize(reference))
}

pub fn cosine(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::validation(format!(
            "cosine of vectors with dimensions {} and {}",
            x.len(),
            y.len()
        )));
    }
    let nx = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    let ny = y.iter().map(|v| v * v).sum::<f64>().sqrt();
    if nx == 0.0 || ny == 0.0 {
        return Err(Error::validation("cosine of a zero vector"));
    }
    let dot: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    Ok(dot / (nx * ny))
}

/// Mean cosine similarity between every document element and every summary
/// element.
pub fn coverage<A, D>(summary: &[A], document: &[D]) -> Result<f64>
where
    A: AsRef<[f64]>,
    D: AsRef<[f64]>,
{
    if summary.is_empty() || document.is_empty() {
        return Err(Error::validation(
            "coverage needs a nonempty summary and document",
        ));
    }
    let mut total = 0.0;
    for x in document {
        for y in summary {
            total += cosine(x.as_ref(), y.as_ref())?;
        }
    }
    Ok(total / (document.len() * summary.len()) as f64)
}

/// One minus the mean pairwise cosine over all ordered pairs, self-pairs
/// included.
pub fn diversity<A: AsRef<[f64]>>(summary: &[A]) -> Result<f64> {
    if summary.is_empty() {
        return Err(Error::validation("diversity needs a nonempty summary"));
    }
    let mut total = 0.0;
    for x in summary {
        for y in summary {
            total += cosine(x.as_ref(), y.as_ref())?;
        }
    }
    Ok(1.0 - total / (summary.len() * summary.len()) as f64)
}

/// `|I_A ∩ I_G| / |I_A|`; 0 when nothing was predicted.
pub fn image_precision<S: AsRef<str>>(predicted: &[S], gold: &[S]) -> f64 {
    let pred: HashSet<&str> = predicted.iter().map(AsRef::as_ref).collect();
    if pred.is_empty() {
        return 0.0;
    }
    let gold: HashSet<&str> = gold.iter().map(AsRef::as_ref).collect();
    pred.intersection(&gold).count() as f64 / pred.len() as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanStd {
    pub mean: f64,
    pub std: f64,
    pub n: usize,
}

/// Mean and population standard deviation.
pub fn mean_std(values: &[f64]) -> MeanStd {
    if values.is_empty() {
        return MeanStd {
            mean: 0.0,
            std: 0.0,
            n: 0,
        };
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    MeanStd {
        mean,
        std: var.sqrt(),
        n: values.len(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tokenizer_lowercases_and_splits() {
        assert_eq!(
            tokenize("The cat's  HAT-2!"),
            ["the", "cat", "s", "hat", "2"]
        );
        assert!(tokenize("  ,. ").is_empty());
    }

    #[test]
    fn rouge_identical_and_disjoint() {
        let s = rouge_n("a b c d", "a b c d", 1).unwrap();
        assert_eq!(s.f1, 1.0);
        assert_eq!(rouge_n("a b c d", "a b c d", 2).unwrap().f1, 1.0);
        assert_eq!(rouge_n("a b", "c d", 1).unwrap().f1, 0.0);
        assert_eq!(rouge_l("x y z", "x y z").f1, 1.0);
    }

    #[test]
    fn rouge_1_cat_example() {
        let s = rouge_n("the cat sat", "the cat sat on the mat", 1).unwrap();
        assert!((s.recall - 0.5).abs() < 1e-12);
        assert!((s.precision - 1.0).abs() < 1e-12);
        assert!((s.f1 - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn rouge_counts_are_clipped() {
        // "the" appears twice in the candidate, once in the reference.
        let s = rouge_n("the the", "the cat", 1).unwrap();
        assert!((s.precision - 0.5).abs() < 1e-12);
        assert!((s.recall - 0.5).abs() < 1e-12);
    }

    #[test]
    fn rouge_2_needs_two_tokens() {
        assert_eq!(rouge_n("a", "a", 2).unwrap(), Scores::default());
        assert!(rouge_n("a", "a", 3).is_err());
    }

    #[test]
    fn rouge_l_examples() {
        let s = rouge_l("a c e", "a b c d e");
        assert!((s.recall - 0.6).abs() < 1e-12);
        assert!((s.precision - 1.0).abs() < 1e-12);
        assert!((s.f1 - 0.75).abs() < 1e-12);
        assert_eq!(rouge_l("", "a b").f1, 0.0);
    }

    #[test]
    fn coverage_examples() {
        let set = [vec![1.0, 0.0], vec![0.0, 1.0], vec![0.5, 0.5]];
        let c = coverage(&set, &set).unwrap();
        assert!((c - (3.0 + 4.0 * 0.5f64.sqrt()) / 9.0).abs() < 1e-12);
        assert!((c - 0.647603).abs() < 1e-6);
        assert!((coverage(&[vec![0.2, 0.8]], &[vec![0.2, 0.8]]).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(coverage(&[vec![1.0, 0.0]], &[vec![0.0, 1.0]]).unwrap(), 0.0);
        assert!(coverage(&[vec![0.0, 0.0]], &[vec![0.0, 1.0]]).is_err());
    }

    #[test]
    fn diversity_examples() {
        assert!(diversity(&[vec![0.3, 0.7]]).unwrap().abs() < 1e-12);
        assert!((diversity(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap() - 0.5).abs() < 1e-12);
        let same = vec![vec![0.1, 0.9]; 4];
        assert!(diversity(&same).unwrap().abs() < 1e-12);
        assert!(diversity::<Vec<f64>>(&[]).is_err());
    }

    #[test]
    fn image_precision_examples() {
        assert_eq!(image_precision(&["a", "b"], &["a", "b"]), 1.0);
        assert_eq!(image_precision(&["a"], &["b"]), 0.0);
        assert_eq!(image_precision(&["a", "b"], &["a", "c"]), 0.5);
        assert_eq!(image_precision::<&str>(&[], &["a"]), 0.0);
    }

    #[test]
    fn mean_std_population() {
        let m = mean_std(&[1.0, 3.0]);
        assert_eq!(m.mean, 2.0);
        assert_eq!(m.std, 1.0);
        assert_eq!(mean_std(&[]).n, 0);
    }
}
