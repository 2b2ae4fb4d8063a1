//! Turning an extracted summary into poster topics and bullets.
//!
//! The remote path sends one chat-completion request carrying a fixed
//! grouping prompt and parses headings and bullets out of the reply. The
//! offline path groups the summary sentences into contiguous topics without
//! rewording anything.

use std::fs;
use std::path::Path;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::summary::SummaryRecord;

/// Environment variable holding the chat-completion credential.
pub const CREDENTIAL_ENV: &str = "POSTDOC_LLM_KEY";

const PROMPT_PREFIX: &str = "Group and rephrase the content of the following text into 5 to 8 topics without altering the order such that for each topic, there is a title and atleast 3 rephrased sentences as bullet points so that it will look good in a poster. Do not add any new content.\nText: ";

/// Longest topic title produced by the offline grouping, in characters.
pub const OFFLINE_TITLE_CHARS: usize = 60;

/// Sentences per topic targeted by the offline grouping.
pub const SENTENCES_PER_TOPIC: usize = 4;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Topic {
    pub title: String,
    pub bullets: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosterImage {
    pub element_id: String,
    #[serde(default)]
    pub image_path: Option<String>,
    #[serde(default)]
    pub caption: String,
    /// Width over height; read from the image file when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub aspect_ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosterContent {
    pub title: String,
    pub topics: Vec<Topic>,
    pub images: Vec<PosterImage>,
}

impl PosterContent {
    pub fn validate(&self) -> Result<()> {
        if self.topics.is_empty() {
            return Err(Error::validation("poster content has no topics"));
        }
        for (i, t) in self.topics.iter().enumerate() {
            if t.bullets.iter().any(|b| b.trim().is_empty()) {
                return Err(Error::validation(format!("topic {i} has an empty bullet")));
            }
        }
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Self> {
        let content: PosterContent = serde_json::from_str(text)
            .map_err(|e| Error::validation(format!("invalid content file: {e}")))?;
        content.validate()?;
        Ok(content)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        PosterContent::parse(&text)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("content serializes");
        s.push('\n');
        s
    }
}

pub fn build_prompt(summary_text: &str) -> Result<String> {
    if summary_text.trim().is_empty() {
        return Err(Error::validation("cannot build a prompt from empty text"));
    }
    Ok(format!("{PROMPT_PREFIX}{summary_text}"))
}

/// Number of offline topics for `k` sentences: `ceil(k/4)` clamped to
/// `[min(5, k), 8]`.
pub fn offline_topic_count(k: usize) -> usize {
    k.div_ceil(SENTENCES_PER_TOPIC).clamp(k.min(5), 8)
}

fn truncate_chars(s: &str, n: usize) -> String {
    s.chars().take(n).collect::<String>().trim_end().to_string()
}

/// Splits sentences into contiguous, near-equal, order-preserving topics.
pub fn offline_topics(sentences: &[String]) -> Result<Vec<Topic>> {
    let sentences: Vec<&str> = sentences
        .iter()
        .map(|s| s.trim())
        .filter(|s| !s.is_empty())
        .collect();
    if sentences.is_empty() {
        return Err(Error::validation(
            "offline paraphrase needs at least one sentence",
        ));
    }
    let k = sentences.len();
    let n = offline_topic_count(k);
    let (base, extra) = (k / n, k % n);
    let mut topics = Vec::with_capacity(n);
    let mut start = 0;
    for i in 0..n {
        let len = base + usize::from(i < extra);
        let group = &sentences[start..start + len];
        start += len;
        topics.push(Topic {
            title: truncate_chars(group[0], OFFLINE_TITLE_CHARS),
            bullets: group.iter().map(|s| s.to_string()).collect(),
        });
    }
    Ok(topics)
}

fn images_of(summary: &SummaryRecord) -> Vec<PosterImage> {
    summary
        .elements
        .iter()
        .filter(|e| e.modality == crate::corpus::Modality::Image)
        .map(|e| PosterImage {
            element_id: e.id.clone(),
            image_path: e.image_path.clone(),
            caption: e.text.trim().to_string(),
            aspect_ratio: None,
        })
        .collect()
}

pub fn paraphrase_offline(summary: &SummaryRecord) -> Result<PosterContent> {
    Ok(PosterContent {
        title: summary.title.clone(),
        topics: offline_topics(&summary.sentences())?,
        images: images_of(summary),
    })
}

// ---------------------------------------------------------------------------
// Response grammar

enum Line<'a> {
    Heading(&'a str),
    Bullet(&'a str),
    Other,
}

fn strip_numbered(line: &str) -> Option<&str> {
    let digits = line.bytes().take_while(u8::is_ascii_digit).count();
    if digits == 0 {
        return None;
    }
    let rest = &line[digits..];
    rest.strip_prefix(". ")
        .or_else(|| rest.strip_prefix(") "))
        .map(str::trim)
}

fn classify(line: &str, numbered_are_headings: bool) -> Line<'_> {
    let t = line.trim();
    if let Some(rest) = t.strip_prefix("##") {
        return Line::Heading(rest.trim_start_matches('#').trim());
    }
    if let Some(rest) = t.strip_prefix("**") {
        let inner = rest.trim_end().trim_end_matches(':');
        let inner = inner.strip_suffix("**").unwrap_or(inner);
        return Line::Heading(inner.trim().trim_end_matches(':').trim());
    }
    for marker in ["- ", "* ", "• ", "•"] {
        if let Some(rest) = t.strip_prefix(marker) {
            return Line::Bullet(rest.trim());
        }
    }
    if let Some(rest) = strip_numbered(t) {
        return if numbered_are_headings {
            Line::Heading(rest)
        } else {
            Line::Bullet(rest)
        };
    }
    Line::Other
}

/// Parses a free-form reply into topics. Headings start with `##`, `**` or a
/// number followed by `.`; bullets start with `-`, `*` or `•`. When `##` or
/// `**` headings are present, numbered lines count as bullets. Returns `None`
/// if no topic with at least one bullet is found or a bullet precedes every
/// heading.
pub fn parse_response(text: &str) -> Option<Vec<Topic>> {
    let marked = text.lines().any(|l| {
        let t = l.trim();
        t.starts_with("##") || t.starts_with("**")
    });
    let mut topics: Vec<Topic> = Vec::new();
    for line in text.lines() {
        match classify(line, !marked) {
            Line::Heading(h) if !h.is_empty() => topics.push(Topic {
                title: h.to_string(),
                bullets: Vec::new(),
            }),
            Line::Bullet(b) if !b.is_empty() => topics.last_mut()?.bullets.push(b.to_string()),
            _ => {}
        }
    }
    topics.retain(|t| !t.bullets.is_empty());
    (!topics.is_empty()).then_some(topics)
}

// ---------------------------------------------------------------------------
// Remote client

/// Something that answers a single-turn chat prompt.
pub trait ChatClient {
    fn complete(&self, prompt: &str) -> Result<String>;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClientConfig {
    pub endpoint: String,
    pub model: String,
    pub temperature: f64,
    pub timeout_secs: u64,
}

impl Default for ClientConfig {
    fn default() -> Self {
        ClientConfig {
            endpoint: "https://api.openai.com/v1/chat/completions".into(),
            model: "gpt-3.5-turbo".into(),
            temperature: 0.0,
            timeout_secs: 60,
        }
    }
}

#[derive(Serialize)]
struct ChatMessage<'a> {
    role: &'a str,
    content: &'a str,
}

#[derive(Serialize)]
struct ChatRequest<'a> {
    model: &'a str,
    messages: Vec<ChatMessage<'a>>,
    temperature: f64,
}

#[derive(Deserialize)]
struct ChatResponse {
    choices: Vec<ChatChoice>,
}

#[derive(Deserialize)]
struct ChatChoice {
    message: ChatReply,
}

#[derive(Deserialize)]
struct ChatReply {
    content: String,
}

/// Extracts the first choice's message content from a chat-completion body.
pub fn parse_completion_body(body: &str) -> Option<String> {
    let resp: ChatResponse = serde_json::from_str(body).ok()?;
    resp.choices.into_iter().next().map(|c| c.message.content)
}

/// OpenAI-style chat-completion client over HTTP.
pub struct HttpChatClient {
    config: ClientConfig,
    key: String,
    http: reqwest::blocking::Client,
}

impl HttpChatClient {
    /// Reads the credential from [`CREDENTIAL_ENV`]; fails before any network
    /// activity when it is missing.
    pub fn from_env(config: ClientConfig) -> Result<Self> {
        let key = std::env::var(CREDENTIAL_ENV)
            .ok()
            .filter(|k| !k.trim().is_empty())
            .ok_or_else(|| Error::Config(format!("{CREDENTIAL_ENV} is not set")))?;
        HttpChatClient::with_key(config, key)
    }

    pub fn with_key(config: ClientConfig, key: String) -> Result<Self> {
        let http = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(config.timeout_secs))
            .build()
            .map_err(|e| Error::Config(format!("cannot build HTTP client: {e}")))?;
        Ok(HttpChatClient { config, key, http })
    }
}

impl ChatClient for HttpChatClient {
    fn complete(&self, prompt: &str) -> Result<String> {
        let req = ChatRequest {
            model: &self.config.model,
            messages: vec![ChatMessage {
                role: "user",
                content: prompt,
            }],
            temperature: self.config.temperature,
        };
        let resp = self
            .http
            .post(&self.config.endpoint)
            .bearer_auth(&self.key)
            .json(&req)
            .send()
            .map_err(|e| Error::Remote(format!("request failed: {e}")))?;
        let status = resp.status();
        let body = resp
            .text()
            .map_err(|e| Error::Remote(format!("reading response failed: {e}")))?;
        if !status.is_success() {
            return Err(Error::Remote(format!("endpoint returned {status}")));
        }
        Ok(body)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParaphraseOutcome {
    pub content: PosterContent,
    /// The reply could not be parsed and the offline grouping was used.
    pub fell_back: bool,
}

/// Paraphrases through `client`. `client.complete` returns the raw response
/// body; transport and status errors propagate, unusable replies fall back to
/// the offline grouping.
pub fn paraphrase_remote(
    summary: &SummaryRecord,
    client: &dyn ChatClient,
) -> Result<ParaphraseOutcome> {
    let prompt = build_prompt(&summary.joined_text())?;
    let body = client.complete(&prompt)?;
    let parsed = parse_completion_body(&body)
        .as_deref()
        .and_then(parse_response);
    match parsed {
        Some(topics) => Ok(ParaphraseOutcome {
            content: PosterContent {
                title: summary.title.clone(),
                topics,
                images: images_of(summary),
            },
            fell_back: false,
        }),
        None => {
            log::warn!(
                "could not parse the paraphrase reply for {}; using offline grouping",
                summary.doc_id
            );
            Ok(ParaphraseOutcome {
                content: paraphrase_offline(summary)?,
                fell_back: true,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Modality;
    use crate::summary::SummaryElement;

    fn sentences(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("Sentence number {i}.")).collect()
    }

    fn record() -> SummaryRecord {
        let el = |id: &str, ordinal, modality, text: &str| SummaryElement {
            id: id.into(),
            ordinal,
            modality,
            text: text.into(),
            image_path: (modality == Modality::Image).then(|| format!("{id}.png")),
        };
        SummaryRecord {
            doc_id: "d".into(),
            title: "Doc".into(),
            objective: 1.0,
            selection_order: vec![0, 1, 2],
            document_order: vec![0, 1, 2],
            g: vec![],
            elements: vec![
                el("s0", 0, Modality::Text, "First point."),
                el("i0", 1, Modality::Image, "A figure"),
                el("s1", 2, Modality::Text, "Second point."),
            ],
        }
    }

    struct Stub(String);

    impl ChatClient for Stub {
        fn complete(&self, _prompt: &str) -> Result<String> {
            Ok(self.0.clone())
        }
    }

    fn completion(content: &str) -> String {
        serde_json::json!({"choices": [{"message": {"role": "assistant", "content": content}}]})
            .to_string()
    }

    #[test]
    fn prompt_template() {
        let p = build_prompt("X.").unwrap();
        assert!(p.ends_with("Text: X."));
        assert!(p.contains("5 to 8 topics"));
        assert_eq!(p, format!("{PROMPT_PREFIX}X."));
        assert!(build_prompt("  ").is_err());
    }

    #[test]
    fn offline_topic_counts() {
        assert_eq!(offline_topics(&sentences(12)).unwrap().len(), 5);
        let three = offline_topics(&sentences(3)).unwrap();
        assert_eq!(three.len(), 3);
        assert!(three.iter().all(|t| t.bullets.len() == 1));
        assert_eq!(offline_topics(&sentences(40)).unwrap().len(), 8);
        assert_eq!(offline_topic_count(1), 1);
        assert_eq!(offline_topic_count(24), 6);
    }

    #[test]
    fn offline_groups_are_near_equal_and_ordered() {
        let input = sentences(12);
        let topics = offline_topics(&input).unwrap();
        let sizes: Vec<usize> = topics.iter().map(|t| t.bullets.len()).collect();
        assert_eq!(sizes, [3, 3, 2, 2, 2]);
        let flat: Vec<String> = topics.into_iter().flat_map(|t| t.bullets).collect();
        assert_eq!(flat, input);
    }

    #[test]
    fn offline_title_is_truncated() {
        let long = "x".repeat(100);
        let topics = offline_topics(&[long]).unwrap();
        assert_eq!(topics[0].title.chars().count(), 60);
        assert!(offline_topics(&[" ".into()]).is_err());
    }

    #[test]
    fn parses_markdown_headings() {
        let topics = parse_response("## T1\n- a\n- b\n- c").unwrap();
        assert_eq!(topics.len(), 1);
        assert_eq!(topics[0].title, "T1");
        assert_eq!(topics[0].bullets, ["a", "b", "c"]);
    }

    #[test]
    fn parses_bold_and_numbered_headings() {
        let bold = parse_response("**Intro:**\n* one\n* two\n\n**Method**\n• three").unwrap();
        assert_eq!(bold.len(), 2);
        assert_eq!(bold[0].title, "Intro");
        assert_eq!(bold[1].bullets, ["three"]);

        let numbered = parse_response("1. Intro\n- a\n2. Results\n- b\n- c").unwrap();
        assert_eq!(numbered[1].title, "Results");
        assert_eq!(numbered[1].bullets.len(), 2);

        let nested = parse_response("## Intro\n1. a\n2. b").unwrap();
        assert_eq!(nested[0].bullets, ["a", "b"]);
    }

    #[test]
    fn garbage_does_not_parse() {
        assert!(parse_response("I cannot help with that.").is_none());
        assert!(parse_response("- orphan bullet\n## T\n- a").is_none());
        assert!(parse_response("## Only a heading").is_none());
    }

    #[test]
    fn remote_with_stubbed_reply() {
        let stub = Stub(completion("## T1\n- a\n- b\n- c"));
        let out = paraphrase_remote(&record(), &stub).unwrap();
        assert!(!out.fell_back);
        assert_eq!(out.content.topics.len(), 1);
        assert_eq!(out.content.topics[0].bullets.len(), 3);
        assert_eq!(
            out.content.images,
            paraphrase_offline(&record()).unwrap().images
        );
    }

    #[test]
    fn remote_garbage_falls_back() {
        for body in [completion("no structure here"), "not even json".to_string()] {
            let out = paraphrase_remote(&record(), &Stub(body)).unwrap();
            assert!(out.fell_back);
            assert_eq!(out.content, paraphrase_offline(&record()).unwrap());
        }
    }

    #[test]
    fn offline_content_from_summary() {
        let c = paraphrase_offline(&record()).unwrap();
        assert_eq!(c.title, "Doc");
        assert_eq!(c.topics.len(), 2);
        assert_eq!(c.images.len(), 1);
        assert_eq!(c.images[0].caption, "A figure");
        assert_eq!(c.images[0].image_path.as_deref(), Some("i0.png"));
    }

    #[test]
    fn content_file_round_trip_and_validation() {
        let c = paraphrase_offline(&record()).unwrap();
        assert_eq!(PosterContent::parse(&c.to_json()).unwrap(), c);
        assert!(PosterContent::parse(r#"{"title":"t","topics":[],"images":[]}"#).is_err());
        assert!(PosterContent::parse(
            r#"{"title":"t","topics":[{"title":"a","bullets":[" "]}],"images":[]}"#
        )
        .is_err());
    }
}
