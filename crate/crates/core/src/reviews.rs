//! Keyword sentiment, provider ranking and spam-provider detection over
//! customer reviews.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ids::{CustomerId, ProviderId, ReviewId, TripId};

pub const MAX_REVIEW_CHARS: usize = 2000;

pub const DEFAULT_POSITIVE: [&str; 6] = ["good", "great", "happy", "active", "nice", "believe"];
pub const DEFAULT_NEGATIVE: [&str; 6] = ["sad", "bad", "poor", "useless", "cold", "cry"];
pub const DEFAULT_STOPWORDS: [&str; 19] = [
    "a", "an", "the", "is", "was", "are", "were", "and", "or", "but", "to", "of", "in", "on",
    "for", "with", "it", "this", "that",
];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReviewError {
    #[error("stars must be 1..=5, got {0}")]
    InvalidStars(u8),
    #[error("review text is {0} characters, limit is {MAX_REVIEW_CHARS}")]
    TextTooLong(usize),
    #[error("word {0:?} is both positive and negative")]
    OverlappingLexicon(String),
    #[error("lexicon file line {line}: {message}")]
    LexiconFile { line: usize, message: String },
    #[error("invalid spam policy: {0}")]
    InvalidPolicy(&'static str),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Review {
    pub review_id: ReviewId,
    pub customer_id: CustomerId,
    pub provider_id: ProviderId,
    /// Absent for reviews imported without a trip, such as seeded scenarios.
    pub trip_id: Option<TripId>,
    pub text: String,
    pub stars: u8,
    pub created_at: u64,
}

impl Review {
    /// Validates stars and text length.
    pub fn new(
        review_id: ReviewId,
        customer_id: CustomerId,
        provider_id: ProviderId,
        trip_id: Option<TripId>,
        text: impl Into<String>,
        stars: u8,
        created_at: u64,
    ) -> Result<Self, ReviewError> {
        let text = text.into();
        validate_review(&text, stars)?;
        Ok(Self {
            review_id,
            customer_id,
            provider_id,
            trip_id,
            text,
            stars,
            created_at,
        })
    }
}

pub fn validate_review(text: &str, stars: u8) -> Result<(), ReviewError> {
    if !(1..=5).contains(&stars) {
        return Err(ReviewError::InvalidStars(stars));
    }
    let chars = text.chars().count();
    if chars > MAX_REVIEW_CHARS {
        return Err(ReviewError::TextTooLong(chars));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SentimentLexicon {
    positive: BTreeSet<String>,
    negative: BTreeSet<String>,
}

impl Default for SentimentLexicon {
    fn default() -> Self {
        Self {
            positive: DEFAULT_POSITIVE.iter().map(|w| w.to_string()).collect(),
            negative: DEFAULT_NEGATIVE.iter().map(|w| w.to_string()).collect(),
        }
    }
}

impl SentimentLexicon {
    /// Words are lowercased; a word in both sets is rejected.
    pub fn new<I, J, S, T>(positive: I, negative: J) -> Result<Self, ReviewError>
    where
        I: IntoIterator<Item = S>,
        J: IntoIterator<Item = T>,
        S: AsRef<str>,
        T: AsRef<str>,
    {
        let positive: BTreeSet<String> =
            positive.into_iter().map(|w| w.as_ref().to_lowercase()).collect();
        let negative: BTreeSet<String> =
            negative.into_iter().map(|w| w.as_ref().to_lowercase()).collect();
        if let Some(w) = positive.intersection(&negative).next() {
            return Err(ReviewError::OverlappingLexicon(w.clone()));
        }
        Ok(Self { positive, negative })
    }

    pub fn positive(&self) -> &BTreeSet<String> {
        &self.positive
    }

    pub fn negative(&self) -> &BTreeSet<String> {
        &self.negative
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StopList(HashSet<String>);

impl Default for StopList {
    fn default() -> Self {
        Self(DEFAULT_STOPWORDS.iter().map(|w| w.to_string()).collect())
    }
}

impl StopList {
    pub fn new<I: IntoIterator<Item = S>, S: AsRef<str>>(words: I) -> Self {
        Self(words.into_iter().map(|w| w.as_ref().to_lowercase()).collect())
    }

    pub fn contains(&self, word: &str) -> bool {
        self.0.contains(word)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Parse a word-list file with `[positive]`, `[negative]` and `[stopwords]`
/// sections, one word per line. Blank lines and `#` comments are skipped.
/// A missing `[stopwords]` section yields the default stop list.
pub fn parse_lexicon_file(text: &str) -> Result<(SentimentLexicon, StopList), ReviewError> {
    #[derive(Clone, Copy)]
    enum Section {
        Positive,
        Negative,
        Stop,
    }
    let mut section = None;
    let (mut pos, mut neg, mut stop) = (Vec::new(), Vec::new(), None::<Vec<String>>);
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            section = Some(match name.trim().to_lowercase().as_str() {
                "positive" => Section::Positive,
                "negative" => Section::Negative,
                "stopwords" => {
                    stop.get_or_insert_with(Vec::new);
                    Section::Stop
                }
                other => {
                    return Err(ReviewError::LexiconFile {
                        line: i + 1,
                        message: format!("unknown section [{other}]"),
                    })
                }
            });
            continue;
        }
        if line.split_whitespace().nth(1).is_some() {
            return Err(ReviewError::LexiconFile {
                line: i + 1,
                message: "one word per line".into(),
            });
        }
        let word = line.to_lowercase();
        match section {
            Some(Section::Positive) => pos.push(word),
            Some(Section::Negative) => neg.push(word),
            Some(Section::Stop) => stop.get_or_insert_with(Vec::new).push(word),
            None => {
                return Err(ReviewError::LexiconFile {
                    line: i + 1,
                    message: "word before any section header".into(),
                })
            }
        }
    }
    let lexicon = SentimentLexicon::new(pos, neg)?;
    let stoplist = stop.map(StopList::new).unwrap_or_default();
    Ok((lexicon, stoplist))
}

pub fn tokenize_remove_stopwords(text: &str, stoplist: &StopList) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .filter(|t| !stoplist.contains(t))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SentimentLabel {
    Positive,
    Negative,
    Neutral,
}

impl std::fmt::Display for SentimentLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Positive => "positive",
            Self::Negative => "negative",
            Self::Neutral => "neutral",
        })
    }
}

pub fn classify_review(text: &str, lexicon: &SentimentLexicon, stoplist: &StopList) -> SentimentLabel {
    let (mut pos, mut neg) = (0usize, 0usize);
    for token in tokenize_remove_stopwords(text, stoplist) {
        if lexicon.positive.contains(&token) {
            pos += 1;
        } else if lexicon.negative.contains(&token) {
            neg += 1;
        }
    }
    match pos.cmp(&neg) {
        Ordering::Greater => SentimentLabel::Positive,
        Ordering::Less => SentimentLabel::Negative,
        Ordering::Equal => SentimentLabel::Neutral,
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SentimentCounts {
    pub positive: usize,
    pub negative: usize,
    pub neutral: usize,
}

impl SentimentCounts {
    pub fn total(&self) -> usize {
        self.positive + self.negative + self.neutral
    }

    pub fn add(&mut self, label: SentimentLabel) {
        match label {
            SentimentLabel::Positive => self.positive += 1,
            SentimentLabel::Negative => self.negative += 1,
            SentimentLabel::Neutral => self.neutral += 1,
        }
    }
}

pub fn sentiment_counts<'a>(
    reviews: impl IntoIterator<Item = &'a Review>,
    lexicon: &SentimentLexicon,
    stoplist: &StopList,
) -> SentimentCounts {
    let mut counts = SentimentCounts::default();
    for r in reviews {
        counts.add(classify_review(&r.text, lexicon, stoplist));
    }
    counts
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ProviderRank {
    pub provider_id: ProviderId,
    /// `None` for a provider without reviews.
    pub mean_stars: Option<f64>,
    pub review_count: usize,
}

/// Order providers by mean stars (compared exactly as fractions), then review
/// count, then id. Providers with no stars come last.
pub fn rank_providers(ratings: &BTreeMap<ProviderId, Vec<u8>>) -> Vec<ProviderRank> {
    let mut rows: Vec<(&ProviderId, u64, u64)> = ratings
        .iter()
        .map(|(p, stars)| (p, stars.iter().map(|&s| s as u64).sum(), stars.len() as u64))
        .collect();
    rows.sort_by(|a, b| match (a.2, b.2) {
        (0, 0) => a.0.cmp(b.0),
        (0, _) => Ordering::Greater,
        (_, 0) => Ordering::Less,
        // sum_a / n_a vs sum_b / n_b, descending
        _ => (b.1 * a.2)
            .cmp(&(a.1 * b.2))
            .then(b.2.cmp(&a.2))
            .then_with(|| a.0.cmp(b.0)),
    });
    rows.into_iter()
        .map(|(p, sum, n)| ProviderRank {
            provider_id: p.clone(),
            mean_stars: (n > 0).then(|| sum as f64 / n as f64),
            review_count: n as usize,
        })
        .collect()
}

/// Star lists per provider; every id in `providers` appears, reviewed or not.
pub fn star_lists<'a>(
    providers: impl IntoIterator<Item = &'a ProviderId>,
    reviews: impl IntoIterator<Item = &'a Review>,
) -> BTreeMap<ProviderId, Vec<u8>> {
    let mut map: BTreeMap<ProviderId, Vec<u8>> =
        providers.into_iter().map(|p| (p.clone(), Vec::new())).collect();
    for r in reviews {
        map.entry(r.provider_id.clone()).or_default().push(r.stars);
    }
    map
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpamPolicy {
    pub min_reviews: usize,
    pub dup_ratio_threshold: f64,
    pub same_customer_burst: usize,
    pub burst_window_ms: u64,
}

impl Default for SpamPolicy {
    fn default() -> Self {
        Self {
            min_reviews: 5,
            dup_ratio_threshold: 0.5,
            same_customer_burst: 3,
            burst_window_ms: 86_400_000,
        }
    }
}

impl SpamPolicy {
    pub fn validate(&self) -> Result<(), ReviewError> {
        if self.min_reviews == 0 {
            return Err(ReviewError::InvalidPolicy("min_reviews must be positive"));
        }
        if !(self.dup_ratio_threshold > 0.0 && self.dup_ratio_threshold <= 1.0) {
            return Err(ReviewError::InvalidPolicy("dup_ratio_threshold must be in (0, 1]"));
        }
        if self.same_customer_burst == 0 {
            return Err(ReviewError::InvalidPolicy("same_customer_burst must be positive"));
        }
        if self.burst_window_ms == 0 {
            return Err(ReviewError::InvalidPolicy("burst_window_ms must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpamReason {
    DuplicateRatio,
    CustomerBurst,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SpamFlag {
    pub provider_id: ProviderId,
    pub reasons: Vec<SpamReason>,
}

/// Flag providers with at least `min_reviews` reviews whose texts are mostly
/// duplicates (after normalization) or where one customer posted a burst of
/// reviews inside the window `[t, t + burst_window_ms)`. Sorted by provider.
pub fn detect_spam_providers<'a>(
    reviews: impl IntoIterator<Item = &'a Review>,
    policy: &SpamPolicy,
    stoplist: &StopList,
) -> Vec<SpamFlag> {
    let mut by_provider: BTreeMap<&ProviderId, Vec<&Review>> = BTreeMap::new();
    for r in reviews {
        by_provider.entry(&r.provider_id).or_default().push(r);
    }

    let mut flags = Vec::new();
    for (provider, rs) in by_provider {
        if rs.len() < policy.min_reviews {
            continue;
        }
        let mut reasons = Vec::new();

        let distinct: HashSet<String> = rs
            .iter()
            .map(|r| tokenize_remove_stopwords(&r.text, stoplist).join(" "))
            .collect();
        let dup_ratio = 1.0 - distinct.len() as f64 / rs.len() as f64;
        if dup_ratio >= policy.dup_ratio_threshold {
            reasons.push(SpamReason::DuplicateRatio);
        }

        let mut per_customer: BTreeMap<&CustomerId, Vec<u64>> = BTreeMap::new();
        for r in &rs {
            per_customer.entry(&r.customer_id).or_default().push(r.created_at);
        }
        let burst = per_customer.values_mut().any(|ts| {
            ts.sort_unstable();
            let n = policy.same_customer_burst;
            ts.windows(n)
                .any(|w| w[n - 1] - w[0] < policy.burst_window_ms)
        });
        if burst {
            reasons.push(SpamReason::CustomerBurst);
        }

        if !reasons.is_empty() {
            flags.push(SpamFlag {
                provider_id: provider.clone(),
                reasons,
            });
        }
    }
    flags
}
