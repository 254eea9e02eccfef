//! The sentiment report: counts of positive, negative and neutral reviews.

use std::path::Path;

use fleetline_core::reviews::{sentiment_counts, SentimentCounts, SentimentLexicon, StopList};

use crate::client::{Client, ClientError};
use crate::events::LogError;
use crate::service::replay_dir;

/// Three `label,count` rows.
pub fn to_csv(c: &SentimentCounts) -> String {
    format!(
        "positive,{}\nnegative,{}\nneutral,{}\n",
        c.positive, c.negative, c.neutral
    )
}

/// Counts over the reviews in a data directory's log.
pub fn from_data_dir(dir: &Path) -> Result<SentimentCounts, LogError> {
    let state = replay_dir(dir)?;
    Ok(sentiment_counts(
        state.reviews.values(),
        &SentimentLexicon::default(),
        &StopList::default(),
    ))
}

/// Counts as reported by a running service, read with admin credentials.
pub fn from_service(url: &str, login: &str, password: &str) -> Result<SentimentCounts, ClientError> {
    let mut c = Client::new(url);
    c.login(login, password)?;
    c.get("/api/admin/sentiment")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_rows() {
        let c = SentimentCounts {
            positive: 50,
            negative: 30,
            neutral: 0,
        };
        assert_eq!(to_csv(&c), "positive,50\nnegative,30\nneutral,0\n");
    }

    #[test]
    fn empty_dir_is_all_zeros() {
        let dir = tempfile::tempdir().unwrap();
        assert_eq!(from_data_dir(dir.path()).unwrap(), SentimentCounts::default());
    }
}
