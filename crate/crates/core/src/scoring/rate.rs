use std::collections::HashMap;

use rayon::prelude::*;

use super::{align, tokenize, TokenMode, TokenizeOptions};
use crate::corpus::{SpeakerGroup, SpeakingStyle, UtteranceRecord};
use crate::{Error, Result};

/// Reference/hypothesis text for one utterance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScoredPair {
    pub utt_id: String,
    pub reference: String,
    pub hypothesis: String,
}

/// Pooled edit counts. Merging is associative and commutative.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ErrorCounts {
    pub n_ref: usize,
    pub subs: usize,
    pub dels: usize,
    pub ins: usize,
    pub utterances: usize,
}

impl ErrorCounts {
    pub fn errors(&self) -> usize {
        self.subs + self.dels + self.ins
    }

    pub fn merge(self, o: Self) -> Self {
        Self {
            n_ref: self.n_ref + o.n_ref,
            subs: self.subs + o.subs,
            dels: self.dels + o.dels,
            ins: self.ins + o.ins,
            utterances: self.utterances + o.utterances,
        }
    }

    /// `100 * sum(S + D + I) / sum(n_ref)`.
    pub fn rate(&self) -> Option<f64> {
        (self.n_ref > 0).then(|| 100.0 * self.errors() as f64 / self.n_ref as f64)
    }
}

/// Error rate of one speaker group in one speaking style.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupScore {
    pub group: SpeakerGroup,
    pub style: SpeakingStyle,
    /// Percent.
    pub error_rate: f64,
    pub n_ref_total: usize,
    pub errors: usize,
    pub utterance_count: usize,
}

fn score_pair(p: &ScoredPair, mode: TokenMode, opts: TokenizeOptions) -> Result<ErrorCounts> {
    let r = tokenize(&p.reference, mode, opts);
    if r.is_empty() {
        return Err(Error::Scoring(format!("empty reference for `{}`", p.utt_id)));
    }
    let h = tokenize(&p.hypothesis, mode, opts);
    let a = align(&r, &h);
    Ok(ErrorCounts {
        n_ref: a.n_ref,
        subs: a.subs,
        dels: a.dels,
        ins: a.ins,
        utterances: 1,
    })
}

/// Pooled counts over all pairs; every reference must be non-empty.
pub fn corpus_error_rate(
    pairs: &[ScoredPair],
    mode: TokenMode,
    opts: TokenizeOptions,
) -> Result<ErrorCounts> {
    let per: Vec<ErrorCounts> = pairs
        .par_iter()
        .map(|p| score_pair(p, mode, opts))
        .collect::<Result<_>>()?;
    Ok(per.into_iter().fold(ErrorCounts::default(), ErrorCounts::merge))
}

/// Scores every manifest record that has a transcript, grouped by
/// (group, style) in order of first appearance.
pub fn group_scores(
    records: &[UtteranceRecord],
    hypotheses: &HashMap<String, String>,
    mode: TokenMode,
    opts: TokenizeOptions,
) -> Result<Vec<GroupScore>> {
    let mut order: Vec<(SpeakerGroup, SpeakingStyle)> = Vec::new();
    let mut buckets: HashMap<(SpeakerGroup, SpeakingStyle), Vec<ScoredPair>> = HashMap::new();
    for r in records.iter().filter(|r| !r.transcript.is_empty()) {
        let hyp = hypotheses
            .get(&r.utt_id)
            .ok_or_else(|| Error::Scoring(format!("no hypothesis for `{}`", r.utt_id)))?;
        let key = (r.group.clone(), r.style.clone());
        if !buckets.contains_key(&key) {
            order.push(key.clone());
        }
        buckets.entry(key).or_default().push(ScoredPair {
            utt_id: r.utt_id.clone(),
            reference: r.transcript.clone(),
            hypothesis: hyp.clone(),
        });
    }
    order
        .into_iter()
        .map(|key| {
            let counts = corpus_error_rate(&buckets[&key], mode, opts)?;
            Ok(GroupScore {
                group: key.0,
                style: key.1,
                error_rate: counts.rate().unwrap_or(0.0),
                n_ref_total: counts.n_ref,
                errors: counts.errors(),
                utterance_count: counts.utterances,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair(id: &str, r: &str, h: &str) -> ScoredPair {
        ScoredPair {
            utt_id: id.into(),
            reference: r.into(),
            hypothesis: h.into(),
        }
    }

    #[test]
    fn identical_corpus_scores_zero() {
        let pairs = vec![pair("a", "x y", "x y"), pair("b", "z", "z")];
        let c = corpus_error_rate(&pairs, TokenMode::Word, TokenizeOptions::default()).unwrap();
        assert_eq!(c.rate(), Some(0.0));
    }

    #[test]
    fn pooled_not_macro_averaged() {
        let pairs = vec![pair("a", "x y", "x q"), pair("b", "z w", "z w")];
        let c = corpus_error_rate(&pairs, TokenMode::Word, TokenizeOptions::default()).unwrap();
        assert_eq!(c.rate(), Some(25.0));
        // Unequal lengths separate pooled from macro rates.
        let pairs = vec![pair("a", "x", "q"), pair("b", "a b c", "a b c")];
        let c = corpus_error_rate(&pairs, TokenMode::Word, TokenizeOptions::default()).unwrap();
        assert_eq!(c.rate(), Some(25.0));
    }

    #[test]
    fn empty_reference_names_utterance() {
        let pairs = vec![pair("a", "x", "x"), pair("bad", "  ", "y")];
        let err = corpus_error_rate(&pairs, TokenMode::Word, TokenizeOptions::default()).unwrap_err();
        assert!(err.to_string().contains("bad"));
    }

    #[test]
    fn character_rate() {
        let pairs = vec![pair("a", "你好世界", "你好视界")];
        let c = corpus_error_rate(&pairs, TokenMode::Char, TokenizeOptions::default()).unwrap();
        assert_eq!(c.rate(), Some(25.0));
    }
}
