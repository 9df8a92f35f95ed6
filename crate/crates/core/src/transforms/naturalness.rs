//! Token n-gram language model and the relative cross-entropy score.

use crate::syntax::{self, lexer, ParseError};
use std::collections::HashMap;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ScorerError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("no tokens to score")]
    Empty,
    #[error("cross-entropy is not finite or not positive: {0}")]
    Degenerate(f64),
}

/// Per-token cross-entropy of a program under some language model, in bits.
pub trait LanguageModelScorer: Send + Sync {
    fn cross_entropy(&self, source: &str) -> Result<f64, ScorerError>;
}

const BOS: &str = "<s>";
const EOS: &str = "</s>";

/// Order-n token model with add-one smoothing.
#[derive(Debug, Clone)]
pub struct NgramScorer {
    order: usize,
    vocab: HashMap<String, u32>,
    ngrams: HashMap<Vec<u32>, u64>,
    contexts: HashMap<Vec<u32>, u64>,
}

const UNKNOWN: u32 = 0;

fn token_texts(source: &str) -> Result<Vec<&str>, ScorerError> {
    let lexed = lexer::tokenize(source)?;
    Ok(lexed.tokens.iter().map(|t| t.span.slice(source)).collect())
}

impl NgramScorer {
    pub fn train<'s>(order: usize, sources: impl IntoIterator<Item = &'s str>) -> Result<Self, ScorerError> {
        assert!(order >= 1, "n-gram order must be positive");
        let mut m = NgramScorer { order, vocab: HashMap::new(), ngrams: HashMap::new(), contexts: HashMap::new() };
        m.vocab.insert(BOS.into(), 1);
        m.vocab.insert(EOS.into(), 2);
        for s in sources {
            let ids: Vec<u32> = token_texts(s)?
                .into_iter()
                .map(|t| {
                    let next = m.vocab.len() as u32 + 1;
                    *m.vocab.entry(t.to_string()).or_insert(next)
                })
                .collect();
            let seq = m.padded(ids);
            for i in order - 1..seq.len() {
                let gram = &seq[i + 1 - order..=i];
                *m.ngrams.entry(gram.to_vec()).or_default() += 1;
                *m.contexts.entry(gram[..order - 1].to_vec()).or_default() += 1;
            }
        }
        Ok(m)
    }

    /// Trigram model over the given sources.
    pub fn trigram<'s>(sources: impl IntoIterator<Item = &'s str>) -> Result<Self, ScorerError> {
        Self::train(3, sources)
    }

    fn padded(&self, ids: Vec<u32>) -> Vec<u32> {
        let mut seq = vec![1; self.order - 1];
        seq.extend(ids);
        seq.push(2);
        seq
    }

    /// Vocabulary size including the unknown-token slot.
    fn v(&self) -> f64 {
        (self.vocab.len() + 1) as f64
    }

    pub fn probability(&self, context: &[u32], token: u32) -> f64 {
        let mut gram = context.to_vec();
        gram.push(token);
        let c = self.ngrams.get(&gram).copied().unwrap_or(0) as f64;
        let ctx = self.contexts.get(context).copied().unwrap_or(0) as f64;
        (c + 1.0) / (ctx + self.v())
    }
}

impl LanguageModelScorer for NgramScorer {
    fn cross_entropy(&self, source: &str) -> Result<f64, ScorerError> {
        let ids: Vec<u32> = token_texts(source)?
            .into_iter()
            .map(|t| self.vocab.get(t).copied().unwrap_or(UNKNOWN))
            .collect();
        let seq = self.padded(ids);
        let n = seq.len() - (self.order - 1);
        if n == 0 {
            return Err(ScorerError::Empty);
        }
        let bits: f64 = (self.order - 1..seq.len())
            .map(|i| -self.probability(&seq[i + 1 - self.order..i], seq[i]).log2())
            .sum();
        Ok(bits / n as f64)
    }
}

/// Relative change in cross-entropy, `(H(variant) - H(original)) / H(original)`.
/// Lower is more natural.
pub fn naturalness(original: &str, variant: &str, scorer: &dyn LanguageModelScorer) -> Result<f64, ScorerError> {
    syntax::parse(original)?;
    syntax::parse(variant)?;
    let h_o = scorer.cross_entropy(original)?;
    if !h_o.is_finite() || h_o <= 0.0 {
        return Err(ScorerError::Degenerate(h_o));
    }
    let h_v = scorer.cross_entropy(variant)?;
    let score = (h_v - h_o) / h_o;
    if score.is_finite() {
        Ok(score)
    } else {
        Err(ScorerError::Degenerate(h_v))
    }
}
