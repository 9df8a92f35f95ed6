//! Variant corpora: every applicable variant, and the natural half.

use super::{naturalness, LanguageModelScorer, ScorerError, TransformError, TransformId, Transformer};
use crate::corpus::{default_source_path, Corpus, Origin, ProgramRecord};
use crate::syntax::ParseError;
use rayon::prelude::*;
use std::collections::BTreeMap;

pub fn variant_id(parent: &str, transform: TransformId) -> String {
    format!("{parent}__{transform}")
}

#[derive(Debug, Clone)]
pub struct DiverseCorpora {
    pub diverse: Corpus,
    pub diverse_n: Corpus,
    /// Naturalness score per variant id, in `diverse` order.
    pub scores: Vec<(String, f64)>,
}

#[derive(Debug, thiserror::Error)]
pub enum DiverseError {
    #[error("transforming `{id}`: {error}")]
    Transform { id: String, error: TransformError },
    #[error("scoring `{id}`: {error}")]
    Scorer { id: String, error: ScorerError },
    #[error("classifying `{id}`: {error}")]
    Classify { id: String, error: ParseError },
}

/// Builds all variants of every record, then keeps the better-scoring half
/// (global ranking, ties by transform then parent id) and drops parents with
/// fewer than three survivors.
pub fn build_diverse(
    corpus: &Corpus,
    scorer: &dyn LanguageModelScorer,
    transformer: &Transformer,
) -> Result<DiverseCorpora, DiverseError> {
    let per_record: Vec<Vec<(ProgramRecord, TransformId, f64)>> = corpus
        .records
        .par_iter()
        .map(|r| -> Result<_, DiverseError> {
            let mut out = Vec::new();
            for t in TransformId::ALL {
                let res = transformer
                    .apply(t, &r.bare_source)
                    .map_err(|error| DiverseError::Transform { id: r.id.clone(), error })?;
                if !res.applicable {
                    continue;
                }
                let id = variant_id(&r.id, t);
                let score = naturalness(&r.bare_source, &res.variant_source, scorer)
                    .map_err(|error| DiverseError::Scorer { id: id.clone(), error })?;
                let mut rec =
                    ProgramRecord::new(id.clone(), res.variant_source, r.intent.clone(), Origin::transformed(&r.id, t))
                        .map_err(|error| DiverseError::Classify { id, error })?;
                rec.source_path = default_source_path(&rec.id);
                out.push((rec, t, score));
            }
            Ok(out)
        })
        .collect::<Result<_, _>>()?;

    let all: Vec<(ProgramRecord, TransformId, f64)> = per_record.into_iter().flatten().collect();
    let scores = all.iter().map(|(r, _, s)| (r.id.clone(), *s)).collect();

    let mut ranked: Vec<usize> = (0..all.len()).collect();
    ranked.sort_by(|&a, &b| {
        let (ra, ta, sa) = &all[a];
        let (rb, tb, sb) = &all[b];
        sa.total_cmp(sb).then(ta.cmp(tb)).then_with(|| ra.origin.parent().cmp(&rb.origin.parent()))
    });
    let mut keep = vec![false; all.len()];
    for &i in &ranked[..all.len() / 2] {
        keep[i] = true;
    }
    let mut survivors: BTreeMap<&str, usize> = BTreeMap::new();
    for (i, (r, _, _)) in all.iter().enumerate() {
        if keep[i] {
            *survivors.entry(r.origin.parent().unwrap_or_default()).or_default() += 1;
        }
    }
    let natural: Vec<ProgramRecord> = all
        .iter()
        .enumerate()
        .filter(|(i, (r, _, _))| keep[*i] && survivors[r.origin.parent().unwrap_or_default()] >= 3)
        .map(|(_, (r, _, _))| r.clone())
        .collect();

    Ok(DiverseCorpora {
        diverse: Corpus::new(
            format!("{}-diverse", corpus.name),
            corpus.version.clone(),
            all.into_iter().map(|(r, _, _)| r).collect(),
        ),
        diverse_n: Corpus::new(format!("{}-diverse-n", corpus.name), corpus.version.clone(), natural),
        scores,
    })
}
