//! Success, failure, completeness and flip rates over outcome logs.
//!
//! Every rate is an exact rational; floats appear only when rendering.

use crate::corpus::{ControlFlowClass, Corpus, Origin};
use crate::verify::OutcomeKind;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::fs;
use std::io::{BufRead, Write};
use std::path::Path;

#[derive(Debug, thiserror::Error)]
pub enum MetricsError {
    #[error("outcome log is empty")]
    EmptyLog,
    #[error("no mutants for `{0}`")]
    NoMutants(String),
    #[error("flip rate needs a verified base program")]
    BaseNotSuccess,
    #[error("flip rate needs at least one applicable variant")]
    NoVariants,
    #[error("group {0} is empty")]
    EmptyGroup(usize),
    #[error("record `{0}` is not in the corpus")]
    UnknownId(String),
    #[error("line {line}: {message}")]
    BadLog { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// An exact fraction in `[0, 1]`, serialized as `"num/den"`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Fraction(pub BigRational);

impl Fraction {
    pub fn new(num: usize, den: usize) -> Self {
        Fraction(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn zero() -> Self {
        Fraction(BigRational::zero())
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    /// Percentage rounded half-up to one decimal, e.g. `"9.3"`.
    pub fn percent_1dp(&self) -> String {
        let tenths = (&self.0 * BigInt::from(1000)).round().to_integer();
        let sign = if tenths < BigInt::zero() { "-" } else { "" };
        let t = tenths.magnitude().clone();
        let ten = num_bigint::BigUint::from(10u8);
        format!("{sign}{}.{}", &t / &ten, &t % &ten)
    }
}

impl fmt::Display for Fraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl Serialize for Fraction {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format!("{}/{}", self.0.numer(), self.0.denom()))
    }
}

impl<'de> Deserialize<'de> for Fraction {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        let (n, den) = s.split_once('/').unwrap_or((&s, "1"));
        let parse = |x: &str| x.trim().parse::<BigInt>().map_err(serde::de::Error::custom);
        let den = parse(den)?;
        if den.is_zero() {
            return Err(serde::de::Error::custom("zero denominator"));
        }
        Ok(Fraction(BigRational::new(parse(n)?, den)))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutcomeEntry {
    pub record_id: String,
    #[serde(default)]
    pub origin: Origin,
    pub kind: OutcomeKind,
    #[serde(default)]
    pub wall_time: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub token_cost: Option<u64>,
    /// Set when this run verified the record's specification against a mutant.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mutant_id: Option<String>,
}

impl OutcomeEntry {
    pub fn base(id: impl Into<String>, kind: OutcomeKind) -> Self {
        OutcomeEntry { record_id: id.into(), origin: Origin::Base, kind, wall_time: 0.0, token_cost: None, mutant_id: None }
    }

    pub fn variant(id: impl Into<String>, parent: impl Into<String>, transform: &str, kind: OutcomeKind) -> Self {
        OutcomeEntry {
            origin: Origin::Transformed { parent: parent.into(), transform: transform.to_string() },
            ..Self::base(id, kind)
        }
    }

    pub fn mutant(parent: impl Into<String>, mutant_id: impl Into<String>, kind: OutcomeKind) -> Self {
        OutcomeEntry { mutant_id: Some(mutant_id.into()), ..Self::base(parent, kind) }
    }

    fn is_mutant(&self) -> bool {
        self.mutant_id.is_some()
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct OutcomeLog {
    pub entries: Vec<OutcomeEntry>,
}

impl OutcomeLog {
    pub fn new(entries: Vec<OutcomeEntry>) -> Self {
        OutcomeLog { entries }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn push(&mut self, e: OutcomeEntry) {
        self.entries.push(e);
    }

    /// Base-program runs only.
    pub fn base(&self) -> OutcomeLog {
        self.filtered(|e| !e.is_mutant() && e.origin == Origin::Base)
    }

    /// Transformed-variant runs only.
    pub fn variants(&self) -> OutcomeLog {
        self.filtered(|e| !e.is_mutant() && e.origin != Origin::Base)
    }

    pub fn filtered(&self, keep: impl Fn(&OutcomeEntry) -> bool) -> OutcomeLog {
        OutcomeLog { entries: self.entries.iter().filter(|e| keep(e)).cloned().collect() }
    }

    pub fn kinds(&self) -> Vec<OutcomeKind> {
        self.entries.iter().map(|e| e.kind).collect()
    }

    pub fn write_jsonl(&self, w: &mut impl Write) -> std::io::Result<()> {
        for e in &self.entries {
            serde_json::to_writer(&mut *w, e)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn read_jsonl(r: impl BufRead) -> Result<Self, MetricsError> {
        let mut entries = Vec::new();
        for (i, line) in r.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let e = serde_json::from_str(&line).map_err(|e| MetricsError::BadLog { line: i + 1, message: e.to_string() })?;
            entries.push(e);
        }
        Ok(OutcomeLog { entries })
    }

    pub fn save(&self, path: &Path) -> Result<(), MetricsError> {
        let mut f = std::io::BufWriter::new(fs::File::create(path)?);
        self.write_jsonl(&mut f)?;
        f.flush()?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, MetricsError> {
        Self::read_jsonl(std::io::BufReader::new(fs::File::open(path)?))
    }
}

fn count(kinds: &[OutcomeKind], pred: impl Fn(OutcomeKind) -> bool) -> usize {
    kinds.iter().filter(|&&k| pred(k)).count()
}

fn is_failure(k: OutcomeKind) -> bool {
    matches!(k, OutcomeKind::Failure | OutcomeKind::Invalid)
}

fn rate(log: &OutcomeLog, pred: impl Fn(OutcomeKind) -> bool) -> Result<Fraction, MetricsError> {
    if log.is_empty() {
        return Err(MetricsError::EmptyLog);
    }
    Ok(Fraction::new(count(&log.kinds(), pred), log.len()))
}

pub fn success_rate(log: &OutcomeLog) -> Result<Fraction, MetricsError> {
    rate(log, |k| k == OutcomeKind::Success)
}

/// Failure rate; Invalid counts as a failure.
pub fn failure_rate(log: &OutcomeLog) -> Result<Fraction, MetricsError> {
    rate(log, is_failure)
}

pub fn unknown_rate(log: &OutcomeLog) -> Result<Fraction, MetricsError> {
    rate(log, |k| k == OutcomeKind::Unknown)
}

/// Fraction of mutants the specification rejects.
pub fn completeness_rate(spec_id: &str, mutant_outcomes: &[OutcomeKind]) -> Result<Fraction, MetricsError> {
    if mutant_outcomes.is_empty() {
        return Err(MetricsError::NoMutants(spec_id.to_string()));
    }
    Ok(Fraction::new(count(mutant_outcomes, |k| k != OutcomeKind::Success), mutant_outcomes.len()))
}

pub fn flip_rate(base_outcome: OutcomeKind, variant_outcomes: &[OutcomeKind]) -> Result<Fraction, MetricsError> {
    if base_outcome != OutcomeKind::Success {
        return Err(MetricsError::BaseNotSuccess);
    }
    if variant_outcomes.is_empty() {
        return Err(MetricsError::NoVariants);
    }
    Ok(Fraction::new(count(variant_outcomes, |k| k != OutcomeKind::Success), variant_outcomes.len()))
}

/// Mean over groups of each group's mean.
pub fn normalized_metric(groups: &[Vec<Fraction>]) -> Result<Fraction, MetricsError> {
    if groups.is_empty() {
        return Err(MetricsError::EmptyGroup(0));
    }
    let mut total = BigRational::zero();
    for (i, g) in groups.iter().enumerate() {
        if g.is_empty() {
            return Err(MetricsError::EmptyGroup(i));
        }
        let sum: BigRational = g.iter().map(|f| &f.0).sum();
        total += sum / BigInt::from(g.len());
    }
    Ok(Fraction(total / BigInt::from(groups.len())))
}

/// Mean over every member of every group, ignoring grouping.
pub fn variant_weighted_metric(groups: &[Vec<Fraction>]) -> Result<Fraction, MetricsError> {
    let n: usize = groups.iter().map(Vec::len).sum();
    if n == 0 {
        return Err(MetricsError::EmptyGroup(0));
    }
    let sum: BigRational = groups.iter().flatten().map(|f| &f.0).sum();
    Ok(Fraction(sum / BigInt::from(n)))
}

fn indicator(hit: bool) -> Fraction {
    Fraction(if hit { BigRational::one() } else { BigRational::zero() })
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Rates {
    pub n: usize,
    pub success: usize,
    pub failure: usize,
    pub invalid: usize,
    pub unknown: usize,
    pub sr: Option<Fraction>,
    pub fr: Option<Fraction>,
    pub unknown_rate: Option<Fraction>,
}

impl Rates {
    pub fn of(kinds: &[OutcomeKind]) -> Self {
        let n = kinds.len();
        let success = count(kinds, |k| k == OutcomeKind::Success);
        let failure = count(kinds, |k| k == OutcomeKind::Failure);
        let invalid = count(kinds, |k| k == OutcomeKind::Invalid);
        let unknown = count(kinds, |k| k == OutcomeKind::Unknown);
        let frac = |c| (n > 0).then(|| Fraction::new(c, n));
        Rates {
            n,
            success,
            failure,
            invalid,
            unknown,
            sr: frac(success),
            fr: frac(failure + invalid),
            unknown_rate: frac(unknown),
        }
    }
}

/// SR/FR per control-flow class; classes without entries are absent.
pub fn slice_by_class(log: &OutcomeLog, corpus: &Corpus) -> Result<BTreeMap<ControlFlowClass, Rates>, MetricsError> {
    let mut by: BTreeMap<ControlFlowClass, Vec<OutcomeKind>> = BTreeMap::new();
    for e in &log.entries {
        let r = corpus.get(&e.record_id).ok_or_else(|| MetricsError::UnknownId(e.record_id.clone()))?;
        by.entry(r.class).or_default().push(e.kind);
    }
    Ok(by.into_iter().map(|(c, k)| (c, Rates::of(&k))).collect())
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct DiverseRates {
    pub parents: usize,
    pub variants: usize,
    /// Unweighted mean over parents of per-parent rates (headline).
    pub sr: Fraction,
    pub fr: Fraction,
    pub sr_weighted: Fraction,
    pub fr_weighted: Fraction,
}

impl Default for Fraction {
    fn default() -> Self {
        Fraction::zero()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ReportOptions {
    /// Average CR over every specification with mutant runs, not only the
    /// ones whose base verified.
    pub cr_all_specs: bool,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct MetricReport {
    pub label: String,
    pub base: Rates,
    pub cr: Option<Fraction>,
    pub cr_specs: usize,
    pub diverse: Option<DiverseRates>,
    /// Mean over verified parents with applicable variants.
    pub flr: Option<Fraction>,
    pub flr_pooled: Option<Fraction>,
    pub flr_parents: usize,
    #[serde(default)]
    pub per_class: BTreeMap<ControlFlowClass, Rates>,
    pub token_cost: u64,
    pub wall_time: f64,
}

impl MetricReport {
    pub fn from_log(
        label: &str,
        log: &OutcomeLog,
        corpus: Option<&Corpus>,
        opts: ReportOptions,
    ) -> Result<Self, MetricsError> {
        if log.is_empty() {
            return Err(MetricsError::EmptyLog);
        }
        let base = log.base();
        let base_kind: HashMap<&str, OutcomeKind> = base.entries.iter().map(|e| (e.record_id.as_str(), e.kind)).collect();

        let mut mutants: BTreeMap<&str, Vec<OutcomeKind>> = BTreeMap::new();
        for e in log.entries.iter().filter(|e| e.is_mutant()) {
            mutants.entry(&e.record_id).or_default().push(e.kind);
        }
        let crs: Vec<Fraction> = mutants
            .iter()
            .filter(|(id, _)| opts.cr_all_specs || base_kind.get(*id) == Some(&OutcomeKind::Success))
            .map(|(id, ks)| completeness_rate(id, ks))
            .collect::<Result<_, _>>()?;

        let mut groups: BTreeMap<&str, Vec<OutcomeKind>> = BTreeMap::new();
        for e in log.entries.iter().filter(|e| !e.is_mutant()) {
            if let Origin::Transformed { parent, .. } = &e.origin {
                groups.entry(parent).or_default().push(e.kind);
            }
        }
        let diverse = if groups.is_empty() {
            None
        } else {
            let ind = |pred: fn(OutcomeKind) -> bool| -> Vec<Vec<Fraction>> {
                groups.values().map(|ks| ks.iter().map(|&k| indicator(pred(k))).collect()).collect()
            };
            let sr = ind(|k| k == OutcomeKind::Success);
            let fr = ind(is_failure);
            Some(DiverseRates {
                parents: groups.len(),
                variants: groups.values().map(Vec::len).sum(),
                sr: normalized_metric(&sr)?,
                fr: normalized_metric(&fr)?,
                sr_weighted: variant_weighted_metric(&sr)?,
                fr_weighted: variant_weighted_metric(&fr)?,
            })
        };

        let verified: Vec<&Vec<OutcomeKind>> = groups
            .iter()
            .filter(|(p, _)| base_kind.get(*p) == Some(&OutcomeKind::Success))
            .map(|(_, ks)| ks)
            .collect();
        let flrs: Vec<Vec<Fraction>> =
            verified.iter().map(|ks| flip_rate(OutcomeKind::Success, ks).map(|f| vec![f])).collect::<Result<_, _>>()?;
        let flips: Vec<Vec<Fraction>> =
            verified.iter().map(|ks| ks.iter().map(|&k| indicator(k != OutcomeKind::Success)).collect()).collect();

        let per_class = match corpus {
            Some(c) => slice_by_class(&base, c)?,
            None => BTreeMap::new(),
        };
        Ok(MetricReport {
            label: label.to_string(),
            base: Rates::of(&base.kinds()),
            cr: (!crs.is_empty()).then(|| normalized_metric(&[crs.clone()])).transpose()?,
            cr_specs: crs.len(),
            diverse,
            flr: (!flrs.is_empty()).then(|| normalized_metric(&flrs)).transpose()?,
            flr_pooled: (!flips.is_empty()).then(|| variant_weighted_metric(&flips)).transpose()?,
            flr_parents: flrs.len(),
            per_class,
            token_cost: log.entries.iter().filter_map(|e| e.token_cost).sum(),
            wall_time: log.entries.iter().map(|e| e.wall_time).sum(),
        })
    }
}

fn pct(f: &Option<Fraction>) -> String {
    f.as_ref().map_or_else(|| "-".to_string(), Fraction::percent_1dp)
}

const COLUMNS: [&str; 7] = ["Model", "SR (%)", "FR (%)", "CR (%)", "Diverse SR (%)", "Diverse FR (%)", "Flip Rate (%)"];

fn row(r: &MetricReport) -> [String; 7] {
    [
        r.label.clone(),
        pct(&r.base.sr),
        pct(&r.base.fr),
        pct(&r.cr),
        pct(&r.diverse.as_ref().map(|d| d.sr.clone())),
        pct(&r.diverse.as_ref().map(|d| d.fr.clone())),
        pct(&r.flr),
    ]
}

pub fn write_csv(reports: &[MetricReport], w: impl Write) -> Result<(), MetricsError> {
    let mut w = csv::Writer::from_writer(w);
    w.write_record(COLUMNS)?;
    for r in reports {
        w.write_record(row(r))?;
    }
    w.flush()?;
    Ok(())
}

/// Fixed-width text table, one row per report.
pub fn render_table(reports: &[MetricReport]) -> String {
    let rows: Vec<[String; 7]> = reports.iter().map(row).collect();
    let mut widths: Vec<usize> = COLUMNS.iter().map(|c| c.len()).collect();
    for r in &rows {
        for (w, c) in widths.iter_mut().zip(r) {
            *w = (*w).max(c.len());
        }
    }
    let line = |cells: Vec<&str>| -> String {
        let parts: Vec<String> = cells
            .iter()
            .zip(&widths)
            .enumerate()
            .map(|(i, (c, w))| if i == 0 { format!("{c:<w$}") } else { format!("{c:>w$}") })
            .collect();
        parts.join("  ").trim_end().to_string() + "\n"
    };
    let mut out = line(COLUMNS.to_vec());
    out.push_str(&line(widths.iter().map(|&w| "-".repeat(w)).collect::<Vec<_>>().iter().map(String::as_str).collect()));
    for r in &rows {
        out.push_str(&line(r.iter().map(String::as_str).collect()));
    }
    out
}

/// Per-class SR/FR/count rows as CSV.
pub fn write_class_csv(report: &MetricReport, w: impl Write) -> Result<(), MetricsError> {
    let mut w = csv::Writer::from_writer(w);
    w.write_record(["class", "n", "success", "failure", "invalid", "unknown", "sr_pct", "fr_pct"])?;
    for (c, r) in &report.per_class {
        w.write_record([
            c.as_str().to_string(),
            r.n.to_string(),
            r.success.to_string(),
            r.failure.to_string(),
            r.invalid.to_string(),
            r.unknown.to_string(),
            pct(&r.sr),
            pct(&r.fr),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn percent_rounds_half_up() {
        assert_eq!(Fraction::new(65, 700).percent_1dp(), "9.3");
        assert_eq!(Fraction::new(1, 8).percent_1dp(), "12.5");
        assert_eq!(Fraction::new(1, 2000).percent_1dp(), "0.1");
        assert_eq!(Fraction::new(1, 1).percent_1dp(), "100.0");
    }

    #[test]
    fn fraction_serde_round_trip() {
        let f = Fraction::new(6, 8);
        let s = serde_json::to_string(&f).unwrap();
        assert_eq!(s, "\"3/4\"");
        assert_eq!(serde_json::from_str::<Fraction>(&s).unwrap(), f);
        assert!(serde_json::from_str::<Fraction>("\"1/0\"").is_err());
    }
}
