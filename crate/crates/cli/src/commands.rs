//! One function per pipeline stage. Stages talk only through files under
//! the output directory.

use crate::config::{ConfigError, ModelBackend, RunConfig, VariantSet, VerifierKind};
use crate::provenance::Provenance;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use specbench_core::corpus::{load_corpus, save_corpus, Corpus, CorpusError, Origin};
use specbench_core::genrepair::{
    write_transcript, Demo, GenError, Harness, ModelClient, PromptTemplates, RepairOptions, ReplayClient,
    ScriptedClient, Terminal,
};
use specbench_core::metrics::{
    render_table, write_class_csv, write_csv, MetricReport, MetricsError, OutcomeLog, ReportOptions,
};
use specbench_core::mutate::{export_mutants, generate_mutants, suppress_equivalents, MutantSet};
use specbench_core::pipeline::{
    completeness_runs_with, generate_all, read_generations, verify_generations, write_generations, Generation,
    PipelineError,
};
use specbench_core::syntax::strip_annotations;
use specbench_core::transforms::{applicability_csv, build_diverse, DiverseError, NgramScorer, Transformer};
use specbench_core::triage::{distribution, triage, write_distribution_csv, AtomicError, PatternTable, TriageError};
use specbench_core::verify::{
    OutcomeKind, ProcessBackend, ReplayBackend, VerificationOutcome, VerifierBackend, VerifyError,
};
use std::collections::BTreeSet;
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

#[derive(Debug, thiserror::Error)]
pub enum StageError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("missing artifact {path}; run `specbench {stage}` first", path = .0.display(), stage = .1)]
    MissingArtifact(PathBuf, &'static str),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Transform(#[from] DiverseError),
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
    #[error(transparent)]
    Gen(#[from] GenError),
    #[error(transparent)]
    Verify(#[from] VerifyError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Triage(#[from] TriageError),
    #[error("{0}")]
    Other(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl StageError {
    /// Short machine-readable kind for the error record.
    pub fn kind(&self) -> String {
        match self {
            StageError::Config(_) => "ConfigError".into(),
            StageError::MissingArtifact(..) => "MissingArtifact".into(),
            StageError::Metrics(MetricsError::EmptyLog) => "EmptyLog".into(),
            StageError::Pipeline(PipelineError::Metrics(MetricsError::EmptyLog)) => "EmptyLog".into(),
            StageError::Corpus(_) => "CorpusError".into(),
            StageError::Transform(_) => "TransformError".into(),
            StageError::Pipeline(_) => "PipelineError".into(),
            StageError::Gen(_) => "GenerationError".into(),
            StageError::Verify(_) => "VerifyError".into(),
            StageError::Metrics(_) => "MetricsError".into(),
            StageError::Triage(_) => "TriageError".into(),
            StageError::Other(_) => "StageError".into(),
            StageError::Io(_) => "IoError".into(),
            StageError::Json(_) => "JsonError".into(),
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            StageError::Config(_) => 2,
            _ => 3,
        }
    }
}

type Res<T> = Result<T, StageError>;

/// Layout of the output directory.
pub struct Layout {
    pub out: PathBuf,
}

impl Layout {
    pub fn corpus(&self) -> PathBuf {
        self.out.join("corpus")
    }
    pub fn variants(&self) -> PathBuf {
        self.out.join("variants")
    }
    pub fn variants_n(&self) -> PathBuf {
        self.out.join("variants_n")
    }
    pub fn transforms(&self) -> PathBuf {
        self.out.join("transforms")
    }
    pub fn mutants(&self) -> PathBuf {
        self.out.join("mutants")
    }
    pub fn mutant_sets(&self) -> PathBuf {
        self.mutants().join("sets.json")
    }
    pub fn generations(&self) -> PathBuf {
        self.out.join("generations.jsonl")
    }
    pub fn outcomes(&self) -> PathBuf {
        self.out.join("outcomes.jsonl")
    }
    pub fn verification(&self) -> PathBuf {
        self.out.join("verification.jsonl")
    }
    pub fn timings(&self) -> PathBuf {
        self.out.join("timings.jsonl")
    }
    pub fn skipped_pairs(&self) -> PathBuf {
        self.out.join("skipped_pairs.csv")
    }
    pub fn triage(&self) -> PathBuf {
        self.out.join("triage")
    }
    pub fn repair(&self) -> PathBuf {
        self.out.join("repair")
    }
    pub fn report(&self) -> PathBuf {
        self.out.join("report")
    }
}

fn need(path: PathBuf, producer: &'static str) -> Res<PathBuf> {
    if path.exists() {
        Ok(path)
    } else {
        Err(StageError::MissingArtifact(path, producer))
    }
}

pub struct Ctx {
    pub cfg: RunConfig,
    pub layout: Layout,
    config_text: String,
}

impl Ctx {
    pub fn new(cfg: RunConfig) -> Res<Self> {
        cfg.validate()?;
        let config_text = cfg.canonical();
        let layout = Layout { out: cfg.out.clone() };
        fs::create_dir_all(&layout.out)?;
        Ok(Ctx { cfg, layout, config_text })
    }

    fn finish(&self, p: Provenance) -> Res<()> {
        p.finish(&self.layout.out, &self.config_text)?;
        Ok(())
    }

    fn templates(&self) -> Res<PromptTemplates> {
        Ok(match &self.cfg.prompts {
            Some(p) => PromptTemplates::load(p)?,
            None => PromptTemplates::default(),
        })
    }

    fn patterns(&self) -> Res<PatternTable> {
        Ok(match &self.cfg.patterns {
            Some(p) => PatternTable::default().with_overrides(PatternTable::load(p)?),
            None => PatternTable::default(),
        })
    }

    fn demos(&self) -> Res<Vec<Demo>> {
        self.cfg
            .demos
            .iter()
            .map(|p| {
                let specified_source = fs::read_to_string(p)?;
                let (bare_source, _) = strip_annotations(&specified_source)
                    .map_err(|e| StageError::Other(format!("demo {}: {e}", p.display())))?;
                let id = p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
                Ok(Demo { id, bare_source, specified_source })
            })
            .collect()
    }

    fn model(&self) -> Res<Box<dyn ModelClient>> {
        let m = &self.cfg.model;
        Ok(match m.backend {
            ModelBackend::Scripted => {
                let path = m.script.as_ref().expect("validated");
                Box::new(ScriptedClient::from_json(&fs::read_to_string(path)?)?)
            }
            ModelBackend::Replay => Box::new(ReplayClient::load(m.replay.as_ref().expect("validated"))?),
            ModelBackend::Http => Box::new(specbench_core::genrepair::HttpClient::new(&m.config)),
        })
    }

    fn verifier(&self) -> Res<Box<dyn VerifierBackend>> {
        Ok(match self.cfg.verifier.backend {
            VerifierKind::Process => Box::new(ProcessBackend),
            VerifierKind::Replay => Box::new(ReplayBackend::load(self.cfg.verifier.replay_dir.as_ref().expect("validated"))?),
        })
    }

    /// The corpus the generate and verify stages run over.
    fn eval_corpus(&self) -> Res<(PathBuf, Corpus)> {
        let dir = match self.cfg.variants {
            VariantSet::All => need(self.layout.variants(), "transform")?,
            VariantSet::Natural => need(self.layout.variants_n(), "transform")?,
            VariantSet::None => need(self.layout.corpus(), "ingest")?,
        };
        let c = load_corpus(&dir)?;
        Ok((dir, c))
    }

    fn base_corpus(&self) -> Res<(PathBuf, Corpus)> {
        let dir = need(self.layout.corpus(), "ingest")?;
        let c = load_corpus(&dir)?;
        Ok((dir, c))
    }
}

fn write_jsonl<T: Serialize>(path: &Path, items: &[T]) -> Res<()> {
    let mut w = std::io::BufWriter::new(fs::File::create(path)?);
    for it in items {
        serde_json::to_writer(&mut w, it)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

fn read_jsonl<T: for<'de> Deserialize<'de>>(path: &Path) -> Res<Vec<T>> {
    let mut out = Vec::new();
    for line in BufReader::new(fs::File::open(path)?).lines() {
        let line = line?;
        if !line.trim().is_empty() {
            out.push(serde_json::from_str(&line)?);
        }
    }
    Ok(out)
}

pub fn ingest(cx: &Ctx) -> Res<String> {
    let mut p = Provenance::start("ingest");
    let src = cx.cfg.corpus.clone().ok_or_else(|| ConfigError("no corpus given (set `corpus` or pass --corpus)".into()))?;
    p.input(&src);
    let corpus = load_corpus(&src)?;
    let dir = cx.layout.corpus();
    if dir.exists() {
        fs::remove_dir_all(&dir)?;
    }
    save_corpus(&corpus, &dir)?;
    p.output(&dir);
    cx.finish(p)?;
    let counts: Vec<String> = corpus.counts().iter().map(|(c, n)| format!("{}={n}", c.as_str())).collect();
    Ok(format!("ingested {} records ({})", corpus.len(), counts.join(", ")))
}

pub fn transform(cx: &Ctx) -> Res<String> {
    let mut p = Provenance::start("transform");
    let (dir, base) = cx.base_corpus()?;
    p.input(&dir);
    let scorer = NgramScorer::train(cx.cfg.ngram_order.max(1), base.records.iter().map(|r| r.bare_source.as_str()))
        .map_err(|e| StageError::Other(e.to_string()))?;
    let transformer = Transformer::default();
    let d = build_diverse(&base, &scorer, &transformer)?;
    let combined = |name: String, variants: &Corpus| {
        let mut records = base.records.clone();
        records.extend(variants.records.iter().cloned());
        Corpus::new(name, base.version.clone(), records)
    };
    for (path, c) in [
        (cx.layout.variants(), combined(d.diverse.name.clone(), &d.diverse)),
        (cx.layout.variants_n(), combined(d.diverse_n.name.clone(), &d.diverse_n)),
    ] {
        if path.exists() {
            fs::remove_dir_all(&path)?;
        }
        save_corpus(&c, &path)?;
        p.output(&path);
    }
    let tdir = cx.layout.transforms();
    fs::create_dir_all(&tdir)?;
    let mut rows: Vec<(String, BTreeSet<_>)> = base.records.iter().map(|r| (r.id.clone(), BTreeSet::new())).collect();
    for v in &d.diverse.records {
        if let (Some(parent), Some(t)) = (v.origin.parent(), v.origin.transform()) {
            if let Some(row) = rows.iter_mut().find(|(id, _)| id == parent) {
                row.1.insert(t);
            }
        }
    }
    fs::write(tdir.join("applicability.csv"), applicability_csv(&rows))?;
    let mut scores = String::from("variant_id,naturalness\n");
    for (id, s) in &d.scores {
        scores.push_str(&format!("{id},{s:.6}\n"));
    }
    fs::write(tdir.join("naturalness.csv"), scores)?;
    p.output(&tdir);
    cx.finish(p)?;
    Ok(format!("{} variants ({} in the natural half) of {} records", d.diverse.len(), d.diverse_n.len(), base.len()))
}

pub fn mutate(cx: &Ctx) -> Res<String> {
    let mut p = Provenance::start("mutate");
    let (dir, base) = cx.base_corpus()?;
    p.input(&dir);
    let ops = cx.cfg.operators()?;
    let sets: Vec<MutantSet> = base
        .records
        .par_iter()
        .map(|r| {
            generate_mutants(&r.id, &r.bare_source, &ops)
                .map(suppress_equivalents)
                .map_err(|e| StageError::Other(format!("mutating `{}`: {e}", r.id)))
        })
        .collect::<Res<_>>()?;
    let mdir = cx.layout.mutants();
    if mdir.exists() {
        fs::remove_dir_all(&mdir)?;
    }
    export_mutants(&sets, &mdir)?;
    fs::write(cx.layout.mutant_sets(), serde_json::to_string_pretty(&sets)? + "\n")?;
    p.output(&mdir);
    cx.finish(p)?;
    let kept: usize = sets.iter().map(|s| s.len()).sum();
    let dropped: usize = sets.iter().map(|s| s.suppressed.len()).sum();
    Ok(format!("{kept} mutants ({dropped} suppressed as equivalent) over {} records", sets.len()))
}

pub fn generate(cx: &Ctx) -> Res<String> {
    let mut p = Provenance::start("generate");
    let (dir, corpus) = cx.eval_corpus()?;
    p.input(&dir);
    for d in &cx.cfg.demos {
        p.input(d);
    }
    let model = cx.model()?;
    let gens = generate_all(
        &corpus.records,
        model.as_ref(),
        &cx.cfg.model.config,
        &cx.templates()?,
        &cx.cfg.style()?,
        &cx.demos()?,
        cx.cfg.workers,
    )?;
    let mut buf = Vec::new();
    write_generations(&gens, &mut buf)?;
    fs::write(cx.layout.generations(), buf)?;
    p.output(cx.layout.generations());
    cx.finish(p)?;
    let extracted = gens.iter().filter(|g| g.spec.is_some()).count();
    Ok(format!("{} responses, {extracted} with an extractable specification", gens.len()))
}

/// A verification outcome with its record, as stored in verification.jsonl.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerifiedRecord {
    pub record_id: String,
    #[serde(default)]
    pub origin: Origin,
    pub outcome: VerificationOutcome,
}

#[derive(Debug, Serialize)]
struct Timing<'a> {
    record_id: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    mutant_id: Option<&'a str>,
    wall_time: f64,
}

pub fn verify(cx: &Ctx) -> Res<String> {
    let mut p = Provenance::start("verify");
    let (dir, corpus) = cx.eval_corpus()?;
    let gpath = need(cx.layout.generations(), "generate")?;
    p.input(&dir);
    p.input(&gpath);
    let gens: Vec<Generation> = read_generations(BufReader::new(fs::File::open(&gpath)?))?;
    let verifier = cx.verifier()?;
    let vcfg = &cx.cfg.verifier.config;
    let (mut log, outcomes) = verify_generations(&gens, &corpus, verifier.as_ref(), vcfg)?;
    let mut skipped = Vec::new();
    if cx.layout.mutant_sets().exists() {
        p.input(cx.layout.mutant_sets());
        let sets: Vec<MutantSet> = serde_json::from_str(&fs::read_to_string(cx.layout.mutant_sets())?)?;
        let (entries, sk) = completeness_runs_with(&gens, &log, &sets, verifier.as_ref(), vcfg)?;
        log.entries.extend(entries);
        skipped = sk;
    }
    // wall times go to the sidecar only
    let timings: Vec<Timing> = log
        .entries
        .iter()
        .map(|e| Timing { record_id: &e.record_id, mutant_id: e.mutant_id.as_deref(), wall_time: e.wall_time })
        .collect();
    write_jsonl(&cx.layout.timings(), &timings)?;
    for e in &mut log.entries {
        e.wall_time = 0.0;
    }
    log.save(&cx.layout.outcomes())?;
    let verified: Vec<VerifiedRecord> = gens
        .iter()
        .zip(outcomes)
        .map(|(g, mut o)| {
            o.wall_time = 0.0;
            VerifiedRecord {
                record_id: g.record_id.clone(),
                origin: corpus.get(&g.record_id).map(|r| r.origin.clone()).unwrap_or_default(),
                outcome: o,
            }
        })
        .collect();
    write_jsonl(&cx.layout.verification(), &verified)?;
    let mut sk = String::from("mutant_id,reason\n");
    for s in &skipped {
        sk.push_str(&format!("{},\"{}\"\n", s.mutant_id, s.error.to_string().replace('"', "'")));
    }
    fs::write(cx.layout.skipped_pairs(), sk)?;
    for o in [cx.layout.outcomes(), cx.layout.verification(), cx.layout.skipped_pairs()] {
        p.output(o);
    }
    cx.finish(p)?;
    let ok = verified.iter().filter(|v| v.outcome.kind == OutcomeKind::Success).count();
    let mutants = log.entries.iter().filter(|e| e.mutant_id.is_some()).count();
    Ok(format!("{ok}/{} specifications verified; {mutants} mutant runs", verified.len()))
}

pub fn score(cx: &Ctx) -> Res<String> {
    let mut p = Provenance::start("score");
    let lpath = need(cx.layout.outcomes(), "verify")?;
    p.input(&lpath);
    let log = OutcomeLog::load(&lpath)?;
    let corpus = cx.eval_corpus().ok().map(|(_, c)| c);
    let report = MetricReport::from_log(
        &cx.cfg.label,
        &log,
        corpus.as_ref(),
        ReportOptions { cr_all_specs: cx.cfg.cr_all_specs },
    )?;
    let rdir = cx.layout.report();
    fs::create_dir_all(&rdir)?;
    let mut csv = Vec::new();
    write_csv(std::slice::from_ref(&report), &mut csv)?;
    fs::write(rdir.join("metrics.csv"), csv)?;
    fs::write(rdir.join("metrics.txt"), render_table(std::slice::from_ref(&report)))?;
    let mut classes = Vec::new();
    write_class_csv(&report, &mut classes)?;
    fs::write(rdir.join("per_class.csv"), classes)?;
    fs::write(rdir.join("metrics.json"), serde_json::to_string_pretty(&report)? + "\n")?;
    for f in ["metrics.csv", "metrics.txt", "per_class.csv", "metrics.json"] {
        p.output(rdir.join(f));
    }
    cx.finish(p)?;
    let pct = |f: &Option<specbench_core::metrics::Fraction>| f.as_ref().map_or("-".into(), |f| format!("{}%", f.percent_1dp()));
    Ok(format!("SR {} FR {} CR {} FlR {}", pct(&report.base.sr), pct(&report.base.fr), pct(&report.cr), pct(&report.flr)))
}

pub fn triage_cmd(cx: &Ctx) -> Res<String> {
    let mut p = Provenance::start("triage");
    let vpath = need(cx.layout.verification(), "verify")?;
    p.input(&vpath);
    let verified: Vec<VerifiedRecord> = read_jsonl(&vpath)?;
    let patterns = cx.patterns()?;
    #[derive(Serialize)]
    struct Row<'a> {
        record_id: &'a str,
        #[serde(flatten)]
        error: &'a AtomicError,
    }
    let per_record: Vec<(&str, Vec<AtomicError>)> = verified
        .iter()
        .filter(|v| v.outcome.kind != OutcomeKind::Success)
        .map(|v| (v.record_id.as_str(), triage(&v.outcome.diagnostics, &patterns)))
        .collect();
    let rows: Vec<Row> =
        per_record.iter().flat_map(|(id, errs)| errs.iter().map(move |e| Row { record_id: id, error: e })).collect();
    let tdir = cx.layout.triage();
    fs::create_dir_all(&tdir)?;
    write_jsonl(&tdir.join("errors.jsonl"), &rows)?;
    let all: Vec<AtomicError> = per_record.iter().flat_map(|(_, e)| e.iter().cloned()).collect();
    let dist = distribution(&all, cx.cfg.top_k);
    let mut csv = Vec::new();
    write_distribution_csv(&dist, &mut csv)?;
    fs::write(tdir.join("distribution.csv"), csv)?;
    p.output(&tdir);
    cx.finish(p)?;
    let top = dist.first().map_or("none".to_string(), |(c, n)| format!("{c} ({n})"));
    Ok(format!("{} atomic errors from {} failing runs; top category {top}", all.len(), per_record.len()))
}

pub fn repair(cx: &Ctx) -> Res<String> {
    let mut p = Provenance::start("repair");
    let vpath = need(cx.layout.verification(), "verify")?;
    let (dir, base) = cx.base_corpus()?;
    p.input(&vpath);
    p.input(&dir);
    let verified: Vec<VerifiedRecord> = read_jsonl(&vpath)?;
    let failing: Vec<&str> = verified
        .iter()
        .filter(|v| v.origin == Origin::Base && v.outcome.kind != OutcomeKind::Success)
        .map(|v| v.record_id.as_str())
        .collect();
    let model = cx.model()?;
    let verifier = cx.verifier()?;
    let (templates, patterns) = (cx.templates()?, cx.patterns()?);
    let h = Harness {
        model: model.as_ref(),
        model_config: &cx.cfg.model.config,
        verifier: verifier.as_ref(),
        verifier_config: &cx.cfg.verifier.config,
        patterns: &patterns,
        templates: &templates,
    };
    let opts = RepairOptions {
        style: cx.cfg.style()?,
        max_iters: cx.cfg.max_repair_iters,
        demos: cx.demos()?,
        mutation_budget: cx.cfg.mutation_budget,
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cx.cfg.workers)
        .build()
        .map_err(|e| StageError::Other(e.to_string()))?;
    let traces = pool.install(|| {
        failing
            .par_iter()
            .map(|id| {
                let record = base.get(id).ok_or_else(|| StageError::Other(format!("no base record `{id}`")))?;
                Ok(h.self_repair(record, &opts)?)
            })
            .collect::<Res<Vec<_>>>()
    })?;
    let rdir = cx.layout.repair();
    if rdir.exists() {
        fs::remove_dir_all(&rdir)?;
    }
    fs::create_dir_all(&rdir)?;
    let mut summary = String::from("record_id,terminal,iterations,tokens,mutation_repaired\n");
    let mut timings = Vec::new();
    let mut traces = traces;
    for t in &mut traces {
        for it in &mut t.iterations {
            timings.push(serde_json::json!({"record_id": t.record_id, "iteration": it.index, "wall_time": it.outcome.wall_time}));
            it.outcome.wall_time = 0.0;
        }
    }
    write_jsonl(&rdir.join("timings.jsonl"), &timings)?;
    for t in &traces {
        let mut buf = Vec::new();
        write_transcript(t, &mut buf)?;
        fs::write(rdir.join(format!("{}.jsonl", t.record_id)), buf)?;
        let mutated = t.mutation.as_ref().is_some_and(|m| m.program.is_some());
        summary.push_str(&format!("{},{:?},{},{},{mutated}\n", t.record_id, t.terminal, t.iterations.len(), t.tokens()));
    }
    fs::write(rdir.join("summary.csv"), summary)?;
    p.output(&rdir);
    cx.finish(p)?;
    let fixed = traces.iter().filter(|t| t.terminal == Terminal::Success).count();
    Ok(format!("repaired {fixed}/{} failing base specifications", traces.len()))
}

pub fn report(cx: &Ctx) -> Res<String> {
    let mut p = Provenance::start("report");
    let rdir = cx.layout.report();
    let table = need(rdir.join("metrics.txt"), "score")?;
    p.input(&table);
    let mut text = String::from("# Metrics\n\n");
    text.push_str(&fs::read_to_string(&table)?);
    let mut section = |title: &str, path: PathBuf| -> Res<()> {
        if path.exists() {
            p.input(&path);
            text.push_str(&format!("\n# {title}\n\n"));
            text.push_str(&fs::read_to_string(&path)?);
        }
        Ok(())
    };
    section("Per control-flow class", rdir.join("per_class.csv"))?;
    section("Failure categories", cx.layout.triage().join("distribution.csv"))?;
    section("Self-repair", cx.layout.repair().join("summary.csv"))?;
    let out = rdir.join("report.txt");
    fs::write(&out, &text)?;
    p.output(&out);
    cx.finish(p)?;
    Ok(format!("wrote {}", out.display()))
}
