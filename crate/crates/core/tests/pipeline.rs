mod common;

use common::desk;
use num_rational::Ratio;
use specbench_core::genrepair::{Harness, ModelConfig, PromptTemplates, RepairOptions, Terminal};
use specbench_core::metrics::OutcomeLog;
use specbench_core::pipeline::{read_generations, run_pipeline, write_generations, PipelineOptions};
use specbench_core::triage::PatternTable;
use specbench_core::verify::{OutcomeKind, VerifierConfig};

fn mean(parts: &[(usize, usize)]) -> Ratio<i64> {
    let sum: Ratio<i64> = parts.iter().map(|&(a, b)| Ratio::new(a as i64, b as i64)).sum();
    sum / parts.len() as i64
}

fn pct(r: Ratio<i64>) -> String {
    // half-up, one decimal
    let tenths = (r * 1000 + Ratio::new(1, 2)).floor().to_integer();
    format!("{}.{}", tenths / 10, tenths % 10)
}

#[test]
fn desk_run_reproduces_planted_rates() {
    let d = desk();
    let run = run_pipeline(
        &d.corpus,
        &d.model,
        &ModelConfig::default(),
        &PromptTemplates::default(),
        &d.replay,
        &VerifierConfig::default(),
        &PipelineOptions { label: "stub".into(), ..Default::default() },
    )
    .unwrap();
    let r = &run.report;
    assert_eq!((r.base.success, r.base.n), d.sr);
    assert_eq!(r.base.sr.as_ref().unwrap().percent_1dp(), "40.0");
    assert_eq!(r.base.invalid, 1);
    assert_eq!(r.base.failure, 1);
    assert_eq!(r.base.unknown, 1);
    assert_eq!(r.cr_specs, 2);
    assert_eq!(r.cr.as_ref().unwrap().percent_1dp(), pct(mean(&d.kills)));
    assert_eq!(r.flr.as_ref().unwrap().percent_1dp(), pct(mean(&d.flips)));
    assert_eq!(r.flr_parents, 2);
    assert!(r.token_cost > 0);

    // every generation for a variant strips to its record
    for g in &run.generations {
        if let Some(s) = &g.spec {
            assert_eq!(s.bare().unwrap(), d.corpus.get(&g.record_id).unwrap().bare_source);
        }
    }
    assert_eq!(run.generations.iter().filter(|g| g.spec.is_none()).count(), 1);

    let mut buf = Vec::new();
    write_generations(&run.generations, &mut buf).unwrap();
    assert_eq!(read_generations(&buf[..]).unwrap(), run.generations);
    let mut buf = Vec::new();
    run.log.write_jsonl(&mut buf).unwrap();
    assert_eq!(OutcomeLog::read_jsonl(&buf[..]).unwrap(), run.log);
}

#[test]
fn desk_repair_resolves_syntax_error_at_iteration_two() {
    let d = desk();
    let (mc, vc, pt, tt) = (ModelConfig::default(), VerifierConfig::default(), PatternTable::default(), PromptTemplates::default());
    let h = Harness { model: &d.repair_model, model_config: &mc, verifier: &d.replay, verifier_config: &vc, patterns: &pt, templates: &tt };
    let trace = h.self_repair(d.corpus.get("count_charac").unwrap(), &RepairOptions::default()).unwrap();
    assert_eq!(trace.terminal, Terminal::Success);
    assert_eq!(trace.iterations.len(), 2);
    assert_eq!(trace.iterations[0].outcome.kind, OutcomeKind::Failure);
    assert_eq!(trace.iterations[1].extracted.as_ref().unwrap().source, d.fixed_spec);
}
