use specbench_core::corpus::{Origin, ProgramRecord};
use specbench_core::genrepair::{
    extract_repair, extract_specification, spec_mutation_candidates, spec_mutation_repair, write_transcript, Demo,
    GenError, Harness, InvalidReason, ModelConfig, PromptStyle, PromptTemplates, RepairOptions, ReplayClient,
    ScriptedClient, Terminal,
};
use specbench_core::syntax::SpecifiedProgram;
use specbench_core::triage::{triage, FailureCategory, PatternTable};
use specbench_core::verify::{
    parse_diagnostics, OutcomeKind, RawRun, ReplayBackend, VerifierBackend, VerifierConfig, VerifyError,
};
use std::fs;
use std::path::PathBuf;

fn fixture(rel: &str) -> String {
    fs::read_to_string(PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(rel)).unwrap()
}

fn fig1_spec() -> String {
    fixture("programs/Fig1.java")
}

fn fig1_record() -> ProgramRecord {
    ProgramRecord::new("fig1", fixture("desk/src/fig1.java"), "max after t steps", Origin::Base).unwrap()
}

fn fenced(marker: &str, body: &str) -> String {
    format!("Here is the result.\n\n{marker}\n```java\n{body}```\n")
}

/// Fig. 1 with its postcondition keyword misspelled.
fn broken_spec() -> String {
    fig1_spec().replace("//@ ensures", "//@ ensure")
}

const SYNTAX_OUT: &str = "/tmp/Fig1.java:4: error: Unexpected or misspelled JML token: ensure\n//@ ensure \\result == num + 2*t;\n    ^\n1 error\n";

fn demos() -> Vec<Demo> {
    vec![
        Demo { id: "max".into(), bare_source: "int f() { return 1; }\n".into(), specified_source: "//@ ensures \\result == 1;\nint f() { return 1; }\n".into() },
        Demo { id: "min".into(), bare_source: "int g() { return 0; }\n".into(), specified_source: "//@ ensures \\result == 0;\nint g() { return 0; }\n".into() },
    ]
}

#[test]
fn zero_shot_prompt_carries_the_code() {
    let r = fig1_record();
    let p = PromptTemplates::default().build_prompt(&PromptStyle::ZeroShot, &r, &[]).unwrap();
    let at = p.user.find("### CODE").unwrap();
    assert!(p.user[at..].contains(r.bare_source.trim_end()));
    assert!(p.examples_used.is_empty());
    assert!(!p.system.contains("//@"));
}

#[test]
fn guided_prompts_need_demos_and_record_them() {
    let t = PromptTemplates::default();
    let r = fig1_record();
    for style in [PromptStyle::FewShot, PromptStyle::CoT, PromptStyle::Ltm] {
        assert!(matches!(t.build_prompt(&style, &r, &[]), Err(GenError::MissingDemos(_))));
        let p = t.build_prompt(&style, &r, &demos()).unwrap();
        assert_eq!(p.examples_used, ["max", "min"]);
        assert!(p.system.contains("begin with //@"));
        assert!(p.system.contains("### EXAMPLE 2"));
    }
    let cot = t.build_prompt(&PromptStyle::CoT, &r, &demos()).unwrap();
    assert!(cot.user.ends_with("Let's think step by step!"));
    let ltm = t.build_prompt(&PromptStyle::Ltm, &r, &demos()).unwrap();
    for q in ["1. What are the weakest preconditions", "2. What are the strongest postconditions", "3. What necessary specifications"] {
        assert!(ltm.user.contains(q), "{q}");
    }
    assert!(ltm.user.contains("### SPECIFICATION"));
}

#[test]
fn styles_parse() {
    assert_eq!("few-shot".parse::<PromptStyle>().unwrap(), PromptStyle::FewShot);
    assert_eq!("LTM".parse::<PromptStyle>().unwrap(), PromptStyle::Ltm);
    assert!("sideways".parse::<PromptStyle>().is_err());
}

#[test]
fn extracts_fig1() {
    let r = fig1_record();
    let p = extract_specification(&fenced("", &fig1_spec()), &r).unwrap();
    assert_eq!(p.source, fig1_spec());
    assert_eq!(p.base_id, "fig1");
    assert_eq!(p.annotations.clause_count(), 7);
    // layout differences are tolerated
    let reflowed = fig1_spec().replace("  int res", "    int res").replace("\n", "\r\n");
    assert!(extract_specification(&fenced("", &reflowed), &r).is_ok());
}

#[test]
fn extraction_rejects_bad_responses() {
    let r = fig1_record();
    let no_code = "The method adds 2 to num t times.\n/** @return num + 2t */";
    assert_eq!(extract_specification(no_code, &r), Err(InvalidReason::NoCodeBlock));
    let changed = fig1_spec().replace("res + 2", "res + 3");
    assert_eq!(extract_specification(&fenced("", &changed), &r), Err(InvalidReason::BodyChanged));
    let dropped = fig1_spec().replace("  return res;\n", "");
    assert_eq!(extract_specification(&fenced("", &dropped), &r), Err(InvalidReason::BodyChanged));
    assert_eq!(extract_specification(&fenced("", &r.bare_source), &r), Err(InvalidReason::NoAnnotations));
    assert!(matches!(extract_specification(&fenced("", "int f( {"), &r), Err(InvalidReason::Unparseable(_))));
}

#[test]
fn extraction_picks_the_right_block() {
    let r = fig1_record();
    let decoy = "```\nsome scratch\n```\n";
    // generation: first block, unless a specification marker follows
    let first = format!("```java\n{}```\n{decoy}", fig1_spec());
    assert!(extract_specification(&first, &r).is_ok());
    let marked = format!("{decoy}{}", fenced("### SPECIFICATION", &fig1_spec()));
    assert!(extract_specification(&marked, &r).is_ok());
    // repair: block after the marker, else the last block
    let repair = format!("{}{decoy}", fenced("### FIXED SPECIFICATION", &fig1_spec()));
    assert!(extract_repair(&repair, &r).is_ok());
    let unmarked = format!("{decoy}```java\n{}```\n", fig1_spec());
    assert!(extract_repair(&unmarked, &r).is_ok());
}

#[test]
fn repair_prompts_follow_the_category() {
    let t = PromptTemplates::default();
    let spec = SpecifiedProgram::new(broken_spec(), "fig1").unwrap();
    let errors = triage(&parse_diagnostics(SYNTAX_OUT), &PatternTable::default());
    assert_eq!(errors[0].category, FailureCategory::SyntaxError);

    let p = t.build_repair_prompt(&FailureCategory::SyntaxError, &spec, &errors);
    assert_eq!(p.style, PromptStyle::Repair(FailureCategory::SyntaxError));
    assert!(p.user.contains(spec.source.trim_end()));
    assert!(p.user.contains("misspelled JML token: ensure"));
    assert!(p.user.contains("Identify whether the error is"));
    let steps = ["1. ", "2. ", "3. "].iter().filter(|s| p.user.contains(&format!("\n{s}"))).count();
    assert_eq!(steps, 3);
    assert!(p.user.contains("### FIXED SPECIFICATION"));

    let li = t.build_repair_prompt(&FailureCategory::LoopInvariantFailure, &spec, &errors);
    assert!(li.user.contains("wrong/weak preconditions that prevent the invariant"));

    let other = t.build_repair_prompt(&FailureCategory::Other("PreconditionFailure".into()), &spec, &errors);
    assert!(other.user.contains("### ERROR TYPES: PreconditionFailure"));
    assert!(other.user.contains("consider the following steps"));
    assert!(t.category(&FailureCategory::Other("PreconditionFailure".into())).is_none());
}

fn harness<'a>(
    model: &'a dyn specbench_core::genrepair::ModelClient,
    verifier: &'a dyn VerifierBackend,
    parts: &'a (ModelConfig, VerifierConfig, PatternTable, PromptTemplates),
) -> Harness<'a> {
    Harness {
        model,
        model_config: &parts.0,
        verifier,
        verifier_config: &parts.1,
        patterns: &parts.2,
        templates: &parts.3,
    }
}

fn parts() -> (ModelConfig, VerifierConfig, PatternTable, PromptTemplates) {
    (ModelConfig::default(), VerifierConfig::default(), PatternTable::default(), PromptTemplates::default())
}

#[test]
fn scripted_model_fixes_the_syntax_error_on_iteration_two() {
    let r = fig1_record();
    let model = ScriptedClient::new()
        .script("fig1", vec![fenced("", &broken_spec()), fenced("### FIXED SPECIFICATION", &fig1_spec())]);
    let mut replay = ReplayBackend::new();
    replay.insert(&broken_spec(), RawRun::failed(SYNTAX_OUT));
    replay.insert(&fig1_spec(), RawRun::clean(""));
    let p = parts();
    let h = harness(&model, &replay, &p);
    let opts = RepairOptions { max_iters: 4, ..Default::default() };
    let trace = h.self_repair(&r, &opts).unwrap();

    assert_eq!(trace.terminal, Terminal::Success);
    assert_eq!(trace.iterations.len(), 2);
    let (a, b) = (&trace.iterations[0], &trace.iterations[1]);
    assert_eq!(a.outcome.kind, OutcomeKind::Failure);
    assert_eq!(a.dominant, Some(FailureCategory::SyntaxError));
    assert_eq!(b.prompt.style, PromptStyle::Repair(FailureCategory::SyntaxError));
    assert!(b.prompt.user.contains(&broken_spec().trim_end().to_string()));
    assert_eq!(b.outcome.kind, OutcomeKind::Success);
    assert_eq!(trace.iterations.iter().map(|i| i.index).collect::<Vec<_>>(), [1, 2]);
    assert!(trace.tokens() > 0);
    assert_eq!(model.calls("fig1"), 2);

    // only comments change between iterations
    for it in &trace.iterations {
        assert_eq!(it.extracted.as_ref().unwrap().bare().unwrap(), r.bare_source);
    }

    // reproducible
    let model2 = ScriptedClient::new()
        .script("fig1", vec![fenced("", &broken_spec()), fenced("### FIXED SPECIFICATION", &fig1_spec())]);
    let again = harness(&model2, &replay, &p).self_repair(&r, &opts).unwrap();
    let strip = |t: &specbench_core::genrepair::RepairTrace| {
        t.iterations.iter().map(|i| (i.prompt.clone(), i.response.clone(), i.outcome.kind)).collect::<Vec<_>>()
    };
    assert_eq!(strip(&trace), strip(&again));

    let mut buf = Vec::new();
    write_transcript(&trace, &mut buf).unwrap();
    let lines: Vec<serde_json::Value> =
        String::from_utf8(buf).unwrap().lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len(), 3);
    assert_eq!(lines[1]["index"], 2);
    assert_eq!(lines[2]["terminal"], "Success");
}

#[test]
fn model_without_code_ends_invalid() {
    let r = fig1_record();
    let model = ScriptedClient::new().fallback("I would add a Javadoc comment describing the loop.");
    let replay = ReplayBackend::new();
    let p = parts();
    let trace = harness(&model, &replay, &p).self_repair(&r, &RepairOptions { max_iters: 3, ..Default::default() }).unwrap();
    assert_eq!(trace.terminal, Terminal::Invalid);
    assert_eq!(trace.iterations.len(), 3);
    for it in &trace.iterations {
        assert_eq!(it.invalid_reason, Some(InvalidReason::NoCodeBlock));
        assert_eq!(it.prompt.style, PromptStyle::ZeroShot);
        assert_eq!(it.dominant, Some(FailureCategory::InvalidSpecification));
    }
}

#[test]
fn first_attempt_success_is_one_iteration() {
    let r = fig1_record();
    let p = parts();
    let templates = PromptTemplates::default();
    let prompt = templates.build_prompt(&PromptStyle::ZeroShot, &r, &[]).unwrap();
    let mut model = ReplayClient::new();
    model.insert(&prompt, specbench_core::genrepair::ModelResponse::estimated(&prompt, fenced("", &fig1_spec())));
    let mut replay = ReplayBackend::new();
    replay.insert(&fig1_spec(), RawRun::clean(""));
    let trace = harness(&model, &replay, &p).self_repair(&r, &RepairOptions::default()).unwrap();
    assert_eq!(trace.terminal, Terminal::Success);
    assert_eq!(trace.iterations.len(), 1);

    assert!(matches!(
        harness(&model, &replay, &p).self_repair(&r, &RepairOptions { max_iters: 0, ..Default::default() }),
        Err(GenError::InvalidBudget(_))
    ));
}

#[test]
fn backend_errors_abort_with_partial_trace() {
    let r = fig1_record();
    let model = ScriptedClient::new()
        .script("fig1", vec![fenced("", &broken_spec()), fenced("### FIXED SPECIFICATION", &fig1_spec())]);
    let mut replay = ReplayBackend::new();
    replay.insert(&broken_spec(), RawRun::failed(SYNTAX_OUT));
    let p = parts();
    match harness(&model, &replay, &p).self_repair(&r, &RepairOptions::default()) {
        Err(GenError::Aborted { trace, source }) => {
            assert_eq!(trace.iterations.len(), 1);
            assert!(matches!(*source, GenError::Verify(VerifyError::ReplayMiss(_))));
        }
        other => panic!("{other:?}"),
    }
}

/// Verifies anything that lacks the over-strong clause.
struct Oracle;

impl VerifierBackend for Oracle {
    fn run(&self, p: &SpecifiedProgram, _: &VerifierConfig) -> Result<RawRun, VerifyError> {
        Ok(if p.source.contains("\\result > num;") {
            RawRun::failed("/tmp/Fig1.java:5: verify: The prover cannot establish an assertion (Postcondition: /tmp/Fig1.java:5:) in method theMaximumAchievableX\n")
        } else {
            RawRun::clean("")
        })
    }
}

fn over_strong() -> SpecifiedProgram {
    let src = fig1_spec().replace("//@ ensures \\result == num + 2*t;", "//@ ensures \\result == num + 2*t;\n//@ ensures \\result > num;");
    SpecifiedProgram::new(src, "fig1").unwrap()
}

#[test]
fn clause_drop_repairs_an_over_strong_postcondition() {
    let spec = over_strong();
    let cfg = VerifierConfig::default();
    let got = spec_mutation_repair(&spec, &Oracle, &cfg, 10).unwrap();
    let fixed = got.program.unwrap();
    assert_eq!(got.calls, 2);
    assert_eq!(got.edit.as_deref(), Some("drop `ensures \\result > num`"));
    assert_eq!(fixed.source, fig1_spec());
    assert_eq!(fixed.bare().unwrap(), spec.bare().unwrap());

    let short = spec_mutation_repair(&spec, &Oracle, &cfg, 1).unwrap();
    assert!(short.program.is_none());
    assert!(short.reason.unwrap().contains("budget"));
    assert!(matches!(spec_mutation_repair(&spec, &Oracle, &cfg, 0), Err(GenError::InvalidBudget(_))));
}

#[test]
fn candidates_never_touch_requires_and_weaken_one_step() {
    let spec = over_strong();
    let c = spec_mutation_candidates(&spec);
    // 2 ensures + 3 loop clauses dropped, one strict comparison weakened
    assert_eq!(c.len(), 6);
    assert!(c.iter().all(|(_, s)| s.matches("//@ requires").count() == 3));
    assert_eq!(c[5].0, "weaken `>` to `>=` in `ensures \\result > num`");
    assert!(c[5].1.contains("\\result >= num;"));
    for (_, s) in &c {
        assert_eq!(SpecifiedProgram::new(s.clone(), "x").unwrap().bare().unwrap(), spec.bare().unwrap());
    }
    // replayed runs agree with the oracle
    let mut replay = ReplayBackend::new();
    replay.insert(&c[0].1, RawRun::failed("/tmp/Fig1.java:4: verify: The prover cannot establish an assertion (Postcondition) in method f\n"));
    replay.insert(&c[1].1, RawRun::clean(""));
    let got = spec_mutation_repair(&spec, &replay, &VerifierConfig::default(), 5).unwrap();
    assert_eq!(got.program.unwrap().source, c[1].1);
}

#[test]
fn no_verifying_variant_is_none() {
    struct Never;
    impl VerifierBackend for Never {
        fn run(&self, _: &SpecifiedProgram, _: &VerifierConfig) -> Result<RawRun, VerifyError> {
            Ok(RawRun::failed("/tmp/A.java:1: verify: The prover cannot establish an assertion (Assert) in method f\n"))
        }
    }
    let got = spec_mutation_repair(&over_strong(), &Never, &VerifierConfig::default(), 100).unwrap();
    assert!(got.program.is_none());
    assert_eq!(got.calls, 6);
}

#[test]
fn mutation_fallback_runs_after_failed_loop() {
    let r = fig1_record();
    let model = ScriptedClient::new().fallback(fenced("### FIXED SPECIFICATION", &over_strong().source));
    let p = parts();
    let opts = RepairOptions { max_iters: 2, mutation_budget: Some(3), ..Default::default() };
    let trace = harness(&model, &Oracle, &p).self_repair(&r, &opts).unwrap();
    assert_eq!(trace.terminal, Terminal::Exhausted);
    assert_eq!(trace.iterations[1].dominant, Some(FailureCategory::PostconditionFailure));
    assert_eq!(trace.mutation.unwrap().program.unwrap().source, fig1_spec());
}

#[test]
fn model_config_validation() {
    assert!(ModelConfig::default().validate().is_ok());
    assert_eq!(ModelConfig::default().temperature, 0.7);
    assert_eq!(ModelConfig::default().max_tokens, 2048);
    assert!(ModelConfig { temperature: -0.1, ..Default::default() }.validate().is_err());
    assert!(ModelConfig { max_tokens: 0, ..Default::default() }.validate().is_err());
}

#[test]
fn replay_client_round_trips() {
    let r = fig1_record();
    let t = PromptTemplates::default();
    let prompt = t.build_prompt(&PromptStyle::ZeroShot, &r, &[]).unwrap();
    let mut c = ReplayClient::new();
    c.insert(&prompt, specbench_core::genrepair::ModelResponse { text: "x".into(), prompt_tokens: 3, completion_tokens: 1 });
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("replay.jsonl");
    c.save(&path).unwrap();
    let back = ReplayClient::load(&path).unwrap();
    use specbench_core::genrepair::ModelClient;
    assert_eq!(back.complete(&prompt, &ModelConfig::default()).unwrap().prompt_tokens, 3);
    let other = t.build_prompt(&PromptStyle::Ltm, &r, &demos()).unwrap();
    assert!(matches!(back.complete(&other, &ModelConfig::default()), Err(GenError::Model(_))));
}
