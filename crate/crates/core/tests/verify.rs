use proptest::prelude::*;
use specbench_core::syntax::SpecifiedProgram;
use specbench_core::verify::{
    classify_outcome, parse_diagnostics, program_hash, verify, verify_all, Diagnostic, OutcomeKind, ProcessBackend,
    RawRun, ReplayBackend, StubBackend, VerifierConfig, VerifyError,
};
use std::fs;
use std::path::{Path, PathBuf};

fn failures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/failures")
}

fn recorded(name: &str) -> (SpecifiedProgram, String) {
    let src = fs::read_to_string(failures().join(format!("{name}.java"))).unwrap();
    let out = fs::read_to_string(failures().join(format!("{name}.out"))).unwrap();
    (SpecifiedProgram::new(src, name).unwrap(), out)
}

fn all_outputs() -> Vec<(String, String)> {
    let mut v: Vec<(String, String)> = fs::read_dir(failures())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "out"))
        .map(|p| (p.file_stem().unwrap().to_string_lossy().into_owned(), fs::read_to_string(&p).unwrap()))
        .collect();
    v.sort();
    v
}

#[test]
fn replayed_clean_run_is_success() {
    let (program, _) = recorded("Sum");
    let mut replay = ReplayBackend::new();
    replay.insert(&program.source, RawRun::clean("0 verification errors\n"));
    let out = verify(&program, &VerifierConfig::default(), &replay).unwrap();
    assert_eq!(out.kind, OutcomeKind::Success);
    assert!(out.diagnostics.is_empty());
}

#[test]
fn replayed_postcondition_failure() {
    let (program, raw) = recorded("ReArrangeTuples");
    let mut replay = ReplayBackend::new();
    replay.insert(&program.source, RawRun::failed(raw));
    let out = verify(&program, &VerifierConfig::default(), &replay).unwrap();
    assert_eq!(out.kind, OutcomeKind::Failure);
    assert_eq!(out.diagnostics.len(), 1);
    let d = &out.diagnostics[0];
    assert_eq!(d.line, Some(49));
    assert!(d.raw_message.contains("cannot establish an assertion (Postcondition"));
    // the anchor is the reported line of the program
    let anchor = d.anchor.unwrap();
    let line_no = program.source[..anchor.start].matches('\n').count() + 1;
    assert_eq!(line_no, 49);
}

#[test]
fn find_min_diff_has_one_diagnostic_at_31() {
    let (_, raw) = recorded("FindMinDiff");
    let d = parse_diagnostics(&raw);
    assert_eq!(d.len(), 1);
    assert_eq!(d[0].line, Some(31));
    assert_eq!(d[0].file.as_deref(), Some("/tmp/FindMinDiff.java"));
}

#[test]
fn diagnostic_count_matches_verify_records_on_every_fixture() {
    let outs = all_outputs();
    assert!(outs.len() >= 7);
    for (name, raw) in &outs {
        let records = raw.lines().filter(|l| l.contains(": verify:")).count();
        assert_eq!(parse_diagnostics(raw).len(), records, "{name}");
    }
}

#[test]
fn stacked_outputs_keep_order() {
    let outs = all_outputs();
    let (a, b) = (&outs[0].1, &outs[1].1);
    let d = parse_diagnostics(&format!("{a}{b}"));
    assert_eq!(d.len(), 2);
    assert_eq!(d[0], parse_diagnostics(a)[0]);
    assert_eq!(d[1], parse_diagnostics(b)[0]);
}

#[test]
fn empty_output_has_no_diagnostics() {
    assert!(parse_diagnostics("").is_empty());
    assert!(parse_diagnostics("\n0 verification errors\n").is_empty());
}

#[test]
fn stray_lines_become_fileless_diagnostics() {
    let d = parse_diagnostics("something odd happened\n/tmp/A.java:3: warning: unused\n    x\n");
    assert_eq!(d.len(), 1);
    assert_eq!(d[0].file, None);
    assert_eq!(d[0].raw_message, "something odd happened");
}

#[test]
fn classification_examples() {
    let d = parse_diagnostics(&recorded("Sum").1);
    assert_eq!(classify_outcome(Some(0), &[], false, false), OutcomeKind::Invalid);
    assert_eq!(classify_outcome(None, &[], true, true), OutcomeKind::Unknown);
    assert_eq!(classify_outcome(Some(0), &[], false, true), OutcomeKind::Success);
    assert_eq!(classify_outcome(Some(1), &d, false, true), OutcomeKind::Failure);
    assert_eq!(classify_outcome(Some(1), &[], false, true), OutcomeKind::Unknown);
    let inconclusive = parse_diagnostics("/tmp/A.java:3: verify: The prover reported unknown for f\n");
    assert_eq!(classify_outcome(Some(1), &inconclusive, false, true), OutcomeKind::Unknown);
}

#[test]
fn unparseable_program_never_reaches_backend() {
    let program = SpecifiedProgram { source: "class A { void f( }".into(), annotations: Default::default(), base_id: "bad".into() };
    // an empty replay store would fail if consulted
    let out = verify(&program, &VerifierConfig::default(), &ReplayBackend::new()).unwrap();
    assert_eq!(out.kind, OutcomeKind::Invalid);
    assert!(out.raw_output.starts_with("invalid specification"));
}

#[test]
fn replay_miss_is_an_error() {
    let (program, _) = recorded("Sum");
    let err = verify(&program, &VerifierConfig::default(), &ReplayBackend::new()).unwrap_err();
    assert!(matches!(err, VerifyError::ReplayMiss(h) if h == program_hash(&program.source)));
}

#[test]
fn replay_store_round_trips_through_disk() {
    let dir = tempfile::tempdir().unwrap();
    let mut replay = ReplayBackend::new();
    for (name, raw) in all_outputs() {
        if let Ok(src) = fs::read_to_string(failures().join(format!("{name}.java"))) {
            replay.insert(&src, RawRun::failed(raw));
        }
    }
    replay.save(dir.path()).unwrap();
    let back = ReplayBackend::load(dir.path()).unwrap();
    assert_eq!(back.len(), replay.len());
    let (program, _) = recorded("RoundNum");
    let out = verify(&program, &VerifierConfig::default(), &back).unwrap();
    assert_eq!(out.kind, OutcomeKind::Failure);
    assert!(out.diagnostics[0].raw_message.contains("PossiblyDivideByZero"));
}

#[test]
fn batch_results_follow_submission_order() {
    let programs: Vec<SpecifiedProgram> =
        (0..12).map(|i| SpecifiedProgram::new(format!("class A{i} {{ }}"), format!("p{i}")).unwrap()).collect();
    let mut stub = StubBackend::always(RawRun::clean(""));
    for i in (0..12).step_by(3) {
        stub = stub.with(format!("p{i}"), RawRun::failed(format!("/tmp/A.java:{}: verify: x (Assert)", i + 1)));
    }
    let cfg = VerifierConfig { workers: 3, ..Default::default() };
    let res = verify_all(&programs, &cfg, &stub).unwrap();
    for (i, r) in res.into_iter().enumerate() {
        let r = r.unwrap();
        if i % 3 == 0 {
            assert_eq!(r.kind, OutcomeKind::Failure);
            assert_eq!(r.diagnostics[0].line, Some(i + 1));
        } else {
            assert_eq!(r.kind, OutcomeKind::Success);
        }
    }
}

fn script(dir: &Path, body: &str) -> PathBuf {
    use std::os::unix::fs::PermissionsExt;
    let p = dir.join("fake-verifier");
    fs::write(&p, format!("#!/bin/sh\n{body}\n")).unwrap();
    fs::set_permissions(&p, fs::Permissions::from_mode(0o755)).unwrap();
    p
}

#[test]
fn process_backend_reports_failures() {
    let dir = tempfile::tempdir().unwrap();
    let exe = script(dir.path(), "for f; do :; done\necho \"$f:1: verify: The prover cannot establish an assertion (Postcondition) in method f\"\nexit 6");
    let cfg = VerifierConfig { command_template: format!("{} {{flags}} {{file}}", exe.display()), ..Default::default() };
    let program = SpecifiedProgram::new("public class Sum { }\n", "sum").unwrap();
    let out = verify(&program, &cfg, &ProcessBackend).unwrap();
    assert_eq!(out.kind, OutcomeKind::Failure);
    assert!(out.diagnostics[0].file.as_deref().unwrap().ends_with("Sum.java"));
}

#[test]
fn process_backend_clean_exit_is_success() {
    let dir = tempfile::tempdir().unwrap();
    let exe = script(dir.path(), "test -f \"$1\" || exit 9");
    let cfg = VerifierConfig { command_template: format!("{} {{file}}", exe.display()), ..Default::default() };
    let program = SpecifiedProgram::new("class A { }\n", "a").unwrap();
    assert_eq!(verify(&program, &cfg, &ProcessBackend).unwrap().kind, OutcomeKind::Success);
}

#[test]
fn process_timeout_is_unknown() {
    let dir = tempfile::tempdir().unwrap();
    let exe = script(dir.path(), "exec sleep 10");
    let cfg = VerifierConfig { command_template: format!("{} {{file}}", exe.display()), timeout_secs: 0.3, ..Default::default() };
    let program = SpecifiedProgram::new("class A { }\n", "a").unwrap();
    let out = verify(&program, &cfg, &ProcessBackend).unwrap();
    assert_eq!(out.kind, OutcomeKind::Unknown);
    assert!(out.diagnostics.is_empty());
    assert!(out.wall_time < 5.0);
}

#[test]
fn missing_executable_is_unavailable() {
    let cfg = VerifierConfig { command_template: "/nonexistent/verifier {file}".into(), ..Default::default() };
    let program = SpecifiedProgram::new("class A { }\n", "a").unwrap();
    assert!(matches!(verify(&program, &cfg, &ProcessBackend), Err(VerifyError::BackendUnavailable(_))));
}

fn diag() -> impl Strategy<Value = Diagnostic> {
    ("[a-z ]{1,20}", prop::option::of(1usize..200)).prop_map(|(m, line)| Diagnostic {
        file: line.map(|_| "/tmp/A.java".to_string()),
        line,
        raw_message: m,
        column: None,
        anchor: None,
    })
}

proptest! {
    #[test]
    fn classification_is_a_pure_partition(
        exit in prop::option::of(-2i32..3),
        diags in prop::collection::vec(diag(), 0..4),
        timed_out: bool,
        parse_ok: bool,
    ) {
        let k = classify_outcome(exit, &diags, timed_out, parse_ok);
        prop_assert_eq!(k, classify_outcome(exit, &diags, timed_out, parse_ok));
        prop_assert_eq!(OutcomeKind::ALL.iter().filter(|&&x| x == k).count(), 1);
        if k == OutcomeKind::Success { prop_assert!(diags.is_empty()); }
        if k == OutcomeKind::Failure { prop_assert!(!diags.is_empty()); }
        if !parse_ok { prop_assert_eq!(k, OutcomeKind::Invalid); }
    }

    #[test]
    fn one_diagnostic_per_record(lines in prop::collection::vec((1usize..500, "[A-Za-z]{1,12}"), 0..8)) {
        let raw: String = lines.iter().map(|(n, m)| format!("/tmp/X.java:{n}: verify: {m}\n    code\n    ^\n")).collect();
        let d = parse_diagnostics(&raw);
        prop_assert_eq!(d.len(), lines.len());
        for (d, (n, _)) in d.iter().zip(&lines) {
            prop_assert_eq!(d.line, Some(*n));
            prop_assert_eq!(d.column, Some(5));
        }
    }
}
