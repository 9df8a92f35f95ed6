//! The planted desk scenario shared by the pipeline and acceptance suites.
#![allow(dead_code)]

use specbench_core::corpus::{load_corpus, Corpus, Origin, ProgramRecord};
use specbench_core::genrepair::ScriptedClient;
use specbench_core::mutate::{completeness_inputs, generate_mutants, suppress_equivalents, MutationOperator};
use specbench_core::syntax::SpecifiedProgram;
use specbench_core::transforms::{variant_id, TransformId, Transformer};
use specbench_core::verify::{RawRun, ReplayBackend};
use std::collections::BTreeMap;
use std::path::PathBuf;

/// Resolves from either workspace crate, so the CLI suite can share it.
pub fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures")
}

pub fn fenced(marker: &str, body: &str) -> String {
    format!("Sure.\n\n{marker}\n```java\n{body}```\n")
}

/// Inserts JML lines above the first line containing `before`, at its indent.
pub fn annotate(bare: &str, before: &str, jml: &[&str]) -> String {
    let mut out = String::new();
    let mut done = false;
    for line in bare.split_inclusive('\n') {
        if !done && line.contains(before) {
            let indent: String = line.chars().take_while(|c| c.is_whitespace()).collect();
            for j in jml {
                out.push_str(&format!("{indent}//@ {j}\n"));
            }
            done = true;
        }
        out.push_str(line);
    }
    assert!(done, "no line contains `{before}`");
    out
}

pub const SYNTAX_OUT: &str =
    "/tmp/CountCharac.java:4: error: Unexpected or misspelled JML token: ensure\n    //@ ensure \\result == str1.length();\n        ^\n1 error\n";

pub fn postcondition_out(file: &str) -> String {
    format!("/tmp/{file}.java:3: verify: The prover cannot establish an assertion (Postcondition: /tmp/{file}.java:3:) in method f\n")
}

pub struct Desk {
    pub corpus: Corpus,
    pub model: ScriptedClient,
    /// The same responses as `model`, keyed by record id.
    pub script: BTreeMap<String, Vec<String>>,
    pub replay: ReplayBackend,
    /// Script for the repair phase on `count_charac`.
    pub repair_model: ScriptedClient,
    pub broken_spec: String,
    pub fixed_spec: String,
    /// (verified base runs, base runs)
    pub sr: (usize, usize),
    /// Per verified parent: (flipped variants, variants).
    pub flips: Vec<(usize, usize)>,
    /// Per verified parent: (killed mutants, paired mutants).
    pub kills: Vec<(usize, usize)>,
}

/// Five base records with planted outcomes:
/// fig1 and maximum verify, ascii_value answers in prose (Invalid),
/// count_charac has a JML syntax error (Failure), find_min_diff times out.
/// Variants of the two verified parents are generated by transforming
/// their specifications; the first variant of each flips. Every paired
/// mutant of a verified spec is killed except the first.
pub fn desk() -> Desk {
    let base = load_corpus(&fixtures().join("desk")).unwrap();
    let get = |id: &str| base.get(id).unwrap().clone();

    let fig1_spec = std::fs::read_to_string(fixtures().join("programs/Fig1.java")).unwrap();
    let max_spec = annotate(&get("maximum").bare_source, "public static", &["ensures \\result >= a && \\result >= b;"]);
    let fixed_spec = annotate(
        &get("count_charac").bare_source,
        "public static",
        &["requires str1 != null;", "ensures \\result == str1.length();"],
    );
    let broken_spec = fixed_spec.replace("//@ ensures", "//@ ensure");
    let fmd_spec = annotate(&get("find_min_diff").bare_source, "public static", &["requires arr != null && n <= arr.length;"]);

    let mut script: BTreeMap<String, Vec<String>> = BTreeMap::new();
    script.insert("fig1".into(), vec![fenced("", &fig1_spec)]);
    script.insert("maximum".into(), vec![fenced("", &max_spec)]);
    script.insert("ascii_value".into(), vec!["The method returns the character code; a Javadoc `@return` tag documents it.".into()]);
    script.insert("count_charac".into(), vec![fenced("", &broken_spec)]);
    script.insert("find_min_diff".into(), vec![fenced("", &fmd_spec)]);
    let mut replay = ReplayBackend::new();
    replay.insert(&fig1_spec, RawRun::clean(""));
    replay.insert(&max_spec, RawRun::clean(""));
    replay.insert(&broken_spec, RawRun::failed(SYNTAX_OUT));
    replay.insert(&fixed_spec, RawRun::clean(""));
    replay.insert(&fmd_spec, RawRun::timeout());

    let mut records = base.records.clone();
    let transformer = Transformer::default();
    let mut flips = Vec::new();
    let mut kills = Vec::new();
    for (parent, spec) in [("fig1", &fig1_spec), ("maximum", &max_spec)] {
        let p = get(parent);
        let mut n = 0;
        for t in TransformId::ALL {
            let bare = transformer.apply(t, &p.bare_source).unwrap();
            if !bare.applicable {
                continue;
            }
            let annotated = transformer.apply(t, spec).unwrap();
            let id = variant_id(parent, t);
            records.push(ProgramRecord::new(id.clone(), bare.variant_source, p.intent.clone(), Origin::transformed(parent, t)).unwrap());
            script.insert(id, vec![fenced("", &annotated.variant_source)]);
            let run = if n == 0 { RawRun::failed(postcondition_out(parent)) } else { RawRun::clean("") };
            replay.insert(&annotated.variant_source, run);
            n += 1;
        }
        flips.push((1, n));

        let set = suppress_equivalents(generate_mutants(parent, &p.bare_source, &MutationOperator::all()).unwrap());
        let program = SpecifiedProgram::new(spec.clone(), parent).unwrap();
        let (pairs, _) = completeness_inputs(&program, &set).unwrap();
        for (i, (_, sp)) in pairs.iter().enumerate() {
            let run = if i == 0 { RawRun::clean("") } else { RawRun::failed(postcondition_out(parent)) };
            replay.insert(&sp.source, run);
        }
        kills.push((pairs.len() - 1, pairs.len()));
    }
    let model = script.iter().fold(ScriptedClient::new(), |m, (id, r)| m.script(id.clone(), r.clone()));
    let repair_model = ScriptedClient::new()
        .script("count_charac", vec![fenced("", &broken_spec), fenced("### FIXED SPECIFICATION", &fixed_spec)]);
    Desk {
        corpus: Corpus::new("desk", "1.0", records),
        model,
        script,
        replay,
        repair_model,
        broken_spec,
        fixed_spec,
        sr: (2, 5),
        flips,
        kills,
    }
}
