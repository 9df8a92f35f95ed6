use proptest::prelude::*;
use specbench_core::triage::{
    categorize, distribution, dominant_category, split_atomic, triage, write_distribution_csv, AtomicError,
    FailureCategory as C, PatternTable,
};
use specbench_core::verify::{parse_diagnostics, Diagnostic};
use std::fs;
use std::path::PathBuf;

fn out(name: &str) -> String {
    fs::read_to_string(PathBuf::from(env!("CARGO_MANIFEST_DIR")).join(format!("tests/fixtures/failures/{name}.out"))).unwrap()
}

fn one(raw: &str) -> Diagnostic {
    let d = parse_diagnostics(raw);
    assert_eq!(d.len(), 1, "{raw}");
    d.into_iter().next().unwrap()
}

/// Recorded outputs and the category each names.
const RECORDED: &[(&str, C)] = &[
    ("ReArrangeTuples", C::PostconditionFailure),
    ("GetGcd", C::PostconditionFailure),
    ("RemoveNested", C::ArithmeticOperationRange),
    ("FindMinDiff", C::AssertionFailure),
    ("FindCharLong", C::NullDereference),
    ("RoundNum", C::DivideByZero),
    ("Sum", C::ArrayIndexFailure),
];

/// Message forms quoted without a full output record.
fn quoted() -> Vec<(String, C)> {
    vec![
        ("/tmp/ReverseArrayLists.java:6: error: Unexpected or misspelled JML token: assignable".into(), C::SyntaxError),
        ("/tmp/A.java:4: error: illegal start of expression".into(), C::SyntaxError),
        ("/tmp/CountSetBits.java:11: error: \\sum is not supported in this context".into(), C::UnsupportedQuantifier),
        ("/tmp/A.java:9: error: (\\num_of int i; 0 <= i < n; a[i] > 0) not implemented".into(), C::UnsupportedQuantifier),
        ("/tmp/A.java:9: error: \\max quantifier is not supported".into(), C::UnsupportedMinMaxQuantifier),
        (
            "/tmp/A.java:18: verify: The prover cannot establish an assertion (LoopInvariant) in method f".into(),
            C::LoopInvariantFailure,
        ),
        (
            "/tmp/A.java:18: verify: The prover cannot establish an assertion (LoopInvariantBeforeLoop) in method f".into(),
            C::LoopInvariantFailure,
        ),
        ("invalid specification: 3:5: expected `;`".into(), C::InvalidSpecification),
    ]
}

#[test]
fn every_fixture_message_gets_its_category() {
    let t = PatternTable::default();
    let mut checked = 0;
    for (name, want) in RECORDED {
        let d = one(&out(name));
        let e = &triage(std::slice::from_ref(&d), &t)[0];
        assert_eq!(&e.category, want, "{name}");
        assert!(d.raw_message.contains(&e.matched_pattern));
        checked += 1;
    }
    for (msg, want) in quoted() {
        let d = Diagnostic { file: None, line: None, raw_message: msg.clone(), column: None, anchor: None };
        assert_eq!(categorize(&d, &t), want, "{msg}");
        checked += 1;
    }
    assert!(checked >= 10);
}

#[test]
fn gibberish_is_unmatched() {
    let d = Diagnostic { file: None, line: None, raw_message: "zzz qqq".into(), column: None, anchor: None };
    let e = &triage(&[d], &PatternTable::default())[0];
    assert_eq!(e.category, C::Other("unmatched".into()));
    assert!(e.matched_pattern.is_empty());
}

#[test]
fn split_collapses_duplicates_and_keeps_order() {
    let sum = out("Sum");
    let rnd = out("RoundNum");
    let d = parse_diagnostics(&format!("{sum}{rnd}{sum}"));
    assert_eq!(d.len(), 3);
    let atoms = split_atomic(&d);
    assert_eq!(atoms.len(), 2);
    assert_eq!(atoms[0].line, Some(21));
    assert_eq!(atoms[1].line, Some(26));
    assert_eq!(split_atomic(&parse_diagnostics(&sum)).len(), 1);
    // already atomic input is a fixed point
    assert_eq!(split_atomic(&atoms), atoms);
}

#[test]
fn associated_declarations_are_not_atoms() {
    let raw = "/tmp/A.java:24: verify: The prover cannot establish an assertion (Postcondition: /tmp/A.java:13:) in method f\n/tmp/A.java:13: verify: Associated declaration: /tmp/A.java:24:\n";
    let atoms = split_atomic(&parse_diagnostics(raw));
    assert_eq!(atoms.len(), 1);
}

fn atoms(spec: &[(C, usize)]) -> Vec<AtomicError> {
    spec.iter()
        .flat_map(|(c, n)| {
            (0..*n).map(move |i| AtomicError {
                diagnostic: Diagnostic { file: None, line: Some(i + 1), raw_message: c.to_string(), column: None, anchor: None },
                category: c.clone(),
                matched_pattern: String::new(),
            })
        })
        .collect()
}

#[test]
fn distribution_ranks_by_count_then_name() {
    let e = atoms(&[(C::SyntaxError, 3), (C::PostconditionFailure, 5)]);
    assert_eq!(distribution(&e, 1), vec![(C::PostconditionFailure, 5)]);
    assert_eq!(distribution(&e, 10).len(), 2);

    // planted top-10 with ties
    let planted = [
        (C::SyntaxError, 40),
        (C::UnsupportedQuantifier, 25),
        (C::PostconditionFailure, 18),
        (C::LoopInvariantFailure, 18),
        (C::ArithmeticOperationRange, 12),
        (C::InvalidSpecification, 9),
        (C::AssertionFailure, 6),
        (C::ArrayIndexFailure, 6),
        (C::NullDereference, 4),
        (C::UnsupportedMinMaxQuantifier, 3),
        (C::DivideByZero, 2),
    ];
    let got = distribution(&atoms(&planted), 10);
    let names: Vec<&str> = got.iter().map(|(c, _)| c.name()).collect();
    assert_eq!(
        names,
        [
            "SyntaxError",
            "UnsupportedQuantifier",
            "LoopInvariantFailure",
            "PostconditionFailure",
            "ArithmeticOperationRange",
            "InvalidSpecification",
            "ArrayIndexFailure",
            "AssertionFailure",
            "NullDereference",
            "UnsupportedMinMaxQuantifier",
        ]
    );
    assert_eq!(dominant_category(&atoms(&[(C::SyntaxError, 2), (C::AssertionFailure, 2)])), Some(C::AssertionFailure));
    assert_eq!(dominant_category(&[]), None);

    let mut buf = Vec::new();
    write_distribution_csv(&got[..2], &mut buf).unwrap();
    assert_eq!(String::from_utf8(buf).unwrap(), "rank,category,count\n1,SyntaxError,40\n2,UnsupportedQuantifier,25\n");
}

#[test]
fn user_rules_extend_the_table() {
    let extra = PatternTable::from_toml(
        "[[rule]]\npattern = \"overflow in int sum\"\ncategory = \"Other:IntOverflow\"\nnote = \"site rule\"\n",
    )
    .unwrap();
    let t = PatternTable::default().with_overrides(extra);
    let d = one(&out("RemoveNested"));
    assert_eq!(categorize(&d, &t), C::Other("IntOverflow".into()));
    // the precondition rule ships as Other data, no code change
    let pre = Diagnostic {
        file: None,
        line: Some(3),
        raw_message: "/tmp/A.java:3: verify: The prover cannot establish an assertion (Precondition: /tmp/A.java:9:) in method g".into(),
        column: None,
        anchor: None,
    };
    assert_eq!(categorize(&pre, &PatternTable::default()), C::Other("PreconditionFailure".into()));
}

fn message() -> impl Strategy<Value = String> {
    let mut pool: Vec<String> = RECORDED.iter().map(|(n, _)| out(n).trim().to_string()).collect();
    pool.extend(quoted().into_iter().map(|(m, _)| m));
    pool.push("garbage line".into());
    prop::sample::select(pool)
}

proptest! {
    #[test]
    fn categories_do_not_depend_on_input_order(msgs in prop::collection::vec(message(), 1..12), rot in 0usize..12) {
        let t = PatternTable::default();
        let ds: Vec<Diagnostic> = msgs
            .iter()
            .enumerate()
            .map(|(i, m)| Diagnostic { file: None, line: Some(i + 1), raw_message: m.clone(), column: None, anchor: None })
            .collect();
        let a = triage(&ds, &t);
        let mut rotated = ds.clone();
        rotated.rotate_left(rot % ds.len());
        rotated.reverse();
        let b = triage(&rotated, &t);
        for e in &a {
            let f = b.iter().find(|x| x.diagnostic == e.diagnostic).unwrap();
            prop_assert_eq!(&e.category, &f.category);
        }
        prop_assert_eq!(distribution(&a, 20), distribution(&b, 20));
        for e in &a {
            prop_assert!(e.category.is_other() || e.diagnostic.raw_message.contains(&e.matched_pattern));
        }
    }
}
