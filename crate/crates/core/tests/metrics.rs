use num_rational::Ratio;
use proptest::prelude::*;
use specbench_core::corpus::{ControlFlowClass, Corpus, Origin, ProgramRecord};
use specbench_core::metrics::{
    completeness_rate, failure_rate, flip_rate, normalized_metric, render_table, slice_by_class, success_rate,
    unknown_rate, variant_weighted_metric, write_csv, Fraction, MetricReport, MetricsError, OutcomeEntry, OutcomeLog,
    ReportOptions,
};
use specbench_core::verify::OutcomeKind::{self, Failure, Invalid, Success, Unknown};
use std::time::Instant;

/// Base log of `n` runs with the given counts; the rest are Unknown.
fn base_log(n: usize, success: usize, failure: usize, invalid: usize) -> OutcomeLog {
    let kinds = std::iter::repeat_n(Success, success)
        .chain(std::iter::repeat_n(Failure, failure))
        .chain(std::iter::repeat_n(Invalid, invalid))
        .chain(std::iter::repeat(Unknown))
        .take(n);
    OutcomeLog::new(kinds.enumerate().map(|(i, k)| OutcomeEntry::base(format!("r{i}"), k)).collect())
}

/// Adds `per` variants to each of the first `parents` records with
/// `flips` non-Success outcomes spread round-robin.
fn add_variants(log: &mut OutcomeLog, parents: usize, per: usize, flips: usize) {
    let mut remaining = flips;
    let mut flipped = vec![0usize; parents];
    while remaining > 0 {
        for f in flipped.iter_mut() {
            if remaining == 0 {
                break;
            }
            if *f < per {
                *f += 1;
                remaining -= 1;
            }
        }
    }
    for (p, &f) in flipped.iter().enumerate() {
        for v in 0..per {
            let kind = if v < f { Failure } else { Success };
            log.push(OutcomeEntry::variant(format!("r{p}__T{v}"), format!("r{p}"), "VariableRenaming1", kind));
        }
    }
}

fn within(f: &Fraction, published: f64) -> bool {
    (f.to_f64() * 100.0 - published).abs() <= 0.05
}

#[test]
fn planted_table_two_counts() {
    let t = Instant::now();
    // (label, SR count, FR count, FlR flips, published SR, FR, FlR); base size 700, 20 variants per verified parent
    let rows = [
        ("DeepSeek-V3", 65, 435, 354, 9.3, 62.1, 27.2),
        ("Claude-3.5-Sonnet", 70, 449, 549, 10.0, 64.1, 39.2),
        ("GPT-4o", 83, 421, 485, 11.9, 60.1, 29.2),
    ];
    let mut reports = Vec::new();
    for (label, s, f, flips, sr, fr, flr) in rows {
        // a tenth of the failures are invalid responses
        let mut log = base_log(700, s, f - f / 10, f / 10);
        add_variants(&mut log, s, 20, flips);
        let r = MetricReport::from_log(label, &log, None, ReportOptions::default()).unwrap();
        let (rsr, rfr, rflr) = (r.base.sr.clone().unwrap(), r.base.fr.clone().unwrap(), r.flr.clone().unwrap());
        assert!(within(&rsr, sr), "{label} SR {}", rsr.percent_1dp());
        assert!(within(&rfr, fr), "{label} FR {}", rfr.percent_1dp());
        assert!(within(&rflr, flr), "{label} FlR {}", rflr.percent_1dp());
        assert_eq!(rsr.percent_1dp(), format!("{sr:.1}"));
        assert_eq!(rfr.percent_1dp(), format!("{fr:.1}"));
        assert_eq!(rflr.percent_1dp(), format!("{flr:.1}"));
        // equal group sizes: pooled and per-parent means agree
        assert_eq!(r.flr, r.flr_pooled);
        assert_eq!(r.flr_parents, s);
        reports.push(r);
    }
    let table = render_table(&reports);
    assert!(table.lines().nth(2).unwrap().starts_with("DeepSeek-V3"));
    assert!(table.contains("27.2") && table.contains("39.2") && table.contains("11.9"));
    let mut csv = Vec::new();
    write_csv(&reports, &mut csv).unwrap();
    let csv = String::from_utf8(csv).unwrap();
    let first = csv.lines().nth(1).unwrap();
    assert!(first.starts_with("DeepSeek-V3,9.3,62.1,-,") && first.ends_with(",27.2"), "{first}");
    assert!(t.elapsed().as_secs_f64() < 10.0);
}

#[test]
fn planted_diverse_success_rate() {
    // 500 parents with 2 variants each; 78 parents have one verified variant
    let mut log = base_log(500, 0, 500, 0);
    for p in 0..500 {
        for v in 0..2 {
            let kind = if p < 78 && v == 0 { Success } else { Failure };
            log.push(OutcomeEntry::variant(format!("r{p}__T{v}"), format!("r{p}"), "For2While", kind));
        }
    }
    let r = MetricReport::from_log("DeepSeek-V3", &log, None, ReportOptions::default()).unwrap();
    let d = r.diverse.unwrap();
    assert_eq!(d.sr.percent_1dp(), "7.8");
    assert_eq!(d.sr, d.sr_weighted);
    assert_eq!(d.parents, 500);
    assert_eq!(d.variants, 1000);
    assert_eq!(r.flr, None);
}

#[test]
fn unweighted_and_weighted_differ_on_uneven_groups() {
    let g = vec![vec![Fraction::new(1, 1)], vec![Fraction::zero(), Fraction::zero(), Fraction::zero()]];
    assert_eq!(normalized_metric(&g).unwrap(), Fraction::new(1, 2));
    assert_eq!(variant_weighted_metric(&g).unwrap(), Fraction::new(1, 4));
    let two = vec![vec![Fraction::new(1, 2)], vec![Fraction::new(1, 1); 7]];
    assert_eq!(normalized_metric(&two).unwrap(), Fraction::new(3, 4));
}

#[test]
fn hand_counted_examples() {
    let mut ten = base_log(10, 3, 0, 0);
    assert_eq!(success_rate(&ten).unwrap(), Fraction::new(3, 10));
    ten = base_log(10, 0, 4, 1);
    assert_eq!(failure_rate(&ten).unwrap(), Fraction::new(1, 2));
    assert_eq!(success_rate(&base_log(5, 5, 0, 0)).unwrap(), Fraction::new(1, 1));
    assert_eq!(failure_rate(&base_log(5, 5, 0, 0)).unwrap(), Fraction::zero());
    assert!(matches!(success_rate(&OutcomeLog::default()), Err(MetricsError::EmptyLog)));

    let mut m = vec![Failure; 8];
    m.extend([Success, Success]);
    assert_eq!(completeness_rate("p", &m).unwrap(), Fraction::new(4, 5));
    assert_eq!(completeness_rate("p", &[Success; 4]).unwrap(), Fraction::zero());
    assert_eq!(completeness_rate("p", &[Unknown, Invalid]).unwrap(), Fraction::new(1, 1));
    assert!(matches!(completeness_rate("p", &[]), Err(MetricsError::NoMutants(_))));

    let mut v = vec![Success; 7];
    v.extend([Failure, Unknown, Invalid]);
    assert_eq!(flip_rate(Success, &v).unwrap(), Fraction::new(3, 10));
    assert_eq!(flip_rate(Success, &[Success; 3]).unwrap(), Fraction::zero());
    assert!(matches!(flip_rate(Failure, &v), Err(MetricsError::BaseNotSuccess)));
    assert!(matches!(flip_rate(Success, &[]), Err(MetricsError::NoVariants)));
    assert!(matches!(normalized_metric(&[vec![]]), Err(MetricsError::EmptyGroup(0))));
}

#[test]
fn completeness_only_over_verified_specs_unless_widened() {
    let mut log = base_log(2, 1, 1, 0);
    for (i, k) in [Failure, Failure, Success, Failure].into_iter().enumerate() {
        log.push(OutcomeEntry::mutant("r0", format!("r0__M{}", i + 1), k));
    }
    for k in [Success, Success] {
        log.push(OutcomeEntry::mutant("r1", "r1__M1", k));
    }
    let narrow = MetricReport::from_log("m", &log, None, ReportOptions::default()).unwrap();
    assert_eq!(narrow.cr, Some(Fraction::new(3, 4)));
    assert_eq!(narrow.cr_specs, 1);
    // mutant runs do not count as base runs
    assert_eq!(narrow.base.n, 2);
    let wide = MetricReport::from_log("m", &log, None, ReportOptions { cr_all_specs: true }).unwrap();
    assert_eq!(wide.cr, Some(Fraction::new(3, 8)));
}

fn record(id: &str, class: ControlFlowClass) -> ProgramRecord {
    ProgramRecord {
        id: id.into(),
        source_path: format!("src/{id}.java"),
        bare_source: String::new(),
        intent: String::new(),
        class,
        origin: Origin::Base,
    }
}

#[test]
fn class_slices_report_planted_pattern() {
    use ControlFlowClass::*;
    let mut records = Vec::new();
    let mut log = OutcomeLog::default();
    // (class, n, successes): loops below 10%, straight-line code above
    for (class, n, s) in [(Sequential, 40, 8), (Branching, 30, 4), (SinglePathLoop, 50, 4), (NestedLoop, 20, 1)] {
        for i in 0..n {
            let id = format!("{class}{i}");
            records.push(record(&id, class));
            log.push(OutcomeEntry::base(id, if i < s { Success } else { Failure }));
        }
    }
    let corpus = Corpus::new("c", "1", records);
    let slices = slice_by_class(&log, &corpus).unwrap();
    assert_eq!(slices.len(), 4);
    assert!(!slices.contains_key(&MultiPathLoop));
    for (class, r) in &slices {
        let sr = r.sr.as_ref().unwrap().to_f64();
        assert_eq!(class.has_loop(), sr < 0.10, "{class} {sr}");
    }
    assert_eq!(slices[&Sequential].sr, Some(Fraction::new(1, 5)));

    let only_seq = log.filtered(|e| e.record_id.starts_with("Sequential"));
    assert_eq!(slice_by_class(&only_seq, &corpus).unwrap().len(), 1);
    let mut bad = only_seq.clone();
    bad.push(OutcomeEntry::base("ghost", Success));
    assert!(matches!(slice_by_class(&bad, &corpus), Err(MetricsError::UnknownId(id)) if id == "ghost"));
}

#[test]
fn log_round_trips_through_jsonl() {
    let mut log = base_log(6, 2, 2, 1);
    add_variants(&mut log, 2, 3, 2);
    log.push(OutcomeEntry { token_cost: Some(120), wall_time: 1.5, ..OutcomeEntry::mutant("r0", "r0__M1", Failure) });
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("log.jsonl");
    log.save(&path).unwrap();
    let back = OutcomeLog::load(&path).unwrap();
    assert_eq!(back, log);
    let a = MetricReport::from_log("x", &log, None, ReportOptions::default()).unwrap();
    let b = MetricReport::from_log("x", &back, None, ReportOptions::default()).unwrap();
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    assert_eq!(a.token_cost, 120);
    assert!(matches!(
        OutcomeLog::read_jsonl("{\"record_id\": 3}\n".as_bytes()),
        Err(MetricsError::BadLog { line: 1, .. })
    ));
}

/// Independent oracle: machine-integer rationals, summed by hand.
fn oracle_mean_of_means(groups: &[Vec<(i64, i64)>]) -> Ratio<i128> {
    let mut total = Ratio::from_integer(0i128);
    for g in groups {
        let mut s = Ratio::from_integer(0i128);
        for &(n, d) in g {
            s += Ratio::new(n as i128, d as i128);
        }
        total += s / Ratio::from_integer(g.len() as i128);
    }
    total / Ratio::from_integer(groups.len() as i128)
}

fn kind() -> impl Strategy<Value = OutcomeKind> {
    prop::sample::select(vec![Success, Failure, Unknown, Invalid])
}

#[test]
fn rates_partition_on_random_logs() {
    let mut runner = proptest::test_runner::TestRunner::new(ProptestConfig::with_cases(1000));
    runner
        .run(&prop::collection::vec(kind(), 1..60), |kinds| {
            let log = OutcomeLog::new(kinds.iter().enumerate().map(|(i, &k)| OutcomeEntry::base(format!("r{i}"), k)).collect());
            let sum = success_rate(&log).unwrap().0 + failure_rate(&log).unwrap().0 + unknown_rate(&log).unwrap().0;
            prop_assert_eq!(sum, num_rational::BigRational::from_integer(1.into()));
            Ok(())
        })
        .unwrap();
}

#[test]
fn normalized_metric_matches_oracle_on_random_structures() {
    let groups = prop::collection::vec(prop::collection::vec((0i64..10, 1i64..10), 1..8), 1..12)
        .prop_map(|gs| gs.into_iter().map(|g| g.into_iter().map(|(n, d)| (n.min(d), d)).collect::<Vec<_>>()).collect::<Vec<_>>());
    let mut runner = proptest::test_runner::TestRunner::new(ProptestConfig::with_cases(500));
    runner
        .run(&groups, |gs| {
            let fr: Vec<Vec<Fraction>> =
                gs.iter().map(|g| g.iter().map(|&(n, d)| Fraction::new(n as usize, d as usize)).collect()).collect();
            let got = normalized_metric(&fr).unwrap();
            let want = oracle_mean_of_means(&gs);
            prop_assert_eq!(got.0.numer().to_string(), want.numer().to_string());
            prop_assert_eq!(got.0.denom().to_string(), want.denom().to_string());
            Ok(())
        })
        .unwrap();
}

proptest! {
    #[test]
    fn flip_rate_ignores_order(mut v in prop::collection::vec(kind(), 1..30), seed in any::<u64>()) {
        let a = flip_rate(Success, &v).unwrap();
        let n = v.len();
        let mut s = seed;
        for i in (1..n).rev() {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            v.swap(i, (s >> 33) as usize % (i + 1));
        }
        prop_assert_eq!(a, flip_rate(Success, &v).unwrap());
    }

    #[test]
    fn equal_groups_reduce_to_plain_mean(vals in prop::collection::vec(0usize..5, 1..10), size in 1usize..5) {
        let groups: Vec<Vec<Fraction>> = vals.iter().map(|&v| vec![Fraction::new(v, 4); size]).collect();
        prop_assert_eq!(normalized_metric(&groups).unwrap(), variant_weighted_metric(&groups).unwrap());
    }
}
