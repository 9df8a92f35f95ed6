use specbench_core::syntax::{
    self, embed_annotations, normalize_whitespace, parse, render, strip_annotations, visit, StmtKind,
};
use std::fs;
use std::path::PathBuf;

fn fixture_dir(sub: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(sub)
}

fn java_fixtures() -> Vec<(String, String)> {
    let mut out = Vec::new();
    for sub in ["programs", "failures"] {
        let mut paths: Vec<_> = fs::read_dir(fixture_dir(sub))
            .unwrap()
            .map(|e| e.unwrap().path())
            .filter(|p| p.extension().is_some_and(|e| e == "java") && !p.to_string_lossy().contains(".fragment."))
            .collect();
        paths.sort();
        for p in paths {
            out.push((p.file_name().unwrap().to_string_lossy().into_owned(), fs::read_to_string(&p).unwrap()));
        }
    }
    out
}

#[test]
fn render_parse_identity_on_fixtures() {
    let fixtures = java_fixtures();
    assert!(fixtures.len() >= 14);
    for (name, src) in fixtures {
        let tree = parse(&src).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert_eq!(render(&tree), src, "{name}");
        for s in visit::all_stmts(tree.unit()) {
            assert!(s.span.end <= src.len());
        }
    }
}

#[test]
fn strip_embed_round_trip_on_fixtures() {
    for (name, src) in java_fixtures() {
        let (bare, index) = strip_annotations(&src).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert!(parse(&bare).unwrap().annotation_comments().next().is_none(), "{name}");
        let again = embed_annotations(&bare, &index).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert_eq!(normalize_whitespace(&again), normalize_whitespace(&src), "{name}");
        let (bare2, index2) = strip_annotations(&again).unwrap();
        assert_eq!(bare2, bare, "{name}");
        assert_eq!(index2.clause_count(), index.clause_count(), "{name}");
    }
}

#[test]
fn fig1_has_four_clause_kinds() {
    let src = fs::read_to_string(fixture_dir("programs/Fig1.java")).unwrap();
    let (bare, index) = strip_annotations(&src).unwrap();
    assert_eq!(index.clause_kinds(), ["requires", "ensures", "maintaining", "decreasing"]);
    assert_eq!(index.len(), 7);
    assert_eq!(
        bare,
        "public int theMaximumAchievableX(int num, int t) {\n  int res = num;\n  for(int i = 1; i <= t; i++) {\n    res = res + 2;\n  }\n  return res;\n}\n"
    );
    let tree = parse(&src).unwrap();
    assert_eq!(tree.annotation_comments().count(), 7);
}

#[test]
fn parses_assorted_java() {
    let src = r#"
package a.b;
import java.util.*;
public class T<K extends Comparable<K>> extends Base implements I, J {
    private static final int[][] GRID = {{1, 2}, {3}};
    private Map<String, List<Integer>> m = new HashMap<>();
    enum Color { RED, GREEN; int x; }
    T() { super(); }
    @Override
    public <E> List<E> f(final int a, String... rest) throws Exception {
        int x = a >> 2, y = a >>> 1;
        x >>= 1;
        List<List<Integer>> nested = new ArrayList<>();
        Runnable r = () -> { return; };
        java.util.function.Function<Integer, Integer> g = v -> v + 1;
        int[] arr = new int[] {1, 2};
        String s = (String) o;
        boolean b = x < y && y > (x);
        outer:
        for (int i = 0, j = 10; i < j; i++, j--) {
            for (int v : arr) { if (v == 0) continue outer; else break; }
        }
        switch (x) { case 1: case 2: y++; break; default: y--; }
        switch (s) { case "a" -> y = 1; default -> { y = 2; } }
        do { x--; } while (x > 0);
        try { g(); } catch (IllegalStateException | NullPointerException e) { throw e; } finally { }
        assert x > 0 : "msg";
        Object o2 = new Object() { public String toString() { return "o"; } };
        int c = x > 0 ? x : -x;
        Class<?> k = int[].class;
        return Arrays.<E>asList();
    }
}
"#;
    let tree = parse(src).unwrap_or_else(|e| panic!("{e}"));
    assert_eq!(render(&tree), src);
    let kinds: Vec<_> = visit::all_stmts(tree.unit()).iter().map(|s| s.kind_name()).collect();
    assert!(kinds.contains(&"labeled"));
    assert!(kinds.contains(&"switch"));
    let shifts = visit::all_exprs(tree.unit())
        .into_iter()
        .filter(|e| matches!(e.kind, syntax::ExprKind::Binary { op: syntax::BinaryOp::Shr | syntax::BinaryOp::UShr, .. }))
        .count();
    assert_eq!(shifts, 2);
    assert!(visit::all_stmts(tree.unit()).iter().any(|s| matches!(s.kind, StmtKind::DoWhile { .. })));
}

#[test]
fn parse_errors_carry_positions() {
    for bad in ["class A { void f() { int x = ; } }", "class A { void f() { if (x) } }", "class"] {
        let err = parse(bad).unwrap_err();
        assert!(err.offset <= bad.len(), "{bad}");
        assert!(err.line >= 1);
    }
}
