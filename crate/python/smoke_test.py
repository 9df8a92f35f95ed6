"""Smoke test for the compiled extension.

Usage: python smoke_test.py [path/to/libspecbench.so]
Without an argument the debug build under target/ is used.
"""

import importlib.util
import json
import pathlib
import shutil
import sys
import tempfile

HERE = pathlib.Path(__file__).resolve().parent
ROOT = HERE.parent
FIXTURES = ROOT / "crates" / "core" / "tests" / "fixtures" / "programs"


def load(lib):
    tmp = pathlib.Path(tempfile.mkdtemp())
    target = tmp / "specbench.so"
    shutil.copy(lib, target)
    spec = importlib.util.spec_from_file_location("specbench", target)
    mod = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(mod)
    return mod


def main():
    if len(sys.argv) > 1:
        lib = pathlib.Path(sys.argv[1])
    else:
        lib = ROOT / "target" / "debug" / "libspecbench.so"
    sb = load(lib)

    specified = (FIXTURES / "Maximum.java").read_text()
    bare = sb.strip_annotations(specified)
    assert "//@" not in bare

    assert "SwitchRelation" in sb.transform_names()
    variant, applicable = sb.transform("SwitchRelation", bare)
    assert applicable and variant != bare

    ms = sb.mutants("maximum", bare)
    assert len(ms) == 10, len(ms)
    assert ms[0][0] == "maximum__M1"
    only_ror = sb.mutants("maximum", bare, ["ROR"])
    assert {op for _, op, _ in only_ror} == {"RelationalOpReplace"}

    got = sb.extract_spec("Here it is:\n```java\n" + specified + "```\n", bare)
    assert got == specified
    try:
        sb.extract_spec("no code", bare)
    except ValueError as e:
        assert "code block" in str(e).lower(), e
    else:
        raise AssertionError("prose was accepted")

    out = "/tmp/A.java:4: error: Unexpected or misspelled JML token: ensure\n1 error\n"
    cats = sb.triage_output(out)
    assert len(cats) == 1 and cats[0][0] == "SyntaxError", cats

    with tempfile.TemporaryDirectory() as d:
        log = pathlib.Path(d) / "outcomes.jsonl"
        rows = [
            {"record_id": "a", "kind": "Success", "token_cost": 10},
            {"record_id": "b", "kind": "Failure", "token_cost": 10},
        ]
        log.write_text("".join(json.dumps(r) + "\n" for r in rows))
        report = json.loads(sb.score_log(str(log), "smoke"))
        assert report["base"]["sr"] == "1/2", report["base"]

    print("specbench", sb.__version__, "smoke test ok")


if __name__ == "__main__":
    main()
