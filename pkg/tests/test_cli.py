import json
import random
from fractions import Fraction as F
from pathlib import Path

import pytest

from conftest import random_mwa, words
from mwmso import formats
from mwmso.automata import multiset_behavior
from mwmso.cli import main
from mwmso.errors import UsageError
from mwmso.logic import eval_multiset
from mwmso.omega import MullerMwa
from mwmso.structures import RatioStructure

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"
DISP = str(FIXTURES / "displacement.mwl")


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_eval_golden_example(capsys):
    code, out, _ = run(capsys, "eval", "--structure", "disp(2)", "--formula", DISP, "--word", "↔↔")
    assert code == 0
    assert out == "multiset: {<-2,0>:1, <0,0>:2, <2,0>:1}\nvalue: 1\n"
    code, out, _ = run(capsys, "eval", "--formula", DISP, "--word", "<-><|>", "--json")
    assert json.loads(out)["value"] == "1.41421356237"


def test_json_output_is_byte_stable(capsys):
    outs = {run(capsys, "eval", "--formula", DISP, "--word", "↔↕↔", "--json")[1] for _ in range(3)}
    assert len(outs) == 1


def test_compile_then_behavior(tmp_path, capsys):
    target = tmp_path / "disp.json"
    dot = tmp_path / "disp.dot"
    code, out, _ = run(capsys, "compile", "--formula", DISP, "-o", str(target), "--dot", str(dot))
    assert code == 0 and "5 states" in out
    assert dot.read_text(encoding="utf-8").startswith("digraph")
    first = target.read_text(encoding="utf-8")
    run(capsys, "compile", "--formula", DISP, "-o", str(target))
    assert target.read_text(encoding="utf-8") == first
    code, out, _ = run(capsys, "behavior", "--automaton", str(target), "--word", "↔↔")
    assert out == "multiset: {<-2,0>:1, <0,0>:2, <2,0>:1}\nvalue: 1\n"


def test_compile_open_formula_and_behavior_with_assignment(tmp_path, capsys):
    target = tmp_path / "open.json"
    text = "P_a(x) & <1,2> | exists y. (x <= y & <0,1>)"
    code, _, _ = run(capsys, "compile", "--structure", "ratio", "--text", text, "--alphabet", "a b", "-o", str(target))
    assert code == 0
    assert json.loads(target.read_text(encoding="utf-8"))["variables"] == ["x"]
    _, out_b, _ = run(capsys, "behavior", "--automaton", str(target), "--word", "ab", "--assign", "x=0")
    _, out_e, _ = run(capsys, "eval", "--structure", "ratio", "--text", text, "--alphabet", "a b", "--word", "ab", "--assign", "x=0")
    assert out_b == out_e


def test_trace_goes_to_stderr(capsys):
    code, out, err = run(capsys, "compile", "--formula", DISP, "--trace")
    assert code == 0 and json.loads(out)["structure"] == "disp(2)"
    assert "trace: step function" in err


def test_oracle_report(capsys):
    code, out, _ = run(capsys, "oracle", "--structure", "ratio", "--text", "forall x. (P_a(x) -> <1,2> | <0,1>)",
                       "--alphabet", "a b", "--max-len", "5")
    assert code == 0
    assert out.startswith("equal on 62 words")


def test_check_exit_codes(capsys):
    code, out, _ = run(capsys, "check", "--formula", DISP)
    assert code == 0 and "syntactically restricted: yes" in out
    code, out, _ = run(capsys, "check", "--structure", "ratio", "--text", "forall x. exists y. <1,1>")
    assert code == 1 and "forall-restricted: no" in out


def test_decision_subcommands(capsys):
    ratio = str(FIXTURES / "ratio.json")
    assert run(capsys, "empty-geq", "--automaton", ratio, "--nu", "1/2")[1] == "yes\nwitness: a\nvalue: 1/2\n"
    code, out, _ = run(capsys, "empty-geq", "--automaton", ratio, "--nu", "3/4")
    assert (code, out) == (1, "no\n")
    twocost = str(FIXTURES / "twocost.json")
    code, out, _ = run(capsys, "empty-leq", "--automaton", twocost, "--nu", "3", "--json")
    assert code == 0 and json.loads(out) == {"answer": "yes", "value": "3", "witness": "ba"}
    assert run(capsys, "empty-leq", "--automaton", twocost, "--nu", "2")[0] == 1
    assert run(capsys, "empty-leq", "--automaton", ratio, "--nu", "2")[0] == 2


def test_omega_eval(capsys):
    energy = str(FIXTURES / "energy.json")
    assert run(capsys, "omega-eval", "--automaton", energy, "--lasso", "(a)^w")[1].startswith("value: true")
    assert run(capsys, "omega-eval", "--automaton", energy, "--lasso", "b(b)^w")[1].startswith("value: false")
    out = run(capsys, "omega-eval", "--automaton", str(FIXTURES / "omega_ratio.json"), "--lasso", "(ab)^w", "--json")[1]
    assert json.loads(out) == {"accepting_run": True, "value": "2"}


def test_to_formula_roundtrip(tmp_path, capsys):
    rng = random.Random(5)
    a = random_mwa(rng, n_states=2, n_transitions=3, weight=lambda: (F(rng.randint(-2, 2)), F(rng.randint(0, 2))))
    s = RatioStructure()
    path = tmp_path / "a.json"
    path.write_text(formats.automaton_to_json(a, s), encoding="utf-8")
    code, out, _ = run(capsys, "to-formula", "--automaton", str(path))
    assert code == 0
    f, s2, alphabet, _ = formats.load_formula(out, False)
    for w in words(alphabet, 3):
        assert eval_multiset(f, w, s2) == multiset_behavior(a, w, s)


def test_validate_structure(capsys):
    assert run(capsys, "validate-structure", "--structure", "ratio")[0] == 0
    code, out, _ = run(capsys, "validate-structure", "--structure", "energy(2)", "--samples", "<1>;<0>")
    assert code == 1 and "omega-padding" in out
    assert run(capsys, "validate-structure", "--structure", "disp(2)", "--samples", "<1,2>;<0,0>")[0] == 0


def test_error_exit_codes(tmp_path, capsys):
    assert run(capsys, "eval", "--formula", DISP)[0] == 2  # missing --word
    assert run(capsys, "eval", "--formula", DISP, "--word", "xyz")[0] == 2
    assert run(capsys, "eval", "--structure", "ratio", "--text", "P_a(x", "--word", "a")[0] == 2
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"structure": "ratio", "alphabet": ["a"], "states": [0], "initial": [1],
                               "final": [0], "transitions": []}))
    code, _, err = run(capsys, "behavior", "--automaton", str(bad), "--word", "a")
    assert code == 4 and err.startswith("error:")
    code, _, err = run(capsys, "compile", "--formula", DISP, "--budget-states", "3")
    assert code == 3
    assert run(capsys, "eval", "--formula", str(tmp_path / "missing.mwl"), "--word", "a")[0] == 2


def test_structure_override_warns(capsys):
    code, out, err = run(capsys, "eval", "--formula", DISP, "--structure", "disp(2)", "--word", "↔")
    assert code == 0 and not err
    code, out, err = run(capsys, "eval", "--formula", DISP, "--structure", "ratio", "--word", "↔")
    assert "overrides the file header" in err


# --- formats -----------------------------------------------------------------------------------------


def test_tokenize_word_longest_match():
    assert formats.tokenize_word("<->↕ <->", ["↔", "↕"], {"<->": "↔", "<|>": "↕"}) == ("↔", "↕", "↔")
    assert formats.tokenize_word("aab", ["a", "aa", "b"]) == ("aa", "b")
    with pytest.raises(UsageError):
        formats.tokenize_word("", ["a"])


def test_parse_assignment():
    assert formats.parse_assignment("x=0, X={0,2},Y={}") == {"x": 0, "X": frozenset({0, 2}), "Y": frozenset()}
    for bad in ["x={0}", "X=1", "x:1"]:
        with pytest.raises(UsageError):
            formats.parse_assignment(bad)


@pytest.mark.parametrize("seed", range(5))
def test_automaton_json_roundtrip(seed):
    rng = random.Random(seed)
    s = RatioStructure()
    for kind in ("element", "multiset"):
        a = random_mwa(rng, kind=kind, weight=lambda: (F(rng.randint(-3, 3), 2), F(rng.randint(0, 3))))
        text = formats.automaton_to_json(a, s)
        back = formats.load_automaton(text).automaton
        assert (back.states, back.initial, back.final, back.weights) == (a.states, a.initial, a.final, a.weights)
        assert formats.automaton_to_json(back, s) == text


def test_muller_json_roundtrip():
    from mwmso.structures import EnergyStructure

    a = MullerMwa("ab", [0, 1], [0], [[0], [0, 1]], {(0, "a", 1): (1,), (1, "b", 0): (-2,)})
    text = formats.automaton_to_json(a, EnergyStructure([2]))
    back = formats.load_automaton(text).automaton
    assert back.muller == a.muller and back.weights == a.weights
