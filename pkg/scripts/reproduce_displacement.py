"""Evaluate the displacement sentence in fixtures/displacement.mwl directly and through its compiled automaton."""

import argparse
from pathlib import Path

from mwmso.automata import multiset_behavior
from mwmso.compiler import compile_formula
from mwmso.formats import format_multiset, load_formula
from mwmso.logic import eval_multiset

FIXTURE = Path(__file__).resolve().parent.parent / "fixtures" / "displacement.mwl"


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("words", nargs="*", default=["↔↔", "↔↕", "↕↕", "↔↕↔"])
    args = ap.parse_args()
    f, s, alphabet, _ = load_formula(str(FIXTURE), True)
    a = compile_formula(f, s, alphabet)
    print(f"compiled: {len(a.states)} states, {len(a.weights)} transitions")
    for text in args.words:
        w = tuple(text)
        direct = eval_multiset(f, w, s)
        mark = "ok" if multiset_behavior(a, w, s) == direct else "MISMATCH"
        print(f"{text}  {format_multiset(direct)}  value {s.format_value(s.phi(direct))}  [{mark}]")


if __name__ == "__main__":
    main()
