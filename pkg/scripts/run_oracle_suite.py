"""Compile random restricted sentences and compare against direct evaluation on all short words."""

import argparse
import itertools
import random
import sys
import time
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "tests"))

from reference import FormulaGen  # noqa: E402

from mwmso.automata import multiset_behavior  # noqa: E402
from mwmso.compiler import compile_formula  # noqa: E402
from mwmso.logic import eval_multiset  # noqa: E402
from mwmso.structures import parse_structure  # noqa: E402


def words(alphabet, max_len):
    for n in range(1, max_len + 1):
        yield from itertools.product(alphabet, repeat=n)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--structure", action="append", help="repeatable; default ratio, twocost(3), disp(2)")
    ap.add_argument("--count", type=int, default=20)
    ap.add_argument("--max-len", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    failures = 0
    for name in args.structure or ["ratio", "twocost(3)", "disp(2)"]:
        s = parse_structure(name)
        start = time.perf_counter()
        states = 0
        for i in range(args.count):
            f = FormulaGen(random.Random(f"{args.seed}-{name}-{i}")).sentence()
            a = compile_formula(f, s, ("a", "b"))
            states += len(a.states)
            for w in words(("a", "b"), args.max_len):
                if multiset_behavior(a, w, s) != eval_multiset(f, w, s):
                    failures += 1
                    print(f"MISMATCH {name} {f} on {''.join(w)}")
                    break
        print(f"{name}: {args.count} sentences, mean {states / args.count:.1f} states, "
              f"{time.perf_counter() - start:.1f}s")
    print("all equal" if not failures else f"{failures} mismatches")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
