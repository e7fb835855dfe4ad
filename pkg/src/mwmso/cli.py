"""Command-line front end.

Exit codes: 0 success / yes, 1 no (decisions, failed checks), 2 usage
error, 3 resource budget exceeded, 4 structural error.
"""

from __future__ import annotations

import argparse
import itertools
import json
import random
import sys
from fractions import Fraction

from . import formats
from .automata import Mwa, multiset_behavior
from .compiler import automaton_to_formula, compile_formula
from .decision import ratio_emptiness_geq, twocost_emptiness_leq
from .errors import MwmsoError, UsageError, use_budgets
from .logic import AssignedWord, classify, encode, eval_encoded, eval_multiset, extended_alphabet, letters_of, to_text
from .multiset import canonical_sorted
from .omega import MullerMwa, accepting_lasso_exists, omega_behavior, parse_lasso
from .structures import (
    DisplacementStructure,
    EnergyStructure,
    OmegaRatioStructure,
    RatioStructure,
    TwoCostStructure,
    parse_structure,
    parse_weight,
    validate_structure,
    parse_number,
)


class _Out:
    def __init__(self, args):
        self.json = args.json
        self.stdout = sys.stdout

    def emit(self, text: str | None = None, data: dict | None = None) -> None:
        if self.json:
            self.stdout.write(json.dumps(data, ensure_ascii=False, sort_keys=True) + "\n")
        else:
            self.stdout.write(text + ("" if text.endswith("\n") else "\n"))


def _warn(msg: str) -> None:
    print(msg, file=sys.stderr)


def _formula_args(args):
    if bool(args.formula) == bool(args.text):
        raise UsageError("give exactly one of --formula FILE or --text FORMULA")
    f, s, declared, aliases = formats.load_formula(args.formula or args.text, bool(args.formula), args.structure, _warn)
    if args.alphabet:
        extra, more = formats.parse_alphabet_header(args.alphabet)
        declared = list(dict.fromkeys(list(declared or []) + extra))
        aliases = {**aliases, **more}
    word = getattr(args, "word", None)
    if declared is None and word:
        # undeclared alphabet: every character of the word not covered by the formula is a letter
        known = {str(x) for x in letters_of(f)}
        declared = canonical_sorted(letters_of(f) | {ch for ch in word if not ch.isspace() and ch not in known})
    return f, s, declared, aliases


def _alphabet(f, declared):
    return list(declared) if declared else canonical_sorted(letters_of(f))


# --- subcommands ---------------------------------------------------------------------------------


def cmd_eval(args, out: _Out) -> int:
    f, s, declared, aliases = _formula_args(args)
    word = formats.tokenize_word(args.word, _alphabet(f, declared), aliases)
    aw = formats.assigned_word(word, formats.parse_assignment(args.assign), f)
    r = eval_multiset(f, aw, s)
    value = s.phi(r)
    out.emit(
        f"multiset: {formats.format_multiset(r)}\nvalue: {s.format_value(value)}",
        {"multiset": formats.multiset_to_json(r), "value": s.format_value(value)},
    )
    return 0


def cmd_compile(args, out: _Out) -> int:
    f, s, declared, aliases = _formula_args(args)
    trace = [] if args.trace else None
    a = compile_formula(f, s, _alphabet(f, declared), trace=trace)
    if trace is not None:
        for line in trace:
            _warn(f"trace: {line}")
    variables = sorted(f.free) if f.free else None
    text = formats.automaton_to_json(a, s, _alphabet(f, declared), variables, aliases)
    if args.dot:
        with open(args.dot, "w", encoding="utf-8") as fh:
            fh.write(formats.automaton_to_dot(a))
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
        out.emit(f"wrote {args.output}: {len(a.states)} states, {len(a.transitions)} transitions",
                 {"output": args.output, "states": len(a.states), "transitions": len(a.transitions)})
    else:
        sys.stdout.write(text)
    return 0


def _load(args) -> formats.AutomatonFile:
    with open(args.automaton, encoding="utf-8") as fh:
        return formats.load_automaton(fh.read(), args.structure)


def _word_for(af: formats.AutomatonFile, text: str, assign: str | None) -> tuple:
    word = formats.tokenize_word(text, af.alphabet, af.aliases)
    if af.variables is None:
        return word
    sigma = formats.parse_assignment(assign)
    return encode(AssignedWord.make(word, sigma, af.variables))


def cmd_behavior(args, out: _Out) -> int:
    af = _load(args)
    if not isinstance(af.automaton, Mwa):
        raise UsageError("behavior needs a finite-word automaton; use omega-eval for Muller automata")
    word = _word_for(af, args.word, args.assign)
    r = multiset_behavior(af.automaton, word, af.structure)
    value = af.structure.phi(r)
    out.emit(
        f"multiset: {formats.format_multiset(r)}\nvalue: {af.structure.format_value(value)}",
        {"multiset": formats.multiset_to_json(r), "value": af.structure.format_value(value)},
    )
    return 0


def cmd_to_formula(args, out: _Out) -> int:
    af = _load(args)
    if not isinstance(af.automaton, Mwa) or af.variables is not None:
        raise UsageError("to-formula needs a finite-word automaton over a plain alphabet")
    f = automaton_to_formula(af.automaton)
    letters = " ".join(
        f"{x}={alias}" if alias else str(x)
        for x in af.alphabet
        for alias in [next((k for k, v in af.aliases.items() if v == x), None)]
    )
    back = {v: k for k, v in af.aliases.items()}
    text = f"# structure: {af.structure.name}\n# alphabet: {letters}\n{to_text(f, back)}\n"
    out.emit(text, {"formula": to_text(f, back), "structure": af.structure.name})
    return 0


def cmd_check(args, out: _Out) -> int:
    f, s, declared, aliases = _formula_args(args)
    c = classify(f)
    out.emit(
        c.report(),
        {
            "class": c.root_tag,
            "forall_restricted": c.forall_restricted,
            "and_restricted": c.and_restricted,
            "restricted": c.restricted,
            "diagnostics": list(c.diagnostics),
        },
    )
    return 0 if c.restricted else 1


def _decision_out(out: _Out, res, af) -> int:
    if res.answer:
        word = formats.format_word(res.witness)
        value = af.structure.format_value(res.value)
        out.emit(f"yes\nwitness: {word}\nvalue: {value}", {"answer": "yes", "witness": word, "value": value})
        return 0
    out.emit("no", {"answer": "no"})
    return 1


def cmd_empty_geq(args, out: _Out) -> int:
    af = _load(args)
    if not isinstance(af.structure, RatioStructure):
        raise UsageError("empty-geq needs an automaton over the ratio structure")
    return _decision_out(out, ratio_emptiness_geq(af.automaton, _threshold(args.nu)), af)


def cmd_empty_leq(args, out: _Out) -> int:
    af = _load(args)
    if not isinstance(af.structure, TwoCostStructure):
        raise UsageError("empty-leq needs an automaton over a twocost(p) structure")
    return _decision_out(out, twocost_emptiness_leq(af.automaton, _threshold(args.nu), af.structure), af)


def _threshold(text: str) -> Fraction:
    nu = parse_number(text)
    if isinstance(nu, float):
        raise UsageError("threshold must be a finite rational")
    return nu


def cmd_omega_eval(args, out: _Out) -> int:
    af = _load(args)
    if not isinstance(af.automaton, MullerMwa):
        raise UsageError("omega-eval needs an automaton with a 'muller' acceptance family")
    w = parse_lasso(args.lasso, lambda s: formats.tokenize_word(s, af.alphabet, af.aliases) if s.strip() else ())
    value = omega_behavior(af.automaton, w, af.structure)
    accepting = accepting_lasso_exists(af.automaton, w)
    text = af.structure.format_value(value)
    out.emit(f"value: {text}\naccepting run: {'yes' if accepting else 'no'}",
             {"value": text, "accepting_run": accepting})
    return 0


def cmd_oracle(args, out: _Out) -> int:
    f, s, declared, aliases = _formula_args(args)
    alphabet = _alphabet(f, declared)
    a = compile_formula(f, s, alphabet)
    letters = extended_alphabet(alphabet, f.free) if f.free else alphabet
    checked = 0
    mismatches = []
    for n in range(1, args.max_len + 1):
        for word in itertools.product(letters, repeat=n):
            got = multiset_behavior(a, word, s)
            want = eval_encoded(f, word, f.free, s) if f.free else eval_multiset(f, word, s)
            checked += 1
            if got != want:
                mismatches.append(formats.format_word(word))
    if mismatches:
        out.emit(f"DIFFERENT on {len(mismatches)} of {checked} words, first: {mismatches[0]}",
                 {"equal": False, "words": checked, "mismatches": mismatches[:20]})
        return 1
    out.emit(f"equal on {checked} words (automaton: {len(a.states)} states, {len(a.transitions)} transitions)",
             {"equal": True, "words": checked, "states": len(a.states), "transitions": len(a.transitions)})
    return 0


def _random_samples(s, rng: random.Random, n: int = 50) -> list:
    def q(lo, hi):
        return Fraction(rng.randint(lo * 4, hi * 4), rng.choice([1, 2, 4]))

    if isinstance(s, EnergyStructure):
        return [tuple(rng.randint(-e, e) for e in s.emax) for _ in range(n)]
    if isinstance(s, (RatioStructure, OmegaRatioStructure)):
        return [(q(-5, 5), abs(q(0, 5))) for _ in range(n)]
    if isinstance(s, DisplacementStructure):
        return [tuple(q(-5, 5) for _ in range(s.arity)) for _ in range(n)]
    return [(q(-5, 5), q(-5, 5)) for _ in range(n)]


def cmd_validate_structure(args, out: _Out) -> int:
    if not args.structure:
        raise UsageError("validate-structure needs --structure")
    s = parse_structure(args.structure)
    if args.samples:
        samples = [s.coerce(parse_weight(x)) for x in args.samples.split(";") if x.strip()]
    else:
        samples = _random_samples(s, random.Random(args.seed))
    violations = validate_structure(s, samples, args.max_pad)
    lines = [f"{s.name}: {len(samples)} samples, {len(violations)} violations"]
    lines += [f"  {v.law}: {v.detail}" for v in violations[:20]]
    out.emit("\n".join(lines), {
        "structure": s.name,
        "samples": len(samples),
        "violations": [{"law": v.law, "detail": v.detail} for v in violations],
    })
    return 0 if not violations else 1


# --- parser ---------------------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--structure", help="valuation structure, e.g. ratio, twocost(10), disp(2), omega-ratio, energy(2)")
    common.add_argument("--max-len", type=int, default=5, help="word length bound for exhaustive checks")
    common.add_argument("--budget-states", type=int, default=None, help="state budget for constructions")
    common.add_argument("--budget-count", type=int, default=None, help="total-count budget for multisets")
    common.add_argument("--json", action="store_true", help="machine-readable output")
    common.add_argument("--seed", type=int, default=0, help="seed for randomized samples")

    p = argparse.ArgumentParser(prog="mwmso", description=__doc__.splitlines()[0], parents=[common])
    sub = p.add_subparsers(dest="command", required=True)

    def formula_src(sp):
        g = sp.add_argument_group("formula")
        g.add_argument("--formula", help="formula file (.mwl)")
        g.add_argument("--text", help="formula text given inline")
        g.add_argument("--alphabet", help="letters with optional ASCII aliases, e.g. 'a b' or '↔=<-> ↕=<|>'")

    sp = sub.add_parser("eval", parents=[common], help="direct multiset semantics of a formula on a word")
    formula_src(sp)
    sp.add_argument("--word", required=True)
    sp.add_argument("--assign", help="values of free variables, e.g. x=0,X={0,2}")
    sp.set_defaults(run=cmd_eval)

    sp = sub.add_parser("compile", parents=[common], help="compile a restricted formula to an automaton")
    formula_src(sp)
    sp.add_argument("-o", "--output", help="write the automaton JSON here instead of stdout")
    sp.add_argument("--dot", help="also write a Graphviz rendering")
    sp.add_argument("--trace", action="store_true", help="log step functions and intermediate sizes to stderr")
    sp.set_defaults(run=cmd_compile)

    sp = sub.add_parser("behavior", parents=[common], help="multiset behavior of an automaton on a word")
    sp.add_argument("--automaton", required=True)
    sp.add_argument("--word", required=True)
    sp.add_argument("--assign")
    sp.set_defaults(run=cmd_behavior)

    sp = sub.add_parser("to-formula", parents=[common], help="sentence equivalent to an automaton")
    sp.add_argument("--automaton", required=True)
    sp.set_defaults(run=cmd_to_formula)

    sp = sub.add_parser("check", parents=[common], help="classification report")
    formula_src(sp)
    sp.set_defaults(run=cmd_check)

    for name, fn, desc in (
        ("empty-geq", cmd_empty_geq, "is some word's ratio value >= nu"),
        ("empty-leq", cmd_empty_leq, "is some word's two-cost value <= nu"),
    ):
        sp = sub.add_parser(name, parents=[common], help=desc)
        sp.add_argument("--automaton", required=True)
        sp.add_argument("--nu", required=True)
        sp.set_defaults(run=fn)

    sp = sub.add_parser("omega-eval", parents=[common], help="Muller automaton on a lasso word u(v)^w")
    sp.add_argument("--automaton", required=True)
    sp.add_argument("--lasso", required=True)
    sp.set_defaults(run=cmd_omega_eval)

    sp = sub.add_parser("oracle", parents=[common], help="compare compiled automaton and direct semantics")
    formula_src(sp)
    sp.set_defaults(run=cmd_oracle)

    sp = sub.add_parser("validate-structure", parents=[common], help="check structure axioms on samples")
    sp.add_argument("--samples", help="weights separated by ';', e.g. '<1,2>;<0,0>'")
    sp.add_argument("--max-pad", type=int, default=6)
    sp.set_defaults(run=cmd_validate_structure)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    out = _Out(args)
    try:
        with use_budgets(args.budget_states, args.budget_count):
            return args.run(args, out)
    except MwmsoError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())

