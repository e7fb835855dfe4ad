"""File formats: automaton JSON, DOT, formula files, words and assignments."""

from __future__ import annotations

import json
import re
from collections.abc import Hashable, Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from typing import Any

from .automata import Mwa
from .errors import StructuralError, UsageError
from .logic import AssignedWord, Formula, extended_alphabet, is_second_order, parse
from .multiset import FiniteMultiset, canonical_sorted
from .omega import MullerMwa
from .structures import format_weight, parse_structure, parse_weight

# --- formula files ----------------------------------------------------------------------


@dataclass
class FormulaFile:
    text: str
    structure: str | None = None
    alphabet: list = field(default_factory=list)
    aliases: dict = field(default_factory=dict)  # ascii spelling -> letter


def parse_alphabet_header(text: str) -> tuple[list, dict]:
    """``"↔=<-> ↕=<|>"`` declares letters with optional ASCII aliases."""
    letters, aliases = [], {}
    for item in text.split():
        letter, _, alias = item.partition("=")
        if not letter:
            raise UsageError(f"bad alphabet entry {item!r}")
        letters.append(letter)
        if alias:
            aliases[alias] = letter
    return letters, aliases


def read_formula_file(text: str) -> FormulaFile:
    """Formula text with ``# structure:`` / ``# alphabet:`` header comments."""
    out = FormulaFile("")
    body = []
    for line in text.splitlines():
        stripped = line.strip()
        if stripped.startswith("#"):
            key, _, val = stripped[1:].partition(":")
            key = key.strip().lower()
            if key == "structure":
                out.structure = val.strip()
            elif key == "alphabet":
                out.alphabet, out.aliases = parse_alphabet_header(val)
            continue
        body.append(line)
    out.text = "\n".join(body).strip()
    if not out.text:
        raise UsageError("formula file contains no formula")
    return out


def tokenize_word(text: str, letters: Iterable[str], aliases: Mapping[str, str] | None = None) -> tuple:
    """Split ``text`` into letters by greedy longest match over letters and aliases."""
    table = {str(x): x for x in letters}
    for alias, letter in (aliases or {}).items():
        table[alias] = letter
    keys = sorted(table, key=len, reverse=True)
    out, i = [], 0
    text = text.strip()
    while i < len(text):
        if text[i].isspace():
            i += 1
            continue
        for k in keys:
            if text.startswith(k, i):
                out.append(table[k])
                i += len(k)
                break
        else:
            raise UsageError(f"cannot read a letter at offset {i} of {text!r}")
    if not out:
        raise UsageError("words must be nonempty")
    return tuple(out)


_ASSIGN = re.compile(r"\s*([A-Za-z][A-Za-z0-9_']*)\s*=\s*(\{[^}]*\}|\d+)\s*(?:,|$)")


def parse_assignment(text: str | None) -> dict[str, Any]:
    """``"x=0,X={0,2}"`` -> ``{"x": 0, "X": frozenset({0, 2})}``."""
    out: dict[str, Any] = {}
    if not text:
        return out
    pos = 0
    while pos < len(text):
        m = _ASSIGN.match(text, pos)
        if not m:
            raise UsageError(f"bad assignment near {text[pos:]!r}; expected x=3,X={{0,2}}")
        name, val = m.group(1), m.group(2)
        if val.startswith("{"):
            if not is_second_order(name):
                raise UsageError(f"{name} is first-order and takes a single position")
            inner = val[1:-1].strip()
            out[name] = frozenset(int(p) for p in inner.split(",")) if inner else frozenset()
        else:
            if is_second_order(name):
                raise UsageError(f"{name} is second-order and takes a set like {{0,2}}")
            out[name] = int(val)
        pos = m.end()
    return out


def load_formula(path_or_text: str, is_file: bool, structure_override: str | None = None, warn=None):
    """Returns ``(formula, structure, alphabet, aliases)``."""
    if is_file:
        with open(path_or_text, encoding="utf-8") as fh:
            ff = read_formula_file(fh.read())
    else:
        ff = read_formula_file(path_or_text)
    spec = ff.structure
    if structure_override:
        if spec and spec != structure_override and warn:
            warn(f"warning: --structure {structure_override} overrides the file header ({spec})")
        spec = structure_override
    if not spec:
        raise UsageError("no structure given (use --structure or a '# structure:' header)")
    s = parse_structure(spec)
    f = parse(ff.text, s, alphabet=ff.alphabet or None, aliases=ff.aliases)
    return f, s, ff.alphabet or None, ff.aliases


# --- automaton JSON -----------------------------------------------------------------------


def _hashable(x):
    if isinstance(x, list):
        return tuple(_hashable(y) for y in x)
    return x


def _jsonable(x):
    if isinstance(x, tuple):
        return [_jsonable(y) for y in x]
    if isinstance(x, frozenset):
        return [_jsonable(y) for y in canonical_sorted(x)]
    return x


def _letter_from_json(x, extended: bool):
    if extended:
        if not (isinstance(x, list) and len(x) == 2 and isinstance(x[1], list)):
            raise StructuralError(f"extended letters are written [letter, [marked variables]], got {x!r}")
        return (x[0], tuple(sorted(x[1])))
    return _hashable(x)


def _weight_from_json(x, s):
    if isinstance(x, str):
        return s.coerce(parse_weight(x)), "element"
    if isinstance(x, dict) and "multiset" in x:
        counts = {}
        for lit, c in x["multiset"]:
            m = s.coerce(parse_weight(lit))
            counts[m] = counts.get(m, 0) + int(c)
        return FiniteMultiset(counts), "multiset"
    raise StructuralError(f"bad weight {x!r}")


def _weight_to_json(v):
    if isinstance(v, FiniteMultiset):
        return {"multiset": [[format_weight(m), c] for m, c in v.items()]}
    return format_weight(v)


@dataclass
class AutomatonFile:
    automaton: Any
    structure: Any
    alphabet: list
    variables: list | None = None
    aliases: dict = field(default_factory=dict)


def load_automaton(data: str | dict, structure_override: str | None = None) -> AutomatonFile:
    """Read an automaton (finite-word or Muller) from JSON text or a decoded dict."""
    if isinstance(data, str):
        try:
            data = json.loads(data)
        except json.JSONDecodeError as exc:
            raise UsageError(f"automaton file is not valid JSON: {exc}") from None
    spec = structure_override or data.get("structure")
    if not spec:
        raise UsageError("automaton JSON names no structure")
    s = parse_structure(spec)
    for key in ("alphabet", "states", "initial", "transitions"):
        if key not in data:
            raise StructuralError(f"automaton JSON lacks {key!r}")
    base = [_hashable(x) for x in data["alphabet"]]
    variables = data.get("variables")
    extended = variables is not None
    alphabet = extended_alphabet(base, variables) if extended else base
    states = [_hashable(q) for q in data["states"]]
    initial = [_hashable(q) for q in data["initial"]]
    weights, kinds = {}, set()
    for tr in data["transitions"]:
        t = (_hashable(tr["from"]), _letter_from_json(tr["letter"], extended), _hashable(tr["to"]))
        if t in weights:
            raise StructuralError(f"duplicate transition {t!r}")
        weights[t], kind = _weight_from_json(tr["weight"], s)
        kinds.add(kind)
    aliases = dict(data.get("aliases", {}))
    if "muller" in data:
        muller = [[_hashable(q) for q in S] for S in data["muller"]]
        a = MullerMwa(alphabet, states, initial, muller, weights)
    else:
        if "final" not in data:
            raise StructuralError("automaton JSON needs 'final' or 'muller'")
        final = [_hashable(q) for q in data["final"]]
        a = Mwa(alphabet, states, initial, final, weights, kind=kinds.pop() if len(kinds) == 1 else None)
    return AutomatonFile(a, s, base, variables, aliases)


def automaton_to_json(a, structure, alphabet: Sequence | None = None, variables: Sequence[str] | None = None,
                      aliases: Mapping | None = None) -> str:
    """Byte-stable JSON rendering."""
    extended = variables is not None
    if alphabet is None:
        alphabet = sorted({x[0] for x in a.alphabet}, key=repr) if extended else list(a.alphabet)
    data: dict[str, Any] = {"structure": structure.name, "alphabet": [_jsonable(x) for x in alphabet]}
    if extended:
        data["variables"] = sorted(variables)
    if aliases:
        data["aliases"] = dict(sorted(aliases.items()))
    data["states"] = [_jsonable(q) for q in a.states]
    data["initial"] = [_jsonable(q) for q in canonical_sorted(a.initial)]
    if isinstance(a, MullerMwa):
        data["muller"] = [[_jsonable(q) for q in canonical_sorted(S)] for S in canonical_sorted(a.muller)]
    else:
        data["final"] = [_jsonable(q) for q in canonical_sorted(a.final)]
    data["transitions"] = [
        {
            "from": _jsonable(p),
            "letter": [x[0], list(x[1])] if extended else _jsonable(x),
            "to": _jsonable(q),
            "weight": _weight_to_json(a.weights[(p, x, q)]),
        }
        for p, x, q in a.transitions
    ]
    return json.dumps(data, ensure_ascii=False, indent=2) + "\n"


def _dot_escape(s: str) -> str:
    return s.replace("\\", "\\\\").replace('"', '\\"')


def automaton_to_dot(a, name: str = "A") -> str:
    lines = [f'digraph "{_dot_escape(name)}" {{', "  rankdir=LR;"]
    final = getattr(a, "final", frozenset())
    for q in a.states:
        shape = "doublecircle" if q in final else "circle"
        lines.append(f'  "{_dot_escape(str(q))}" [shape={shape}];')
    for i, q in enumerate(canonical_sorted(a.initial)):
        lines.append(f'  "__init{i}" [shape=point];')
        lines.append(f'  "__init{i}" -> "{_dot_escape(str(q))}";')
    for p, x, q in a.transitions:
        letter = x if not isinstance(x, tuple) else f"{x[0]}{{{','.join(x[1])}}}"
        w = a.weights[(p, x, q)]
        wl = format_multiset(w) if isinstance(w, FiniteMultiset) else format_weight(w)
        lines.append(f'  "{_dot_escape(str(p))}" -> "{_dot_escape(str(q))}" [label="{_dot_escape(f"{letter} / {wl}")}"];')
    if isinstance(a, MullerMwa):
        for S in canonical_sorted(a.muller):
            lines.append(f'  // muller set: {", ".join(map(str, canonical_sorted(S)))}')
    lines.append("}")
    return "\n".join(lines) + "\n"


def format_multiset(r: FiniteMultiset) -> str:
    return "{" + ", ".join(f"{format_weight(m)}:{c}" for m, c in r.items()) + "}"


def multiset_to_json(r: FiniteMultiset) -> list:
    return [[format_weight(m), c] for m, c in r.items()]


def format_word(word: Sequence[Hashable]) -> str:
    return "".join(str(x[0]) + ("{" + ",".join(x[1]) + "}" if x[1] else "") if isinstance(x, tuple) else str(x)
                   for x in word)


def assigned_word(word: tuple, assignment: Mapping[str, Any], formula: Formula) -> AssignedWord:
    missing = formula.free - set(assignment)
    if missing:
        raise UsageError(f"free variables {sorted(missing)} need a value (use --assign)")
    return AssignedWord.make(word, assignment, scope=set(assignment) | formula.free)


__all__ = [
    "AutomatonFile",
    "FormulaFile",
    "assigned_word",
    "automaton_to_dot",
    "automaton_to_json",
    "format_multiset",
    "format_word",
    "load_automaton",
    "load_formula",
    "multiset_to_json",
    "parse_assignment",
    "read_formula_file",
    "tokenize_word",
]
