"""Proof scripts (``.sdlp``) and the checker.

One step per line; ``#`` starts a comment, and a line with unbalanced
braces continues onto the next. Steps are numbered from 1::

    axiom skip subst { phi@0 -> x >= 0 }
    axiom assign subst { f@0 -> 1 ; p@1 -> o1 >= 0 } rename { x -> z }
    rule mp 1 2
    rule g 1 prog { x := 1 }
    rule iff-sub 1 form { <skip> x >= 0 & y >= 0 } at [1]
    lemma skip-left-x
    expect <skip> x >= 0 <-> x >= 0

``expect`` is not a step; it asserts the conclusion of the previous one.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Optional, Union

from .. import syntax as S
from ..parser import ParseError, parse_formula, parse_program
from ..spade import atoms, parse_spade
from ..substitution import Substitution, parse_substitution, symbol_kinds
from .axioms import PATHWISE, lookup
from .rules import PROB, Judgment, RuleError, apply_rule, instantiate, key


class ScriptError(Exception):
    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


@dataclass(frozen=True)
class Step:
    kind: str  # axiom | rule | lemma
    name: str
    line: int
    text: str
    premises: tuple[int, ...] = ()
    params: Mapping[str, object] = field(default_factory=dict)
    expect: Optional[tuple[int, str]] = None


@dataclass(frozen=True)
class ProofScript:
    steps: tuple[Step, ...]
    source: str = ""


# --------------------------------------------------------------- parsing

_BLOCK = re.compile(r"(subst|rename|prog|form)\s*\{")
_AT = re.compile(r"at\s*\[([^\]]*)\]")


def _logical_lines(text: str):
    buf, start, depth = [], 0, 0
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line and not buf:
            continue
        if not buf:
            start = n
        buf.append(line)
        depth += line.count("{") - line.count("}")
        if depth <= 0:
            if depth < 0:
                raise ScriptError("unbalanced '}'", n)
            yield start, " ".join(x for x in buf if x)
            buf, depth = [], 0
    if buf:
        raise ScriptError("unterminated '{'", start)


def _blocks(rest: str, line: int) -> tuple[str, dict]:
    """Split off ``name { ... }`` blocks; returns the remaining text."""
    found: dict[str, str] = {}
    out = []
    i = 0
    while i < len(rest):
        m = _BLOCK.search(rest, i)
        if not m:
            out.append(rest[i:])
            break
        out.append(rest[i : m.start()])
        depth, j = 1, m.end()
        while j < len(rest) and depth:
            depth += {"{": 1, "}": -1}.get(rest[j], 0)
            j += 1
        name = m.group(1)
        if name in found:
            raise ScriptError(f"duplicate {name} block", line)
        body = rest[m.end() : j - 1].strip()
        found[name] = f"subst {{ {body} }}" if name == "subst" else body
        i = j
    return " ".join(x.strip() for x in out if x.strip()), found


def _rename(text: str, line: int) -> dict[str, str]:
    out: dict[str, str] = {}
    for part in filter(None, (p.strip() for p in text.split(";"))):
        m = re.fullmatch(r"([A-Za-z][A-Za-z0-9]*)\s*->\s*([A-Za-z][A-Za-z0-9]*)", part)
        if not m:
            raise ScriptError(f"bad renaming {part!r}", line)
        if m.group(1) in out:
            raise ScriptError(f"variable {m.group(1)} renamed twice", line)
        out[m.group(1)] = m.group(2)
    return out


def _parse_payload(name: str, text: str, line: int, kinds=None):
    try:
        if name == "subst":
            return parse_substitution(text, kinds)
        if name == "prog":
            return parse_program(text)
        if name == "form":
            return parse_formula(text)
        if name == "rename":
            return _rename(text, line)
    except ParseError as e:
        raise ScriptError(f"in {name} block: {e}", line) from None
    raise ScriptError(f"unknown block {name}", line)


def _kinds_of(f) -> dict:
    if isinstance(f, S.Node):
        return symbol_kinds(f)
    out = {}
    for a in atoms(f):
        out.update(symbol_kinds(a))
    from ..spade import PSym

    def syms(n):
        if isinstance(n, PSym):
            yield n.name
        for fname in getattr(n, "__dataclass_fields__", {}):
            v = getattr(n, fname)
            if not isinstance(v, (S.Node, str, float)):
                yield from syms(v)

    for s in syms(f):
        out[(s, 0)] = "f"
    return out


def parse_script(text: str) -> ProofScript:
    steps: list[Step] = []
    for line, content in _logical_lines(text):
        word, _, rest = content.partition(" ")
        rest = rest.strip()
        if word == "expect":
            if not steps:
                raise ScriptError("expect before any step", line)
            if steps[-1].expect is not None:
                raise ScriptError("second expect for the same step", line)
            if not rest:
                raise ScriptError("expect needs a formula", line)
            last = steps[-1]
            steps[-1] = Step(last.kind, last.name, last.line, last.text, last.premises, last.params, (line, rest))
            continue
        if word not in ("axiom", "rule", "lemma"):
            raise ScriptError(f"unknown command {word!r}", line)
        remaining, blocks = _blocks(rest, line)
        at = _AT.search(remaining)
        params: dict[str, object] = {}
        if at:
            try:
                params["at"] = tuple(int(x) for x in at.group(1).replace(",", " ").split())
            except ValueError:
                raise ScriptError("occurrence list must hold integers", line) from None
            remaining = (remaining[: at.start()] + remaining[at.end() :]).strip()
        parts = remaining.split()
        if not parts:
            raise ScriptError(f"{word} needs a name", line)
        name, args = parts[0], parts[1:]
        premises: tuple[int, ...] = ()
        if word == "axiom":
            if args:
                raise ScriptError(f"unexpected {' '.join(args)!r}", line)
            try:
                kinds = _kinds_of(lookup(name).formula)
            except KeyError:
                kinds = {}  # reported by the checker at this step
            for bname, btext in blocks.items():
                if bname not in ("subst", "rename"):
                    raise ScriptError(f"axiom takes subst and rename blocks, not {bname}", line)
                params[bname] = _parse_payload(bname, btext, line, kinds)
        elif word == "rule":
            try:
                premises = tuple(int(a) for a in args)
            except ValueError:
                raise ScriptError(f"premise indices must be integers: {' '.join(args)}", line) from None
            for p in premises:
                if not 1 <= p <= len(steps):
                    raise ScriptError(f"premise {p} does not refer to an earlier step", line)
            for bname, btext in blocks.items():
                # substitutions for rules are re-read against the premise at check time
                params[bname] = btext if bname == "subst" else _parse_payload(bname, btext, line)
                if bname == "subst":
                    _parse_payload(bname, btext, line)
        else:
            if args or blocks:
                raise ScriptError("lemma takes only a name", line)
        steps.append(Step(word, name, line, content, premises, params))
    return ProofScript(tuple(steps), text)


# -------------------------------------------------------------- checking


@dataclass
class Verdict:
    accepted: bool
    judgments: list[Judgment]
    obligations: list[str]
    lines: list[str]
    failed_step: Optional[int] = None
    message: str = ""
    clash: Optional[object] = None

    @property
    def final(self) -> Optional[Judgment]:
        return self.judgments[-1] if self.judgments else None

    def report(self) -> str:
        return "\n".join(self.lines) + "\n"


def _check_expect(j: Judgment, text: str):
    try:
        want = S.desugar(parse_formula(text)) if j.kind == PATHWISE else parse_spade(text)
    except ParseError as e:
        raise RuleError(f"expect does not parse: {e}") from None
    if key(want) != key(j.formula):
        raise RuleError(f"expected {text}, derived {j}")


class LemmaLibrary:
    """Named lemmas: either given judgments or ``NAME.sdlp`` files in a
    directory, checked on first use."""

    def __init__(self, lemmas: Optional[Mapping[str, Judgment]] = None, directory: Optional[Union[str, Path]] = None):
        self.fixed = dict(lemmas or {})
        self.directory = Path(directory) if directory is not None else None
        self.active: list[str] = []

    def get(self, name: str) -> Judgment:
        if name in self.fixed:
            return self.fixed[name]
        if self.directory is None:
            raise RuleError(f"unknown lemma {name!r}")
        path = self.directory / f"{name}.sdlp"
        if not path.is_file():
            raise RuleError(f"unknown lemma {name!r}")
        if name in self.active:
            raise RuleError(f"lemma {name} depends on itself")
        self.active.append(name)
        try:
            verdict = check_proof(parse_script(path.read_text()), self)
        except ScriptError as e:
            raise RuleError(f"lemma {name}: {e}") from None
        finally:
            self.active.pop()
        if not verdict.accepted:
            raise RuleError(f"lemma {name} is not proved: {verdict.message}")
        self.fixed[name] = verdict.final
        return verdict.final


def _kinds_for(j: Judgment) -> dict:
    return _kinds_of(j.formula)


def check_proof(script: ProofScript, lemmas: Optional[LemmaLibrary] = None) -> Verdict:
    lemmas = lemmas if lemmas is not None else LemmaLibrary()
    judgments: list[Judgment] = []
    lines: list[str] = []
    for n, step in enumerate(script.steps, 1):
        try:
            if step.kind == "axiom":
                j = instantiate(step.name, step.params.get("subst"), step.params.get("rename"))
            elif step.kind == "lemma":
                j = lemmas.get(step.name)
            else:
                premises = [judgments[i - 1] for i in step.premises]
                params = dict(step.params)
                if "subst" in params:
                    if len(premises) != 1:
                        raise RuleError("a substitution rule takes exactly one premise")
                    params["subst"] = _subst_for(params["subst"], premises[0])
                j = apply_rule(step.name, premises, params)
            if step.expect is not None:
                _check_expect(j, step.expect[1])
        except RuleError as e:
            lines.append(f"REJECTED at step {n} (line {step.line}): {e}")
            obligations = _collect(judgments)
            return Verdict(False, judgments, obligations, lines, n, str(e), e.clash)
        judgments.append(j)
        lines.append(f"{n:>3}  {step.kind} {step.name}{_refs(step)}  |- {j}")
        for o in j.obligations:
            if o not in _collect(judgments[:-1]):
                lines.append(f"     obligation: {o}")
    obligations = _collect(judgments)
    count = len(obligations)
    lines.append(f"ACCEPTED ({len(judgments)} steps, {count} open obligation{'s' if count != 1 else ''})")
    return Verdict(True, judgments, obligations, lines)


def _refs(step: Step) -> str:
    return " " + " ".join(map(str, step.premises)) if step.premises else ""


def _subst_for(text: str, premise: Judgment) -> Substitution:
    try:
        return parse_substitution(text, _kinds_for(premise))
    except ParseError as e:
        raise RuleError(f"substitution does not parse: {e}") from None


def _collect(judgments: list[Judgment]) -> list[str]:
    out: list[str] = []
    for j in judgments:
        for o in j.obligations:
            if o not in out:
                out.append(o)
    return out


def check_file(path: Union[str, Path], lemma_dir: Optional[Union[str, Path]] = None) -> Verdict:
    path = Path(path)
    library = LemmaLibrary(directory=lemma_dir if lemma_dir is not None else path.parent)
    return check_proof(parse_script(path.read_text()), library)
