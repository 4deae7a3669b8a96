"""Concrete ASCII syntax: lexer, recursive-descent parser and .sdl files.

Grammar summary (loosest first)::

    formula  := or (('->' | '<->') formula)?        right associative
    or       := and ('|' and)*
    and      := prefix ('&' prefix)*
    prefix   := '!' prefix | '<' program '>' prefix | '[' program ']' prefix | atom
    atom     := term cmp term | p@d(args) | sure(f) | ind(f) | crash(a) | def(t) | (f)
    program  := seq ('++' seq)*
    seq      := star (';' star)*
    star     := patom '*'*
    term     := prod ('+' prod)*
    prod     := unary ('*' unary)*
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Optional

from . import syntax as S
from .syntax import SourceSpan


class ParseError(Exception):
    def __init__(self, message: str, span: Optional[SourceSpan] = None):
        self.message = message
        self.span = span
        where = f" at {span}" if span else ""
        super().__init__(f"{message}{where}")


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    start: int
    end: int


_NUM = r"-?\d+(?:\.\d*)?(?:[eE][-+]?\d+)?"
_TOKEN = re.compile(
    r"(?P<ws>\s+|\#[^\n]*)"
    rf"|(?P<num>{_NUM}(?:/{_NUM})?)"
    r"|(?P<ddt>d/dt\b)"
    r"|(?P<sym>[A-Za-z][A-Za-z0-9]*@(?:\d+|[A-Za-z][A-Za-z0-9]*))"
    r"|(?P<op><->|->|:=|\+\+|>=|<=|[-+*&|!<>=;()\[\]{},])"
)
_IDENT_START = re.compile(r"[A-Za-z][A-Za-z0-9]*")
KEYWORDS = {
    "skip", "fail", "if", "then", "else", "iota", "of", "sure", "ind",
    "crash", "def", "dt", "dW", "dB",
}


def _negate(t: S.Term) -> S.Term:
    if isinstance(t, S.Const):
        return S.Const(-t.value, span=t.span)
    return S.Times(S.Const(-1.0), t, span=t.span)


def _scan_ident(text: str, i: int) -> int:
    m = _IDENT_START.match(text, i)
    if not m:
        return -1
    j = m.end()
    while j < len(text) and text[j] == "_":
        if text.startswith("_t", j) and not (j + 2 < len(text) and (text[j + 2].isalnum())):
            j += 2
        elif text.startswith("_B[", j):
            k = _scan_ident(text, j + 3)
            if k < 0 or k >= len(text) or text[k] != "]":
                return -1
            j = k + 1
        else:
            return -1
    return j


def tokenize(text: str) -> list[Token]:
    out: list[Token] = []
    i = 0
    while i < len(text):
        m = _TOKEN.match(text, i)
        # identifiers (with subscripts) are scanned by hand
        if (m is None or m.lastgroup is None) or (
            m.lastgroup not in ("ws", "num", "ddt", "sym", "op")
        ):
            m = None
        if m is not None and m.lastgroup == "ws":
            i = m.end()
            continue
        if m is not None and m.lastgroup in ("num", "ddt", "sym", "op"):
            kind = m.lastgroup
            tok = m.group(0)
            if kind == "op":
                kind = tok
            out.append(Token(kind, tok, i, m.end()))
            i = m.end()
            continue
        j = _scan_ident(text, i)
        if j < 0:
            raise ParseError(f"unexpected character {text[i]!r}", _span(text, i, i + 1))
        word = text[i:j]
        out.append(Token(word if word in KEYWORDS else "ident", word, i, j))
        i = j
    out.append(Token("eof", "", len(text), len(text)))
    return out


def _span(text: str, start: int, end: int) -> SourceSpan:
    line = text.count("\n", 0, start) + 1
    col = start - (text.rfind("\n", 0, start) + 1) + 1
    return SourceSpan(start, end, line, col)


def parse_number(text: str) -> float:
    if "/" in text:
        p, q = text.split("/")
        q_val = Fraction(q)
        if q_val == 0:
            raise ValueError("zero denominator")
        return float(Fraction(p) / q_val)
    return float(text)


_CMP = {">=", "<=", "=", "<", ">"}
_TERM_START = {"-", "num", "ident", "sym", "ddt", "dB", "iota", "("}
_DIAMOND = re.compile(r"d(\d+)$")
_MARKER = re.compile(r"o(\d+)$")


class _Backtrack(Exception):
    pass


class Parser:
    """Recursive-descent parser over a token list.

    ``marker_scope`` enables ``oI`` marker identifiers while parsing a
    substitution replacement.
    """

    def __init__(self, text: str):
        self.text = text
        self.toks = tokenize(text)
        self.pos = 0
        self.iotas: list[tuple[int, int]] = []
        self.marker_scope: Optional[tuple[int, str, str, int]] = None
        self._cmp_memo: dict[int, object] = {}

    # ------------------------------------------------------------ utils
    @property
    def tok(self) -> Token:
        return self.toks[self.pos]

    def peek(self, k: int = 1) -> Token:
        return self.toks[min(self.pos + k, len(self.toks) - 1)]

    def span_from(self, start: int) -> SourceSpan:
        end = self.toks[self.pos - 1].end if self.pos else start
        return _span(self.text, start, max(end, start))

    def error(self, message: str, tok: Optional[Token] = None) -> ParseError:
        tok = tok or self.tok
        return ParseError(message, _span(self.text, tok.start, max(tok.end, tok.start + 1)))

    def expect(self, kind: str) -> Token:
        if self.tok.kind != kind:
            shown = self.tok.text or "end of input"
            raise self.error(f"expected {kind!r}, found {shown!r}")
        t = self.tok
        self.pos += 1
        return t

    def accept(self, kind: str) -> Optional[Token]:
        if self.tok.kind == kind:
            t = self.tok
            self.pos += 1
            return t
        return None

    def finish(self):
        if self.tok.kind != "eof":
            raise self.error(f"unexpected {self.tok.text!r}")

    # ------------------------------------------------------------ terms
    def term(self, first: Optional[S.Term] = None) -> S.Term:
        start = self.tok.start
        left = self.product(first)
        while True:
            if self.tok.kind == "+":
                self.pos += 1
                right = self.product()
            elif self.tok.kind == "-":
                # a - b is sugar for a + -1*b
                self.pos += 1
                right = _negate(self.product())
            elif self.tok.kind == "num" and self.tok.text.startswith("-"):
                right = self.product()
            else:
                return left
            left = S.Plus(left, right, span=self.span_from(start))

    def product(self, first: Optional[S.Term] = None) -> S.Term:
        start = self.tok.start
        left = first if first is not None else self.unary()
        while self.tok.kind == "*" and self.peek().kind in _TERM_START:
            self.pos += 1
            right = self.unary()
            left = S.Times(left, right, span=self.span_from(start))
        return left

    def unary(self) -> S.Term:
        t = self.tok
        start = t.start
        if t.kind == "num":
            self.pos += 1
            try:
                return S.Const(parse_number(t.text), span=self.span_from(start))
            except (ValueError, ZeroDivisionError):
                raise self.error(f"bad numeral {t.text!r}", t) from None
        if t.kind == "ident":
            self.pos += 1
            return self._name_term(t.text, start)
        if t.kind == "-":
            self.pos += 1
            return _negate(self.unary())
        if t.kind == "sym":
            self.pos += 1
            name, arity, args = self._symbol_app(t)
            return S.Func(name, args, span=self.span_from(start))
        if t.kind == "ddt":
            self.pos += 1
            self.expect("(")
            arg = self.term()
            self.expect(")")
            return S.Dt(arg, span=self.span_from(start))
        if t.kind == "dB":
            self.pos += 1
            self.expect("[")
            idx = self.expect("ident").text
            self.expect("]")
            self.expect("(")
            arg = self.term()
            self.expect(")")
            return S.DB(idx, arg, span=self.span_from(start))
        if t.kind == "iota":
            return self._iota()
        if t.kind == "(":
            self.pos += 1
            inner = self.term()
            self.expect(")")
            return inner
        raise self.error(f"expected a term, found {t.text or 'end of input'!r}")

    def _name_term(self, name: str, start: int) -> S.Term:
        span = self.span_from(start)
        m = _DIAMOND.match(name)
        if m and self.iotas:
            tag, arity = self.iotas[-1]
            n = int(m.group(1))
            if 1 <= n <= arity:
                return S.Diamond(tag, n, span=span)
        m = _MARKER.match(name)
        if m and self.marker_scope is not None:
            owner, kind, symbol, arity = self.marker_scope
            i = int(m.group(1))
            if arity >= 1 and 1 <= i <= arity:
                return S.Marker(owner, kind, symbol, arity, i, span=span)
        return S.Var(name, span=span)

    def _symbol_app(self, t: Token):
        name, arity_text = t.text.split("@")
        if not arity_text.isdigit():
            raise self.error(f"{t.text!r} is a program symbol, not a function", t)
        arity = int(arity_text)
        args: list[S.Term] = []
        if arity > 0:
            self.expect("(")
            args.append(self.term())
            while self.accept(","):
                args.append(self.term())
            self.expect(")")
            if len(args) != arity:
                raise self.error(f"{t.text} expects {arity} arguments, got {len(args)}", t)
        return name, arity, tuple(args)

    def _iota(self) -> S.Term:
        start = self.tok.start
        self.expect("iota")
        idx = int(self.expect("num").text)
        self.expect("of")
        arity = int(self.expect("num").text)
        if arity < 1 or not 1 <= idx <= arity:
            raise self.error("ι index out of range")
        tag = S.fresh_tag()
        self.expect("{")
        self.iotas.append((tag, arity))
        try:
            body = self.formula()
        finally:
            self.iotas.pop()
        self.expect("}")
        return S.Iota(idx, arity, body, tag, span=self.span_from(start))

    # --------------------------------------------------------- formulas
    def formula(self) -> S.Formula:
        start = self.tok.start
        left = self.disj()
        if self.tok.kind in ("->", "<->"):
            op = self.tok.kind
            self.pos += 1
            right = self.formula()
            cls = S.Implies if op == "->" else S.Iff
            return cls(left, right, span=self.span_from(start))
        return left

    def disj(self) -> S.Formula:
        start = self.tok.start
        left = self.conj()
        while self.accept("|"):
            left = S.Or(left, self.conj(), span=self.span_from(start))
        return left

    def conj(self) -> S.Formula:
        start = self.tok.start
        left = self.prefix()
        while self.accept("&"):
            left = S.And(left, self.prefix(), span=self.span_from(start))
        return left

    def prefix(self) -> S.Formula:
        t = self.tok
        start = t.start
        if t.kind == "!":
            self.pos += 1
            return S.Not(self.prefix(), span=self.span_from(start))
        if t.kind == "<":
            self.pos += 1
            prog = self.program()
            self.expect(">")
            body = self.prefix()
            return S.Modal(prog, body, span=self.span_from(start))
        if t.kind == "[":
            self.pos += 1
            prog = self.program()
            self.expect("]")
            body = self.prefix()
            return S.Box(prog, body, span=self.span_from(start))
        return self.atom()

    def atom(self) -> S.Formula:
        t = self.tok
        start = t.start
        if t.kind in ("sure", "ind"):
            self.pos += 1
            self.expect("(")
            arg = self.formula()
            self.expect(")")
            cls = S.Sure if t.kind == "sure" else S.Ind
            return cls(arg, span=self.span_from(start))
        if t.kind == "crash":
            self.pos += 1
            self.expect("(")
            prog = self.program()
            self.expect(")")
            return S.Crash(prog, span=self.span_from(start))
        if t.kind == "def" and self.peek().kind == "(":
            self.pos += 1
            self.expect("(")
            arg = self.term()
            self.expect(")")
            return S.Defined(arg, span=self.span_from(start))
        if t.kind == "(":
            saved = self.pos
            try:
                return self._comparison_memo()
            except ParseError:
                self.pos = saved
            self.pos += 1
            inner = self.formula()
            self.expect(")")
            return inner
        if t.kind == "sym" and t.text.split("@")[1].isdigit():
            self.pos += 1
            name, arity, args = self._symbol_app(t)
            if self.tok.kind in _CMP or self.tok.kind in ("+", "*"):
                first = S.Func(name, args, span=self.span_from(start))
                return self._comparison_rest(self.term(first), start)
            return S.Pred(name, args, span=self.span_from(start))
        return self._comparison()

    def _comparison_memo(self) -> S.Formula:
        key = self.pos
        hit = self._cmp_memo.get(key)
        if isinstance(hit, ParseError):
            raise hit
        if hit is not None:
            node, end = hit
            self.pos = end
            return node
        try:
            node = self._comparison()
        except ParseError as e:
            self._cmp_memo[key] = e
            raise
        self._cmp_memo[key] = (node, self.pos)
        return node

    def _comparison(self) -> S.Formula:
        start = self.tok.start
        left = self.term()
        return self._comparison_rest(left, start)

    def _comparison_rest(self, left: S.Term, start: int) -> S.Formula:
        op = self.tok.kind
        if op not in _CMP:
            raise self.error(f"expected a comparison, found {self.tok.text or 'end of input'!r}")
        self.pos += 1
        right = self.term()
        cls = {">=": S.Geq, "<=": S.Leq, "=": S.Eq, "<": S.Lt, ">": S.Gt}[op]
        return cls(left, right, span=self.span_from(start))

    # --------------------------------------------------------- programs
    def program(self, allow_seq: bool = True) -> S.Program:
        start = self.tok.start
        left = self.seq(allow_seq)
        while self.accept("++"):
            left = S.Choice(left, self.seq(allow_seq), span=self.span_from(start))
        return left

    def seq(self, allow_seq: bool = True) -> S.Program:
        start = self.tok.start
        left = self.starred()
        while allow_seq and self.accept(";"):
            left = S.Seq(left, self.starred(), span=self.span_from(start))
        return left

    def starred(self) -> S.Program:
        start = self.tok.start
        p = self.patom()
        while self.accept("*"):
            p = S.Star(p, span=self.span_from(start))
        return p

    def patom(self) -> S.Program:
        t = self.tok
        start = t.start
        if t.kind == "skip":
            self.pos += 1
            return S.Skip(span=self.span_from(start))
        if t.kind == "fail":
            self.pos += 1
            return S.Fail(span=self.span_from(start))
        if t.kind == "(":
            self.pos += 1
            p = self.program()
            self.expect(")")
            return p
        if t.kind == "if":
            self.pos += 1
            cond = self.formula()
            self.expect("then")
            a = self.program()
            self.expect("else")
            b = self.program()
            return S.If(cond, a, b, span=self.span_from(start))
        if t.kind == "sym":
            name, tail = t.text.split("@")
            if tail.isdigit():
                raise self.error(f"{t.text!r} is a function symbol, not a program")
            self.pos += 1
            return S.ProgSym(tail, span=self.span_from(start))
        if t.kind == "ident":
            nxt = self.peek()
            if nxt.kind == ":=":
                self.pos += 2
                if self.tok.kind == "*" and self.peek().kind not in _TERM_START:
                    self.pos += 1
                    return S.Random(t.text, span=self.span_from(start))
                term = self.term()
                return S.Assign(t.text, term, span=self.span_from(start))
            if nxt.kind == "=" and t.text.startswith("d") and len(t.text) > 1:
                return self._sde()
        raise self.error(f"expected a program, found {t.text or 'end of input'!r}")

    def _sde(self) -> S.Program:
        start = self.tok.start
        eqs = []
        while True:
            head = self.expect("ident")
            var = head.text[1:]
            if not S.is_variable_name(var):
                raise self.error(f"bad SDE variable in {head.text!r}", head)
            self.expect("=")
            drift = self.term()
            self.expect("dt")
            noise: list[tuple[Optional[str], S.Term, Token]] = []
            while self.accept("+"):
                tok = self.tok
                s = self.term()
                self.expect("dW")
                coord = None
                if self.accept("["):
                    coord = self.expect("ident").text
                    self.expect("]")
                noise.append((coord, s, tok))
            eqs.append((var, drift, noise))
            if not self.accept(","):
                break
        self.expect("&")
        boundary = self.formula()
        names = tuple(v for v, _, _ in eqs)
        if len(set(names)) != len(names):
            raise ParseError("duplicate SDE variable", self.span_from(start))
        rows = []
        for var, _, noise in eqs:
            row: dict[str, S.Term] = {}
            for coord, s, tok in noise:
                coord = coord or var
                if coord not in names:
                    raise self.error(f"dW[{coord}] names no SDE variable", tok)
                if coord in row:
                    raise self.error(f"duplicate dW[{coord}] entry", tok)
                row[coord] = s
            rows.append(tuple(row.get(c, S.Const(0)) for c in names))
        return S.SDE(
            names, tuple(d for _, d, _ in eqs), tuple(rows), boundary, span=self.span_from(start)
        )


def _checked(node, text):
    node = S.desugar(node)
    problems = S.well_formed(node)
    if problems:
        span = getattr(node, "span", None) or _span(text, 0, len(text))
        raise ParseError(f"ill-formed: {problems[0]}", span)
    return node


def parse_term(text: str) -> S.Term:
    p = Parser(text)
    t = p.term()
    p.finish()
    return _checked(t, text)


def parse_program(text: str) -> S.Program:
    p = Parser(text)
    a = p.program()
    p.finish()
    return _checked(a, text)


def parse_formula(text: str) -> S.Formula:
    p = Parser(text)
    f = p.formula()
    p.finish()
    return _checked(f, text)


def parse(text: str, kind: str = "formula") -> S.Node:
    return {"term": parse_term, "prog": parse_program, "program": parse_program,
            "form": parse_formula, "formula": parse_formula}[kind](text)


# ------------------------------------------------------------ .sdl files


@dataclass(frozen=True)
class Declaration:
    kind: str
    name: str
    node: S.Node
    line: int


_DECL = re.compile(r"\s*(term|prog|form)\s+([A-Za-z][A-Za-z0-9_]*)\s*=\s*(.*)$")


def parse_sdl(text: str) -> list[Declaration]:
    """Parse a .sdl file: one ``term|prog|form NAME = ...`` per line."""
    decls: list[Declaration] = []
    seen = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0] if not raw.lstrip().startswith("#") else ""
        if not line.strip():
            continue
        m = _DECL.match(line)
        if not m:
            raise ParseError("expected 'term|prog|form NAME = ...'", SourceSpan(0, 0, lineno, 1))
        kind, name, body = m.groups()
        if name in seen:
            raise ParseError(f"duplicate declaration {name!r}", SourceSpan(0, 0, lineno, 1))
        seen.add(name)
        try:
            node = parse(body, kind)
        except ParseError as e:
            col = (e.span.column if e.span else 1) + m.start(3)
            raise ParseError(e.message, SourceSpan(0, 0, lineno, col)) from None
        decls.append(Declaration(kind, name, node, lineno))
    return decls


def load_sdl(path: str | Path) -> dict[str, Declaration]:
    return {d.name: d for d in parse_sdl(Path(path).read_text())}
