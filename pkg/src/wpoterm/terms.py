"""First-order terms, rewrite rules, and the legacy TPDB ``.trs`` text format.

A term is either a variable or an application of a function symbol to a
fixed number of argument terms.  Variable names and symbol names live in
disjoint name spaces within one system: an identifier listed in the
``(VAR ...)`` block is a variable everywhere, every other identifier is a
function symbol whose arity is inferred from its first occurrence.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Mapping, Union


class ParseError(ValueError):
    """Syntax error in TRS input, carrying a 1-based line/column position."""

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{line}:{column}: {message}")
        self.line = line
        self.column = column


class TRSError(ValueError):
    """Violation of a rule or signature invariant."""


@dataclass(frozen=True)
class Var:
    name: str

    def __post_init__(self):
        if not self.name:
            raise TRSError("variable name must be nonempty")

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class App:
    symbol: str
    args: tuple = ()

    def __str__(self):
        if not self.args:
            return self.symbol
        return f"{self.symbol}({','.join(map(str, self.args))})"


Term = Union[Var, App]

#: Map from function symbol to its arity.
Signature = Mapping[str, int]


def is_var(t: Term) -> bool:
    return isinstance(t, Var)


def variables(t: Term) -> set:
    """The set of variable names occurring in ``t``."""
    out = set()
    stack = [t]
    while stack:
        u = stack.pop()
        if isinstance(u, Var):
            out.add(u.name)
        else:
            stack.extend(u.args)
    return out


def subterms(t: Term) -> Iterator[Term]:
    """All subterms of ``t``, including ``t`` itself, in preorder."""
    stack = [t]
    while stack:
        u = stack.pop()
        yield u
        if isinstance(u, App):
            stack.extend(reversed(u.args))


def term_size(t: Term) -> int:
    return sum(1 for _ in subterms(t))


def substitute(t: Term, theta: Mapping[str, Term]) -> Term:
    """Homomorphic replacement of variables; unmapped variables stay as is."""
    if isinstance(t, Var):
        return theta.get(t.name, t)
    if not t.args:
        return t
    return App(t.symbol, tuple(substitute(a, theta) for a in t.args))


def var_count(t: Term, x: str) -> int:
    """Number of occurrences of the variable named ``x`` in ``t``."""
    if isinstance(t, Var):
        return 1 if t.name == x else 0
    return sum(var_count(a, x) for a in t.args)


@dataclass(frozen=True)
class Rule:
    lhs: Term
    rhs: Term

    def __post_init__(self):
        if isinstance(self.lhs, Var):
            raise TRSError(f"variable left-hand side: {self.lhs}")
        extra = variables(self.rhs) - variables(self.lhs)
        if extra:
            raise TRSError(
                f"right-hand side variable(s) {sorted(extra)} not in left-hand side"
            )

    def __str__(self):
        return f"{self.lhs} -> {self.rhs}"


def is_duplicating(rule: Rule) -> bool:
    """True iff some variable occurs more often in the rhs than in the lhs."""
    return any(
        var_count(rule.rhs, x) > var_count(rule.lhs, x)
        for x in variables(rule.rhs)
    )


@dataclass(frozen=True)
class TRS:
    signature: Mapping[str, int]
    rules: tuple = ()
    variables: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        for rule in self.rules:
            for t in (rule.lhs, rule.rhs):
                for u in subterms(t):
                    if isinstance(u, App):
                        if u.symbol not in self.signature:
                            raise TRSError(f"undeclared symbol: {u.symbol}")
                        if self.signature[u.symbol] != len(u.args):
                            raise TRSError(
                                f"arity mismatch for {u.symbol}: declared "
                                f"{self.signature[u.symbol]}, used with {len(u.args)}"
                            )
                    elif u.name in self.signature:
                        raise TRSError(
                            f"name used both as variable and symbol: {u.name}"
                        )

    def defined_symbols(self) -> set:
        return {r.lhs.symbol for r in self.rules}


# ---------------------------------------------------------------------------
# TPDB legacy format
# ---------------------------------------------------------------------------

_PUNCT = "(),"


@dataclass(frozen=True)
class _Token:
    text: str
    line: int
    column: int


def _tokenize(text: str):
    tokens = []
    line, col = 1, 1
    i = 0
    n = len(text)
    while i < n:
        c = text[i]
        if c == "\n":
            line += 1
            col = 1
            i += 1
        elif c.isspace():
            col += 1
            i += 1
        elif c in _PUNCT:
            tokens.append(_Token(c, line, col))
            col += 1
            i += 1
        else:
            j = i
            while j < n and not text[j].isspace() and text[j] not in _PUNCT:
                j += 1
            tokens.append(_Token(text[i:j], line, col))
            col += j - i
            i = j
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.pos = 0

    def _error(self, message: str, token: _Token | None = None):
        if token is None:
            if self.tokens:
                last = self.tokens[-1]
                raise ParseError(message, last.line, last.column + len(last.text))
            raise ParseError(message, 1, 1)
        raise ParseError(message, token.line, token.column)

    def peek(self) -> _Token | None:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def next(self, expect: str | None = None) -> _Token:
        tok = self.peek()
        if tok is None:
            self._error(f"unexpected end of input (expected {expect or 'more input'})")
        self.pos += 1
        if expect is not None and tok.text != expect:
            self._error(f"expected '{expect}', found '{tok.text}'", tok)
        return tok

    def parse(self) -> TRS:
        var_names: list[str] = []
        rules_tokens: list[_Token] | None = None
        seen_blocks = set()
        while self.peek() is not None:
            self.next("(")
            head = self.next()
            if head.text in seen_blocks:
                self._error(f"duplicate block: {head.text}", head)
            seen_blocks.add(head.text)
            if head.text == "VAR":
                while (tok := self.peek()) is not None and tok.text != ")":
                    self.next()
                    if tok.text in _PUNCT:
                        self._error(f"bad variable name: '{tok.text}'", tok)
                    if tok.text in var_names:
                        self._error(f"duplicate variable: {tok.text}", tok)
                    var_names.append(tok.text)
                self.next(")")
            elif head.text == "RULES":
                depth = 0
                rules_tokens = []
                while True:
                    tok = self.peek()
                    if tok is None:
                        self._error("unterminated RULES block")
                    if tok.text == "(":
                        depth += 1
                    elif tok.text == ")":
                        if depth == 0:
                            break
                        depth -= 1
                    rules_tokens.append(tok)
                    self.next()
                self.next(")")
            elif head.text == "COMMENT":
                depth = 0
                while True:
                    tok = self.peek()
                    if tok is None:
                        self._error("unterminated COMMENT block")
                    if tok.text == "(":
                        depth += 1
                    elif tok.text == ")":
                        if depth == 0:
                            break
                        depth -= 1
                    self.next()
                self.next(")")
            else:
                self._error(f"unsupported annotation: {head.text}", head)
        if rules_tokens is None:
            self._error("missing RULES block")
        return _RuleParser(var_names, rules_tokens).parse()


class _RuleParser:
    def __init__(self, var_names: list[str], tokens: list[_Token]):
        self.vars = set(var_names)
        self.tokens = tokens
        self.pos = 0
        self.arities: dict[str, int] = {}
        self.first_use: dict[str, _Token] = {}

    def _error(self, message: str, token: _Token | None = None):
        if token is None:
            raise ParseError(message, 0, 0)
        raise ParseError(message, token.line, token.column)

    def peek(self) -> _Token | None:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def next(self) -> _Token:
        tok = self.peek()
        if tok is None:
            last = self.tokens[-1] if self.tokens else _Token("", 1, 1)
            raise ParseError(
                "unexpected end of rule", last.line, last.column + len(last.text)
            )
        self.pos += 1
        return tok

    def parse(self) -> TRS:
        rules = []
        while self.peek() is not None:
            lhs, lhs_tok = self.parse_term()
            arrow = self.next()
            if arrow.text != "->":
                self._error(f"expected '->', found '{arrow.text}'", arrow)
            rhs, _ = self.parse_term()
            if isinstance(lhs, Var):
                self._error(f"variable left-hand side: {lhs.name}", lhs_tok)
            extra = variables(rhs) - variables(lhs)
            if extra:
                self._error(
                    f"right-hand side variable(s) {sorted(extra)} not in "
                    "left-hand side",
                    arrow,
                )
            rules.append(Rule(lhs, rhs))
        return TRS(dict(self.arities), tuple(rules), frozenset(self.vars))

    def parse_term(self):
        tok = self.next()
        name = tok.text
        if name in _PUNCT or name == "->":
            self._error(f"expected a term, found '{name}'", tok)
        nxt = self.peek()
        if name in self.vars:
            if nxt is not None and nxt.text == "(":
                self._error(f"variable applied to arguments: {name}", tok)
            return Var(name), tok
        args = []
        if nxt is not None and nxt.text == "(":
            self.next()
            if (close := self.peek()) is not None and close.text == ")":
                self.next()
            else:
                while True:
                    arg, _ = self.parse_term()
                    args.append(arg)
                    sep = self.next()
                    if sep.text == ")":
                        break
                    if sep.text != ",":
                        self._error(f"expected ',' or ')', found '{sep.text}'", sep)
        arity = len(args)
        if name in self.arities and self.arities[name] != arity:
            first = self.first_use[name]
            self._error(
                f"arity mismatch for {name}: first used with "
                f"{self.arities[name]} argument(s) at {first.line}:{first.column}, "
                f"now {arity}",
                tok,
            )
        if name not in self.arities:
            self.arities[name] = arity
            self.first_use[name] = tok
        return App(name, tuple(args)), tok


def parse_trs(text: str) -> TRS:
    """Parse the legacy TPDB format: ``(VAR ...)``, ``(RULES ...)`` and an
    optional ``(COMMENT ...)`` block; any other block is rejected."""
    return _Parser(text).parse()


def format_term(t: Term) -> str:
    return str(t)


def format_trs(trs: TRS) -> str:
    """Render a TRS back into TPDB text; ``parse_trs`` round-trips it."""
    used = set()
    for rule in trs.rules:
        used |= variables(rule.lhs) | variables(rule.rhs)
    lines = ["(VAR " + " ".join(sorted(used)) + ")" if used else "(VAR )"]
    lines.append("(RULES")
    for rule in trs.rules:
        lines.append(f"  {rule}")
    lines.append(")")
    return "\n".join(lines) + "\n"
