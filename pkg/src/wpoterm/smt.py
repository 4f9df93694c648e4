"""Sorted formula trees, SMT-LIB2 serialization, and the solver driver.

Formulas are immutable trees with identity-based equality (construction
already folds constants, so structural equality is not needed and identity
keeps hashing cheap on shared subtrees).  ``solve`` runs an external
solver process over the serialized script, or falls back to the bundled
bounded-integer solver when no command is configured.
"""

from __future__ import annotations

import shlex
import subprocess
import tempfile
import time
from dataclasses import dataclass
from enum import Enum
from typing import Mapping, Union


class SmtError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class IntConst:
    value: int


@dataclass(frozen=True, eq=False)
class IntVar:
    name: str


@dataclass(frozen=True, eq=False)
class Add:
    args: tuple


@dataclass(frozen=True, eq=False)
class Mul:
    args: tuple


Expr = Union[IntConst, IntVar, Add, Mul]


@dataclass(frozen=True, eq=False)
class BoolConst:
    value: bool


TRUE = BoolConst(True)
FALSE = BoolConst(False)


@dataclass(frozen=True, eq=False)
class BoolVar:
    name: str


@dataclass(frozen=True, eq=False)
class Not:
    arg: "Formula"


@dataclass(frozen=True, eq=False)
class And:
    args: tuple


@dataclass(frozen=True, eq=False)
class Or:
    args: tuple


@dataclass(frozen=True, eq=False)
class Implies:
    lhs: "Formula"
    rhs: "Formula"


@dataclass(frozen=True, eq=False)
class Iff:
    lhs: "Formula"
    rhs: "Formula"


@dataclass(frozen=True, eq=False)
class Ge:
    lhs: Expr
    rhs: Expr


@dataclass(frozen=True, eq=False)
class Gt:
    lhs: Expr
    rhs: Expr


@dataclass(frozen=True, eq=False)
class Eq:
    lhs: Expr
    rhs: Expr


Formula = Union[BoolConst, BoolVar, Not, And, Or, Implies, Iff, Ge, Gt, Eq]

_EXPR_TYPES = (IntConst, IntVar, Add, Mul)


def const(n: int) -> IntConst:
    return IntConst(int(n))


def ivar(name: str) -> IntVar:
    return IntVar(name)


def bvar(name: str) -> BoolVar:
    return BoolVar(name)


def _check_expr(e):
    if not isinstance(e, _EXPR_TYPES):
        raise SmtError(f"expected an integer expression, got {type(e).__name__}")
    return e


def _check_formula(f):
    if isinstance(f, _EXPR_TYPES):
        raise SmtError("expected a formula, got an integer expression")
    return f


def add(*es) -> Expr:
    flat = []
    total = 0
    for e in es:
        _check_expr(e)
        if isinstance(e, IntConst):
            total += e.value
        elif isinstance(e, Add):
            for a in e.args:
                if isinstance(a, IntConst):
                    total += a.value
                else:
                    flat.append(a)
        else:
            flat.append(e)
    if total or not flat:
        flat.append(IntConst(total))
    return flat[0] if len(flat) == 1 else Add(tuple(flat))


def mul(*es) -> Expr:
    flat = []
    scale = 1
    for e in es:
        _check_expr(e)
        if isinstance(e, IntConst):
            scale *= e.value
        elif isinstance(e, Mul):
            for a in e.args:
                if isinstance(a, IntConst):
                    scale *= a.value
                else:
                    flat.append(a)
        else:
            flat.append(e)
    if scale == 0 or not flat:
        return IntConst(scale)
    if scale != 1:
        flat.insert(0, IntConst(scale))
    return flat[0] if len(flat) == 1 else Mul(tuple(flat))


def _atom(ctor, op, lhs: Expr, rhs: Expr):
    _check_expr(lhs)
    _check_expr(rhs)
    if isinstance(lhs, IntConst) and isinstance(rhs, IntConst):
        return BoolConst(op(lhs.value, rhs.value))
    return ctor(lhs, rhs)


def ge(lhs: Expr, rhs: Expr) -> Formula:
    return _atom(Ge, lambda a, b: a >= b, lhs, rhs)


def gt(lhs: Expr, rhs: Expr) -> Formula:
    return _atom(Gt, lambda a, b: a > b, lhs, rhs)


def eq(lhs: Expr, rhs: Expr) -> Formula:
    return _atom(Eq, lambda a, b: a == b, lhs, rhs)


def neg(f: Formula) -> Formula:
    _check_formula(f)
    if isinstance(f, BoolConst):
        return FALSE if f.value else TRUE
    if isinstance(f, Not):
        return f.arg
    return Not(f)


def conj(*fs) -> Formula:
    flat = []
    for f in fs:
        _check_formula(f)
        if isinstance(f, BoolConst):
            if not f.value:
                return FALSE
        elif isinstance(f, And):
            flat.extend(f.args)
        else:
            flat.append(f)
    if not flat:
        return TRUE
    return flat[0] if len(flat) == 1 else And(tuple(flat))


def disj(*fs) -> Formula:
    flat = []
    for f in fs:
        _check_formula(f)
        if isinstance(f, BoolConst):
            if f.value:
                return TRUE
        elif isinstance(f, Or):
            flat.extend(f.args)
        else:
            flat.append(f)
    if not flat:
        return FALSE
    return flat[0] if len(flat) == 1 else Or(tuple(flat))


def implies(lhs: Formula, rhs: Formula) -> Formula:
    _check_formula(lhs)
    _check_formula(rhs)
    if isinstance(lhs, BoolConst):
        return rhs if lhs.value else TRUE
    if isinstance(rhs, BoolConst):
        return TRUE if rhs.value else neg(lhs)
    return Implies(lhs, rhs)


def iff(lhs: Formula, rhs: Formula) -> Formula:
    _check_formula(lhs)
    _check_formula(rhs)
    if isinstance(lhs, BoolConst):
        return rhs if lhs.value else neg(rhs)
    if isinstance(rhs, BoolConst):
        return lhs if rhs.value else neg(lhs)
    return Iff(lhs, rhs)


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------


def _collect_vars(f: Formula):
    ints: set[str] = set()
    bools: set[str] = set()
    seen: set[int] = set()
    stack = [f]
    while stack:
        node = stack.pop()
        if id(node) in seen:
            continue
        seen.add(id(node))
        if isinstance(node, IntVar):
            ints.add(node.name)
        elif isinstance(node, BoolVar):
            bools.add(node.name)
        elif isinstance(node, (Add, Mul, And, Or)):
            stack.extend(node.args)
        elif isinstance(node, Not):
            stack.append(node.arg)
        elif isinstance(node, (Implies, Iff, Ge, Gt, Eq)):
            stack.extend((node.lhs, node.rhs))
    clash = ints & bools
    if clash:
        raise SmtError(f"name used at both sorts: {sorted(clash)}")
    return ints, bools


def _check_linear(f: Formula) -> None:
    seen: set[int] = set()
    stack = [f]
    while stack:
        node = stack.pop()
        if id(node) in seen:
            continue
        seen.add(id(node))
        if isinstance(node, Mul):
            nonconst = [a for a in node.args if not isinstance(a, IntConst)]
            if len(nonconst) > 1:
                raise SmtError("nonlinear product is not allowed under QF_LIA")
            stack.extend(node.args)
        elif isinstance(node, (Add, And, Or)):
            stack.extend(node.args)
        elif isinstance(node, Not):
            stack.append(node.arg)
        elif isinstance(node, (Implies, Iff, Ge, Gt, Eq)):
            stack.extend((node.lhs, node.rhs))


_OPS = {
    Add: "+",
    Mul: "*",
    And: "and",
    Or: "or",
    Implies: "=>",
    Ge: ">=",
    Gt: ">",
    Eq: "=",
    Iff: "=",
}


def _sexpr(node, out: list) -> None:
    if isinstance(node, IntConst):
        out.append(str(node.value) if node.value >= 0 else f"(- {-node.value})")
    elif isinstance(node, (IntVar, BoolVar)):
        out.append(node.name)
    elif isinstance(node, BoolConst):
        out.append("true" if node.value else "false")
    elif isinstance(node, Not):
        out.append("(not ")
        _sexpr(node.arg, out)
        out.append(")")
    elif isinstance(node, (Add, Mul, And, Or)):
        out.append(f"({_OPS[type(node)]}")
        for a in node.args:
            out.append(" ")
            _sexpr(a, out)
        out.append(")")
    else:
        out.append(f"({_OPS[type(node)]} ")
        _sexpr(node.lhs, out)
        out.append(" ")
        _sexpr(node.rhs, out)
        out.append(")")


def to_smtlib(f: Formula, logic: str = "QF_LIA") -> str:
    """Serialize into a complete SMT-LIB2 script with a single assertion.

    Declarations are emitted in sorted order, so equal inputs produce
    byte-identical scripts.
    """
    if logic not in ("QF_LIA", "QF_NIA"):
        raise SmtError(f"unsupported logic: {logic}")
    _check_formula(f)
    if logic == "QF_LIA":
        _check_linear(f)
    ints, bools = _collect_vars(f)
    lines = [f"(set-logic {logic})"]
    for name in sorted(ints):
        lines.append(f"(declare-fun {name} () Int)")
    for name in sorted(bools):
        lines.append(f"(declare-fun {name} () Bool)")
    body: list = []
    _sexpr(f, body)
    lines.append(f"(assert {''.join(body)})")
    lines.append("(check-sat)")
    lines.append("(get-model)")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Evaluation of formulas under a model
# ---------------------------------------------------------------------------


def evaluate(node, model: Mapping[str, object]):
    """Evaluate a formula or expression; missing variables read 0 / false."""
    memo: dict[int, object] = {}

    def go(n):
        key = id(n)
        if key in memo:
            return memo[key]
        if isinstance(n, IntConst):
            v: object = n.value
        elif isinstance(n, IntVar):
            v = int(model.get(n.name, 0))
        elif isinstance(n, BoolConst):
            v = n.value
        elif isinstance(n, BoolVar):
            v = bool(model.get(n.name, False))
        elif isinstance(n, Add):
            v = sum(go(a) for a in n.args)
        elif isinstance(n, Mul):
            v = 1
            for a in n.args:
                v *= go(a)
        elif isinstance(n, Not):
            v = not go(n.arg)
        elif isinstance(n, And):
            v = all(go(a) for a in n.args)
        elif isinstance(n, Or):
            v = any(go(a) for a in n.args)
        elif isinstance(n, Implies):
            v = (not go(n.lhs)) or go(n.rhs)
        elif isinstance(n, Iff):
            v = go(n.lhs) == go(n.rhs)
        elif isinstance(n, Ge):
            v = go(n.lhs) >= go(n.rhs)
        elif isinstance(n, Gt):
            v = go(n.lhs) > go(n.rhs)
        elif isinstance(n, Eq):
            v = go(n.lhs) == go(n.rhs)
        else:
            raise SmtError(f"cannot evaluate {type(n).__name__}")
        memo[key] = v
        return v

    return go(node)


# ---------------------------------------------------------------------------
# Model parsing
# ---------------------------------------------------------------------------

Model = dict


def _parse_sexprs(text: str):
    tokens = []
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c == ";":
            while i < n and text[i] != "\n":
                i += 1
        elif c in "()":
            tokens.append(c)
            i += 1
        elif c.isspace():
            i += 1
        else:
            j = i
            while j < n and not text[j].isspace() and text[j] not in "();":
                j += 1
            tokens.append(text[i:j])
            i = j
    stack: list[list] = [[]]
    for tok in tokens:
        if tok == "(":
            stack.append([])
        elif tok == ")":
            if len(stack) == 1:
                raise SmtError("unbalanced ')' in solver output")
            done = stack.pop()
            stack[-1].append(done)
        else:
            stack[-1].append(tok)
    if len(stack) != 1:
        raise SmtError("unbalanced '(' in solver output")
    return stack[0]


def _value_of(node):
    if node == "true":
        return True
    if node == "false":
        return False
    if isinstance(node, str):
        return int(node)
    if isinstance(node, list) and len(node) == 2 and node[0] == "-":
        return -_value_of(node[1])
    raise SmtError(f"unsupported model value: {node!r}")


def parse_model(text: str) -> Model:
    """Parse a ``get-model`` response into a name/value map.

    Accepts both the bare ``((define-fun ...) ...)`` form and the older
    ``(model ...)`` wrapper; values may be numerals, ``(- n)``, or booleans.
    """
    model: Model = {}
    items = _parse_sexprs(text)
    flat: list = []
    for item in items:
        if isinstance(item, list) and item and item[0] == "model":
            flat.extend(item[1:])
        elif isinstance(item, list):
            flat.extend(item)
    for entry in flat:
        if not (isinstance(entry, list) and entry and entry[0] == "define-fun"):
            continue
        if len(entry) < 5:
            raise SmtError(f"malformed define-fun: {entry!r}")
        name = entry[1]
        model[name] = _value_of(entry[4])
    return model


# ---------------------------------------------------------------------------
# Solving
# ---------------------------------------------------------------------------


class SolverStatus(Enum):
    SAT = "sat"
    UNSAT = "unsat"
    UNKNOWN = "unknown"


@dataclass
class SolverResult:
    status: SolverStatus
    model: Model | None = None
    reason: str | None = None

    @property
    def is_sat(self) -> bool:
        return self.status is SolverStatus.SAT


def solve(
    f: Formula,
    logic: str = "QF_LIA",
    timeout: float = 60.0,
    command: str | None = None,
) -> SolverResult:
    """Check satisfiability of ``f``.

    With ``command`` set, the script is handed to that external solver (one
    fresh child process per query, killed at the timeout).  The command is
    a shell-style template; a ``{file}`` placeholder switches from stdin to
    a temporary script file.  Without a command the bundled solver runs in
    process over the very same script text.
    """
    script = to_smtlib(f, logic)
    return solve_script(script, timeout=timeout, command=command)


def solve_script(
    script: str, timeout: float = 60.0, command: str | None = None
) -> SolverResult:
    if command is None:
        from . import smtsolver

        deadline = time.monotonic() + timeout
        try:
            output = smtsolver.run_script(script, deadline=deadline)
        except smtsolver.SolverTimeout:
            return SolverResult(SolverStatus.UNKNOWN, reason="timeout")
        return _interpret_output(output)
    argv = shlex.split(command)
    try:
        if any("{file}" in a for a in argv):
            with tempfile.NamedTemporaryFile(
                "w", suffix=".smt2", delete=False
            ) as handle:
                handle.write(script)
                path = handle.name
            argv = [a.replace("{file}", path) for a in argv]
            proc = subprocess.Popen(
                argv, stdout=subprocess.PIPE, stderr=subprocess.PIPE, text=True
            )
            stdin_data = None
        else:
            proc = subprocess.Popen(
                argv,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                stderr=subprocess.PIPE,
                text=True,
            )
            stdin_data = script
    except FileNotFoundError:
        return SolverResult(
            SolverStatus.UNKNOWN, reason=f"solver not found: {argv[0]}"
        )
    try:
        out, _err = proc.communicate(stdin_data, timeout=timeout)
    except subprocess.TimeoutExpired:
        proc.kill()
        proc.communicate()
        return SolverResult(SolverStatus.UNKNOWN, reason="timeout")
    return _interpret_output(out)


def _interpret_output(output: str) -> SolverResult:
    lines = [line.strip() for line in output.splitlines() if line.strip()]
    if not lines:
        return SolverResult(SolverStatus.UNKNOWN, reason="empty solver output")
    verdict = lines[0]
    if verdict == "unsat":
        return SolverResult(SolverStatus.UNSAT)
    if verdict == "unknown":
        reason = lines[1] if len(lines) > 1 and lines[1].startswith(";") else None
        return SolverResult(SolverStatus.UNKNOWN, reason=reason or "unknown")
    if verdict == "sat":
        rest = "\n".join(lines[1:])
        try:
            return SolverResult(SolverStatus.SAT, model=parse_model(rest))
        except (SmtError, ValueError) as exc:
            return SolverResult(
                SolverStatus.UNKNOWN, reason=f"malformed model: {exc}"
            )
    return SolverResult(
        SolverStatus.UNKNOWN, reason=f"malformed solver output: {verdict!r}"
    )
