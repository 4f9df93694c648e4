"""Concrete well-founded algebras over the naturals and their term orders.

Four families of interpretations are supported:

* ``SUM``     : f(a1..an) = w(f) + a1 + ... + an
* ``LINEAR``  : f(a1..an) = w(f) + coef(f,1)*a1 + ... + coef(f,n)*an
* ``MAXPOL``  : per-symbol choice between the LINEAR shape (weight status
  ``POL``) and max(w(f), max_i(pen(f,i) + ai)) (weight status ``MAX``)
* ``MATRIX``  : f(v1..vn) = vec(f) + sum_i mat(f,i) . vi over vectors of
  naturals, compared componentwise with the strict part on the first
  component only.

The carrier of the scalar kinds is {a in N | a >= w0}; the matrix carrier
is N^dim.  ``cmp_*`` decide the induced relations s >= t / s > t
quantified over all assignments into the carrier, symbolically.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping

from .terms import App, Term, Var, variables


class AlgebraKind(Enum):
    SUM = "sum"
    LINEAR = "linear"
    MAXPOL = "maxpol"
    MATRIX = "matrix"


class WeightStatus(Enum):
    POL = "pol"
    MAX = "max"


class CmpResult(Enum):
    GREATER = "greater"
    GREATER_EQUAL = "greater_equal"
    INCOMPARABLE = "incomparable"

    @property
    def implies_weak(self) -> bool:
        return self is not CmpResult.INCOMPARABLE


@dataclass(frozen=True)
class AlgebraParams:
    """One record for all algebra families; unused fields stay empty.

    Lookup defaults: missing weights and penalties read as 0, missing
    coefficients as 1 (so SUM needs no explicit coefficient table), missing
    vectors/matrices as all zero.
    """

    kind: AlgebraKind
    w: Mapping[str, int] = field(default_factory=dict)
    w0: int = 0
    coef: Mapping[tuple, int] = field(default_factory=dict)
    pen: Mapping[tuple, int] = field(default_factory=dict)
    wstatus: Mapping[str, WeightStatus] = field(default_factory=dict)
    dim: int = 1
    vec: Mapping[str, tuple] = field(default_factory=dict)
    mat: Mapping[tuple, tuple] = field(default_factory=dict)

    def weight(self, f: str) -> int:
        return self.w.get(f, 0)

    def coef_of(self, f: str, i: int) -> int:
        if self.kind is AlgebraKind.SUM:
            return 1
        return self.coef.get((f, i), 1)

    def pen_of(self, f: str, i: int) -> int:
        return self.pen.get((f, i), 0)

    def status_of(self, f: str) -> WeightStatus:
        if self.kind is AlgebraKind.MAXPOL:
            return self.wstatus.get(f, WeightStatus.POL)
        return WeightStatus.POL

    def vec_of(self, f: str) -> tuple:
        return self.vec.get(f, (0,) * self.dim)

    def mat_of(self, f: str, i: int) -> tuple:
        zero_row = (0,) * self.dim
        return self.mat.get((f, i), (zero_row,) * self.dim)


@dataclass(frozen=True)
class SimplicityViolation:
    symbol: str
    position: int
    witness: object = None

    def __str__(self):
        msg = f"{self.symbol} is not simple in argument {self.position}"
        if self.witness is not None:
            msg += f" (witness {self.witness})"
        return msg


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------


def _mat_vec(m: tuple, v: tuple) -> tuple:
    return tuple(sum(mr[k] * v[k] for k in range(len(v))) for mr in m)


def _vec_add(*vs: tuple) -> tuple:
    return tuple(map(sum, zip(*vs)))


def _mat_mul(a: tuple, b: tuple) -> tuple:
    n = len(a)
    return tuple(
        tuple(sum(a[i][k] * b[k][j] for k in range(n)) for j in range(n))
        for i in range(n)
    )


def _mat_add(a: tuple, b: tuple) -> tuple:
    return tuple(tuple(x + y for x, y in zip(ra, rb)) for ra, rb in zip(a, b))


def eval_term(params: AlgebraParams, t: Term, assignment: Mapping) -> object:
    """Interpretation value of ``t`` under ``assignment``.

    Scalar kinds return an int, MATRIX a tuple of length ``dim``.
    Raises ValueError on assignment values outside the carrier.
    """
    if params.kind is AlgebraKind.MATRIX:
        return _eval_matrix(params, t, assignment)
    if isinstance(t, Var):
        value = assignment[t.name]
        if value < params.w0:
            raise ValueError(
                f"assignment {t.name}={value} below carrier bound {params.w0}"
            )
        return value
    args = [eval_term(params, a, assignment) for a in t.args]
    f = t.symbol
    if params.status_of(f) is WeightStatus.MAX:
        return max(
            [params.weight(f)]
            + [params.pen_of(f, i + 1) + a for i, a in enumerate(args)]
        )
    return params.weight(f) + sum(
        params.coef_of(f, i + 1) * a for i, a in enumerate(args)
    )


def _eval_matrix(params: AlgebraParams, t: Term, assignment: Mapping) -> tuple:
    if isinstance(t, Var):
        value = tuple(assignment[t.name])
        if len(value) != params.dim or any(x < 0 for x in value):
            raise ValueError(f"assignment {t.name}={value} outside carrier")
        return value
    args = [_eval_matrix(params, a, assignment) for a in t.args]
    acc = params.vec_of(t.symbol)
    for i, a in enumerate(args):
        acc = _vec_add(acc, _mat_vec(params.mat_of(t.symbol, i + 1), a))
    return acc


# ---------------------------------------------------------------------------
# Linear comparison
# ---------------------------------------------------------------------------


def const_weight(params: AlgebraParams, t: Term) -> int:
    """Weight of ``t`` with every variable evaluated at the carrier minimum."""
    if isinstance(t, Var):
        return params.w0
    return params.weight(t.symbol) + sum(
        params.coef_of(t.symbol, i + 1) * const_weight(params, a)
        for i, a in enumerate(t.args)
    )


def var_coef(params: AlgebraParams, x: str, t: Term) -> int:
    """Coefficient of the variable ``x`` in the linear value of ``t``."""
    if isinstance(t, Var):
        return 1 if t.name == x else 0
    return sum(
        params.coef_of(t.symbol, i + 1) * var_coef(params, x, a)
        for i, a in enumerate(t.args)
    )


def cmp_linear(params: AlgebraParams, s: Term, t: Term) -> CmpResult:
    """Decide s >=_A t / s >_A t for all carrier assignments, SUM or LINEAR.

    The value of a term is an affine function of the per-variable offsets
    above w0 with nonnegative coefficients, so domination of every variable
    coefficient plus comparison of the all-minimum values is exact.
    """
    if params.kind not in (AlgebraKind.SUM, AlgebraKind.LINEAR):
        raise ValueError(f"cmp_linear needs a SUM or LINEAR algebra, got {params.kind}")
    for x in variables(t):
        if var_coef(params, x, s) < var_coef(params, x, t):
            return CmpResult.INCOMPARABLE
    ws, wt = const_weight(params, s), const_weight(params, t)
    if ws > wt:
        return CmpResult.GREATER
    if ws == wt:
        return CmpResult.GREATER_EQUAL
    return CmpResult.INCOMPARABLE


# ---------------------------------------------------------------------------
# Max / polynomial comparison via expanded weights
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GeneralizedWeight:
    """A constant plus a multiset of variables, i.e. one linear branch
    n + sum of x * multiplicity; variable values are counted as offsets
    above w0 (the constant absorbs the w0 contributions)."""

    constant: int
    vars: tuple = ()  # sorted tuple of (name, multiplicity), multiplicities >= 1

    def multiplicity(self, x: str) -> int:
        for name, m in self.vars:
            if name == x:
                return m
        return 0

    def covers(self, other: "GeneralizedWeight", strict: bool) -> bool:
        if strict and self.constant <= other.constant:
            return False
        if not strict and self.constant < other.constant:
            return False
        return all(self.multiplicity(x) >= m for x, m in other.vars)


def _gw(constant: int, mults: Mapping[str, int]) -> GeneralizedWeight:
    return GeneralizedWeight(
        constant, tuple(sorted((x, m) for x, m in mults.items() if m > 0))
    )


def _gw_add_const(g: GeneralizedWeight, c: int) -> GeneralizedWeight:
    return GeneralizedWeight(g.constant + c, g.vars)


def _gw_scale(c: int, g: GeneralizedWeight) -> GeneralizedWeight:
    if c == 0:
        return GeneralizedWeight(0, ())
    return GeneralizedWeight(c * g.constant, tuple((x, c * m) for x, m in g.vars))


def _gw_sum(gs) -> GeneralizedWeight:
    constant = 0
    mults: dict[str, int] = {}
    for g in gs:
        constant += g.constant
        for x, m in g.vars:
            mults[x] = mults.get(x, 0) + m
    return _gw(constant, mults)


def _prune(pieces) -> frozenset:
    """Drop branches weakly dominated by another branch in the same set.

    Mutual domination of distinct branches is impossible (it would force
    equal constants and equal multisets), so keeping the maximal elements
    is well defined and preserves the represented max function.
    """
    pieces = set(pieces)
    return frozenset(
        g
        for g in pieces
        if not any(o != g and o.covers(g, strict=False) for o in pieces)
    )


ExpandedWeight = frozenset


def expanded_weight(params: AlgebraParams, t: Term) -> ExpandedWeight:
    """The set of linear branches whose pointwise maximum is the value of
    ``t``: POL symbols combine one branch per argument choice, MAX symbols
    contribute their weight branch plus one shifted branch per argument."""
    if params.kind is not AlgebraKind.MAXPOL:
        raise ValueError(f"expanded_weight needs a MAXPOL algebra, got {params.kind}")
    return _expanded(params, t)


def _expanded(params: AlgebraParams, t: Term) -> frozenset:
    if isinstance(t, Var):
        return frozenset([_gw(params.w0, {t.name: 1})])
    f = t.symbol
    arg_sets = [_expanded(params, a) for a in t.args]
    if params.status_of(f) is WeightStatus.MAX:
        pieces = {GeneralizedWeight(params.weight(f), ())}
        for i, pieces_i in enumerate(arg_sets):
            for p in pieces_i:
                pieces.add(_gw_add_const(p, params.pen_of(f, i + 1)))
        return _prune(pieces)
    pieces = set()
    for choice in itertools.product(*arg_sets) if arg_sets else [()]:
        scaled = [
            _gw_scale(params.coef_of(f, i + 1), p) for i, p in enumerate(choice)
        ]
        pieces.add(_gw_add_const(_gw_sum(scaled), params.weight(f)))
    return _prune(pieces)


def cmp_maxpol(params: AlgebraParams, s: Term, t: Term) -> CmpResult:
    """Decide the MAXPOL relations: every branch of t's expanded weight must
    be covered by some branch of s's (with a strictly larger constant for
    the strict relation)."""
    xs, xt = expanded_weight(params, s), expanded_weight(params, t)
    if all(any(n.covers(m, strict=True) for n in xs) for m in xt):
        return CmpResult.GREATER
    if all(any(n.covers(m, strict=False) for n in xs) for m in xt):
        return CmpResult.GREATER_EQUAL
    return CmpResult.INCOMPARABLE


# ---------------------------------------------------------------------------
# Matrix comparison
# ---------------------------------------------------------------------------


def matrix_normal_form(params: AlgebraParams, t: Term):
    """Value of ``t`` as (constant vector, {variable: coefficient matrix})."""
    d = params.dim
    if isinstance(t, Var):
        identity = tuple(
            tuple(1 if i == j else 0 for j in range(d)) for i in range(d)
        )
        return (0,) * d, {t.name: identity}
    const = params.vec_of(t.symbol)
    mats: dict[str, tuple] = {}
    for i, a in enumerate(t.args):
        m = params.mat_of(t.symbol, i + 1)
        c_a, mats_a = matrix_normal_form(params, a)
        const = _vec_add(const, _mat_vec(m, c_a))
        for x, mx in mats_a.items():
            prod = _mat_mul(m, mx)
            mats[x] = _mat_add(mats[x], prod) if x in mats else prod
    return const, mats


def cmp_matrix(params: AlgebraParams, s: Term, t: Term) -> CmpResult:
    """Decide the matrix relations for all assignments into N^dim: all
    coefficient matrices dominate entrywise and the constant vectors compare
    in the componentwise order whose strict part lives in component 1."""
    if params.kind is not AlgebraKind.MATRIX:
        raise ValueError(f"cmp_matrix needs a MATRIX algebra, got {params.kind}")
    cs, ms = matrix_normal_form(params, s)
    ct, mt = matrix_normal_form(params, t)
    d = params.dim
    zero = tuple((0,) * d for _ in range(d))
    for x in set(ms) | set(mt):
        a = ms.get(x, zero)
        b = mt.get(x, zero)
        if any(a[i][j] < b[i][j] for i in range(d) for j in range(d)):
            return CmpResult.INCOMPARABLE
    if any(cs[j] < ct[j] for j in range(d)):
        return CmpResult.INCOMPARABLE
    return CmpResult.GREATER if cs[0] > ct[0] else CmpResult.GREATER_EQUAL


def algebra_cmp(params: AlgebraParams, s: Term, t: Term) -> CmpResult:
    if params.kind in (AlgebraKind.SUM, AlgebraKind.LINEAR):
        return cmp_linear(params, s, t)
    if params.kind is AlgebraKind.MAXPOL:
        return cmp_maxpol(params, s, t)
    return cmp_matrix(params, s, t)


# ---------------------------------------------------------------------------
# Simplicity checks
# ---------------------------------------------------------------------------


def _linear_weak_at(params: AlgebraParams, f: str, arity: int, i: int):
    if params.coef_of(f, i) >= 1:
        return None
    low = params.weight(f) + sum(
        params.coef_of(f, j) * params.w0 for j in range(1, arity + 1) if j != i
    )
    return SimplicityViolation(f, i, witness=low + 1)


def _linear_strict_at(params: AlgebraParams, f: str, arity: int, i: int):
    weak = _linear_weak_at(params, f, arity, i)
    if weak is not None:
        return weak
    margin = (
        params.weight(f)
        + (params.coef_of(f, i) - 1) * params.w0
        + sum(
            params.coef_of(f, j) * params.w0
            for j in range(1, arity + 1)
            if j != i
        )
    )
    if margin >= 1:
        return None
    return SimplicityViolation(f, i, witness=params.w0)


def check_weak_simplicity(
    params: AlgebraParams,
    status: Mapping[str, tuple],
    arities: Mapping[str, int],
    strict: bool = False,
):
    """Check f_A(..., a, ...) >= a (or > a when ``strict``) at every status
    position, for all carrier values.

    Exact for SUM/LINEAR/MAXPOL.  For MATRIX the all-ones-diagonal condition
    on the argument's matrix serves as the definition of weak simplicity
    (sufficient for the semantic property); strict mode additionally asks
    for a positive first component of the symbol's constant vector.
    Returns None when simple, else a SimplicityViolation.
    """
    for f, positions in status.items():
        arity = arities.get(f, max(positions) if positions else 0)
        for i in positions:
            v = _check_at(params, f, arity, i, strict)
            if v is not None:
                return v
    return None


def _check_at(params: AlgebraParams, f: str, arity: int, i: int, strict: bool):
    kind = params.kind
    if kind is AlgebraKind.MATRIX:
        m = params.mat_of(f, i)
        for j in range(params.dim):
            if m[j][j] < 1:
                witness = tuple(1 if k == j else 0 for k in range(params.dim))
                return SimplicityViolation(f, i, witness=witness)
        if strict and params.vec_of(f)[0] < 1:
            return SimplicityViolation(f, i, witness=None)
        return None
    if kind is AlgebraKind.MAXPOL and params.status_of(f) is WeightStatus.MAX:
        if not strict:
            return None
        if params.pen_of(f, i) >= 1:
            return None
        big = max(
            [params.weight(f)]
            + [params.pen_of(f, j) + params.w0 for j in range(1, arity + 1)]
        )
        return SimplicityViolation(f, i, witness=big + 1)
    if strict:
        return _linear_strict_at(params, f, arity, i)
    return _linear_weak_at(params, f, arity, i)
