"""Direct evaluators for the classic path orders and the weighted path
order with partial status, over fully concrete parameters.

All comparisons return :class:`CmpResult`; a ``GREATER`` verdict always
entails the weak relation.  These evaluators are deliberately independent
of the constraint encodings so they can re-check decoded solver models.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

from .algebra import (
    AlgebraKind,
    AlgebraParams,
    CmpResult,
    SimplicityViolation,
    algebra_cmp,
    check_weak_simplicity,
)
from .terms import App, Term, Var, variables


class OrderParameterError(ValueError):
    """Parameter bundle violates a precondition of an order evaluator."""


@dataclass(frozen=True)
class OrderParameters:
    """Precedence levels, per-symbol status lists, and an algebra.

    ``precedence`` maps symbols to natural levels: f is (weakly) above g
    iff its level is (weakly) higher.  ``status`` maps each symbol to a
    list of distinct 1-based argument positions; symbols missing from
    either map read as level 0 / empty status.
    """

    signature: Mapping[str, int]
    precedence: Mapping[str, int]
    status: Mapping[str, tuple]
    algebra: AlgebraParams
    admissible: bool = False
    refinements_2c_2d: bool = False
    _cache: dict = field(default_factory=dict, compare=False, repr=False)

    def level(self, f: str) -> int:
        return self.precedence.get(f, 0)

    def status_of(self, f: str) -> tuple:
        return tuple(self.status.get(f, ()))

    def validate(self) -> None:
        """Check the invariants once; later calls are free."""
        if "validated" in self._cache:
            return
        for f, positions in self.status.items():
            arity = self.signature.get(f, 0)
            if len(set(positions)) != len(positions):
                raise OrderParameterError(f"repeated status position for {f}")
            if any(not 1 <= i <= arity for i in positions):
                raise OrderParameterError(
                    f"status position out of range for {f}/{arity}: {positions}"
                )
        violation = check_weak_simplicity(
            self.algebra,
            {f: self.status_of(f) for f in self.signature},
            self.signature,
            strict=False,
        )
        if violation is not None:
            raise OrderParameterError(f"algebra not weakly simple: {violation}")
        if self.admissible:
            self._validate_admissible()
        self._cache["validated"] = True

    def _validate_admissible(self) -> None:
        top = max((self.level(f) for f in self.signature), default=0)
        for f, arity in self.signature.items():
            if arity == 1 and self.algebra.weight(f) == 0 and self.level(f) != top:
                raise OrderParameterError(
                    f"admissibility: zero-weight unary {f} is not maximal"
                )
            if arity == 0 and self.algebra.weight(f) < self.algebra.w0:
                raise OrderParameterError(
                    f"admissibility: constant {f} weighs less than w0"
                )

    def strictly_simple(self) -> bool:
        """Whether the algebra is strictly simple at every status position."""
        if "strict" not in self._cache:
            violation = check_weak_simplicity(
                self.algebra,
                {f: self.status_of(f) for f in self.signature},
                self.signature,
                strict=True,
            )
            self._cache["strict"] = violation is None
        return self._cache["strict"]


def lex_cmp(
    xs: Sequence[Term],
    ys: Sequence[Term],
    cmp: Callable[[Term, Term], CmpResult],
) -> CmpResult:
    """Lexicographic lifting: strict on the first strict position after a
    weak prefix, or when ``ys`` is a proper prefix; weak additionally on
    equal-length all-weak lists."""
    i = 0
    while True:
        if i >= len(xs) and i >= len(ys):
            return CmpResult.GREATER_EQUAL
        if i >= len(ys):
            return CmpResult.GREATER
        if i >= len(xs):
            return CmpResult.INCOMPARABLE
        r = cmp(xs[i], ys[i])
        if r is CmpResult.GREATER:
            return CmpResult.GREATER
        if r is CmpResult.INCOMPARABLE:
            return CmpResult.INCOMPARABLE
        i += 1


def _select(t: App, positions: Sequence[int]) -> tuple:
    return tuple(t.args[i - 1] for i in positions)


def _require_total(params: OrderParameters, f: str, arity: int) -> tuple:
    sigma = params.status_of(f)
    if sorted(sigma) != list(range(1, arity + 1)):
        raise OrderParameterError(
            f"status of {f} is not a permutation of 1..{arity}: {sigma}"
        )
    return sigma


def lpo_gt(params: OrderParameters, s: Term, t: Term) -> bool:
    """The lexicographic path order with (total) status."""
    memo: dict = {}

    def ge(u: Term, v: Term) -> bool:
        return u == v or gt(u, v)

    def gt(u: Term, v: Term) -> bool:
        key = (u, v)
        if key not in memo:
            memo[key] = _gt(u, v)
        return memo[key]

    def _gt(u: Term, v: Term) -> bool:
        if isinstance(u, Var):
            return False
        n = len(u.args)
        sigma_u = _require_total(params, u.symbol, n)
        if any(ge(ui, v) for ui in u.args):
            return True
        if isinstance(v, Var):
            return False
        if not all(gt(u, vj) for vj in v.args):
            return False
        lu, lv = params.level(u.symbol), params.level(v.symbol)
        if lu > lv:
            return True
        if lu < lv:
            return False
        sigma_v = _require_total(params, v.symbol, len(v.args))

        def as_cmp(a: Term, b: Term) -> CmpResult:
            if gt(a, b):
                return CmpResult.GREATER
            if a == b:
                return CmpResult.GREATER_EQUAL
            return CmpResult.INCOMPARABLE

        return (
            lex_cmp(_select(u, sigma_u), _select(v, sigma_v), as_cmp)
            is CmpResult.GREATER
        )

    return gt(s, t)


def kbo_tkbo_cmp(params: OrderParameters, s: Term, t: Term) -> CmpResult:
    """Knuth-Bendix order with status; subterm coefficients generalize it
    to the transfinite variant (the SUM algebra is plain KBO).

    Kept as a self-contained transcription of the classic case structure,
    so it can serve as an independent oracle for the weighted path order.
    """
    algebra = params.algebra
    if algebra.kind not in (AlgebraKind.SUM, AlgebraKind.LINEAR):
        raise OrderParameterError("kbo_tkbo_cmp needs a SUM or LINEAR algebra")
    if params.admissible:
        params.validate()
    from .algebra import const_weight, var_coef

    memo: dict = {}

    def cmp(u: Term, v: Term) -> CmpResult:
        key = (u, v)
        if key not in memo:
            memo[key] = _cmp(u, v)
        return memo[key]

    def _cmp(u: Term, v: Term) -> CmpResult:
        if u == v:
            return CmpResult.GREATER_EQUAL
        if isinstance(u, Var):
            return CmpResult.INCOMPARABLE
        for x in variables(v):
            if var_coef(algebra, x, u) < var_coef(algebra, x, v):
                return CmpResult.INCOMPARABLE
        wu, wv = const_weight(algebra, u), const_weight(algebra, v)
        if wu > wv:
            return CmpResult.GREATER
        if wu < wv:
            return CmpResult.INCOMPARABLE
        if isinstance(v, Var):
            # u = f^k(v) for the root symbol f and some k > 0
            f = u.symbol
            w: Term = u
            while isinstance(w, App) and w.symbol == f and len(w.args) == 1:
                w = w.args[0]
                if w == v:
                    return CmpResult.GREATER
            return CmpResult.INCOMPARABLE
        lu, lv = params.level(u.symbol), params.level(v.symbol)
        if lu > lv:
            return CmpResult.GREATER
        if lu < lv:
            return CmpResult.INCOMPARABLE
        return lex_cmp(
            _select(u, params.status_of(u.symbol)),
            _select(v, params.status_of(v.symbol)),
            cmp,
        )

    return cmp(s, t)


def apply_filter(pi: Mapping[str, object], t: Term) -> Term:
    """Apply an argument filter: a symbol maps either to one position
    (collapse to that argument) or to a strictly increasing position list
    (keep exactly those arguments)."""
    if isinstance(t, Var):
        return t
    spec = pi[t.symbol]
    if isinstance(spec, int):
        return apply_filter(pi, t.args[spec - 1])
    return App(t.symbol, tuple(apply_filter(pi, t.args[i - 1]) for i in spec))


def wpo_cmp(params: OrderParameters, s: Term, t: Term) -> CmpResult:
    """Weighted path order with partial status.

    Case order: algebra-strict wins outright; under algebra-weak, a status
    subterm of s weakly above t wins, else t's status arguments must all be
    strictly below s and the roots decide by precedence or by the
    lexicographic extension over the status-selected argument lists.  With
    the refinement flag set, two extra weak cases apply: a variable is
    weakly above a term whose root is precedence-least with empty status,
    and a term whose root dominates every symbol (modulo empty-status ties)
    is weakly above a variable, provided the algebra is strictly simple at
    all status positions.
    """
    params.validate()
    algebra = params.algebra
    memo: dict = {}

    def rel(u: Term, v: Term) -> tuple:
        key = (u, v)
        if key not in memo:
            memo[key] = _rel(u, v)
        return memo[key]

    def as_cmp(u: Term, v: Term) -> CmpResult:
        weak, strict = rel(u, v)
        if strict:
            return CmpResult.GREATER
        if weak:
            return CmpResult.GREATER_EQUAL
        return CmpResult.INCOMPARABLE

    def _rel(u: Term, v: Term) -> tuple:
        if isinstance(u, Var):
            if u == v:
                return True, False
            if (
                params.refinements_2c_2d
                and isinstance(v, App)
                and not params.status_of(v.symbol)
                and all(
                    params.level(h) >= params.level(v.symbol)
                    for h in params.signature
                )
                and algebra_cmp(algebra, u, v).implies_weak
            ):
                return True, False
            return False, False
        a = algebra_cmp(algebra, u, v)
        if a is CmpResult.GREATER:
            return True, True
        if a is CmpResult.INCOMPARABLE:
            return False, False
        f = u.symbol
        for i in params.status_of(f):
            if rel(u.args[i - 1], v)[0]:
                return True, True
        if isinstance(v, Var):
            if (
                params.refinements_2c_2d
                and all(
                    params.level(f) > params.level(g)
                    or (
                        params.level(f) >= params.level(g)
                        and not params.status_of(g)
                    )
                    for g in params.signature
                )
                and params.strictly_simple()
            ):
                return True, False
            return False, False
        g = v.symbol
        if not all(rel(u, v.args[j - 1])[1] for j in params.status_of(g)):
            return False, False
        lf, lg = params.level(f), params.level(g)
        if lf > lg:
            return True, True
        if lf < lg:
            return False, False
        lex = lex_cmp(
            _select(u, params.status_of(f)), _select(v, params.status_of(g)), as_cmp
        )
        if lex is CmpResult.GREATER:
            return True, True
        if lex is CmpResult.GREATER_EQUAL:
            return True, False
        return False, False

    return as_cmp(s, t)
