"""Order-condition generation and residual evaluation.

Nonlinear conditions for a single Runge-Kutta method come from rooted trees
(cumulative counts 1, 2, 4, 8, 17, 37 at orders 1..6).  Conditions for
accuracy on linear autonomous systems take the closed form
``b' A^(q-1) e = 1/q!``.  For additive implicit-explicit pairs, the linear
conditions are generated by right-multiplying every previous-order row
functional by each of the two coefficient matrices (``2^q`` new conditions at
order q; coinciding products are kept so the count is exact), and the
nonlinear/coupling conditions of orders 3 and 4 are emitted from fixed
tables, with the reductions that apply when the implicit operator is linear.
"""

from dataclasses import dataclass, field
from functools import lru_cache
from math import factorial
from typing import Callable

import numpy as np

from .tableau import ButcherTableau, ImexTableau

__all__ = [
    "Condition",
    "ConditionSet",
    "ResidualReport",
    "ConditionError",
    "rk_nonlinear_conditions",
    "rk_linear_conditions",
    "imex_linear_conditions",
    "imex_nonlinear_conditions",
    "evaluate",
    "read_residual_csv",
]

NONLINEAR = "nonlinear"
LINEAR = "linear"
IMEX_LINEAR = "imex-linear"
IMEX_COUPLED_EXPLICIT = "imex-coupled-explicit-weight"
IMEX_COUPLED_IMPLICIT = "imex-coupled-implicit-weight"

_RK_KINDS = (NONLINEAR, LINEAR)


class ConditionError(ValueError):
    """Unsupported order request or condition/method mismatch."""


@dataclass(frozen=True)
class Condition:
    """One residual functional with its target value.

    ``scope`` is ``"rk"`` for conditions on a single tableau and ``"imex"``
    for conditions on an additive pair; `evaluate` enforces it.
    """
    id: str
    order: int
    kind: str
    target: float
    scope: str
    func: Callable = field(repr=False)

    def residual(self, method):
        return self.func(method) - self.target


@dataclass
class ConditionSet:
    conditions: list

    def __len__(self):
        return len(self.conditions)

    def __iter__(self):
        return iter(self.conditions)

    def counts_by_order(self):
        out = {}
        for c in self.conditions:
            out[c.order] = out.get(c.order, 0) + 1
        return out

    def cumulative_count(self, order):
        return sum(1 for c in self.conditions if c.order <= order)

    def __add__(self, other):
        return ConditionSet(list(self.conditions) + list(other.conditions))


# ---------------------------------------------------------------------------
# Rooted trees.  A tree is a tuple of child trees, children stored in the
# canonical (catalog-index nondecreasing) order so each multiset appears once.

@lru_cache(maxsize=None)
def _trees_of_order(n):
    if n == 1:
        return ((),)
    catalog = [(k, t) for k in range(1, n) for t in _trees_of_order(k)]
    out = []

    def extend(remaining, start, acc):
        if remaining == 0:
            out.append(tuple(acc))
            return
        for idx in range(start, len(catalog)):
            size, tree = catalog[idx]
            if size <= remaining:
                extend(remaining - size, idx, acc + [tree])

    extend(n - 1, 0, [])
    return tuple(out)


def _tree_order(tree):
    return 1 + sum(_tree_order(child) for child in tree)


def _tree_density(tree):
    gamma = _tree_order(tree)
    for child in tree:
        gamma *= _tree_density(child)
    return gamma


def _tree_weight_vector(tree, A, ones):
    # stage-wise elementary weight: product over children of A @ (child's)
    out = ones
    for child in tree:
        out = out * (A @ _tree_weight_vector(child, A, ones))
    return out


def _tree_factor_str(child):
    if child == ():
        return "c"
    inner = "*".join(_tree_factor_str(gc) for gc in child)
    return f"A({inner})"


def _tree_id(tree):
    if tree == ():
        return "b'*e"
    return "b'*" + "*".join(_tree_factor_str(child) for child in tree)


def _require_rk(method):
    if not isinstance(method, ButcherTableau):
        raise ConditionError(
            "this condition applies to a single Runge-Kutta tableau, got "
            f"{type(method).__name__}")
    return method


def _require_imex(method):
    if not isinstance(method, ImexTableau):
        raise ConditionError(
            "imex conditions require an additive pair, got "
            f"{type(method).__name__}")
    return method


def rk_nonlinear_conditions(p):
    """All rooted-tree order conditions for orders 1..p (p at most 6)."""
    if not 1 <= p <= 6:
        raise ConditionError(f"nonlinear order must be in 1..6, got {p}")
    conditions = []
    for order in range(1, p + 1):
        for tree in _trees_of_order(order):
            target = 1.0 / _tree_density(tree)

            def func(method, _tree=tree):
                t = _require_rk(method)
                w = _tree_weight_vector(_tree, t.A, np.ones(t.s))
                return float(t.b @ w)

            conditions.append(Condition(
                id=_tree_id(tree), order=order, kind=NONLINEAR,
                target=target, scope="rk", func=func))
    expected = {1: 1, 2: 2, 3: 4, 4: 8, 5: 17, 6: 37}[p]
    assert len(conditions) == expected
    return ConditionSet(conditions)


def rk_linear_conditions(p_lin):
    """Conditions ``b' A^(q-1) e = 1/q!`` for q = 1..p_lin."""
    if p_lin < 1:
        raise ConditionError(f"linear order must be positive, got {p_lin}")
    conditions = []
    for q in range(1, p_lin + 1):
        def func(method, _q=q):
            t = _require_rk(method)
            w = np.ones(t.s)
            for _ in range(_q - 1):
                w = t.A @ w
            return float(t.b @ w)

        conditions.append(Condition(
            id=f"b'*A^{q - 1}*e", order=q, kind=LINEAR,
            target=1.0 / factorial(q), scope="rk", func=func))
    return ConditionSet(conditions)


# ---------------------------------------------------------------------------
# IMEX conditions.  Row functionals are encoded as token strings over the
# alphabet b, bt (leading weights), A, At (matrix factors), C, Ct (diagonal
# abscissa factors), and c, ct, e (trailing vectors).

def _imex_value(method, lead, factors, end):
    pair = _require_imex(method)
    mats = {
        "A": pair.A, "At": pair.At,
        "C": np.diag(pair.c), "Ct": np.diag(pair.ct),
    }
    vecs = {"c": pair.c, "ct": pair.ct, "e": np.ones(pair.s)}
    row = pair.b if lead == "b" else pair.bt
    for tok in factors:
        row = row @ mats[tok]
    return float(row @ vecs[end])


def _imex_condition(lead, factors, end, order, kind, target):
    tokens = [lead, *factors, end]

    def func(method, _lead=lead, _factors=tuple(factors), _end=end):
        return _imex_value(method, _lead, _factors, _end)

    return Condition(id=".".join(tokens), order=order, kind=kind,
                     target=target, scope="imex", func=func)


def imex_linear_conditions(p_lin):
    """Linear order conditions of an additive pair through order ``p_lin``.

    Exactly ``2^q`` new conditions appear at order q.  Functionals whose
    matrix products coincide are retained, keeping the count exact.
    """
    if p_lin < 1:
        raise ConditionError(f"linear order must be positive, got {p_lin}")
    conditions = []
    rows = [("b", ()), ("bt", ())]
    for q in range(1, p_lin + 1):
        target = 1.0 / factorial(q)
        conditions.extend(
            _imex_condition(lead, factors, "e", q, IMEX_LINEAR, target)
            for lead, factors in rows)
        rows = [(lead, factors + (mat,))
                for lead, factors in rows for mat in ("A", "At")]
    return ConditionSet(conditions)


# Nonlinear condition tables: (lead, factors, end, target denominator).
_P3_EXPLICIT = [("b", ("C",), "c", 3)]
_P3_IMPLICIT = [("bt", ("Ct",), "ct", 3)]
_P3_COUPLED_EXPLICIT = [
    ("b", ("C",), "ct", 3),
    ("b", ("Ct",), "ct", 3),
]
_P3_COUPLED_IMPLICIT = [
    ("bt", ("C",), "c", 3),
    ("bt", ("Ct",), "c", 3),
]
_P4_EXPLICIT = [
    ("b", ("A", "C"), "c", 12),
    ("b", ("C", "C"), "c", 4),
    ("b", ("C", "A"), "c", 8),
]
_P4_IMPLICIT = [
    ("bt", ("At", "Ct"), "ct", 12),
    ("bt", ("Ct", "Ct"), "ct", 4),
    ("bt", ("Ct", "At"), "ct", 8),
]
_P4_COUPLED_EXPLICIT = [
    ("b", ("A", "C"), "ct", 12),
    ("b", ("A", "Ct"), "ct", 12),
    ("b", ("C", "Ct"), "c", 4),
    ("b", ("C", "Ct"), "ct", 4),
    ("b", ("Ct", "Ct"), "ct", 4),
    ("b", ("C", "At"), "c", 8),
    ("b", ("C", "At"), "ct", 8),
    ("b", ("C", "A"), "ct", 8),
    ("b", ("Ct", "A"), "c", 8),
    ("b", ("Ct", "A"), "ct", 8),
    ("b", ("Ct", "At"), "c", 8),
    ("b", ("Ct", "At"), "ct", 8),
]
_P4_COUPLED_IMPLICIT = [
    ("b", ("At", "C"), "c", 12),
    ("b", ("At", "C"), "ct", 12),
    ("b", ("At", "Ct"), "ct", 12),
    ("bt", ("A", "Ct"), "c", 12),
    ("bt", ("A", "Ct"), "ct", 12),
    ("bt", ("At", "C"), "c", 12),
    ("bt", ("At", "C"), "ct", 12),
    ("bt", ("A", "C"), "c", 12),
    ("bt", ("C", "Ct"), "c", 4),
    ("bt", ("C", "Ct"), "ct", 4),
    ("bt", ("C", "C"), "c", 4),
    ("bt", ("C", "At"), "c", 8),
    ("bt", ("C", "At"), "ct", 8),
    ("bt", ("C", "A"), "ct", 8),
    ("bt", ("Ct", "A"), "c", 8),
    ("bt", ("Ct", "A"), "ct", 8),
    ("bt", ("Ct", "At"), "c", 8),
    ("bt", ("C", "A"), "c", 8),
]


def _emit(table, order, kind):
    return [_imex_condition(lead, factors, end, order, kind, 1.0 / den)
            for lead, factors, end, den in table]


def imex_nonlinear_conditions(p_e, p_i, implicit_linear=False):
    """Nonlinear and coupling conditions of an additive pair.

    Returns only the conditions beyond the linear set of
    `imex_linear_conditions`.  ``implicit_linear`` requests the reduction
    valid when the implicit operator is linear: the pure implicit
    conditions and the implicit-weight coupling conditions are dropped, and
    the implicit nonlinear order is fixed at 2.

    Supported configurations: ``(p_e, p_i)`` in {(2, 2), (3, 3), (4, 4)}
    without the flag, or ``p_i = 2`` with the flag and ``p_e`` in {2, 3, 4}.
    """
    if not (2 <= p_e <= 4 and 2 <= p_i <= 4):
        raise ConditionError(
            f"nonlinear orders must be in 2..4, got p_e={p_e}, p_i={p_i}")
    if implicit_linear and p_i != 2:
        raise ConditionError(
            "the linear-implicit reduction fixes the implicit nonlinear "
            f"order at 2, got p_i={p_i}")
    if not implicit_linear and p_i == 2 and p_e > 2:
        raise ConditionError(
            "no condition family is defined for p_i=2 with a nonlinear "
            "implicit operator; pass implicit_linear=True to drop the "
            "implicit nonlinear and implicit-weight coupling conditions")
    if not implicit_linear and p_i != p_e:
        raise ConditionError(
            f"no condition family is defined for p_e={p_e}, p_i={p_i}; "
            "supported are p_e == p_i or the implicit-linear reduction")

    conditions = []
    if p_e >= 3:
        conditions += _emit(_P3_EXPLICIT, 3, NONLINEAR)
        conditions += _emit(_P3_COUPLED_EXPLICIT, 3, IMEX_COUPLED_EXPLICIT)
        if not implicit_linear:
            conditions += _emit(_P3_IMPLICIT, 3, NONLINEAR)
            conditions += _emit(_P3_COUPLED_IMPLICIT, 3,
                                IMEX_COUPLED_IMPLICIT)
    if p_e >= 4:
        conditions += _emit(_P4_EXPLICIT, 4, NONLINEAR)
        conditions += _emit(_P4_COUPLED_EXPLICIT, 4, IMEX_COUPLED_EXPLICIT)
        if not implicit_linear:
            conditions += _emit(_P4_IMPLICIT, 4, NONLINEAR)
            conditions += _emit(_P4_COUPLED_IMPLICIT, 4,
                                IMEX_COUPLED_IMPLICIT)
    return ConditionSet(conditions)


# ---------------------------------------------------------------------------
# Evaluation.

_LINEAR_KINDS = (LINEAR, IMEX_LINEAR)


@dataclass
class ResidualReport:
    """Residuals of a condition set on one method.

    ``p_attained`` is the largest order p such that every condition of order
    at most p has residual below the tolerance; ``p_lin_attained`` restricts
    the scan to the linear-kind conditions.  Both are 0 when the relevant
    order-1 conditions already fail.
    """
    rows: list  # (Condition, residual)
    tol: float

    @property
    def residuals(self):
        return np.array([r for _, r in self.rows])

    def max_abs_by_order(self):
        out = {}
        for cond, res in self.rows:
            out[cond.order] = max(out.get(cond.order, 0.0), abs(res))
        return out

    def _attained(self, kinds=None):
        orders = sorted({c.order for c, _ in self.rows
                         if kinds is None or c.kind in kinds})
        attained = 0
        for q in orders:
            ok = all(abs(res) <= self.tol for cond, res in self.rows
                     if cond.order == q
                     and (kinds is None or cond.kind in kinds))
            if not ok:
                break
            attained = q
        return attained

    @property
    def p_attained(self):
        return self._attained(None)

    @property
    def p_lin_attained(self):
        return self._attained(_LINEAR_KINDS)

    def max_abs_residual(self, max_order=None):
        vals = [abs(res) for cond, res in self.rows
                if max_order is None or cond.order <= max_order]
        return max(vals) if vals else 0.0

    def to_csv(self, path=None):
        lines = ["id,order,kind,target,residual"]
        for cond, res in self.rows:
            lines.append(f"{cond.id},{cond.order},{cond.kind},"
                         f"{cond.target!r},{res!r}")
        text = "\n".join(lines) + "\n"
        if path is not None:
            with open(path, "w", encoding="utf-8") as fh:
                fh.write(text)
        return text


def read_residual_csv(path_or_text):
    """Parse a `ResidualReport.to_csv` dump into a list of row dicts."""
    import os
    text = path_or_text
    if os.path.exists(str(path_or_text)):
        with open(path_or_text, "r", encoding="utf-8") as fh:
            text = fh.read()
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0] != "id,order,kind,target,residual":
        raise ValueError("not a residual-report CSV")
    rows = []
    for ln in lines[1:]:
        ident, order, kind, target, residual = ln.split(",")
        rows.append({"id": ident, "order": int(order), "kind": kind,
                     "target": float(target), "residual": float(residual)})
    return rows


def evaluate(cset, method, tol=1e-10):
    """Evaluate every condition on ``method`` and report the residuals.

    Raises `ConditionError` when a condition's scope does not match the
    method type (imex conditions on a plain tableau, or vice versa).
    """
    rows = [(cond, cond.residual(method)) for cond in cset]
    return ResidualReport(rows=rows, tol=tol)
