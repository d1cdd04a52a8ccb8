"""Radius of absolute monotonicity: feasibility certificates and bisection.

A method keeps the forward-Euler strong-stability bound for time steps up to
``r`` times the forward-Euler step exactly when its stacked tableau ``S``
(coefficient matrix over weights, padded with a zero column) satisfies the
componentwise nonnegativity of ``S (I + r S)^{-1}`` together with
``||r S (I + r S)^{-1}||_inf <= 1``.  For an additive pair the analogous
certificate uses ``R = (I + r S + (r/K) St)^{-1}`` and requires ``R e``,
``r R S`` and ``(r/K) R St`` to be componentwise nonnegative; ``K`` is the
ratio of the implicit component's forward-Euler radius to the explicit
component's, and ``K = inf`` removes the implicit-part terms exactly.
"""

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .tableau import ButcherTableau, ImexTableau

__all__ = [
    "SspCertificate",
    "ImexSspQuery",
    "stacked_matrix",
    "is_absolutely_monotonic",
    "ssp_radius",
    "imex_is_feasible",
    "imex_ssp_radius",
]

# Entrywise slack on nonnegativity and the norm bound; inversion roundoff
# for the stage counts in play stays well below this.
FEASIBILITY_TOL = 1e-12
_BINDING_WINDOW = 1e-8


@dataclass
class SspCertificate:
    """Outcome of one feasibility test, with the evaluated constraints."""
    r: float
    feasible: bool
    reason: str = ""
    witness: dict = field(default_factory=dict)
    binding: list = field(default_factory=list)

    def to_json(self, path=None):
        payload = {
            "r": self.r,
            "feasible": bool(self.feasible),
            "reason": self.reason,
            "binding": [list(t) for t in self.binding],
            "witness": {k: np.asarray(v).tolist()
                        for k, v in self.witness.items() if v is not None},
        }
        text = json.dumps(payload, indent=2)
        if path is not None:
            with open(path, "w", encoding="utf-8") as fh:
                fh.write(text)
        return text

    def binding_csv(self):
        lines = ["constraint,i,j,value"]
        for name, i, j, value in self.binding:
            lines.append(f"{name},{i},{j},{value!r}")
        return "\n".join(lines) + "\n"


def stacked_matrix(t):
    """The (s+1) square stack of A over b with a zero final column."""
    s = t.s
    S = np.zeros((s + 1, s + 1))
    S[:s, :s] = t.A
    S[s, :s] = t.b
    return S


def _nonneg_binding(name, M, window):
    return [(name, int(i), int(j), float(M[i, j]))
            for i, j in zip(*np.where(np.abs(M) <= window))]


def is_absolutely_monotonic(t, r, tol=FEASIBILITY_TOL):
    """Test the two stacked-tableau constraints at radius ``r``.

    Feasible iff ``I + r S`` is invertible, ``S (I + r S)^{-1}`` is
    entrywise at least ``-tol``, and the infinity norm of
    ``r S (I + r S)^{-1}`` is at most ``1 + tol``.
    """
    if r < 0:
        raise ValueError(f"radius must be nonnegative, got {r}")
    S = stacked_matrix(t)
    n = S.shape[0]
    try:
        P = np.linalg.solve((np.eye(n) + r * S).T, S.T).T
    except np.linalg.LinAlgError:
        return SspCertificate(r=r, feasible=False, reason="singular")
    if not np.all(np.isfinite(P)):
        return SspCertificate(r=r, feasible=False, reason="singular")
    rP = r * P
    row_sums = np.abs(rP).sum(axis=1)
    feasible = bool(np.min(P) >= -tol and np.max(row_sums) <= 1.0 + tol)
    binding = _nonneg_binding("S(I+rS)^-1", P, _BINDING_WINDOW)
    binding += [("inf-norm-row", int(i), -1, float(row_sums[i]))
                for i in np.where(np.abs(row_sums - 1.0) <= _BINDING_WINDOW)[0]]
    return SspCertificate(
        r=r, feasible=feasible,
        reason="" if feasible else "constraint violated",
        witness={"P": P, "rP": rP}, binding=binding)


def _bisect_radius(feasible_at, s, rel_tol):
    """Shared bracketing/bisection driver over a monotone feasibility test."""
    cap = 4.0 * (s + 1)
    if not feasible_at(rel_tol):
        return 0.0
    lo = rel_tol
    hi = 1.0
    while feasible_at(hi):
        lo = hi
        if lo >= cap:
            return math.inf
        hi = min(2.0 * hi, cap * 1.0000001)
    iters = 0
    while (hi - lo) > rel_tol * max(lo, rel_tol) and iters < 200:
        mid = 0.5 * (lo + hi)
        if feasible_at(mid):
            lo = mid
        else:
            hi = mid
        iters += 1
    # Monotonicity spot check: feasibility must persist below the boundary.
    for frac in (0.5, 0.1):
        probe = frac * lo
        if probe > 0 and not feasible_at(probe):
            raise RuntimeError(
                f"absolute-monotonicity test is not monotone: feasible at "
                f"{lo:.6e} but infeasible at {probe:.6e}; this indicates a "
                "conditioning problem")
    return lo


def ssp_radius(t, rel_tol=1e-10):
    """Largest radius passing `is_absolutely_monotonic`, by bisection.

    Brackets by doubling from 1 up to ``4 (s + 1)`` (beyond that the radius
    is reported as infinite), then bisects to relative width ``rel_tol``.
    Returns 0 when already infeasible at ``r = rel_tol``.
    """
    if rel_tol <= 0:
        raise ValueError(f"rel_tol must be positive, got {rel_tol}")
    return _bisect_radius(
        lambda r: is_absolutely_monotonic(t, r).feasible, t.s, rel_tol)


@dataclass
class ImexSspQuery:
    """An additive pair together with the forward-Euler ratio ``K``.

    ``K`` is positive and may be ``math.inf``, which removes the implicit
    component's constraints exactly rather than through a large float.
    """
    pair: ImexTableau
    k: float

    def __post_init__(self):
        if not (self.k > 0):
            raise ValueError(f"K must be positive, got {self.k}")


def imex_is_feasible(query, r, tol=FEASIBILITY_TOL):
    """Test the three additive-pair constraints at radius ``r``."""
    if r < 0:
        raise ValueError(f"radius must be nonnegative, got {r}")
    pair, K = query.pair, query.k
    S = stacked_matrix(pair.explicit_part)
    St = stacked_matrix(pair.implicit_part)
    rt = 0.0 if math.isinf(K) else r / K
    n = S.shape[0]
    M = np.eye(n) + r * S + rt * St
    try:
        Re = np.linalg.solve(M, np.ones(n))
        P = r * np.linalg.solve(M, S)
        Q = None if math.isinf(K) else rt * np.linalg.solve(M, St)
    except np.linalg.LinAlgError:
        return SspCertificate(r=r, feasible=False, reason="singular")
    checks = [Re, P] + ([] if Q is None else [Q])
    if not all(np.all(np.isfinite(m)) for m in checks):
        return SspCertificate(r=r, feasible=False, reason="singular")
    feasible = all(np.min(m) >= -tol for m in checks)
    binding = [("Re", int(i), -1, float(Re[i]))
               for i in np.where(np.abs(Re) <= _BINDING_WINDOW)[0]]
    binding += _nonneg_binding("P", P, _BINDING_WINDOW)
    if Q is not None:
        binding += _nonneg_binding("Q", Q, _BINDING_WINDOW)
    return SspCertificate(
        r=r, feasible=feasible,
        reason="" if feasible else "constraint violated",
        witness={"Re": Re, "P": P, "Q": Q}, binding=binding)


def imex_ssp_radius(query, rel_tol=1e-10):
    """Largest radius passing `imex_is_feasible`, by bisection."""
    if rel_tol <= 0:
        raise ValueError(f"rel_tol must be positive, got {rel_tol}")
    return _bisect_radius(
        lambda r: imex_is_feasible(query, r).feasible,
        query.pair.s, rel_tol)
