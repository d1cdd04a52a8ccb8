"""Runge-Kutta method representations and coefficient-form conversions.

A Runge-Kutta method is held either in Butcher form (coefficient matrix A and
weight vector b, with abscissas c = A e always derived) or in Shu-Osher form
(arrays alpha, beta and vector v writing the stages as convex combinations of
forward-Euler steps).  An additive implicit-explicit pair couples a strictly
lower triangular explicit tableau with a lower triangular (diagonally
implicit) one of the same stage count.
"""

import numpy as np

__all__ = [
    "TableauError",
    "ButcherTableau",
    "ShuOsherForm",
    "ImexTableau",
    "butcher_to_canonical_shu_osher",
    "shu_osher_to_butcher",
    "shu_osher_ssp_coefficient",
    "admissibility_violations",
]

# Magnitudes below ZERO_TOL are structural zeros: conversion arithmetic
# leaves sub-roundoff residue that must not change sparsity patterns.
ZERO_TOL = 1e-14
# Row-sum consistency tolerance for convex-combination forms.
CONSISTENCY_TOL = 1e-13

STRUCTURES = ("explicit", "dirk", "sdirk", "full")


class TableauError(ValueError):
    """Malformed or inconsistent method definition."""


def _as_matrix(x, name):
    a = np.asarray(x, dtype=float)
    if a.ndim != 2:
        raise TableauError(f"{name} must be a 2-D array, got shape {a.shape}")
    return a


def _as_vector(x, name):
    v = np.asarray(x, dtype=float)
    if v.ndim != 1:
        raise TableauError(f"{name} must be a 1-D array, got shape {v.shape}")
    return v


def infer_structure(A, tol=0.0):
    """Classify a coefficient matrix as explicit, dirk, sdirk, or full."""
    s = A.shape[0]
    upper = np.triu(A, k=1)
    if np.any(np.abs(upper) > tol):
        return "full"
    diag = np.diag(A)
    if np.all(np.abs(diag) <= tol):
        return "explicit"
    nonzero = diag[np.abs(diag) > tol]
    if nonzero.size and np.all(np.abs(nonzero - nonzero[0]) <= 1e-14):
        return "sdirk"
    return "dirk"


class ButcherTableau:
    """An s-stage Runge-Kutta method in Butcher form.

    Parameters
    ----------
    A : (s, s) array_like
        Coefficient matrix.
    b : (s,) array_like
        Weight vector.
    structure : str, optional
        One of ``explicit``, ``dirk``, ``sdirk``, ``full``.  Inferred from the
        sparsity pattern of ``A`` when omitted; validated against it when
        given.
    name, p, p_lin, ssp_coefficient : optional metadata
        Claimed nonlinear order, linear order, and SSP coefficient.  Purely
        informational; nothing is derived from them.

    Notes
    -----
    The abscissas ``c`` are always computed as ``A @ ones`` and never stored
    independently.
    """

    def __init__(self, A, b, structure=None, *, name=None, p=None,
                 p_lin=None, ssp_coefficient=None):
        A = _as_matrix(A, "A")
        b = _as_vector(b, "b")
        s = b.size
        if A.shape != (s, s):
            raise TableauError(
                f"A has shape {A.shape} but b has length {s}")
        inferred = infer_structure(A)
        if structure is None:
            structure = inferred
        else:
            if structure not in STRUCTURES:
                raise TableauError(f"unknown structure {structure!r}")
            self._check_structure(A, structure)
        self.A = A
        self.b = b
        self.s = s
        self.structure = structure
        self.name = name
        self.p = p
        self.p_lin = p_lin
        self.ssp_coefficient = ssp_coefficient
        self.A.setflags(write=False)
        self.b.setflags(write=False)

    @staticmethod
    def _check_structure(A, structure):
        if structure == "full":
            return
        if np.any(np.triu(A, k=1) != 0.0):
            raise TableauError(f"structure={structure} requires a lower "
                               "triangular coefficient matrix")
        diag = np.diag(A)
        if structure == "explicit" and np.any(diag != 0.0):
            raise TableauError("structure=explicit requires a strictly lower "
                               "triangular coefficient matrix")
        if structure == "sdirk":
            nonzero = diag[diag != 0.0]
            if nonzero.size and np.any(np.abs(nonzero - nonzero[0]) > 1e-14):
                raise TableauError("structure=sdirk requires equal nonzero "
                                   "diagonal entries")

    @property
    def c(self):
        return self.A @ np.ones(self.s)

    def is_explicit(self):
        return self.structure == "explicit"

    def __eq__(self, other):
        if not isinstance(other, ButcherTableau):
            return NotImplemented
        return (self.s == other.s and np.array_equal(self.A, other.A)
                and np.array_equal(self.b, other.b)
                and self.structure == other.structure)

    def __repr__(self):
        tag = f" {self.name!r}" if self.name else ""
        return f"<ButcherTableau{tag} s={self.s} structure={self.structure}>"


class ShuOsherForm:
    """A Runge-Kutta method written as combinations of forward-Euler steps.

    ``alpha`` and ``beta`` are (s+1) x s arrays; row i < s defines stage i and
    the final row defines the step update.  ``v`` holds the weights on the
    previous solution value and must satisfy ``v[i] + sum(alpha[i]) == 1`` on
    every row.  ``r`` records the scaling when the form is canonical
    (``alpha == r * beta``).
    """

    def __init__(self, alpha, beta, v, r=None):
        alpha = _as_matrix(alpha, "alpha")
        beta = _as_matrix(beta, "beta")
        v = _as_vector(v, "v")
        s = alpha.shape[1]
        if alpha.shape != (s + 1, s):
            raise TableauError(
                f"alpha must be (s+1) x s, got shape {alpha.shape}")
        if beta.shape != alpha.shape:
            raise TableauError(
                f"beta shape {beta.shape} != alpha shape {alpha.shape}")
        if v.shape != (s + 1,):
            raise TableauError(f"v must have length s+1, got {v.shape}")
        defect = np.abs(v + alpha.sum(axis=1) - 1.0)
        if np.any(defect > CONSISTENCY_TOL):
            i = int(np.argmax(defect))
            raise TableauError(
                f"convex-combination consistency violated on row {i}: "
                f"v[{i}] + sum(alpha[{i}]) differs from 1 by {defect[i]:.3e}")
        self.alpha = alpha
        self.beta = beta
        self.v = v
        self.s = s
        self.r = r
        for arr in (self.alpha, self.beta, self.v):
            arr.setflags(write=False)

    def __repr__(self):
        rtag = f" r={self.r:.6g}" if self.r is not None else ""
        return f"<ShuOsherForm s={self.s}{rtag}>"


class ImexTableau:
    """An additive pair: explicit tableau for F, diagonally implicit for G.

    The explicit part ``(A, b)`` must be strictly lower triangular and the
    implicit part ``(At, bt)`` lower triangular; both share the stage count.
    """

    def __init__(self, A, b, At, bt, *, name=None, pe=None, pi=None,
                 p_lin=None, k_designed=None, ssp_coefficient=None):
        A = _as_matrix(A, "A")
        b = _as_vector(b, "b")
        At = _as_matrix(At, "At")
        bt = _as_vector(bt, "bt")
        s = b.size
        if A.shape != (s, s) or At.shape != (s, s) or bt.shape != (s,):
            raise TableauError("explicit and implicit parts must share one "
                               f"stage count; got A {A.shape}, b {b.shape}, "
                               f"At {At.shape}, bt {bt.shape}")
        if np.any(np.triu(A, k=0) != 0.0):
            raise TableauError("explicit part must be strictly lower "
                               "triangular")
        if np.any(np.triu(At, k=1) != 0.0):
            raise TableauError("implicit part must be lower triangular")
        self.A, self.b, self.At, self.bt = A, b, At, bt
        self.s = s
        self.name = name
        self.pe = pe
        self.pi = pi
        self.p_lin = p_lin
        self.k_designed = k_designed
        self.ssp_coefficient = ssp_coefficient
        for arr in (self.A, self.b, self.At, self.bt):
            arr.setflags(write=False)

    @property
    def c(self):
        return self.A @ np.ones(self.s)

    @property
    def ct(self):
        return self.At @ np.ones(self.s)

    @property
    def explicit_part(self):
        return ButcherTableau(self.A, self.b, "explicit", name=self.name and
                              f"{self.name}-explicit", p=self.pe,
                              p_lin=self.p_lin)

    @property
    def implicit_part(self):
        return ButcherTableau(self.At, self.bt, name=self.name and
                              f"{self.name}-implicit", p=self.pi,
                              p_lin=self.p_lin)

    def __eq__(self, other):
        if not isinstance(other, ImexTableau):
            return NotImplemented
        return (np.array_equal(self.A, other.A)
                and np.array_equal(self.b, other.b)
                and np.array_equal(self.At, other.At)
                and np.array_equal(self.bt, other.bt))

    def __repr__(self):
        tag = f" {self.name!r}" if self.name else ""
        return f"<ImexTableau{tag} s={self.s}>"


def _clean_zeros(a):
    out = np.array(a, dtype=float)
    out[np.abs(out) < ZERO_TOL] = 0.0
    return out


def butcher_to_canonical_shu_osher(t, r):
    """Rewrite a Butcher tableau in the canonical form at scaling ``r``.

    Every forward-Euler substep of the canonical form has size ``dt / r``,
    i.e. ``alpha == r * beta``.  With K the (s+1) x s stack of ``A`` over
    ``b`` and ``G = I + r A``, the coefficients are ``beta = K G^{-1}``,
    ``alpha = r beta``, and ``v`` follows from row consistency.

    Raises
    ------
    TableauError
        If ``r`` is negative or ``I + r A`` is singular.
    """
    if r < 0:
        raise TableauError(f"canonical scaling must be nonnegative, got {r}")
    A, b, s = t.A, t.b, t.s
    K = np.vstack([A, b])
    G = np.eye(s) + r * A
    try:
        # beta G = K, solved without forming an explicit inverse
        beta = np.linalg.solve(G.T, K.T).T
    except np.linalg.LinAlgError:
        raise TableauError(f"I + r*A is non-invertible at this r ({r})")
    beta = _clean_zeros(beta)
    alpha = r * beta
    v = 1.0 - alpha.sum(axis=1)
    return ShuOsherForm(alpha, beta, v, r=r)


def shu_osher_to_butcher(so):
    """Eliminate stage couplings and recover the unique Butcher form.

    Solves ``(I - alpha[:s]) A = beta[:s]``; the weights follow from the
    final row.  Fails if the stage-coupling matrix is singular.
    """
    s = so.s
    M = np.eye(s) - so.alpha[:s, :]
    try:
        A = np.linalg.solve(M, so.beta[:s, :])
    except np.linalg.LinAlgError:
        raise TableauError("singular stage-coupling matrix: I - alpha[:s] "
                           "is non-invertible")
    b = so.alpha[s, :] @ A + so.beta[s, :]
    A = _clean_zeros(A)
    b = _clean_zeros(b)
    return ButcherTableau(A, b)


def admissibility_violations(so, tol=ZERO_TOL):
    """List the entries that break the convex-combination premises.

    A form supports the forward-Euler decomposition only when ``v``,
    ``alpha`` and ``beta`` are nonnegative and ``beta`` vanishes wherever
    ``alpha`` does.
    """
    bad = []
    for i in np.flatnonzero(so.v < -tol):
        bad.append(f"v[{i}] = {so.v[i]:.6e} < 0")
    for i, j in zip(*np.where(so.alpha < -tol)):
        bad.append(f"alpha[{i},{j}] = {so.alpha[i, j]:.6e} < 0")
    for i, j in zip(*np.where(so.beta < -tol)):
        bad.append(f"beta[{i},{j}] = {so.beta[i, j]:.6e} < 0")
    zero_alpha = np.abs(so.alpha) <= tol
    stray = zero_alpha & (np.abs(so.beta) > tol)
    for i, j in zip(*np.where(stray)):
        bad.append(f"beta[{i},{j}] = {so.beta[i, j]:.6e} nonzero where "
                   f"alpha[{i},{j}] = 0")
    return bad


def shu_osher_ssp_coefficient(so, tol=ZERO_TOL):
    """SSP coefficient of an admissible form: min over alpha/beta ratios.

    Entries with ``beta == 0`` contribute infinite ratios; a form with no
    forward-Euler content at all (``beta == 0`` everywhere) therefore
    returns ``inf``.  Forms violating the admissibility premises return 0.
    """
    bad = admissibility_violations(so, tol)
    if bad:
        import logging
        logging.getLogger(__name__).warning(
            "form is not SSP-admissible: %s", "; ".join(bad))
        return 0.0
    mask = so.beta > tol
    if not np.any(mask):
        return float("inf")
    return float(np.min(so.alpha[mask] / so.beta[mask]))
