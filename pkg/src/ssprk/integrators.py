"""Fixed-step time integration: explicit/diagonally implicit stepping,
additive implicit-explicit stepping, and a verified adaptive reference.

Implicit stage equations are solved directly (one factorized linear solve)
when the part is linear, and by Newton iteration otherwise.  The reference
integrator is an embedded fifth(fourth)-order adaptive pair whose output is
accepted only after a tolerance-halving verification.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import lu_factor, lu_solve

from .tableau import ButcherTableau, ImexTableau, ShuOsherForm

__all__ = [
    "OdePart",
    "OdeSystem",
    "Trajectory",
    "StepError",
    "ReferenceVerificationError",
    "step_rk",
    "step_imex",
    "step_shu_osher",
    "integrate",
    "reference_solution",
    "read_trajectory_csv",
]

NEWTON_RTOL = 1e-12
NEWTON_MAXIT = 50


class StepError(RuntimeError):
    """A stage solve failed; carries the iteration count and residual."""

    def __init__(self, message, iterations=None, residual=None):
        super().__init__(message)
        self.iterations = iterations
        self.residual = residual


class ReferenceVerificationError(RuntimeError):
    """The reference integration failed its tolerance-halving check."""


class OdePart:
    """One additive piece of a right-hand side.

    Passing ``matrix`` flags the part as linear (``f(u) == matrix @ u``);
    when both ``func`` and ``matrix`` are given the claim is spot-checked on
    random vectors at construction.  ``jacobian`` is optional and only used
    by Newton stage solves; a finite-difference Jacobian stands in when it
    is absent.
    """

    def __init__(self, func=None, matrix=None, jacobian=None, name=None):
        if func is None and matrix is None:
            raise ValueError("an OdePart needs a function or a matrix")
        if matrix is not None:
            matrix = np.asarray(matrix, dtype=float)
            if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
                raise ValueError("part matrix must be square")
        if func is not None and matrix is not None:
            rng = np.random.default_rng(0)
            for _ in range(3):
                u = rng.standard_normal(matrix.shape[0])
                lhs = func(u)
                rhs = matrix @ u
                scale = max(float(np.max(np.abs(rhs))), 1.0)
                if float(np.max(np.abs(lhs - rhs))) > 1e-12 * scale:
                    raise ValueError(
                        "linearity flag is wrong: func(u) != matrix @ u")
        self.matrix = matrix
        self.func = func if func is not None else (lambda u: matrix @ u)
        self.jacobian = jacobian
        self.name = name

    @property
    def is_linear(self):
        return self.matrix is not None

    def __call__(self, u):
        return np.asarray(self.func(u), dtype=float)


class OdeSystem:
    """An autonomous system ``u' = f(u)`` or split ``u' = f(u) + g(u)``."""

    def __init__(self, f, g=None, n=None):
        if not isinstance(f, OdePart):
            f = OdePart(func=f)
        if g is not None and not isinstance(g, OdePart):
            g = OdePart(func=g)
        self.f = f
        self.g = g
        if n is None:
            if f.matrix is not None:
                n = f.matrix.shape[0]
            else:
                raise ValueError("dimension n is required when the primary "
                                 "part has no matrix")
        self.n = n

    def total(self):
        """The combined right-hand side as a single part."""
        if self.g is None:
            return self.f
        if self.f.is_linear and self.g.is_linear:
            return OdePart(matrix=self.f.matrix + self.g.matrix)
        f, g = self.f, self.g
        return OdePart(func=lambda u: f(u) + g(u))


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray
    newton_iterations: list = field(default_factory=list)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.states = np.asarray(self.states, dtype=float)
        if np.any(np.diff(self.times) <= 0) and self.times.size > 1:
            raise ValueError("snapshot times must be strictly increasing")

    @property
    def final_state(self):
        return self.states[-1]

    def to_csv(self, path=None, stride=1):
        n = self.states.shape[1]
        lines = ["t," + ",".join(f"u_{i + 1}" for i in range(n))]
        idx = list(range(0, len(self.times), stride))
        if idx[-1] != len(self.times) - 1:
            idx.append(len(self.times) - 1)
        for i in idx:
            row = ",".join(repr(float(x)) for x in self.states[i])
            lines.append(f"{float(self.times[i])!r},{row}")
        text = "\n".join(lines) + "\n"
        if path is not None:
            with open(path, "w", encoding="utf-8") as fh:
                fh.write(text)
        return text


def read_trajectory_csv(path_or_text):
    import os
    text = path_or_text
    if os.path.exists(str(path_or_text)):
        with open(path_or_text, "r", encoding="utf-8") as fh:
            text = fh.read()
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or not lines[0].startswith("t,"):
        raise ValueError("not a trajectory CSV")
    data = np.array([[float(tok) for tok in ln.split(",")]
                     for ln in lines[1:]])
    return Trajectory(times=data[:, 0], states=data[:, 1:])


class _LinearStageCache:
    """LU factorizations of ``scale * I - coef * M``, keyed by (scale, coef)."""

    def __init__(self, matrix):
        self.matrix = matrix
        self._lu = {}

    def solve(self, scale, coef, rhs):
        key = (scale, coef)
        if key not in self._lu:
            n = self.matrix.shape[0]
            self._lu[key] = lu_factor(scale * np.eye(n) - coef * self.matrix)
        return lu_solve(self._lu[key], rhs)


def _numeric_jacobian(func, y, f0):
    n = y.size
    J = np.empty((n, n))
    for j in range(n):
        h = 1e-7 * max(1.0, abs(y[j]))
        yp = y.copy()
        yp[j] += h
        J[:, j] = (func(yp) - f0) / h
    return J


def _solve_stage(part, w, coef, scale=1.0, cache=None):
    """Solve ``scale * y = w + coef * part(y)`` for y.

    Returns (y, newton_iterations).  Linear parts use a direct factorized
    solve; nonlinear parts use Newton iteration at relative residual
    tolerance ``1e-12`` with at most 50 iterations.
    """
    if coef == 0.0:
        return w / scale, 0
    if part.is_linear:
        if cache is not None:
            return cache.solve(scale, coef, w), 0
        n = part.matrix.shape[0]
        return np.linalg.solve(scale * np.eye(n) - coef * part.matrix, w), 0
    y = w / scale
    for it in range(1, NEWTON_MAXIT + 1):
        f0 = part(y)
        resid = scale * y - coef * f0 - w
        norm = float(np.max(np.abs(resid)))
        tol = NEWTON_RTOL * max(1.0, float(np.max(np.abs(y))))
        if norm <= tol:
            return y, it - 1
        if part.jacobian is not None:
            Jf = np.asarray(part.jacobian(y), dtype=float)
        else:
            Jf = _numeric_jacobian(part, y, f0)
        J = scale * np.eye(y.size) - coef * Jf
        try:
            delta = np.linalg.solve(J, resid)
        except np.linalg.LinAlgError:
            raise StepError("singular Newton matrix in stage solve",
                            iterations=it, residual=norm)
        y = y - delta
    f0 = part(y)
    norm = float(np.max(np.abs(scale * y - coef * f0 - w)))
    tol = NEWTON_RTOL * max(1.0, float(np.max(np.abs(y))))
    if norm <= tol:
        return y, NEWTON_MAXIT
    raise StepError(
        f"Newton stage solve did not converge in {NEWTON_MAXIT} iterations "
        f"(residual {norm:.3e})", iterations=NEWTON_MAXIT, residual=norm)


def step_rk(t, sys, u, dt, part=None, cache=None):
    """One step of a Runge-Kutta method on ``u' = F(u)``.

    ``F`` defaults to the system's combined right-hand side.  Explicit
    stages are evaluated in order; diagonally implicit stages solve
    ``y = w + dt a_ii F(y)``.  Returns ``(u_next, max_newton_iterations)``.
    """
    if part is None:
        part = sys.total()
    A, b, s = t.A, t.b, t.s
    u = np.asarray(u, dtype=float)
    fs = [None] * s
    max_newton = 0
    for i in range(s):
        w = u.copy()
        for j in range(i):
            if A[i, j] != 0.0:
                w = w + dt * A[i, j] * fs[j]
        diag = A[i, i]
        if diag == 0.0:
            y = w
        else:
            y, its = _solve_stage(part, w, dt * diag, cache=cache)
            max_newton = max(max_newton, its)
        fs[i] = part(y)
    out = u.copy()
    for j in range(s):
        if b[j] != 0.0:
            out = out + dt * b[j] * fs[j]
    return out, max_newton


def step_imex(pair, sys, u, dt, cache=None):
    """One step of an additive pair: f treated explicitly, g implicitly.

    Stage i gathers the explicit f-history and implicit g-history and then
    solves the diagonal equation in g only.  The update combines f with the
    explicit weights and g with the implicit weights.
    """
    if sys.g is None:
        raise ValueError("step_imex needs a split system with both parts")
    A, b, At, bt, s = pair.A, pair.b, pair.At, pair.bt, pair.s
    f_part, g_part = sys.f, sys.g
    u = np.asarray(u, dtype=float)
    fs = [None] * s
    gs = [None] * s
    max_newton = 0
    for i in range(s):
        w = u.copy()
        for j in range(i):
            if A[i, j] != 0.0:
                w = w + dt * A[i, j] * fs[j]
            if At[i, j] != 0.0:
                w = w + dt * At[i, j] * gs[j]
        diag = At[i, i]
        if diag == 0.0:
            y = w
        else:
            y, its = _solve_stage(g_part, w, dt * diag, cache=cache)
            max_newton = max(max_newton, its)
        fs[i] = f_part(y)
        gs[i] = g_part(y)
    out = u.copy()
    for j in range(s):
        if b[j] != 0.0:
            out = out + dt * b[j] * fs[j]
        if bt[j] != 0.0:
            out = out + dt * bt[j] * gs[j]
    return out, max_newton


def step_shu_osher(so, sys, u, dt, part=None, cache=None):
    """One step driven directly by the forward-Euler recursion of the form.

    Stage i combines the previous solution and earlier stages, then resolves
    its own diagonal coupling ``(1 - alpha_ii) y = w + dt beta_ii F(y)``.
    """
    if part is None:
        part = sys.total()
    alpha, beta, v, s = so.alpha, so.beta, so.v, so.s
    u = np.asarray(u, dtype=float)
    ys = [None] * s
    fs = [None] * s
    max_newton = 0

    def row_value(i):
        nonlocal max_newton
        w = v[i] * u
        for j in range(i if i < s else s):
            if alpha[i, j] != 0.0:
                w = w + alpha[i, j] * ys[j]
            if beta[i, j] != 0.0:
                w = w + dt * beta[i, j] * fs[j]
        if i < s:
            scale = 1.0 - alpha[i, i]
            coef = dt * beta[i, i]
            if alpha[i, i] == 0.0 and beta[i, i] == 0.0:
                return w
            y, its = _solve_stage(part, w, coef, scale=scale, cache=cache)
            max_newton = max(max_newton, its)
            return y
        return w

    for i in range(s):
        ys[i] = row_value(i)
        fs[i] = part(ys[i])
    return row_value(s), max_newton


def _step_count(t0, t_final, dt):
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    span = t_final - t0
    if span < 0:
        raise ValueError("t_final must not precede the initial time")
    n_float = span / dt
    n = int(round(n_float))
    if abs(n_float - n) > 1e-8 * max(1.0, n_float):
        raise ValueError(
            f"t_final - t0 = {span} is not an integer multiple of dt = {dt}"
            " (a final partial step is forbidden; adjust dt)")
    return n


def integrate(method, sys, u0, dt, t_final, snapshot_stride=1, t0=0.0):
    """Run N equal steps to ``t_final`` and collect strided snapshots.

    ``method`` may be a `ButcherTableau` (applied to the combined
    right-hand side), an `ImexTableau` (split stepping), or a `ShuOsherForm`.
    ``t_final - t0`` must be an integer multiple of ``dt``.
    """
    n_steps = _step_count(t0, t_final, dt)
    u = np.asarray(u0, dtype=float).copy()
    times = [t0]
    states = [u.copy()]
    newton_log = []

    if isinstance(method, ImexTableau):
        cache = (_LinearStageCache(sys.g.matrix)
                 if sys.g is not None and sys.g.is_linear else None)
        stepper = lambda u: step_imex(method, sys, u, dt, cache=cache)
    elif isinstance(method, ButcherTableau):
        part = sys.total()
        cache = _LinearStageCache(part.matrix) if part.is_linear else None
        stepper = lambda u: step_rk(method, sys, u, dt, part=part,
                                    cache=cache)
    elif isinstance(method, ShuOsherForm):
        part = sys.total()
        cache = _LinearStageCache(part.matrix) if part.is_linear else None
        stepper = lambda u: step_shu_osher(method, sys, u, dt, part=part,
                                           cache=cache)
    else:
        raise TypeError(f"cannot integrate with {type(method).__name__}")

    for k in range(1, n_steps + 1):
        try:
            u, its = stepper(u)
        except StepError as exc:
            raise StepError(f"step {k} failed: {exc}",
                            iterations=exc.iterations,
                            residual=exc.residual) from exc
        newton_log.append(its)
        if k % snapshot_stride == 0 or k == n_steps:
            times.append(t0 + k * dt)
            states.append(u.copy())
    return Trajectory(times=np.array(times), states=np.array(states),
                      newton_iterations=newton_log)


# ---------------------------------------------------------------------------
# Adaptive embedded 5(4) reference integrator.

_DP_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_DP_A = np.array([
    [0, 0, 0, 0, 0, 0, 0],
    [1 / 5, 0, 0, 0, 0, 0, 0],
    [3 / 40, 9 / 40, 0, 0, 0, 0, 0],
    [44 / 45, -56 / 15, 32 / 9, 0, 0, 0, 0],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729, 0, 0, 0],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656, 0, 0],
    [35 / 384, 0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0],
])
_DP_B5 = np.array([35 / 384, 0, 500 / 1113, 125 / 192, -2187 / 6784,
                   11 / 84, 0])
_DP_B4 = np.array([5179 / 57600, 0, 7571 / 16695, 393 / 640,
                   -92097 / 339200, 187 / 2100, 1 / 40])


def _adaptive_solve(func, u0, t_final, rtol, atol, t0=0.0):
    u = np.asarray(u0, dtype=float).copy()
    t = t0
    span = t_final - t0
    if span == 0.0:
        return u
    dt = span / 100.0
    min_dt = 1e-14 * max(abs(span), 1.0)
    nstages = 7
    while t < t_final:
        dt = min(dt, t_final - t)
        if dt < min_dt:
            raise StepError("step-size underflow in reference integration")
        k = np.empty((nstages, u.size))
        for i in range(nstages):
            y = u.copy()
            for j in range(i):
                if _DP_A[i, j] != 0.0:
                    y = y + dt * _DP_A[i, j] * k[j]
            k[i] = func(y)
        u5 = u + dt * (_DP_B5 @ k)
        u4 = u + dt * (_DP_B4 @ k)
        scale = atol + rtol * np.maximum(np.abs(u), np.abs(u5))
        err = float(np.max(np.abs(u5 - u4) / scale))
        if err <= 1.0:
            t += dt
            u = u5
            grow = 5.0 if err == 0.0 else min(5.0, 0.9 * err ** -0.2)
            dt *= max(grow, 1.0)
        else:
            dt *= max(0.2, 0.9 * err ** -0.2)
    return u


def reference_solution(sys, u0, t_final, tol=1e-12, t0=0.0,
                       verify_tol=1e-10):
    """High-accuracy terminal state with a tolerance-halving verification.

    Integrates the combined right-hand side with the embedded adaptive pair
    at tolerance ``tol`` and again at ``tol / 2``; the result is accepted
    only if the two answers agree to ``verify_tol`` in the maximum norm, and
    a `ReferenceVerificationError` is raised otherwise.
    """
    part = sys.total()
    func = lambda u: part(u)
    coarse = _adaptive_solve(func, u0, t_final, rtol=tol, atol=tol, t0=t0)
    fine = _adaptive_solve(func, u0, t_final, rtol=tol / 2, atol=tol / 2,
                           t0=t0)
    drift = float(np.max(np.abs(coarse - fine)))
    if drift >= verify_tol:
        raise ReferenceVerificationError(
            f"tolerance halving moved the reference answer by {drift:.3e} "
            f"(allowed {verify_tol:.1e}); tighten tol")
    return fine
