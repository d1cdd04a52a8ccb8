"""Test-problem library: semidiscretized PDE right-hand sides, ODE systems,
initial conditions, and the total-variation functional.

Everything here is periodic and one-dimensional.  The catalog names follow
the numbering used throughout the experiment drivers (``example-1.1`` ...
``example-4.2-w100``).
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .integrators import OdePart, OdeSystem

__all__ = [
    "Grid1D",
    "SplitSemidiscretization",
    "Problem",
    "upwind_advection",
    "spectral_derivative_matrix",
    "van_der_pol",
    "buckley_leverett",
    "burgers",
    "split_problems",
    "total_variation",
    "max_tv_rise",
    "problem_catalog",
]


@dataclass(frozen=True)
class Grid1D:
    """Equidistant grid on [a, b]; periodic grids exclude the right endpoint."""
    a: float
    b: float
    n: int
    periodic: bool = True

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("a grid needs at least two points")
        if self.b <= self.a:
            raise ValueError("grid interval is empty")

    @property
    def dx(self):
        length = self.b - self.a
        return length / self.n if self.periodic else length / (self.n - 1)

    @property
    def x(self):
        if self.periodic:
            return self.a + self.dx * np.arange(self.n)
        return np.linspace(self.a, self.b, self.n)


def upwind_advection(grid, speed):
    """First-order upwind semidiscretization of ``u_t + speed u_x = 0``.

    Total-variation diminishing under forward Euler for all
    ``dt <= dx / speed``.  Returns a linear part with its matrix attached.
    """
    if not grid.periodic:
        raise ValueError("upwind advection expects a periodic grid")
    if speed < 0:
        raise ValueError("upwind form assumes nonnegative speed")
    n = grid.n
    M = (np.eye(n, k=-1) + np.eye(n, k=n - 1) - np.eye(n)) * (speed / grid.dx)
    return OdePart(matrix=M, name=f"upwind-advection(speed={speed:g})")


def _fourier_d1(n):
    # first-derivative collocation kernel on [0, 2*pi), h = 2*pi/n
    h = 2.0 * math.pi / n
    D = np.zeros((n, n))
    k = np.arange(1, n)
    if n % 2:
        col = 0.5 * (-1.0) ** k / np.sin(0.5 * k * h)
    else:
        col = 0.5 * (-1.0) ** k / np.tan(0.5 * k * h)
    for j in range(n):
        idx = (j + k) % n
        D[idx, j] = col
    return D


def _fourier_d2(n):
    h = 2.0 * math.pi / n
    if n % 2:
        D1 = _fourier_d1(n)
        return D1 @ D1
    D = np.zeros((n, n))
    k = np.arange(1, n)
    col = -0.5 * (-1.0) ** k / np.sin(0.5 * k * h) ** 2
    for j in range(n):
        idx = (j + k) % n
        D[idx, j] = col
    np.fill_diagonal(D, -math.pi ** 2 / (3.0 * h ** 2) - 1.0 / 6.0)
    return D


def spectral_derivative_matrix(grid, order=1):
    """Fourier collocation differentiation matrix of the given order.

    Exact on trigonometric polynomials resolvable on the grid.  Even point
    counts use the cotangent kernel (first derivative) and the squared
    cosecant kernel (second); with the antisymmetric first-derivative
    kernel an odd point count squares its cosecant-kernel matrix.
    """
    if not grid.periodic:
        raise ValueError("spectral differentiation expects a periodic grid")
    if grid.n < 4:
        raise ValueError("spectral differentiation needs at least 4 points")
    if order == 1:
        D = _fourier_d1(grid.n)
        return D * (2.0 * math.pi / (grid.b - grid.a))
    if order == 2:
        D = _fourier_d2(grid.n)
        return D * (2.0 * math.pi / (grid.b - grid.a)) ** 2
    raise ValueError(f"derivative order must be 1 or 2, got {order}")


def van_der_pol(epsilon=10.0):
    """The two-component relaxation oscillator with stiffness knob epsilon.

    ``u1' = u2``, ``u2' = (1/epsilon) (-u1 + (1 - u1^2) u2)``.
    """
    if epsilon == 0:
        raise ValueError("epsilon must be nonzero")
    inv = 1.0 / epsilon

    def func(u):
        return np.array([u[1], inv * (-u[0] + (1.0 - u[0] ** 2) * u[1])])

    def jac(u):
        return np.array([
            [0.0, 1.0],
            [inv * (-1.0 - 2.0 * u[0] * u[1]), inv * (1.0 - u[0] ** 2)],
        ])

    return OdeSystem(OdePart(func=func, jacobian=jac, name="van-der-pol"),
                     n=2)


def buckley_leverett(grid, a=1.0 / 3.0):
    """Two-phase flow flux ``u^2 / (u^2 + a (1-u)^2)`` differentiated
    spectrally; returns the nonlinear right-hand-side part."""
    if a <= 0:
        raise ValueError("flux parameter a must be positive")
    D1 = spectral_derivative_matrix(grid, 1)

    def flux(u):
        return u ** 2 / (u ** 2 + a * (1.0 - u) ** 2)

    def func(u):
        return -(D1 @ flux(u))

    def jac(u):
        denom = (u ** 2 + a * (1.0 - u) ** 2) ** 2
        fprime = 2.0 * a * u * (1.0 - u) / denom
        return -D1 * fprime[np.newaxis, :]

    part = OdePart(func=func, jacobian=jac, name="buckley-leverett")
    part.flux = flux
    return part


def burgers(grid, discretization="spectral"):
    """Semidiscrete Burgers flux term ``-(u^2/2)_x``.

    ``spectral`` differentiates the flux with the Fourier matrix; ``upwind``
    uses conservative first-order differencing, which assumes nonnegative
    characteristic speed (a diagnostic warning is issued when fed negative
    states).
    """
    if discretization == "spectral":
        D1 = spectral_derivative_matrix(grid, 1)

        def func(u):
            return -(D1 @ (0.5 * u ** 2))

        def jac(u):
            return -D1 * u[np.newaxis, :]

        return OdePart(func=func, jacobian=jac, name="burgers-spectral")
    if discretization == "upwind":
        dx = grid.dx

        def func(u):
            if np.any(u < 0):
                warnings.warn("upwind Burgers differencing assumes "
                              "nonnegative states", RuntimeWarning,
                              stacklevel=2)
            f = 0.5 * u ** 2
            return -(f - np.roll(f, 1)) / dx

        def jac(u):
            J = np.zeros((grid.n, grid.n))
            idx = np.arange(grid.n)
            J[idx, idx] = -u / dx
            J[idx, idx - 1] += np.roll(u, 1) / dx
            return J

        return OdePart(func=func, jacobian=jac, name="burgers-upwind")
    raise ValueError(f"unknown discretization {discretization!r}")


def total_variation(u):
    """Periodic total variation: cell-to-cell jumps including the wrap pair."""
    u = np.asarray(u)
    return float(np.sum(np.abs(np.diff(u))) + abs(u[0] - u[-1]))


def max_tv_rise(traj):
    """Largest one-step increase of total variation between snapshots.

    Negative when the variation is monotonically diminishing; ``-inf`` for
    trajectories with fewer than two snapshots.
    """
    states = traj.states if hasattr(traj, "states") else np.asarray(traj)
    if len(states) < 2:
        return -math.inf
    tv = np.array([total_variation(u) for u in states])
    return float(np.max(np.diff(tv)))


def _step_ic(grid, lo, hi):
    x = grid.x
    return np.where((x >= lo) & (x <= hi), 1.0, 0.0)


@dataclass
class SplitSemidiscretization:
    """An explicit/implicit splitting with its forward-Euler step sizes."""
    name: str
    explicit: OdePart
    implicit: OdePart
    grid: Grid1D
    u0: np.ndarray
    k_estimate: float | None = None
    dt_fe_explicit: float | None = None
    dt_fe_implicit: float | None = None

    @property
    def system(self):
        return OdeSystem(self.explicit, self.implicit, n=self.grid.n)


@dataclass
class Problem:
    """A catalog entry: system, initial state, and experiment defaults."""
    name: str
    system: OdeSystem
    u0: np.ndarray
    t_final: float
    grid: Grid1D | None = None
    exact: object = None          # callable t -> state, when known
    error_norm: str = "l2"        # 'l2' | 'component0'
    dt_list: tuple = ()
    lambda_list: tuple = ()
    tv_measurable: bool = False
    dt_fe: float | None = None    # explicit-part forward-Euler step
    k_actual: float | None = None
    description: str = ""

    def dts(self):
        if self.dt_list:
            return list(self.dt_list)
        if self.lambda_list and self.grid is not None:
            return [lam * self.grid.dx for lam in self.lambda_list]
        raise ValueError(f"problem {self.name} has no default step list")

    def error(self, state, ref):
        if self.error_norm == "component0":
            return abs(float(state[0] - ref[0]))
        if self.error_norm == "l2":
            return float(np.linalg.norm(state - ref))
        raise ValueError(f"unknown error norm {self.error_norm!r}")


def _example_31():
    grid = Grid1D(0.0, 2.0 * math.pi, 8)
    eps = 0.01
    D1 = spectral_derivative_matrix(grid, 1)
    D2 = spectral_derivative_matrix(grid, 2)
    return SplitSemidiscretization(
        name="example-3.1",
        explicit=OdePart(matrix=-D1, name="advection-spectral"),
        implicit=OdePart(matrix=eps * D2, name="diffusion-spectral"),
        grid=grid, u0=np.sin(grid.x))


def _example_32():
    grid = Grid1D(0.0, 2.0 * math.pi, 24)
    D1 = spectral_derivative_matrix(grid, 1)
    return SplitSemidiscretization(
        name="example-3.2",
        explicit=burgers(grid, "spectral"),
        implicit=OdePart(matrix=-D1, name="advection-spectral"),
        grid=grid, u0=np.sin(grid.x))


def _example_41():
    grid = Grid1D(-1.0, 1.0, 301)
    return SplitSemidiscretization(
        name="example-4.1",
        explicit=upwind_advection(grid, 1.0),
        implicit=upwind_advection(grid, 100.0),
        grid=grid, u0=_step_ic(grid, 0.25, 0.5),
        k_estimate=1.0 / 100.0,
        dt_fe_explicit=grid.dx, dt_fe_implicit=grid.dx / 100.0)


def _example_42(omega):
    grid = Grid1D(-1.0, 1.0, 301)
    u0 = _step_ic(grid, 0.25, 0.5)
    umax = float(np.max(np.abs(u0)))
    return SplitSemidiscretization(
        name=f"example-4.2-w{omega:g}",
        explicit=burgers(grid, "upwind"),
        implicit=upwind_advection(grid, float(omega)),
        grid=grid, u0=u0,
        k_estimate=1.0 / omega,
        dt_fe_explicit=grid.dx / umax, dt_fe_implicit=grid.dx / omega)


def split_problems():
    """The named explicit/implicit splittings used by the experiment drivers."""
    entries = [_example_31(), _example_32(), _example_41(),
               _example_42(10.0), _example_42(100.0)]
    return {e.name: e for e in entries}


def _catalog_entries():
    entries = []

    sys_vdp = van_der_pol(10.0)
    entries.append(Problem(
        name="example-1.1", system=sys_vdp, u0=np.array([0.5, 0.0]),
        t_final=1.0, error_norm="component0",
        dt_list=(1 / 250, 1 / 350, 1 / 450, 1 / 550, 1 / 650),
        description="relaxation-oscillator ODE convergence study"))

    grid12 = Grid1D(0.0, 2.0 * math.pi, 11)
    D1 = spectral_derivative_matrix(grid12, 1)
    x12 = grid12.x
    entries.append(Problem(
        name="example-1.2",
        system=OdeSystem(OdePart(matrix=-D1, name="advection-spectral"),
                         n=grid12.n),
        u0=np.sin(x12), t_final=5.0, grid=grid12,
        exact=lambda t: np.sin(x12 - t),
        lambda_list=tuple(k / 10 for k in range(1, 10)),
        description="linear advection, spectral in space, exact reference"))

    grid13 = Grid1D(0.0, 2.0 * math.pi, 8)
    entries.append(Problem(
        name="example-1.3",
        system=OdeSystem(buckley_leverett(grid13), n=grid13.n),
        u0=np.sin(grid13.x), t_final=2.0, grid=grid13,
        error_norm="component0",
        lambda_list=(1 / 32, 1 / 16, 1 / 8, 1 / 4, 1 / 2),
        description="two-phase-flow flux, spectral in space"))

    grid2 = Grid1D(-1.0, 1.0, 600)
    entries.append(Problem(
        name="example-2",
        system=OdeSystem(upwind_advection(grid2, 1.0), n=grid2.n),
        u0=_step_ic(grid2, -0.1, 0.1), t_final=math.inf, grid=grid2,
        tv_measurable=True, dt_fe=grid2.dx,
        description="step advection for total-variation sharpness sweeps"))

    for split in split_problems().values():
        exact = None
        error_norm = "l2"
        t_final = 0.8 if split.name == "example-3.2" else 5.0
        if split.name == "example-3.1":
            x = split.grid.x
            exact = lambda t, _x=x: math.exp(-0.01 * t) * np.sin(_x - t)
        lambda_list = ()
        if split.name == "example-3.1":
            lambda_list = (1 / 16, 1 / 8, 1 / 4, 1 / 2)
        elif split.name == "example-3.2":
            lambda_list = (1 / 128, 1 / 64, 1 / 32, 1 / 16, 1 / 8)
        entries.append(Problem(
            name=split.name, system=split.system, u0=split.u0,
            t_final=t_final, grid=split.grid, exact=exact,
            error_norm=error_norm, lambda_list=lambda_list,
            tv_measurable=split.name.startswith("example-4"),
            dt_fe=split.dt_fe_explicit, k_actual=split.k_estimate,
            description=f"split problem {split.name}"))
    return entries


def problem_catalog():
    """All named problems, keyed by name."""
    return {p.name: p for p in _catalog_entries()}
