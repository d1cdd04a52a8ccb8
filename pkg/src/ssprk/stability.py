"""Linear stability analysis: the amplification function and region metrics.

For a tableau (A, b) the amplification factor of one step applied to
``u' = lam u`` is ``R(z) = 1 + z b' (I - z A)^{-1} e`` with ``z = lam dt``.
This module locates the leftmost real-axis point of the stability region,
the covered extent of (a neighborhood of) the imaginary axis, samples
A-stability, and extracts the ``|R| = 1`` contour on a grid.
"""

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .tableau import ButcherTableau, ImexTableau

__all__ = [
    "StabilityGrid",
    "StabilityQuery",
    "stability_function",
    "real_axis_crossing",
    "imaginary_axis_extent",
    "is_a_stable_sampled",
    "region_boundary",
    "boundary_csv",
    "read_boundary_csv",
    "construct_shu_osher_pair_family",
]

# |R| <= 1 + _EDGE_TOL counts as inside the region; absorbs roundoff on
# boundaries that sit exactly at |R| = 1 (e.g. any A-stable method on the
# imaginary axis).
_EDGE_TOL = 1e-9
_BRACKET_CAP = 1e7


def stability_function(t, z):
    """Evaluate ``R(z)``; poles are reported as complex infinity."""
    A, b, s = t.A, t.b, t.s
    z = complex(z)
    try:
        w = np.linalg.solve(np.eye(s) - z * A, np.ones(s))
    except np.linalg.LinAlgError:
        return complex(math.inf, 0.0)
    val = 1.0 + z * (b @ w)
    if not np.isfinite(val.real) or not np.isfinite(val.imag):
        return complex(math.inf, 0.0)
    return complex(val)


def _abs_r(t, z):
    val = stability_function(t, z)
    if not np.isfinite(val.real):
        return math.inf
    return abs(val)


def _first_violation(ok, ladder):
    """Scan an increasing ladder; return (last_ok, first_bad) or None."""
    prev = 0.0
    for x in ladder:
        if not ok(x):
            return prev, x
        prev = x
    return None


def real_axis_crossing(t, tol=1e-8, samples_per_bracket=64):
    """Leftmost x < 0 with ``|R| <= 1`` on all of ``[x, 0]``.

    Brackets by geometric expansion from -1 (with interior samples so dips
    above 1 between ladder points are not missed), then bisects the boundary
    to absolute tolerance ``tol``.  Returns 0 when the region excludes the
    immediate left of the origin and ``-inf`` when the whole sampled ray to
    1e7 is inside.
    """
    inside = lambda x: _abs_r(t, -x) <= 1.0 + _EDGE_TOL  # x is |Re z|

    if not inside(1e-10):
        return 0.0

    def segment_ok(lo, hi):
        # every sample in (lo, hi] must be inside
        pts = np.linspace(lo, hi, samples_per_bracket + 1)[1:]
        return all(inside(x) for x in pts)

    prev = 0.0
    x = 1.0
    bracket = None
    while x <= _BRACKET_CAP:
        if not segment_ok(prev, x):
            bracket = (prev, x)
            break
        prev = x
        x *= 2.0
    if bracket is None:
        return -math.inf
    lo, hi = bracket  # inside on [0, lo], violated somewhere in (lo, hi]
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if segment_ok(lo, mid):
            lo = mid
        else:
            hi = mid
    return -lo


def imaginary_axis_extent(t, proximity=0.0, tol=1e-6,
                          samples_per_bracket=64):
    """Largest y with the (near-)axis points inside the region up to i y.

    With ``proximity == 0`` the test point at height y is ``i y`` itself;
    with ``proximity > 0`` it is ``-proximity + i y``, i.e. the region is
    probed at that distance on the left of the axis.  Returns ``inf`` when
    the sampled ray up to 1e7 is entirely inside.  Extents below 1e-4 are
    reported as 0: near the origin ``|R| - 1`` grows like a power of y, so
    boundaries that small are artifacts of the edge tolerance rather than
    usable axis coverage.
    """
    offset = -abs(proximity)
    inside = lambda y: _abs_r(t, complex(offset, y)) <= 1.0 + _EDGE_TOL

    if not inside(1e-10):
        return 0.0

    def segment_ok(lo, hi):
        pts = np.linspace(lo, hi, samples_per_bracket + 1)[1:]
        return all(inside(y) for y in pts)

    prev = 0.0
    y = 1e-6
    bracket = None
    while y <= _BRACKET_CAP:
        if not segment_ok(prev, y):
            bracket = (prev, y)
            break
        prev = y
        y *= 2.0
    if bracket is None:
        return math.inf
    lo, hi = bracket
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if segment_ok(lo, mid):
            lo = mid
        else:
            hi = mid
    return lo if lo >= 1e-4 else 0.0


def is_a_stable_sampled(t, samples=None, tol=1e-12):
    """Sampled A-stability verdict: ``|R| <= 1`` on every sample point.

    This is a sampled check, not a proof.  The default sample set is a
    logarithmic sweep of the imaginary axis (1e-6 to 1e6, both signs) plus
    2000 seeded random points in the open left half-plane with log-uniform
    magnitudes.
    """
    if samples is None:
        ys = np.logspace(-6, 6, 1201)
        axis = np.concatenate([1j * ys, -1j * ys, [0.0 + 0.0j]])
        rng = np.random.default_rng(20240501)
        mag_x = 10.0 ** rng.uniform(-6, 6, size=2000)
        mag_y = 10.0 ** rng.uniform(-6, 6, size=2000)
        sign = rng.choice([-1.0, 1.0], size=2000)
        interior = -mag_x + 1j * (sign * mag_y)
        samples = np.concatenate([axis, interior])
    return all(_abs_r(t, z) <= 1.0 + tol for z in np.asarray(samples))


@dataclass
class StabilityGrid:
    """Rectangle in the complex plane with per-axis resolution."""
    re_min: float = -3.0
    re_max: float = 1.0
    im_min: float = -2.0
    im_max: float = 2.0
    n_re: int = 201
    n_im: int = 201

    def __post_init__(self):
        if self.n_re < 2 or self.n_im < 2:
            raise ValueError("grid resolution must be at least 2 per axis")

    @property
    def cell(self):
        dre = (self.re_max - self.re_min) / (self.n_re - 1)
        dim = (self.im_max - self.im_min) / (self.n_im - 1)
        return math.hypot(dre, dim)


@dataclass
class StabilityQuery:
    """A tableau with a scan grid and the axis-metric tolerances."""
    tableau: ButcherTableau
    grid: StabilityGrid
    axis_tol: float = 1e-6
    proximity: float = 0.0

    def metrics(self):
        return {
            "real_crossing": real_axis_crossing(self.tableau,
                                                tol=self.axis_tol),
            "imag_extent": imaginary_axis_extent(self.tableau,
                                                 proximity=self.proximity,
                                                 tol=self.axis_tol),
            "a_stable_sampled": is_a_stable_sampled(self.tableau),
        }


def _interp(p1, p2, v1, v2):
    # linear zero crossing of v between points p1 and p2
    if v2 == v1:
        return 0.5 * (p1 + p2)
    t = v1 / (v1 - v2)
    return p1 + t * (p2 - p1)


def region_boundary(t, grid=None):
    """Points of the ``|R(z)| = 1`` contour by marching squares.

    Returns a list of complex points (cell-edge crossings, consecutive pairs
    form segments).  Empty when the level set does not intersect the grid.
    """
    if grid is None:
        grid = StabilityGrid()
    xs = np.linspace(grid.re_min, grid.re_max, grid.n_re)
    ys = np.linspace(grid.im_min, grid.im_max, grid.n_im)
    vals = np.empty((grid.n_im, grid.n_re))
    for i, y in enumerate(ys):
        for j, x in enumerate(xs):
            r = _abs_r(t, complex(x, y))
            vals[i, j] = (r - 1.0) if math.isfinite(r) else 1e6
    pts = []
    for i in range(grid.n_im - 1):
        for j in range(grid.n_re - 1):
            corners = [
                (complex(xs[j], ys[i]), vals[i, j]),
                (complex(xs[j + 1], ys[i]), vals[i, j + 1]),
                (complex(xs[j + 1], ys[i + 1]), vals[i + 1, j + 1]),
                (complex(xs[j], ys[i + 1]), vals[i + 1, j]),
            ]
            crossings = []
            for k in range(4):
                p1, v1 = corners[k]
                p2, v2 = corners[(k + 1) % 4]
                if (v1 <= 0.0 < v2) or (v2 <= 0.0 < v1):
                    crossings.append(_interp(p1, p2, v1, v2))
            if len(crossings) >= 2:
                pts.extend(crossings[:2])
            if len(crossings) == 4:
                pts.extend(crossings[2:])
    return pts


def boundary_csv(points, path=None):
    lines = ["re,im"]
    lines.extend(f"{float(z.real)!r},{float(z.imag)!r}" for z in points)
    text = "\n".join(lines) + "\n"
    if path is not None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    return text


def read_boundary_csv(path_or_text):
    import os
    text = path_or_text
    if os.path.exists(str(path_or_text)):
        with open(path_or_text, "r", encoding="utf-8") as fh:
            text = fh.read()
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0] != "re,im":
        raise ValueError("not a boundary CSV")
    return [complex(float(a), float(b))
            for a, b in (ln.split(",") for ln in lines[1:])]


def construct_shu_osher_pair_family(beta):
    """Implicit partners of the three-stage third-order explicit SSP method.

    The explicit part is the classic Shu-Osher SSPRK(3,3).  The implicit
    part shares its weights and abscissas and is parameterized by the last
    diagonal entry ``beta``, with the middle-row entry fixed by
    ``gamma = (2 beta^2 - (3/2) beta + 1/3) / (2 - 4 beta)``.  Members with
    ``beta > 1/2`` are A-stable.  ``beta = 1/2`` makes ``gamma`` singular.

    The template is evaluated in exact rational arithmetic (pass a
    `fractions.Fraction` to keep the input exact as well) and rounded to
    floats once at the end.
    """
    beta = Fraction(beta)
    num = 2 * beta * beta - Fraction(3, 2) * beta + Fraction(1, 3)
    den = 2 - 4 * beta
    if den == 0:
        raise ValueError("beta = 1/2 makes the family parameter singular")
    gamma = num / den
    A = [
        [0, 0, 0],
        [1, 0, 0],
        [Fraction(1, 4), Fraction(1, 4), 0],
    ]
    b = [Fraction(1, 6), Fraction(1, 6), Fraction(2, 3)]
    At = [
        [0, 0, 0],
        [4 * gamma + 2 * beta, 1 - 4 * gamma - 2 * beta, 0],
        [Fraction(1, 2) - beta - gamma, gamma, beta],
    ]
    to_f = lambda rows: np.array([[float(x) for x in row] for row in rows])
    return ImexTableau(
        to_f(A), np.array([float(x) for x in b]),
        to_f(At), np.array([float(x) for x in b]),
        name=f"ssprk33-pair-beta-{float(beta):g}", pe=3, pi=3, p_lin=3,
        k_designed=math.inf)
