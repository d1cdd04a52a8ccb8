"""Experiment drivers: convergence studies with slope fits, total-variation
violation sweeps with bisection refinement, and predicted-versus-observed
step-size tables.

Every driver is deterministic for fixed inputs, and every CSV it emits can
be read back by the matching ``read_*`` function.  When an output directory
is given, each artifact gains a JSON sidecar recording the grid, initial
condition, tolerances, and normalization, so every number is auditable.
"""

import json
import math
import os
from dataclasses import dataclass, field

import numpy as np

from .integrators import integrate, reference_solution
from .problems import max_tv_rise
from .ssp import ImexSspQuery, imex_ssp_radius, ssp_radius
from .tableau import ButcherTableau, ImexTableau, ShuOsherForm, \
    shu_osher_to_butcher

__all__ = [
    "ConvergenceResult",
    "SweepResult",
    "run_convergence",
    "run_tvd_sweep",
    "run_predicted_vs_observed",
    "read_convergence_csv",
    "read_sweep_csv",
    "read_compare_csv",
    "write_sidecar",
]


def write_sidecar(path, payload):
    """Drop ``<path>.meta.json`` describing how an artifact was produced."""
    meta_path = f"{path}.meta.json"
    with open(meta_path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, default=str)
    return meta_path


def certified_radius(method, k=None):
    """Fresh radius certificate for either a single method or a pair."""
    if isinstance(method, ImexTableau):
        if k is None:
            raise ValueError("an additive pair needs the ratio K")
        return imex_ssp_radius(ImexSspQuery(method, k))
    if isinstance(method, ShuOsherForm):
        method = shu_osher_to_butcher(method)
    return ssp_radius(method)


# ---------------------------------------------------------------------------
# Convergence studies.

@dataclass
class ConvergenceResult:
    dts: list
    errors: list
    slope: float
    window: list           # True where the point entered the fit
    adjusted_t: list = field(default_factory=list)

    def to_csv(self, path=None):
        lines = ["dt,error,in_fit_window"]
        for dt, err, used in zip(self.dts, self.errors, self.window):
            lines.append(f"{dt!r},{err!r},{int(used)}")
        text = "\n".join(lines) + "\n"
        if path is not None:
            with open(path, "w", encoding="utf-8") as fh:
                fh.write(text)
        return text


def read_convergence_csv(path_or_text):
    text = _read_text(path_or_text)
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0] != "dt,error,in_fit_window":
        raise ValueError("not a convergence CSV")
    dts, errors, window = [], [], []
    for ln in lines[1:]:
        a, b, c = ln.split(",")
        dts.append(float(a))
        errors.append(float(b))
        window.append(bool(int(c)))
    slope = fit_slope(dts, errors, window)
    return ConvergenceResult(dts=dts, errors=errors, slope=slope,
                             window=window)


def _read_text(path_or_text):
    if os.path.exists(str(path_or_text)):
        with open(path_or_text, "r", encoding="utf-8") as fh:
            return fh.read()
    return path_or_text


def fit_slope(dts, errors, window=None):
    """Least-squares slope of log error against log step size."""
    dts = np.asarray(dts, dtype=float)
    errors = np.asarray(errors, dtype=float)
    if window is None:
        window = np.ones(dts.shape, dtype=bool)
    else:
        window = np.asarray(window, dtype=bool)
    keep = window & (errors > 0)
    if keep.sum() < 2:
        return math.nan
    coeff = np.polyfit(np.log10(dts[keep]), np.log10(errors[keep]), 1)
    return float(coeff[0])


def run_convergence(method, problem, dt_list=None, t_final=None,
                    reference_tol=1e-12, out_path=None):
    """Integrate at each step size and fit the error-decay slope.

    The final time is adjusted by less than one step to the nearest integer
    multiple of each dt (and recorded).  Errors are measured against the
    problem's exact solution when it has one, otherwise against the
    verified adaptive reference at that adjusted time.  Points below the
    roundoff floor (100 eps times the reference magnitude) are excluded
    from the fit window.
    """
    dts = list(dt_list) if dt_list is not None else problem.dts()
    t_target = problem.t_final if t_final is None else t_final
    sys = problem.system
    ref_cache = {}

    dts_used, errors, window, adjusted = [], [], [], []
    for dt in dts:
        n = max(1, round(t_target / dt))
        t_adj = n * dt
        traj = integrate(method, sys, problem.u0, dt, t_adj)
        if problem.exact is not None:
            ref = np.asarray(problem.exact(t_adj))
        else:
            if t_adj not in ref_cache:
                ref_cache[t_adj] = reference_solution(
                    sys, problem.u0, t_adj, tol=reference_tol)
            ref = ref_cache[t_adj]
        err = problem.error(traj.final_state, ref)
        floor = 100.0 * np.finfo(float).eps * max(
            1.0, float(np.max(np.abs(ref))))
        dts_used.append(dt)
        errors.append(err)
        window.append(err > floor)
        adjusted.append(t_adj)

    slope = fit_slope(dts_used, errors, window)
    result = ConvergenceResult(dts=dts_used, errors=errors, slope=slope,
                               window=window, adjusted_t=adjusted)
    if out_path is not None:
        result.to_csv(out_path)
        write_sidecar(out_path, {
            "problem": problem.name,
            "t_target": t_target,
            "adjusted_t": adjusted,
            "error_norm": problem.error_norm,
            "reference": "exact" if problem.exact else
                         f"adaptive(tol={reference_tol})",
            "slope": slope,
        })
    return result


# ---------------------------------------------------------------------------
# Total-variation violation sweeps.

@dataclass
class SweepResult:
    lambdas: list          # every probed step ratio, in probe order
    rises: list            # matching max TV rise over the first n steps
    lambda_star: float     # largest non-violating ratio found
    bracket_width: float
    predicted_lambda: float
    violated: bool         # False when the cap was reached without one
    n_steps: int = 20
    threshold: float = 1e-10

    def to_csv(self, path=None):
        lines = ["lambda,max_tv_rise"]
        for lam, rise in zip(self.lambdas, self.rises):
            lines.append(f"{lam!r},{rise!r}")
        text = "\n".join(lines) + "\n"
        if path is not None:
            with open(path, "w", encoding="utf-8") as fh:
                fh.write(text)
        return text


def read_sweep_csv(path_or_text):
    text = _read_text(path_or_text)
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0] != "lambda,max_tv_rise":
        raise ValueError("not a sweep CSV")
    rows = [tuple(float(t) for t in ln.split(",")) for ln in lines[1:]]
    return rows


def run_tvd_sweep(method, problem, n_steps=20, threshold=1e-10,
                  refine_width=1e-12, lam_start=None, lam_cap=None,
                  ladder=1.05, out_path=None):
    """Locate the step ratio where total variation starts to rise.

    Probes ``dt = lambda dx`` on a multiplicative ladder starting from the
    smaller of a tenth of the predicted ratio and 0.1, declares a violation
    when the variation rises by at least ``threshold`` within the first
    ``n_steps`` steps, and bisects the bracketing interval down to
    ``refine_width``.  The prediction comes from a fresh radius certificate
    scaled by the problem's forward-Euler step (for pairs, at the problem's
    actual ratio K).
    """
    if not problem.tv_measurable or problem.grid is None:
        raise ValueError(f"problem {problem.name} is not swept for total "
                         "variation")
    dx = problem.grid.dx
    dt_fe = problem.dt_fe if problem.dt_fe is not None else dx
    if isinstance(method, ImexTableau):
        r = certified_radius(method, k=problem.k_actual)
    else:
        r = certified_radius(method)
    predicted = r * dt_fe / dx

    def rise_at(lam):
        dt = lam * dx
        traj = integrate(method, problem.system, problem.u0, dt,
                         n_steps * dt)
        return max_tv_rise(traj)

    if lam_start is None:
        lam_start = min(predicted / 10.0, 0.1)
        if not (lam_start > 0):
            lam_start = 0.01
    if lam_cap is None:
        lam_cap = max(3.0 * predicted, 0.5)

    lambdas, rises = [], []
    lam_ok, lam_bad = None, None
    lam = lam_start
    while lam <= lam_cap:
        rise = rise_at(lam)
        lambdas.append(lam)
        rises.append(rise)
        if rise >= threshold:
            lam_bad = lam
            break
        lam_ok = lam
        lam *= ladder
    violated = lam_bad is not None
    if violated and lam_ok is None:
        lam_ok = 0.0  # violated at the very first probe

    if violated:
        lo, hi = lam_ok, lam_bad
        while hi - lo > refine_width:
            mid = 0.5 * (lo + hi)
            rise = rise_at(mid)
            lambdas.append(mid)
            rises.append(rise)
            if rise >= threshold:
                hi = mid
            else:
                lo = mid
        lam_star, width = lo, hi - lo
    else:
        lam_star, width = lam_ok if lam_ok is not None else 0.0, math.inf

    result = SweepResult(lambdas=lambdas, rises=rises, lambda_star=lam_star,
                         bracket_width=width, predicted_lambda=predicted,
                         violated=violated, n_steps=n_steps,
                         threshold=threshold)
    if out_path is not None:
        result.to_csv(out_path)
        write_sidecar(out_path, {
            "problem": problem.name,
            "grid": {"a": problem.grid.a, "b": problem.grid.b,
                     "n": problem.grid.n, "dx": dx},
            "n_steps": n_steps,
            "threshold": threshold,
            "refine_width": refine_width,
            "dt_fe": dt_fe,
            "k_actual": problem.k_actual,
            "certified_radius": r,
            "predicted_lambda": predicted,
            "lambda_star": lam_star,
            "normalization": "predicted_lambda = radius * dt_fe / dx",
        })
    return result


# ---------------------------------------------------------------------------
# Predicted-versus-observed tables for additive pairs.

def run_predicted_vs_observed(methods, problems_by_omega, baseline=None,
                              out_path=None, **sweep_kwargs):
    """One sweep per (pair, omega); rows compare prediction to observation.

    ``methods`` maps names to pairs; ``problems_by_omega`` maps each
    wavespeed ratio to the problem it defines.  ``baseline`` optionally
    maps omegas to a single explicit method whose own observed ratio fills
    the ratio column.
    """
    rows = []
    base_obs = {}
    if baseline is not None:
        for omega, problem in problems_by_omega.items():
            sweep = run_tvd_sweep(baseline, problem, **sweep_kwargs)
            base_obs[omega] = sweep.lambda_star
    for name in sorted(methods):
        pair = methods[name]
        for omega in sorted(problems_by_omega):
            problem = problems_by_omega[omega]
            sweep = run_tvd_sweep(pair, problem, **sweep_kwargs)
            ratio = (sweep.lambda_star / base_obs[omega]
                     if base_obs.get(omega) else math.nan)
            rows.append({
                "method": name,
                "s": pair.s,
                "pe": pair.pe,
                "p_lin": pair.p_lin,
                "omega": omega,
                "predicted": sweep.predicted_lambda,
                "observed": sweep.lambda_star,
                "ratio": ratio,
            })
    if out_path is not None:
        write_compare_csv(rows, out_path)
        write_sidecar(out_path, {
            "methods": sorted(methods),
            "omegas": sorted(problems_by_omega),
            "normalization": "columns are step ratios dt/dx; predicted = "
                             "certified radius at K = 1/omega (dt_fe "
                             "normalized)",
            "sweep_options": sweep_kwargs,
        })
    return rows


def write_compare_csv(rows, path=None):
    lines = ["method,s,pe,p_lin,omega,predicted,observed,ratio"]
    for row in rows:
        lines.append(
            f"{row['method']},{row['s']},{row['pe']},{row['p_lin']},"
            f"{row['omega']!r},{row['predicted']!r},{row['observed']!r},"
            f"{row['ratio']!r}")
    text = "\n".join(lines) + "\n"
    if path is not None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    return text


def read_compare_csv(path_or_text):
    text = _read_text(path_or_text)
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or not lines[0].startswith("method,"):
        raise ValueError("not a comparison CSV")
    rows = []
    for ln in lines[1:]:
        method, s, pe, p_lin, omega, predicted, observed, ratio = \
            ln.split(",")
        rows.append({
            "method": method, "s": int(s),
            "pe": None if pe == "None" else int(pe),
            "p_lin": None if p_lin == "None" else int(p_lin),
            "omega": float(omega), "predicted": float(predicted),
            "observed": float(observed), "ratio": float(ratio),
        })
    return rows
