"""Decay-rate fits, Arrhenius-form heating fits and critical-step extraction."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .ed import CorrelationSeries

__all__ = [
    "FitResult",
    "fit_exponential_decay",
    "fit_arrhenius",
    "CriticalPoint",
    "critical_jtau",
    "NO_CROSSING",
]

#: Sentinel returned by :func:`critical_jtau` when a curve never drops
#: below the threshold inside the scanned grid.
NO_CROSSING = None

DEFAULT_DECAY_WINDOW = (20, 64)


@dataclass
class FitResult:
    params: dict
    stderr: dict
    window: tuple | None
    residual_norm: float

    def __post_init__(self):
        if not np.isfinite(self.residual_norm):
            raise ValueError("fit produced a non-finite residual")
        for name, err in self.stderr.items():
            if err < 0:
                raise ValueError(f"negative standard error for {name}")


def fit_exponential_decay(
    series: CorrelationSeries | np.ndarray,
    window: tuple = DEFAULT_DECAY_WINDOW,
) -> FitResult:
    """Fit value(n) = A exp(-gamma n) on a window by linear least squares in log space.

    The default window n in [20, 64] targets the post-transient decay.
    All windowed values must be positive (the log is taken) and the window
    must lie inside the series.
    """
    values = series.values if isinstance(series, CorrelationSeries) else np.asarray(series, dtype=float)
    n_lo, n_hi = int(window[0]), int(window[1])
    if n_lo < 0 or n_hi >= values.shape[0] or n_lo > n_hi:
        raise ValueError(f"window {window} outside series of length {values.shape[0]}")
    y = values[n_lo : n_hi + 1]
    if np.any(y <= 0.0):
        raise ValueError("nonpositive values in fit window; log-linear fit undefined")
    x = np.arange(n_lo, n_hi + 1, dtype=float)
    logy = np.log(y)
    design = np.column_stack([np.ones_like(x), x])
    coef, *_ = np.linalg.lstsq(design, logy, rcond=None)
    resid = design @ coef - logy
    ssr = float(resid @ resid)
    dof = max(len(x) - 2, 1)
    cov = ssr / dof * np.linalg.inv(design.T @ design)
    amplitude = float(np.exp(coef[0]))
    gamma = float(-coef[1])
    return FitResult(
        params={"gamma": gamma, "amplitude": amplitude},
        stderr={
            "gamma": float(np.sqrt(cov[1, 1])),
            "amplitude": float(amplitude * np.sqrt(cov[0, 0])),
        },
        window=(n_lo, n_hi),
        residual_norm=float(np.sqrt(ssr)),
    )


def _gauss_newton_arrhenius(x, y, p0, max_iter=200):
    """Damped Gauss-Newton for gamma = a exp(-b/x) + c from one start."""
    p = np.asarray(p0, dtype=float).copy()

    def residuals(p):
        a, b, c = p
        return a * np.exp(-b / x) + c - y

    r = residuals(p)
    ssr = float(r @ r)
    jac = None
    for _ in range(max_iter):
        a, b, _ = p
        e = np.exp(-b / x)
        jac = np.column_stack([e, -a * e / x, np.ones_like(x)])
        step, *_ = np.linalg.lstsq(jac, -r, rcond=None)
        if not np.all(np.isfinite(step)):
            return None
        scale = 1.0
        for _ in range(40):
            trial = p + scale * step
            r_trial = residuals(trial)
            ssr_trial = float(r_trial @ r_trial)
            if np.isfinite(ssr_trial) and ssr_trial <= ssr:
                break
            scale *= 0.5
        else:
            break
        moved = float(np.abs(scale * step).max())
        p, r, ssr = trial, r_trial, ssr_trial
        if moved <= 1e-12 * (1.0 + float(np.abs(p).max())):
            break
    return p, r, ssr, jac


def fit_arrhenius(points) -> FitResult:
    """Nonlinear fit of gamma(Jtau) = a exp(-b / Jtau) + c.

    Gauss-Newton from multiple starts: b runs over a log-spaced grid, and
    for each fixed b the linear subproblem in (a, c) seeds the iteration.
    Standard errors come from the Jacobian at the optimum.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 4:
        raise ValueError("need at least 4 (Jtau, gamma) points")
    x, y = pts[:, 0], pts[:, 1]
    if np.any(x <= 0.0):
        raise ValueError("Jtau values must be positive")
    b_grid = np.geomspace(0.1 * x.min(), 100.0 * x.max(), 14)
    best = None
    for b0 in b_grid:
        e = np.exp(-b0 / x)
        design = np.column_stack([e, np.ones_like(x)])
        (a0, c0), *_ = np.linalg.lstsq(design, y, rcond=None)
        result = _gauss_newton_arrhenius(x, y, (a0, b0, c0))
        if result is None:
            continue
        p, r, ssr, jac = result
        if best is None or ssr < best[2]:
            best = (p, r, ssr, jac)
    if best is None:
        raise RuntimeError("Arrhenius fit failed to converge from every start")
    p, _, ssr, jac = best
    dof = max(len(x) - 3, 1)
    cov = ssr / dof * np.linalg.pinv(jac.T @ jac)
    stderr = np.sqrt(np.abs(np.diag(cov)))
    return FitResult(
        params={"a": float(p[0]), "b": float(p[1]), "c": float(p[2])},
        stderr={"a": float(stderr[0]), "b": float(stderr[1]), "c": float(stderr[2])},
        window=None,
        residual_norm=float(np.sqrt(ssr)),
    )


@dataclass
class CriticalPoint:
    """Critical Trotter steps of one observable along a control axis (L or n)."""

    observable: str
    control: list
    jc_tau: list
    threshold: float
    reference: list = field(default_factory=list)


def critical_jtau(curve, threshold: float = 0.5):
    """First Jtau where the piecewise-linear interpolant drops below threshold.

    ``curve`` is a sorted sequence of (Jtau, normalized value).  A later
    revival above the threshold is ignored: the first downward crossing is
    the reported point.  Returns :data:`NO_CROSSING` when the curve never
    drops below the threshold.
    """
    pts = [(float(a), float(b)) for a, b in curve]
    if len(pts) < 2:
        raise ValueError("need at least two curve points")
    xs = [a for a, _ in pts]
    if any(x2 <= x1 for x1, x2 in zip(xs, xs[1:])):
        raise ValueError("curve must be sorted by strictly increasing Jtau")
    for (x1, v1), (x2, v2) in zip(pts, pts[1:]):
        if v1 >= threshold and v2 < threshold:
            return x1 + (v1 - threshold) / (v1 - v2) * (x2 - x1)
    return NO_CROSSING
