"""Least-squares fits of the learning window: per-side exponential and
linear models with R-squared reporting.

Both sides are fitted on level-change magnitudes so the exponential
amplitude stays positive; the reset side is mirrored back below zero when
the curves are drawn.  Exponential fits start from ordinary least squares
on the log-values and are refined by Gauss-Newton with a step-halving line
search, so the sum of squared residuals never increases on an accepted
step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import ConfigurationError

MAX_ITERATIONS = 100
REL_TOL = 1e-9
MAX_HALVINGS = 20


@dataclass(frozen=True)
class FitOptions:
    """Fit domains and target statistic for the window fits."""

    set_domain: tuple[float, float] = (1.0, 5.0)
    reset_domain: tuple[float, float] = (-5.0, -1.0)
    target: str = "mode"  # or "mean"

    def __post_init__(self) -> None:
        if self.target not in ("mode", "mean"):
            raise ConfigurationError(f"fit target must be 'mode' or 'mean', got {self.target!r}")
        for name, dom in (("set_domain", self.set_domain), ("reset_domain", self.reset_domain)):
            if len(dom) != 2 or not (dom[0] <= dom[1]):
                raise ConfigurationError(f"{name} must be (lo, hi) with lo <= hi, got {dom}")


@dataclass(frozen=True)
class FitResult:
    """One fitted model on one side of the window.

    params (a, b) mean y = a * exp(b * dt) for the exponential model and
    y = a + b * dt for the linear one.
    """

    model: str                  # "exponential" | "linear"
    side: str                   # "set" | "reset"
    a: float
    b: float
    r_squared: float
    n_points: int
    domain: tuple[float, float]
    converged: bool
    iterations: int
    target: str = "mode"
    status: str = "ok"          # "ok" | "skipped"
    n_excluded: int = 0         # non-positive values dropped before an exponential fit

    def predict(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.model == "exponential":
            return self.a * np.exp(self.b * x)
        return self.a + self.b * x

    def to_record(self) -> dict:
        def _num(v: float):
            return None if (isinstance(v, float) and math.isnan(v)) else v

        return {
            "model": self.model,
            "side": self.side,
            "target": self.target,
            "a": _num(self.a),
            "b": _num(self.b),
            "r_squared": _num(self.r_squared),
            "n_points": self.n_points,
            "domain": list(self.domain),
            "converged": self.converged,
            "iterations": self.iterations,
            "status": self.status,
            "n_excluded": self.n_excluded,
        }


def _skipped(model: str, side: str, target: str, domain, n_points: int, n_excluded: int = 0) -> FitResult:
    nan = float("nan")
    return FitResult(
        model=model,
        side=side,
        a=nan,
        b=nan,
        r_squared=nan,
        n_points=n_points,
        domain=tuple(domain),
        converged=False,
        iterations=0,
        target=target,
        status="skipped",
        n_excluded=n_excluded,
    )


def _split_points(points: Iterable[tuple[float, float]]) -> tuple[np.ndarray, np.ndarray]:
    pts = list(points)
    x = np.array([p[0] for p in pts], dtype=float)
    y = np.array([p[1] for p in pts], dtype=float)
    return x, y


def _r_squared(y: np.ndarray, fitted: np.ndarray) -> float:
    with np.errstate(over="ignore", invalid="ignore"):
        ss_res = float(np.sum((y - fitted) ** 2))
        ss_tot = float(np.sum((y - y.mean()) ** 2))
        if ss_tot == 0.0:
            return 1.0 if ss_res == 0.0 else -math.inf
        return 1.0 - ss_res / ss_tot


def fit_linear(
    points: Sequence[tuple[float, float]],
    side: str = "set",
    target: str = "mode",
    domain: tuple[float, float] | None = None,
) -> FitResult:
    """Ordinary least squares for y = a + b * dt.

    R-squared is 1 - SS_res/SS_tot, defined as 1 for constant data fitted
    exactly.  All-equal abscissae are a configuration error.
    """
    x, y = _split_points(points)
    if len(x) < 2:
        raise ConfigurationError(f"linear fit needs >= 2 points, got {len(x)}")
    xm = x.mean()
    s_xx = float(np.sum((x - xm) ** 2))
    if s_xx == 0.0:
        raise ConfigurationError("linear fit needs at least two distinct dt values")
    b = float(np.sum((x - xm) * (y - y.mean())) / s_xx)
    a = float(y.mean() - b * xm)
    dom = domain if domain is not None else (float(x.min()), float(x.max()))
    return FitResult(
        model="linear",
        side=side,
        a=a,
        b=b,
        r_squared=_r_squared(y, a + b * x),
        n_points=len(x),
        domain=tuple(dom),
        converged=True,
        iterations=0,
        target=target,
    )


def _exp_ss_res(a: float, b: float, x: np.ndarray, y: np.ndarray) -> float:
    with np.errstate(over="ignore", invalid="ignore"):
        r = a * np.exp(np.clip(b * x, -700.0, 700.0)) - y
        return float(np.dot(r, r))


def fit_exponential(
    points: Sequence[tuple[float, float]],
    side: str = "set",
    target: str = "mode",
    domain: tuple[float, float] | None = None,
) -> FitResult:
    """Two-parameter exponential y = a * exp(b * dt), a > 0.

    Non-positive y values cannot enter the log-space initialisation and are
    excluded (counted in n_excluded); fewer than 3 usable points yields a
    skipped result rather than an error.  The refinement is Gauss-Newton on
    the original residuals with at most MAX_HALVINGS step halvings per
    iteration; steps that do not reduce SS_res (or would push a below zero)
    are rejected.
    """
    x_all, y_all = _split_points(points)
    keep = y_all > 0.0
    x, y = x_all[keep], y_all[keep]
    n_excluded = int(len(y_all) - len(y))
    dom = domain if domain is not None else (
        (float(x_all.min()), float(x_all.max())) if len(x_all) else (0.0, 0.0)
    )
    if len(x) < 3:
        return _skipped("exponential", side, target, dom, len(x), n_excluded)

    # log-space least squares gives the starting point
    coeffs = np.polyfit(x, np.log(y), 1)
    b = float(coeffs[0])
    a = float(np.exp(coeffs[1]))

    ss = _exp_ss_res(a, b, x, y)
    converged = False
    iterations = 0
    for iterations in range(1, MAX_ITERATIONS + 1):
        with np.errstate(over="ignore", invalid="ignore"):
            e = np.exp(np.clip(b * x, -700.0, 700.0))
            r = a * e - y
            j = np.column_stack([e, a * x * e])  # d r / d(a, b)
            jtj = j.T @ j
            jtr = j.T @ r
        try:
            step = np.linalg.solve(jtj, jtr)
        except np.linalg.LinAlgError:
            break
        if not np.all(np.isfinite(step)):
            break

        scale = 1.0
        accepted = False
        for _ in range(MAX_HALVINGS + 1):
            a_new = a - scale * step[0]
            b_new = b - scale * step[1]
            if a_new > 0.0:
                ss_new = _exp_ss_res(a_new, b_new, x, y)
                if ss_new <= ss:
                    accepted = True
                    break
            scale *= 0.5
        if not accepted:
            break

        rel = max(
            abs(a_new - a) / max(abs(a), 1e-300),
            abs(b_new - b) / max(abs(b), 1e-300),
        )
        a, b, ss = a_new, b_new, ss_new
        if rel < REL_TOL:
            converged = True
            break

    with np.errstate(over="ignore"):
        fitted = a * np.exp(np.clip(b * x, -700.0, 700.0))
    return FitResult(
        model="exponential",
        side=side,
        a=a,
        b=b,
        r_squared=_r_squared(y, fitted),
        n_points=len(x),
        domain=tuple(dom),
        converged=converged,
        iterations=iterations,
        target=target,
        n_excluded=n_excluded,
    )


def _window_points(result, target: str, domain: tuple[float, float]) -> list[tuple[float, float]]:
    """(dt, |target statistic|) pairs of the grid points inside a domain."""
    lo, hi = domain
    pts = []
    for p in result.points:
        if lo <= p.dt <= hi:
            value = float(p.mode) if target == "mode" else float(p.mean)
            pts.append((p.dt, abs(value)))
    return pts


def fit_window(
    result,
    target: str = "mode",
    set_domain: tuple[float, float] = (1.0, 5.0),
    reset_domain: tuple[float, float] = (-5.0, -1.0),
) -> list[FitResult]:
    """All four window fits: {exponential, linear} x {set, reset}.

    Both models are reported for both sides; nothing here ranks them.
    Sides without enough usable points come back with status "skipped"
    instead of raising, so a partial grid still yields a complete table.
    """
    if target not in ("mode", "mean"):
        raise ConfigurationError(f"fit target must be 'mode' or 'mean', got {target!r}")
    fits: list[FitResult] = []
    for side, domain in (("set", set_domain), ("reset", reset_domain)):
        pts = _window_points(result, target, domain)
        fits.append(fit_exponential(pts, side=side, target=target, domain=domain))
        if len(pts) >= 2 and len({p[0] for p in pts}) >= 2:
            fits.append(fit_linear(pts, side=side, target=target, domain=domain))
        else:
            fits.append(_skipped("linear", side, target, domain, len(pts)))
    return fits
