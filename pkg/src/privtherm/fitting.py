"""Least-squares scaling fits on log-transformed data."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError


@dataclass(frozen=True)
class ScalingFit:
    """y ~ prefactor * x^exponent (power) or prefactor * exp(exponent * x) (exponential)."""

    model: str
    exponent: float
    prefactor: float
    window: tuple
    max_residual: float

    @property
    def rate(self) -> float:
        """Decay rate of an exponential fit, -exponent."""
        return -self.exponent


def scaling_fit(x, y, model: str = "power", window: tuple | None = None) -> ScalingFit:
    """Fit ln y linearly against ln x (power) or x (exponential).

    ``max_residual`` is the largest absolute residual in ln y.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.size < 2:
        raise ValidationError("need at least two matching (x, y) points")
    if window is not None:
        sel = (x >= window[0]) & (x <= window[1])
        x, y = x[sel], y[sel]
        if x.size < 2:
            raise ValidationError(f"fewer than two points inside window {window}")
    if np.any(y <= 0):
        raise ValidationError("scaling fits need strictly positive y")
    if model == "power":
        if np.any(x <= 0):
            raise ValidationError("power-law fits need strictly positive x")
        u = np.log(x)
    elif model == "exponential":
        u = x
    else:
        raise ValidationError(f"unknown fit model {model!r}")
    if np.ptp(u) == 0:
        raise ValidationError("fit window is degenerate")
    v = np.log(y)
    slope, intercept = np.polyfit(u, v, 1)
    resid = v - (slope * u + intercept)
    return ScalingFit(model, float(slope), float(np.exp(intercept)),
                      (float(x.min()), float(x.max())), float(np.max(np.abs(resid))))
