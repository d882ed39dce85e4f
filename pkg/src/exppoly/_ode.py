"""Initial-value integrators for transport along parameter segments.

Two modes, both propagating y' = f(s, y) across s in [0, 1]:

* classical fixed-step fourth-order Runge-Kutta with a Richardson error
  estimate from a half-resolution rerun, and
* an embedded Dormand-Prince 5(4) pair with proportional step control.

The right-hand sides here are smooth and cheap, so a hand-rolled pair keeps
per-transport overhead far below a generic solver while staying fully
deterministic.
"""

from __future__ import annotations

from typing import Callable, Optional

import numpy as np

from .errors import OdeDivergence

# Dormand-Prince 5(4) tableau.
_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_B5 = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0)
_B4 = (5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40)

StepCallback = Optional[Callable[[float, np.ndarray], None]]


def rk4_fixed(
    f: Callable[[float, np.ndarray], np.ndarray],
    y0: np.ndarray,
    n_steps: int,
    callback: StepCallback = None,
) -> np.ndarray:
    y = np.array(y0, dtype=float)
    h = 1.0 / n_steps
    s = 0.0
    for _ in range(n_steps):
        k1 = f(s, y)
        k2 = f(s + 0.5 * h, y + 0.5 * h * k1)
        k3 = f(s + 0.5 * h, y + 0.5 * h * k2)
        k4 = f(s + h, y + h * k3)
        y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        s += h
        if callback is not None:
            callback(s, y)
    return y


def rk4_with_estimate(
    f: Callable[[float, np.ndarray], np.ndarray],
    y0: np.ndarray,
    n_steps: int,
    callback: StepCallback = None,
) -> tuple[np.ndarray, float]:
    """Fixed RK4 plus a Richardson error estimate from a half-step-count run."""
    fine = rk4_fixed(f, y0, n_steps, callback)
    coarse = rk4_fixed(f, y0, max(1, n_steps // 2))
    scale = max(float(np.max(np.abs(fine))), 1e-300)
    est = float(np.max(np.abs(fine - coarse))) / (15.0 * scale)
    return fine, est


def dopri45(
    f: Callable[[float, np.ndarray], np.ndarray],
    y0: np.ndarray,
    rtol: float,
    max_steps: int = 200_000,
    callback: StepCallback = None,
) -> tuple[np.ndarray, float]:
    """Adaptive Dormand-Prince over [0, 1]; returns (y(1), error accumulator).

    Error control is relative to the larger state components with a floored
    denominator, so a component passing through zero cannot stall the solver.
    The accumulator sums accepted per-step relative error estimates.
    """
    y = np.array(y0, dtype=float)
    s = 0.0
    h = 0.01
    accum = 0.0
    k1 = f(s, y)
    for _ in range(max_steps):
        if s >= 1.0:
            return y, accum
        h = min(h, 1.0 - s)
        if h < 1e-14:
            raise OdeDivergence("step size underflow in adaptive transport")
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            ks = [k1]
            for i in range(1, 7):
                yi = y + h * sum(a * k for a, k in zip(_A[i], ks))
                ks.append(f(s + _C[i] * h, yi))
            y5 = y + h * sum(b * k for b, k in zip(_B5, ks))
            y4 = y + h * sum(b * k for b, k in zip(_B4, ks))
        if not np.all(np.isfinite(y5)):
            h *= 0.2
            k1 = ks[0]
            continue
        err = np.abs(y5 - y4)
        ymag = max(float(np.max(np.abs(y))), float(np.max(np.abs(y5))), 1e-300)
        denom = rtol * np.maximum(np.maximum(np.abs(y), np.abs(y5)), 1e-3 * ymag)
        ratio = float(np.max(err / denom))
        if ratio <= 1.0:
            s += h
            y = y5
            k1 = ks[6]  # first-same-as-last
            accum += float(np.max(err)) / ymag
            if callback is not None:
                callback(s, y)
        else:
            k1 = ks[0]
        h *= min(5.0, max(0.2, 0.9 * (max(ratio, 1e-10)) ** -0.2))
    raise OdeDivergence(f"adaptive transport exceeded {max_steps} steps")
