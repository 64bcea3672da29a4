"""Numeric kernels and a finite-difference gradient checker.

Everything here is a pure function in 64-bit floats.  The model is small
enough that determinism and gradient-check headroom beat raw speed, so
there is no autodiff tape and no GPU path; backward passes elsewhere are
written by hand against these primitives.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

# Largest double below 1.0 and smallest above 0.0: sigmoid saturates to
# exactly 1.0 in float64 for x > ~36.7, which would break the open-interval
# (0, 1) contract that relevance weights rely on.
_ONE_BELOW = np.nextafter(1.0, 0.0)
_ZERO_ABOVE = np.nextafter(0.0, 1.0)


def affine_window(W: np.ndarray, x: np.ndarray) -> np.ndarray:
    """W @ x for one concatenated window (no bias term)."""
    if W.shape[1] != x.shape[0]:
        raise ValueError(f"shape mismatch: W is {W.shape}, x is {x.shape}")
    return W @ x


def tanh_map(v: np.ndarray) -> np.ndarray:
    return np.tanh(v)


def sigmoid(x: float) -> float:
    """Logistic function, branch on sign for stability, output in open (0,1)."""
    if x >= 0:
        out = 1.0 / (1.0 + np.exp(-x))
    else:
        e = np.exp(x)
        out = e / (1.0 + e)
    return float(min(max(out, _ZERO_ABOVE), _ONE_BELOW))


def max_over_time(feature_map: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Per-row max and the lowest column index attaining it.

    The returned indices are the backward routing for the pooled values.
    """
    if feature_map.ndim != 2 or feature_map.shape[1] < 1:
        raise ValueError(f"need an l x T matrix with T >= 1, got {feature_map.shape}")
    idx = np.argmax(feature_map, axis=1)  # argmax returns the first maximum
    vals = feature_map[np.arange(feature_map.shape[0]), idx]
    return vals, idx


def bilinear(u: np.ndarray, M: np.ndarray, v: np.ndarray) -> float:
    if M.shape != (u.shape[0], v.shape[0]):
        raise ValueError(
            f"shape mismatch: u is {u.shape}, M is {M.shape}, v is {v.shape}"
        )
    return float(u @ M @ v)


def cosine(u: np.ndarray, v: np.ndarray) -> float:
    """Cosine similarity with a zero-vector convention.

    Either norm below 1e-12 yields 0, so an all-OOV sentence ranks
    neutrally instead of dividing by zero.
    """
    if u.shape != v.shape:
        raise ValueError(f"length mismatch: {u.shape} vs {v.shape}")
    nu = float(np.linalg.norm(u))
    nv = float(np.linalg.norm(v))
    if nu < 1e-12 or nv < 1e-12:
        return 0.0
    return float(np.clip(float(u @ v) / (nu * nv), -1.0, 1.0))


def cosine_grad(u: np.ndarray, v: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Gradients of cosine(u, v) w.r.t. u and v (zero under the convention)."""
    nu = float(np.linalg.norm(u))
    nv = float(np.linalg.norm(v))
    if nu < 1e-12 or nv < 1e-12:
        return np.zeros_like(u), np.zeros_like(v)
    c = float(u @ v) / (nu * nv)
    gu = v / (nu * nv) - c * u / (nu * nu)
    gv = u / (nu * nv) - c * v / (nv * nv)
    return gu, gv


@dataclass(frozen=True)
class GradCheckReport:
    max_rel_error: float
    worst_parameter: str
    passed: bool


def grad_check(
    loss_fn: Callable[[np.ndarray], tuple[float, np.ndarray]],
    params: np.ndarray,
    epsilon: float = 1e-5,
    threshold: float = 1e-4,
    names: Callable[[int], str] | None = None,
) -> GradCheckReport:
    """Compare an analytic gradient against central differences.

    ``loss_fn`` maps a flat parameter vector to (loss, flat gradient) and
    must be deterministic.  Relative error per coordinate is
    |a - n| / max(|a|, |n|, 1e-8).
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    _, analytic = loss_fn(params)
    analytic = np.asarray(analytic, dtype=float).ravel()
    max_err = 0.0
    worst = ""
    for i in range(params.size):
        bumped = params.copy()
        bumped[i] = params[i] + epsilon
        f_plus, _ = loss_fn(bumped)
        bumped[i] = params[i] - epsilon
        f_minus, _ = loss_fn(bumped)
        numeric = (f_plus - f_minus) / (2.0 * epsilon)
        denom = max(abs(analytic[i]), abs(numeric), 1e-8)
        err = abs(analytic[i] - numeric) / denom
        if err > max_err:
            max_err = err
            worst = names(i) if names else f"theta[{i}]"
    return GradCheckReport(
        max_rel_error=max_err,
        worst_parameter=worst,
        passed=max_err < threshold,
    )
