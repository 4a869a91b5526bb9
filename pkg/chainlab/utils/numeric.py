"""
Arithmetic shared by every chain integral.

Products use the measure-theory convention 0 * inf = 0, so zero-length steps
and zero weights never produce NaN.
"""

import numpy as np

from chainlab.core.errors import LambdaOutOfRange, NonPositiveEps


def safe_product(a, b):
    """Elementwise a * b with 0 * inf = 0."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    with np.errstate(invalid="ignore"):
        out = a * b
    return np.where((a == 0.0) | (b == 0.0), 0.0, out)


def bracket(a, b, lam: float):
    """[a, b]_lam = lam * a + (1 - lam) * b."""
    return safe_product(lam, a) + safe_product(1.0 - lam, b)


def step_cost(g_start, g_end, length, lam: float):
    """Chain integral of g over one step of the given length."""
    return safe_product(bracket(g_start, g_end, lam), length)


def eps_threshold(eps: float, rel_tol: float) -> float:
    """Closed threshold with relative slack so float distances equal to eps are kept."""
    return eps * (1.0 + rel_tol)


def check_eps(eps: float) -> float:
    if not np.isfinite(eps) or eps <= 0.0:
        raise NonPositiveEps(f"Scale must be positive, got {eps}", {"eps": eps})
    return float(eps)


def check_lambda(lam: float) -> float:
    if not 0.0 <= lam <= 1.0:
        raise LambdaOutOfRange(f"lambda must lie in [0, 1], got {lam}", {"lambda": lam})
    return float(lam)


def lp_norm(values, weights, p: float) -> float:
    """(sum w |v|^p)^(1/p) with inf handled."""
    values = np.abs(np.asarray(values, dtype=float))
    weights = np.asarray(weights, dtype=float)
    if np.any((weights > 0) & np.isinf(values)):
        return float("inf")
    mask = weights > 0
    if not mask.any():
        return 0.0
    return float(np.sum(weights[mask] * values[mask] ** p) ** (1.0 / p))


def within(a: float, b: float, rel_tol: float) -> bool:
    """a <= b up to rel_tol * max(1, |a|, |b|)."""
    if np.isinf(b) and b > 0:
        return True
    return a <= b + rel_tol * max(1.0, abs(a), abs(b))
