"""Iterated logarithms clamped at e, and the probe family f_tau.

``L(x) = log(max(e, x))`` so that ``L >= 1`` everywhere and the iterates
``LL = L o L`` and ``LLL = L o L o L`` are also bounded below by one.

Most of the package works with ``u = log(x)`` instead of ``x`` so that
arguments like ``x**2`` with ``x = 1e300`` never leave double range; the
``*_from_log`` helpers take that log argument.
"""

from __future__ import annotations

import math

import numpy as np

# exp() overflows a double just above this
EXP_LIMIT = 709.0


class DomainError(ValueError):
    """Argument outside the domain of a log-scale function."""


def _check(x: float) -> float:
    x = float(x)
    if not math.isfinite(x) or x < 0.0:
        raise DomainError(f"expected a finite nonnegative argument, got {x!r}")
    return x


def L(x: float) -> float:
    x = _check(x)
    if x <= math.e:
        return 1.0
    return math.log(x)


def LL(x: float) -> float:
    return L(L(x))


def LLL(x: float) -> float:
    return L(L(L(x)))


def L_from_log(u: float) -> float:
    """``L(exp(u))``; ``u`` may be ``-inf`` (x = 0)."""
    return u if u > 1.0 else 1.0


def LL_from_log(u: float) -> float:
    return L(L_from_log(u))


def LLL_from_log(u: float) -> float:
    return L(LL_from_log(u))


def L_array(u: np.ndarray) -> np.ndarray:
    """Vectorised ``L_from_log``."""
    return np.maximum(np.asarray(u, dtype=float), 1.0)


def LL_array(u: np.ndarray) -> np.ndarray:
    return L_array(np.log(L_array(u)))


def LLL_array(u: np.ndarray) -> np.ndarray:
    return L_array(np.log(LL_array(u)))


def _check_tau(tau: float) -> float:
    tau = float(tau)
    if not 0.0 <= tau <= 1.0:
        raise DomainError(f"tau must lie in [0, 1], got {tau!r}")
    return tau


def log_f_tau_from_log(u: float, tau: float) -> float:
    """``log f_tau(exp(u)) = L(exp(u))**tau``."""
    return L_from_log(u) ** _check_tau(tau)


def f_tau(t: float, tau: float) -> float:
    """``exp(L(t)**tau)``; returns ``inf`` when the exponent exceeds double range."""
    tau = _check_tau(tau)
    expo = L(t) ** tau
    if expo > EXP_LIMIT:
        return math.inf
    return math.exp(expo)
