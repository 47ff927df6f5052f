"""Ancilla coefficient vectors ``c(0..n)`` for the 2n-mode KLM state."""

from __future__ import annotations

import io
import json
import math
from dataclasses import dataclass

import numpy as np

from . import spectral
from .spectral import _check_n

__all__ = [
    "LABELS",
    "AncillaCoefficients",
    "uniform_klm",
    "optimal_u",
    "plus_optimal_v",
    "custom",
    "u0_squared",
    "v0_squared",
    "load_coefficients",
    "OracleMismatchError",
]

LABELS = ("uniform", "optimal_u", "plus_optimal_v", "custom")

# the eigensolver cross-check gets slow beyond this size
VALIDATE_MAX_N = 1000


class OracleMismatchError(AssertionError):
    """A closed-form vector disagrees with the eigensolver oracle."""


@dataclass(frozen=True)
class AncillaCoefficients:
    """Normalized real coefficients of ``sum_i c(i)|0>^{n-i}|1>^i|0>^i|1>^{n-i}``.

    ``coef(i)`` returns 0 outside ``0..n``, which makes the outcome
    probabilities for ``k = 0`` and ``k = n+1`` come out of the same formula.
    """

    n: int
    c: np.ndarray
    label: str = "custom"

    def __post_init__(self):
        c = np.array(self.c, dtype=float)
        if c.ndim != 1 or c.size != self.n + 1:
            raise ValueError(f"expected {self.n + 1} coefficients, got shape {c.shape}")
        if self.label not in LABELS:
            raise ValueError(f"unknown label {self.label!r}")
        if abs(math.fsum(c * c) - 1.0) > 1e-12:
            raise ValueError("coefficients are not normalized")
        c.setflags(write=False)
        object.__setattr__(self, "c", c)

    def coef(self, i):
        if 0 <= i <= self.n:
            return float(self.c[i])
        return 0.0

    def __len__(self):
        return self.c.size

    def to_json(self):
        return json.dumps({"n": self.n, "label": self.label, "c": [float(f"{x:.16g}") for x in self.c]})

    def to_csv(self):
        buf = io.StringIO()
        for x in self.c:
            buf.write(f"{x:.16g}\n")
        return buf.getvalue()


def uniform_klm(n):
    n = _check_n(n)
    return AncillaCoefficients(n, np.full(n + 1, 1.0 / math.sqrt(n + 1)), "uniform")


def _u_profile(n, theta):
    j = np.arange(n + 1)
    return np.sin((j + 1) * theta) + 2.0 * np.sin(j * theta)


def _v_profile(n):
    a = math.pi / (n + 1)
    j = np.arange(n + 1)
    return np.sin((j + 1) * a) + np.sin(j * a)


def u0_squared(n, theta=None):
    """Squared first entry of the optimal-fidelity vector from its normalization."""
    n = _check_n(n)
    if theta is None:
        theta = spectral.solve_theta(n).theta
    return math.sin(theta) ** 2 / math.fsum(_u_profile(n, theta) ** 2)


def v0_squared(n):
    """Squared first entry of the ``|+>``-optimal vector from its normalization."""
    n = _check_n(n)
    return math.sin(math.pi / (n + 1)) ** 2 / math.fsum(_v_profile(n) ** 2)


def _cross_check(vec, matrix, tol, what):
    _, oracle = spectral.largest_eigenpair(matrix)
    dev = float(np.max(np.abs(vec - oracle)))
    if dev > tol:
        raise OracleMismatchError(f"{what}: closed form deviates from eigensolver by {dev:.3e}")


def optimal_u(n, tol=1e-9, validate=None):
    """Coefficients maximizing the channel fidelity (Perron vector of Ã).

    Built from the angle-condition root; with ``validate`` (default: on for
    ``n <= 1000``) the vector is compared entrywise with the eigensolver.
    """
    n = _check_n(n)
    theta = spectral.solve_theta(n).theta
    u0 = math.sqrt(u0_squared(n, theta))
    vec = u0 * _u_profile(n, theta) / math.sin(theta)
    vec /= math.sqrt(math.fsum(vec * vec))
    if validate is None:
        validate = n <= VALIDATE_MAX_N
    if validate:
        _cross_check(vec, spectral.build_a_tilde(n), tol, f"optimal_u(n={n})")
    return AncillaCoefficients(n, vec, "optimal_u")


def plus_optimal_v(n, tol=1e-10, validate=None):
    """Coefficients maximizing the success probability of ``|+>`` (Perron vector of A)."""
    n = _check_n(n)
    a = math.pi / (n + 1)
    vec = math.sqrt(v0_squared(n)) * _v_profile(n) / math.sin(a)
    vec /= math.sqrt(math.fsum(vec * vec))
    if validate is None:
        validate = n <= VALIDATE_MAX_N
    if validate:
        _cross_check(vec, spectral.build_a(n), tol, f"plus_optimal_v(n={n})")
    return AncillaCoefficients(n, vec, "plus_optimal_v")


def custom(coeffs):
    """Normalize an arbitrary real vector of length >= 2 into ancilla coefficients."""
    c = np.asarray(coeffs, dtype=float)
    if c.ndim != 1 or c.size < 2:
        raise ValueError("need at least two coefficients")
    if not np.all(np.isfinite(c)):
        raise ValueError("coefficients must be finite")
    norm = math.sqrt(math.fsum(c * c))
    if norm == 0.0:
        raise ValueError("zero coefficient vector")
    return AncillaCoefficients(c.size - 1, c / norm, "custom")


def load_coefficients(path):
    """Read one real per line; ``#`` starts a comment. The result is normalized."""
    values = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if line:
                values.append(float(line))
    return custom(values)
