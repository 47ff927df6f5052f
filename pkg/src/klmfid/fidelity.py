"""Success probabilities, channel fidelities, bounds and large-n asymptotics."""

from __future__ import annotations

import cmath
import math
from dataclasses import astuple, dataclass, fields

import numpy as np

from . import spectral
from .ancilla import optimal_u, plus_optimal_v, u0_squared, uniform_klm, v0_squared
from .spectral import _check_n

__all__ = [
    "QubitState",
    "FidelityReport",
    "REPORT_COLUMNS",
    "lambda_n",
    "outcome_probability",
    "quasi_state",
    "success_probability",
    "channel_fidelity",
    "channel_fidelity_quadrature",
    "fidelity_bounds",
    "Asymptotics",
    "asymptotics",
    "franson_fidelity",
    "p_u_plus",
    "fidelity_report",
]

_PI2 = math.pi ** 2


@dataclass(frozen=True)
class QubitState:
    """Pure qubit ``alpha|0> + beta|1>``.

    The global phase is removed on construction: ``alpha`` is made real and
    non-negative (or ``beta`` when ``alpha == 0``).
    """

    alpha: complex
    beta: complex

    def __post_init__(self):
        a, b = complex(self.alpha), complex(self.beta)
        norm = abs(a) ** 2 + abs(b) ** 2
        if abs(norm - 1.0) > 1e-12:
            raise ValueError(f"|alpha|^2 + |beta|^2 = {norm!r}, expected 1")
        ref = a if abs(a) > 0 else b
        phase = ref.conjugate() / abs(ref)
        object.__setattr__(self, "alpha", a * phase)
        object.__setattr__(self, "beta", b * phase)

    @classmethod
    def normalized(cls, alpha, beta):
        norm = math.sqrt(abs(alpha) ** 2 + abs(beta) ** 2)
        if norm == 0:
            raise ValueError("zero state vector")
        return cls(alpha / norm, beta / norm)

    @classmethod
    def from_bloch(cls, theta, phi=0.0):
        return cls.normalized(math.cos(theta / 2), cmath.exp(1j * phi) * math.sin(theta / 2))

    @classmethod
    def zero(cls):
        return cls(1.0, 0.0)

    @classmethod
    def one(cls):
        return cls(0.0, 1.0)

    @classmethod
    def plus(cls):
        return cls(1 / math.sqrt(2), 1 / math.sqrt(2))

    @classmethod
    def random(cls, rng):
        """Haar-random state drawn from a ``numpy.random.Generator``."""
        z = rng.normal(size=4)
        return cls.normalized(complex(z[0], z[1]), complex(z[2], z[3]))

    @property
    def p0(self):
        return abs(self.alpha) ** 2

    @property
    def p1(self):
        return abs(self.beta) ** 2

    def overlap(self, other):
        """``<self|other>``."""
        return self.alpha.conjugate() * other.alpha + self.beta.conjugate() * other.beta

    def as_array(self):
        return np.array([self.alpha, self.beta], dtype=complex)


def lambda_n(n):
    """Largest eigenvalue of A, ``(1 + cos(π/(n+1)))/2``."""
    n = _check_n(n)
    return 0.5 + 0.5 * math.cos(math.pi / (n + 1))


def outcome_probability(c, psi, k):
    """Probability of observing ``k`` photons, ``|α|²c(k)² + |β|²c(k-1)²``."""
    if not 0 <= k <= c.n + 1:
        raise ValueError(f"k must lie in 0..{c.n + 1}, got {k}")
    return psi.p0 * c.coef(k) ** 2 + psi.p1 * c.coef(k - 1) ** 2


def quasi_state(c, psi, k):
    """State left on the k-th output mode after observing ``k`` photons, phase corrected."""
    if not 1 <= k <= c.n:
        raise ValueError(f"k must lie in 1..{c.n}, got {k}")
    a = psi.alpha * c.coef(k)
    b = psi.beta * c.coef(k - 1)
    if abs(a) ** 2 + abs(b) ** 2 == 0.0:
        raise ValueError(f"outcome k={k} has zero probability")
    return QubitState.normalized(a, b)


def success_probability(c, psi):
    """Expected squared overlap ``sum_{k=1..n} (|α|²c(k) + |β|²c(k-1))²``."""
    x = np.asarray(c.c)
    terms = psi.p0 * x[1:] + psi.p1 * x[:-1]
    return float(math.fsum(terms * terms))


def channel_fidelity(c):
    """Bloch-sphere average of the success probability, as ``c^T Ã c``."""
    return spectral.build_a_tilde(c.n).quadratic_form(c.c)


def channel_fidelity_quadrature(c, nodes=64):
    """Channel fidelity by Gauss-Legendre quadrature over ``cos θ_B``.

    The azimuthal integral is trivial because the success probability
    depends only on ``|α|²`` and ``|β|²``.
    """
    if nodes < 8:
        raise ValueError("need at least 8 quadrature nodes")
    x, w = np.polynomial.legendre.leggauss(nodes)
    total = 0.0
    for xi, wi in zip(x, w):
        p0 = 0.5 * (1.0 + xi)
        psi = QubitState.normalized(math.sqrt(p0), math.sqrt(max(0.0, 1.0 - p0)))
        total += wi * success_probability(c, psi)
    return 0.5 * total


def fidelity_bounds(n):
    """Lower (from the ``|+>``-optimal vector) and upper bounds on the optimal fidelity."""
    n = _check_n(n)
    base = 2.0 / 3.0 + math.cos(math.pi / (n + 1)) / 3.0
    return base - v0_squared(n) / 3.0, base - u0_squared(n) / 3.0


@dataclass(frozen=True)
class Asymptotics:
    f_opt_asym: float
    delta_asym: float
    v0sq_asym: float
    u0sq_asym: float
    p_u_plus_asym: float
    gap_asym: float


def asymptotics(n):
    """Leading large-n expressions for the optimal-fidelity quantities."""
    n = _check_n(n)
    return Asymptotics(
        f_opt_asym=1.0 - _PI2 / (6 * n**2) + 2 * _PI2 / (9 * n**3),
        delta_asym=math.pi / (3 * n**2),
        v0sq_asym=_PI2 / (2 * n**3),
        u0sq_asym=2 * _PI2 / (9 * n**3),
        p_u_plus_asym=lambda_n(n) - _PI2 / (12 * n**3),
        gap_asym=_PI2 / (18 * n**3),
    )


def franson_fidelity(n):
    """Reference large-n channel fidelity ``1 - 2/n²`` of an earlier teleportation scheme."""
    n = _check_n(n)
    return 1.0 - 2.0 / n**2


def p_u_plus(n, u=None):
    """Success probability of ``|+>`` with the optimal-fidelity ancilla, ``u^T A u``."""
    n = _check_n(n)
    if u is None:
        u = optimal_u(n)
    return spectral.build_a(n).quadratic_form(u.c)


@dataclass(frozen=True)
class FidelityReport:
    n: int
    theta: float
    mu_n: float
    lambda_n: float
    f_opt: float
    f_v: float
    f_uniform: float
    lower_bound: float
    upper_bound: float
    asymptotic_f_opt: float
    p_u_plus: float
    p_v_plus: float

    def as_row(self):
        return astuple(self)

    def check(self, tol=1e-12):
        """Raise ``AssertionError`` if the ordering invariants are violated."""
        if not self.lower_bound - tol <= self.f_opt <= self.upper_bound + tol:
            raise AssertionError(f"n={self.n}: f_opt={self.f_opt!r} outside bounds")
        if not self.f_uniform - tol <= self.f_v <= self.f_opt + tol <= 1.0 + 2 * tol:
            raise AssertionError(f"n={self.n}: fidelity ordering violated")


REPORT_COLUMNS = tuple(f.name for f in fields(FidelityReport))


def fidelity_report(n, validate=None):
    n = _check_n(n)
    sol = spectral.solve_theta(n)
    u = optimal_u(n, validate=validate)
    v = plus_optimal_v(n, validate=validate)
    a = spectral.build_a(n)
    lower, upper = fidelity_bounds(n)
    return FidelityReport(
        n=n,
        theta=sol.theta,
        mu_n=sol.mu,
        lambda_n=lambda_n(n),
        f_opt=channel_fidelity(u),
        f_v=channel_fidelity(v),
        f_uniform=channel_fidelity(uniform_klm(n)),
        lower_bound=lower,
        upper_bound=upper,
        asymptotic_f_opt=asymptotics(n).f_opt_asym,
        p_u_plus=a.quadratic_form(u.c),
        p_v_plus=a.quadratic_form(v.c),
    )
