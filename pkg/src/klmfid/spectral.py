"""Symmetric tridiagonal matrices, the angle condition solver and an eigensolver.

The eigensolver (Sturm-sequence bisection plus inverse iteration) is written
with plain Python floats on purpose: it serves as an independent oracle for
the closed-form eigenpairs used elsewhere in the package.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "SymTridiagonal",
    "ThetaSolution",
    "ThetaSolverError",
    "EigenSolverError",
    "build_a_tilde",
    "build_a",
    "build_gamma",
    "matrix_relation_residual",
    "theta_condition",
    "solve_theta",
    "sturm_count",
    "largest_eigenpair",
]


class ThetaSolverError(RuntimeError):
    """No sign change of the angle condition could be located."""


class EigenSolverError(RuntimeError):
    """Inverse iteration did not reach the requested residual."""

    def __init__(self, message, best_residual):
        super().__init__(f"{message} (best residual {best_residual:.3e})")
        self.best_residual = best_residual


def _check_n(n):
    if isinstance(n, bool) or int(n) != n or n < 1:
        raise ValueError(f"n must be a positive integer, got {n!r}")
    return int(n)


@dataclass(frozen=True)
class SymTridiagonal:
    """Symmetric tridiagonal matrix stored as its diagonal and off-diagonal."""

    diag: np.ndarray
    offdiag: np.ndarray

    def __post_init__(self):
        d = np.asarray(self.diag, dtype=float).copy()
        e = np.asarray(self.offdiag, dtype=float).copy()
        if d.ndim != 1 or e.ndim != 1:
            raise ValueError("diag and offdiag must be one-dimensional")
        if d.size < 1:
            raise ValueError("matrix must be at least 1x1")
        if e.size != d.size - 1:
            raise ValueError(
                f"offdiag must have length {d.size - 1}, got {e.size}"
            )
        d.setflags(write=False)
        e.setflags(write=False)
        object.__setattr__(self, "diag", d)
        object.__setattr__(self, "offdiag", e)

    @property
    def size(self):
        return self.diag.size

    def to_dense(self):
        return np.diag(self.diag) + np.diag(self.offdiag, 1) + np.diag(self.offdiag, -1)

    def matvec(self, x):
        x = np.asarray(x)
        y = self.diag * x
        y[:-1] += self.offdiag * x[1:]
        y[1:] += self.offdiag * x[:-1]
        return y

    def quadratic_form(self, x):
        """Return ``x^T M x`` for a real vector ``x``."""
        x = np.asarray(x, dtype=float)
        if x.shape != (self.size,):
            raise ValueError(f"vector length {x.shape} does not match matrix size {self.size}")
        return float(np.dot(self.diag, x * x) + 2.0 * np.dot(self.offdiag, x[:-1] * x[1:]))

    def __sub__(self, other):
        return SymTridiagonal(self.diag - other.diag, self.offdiag - other.offdiag)


def build_a_tilde(n):
    """Channel-fidelity matrix: ``f_c = c^T Ã c`` for ancilla coefficients ``c``."""
    n = _check_n(n)
    diag = np.full(n + 1, 2.0 / 3.0)
    diag[0] = diag[-1] = 1.0 / 3.0
    return SymTridiagonal(diag, np.full(n, 1.0 / 6.0))


def build_a(n):
    """Matrix whose quadratic form is the success probability of ``|+>``."""
    n = _check_n(n)
    diag = np.full(n + 1, 0.5)
    diag[0] = diag[-1] = 0.25
    return SymTridiagonal(diag, np.full(n, 0.25))


def build_gamma(n):
    n = _check_n(n)
    diag = np.zeros(n + 1)
    diag[0] = diag[-1] = 1.0
    return SymTridiagonal(diag, np.zeros(n))


def matrix_relation_residual(n):
    """Max-norm of ``Ã - (2/3 A + 1/3 E - 1/6 Γ)``; zero up to rounding."""
    a_tilde = build_a_tilde(n)
    a = build_a(n)
    gamma = build_gamma(n)
    rhs = SymTridiagonal(
        2.0 / 3.0 * a.diag + 1.0 / 3.0 - gamma.diag / 6.0,
        2.0 / 3.0 * a.offdiag - gamma.offdiag / 6.0,
    )
    diff = a_tilde - rhs
    return float(max(np.max(np.abs(diff.diag)), np.max(np.abs(diff.offdiag), initial=0.0)))


def theta_condition(theta, n):
    """``sin((n+2)θ)/4 + sin((n+1)θ) + sin(nθ)``."""
    return 0.25 * math.sin((n + 2) * theta) + math.sin((n + 1) * theta) + math.sin(n * theta)


@dataclass(frozen=True)
class ThetaSolution:
    n: int
    theta: float
    residual: float
    bracket: tuple

    @property
    def mu(self):
        """Largest eigenvalue of Ã, ``2/3 + cos(θ)/3``."""
        return 2.0 / 3.0 + math.cos(self.theta) / 3.0


def solve_theta(n, tol=1e-12, scan_points=64, refinements=3):
    """Smallest positive root of the angle condition for ``n``.

    The root lies in ``(π/(n+1), π/n)``; the interval is scanned for the first
    sign change (refining the scan grid 4x up to ``refinements`` times) and the
    bracket is then bisected down to floating-point resolution.
    """
    n = _check_n(n)
    if not tol > 0:
        raise ValueError("tol must be positive")
    lo, hi = math.pi / (n + 1), math.pi / n
    g_lo = theta_condition(lo, n)

    points = scan_points
    bracket = None
    for _ in range(refinements + 1):
        step = (hi - lo) / points
        a, ga = lo, g_lo
        for i in range(1, points + 1):
            b = hi if i == points else lo + i * step
            gb = theta_condition(b, n)
            if ga > 0.0 and gb <= 0.0:
                bracket = (a, b)
                break
            a, ga = b, gb
        if bracket is not None:
            break
        points *= 4
    if bracket is None:
        raise ThetaSolverError(
            f"no sign change of the angle condition in ({lo!r}, {hi!r}) for n={n} "
            f"after {refinements} scan refinements ({points} subintervals)"
        )

    a, b = bracket
    while True:
        mid = 0.5 * (a + b)
        if mid <= a or mid >= b:
            break
        if theta_condition(mid, n) > 0.0:
            a = mid
        else:
            b = mid
    ga, gb = abs(theta_condition(a, n)), abs(theta_condition(b, n))
    theta = a if ga <= gb else b
    residual = min(ga, gb)
    if residual > tol:
        raise ThetaSolverError(f"residual {residual:.3e} above tolerance {tol:.1e} for n={n}")
    return ThetaSolution(n=n, theta=theta, residual=residual, bracket=bracket)


def sturm_count(matrix, x):
    """Number of eigenvalues of ``matrix`` strictly less than ``x``."""
    d = matrix.diag.tolist()
    e2 = [v * v for v in matrix.offdiag.tolist()]
    tiny = 1e-300
    count = 0
    q = d[0] - x
    for i in range(len(d)):
        if i:
            q = d[i] - x - e2[i - 1] / q
        if q == 0.0:
            q = -tiny
        if q < 0.0:
            count += 1
    return count


def _block_max_eigenvalue(d, e):
    m = len(d)
    if m == 1:
        return d[0]
    sub = SymTridiagonal(d, e)
    radius = [abs(e[i - 1]) if i else 0.0 for i in range(m)]
    for i in range(m - 1):
        radius[i] += abs(e[i])
    lo = min(di - ri for di, ri in zip(d, radius))
    hi = max(di + ri for di, ri in zip(d, radius))
    lo -= 1e-12 * max(1.0, abs(lo))
    hi += 1e-12 * max(1.0, abs(hi))
    # invariant: sturm_count(lo) < m <= sturm_count(hi)
    while True:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if sturm_count(sub, mid) < m:
            lo = mid
        else:
            hi = mid
    return lo


def _solve_shifted(d, e, shift, rhs):
    # (M - shift*I) x = rhs by the Thomas algorithm; the matrix is definite
    # because shift sits above the top of the spectrum.
    m = len(d)
    c = [0.0] * m
    y = [0.0] * m
    piv = d[0] - shift
    c[0] = e[0] / piv if m > 1 else 0.0
    y[0] = rhs[0] / piv
    for i in range(1, m):
        piv = d[i] - shift - e[i - 1] * c[i - 1]
        if piv == 0.0:
            piv = -1e-300
        if i < m - 1:
            c[i] = e[i] / piv
        y[i] = (rhs[i] - e[i - 1] * y[i - 1]) / piv
    x = [0.0] * m
    x[-1] = y[-1]
    for i in range(m - 2, -1, -1):
        x[i] = y[i] - c[i] * x[i + 1]
    return x


def _block_eigenvector(d, e, lam, tol, max_iter):
    m = len(d)
    if m == 1:
        return [1.0], 0.0
    shift = lam + 1e-12 * max(1.0, abs(lam))
    x = [1.0 + 1e-3 * i / m for i in range(m)]
    best, best_res = None, math.inf
    for it in range(max_iter):
        x = _solve_shifted(d, e, shift, x)
        norm = math.sqrt(math.fsum(v * v for v in x))
        x = [v / norm for v in x]
        res = 0.0
        for i in range(m):
            r = d[i] * x[i] - lam * x[i]
            if i:
                r += e[i - 1] * x[i - 1]
            if i < m - 1:
                r += e[i] * x[i + 1]
            res = max(res, abs(r))
        if res < best_res:
            best, best_res = x, res
        if it >= 2 and best_res <= tol:
            break
    return best, best_res


def largest_eigenpair(matrix, tol=1e-12, max_iter=50):
    """Largest eigenvalue and unit eigenvector of a symmetric tridiagonal matrix.

    The eigenvalue comes from Sturm-sequence bisection and the vector from
    shifted inverse iteration. The matrix is split at exactly-zero
    off-diagonal entries; on ties between blocks the lowest-index block wins.
    The vector's first nonzero entry is made positive.

    Raises
    ------
    EigenSolverError
        If ``||Mx - λx||_inf > tol`` after ``max_iter`` iterations.
    """
    d = matrix.diag.tolist()
    e = matrix.offdiag.tolist()
    m = len(d)
    starts = [0] + [i + 1 for i in range(m - 1) if e[i] == 0.0]
    ends = starts[1:] + [m]
    blocks = []
    for s, t in zip(starts, ends):
        blocks.append((s, t, _block_max_eigenvalue(d[s:t], e[s:t - 1])))
    lam = max(b[2] for b in blocks)
    scale = max(1.0, abs(lam))
    s, t, lam_block = next(b for b in blocks if b[2] >= lam - 4e-16 * scale)
    vec_block, res = _block_eigenvector(d[s:t], e[s:t - 1], lam_block, tol, max_iter)
    if res > tol:
        raise EigenSolverError(
            f"inverse iteration did not converge within {max_iter} iterations", res
        )
    vec = np.zeros(m)
    vec[s:t] = vec_block
    first = vec[np.flatnonzero(vec)[0]]
    if first < 0:
        vec = -vec
    return lam, vec
