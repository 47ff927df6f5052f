"""One-shot reproduction suite behind ``klmfid verify-all``.

Every check returns ``(ok, detail)``; exceptions count as failures so a
broken building block shows up as a red row instead of a traceback.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from . import ancilla, fidelity, focksim, prep, spectral
from .fidelity import QubitState

__all__ = ["CheckResult", "CHECKS", "run_checks"]

_PI2 = math.pi ** 2
TREND_N = (50, 100, 200, 400)


@dataclass
class CheckResult:
    name: str
    ok: bool
    detail: str
    seconds: float


def _families(n):
    return [ancilla.uniform_klm(n), ancilla.optimal_u(n), ancilla.plus_optimal_v(n)]


def _random_unit(rng, size):
    x = rng.normal(size=size)
    return ancilla.custom(x)


def check_theta_bracket(max_n, rng):
    for n in range(1, min(200, max_n) + 1):
        t = spectral.solve_theta(n).theta
        if not math.pi / (n + 1) < t < math.pi / n:
            return False, f"n={n}: theta={t!r} outside bracket"
    return True, f"n=1..{min(200, max_n)}"


def check_theta_residual(max_n, rng):
    ns = list(range(1, min(200, max_n) + 1)) + [1000, 5000, 10000]
    worst = max(spectral.solve_theta(n).residual for n in ns)
    return worst <= 1e-12, f"max |g(theta)| = {worst:.2e}"


def check_theta_vs_eigensolver(max_n, rng):
    worst = 0.0
    for n in range(1, min(50, max_n) + 1):
        lam, _ = spectral.largest_eigenpair(spectral.build_a_tilde(n))
        worst = max(worst, abs(spectral.solve_theta(n).mu - lam))
    return worst <= 1e-10, f"max |mu_n - lambda_max| = {worst:.2e}"


def check_matrix_relation(max_n, rng):
    worst = max(spectral.matrix_relation_residual(n) for n in range(1, max_n + 1))
    return worst <= 1e-14, f"max residual {worst:.2e}"


def check_sturm_extremality(max_n, rng):
    for n in range(1, min(50, max_n) + 1):
        for m in (spectral.build_a_tilde(n), spectral.build_a(n)):
            lam, _ = spectral.largest_eigenpair(m)
            eps = 1e-9
            if spectral.sturm_count(m, lam + eps) != m.size or spectral.sturm_count(m, lam - eps) != m.size - 1:
                return False, f"n={n}: Sturm counts inconsistent at lambda_max"
    return True, f"n=1..{min(50, max_n)}"


def check_ancilla_shape(max_n, rng):
    for n in range(1, min(200, max_n) + 1):
        for c in _families(n):
            if abs(math.fsum(c.c * c.c) - 1.0) > 1e-12:
                return False, f"{c.label} n={n} not normalized"
            if c.label != "uniform":
                if np.max(np.abs(c.c - c.c[::-1])) > 1e-10:
                    return False, f"{c.label} n={n} not palindromic"
                if np.any(c.c <= 0):
                    return False, f"{c.label} n={n} not positive"
    return True, f"n=1..{min(200, max_n)} (oracle cross-check inside constructors)"


def check_first_entries(max_n, rng):
    worst = 0.0
    for n in range(1, min(200, max_n) + 1):
        u = ancilla.optimal_u(n, validate=False)
        v = ancilla.plus_optimal_v(n, validate=False)
        worst = max(worst, abs(ancilla.u0_squared(n) - u.c[0] ** 2), abs(ancilla.v0_squared(n) - v.c[0] ** 2))
    return worst <= 1e-12, f"max deviation {worst:.2e}"


def check_probability_completeness(max_n, rng):
    worst = 0.0
    for n in range(1, min(20, max_n) + 1):
        for c in _families(n):
            psi = QubitState.random(rng)
            total = math.fsum(fidelity.outcome_probability(c, psi, k) for k in range(n + 2))
            worst = max(worst, abs(total - 1.0))
    return worst <= 1e-12, f"max |sum p_k - 1| = {worst:.2e}"


def check_decomposition(max_n, rng):
    worst = 0.0
    for n in range(1, min(20, max_n) + 1):
        for c in _families(n) + [_random_unit(rng, n + 1)]:
            psi = QubitState.random(rng)
            direct = fidelity.success_probability(c, psi)
            parts = 0.0
            for k in range(1, n + 1):
                p = fidelity.outcome_probability(c, psi, k)
                if p > 0:
                    parts += p * abs(psi.overlap(fidelity.quasi_state(c, psi, k))) ** 2
            worst = max(worst, abs(direct - parts))
    return worst <= 1e-12, f"max deviation {worst:.2e}"


def check_quadrature(max_n, rng):
    worst = 0.0
    for n in range(1, min(20, max_n) + 1):
        c = _random_unit(rng, n + 1)
        worst = max(worst, abs(fidelity.channel_fidelity(c) - fidelity.channel_fidelity_quadrature(c)))
    return worst <= 1e-9, f"max deviation {worst:.2e}"


def check_optimality(max_n, rng):
    for n in range(1, min(20, max_n) + 1):
        f_opt = fidelity.channel_fidelity(ancilla.optimal_u(n))
        lam = fidelity.lambda_n(n)
        for _ in range(100):
            c = _random_unit(rng, n + 1)
            if fidelity.channel_fidelity(c) > f_opt + 1e-12:
                return False, f"n={n}: random vector beats f_opt"
            if fidelity.success_probability(c, QubitState.plus()) > lam + 1e-12:
                return False, f"n={n}: random vector beats lambda_n on |+>"
        p_v = fidelity.success_probability(ancilla.plus_optimal_v(n), QubitState.plus())
        if abs(p_v - lam) > 1e-12:
            return False, f"n={n}: p_v(|+>) != lambda_n"
    return True, f"n=1..{min(20, max_n)}, 100 vectors each"


def check_ordering_chain(max_n, rng):
    for n in range(1, min(200, max_n) + 1):
        r = fidelity.fidelity_report(n)
        if abs(r.f_uniform - n / (n + 1)) > 1e-12:
            return False, f"n={n}: f_uniform={r.f_uniform!r} != n/(n+1)"
        r.check()
    return True, f"n=1..{min(200, max_n)}"


def check_asymptotic_trend(max_n, rng):
    gap_err, tail_err = [], []
    for n in TREND_N:
        sol = spectral.solve_theta(n)
        f_v = fidelity.channel_fidelity(ancilla.plus_optimal_v(n, validate=False))
        gap_err.append(abs(n**3 * (sol.mu - f_v) - _PI2 / 18))
        tail_err.append(abs(n**2 * (1 - sol.mu) - _PI2 / 6))
    ok = all(a > b for a, b in zip(gap_err, gap_err[1:])) and all(a > b for a, b in zip(tail_err, tail_err[1:]))
    return ok, f"gap errors {['%.2e' % e for e in gap_err]}, tail errors {['%.2e' % e for e in tail_err]}"


def check_p_u_plus(max_n, rng):
    for n in range(1, min(200, max_n) + 1):
        u = ancilla.optimal_u(n, validate=False)
        p = fidelity.p_u_plus(n, u)
        if abs(p - fidelity.success_probability(u, QubitState.plus())) > 1e-12:
            return False, f"n={n}: u^T A u differs from the success probability of |+>"
        if p > fidelity.lambda_n(n) + 1e-12:
            return False, f"n={n}: p_u(|+>) exceeds lambda_n"
    return True, f"n=1..{min(200, max_n)}"


def check_franson(max_n, rng):
    top = max(2, min(400, max_n))
    for n in range(2, top + 1):
        if not spectral.solve_theta(n).mu > fidelity.franson_fidelity(n):
            return False, f"n={n}: f_opt <= 1 - 2/n^2"
    return True, f"n=2..{top}"


def check_focksim(max_n, rng):
    worst = 0.0
    for n in range(1, min(4, max_n) + 1):
        for c in _families(n):
            phases = focksim.extract_phases(c)
            for _ in range(20):
                res = focksim.verify_teleportation(c, QubitState.random(rng), phases=phases)
                if not res.ok:
                    return False, f"n={n} {c.label}: {res.failure}"
                worst = max(worst, res.max_deviation)
    return worst <= 1e-10, f"max deviation {worst:.2e}"


def check_fock_unitarity(max_n, rng):
    hom = focksim.apply_mode_fourier(focksim.FockAmplitudeMap({(1, 1): 1.0}, 2), [0, 1])
    if abs(hom[(1, 1)]) > 1e-12:
        return False, "Hong-Ou-Mandel coincidence amplitude nonzero"
    n = min(3, max_n)
    state = focksim.prepare_joint_state(_random_unit(rng, n + 1), QubitState.random(rng))
    after = focksim.apply_mode_fourier(state, range(n + 1))
    dev = abs(after.norm_squared() - 1.0)
    return dev <= 1e-12, f"norm deviation {dev:.2e}"


def check_prep(max_n, rng):
    for n in range(1, min(200, max_n) + 1):
        for c in (ancilla.optimal_u(n, validate=False), ancilla.plus_optimal_v(n, validate=False)):
            circuit = prep.design_circuit(c)
            p, _ = prep.simulate_heralded_prep(circuit)
            if p < 1.0 / (n + 1) - 1e-12:
                return False, f"n={n}: herald probability below 1/(n+1)"
    for n in range(1, min(4, max_n) + 1):
        for c in (ancilla.optimal_u(n), ancilla.plus_optimal_v(n)):
            res = prep.full_fock_prep_check(prep.design_circuit(c))
            if not res.ok:
                return False, f"n={n} {c.label}: Fock-level deviation {res.max_deviation:.2e}"
    ratios = [(n + 1) * ancilla.plus_optimal_v(n, validate=False).coef(n // 2) ** 2 for n in (10, 50, 100, 200)]
    errs = [abs(r - 2.0) for r in ratios]
    ok = all(a >= b - 1e-12 for a, b in zip(errs, errs[1:])) and errs[-1] <= 0.1
    return ok, f"(n+1) v(n/2)^2 = {['%.6f' % r for r in ratios]}"


def check_beam_splitter_norm(max_n, rng):
    state = focksim.FockAmplitudeMap({(1, 0): 0.6, (2, 1): 0.8}, 2)
    out = focksim.apply_linear_optics(state, [0, 1], focksim.beam_splitter_matrix(0.37))
    dev = abs(out.norm_squared() - 1.0)
    return dev <= 1e-12, f"norm deviation {dev:.2e}"


CHECKS = [
    ("spectral.theta_bracket", check_theta_bracket),
    ("spectral.theta_residual", check_theta_residual),
    ("spectral.theta_vs_eigensolver", check_theta_vs_eigensolver),
    ("spectral.matrix_relation", check_matrix_relation),
    ("spectral.sturm_extremality", check_sturm_extremality),
    ("ancilla.shape_and_oracle", check_ancilla_shape),
    ("ancilla.first_entries", check_first_entries),
    ("fidelity.completeness", check_probability_completeness),
    ("fidelity.decomposition", check_decomposition),
    ("fidelity.quadrature", check_quadrature),
    ("fidelity.optimality", check_optimality),
    ("fidelity.ordering_chain", check_ordering_chain),
    ("fidelity.asymptotic_trend", check_asymptotic_trend),
    ("fidelity.p_u_plus_bound", check_p_u_plus),
    ("fidelity.franson", check_franson),
    ("focksim.oracle_agreement", check_focksim),
    ("focksim.unitarity", check_fock_unitarity),
    ("prep.circuit", check_prep),
    ("prep.beam_splitter_norm", check_beam_splitter_norm),
]


def run_checks(max_n=200, seed=0):
    if max_n < 1:
        raise ValueError("max_n must be at least 1")
    results = []
    for i, (name, func) in enumerate(CHECKS):
        rng = np.random.default_rng([seed, i])
        start = time.perf_counter()
        try:
            ok, detail = func(max_n, rng)
        except Exception as exc:  # noqa: BLE001 - any failure is reported as a row
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        results.append(CheckResult(name, bool(ok), detail, time.perf_counter() - start))
    return results
