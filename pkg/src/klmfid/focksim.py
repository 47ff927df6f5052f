"""Sparse Fock-space simulation of the ancilla teleportation protocol.

States are maps from occupation tuples to complex amplitudes. Linear optics is
applied by substituting creation operators, ``a_j^† -> sum_k U[k, j] a_k^†``,
expanding the resulting monomials and re-collecting them with the bosonic
``sqrt(m!)`` normalization.
"""

from __future__ import annotations

import cmath
import json
import math
import os
from collections import defaultdict
from dataclasses import asdict, dataclass, field

import numpy as np

from .fidelity import QubitState, outcome_probability, quasi_state

__all__ = [
    "PRUNE",
    "DEFAULT_CAP",
    "FockAmplitudeMap",
    "OutcomePattern",
    "klm_state",
    "prepare_joint_state",
    "apply_linear_optics",
    "apply_mode_fourier",
    "fourier_matrix",
    "beam_splitter_matrix",
    "measure_photon_numbers",
    "postselect",
    "extract_phases",
    "PatternRecord",
    "TeleportationCheck",
    "verify_teleportation",
]

PRUNE = 1e-15
DEFAULT_CAP = int(os.environ.get("KLMFID_SIM_CAP", "6"))


class FockAmplitudeMap:
    """Sparse multimode Fock state."""

    def __init__(self, terms, mode_count):
        self.mode_count = int(mode_count)
        self.terms = {}
        for occ, amp in terms.items():
            occ = tuple(int(m) for m in occ)
            if len(occ) != self.mode_count:
                raise ValueError(f"occupation {occ} does not span {self.mode_count} modes")
            if any(m < 0 for m in occ):
                raise ValueError(f"negative occupation in {occ}")
            if abs(amp) >= PRUNE:
                self.terms[occ] = complex(amp)

    def __len__(self):
        return len(self.terms)

    def __iter__(self):
        return iter(self.terms.items())

    def __getitem__(self, occ):
        return self.terms.get(tuple(occ), 0j)

    def norm_squared(self):
        return math.fsum(abs(a) ** 2 for a in self.terms.values())

    def normalized(self):
        norm = math.sqrt(self.norm_squared())
        if norm == 0.0:
            raise ValueError("cannot normalize the zero state")
        return FockAmplitudeMap({k: a / norm for k, a in self.terms.items()}, self.mode_count)

    def extended(self, extra_modes):
        """Append ``extra_modes`` vacuum modes."""
        pad = (0,) * extra_modes
        return FockAmplitudeMap({k + pad: a for k, a in self.terms.items()}, self.mode_count + extra_modes)

    def __repr__(self):
        return f"FockAmplitudeMap({len(self)} terms, {self.mode_count} modes)"


@dataclass(frozen=True)
class OutcomePattern:
    measured: tuple
    total_photons: int

    @classmethod
    def of(cls, measured):
        measured = tuple(measured)
        return cls(measured, sum(measured))


def _ancilla_occupation(n, i):
    first = (0,) * (n - i) + (1,) * i
    second = (0,) * i + (1,) * (n - i)
    return first + second


def klm_state(c):
    """The 2n-mode ancilla ``sum_i c(i)|0>^{n-i}|1>^i|0>^i|1>^{n-i}``."""
    n = c.n
    return FockAmplitudeMap({_ancilla_occupation(n, i): c.coef(i) for i in range(n + 1)}, 2 * n)


def prepare_joint_state(c, psi):
    """Input qubit on mode 0 followed by the ancilla on modes ``1..2n``."""
    n = c.n
    terms = {}
    for photon, amp in ((0, psi.alpha), (1, psi.beta)):
        for i in range(n + 1):
            terms[(photon,) + _ancilla_occupation(n, i)] = amp * c.coef(i)
    return FockAmplitudeMap(terms, 2 * n + 1)


def fourier_matrix(size):
    omega = cmath.exp(2j * math.pi / size)
    j = np.arange(size)
    return omega ** np.outer(j, j) / math.sqrt(size)


def beam_splitter_matrix(t):
    """Columns give the images of ``a_mode^†`` and ``a_det^†``; ``r = sqrt(1 - t²)``."""
    if not 0.0 <= t <= 1.0:
        raise ValueError(f"transmission must lie in [0, 1], got {t}")
    r = math.sqrt(1.0 - t * t)
    return np.array([[t, -r], [r, t]], dtype=complex)


def apply_linear_optics(state, modes, matrix):
    """Apply the mode transformation ``a_{modes[j]}^† -> sum_k matrix[k, j] a_{modes[k]}^†``."""
    modes = list(modes)
    if len(set(modes)) != len(modes):
        raise ValueError("modes must be distinct")
    if any(not 0 <= m < state.mode_count for m in modes):
        raise ValueError("mode index out of range")
    matrix = np.asarray(matrix, dtype=complex)
    if matrix.shape != (len(modes), len(modes)):
        raise ValueError(f"matrix shape {matrix.shape} does not match {len(modes)} modes")

    out = defaultdict(complex)
    for occ, amp in state:
        # monomial coefficient: amp / sqrt(prod m!) over the listed modes
        base = list(occ)
        coeff = amp
        for m in modes:
            coeff /= math.sqrt(math.factorial(occ[m]))
            base[m] = 0
        poly = {tuple(base): coeff}
        for j, m in enumerate(modes):
            column = matrix[:, j]
            for _ in range(occ[m]):
                nxt = defaultdict(complex)
                for mono, a in poly.items():
                    for k, target in enumerate(modes):
                        u = column[k]
                        if u == 0:
                            continue
                        grown = list(mono)
                        grown[target] += 1
                        nxt[tuple(grown)] += a * u
                poly = nxt
        for mono, a in poly.items():
            scale = 1.0
            for m in modes:
                scale *= math.sqrt(math.factorial(mono[m]))
            out[mono] += a * scale
    return FockAmplitudeMap(out, state.mode_count)


def apply_mode_fourier(state, modes):
    """(len(modes))-point mode Fourier transform with ``ω = exp(+2πi/N)``."""
    return apply_linear_optics(state, modes, fourier_matrix(len(modes)))


def measure_photon_numbers(state, modes):
    """Project onto every occupation pattern of ``modes``.

    Returns ``{OutcomePattern: (probability, conditional state)}`` where the
    conditional state lives on the remaining modes (in order) and is
    normalized. Only patterns with nonzero probability appear.
    """
    modes = list(modes)
    if len(set(modes)) != len(modes):
        raise ValueError("modes must be distinct")
    rest = [m for m in range(state.mode_count) if m not in set(modes)]
    groups = defaultdict(dict)
    for occ, amp in state:
        key = tuple(occ[m] for m in modes)
        groups[key][tuple(occ[m] for m in rest)] = amp
    total = state.norm_squared()
    result = {}
    for key, terms in sorted(groups.items()):
        cond = FockAmplitudeMap(terms, len(rest))
        p = cond.norm_squared()
        if p == 0.0:
            continue
        result[OutcomePattern.of(key)] = (p / total, cond.normalized())
    return result


def postselect(state, modes, pattern):
    """Unnormalized branch where ``modes`` show ``pattern``, restricted to the other modes."""
    modes = list(modes)
    rest = [m for m in range(state.mode_count) if m not in set(modes)]
    pattern = tuple(pattern)
    terms = {
        tuple(occ[m] for m in rest): amp
        for occ, amp in state
        if tuple(occ[m] for m in modes) == pattern
    }
    return FockAmplitudeMap(terms, len(rest))


def _run_protocol(c, psi):
    n = c.n
    state = apply_mode_fourier(prepare_joint_state(c, psi), range(n + 1))
    return measure_photon_numbers(state, range(n + 1))


def _logical_amplitudes(cond, n, k):
    """Amplitudes of the output qubit at mode ``n+k`` and any stray patterns."""
    zero = (0,) * k + (1,) * (n - k)
    one = (0,) * (k - 1) + (1,) * (n - k + 1)
    stray = [occ for occ, _ in cond if occ not in (zero, one)]
    return cond[zero], cond[one], stray


def extract_phases(c):
    """Per-pattern relative phase picked up by the ``|1>`` branch.

    Obtained from a reference run with ``|+>`` input; the phase correction is
    a property of the detected pattern alone, so the same table is applied
    to every input state.
    """
    n = c.n
    phases = {}
    for pattern, (_, cond) in _run_protocol(c, QubitState.plus()).items():
        k = pattern.total_photons
        if not 1 <= k <= n or c.coef(k) == 0.0 or c.coef(k - 1) == 0.0:
            continue
        a0, a1, _ = _logical_amplitudes(cond, n, k)
        if a0 == 0 or a1 == 0:
            continue
        phases[pattern.measured] = cmath.phase(a1 / a0 * c.coef(k) / c.coef(k - 1)) + 0.0
    return phases


@dataclass
class PatternRecord:
    measured: tuple
    k: int
    probability: float
    phase: float | None
    deviation: float


@dataclass
class TeleportationCheck:
    n: int
    label: str
    alpha: complex
    beta: complex
    tol: float
    patterns: list = field(default_factory=list)
    k_probability: list = field(default_factory=list)
    k_probability_formula: list = field(default_factory=list)
    max_deviation: float = 0.0
    failure: str | None = None

    @property
    def ok(self):
        return self.failure is None and self.max_deviation <= self.tol

    def _fail(self, message):
        if self.failure is None:
            self.failure = message

    def to_dict(self):
        d = asdict(self)
        d["alpha"] = [self.alpha.real, self.alpha.imag]
        d["beta"] = [self.beta.real, self.beta.imag]
        d["ok"] = self.ok
        for p in d["patterns"]:
            p["measured"] = list(p["measured"])
        return d

    def to_json(self, **kwargs):
        return json.dumps(self.to_dict(), **kwargs)


def verify_teleportation(c, psi, tol=1e-10, phases=None, cap=None):
    """Simulate the protocol in Fock space and compare it with the closed forms.

    For every detected pattern with ``1 <= k <= n`` the conditional output must
    be a qubit at mode ``n+k`` whose phase-corrected state equals
    ``quasi_state(c, psi, k)`` up to a global phase; per-k aggregated
    probabilities must equal ``outcome_probability``. Failures are recorded on
    the returned check rather than raised.
    """
    n = c.n
    cap = DEFAULT_CAP if cap is None else cap
    if n > cap:
        raise ValueError(f"n={n} exceeds the simulation cap {cap}")
    if phases is None:
        phases = extract_phases(c)
    check = TeleportationCheck(n=n, label=c.label, alpha=psi.alpha, beta=psi.beta, tol=tol)
    per_k = [0.0] * (n + 2)

    for pattern, (prob, cond) in _run_protocol(c, psi).items():
        k = pattern.total_photons
        per_k[k] += prob
        if k == 0 or k == n + 1:
            if len(cond) > 1:
                check._fail(f"pattern {pattern.measured}: failure outcome keeps a superposition")
            check.patterns.append(PatternRecord(pattern.measured, k, prob, None, 0.0))
            continue
        a0, a1, stray = _logical_amplitudes(cond, n, k)
        if stray:
            check._fail(f"pattern {pattern.measured}: unexpected output occupations {stray[:3]}")
        phase = phases.get(pattern.measured)
        if phase is not None:
            a1 *= cmath.exp(-1j * phase)
        target = quasi_state(c, psi, k)
        # align global phase on the larger component
        ref_sim, ref_tgt = (a0, target.alpha) if abs(target.alpha) >= abs(target.beta) else (a1, target.beta)
        g = ref_tgt / ref_sim * abs(ref_sim) / abs(ref_tgt) if ref_sim != 0 and ref_tgt != 0 else 1.0
        dev = max(abs(a0 * g - target.alpha), abs(a1 * g - target.beta))
        check.patterns.append(PatternRecord(pattern.measured, k, prob, phase, dev))
        if dev > tol:
            check._fail(
                f"pattern {pattern.measured}: simulated amplitudes ({a0:.6g}, {a1:.6g}) "
                f"vs expected ({target.alpha:.6g}, {target.beta:.6g})"
            )
        check.max_deviation = max(check.max_deviation, dev)

    check.k_probability = per_k
    check.k_probability_formula = [outcome_probability(c, psi, k) for k in range(n + 2)]
    for k, (sim, ref) in enumerate(zip(per_k, check.k_probability_formula)):
        dev = abs(sim - ref)
        check.max_deviation = max(check.max_deviation, dev)
        if dev > tol:
            check._fail(f"k={k}: simulated probability {sim!r} vs formula {ref!r}")
    return check
