"""Heralded preparation of a target ancilla from the uniform KLM state.

Each half of the 2n-mode KLM state passes through ``floor(n/2)`` attenuating
beam splitters whose reflected ports go to vacuum-heralding detectors. The
splitter with transmission ``t_i`` sits on position ``floor(n/2) + 1 - i`` of
both halves (positions counted from 1), so component ``j`` picks up the
telescoping factor ``c(j) / c(floor(n/2))``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from . import focksim
from .ancilla import AncillaCoefficients

__all__ = [
    "PrepCircuit",
    "PrepConsistencyError",
    "design_circuit",
    "herald_success_probability",
    "simulate_heralded_prep",
    "splitter_positions",
    "FockPrepCheck",
    "full_fock_prep_check",
]


class PrepConsistencyError(AssertionError):
    """Simulated and closed-form preparation results disagree."""


@dataclass(frozen=True)
class PrepCircuit:
    n: int
    target: AncillaCoefficients
    transmissions: tuple

    @property
    def half(self):
        return self.n // 2

    @property
    def splitter_count(self):
        return 2 * self.half

    def to_json(self):
        return json.dumps(
            {
                "n": self.n,
                "target": self.target.label,
                "transmissions": [float(f"{t:.16g}") for t in self.transmissions],
                "success_probability": float(f"{herald_success_probability(self):.16g}"),
            }
        )


def design_circuit(target):
    """Transmissions ``t_i = c(h-i)/c(h+1-i)``, ``h = floor(n/2)``.

    Raises ``ValueError`` for targets that are not strictly positive,
    palindromic and non-decreasing towards the centre.
    """
    c = np.asarray(target.c)
    n = target.n
    if np.any(c <= 0):
        raise ValueError("target coefficients must be strictly positive")
    if np.max(np.abs(c - c[::-1])) > 1e-10:
        raise ValueError("target coefficients must be symmetric, c(j) = c(n-j)")
    h = n // 2
    ts = []
    for i in range(1, h + 1):
        t = c[h - i] / c[h + 1 - i]
        if t > 1.0 + 1e-12:
            raise ValueError(
                f"transmission t_{i} = {t:.6g} exceeds 1; target must be centre-peaked"
            )
        ts.append(min(float(t), 1.0))
    return PrepCircuit(n=n, target=target, transmissions=tuple(ts))


def herald_success_probability(circuit):
    """``1 / ((n+1) c(floor(n/2))²)``."""
    ch = circuit.target.coef(circuit.half)
    return 1.0 / ((circuit.n + 1) * ch * ch)


def splitter_positions(circuit):
    """``(mode, transmission)`` pairs in the 2n-mode ancilla layout (0-based modes)."""
    n, h = circuit.n, circuit.half
    out = []
    for i, t in enumerate(circuit.transmissions, start=1):
        pos = h + 1 - i
        out.append((pos - 1, t))
        out.append((n + pos - 1, t))
    return out


def _component_factor(circuit, j):
    # product of transmissions on the modes occupied by component j
    occ = focksim._ancilla_occupation(circuit.n, j)
    f = 1.0
    for mode, t in splitter_positions(circuit):
        if occ[mode]:
            f *= t
    return f


def simulate_heralded_prep(circuit, tol=1e-10):
    """Amplitude-level simulation of the heralded branch.

    Returns ``(success_probability, output)`` and raises
    ``PrepConsistencyError`` if either disagrees with the closed forms.
    """
    n = circuit.n
    amp = np.array([_component_factor(circuit, j) for j in range(n + 1)]) / math.sqrt(n + 1)
    prob = math.fsum(amp * amp)
    output = AncillaCoefficients(n, amp / math.sqrt(prob), circuit.target.label)
    expected = herald_success_probability(circuit)
    if abs(prob - expected) > 1e-12:
        raise PrepConsistencyError(f"herald probability {prob!r} vs closed form {expected!r}")
    dev = float(np.max(np.abs(output.c - circuit.target.c)))
    if dev > tol:
        raise PrepConsistencyError(f"heralded state deviates from target by {dev:.3e}")
    return prob, output


@dataclass
class FockPrepCheck:
    n: int
    probability: float
    expected_probability: float
    coefficients: list
    expected_coefficients: list
    max_deviation: float
    tol: float

    @property
    def ok(self):
        return bool(self.max_deviation <= self.tol)

    def to_json(self):
        d = dict(self.__dict__)
        d["ok"] = self.ok
        return json.dumps(d)


def full_fock_prep_check(circuit, tol=1e-10, cap=None):
    """Run the preparation through the Fock engine and compare with the amplitude model."""
    n = circuit.n
    cap = focksim.DEFAULT_CAP if cap is None else cap
    if n > cap:
        raise ValueError(f"n={n} exceeds the simulation cap {cap}")
    start = AncillaCoefficients(n, np.full(n + 1, 1.0 / math.sqrt(n + 1)), "uniform")
    pairs = splitter_positions(circuit)
    state = focksim.klm_state(start).extended(len(pairs))
    detectors = list(range(2 * n, 2 * n + len(pairs)))
    for (mode, t), det in zip(pairs, detectors):
        state = focksim.apply_linear_optics(state, [mode, det], focksim.beam_splitter_matrix(t))
    heralded = focksim.postselect(state, detectors, (0,) * len(detectors))
    prob = heralded.norm_squared()

    coeffs = []
    stray = heralded.norm_squared()
    imag = 0.0
    for j in range(n + 1):
        a = heralded[focksim._ancilla_occupation(n, j)]
        stray -= abs(a) ** 2
        imag = max(imag, abs(a.imag))
        coeffs.append(a.real / math.sqrt(prob))
    ref_prob, ref_out = simulate_heralded_prep(circuit, tol=tol)
    dev = max(
        abs(prob - ref_prob),
        abs(stray),
        imag,
        max(abs(a - b) for a, b in zip(coeffs, ref_out.c)),
    )
    return FockPrepCheck(
        n=n,
        probability=prob,
        expected_probability=ref_prob,
        coefficients=coeffs,
        expected_coefficients=[float(x) for x in ref_out.c],
        max_deviation=float(dev),
        tol=tol,
    )
