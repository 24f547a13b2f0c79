"""Input states: coherent, Kerr-evolved coherent, and Fock basis states."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .fock_core import FockVector, check_cutoff, shared_factorial_table, wrap_phase


class KerrConvention(enum.Enum):
    """Photon-number polynomial multiplying the Kerr strength in the phase."""

    N_SQUARED = "n2"
    N_SQUARED_MINUS_N = "n2-n"

    def exponent(self, n):
        """Integer phase exponent ``n**2`` or ``n**2 - n`` (elementwise)."""
        n = np.asarray(n, dtype=np.int64)
        if self is KerrConvention.N_SQUARED:
            return n * n
        return n * n - n


@dataclass(frozen=True)
class KerrParams:
    gamma3: float
    convention: KerrConvention = KerrConvention.N_SQUARED

    def __post_init__(self):
        if not math.isfinite(self.gamma3):
            raise ValueError("gamma3 must be finite")


@dataclass(frozen=True)
class CoherentParams:
    magnitude: float
    phase: float = 0.0

    def __post_init__(self):
        if not self.magnitude >= 0 or not math.isfinite(self.magnitude):
            raise ValueError(f"coherent magnitude must be finite and >= 0, got {self.magnitude}")
        if not math.isfinite(self.phase):
            raise ValueError("coherent phase must be finite")

    @property
    def amplitude(self) -> complex:
        return self.magnitude * complex(math.cos(self.phase), math.sin(self.phase))


def coherent_state(params: CoherentParams, cutoff: int) -> FockVector:
    """Coherent state truncated at ``cutoff``.

    Magnitudes are ``exp(-|a|^2/2) |a|^n / sqrt(n!)``, evaluated in log space,
    and phases are ``n * arg(a)`` reduced mod 2pi.
    """
    cutoff = check_cutoff(cutoff)
    n = np.arange(cutoff + 1)
    if params.magnitude == 0.0:
        mags = np.zeros(cutoff + 1)
        mags[0] = 1.0
        return FockVector(mags, np.zeros(cutoff + 1))
    lf = shared_factorial_table(cutoff).log_fact
    r = params.magnitude
    log_mags = -0.5 * r * r + n * math.log(r) - 0.5 * lf
    phases = wrap_phase(n * wrap_phase(params.phase))
    return FockVector(np.exp(log_mags), phases)


def apply_kerr(state: FockVector, params: KerrParams) -> FockVector:
    """Self-phase modulation: multiply ``|n>`` by ``exp(i gamma3 f(n))``.

    Only phases change; magnitudes are carried over untouched.
    """
    if params.gamma3 == 0.0:
        return state
    n = np.arange(state.cutoff + 1)
    kerr_phase = wrap_phase(params.gamma3 * params.convention.exponent(n).astype(float))
    return FockVector(state.mags, wrap_phase(state.phases + kerr_phase))


def kerr_state(params: CoherentParams, kerr: KerrParams, cutoff: int) -> FockVector:
    return apply_kerr(coherent_state(params, cutoff), kerr)


def fock_state(n: int, cutoff: int) -> FockVector:
    cutoff = check_cutoff(cutoff)
    if not 0 <= n <= cutoff:
        raise ValueError(f"photon number {n} outside [0, {cutoff}]")
    mags = np.zeros(cutoff + 1)
    mags[n] = 1.0
    return FockVector(mags, np.zeros(cutoff + 1))
