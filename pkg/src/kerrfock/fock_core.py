"""Numeric foundation: log-factorials, truncated Fock containers, tail accounting.

Single-mode states are stored in polar form (magnitude and phase per photon
number) so that pure phase operations never perturb the photon-number
statistics, not even in the last bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import stats

EPS_NORM = 1e-12
TAIL_TOL = 1e-12
HERMITIAN_TOL = 1e-12
NEGATIVE_DIAG_TOL = 1e-12

FACTORIAL_BOUND = 4096
# 2 * cutoff photons must keep sqrt((2C)!) and friends inside double range.
CUTOFF_BOUND = 80

TWO_PI = 2.0 * math.pi


class ResourceBoundError(RuntimeError):
    """A requested size exceeds a configured resource bound."""


def wrap_phase(phase):
    """Reduce phase(s) to [0, 2pi)."""
    return np.mod(phase, TWO_PI)


def check_cutoff(cutoff: int, bound: int = CUTOFF_BOUND) -> int:
    if cutoff < 0:
        raise ValueError(f"cutoff must be >= 0, got {cutoff}")
    if cutoff > bound:
        raise ResourceBoundError(f"cutoff {cutoff} exceeds resource bound {bound}")
    return int(cutoff)


@dataclass(frozen=True)
class FactorialTable:
    max_n: int
    log_fact: np.ndarray

    def __post_init__(self):
        if self.log_fact.shape != (self.max_n + 1,):
            raise ValueError("log_fact length must be max_n + 1")

    def __getitem__(self, n):
        return self.log_fact[n]

    def log_binom(self, n: int, k: int) -> float:
        return self.log_fact[n] - self.log_fact[k] - self.log_fact[n - k]


def make_factorial_table(max_n: int, bound: int = FACTORIAL_BOUND) -> FactorialTable:
    """Natural-log factorials ``log(n!)`` for ``n = 0..max_n``.

    Raises:
        ValueError: ``max_n`` is negative.
        ResourceBoundError: ``max_n`` exceeds ``bound``.
    """
    if max_n < 0:
        raise ValueError(f"max_n must be >= 0, got {max_n}")
    if max_n > bound:
        raise ResourceBoundError(f"max_n {max_n} exceeds factorial table bound {bound}")
    log_fact = np.array([math.lgamma(n + 1.0) for n in range(max_n + 1)])
    log_fact.setflags(write=False)
    return FactorialTable(max_n=max_n, log_fact=log_fact)


@lru_cache(maxsize=None)
def shared_factorial_table(max_n: int) -> FactorialTable:
    return make_factorial_table(max_n)


@dataclass(frozen=True)
class FockVector:
    """Truncated single-mode pure state in polar form.

    ``mags[n]`` and ``phases[n]`` give the amplitude ``mags[n] * exp(i phases[n])``
    of ``|n>`` for ``n = 0..cutoff``.
    """

    mags: np.ndarray
    phases: np.ndarray

    def __post_init__(self):
        mags = np.asarray(self.mags, dtype=float)
        phases = wrap_phase(np.asarray(self.phases, dtype=float))
        if mags.ndim != 1 or mags.shape != phases.shape or mags.size == 0:
            raise ValueError("mags and phases must be equal-length 1-d arrays")
        if np.any(mags < 0) or not np.all(np.isfinite(mags)) or not np.all(np.isfinite(phases)):
            raise ValueError("magnitudes must be finite and non-negative")
        if float(np.dot(mags, mags)) > 1.0 + EPS_NORM:
            raise ValueError("state norm exceeds 1")
        mags.setflags(write=False)
        phases.setflags(write=False)
        object.__setattr__(self, "mags", mags)
        object.__setattr__(self, "phases", phases)

    @classmethod
    def from_amplitudes(cls, amps) -> "FockVector":
        amps = np.asarray(amps, dtype=complex)
        return cls(np.abs(amps), np.angle(amps))

    @property
    def cutoff(self) -> int:
        return self.mags.size - 1

    @property
    def amps(self) -> np.ndarray:
        return self.mags * np.exp(1j * self.phases)

    def pmf(self) -> np.ndarray:
        return self.mags * self.mags


@dataclass(frozen=True)
class TwoModeState:
    """Joint amplitudes ``amps[n2, n3]`` over the two output ports."""

    amps: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amps, dtype=complex)
        if amps.ndim != 2 or amps.shape[0] != amps.shape[1]:
            raise ValueError("two-mode amplitudes must be a square matrix")
        if not np.all(np.isfinite(amps)):
            raise ValueError("non-finite amplitude")
        if float(np.sum(np.abs(amps) ** 2)) > 1.0 + EPS_NORM:
            raise ValueError("state norm exceeds 1")
        amps.setflags(write=False)
        object.__setattr__(self, "amps", amps)

    @property
    def cutoff(self) -> int:
        return self.amps.shape[0] - 1

    @classmethod
    def product(cls, port2: FockVector, port3: FockVector) -> "TwoModeState":
        if port2.cutoff != port3.cutoff:
            raise ValueError("cutoff mismatch")
        return cls(np.outer(port2.amps, port3.amps))


@dataclass(frozen=True)
class DensityMatrix:
    """Truncated single-mode density matrix.

    ``tail`` is the probability mass known to be lost to truncation; the
    trace must lie in ``[1 - tail, 1 + EPS_NORM]``.
    """

    elems: np.ndarray
    tail: float = 0.0

    def __post_init__(self):
        elems = np.asarray(self.elems, dtype=complex)
        if elems.ndim != 2 or elems.shape[0] != elems.shape[1]:
            raise ValueError("density matrix must be square")
        if not np.all(np.isfinite(elems)):
            raise ValueError("non-finite density matrix entry")
        if np.max(np.abs(elems - elems.conj().T), initial=0.0) > HERMITIAN_TOL:
            raise ValueError("density matrix is not Hermitian")
        diag = elems.diagonal().real
        if np.any(diag < -NEGATIVE_DIAG_TOL):
            raise ValueError(f"negative population {diag.min():.3e}")
        tr = float(diag.sum())
        if tr > 1.0 + EPS_NORM or tr < 1.0 - self.tail - 1e-9:
            raise ValueError(f"trace {tr!r} inconsistent with tail {self.tail!r}")
        elems.setflags(write=False)
        object.__setattr__(self, "elems", elems)

    @property
    def cutoff(self) -> int:
        return self.elems.shape[0] - 1

    @classmethod
    def from_pure(cls, state: FockVector) -> "DensityMatrix":
        # Built from polar parts so the diagonal is exactly mags**2.
        mags, phases = state.mags, state.phases
        elems = np.outer(mags, mags) * np.exp(1j * np.subtract.outer(phases, phases))
        return cls(elems, tail=max(0.0, 1.0 - norm_sq(state)))


def norm_sq(state) -> float:
    """Squared norm of a FockVector or TwoModeState."""
    if isinstance(state, FockVector):
        return float(np.dot(state.mags, state.mags))
    if isinstance(state, TwoModeState):
        a = state.amps
        return float(np.sum(a.real * a.real + a.imag * a.imag))
    raise TypeError(f"unsupported state type {type(state).__name__}")


def poisson_tail(mean: float, cutoff: int) -> float:
    """Poisson mass above ``cutoff``, i.e. P(n > cutoff) for the given mean."""
    if mean <= 0:
        return 0.0
    return float(stats.poisson.sf(cutoff, mean))


def auto_cutoff(mean: float, tol: float = TAIL_TOL, bound: int = CUTOFF_BOUND) -> int:
    """Smallest cutoff whose Poisson tail for ``mean`` drops below ``tol``."""
    c = 0
    while poisson_tail(mean, c) >= tol:
        c += 1
        if c > bound:
            raise ResourceBoundError(
                f"mean photon number {mean} needs a cutoff above {bound}")
    return c
