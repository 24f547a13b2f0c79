"""Matrix path: beam-splitter transform, partial trace and port statistics.

Conventions: input port 0 carries the real-amplitude state ``beta`` and input
port 1 the state ``alpha = beta * exp(-i theta)``.  Creation operators map as

    a0^dag -> t a2^dag + i r a3^dag
    a1^dag -> t a3^dag + i r a2^dag

and two-mode amplitudes are indexed ``(n2, n3)`` everywhere.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .fock_core import (
    NEGATIVE_DIAG_TOL,
    DensityMatrix,
    FockVector,
    TwoModeState,
    auto_cutoff,
    check_cutoff,
    norm_sq,
    shared_factorial_table,
)
from .state_prep import CoherentParams, KerrConvention, KerrParams, kerr_state

BS_TOL = 1e-12


class Port(enum.IntEnum):
    PORT_2 = 2
    PORT_3 = 3


@dataclass(frozen=True)
class BeamSplitter:
    t: float
    r: float

    def __post_init__(self):
        if self.t < 0 or self.r < 0:
            raise ValueError("beam-splitter coefficients must be non-negative")
        if abs(self.t * self.t + self.r * self.r - 1.0) >= BS_TOL:
            raise ValueError(f"t^2 + r^2 != 1 for t={self.t}, r={self.r}")

    @classmethod
    def from_transmission(cls, t: float) -> "BeamSplitter":
        if not 0.0 <= t <= 1.0:
            raise ValueError(f"transmission must lie in [0, 1], got {t}")
        return cls(t, math.sqrt(1.0 - t * t))

    @classmethod
    def balanced(cls) -> "BeamSplitter":
        h = math.sqrt(0.5)
        return cls(h, h)


@dataclass(frozen=True)
class Distribution:
    """Probability mass over photon numbers (or a phase grid).

    Attributes:
        support: photon numbers, or grid angles for phase distributions.
        probs: probabilities, clamped at zero.
        tail_bound: mass known to lie outside the support because of truncation.
        metadata: free-form provenance (path, cutoff, parameters).
    """

    support: np.ndarray
    probs: np.ndarray
    tail_bound: float = 0.0
    metadata: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        probs = np.asarray(self.probs, dtype=float)
        support = np.asarray(self.support)
        if probs.shape != support.shape:
            raise ValueError("support and probs must have equal length")
        if np.any(probs < -NEGATIVE_DIAG_TOL):
            raise ValueError(f"negative probability {probs.min():.3e}")
        probs = np.clip(probs, 0.0, None)
        total = math.fsum(probs)
        if not 1.0 - self.tail_bound - 1e-9 <= total <= 1.0 + 1e-9:
            raise ValueError(f"probabilities sum to {total!r} with tail {self.tail_bound!r}")
        object.__setattr__(self, "probs", probs)
        object.__setattr__(self, "support", support)

    def __getitem__(self, n: int) -> float:
        return float(self.probs[n]) if 0 <= n < self.probs.size else 0.0


_I_POWERS = np.array([1, 1j, -1, -1j])


def _port_polynomial(state: FockVector, t: float, r: float, same_first: bool) -> np.ndarray:
    """Coefficients of ``sum_N c_N (t a_same + i r a_cross)^N / sqrt(N!)`` on ``(n2, n3)``.

    ``same_first`` puts the transmitted branch on port 2 (input port 0);
    otherwise it lands on port 3 (input port 1).
    """
    c = state.cutoff
    lf = shared_factorial_table(c).log_fact
    amps = state.amps
    poly = np.zeros((c + 1, c + 1), dtype=complex)
    for n_tot in range(c + 1):
        if state.mags[n_tot] == 0.0:
            continue
        k = np.arange(n_tot + 1)  # transmitted photons
        refl = n_tot - k
        weight = np.exp(0.5 * lf[n_tot] - lf[k] - lf[refl]) * t ** k * r ** refl
        coef = amps[n_tot] * weight * _I_POWERS[refl % 4]
        if same_first:
            poly[k, refl] = coef
        else:
            poly[refl, k] = coef
    return poly


def beam_splitter_transform(in0: FockVector, in1: FockVector, bs: BeamSplitter) -> TwoModeState:
    """Joint output state for inputs ``in0`` (port 0) and ``in1`` (port 1).

    Each input's creation-operator polynomial is formed on the output grid and
    the two are multiplied as bivariate polynomials (a 2-d convolution with a
    fixed accumulation order), then normalised by ``sqrt(n2! n3!)``.  The
    output cutoff is twice the input cutoff.
    """
    if in0.cutoff != in1.cutoff:
        raise ValueError(f"input cutoffs differ: {in0.cutoff} vs {in1.cutoff}")
    c = in0.cutoff
    poly0 = _port_polynomial(in0, bs.t, bs.r, same_first=True)
    poly1 = _port_polynomial(in1, bs.t, bs.r, same_first=False)

    size = 2 * c + 1
    joint = np.zeros((size, size), dtype=complex)
    for i in range(c + 1):
        for j in range(c + 1 - i):
            a = poly1[i, j]
            if a != 0:
                joint[i:i + c + 1, j:j + c + 1] += a * poly0

    lf = shared_factorial_table(2 * c).log_fact
    norm = np.exp(0.5 * (lf[:, None] + lf[None, :]))
    return TwoModeState(joint * norm)


def partial_trace(joint: TwoModeState, keep: Port) -> DensityMatrix:
    """Reduced density matrix of the ``keep`` port."""
    a = joint.amps
    if keep == Port.PORT_2:
        elems = np.einsum("ac,bc->ab", a, a.conj())
    elif keep == Port.PORT_3:
        elems = np.einsum("ca,cb->ab", a, a.conj())
    else:
        raise ValueError(f"unknown port {keep!r}")
    return DensityMatrix(elems, tail=max(0.0, 1.0 - norm_sq(joint)))


def photon_number_distribution(rho: DensityMatrix) -> Distribution:
    probs = rho.elems.diagonal().real.copy()
    return Distribution(np.arange(probs.size), probs, tail_bound=rho.tail)


def mean_photon_number(dist: Distribution) -> float:
    return math.fsum(np.asarray(dist.support, dtype=float) * dist.probs)


def odd_probability_mass(dist: Distribution) -> float:
    odd = np.asarray(dist.support) % 2 == 1
    return math.fsum(dist.probs[odd])


def phase_distribution(rho: DensityMatrix, num_points: int) -> Distribution:
    """Phase pmf on a uniform grid over [0, 2pi), from ``<phi|rho|phi>``.

    ``|phi> = sum_k exp(i k phi)|k>`` is unnormalised, so the grid values are
    rescaled to sum to one.
    """
    if num_points < 2:
        raise ValueError("num_points must be >= 2")
    k = np.arange(rho.cutoff + 1)
    j = np.arange(num_points)
    # exact integer reduction of k * phi_j modulo 2pi
    angles = (np.outer(j, k) % num_points) * (2.0 * math.pi / num_points)
    vecs = np.exp(1j * angles)
    vals = np.einsum("jk,kl,jl->j", vecs.conj(), rho.elems, vecs).real
    if np.any(vals < -NEGATIVE_DIAG_TOL * max(1.0, float(np.max(np.abs(vals))))):
        raise ValueError("negative phase density")
    vals = np.clip(vals, 0.0, None)
    total = math.fsum(vals)
    if total <= 0:
        raise ValueError("phase density vanishes on the whole grid")
    grid = j * (2.0 * math.pi / num_points)
    return Distribution(grid, vals / total, tail_bound=0.0)


def circular_variance(dist: Distribution) -> float:
    """``1 - |<exp(i phi)>|`` for a phase distribution."""
    z = np.sum(dist.probs * np.exp(1j * np.asarray(dist.support, dtype=float)))
    return 1.0 - abs(z)


@dataclass(frozen=True)
class InterferometerConfig:
    """Two Kerr states of equal magnitude meeting at a beam splitter.

    ``cutoff = 0`` selects the smallest cutoff whose Poisson tail is below
    1e-12 for ``beta_mag**2``.
    """

    beta_mag: float
    theta: float
    gamma3: float
    bs: BeamSplitter = field(default_factory=BeamSplitter.balanced)
    cutoff: int = 0
    convention: KerrConvention = KerrConvention.N_SQUARED

    def __post_init__(self):
        if not self.beta_mag >= 0:
            raise ValueError("beta_mag must be >= 0")
        if self.cutoff < 0:
            raise ValueError("cutoff must be >= 0 (0 selects automatically)")

    @property
    def resolved_cutoff(self) -> int:
        if self.cutoff:
            return check_cutoff(self.cutoff)
        return max(1, auto_cutoff(self.beta_mag ** 2))

    @property
    def beta(self) -> complex:
        return complex(self.beta_mag)

    @property
    def alpha(self) -> complex:
        return CoherentParams(self.beta_mag, -self.theta).amplitude

    def inputs(self) -> tuple[FockVector, FockVector]:
        c = self.resolved_cutoff
        kerr = KerrParams(self.gamma3, self.convention)
        in0 = kerr_state(CoherentParams(self.beta_mag, 0.0), kerr, c)
        in1 = kerr_state(CoherentParams(self.beta_mag, -self.theta), kerr, c)
        return in0, in1


def output_state(cfg: InterferometerConfig) -> TwoModeState:
    in0, in1 = cfg.inputs()
    return beam_splitter_transform(in0, in1, cfg.bs)


def port_distributions(cfg: InterferometerConfig) -> dict[Port, Distribution]:
    joint = output_state(cfg)
    return {p: photon_number_distribution(partial_trace(joint, p)) for p in Port}
