"""Formula path: constrained five-fold sums for the port photon-number pmfs.

Per-term formula, from the binomial expansion of both creation-operator
polynomials and the delta functions of the partial trace.  Free indices are
``N, M, K, m, k`` (``N``/``L`` count port-1 photons in ket/bra, ``M``/``K``
port-0 photons, ``n``/``l`` and ``m``/``k`` the port-2 share of each)::

    term = e^{-(|a|^2+|b|^2)} a^N (a*)^L b^M (b*)^K e^{i g (f(N)+f(M)-f(K)-f(L))}
           (ir)^{M-m+n} (-ir)^{K-k+l} t^{N-n+m+k+L-l}
           x! y! / (m!(M-m)! n!(N-n)! k!(K-k)! l!(L-l)!)

with ``x = m + n = k + l`` photons at port 2, ``y = N + M - x`` at port 3 and
``L = N + M - K``.  For ``p2(x)`` the port-2 count is fixed and ``y`` follows;
for ``p3(y)`` it is the other way round.  Every infinite sum is truncated at
the input cutoff, so ``N, M, K, L <= cutoff``, matching the matrix path.

Terms are evaluated as ``exp(log magnitude)`` times an exactly reduced phase:
the powers of ``i`` are applied as a lookup on an integer mod 4 and the Kerr
phase is reduced mod 2pi.  Accumulation is Neumaier-compensated per outer
index ``N`` and the partials are combined with ``math.fsum``, so the result
does not depend on the numba thread count.
"""

from __future__ import annotations

import math
import os
import warnings
from dataclasses import dataclass, field

import numba
import numpy as np

from .fock_core import auto_cutoff, check_cutoff, shared_factorial_table
from .interferometer import BeamSplitter, InterferometerConfig, Port
from .state_prep import KerrConvention

IMAG_TOL = 1e-10
PROB_TOL = 1e-10
CONVERGENCE_TOL = 1e-9
PAIR_REL_TOL = 1e-14

_TWO_PI = 2.0 * math.pi

# The bundled TBB is often too old for numba and only produces a warning.
if "NUMBA_THREADING_LAYER" not in os.environ:
    numba.config.THREADING_LAYER_PRIORITY = ["omp", "workqueue", "tbb"]


class CutoffConvergenceWarning(UserWarning):
    """A closed-form value moved by more than the tolerance when the cutoff grew."""


@numba.njit(cache=True, inline="always")
def _neumaier(s, c, v):
    t = s + v
    if abs(s) >= abs(v):
        c += (s - t) + v
    else:
        c += (v - t) + s
    return t, c


@numba.njit(cache=True)
def _wrap(phase):
    return phase - _TWO_PI * math.floor(phase / _TWO_PI)


@numba.njit(cache=True, inline="always")
def _rotate_i(re, im, q):
    # multiply (re + i im) by i**q, q in 0..3
    if q == 0:
        return re, im
    if q == 1:
        return -im, re
    if q == 2:
        return -re, -im
    return im, -re


@numba.njit(cache=True, parallel=True)
def _general_partials(fixed, fix_port3, cutoff, lf,
                      log_a, arg_a, a_zero, log_b, arg_b, b_zero,
                      log_t, t_zero, log_r, r_zero,
                      gamma3, linear_kerr, log_pref):
    out = np.zeros((cutoff + 1, 4))
    for N in numba.prange(cutoff + 1):
        sr = 0.0
        cr = 0.0
        si = 0.0
        ci = 0.0
        for M in range(cutoff + 1):
            S = N + M
            if fix_port3:
                y = fixed
                x = S - y
            else:
                x = fixed
                y = S - x
            if x < 0 or y < 0:
                continue
            fN = N * N - linear_kerr * N
            fM = M * M - linear_kerr * M
            for K in range(max(0, S - cutoff), min(cutoff, S) + 1):
                L = S - K
                fK = K * K - linear_kerr * K
                fL = L * L - linear_kerr * L
                e_a = N + L
                e_b = M + K
                if (a_zero and e_a > 0) or (b_zero and e_b > 0):
                    continue
                kerr = _wrap(gamma3 * (fN + fM - fK - fL))
                base_phase = arg_a * (N - L) + arg_b * (M - K) + kerr
                base_log = log_pref + lf[x] + lf[y]
                if not a_zero:
                    base_log += e_a * log_a
                if not b_zero:
                    base_log += e_b * log_b
                for m in range(max(0, x - N), min(M, x) + 1):
                    n = x - m
                    g_ket = (lf[m] + lf[M - m]) + (lf[n] + lf[N - n])
                    for k in range(max(0, x - L), min(K, x) + 1):
                        l = x - k
                        e_r = (M - m + n) + (K - k + l)
                        e_t = (N - n + m) + (k + L - l)
                        if (r_zero and e_r > 0) or (t_zero and e_t > 0):
                            continue
                        g_bra = (lf[k] + lf[K - k]) + (lf[l] + lf[L - l])
                        lm = base_log - (g_ket + g_bra)
                        if not r_zero:
                            lm += e_r * log_r
                        if not t_zero:
                            lm += e_t * log_t
                        mag = math.exp(lm)
                        re = mag * math.cos(base_phase)
                        im = mag * math.sin(base_phase)
                        q = ((M - m + n) - (K - k + l)) % 4
                        re, im = _rotate_i(re, im, q)
                        sr, cr = _neumaier(sr, cr, re)
                        si, ci = _neumaier(si, ci, im)
        out[N, 0] = sr
        out[N, 1] = cr
        out[N, 2] = si
        out[N, 3] = ci
    return out


@numba.njit(cache=True, parallel=True)
def _symmetric_partials(y, cutoff, lf, log_beta, beta_zero, gamma3):
    # balanced splitter, alpha = -i beta: every factor reduces to |beta|/sqrt(2)
    # and an integer power of i
    out = np.zeros((cutoff + 1, 4))
    log_pref_scale = log_beta - 0.5 * math.log(2.0)
    for N in numba.prange(cutoff + 1):
        sr = 0.0
        cr = 0.0
        si = 0.0
        ci = 0.0
        for M in range(cutoff + 1):
            S = N + M
            j = S - y
            if j < 0:
                continue
            for K in range(max(0, S - cutoff), min(cutoff, S) + 1):
                L = S - K
                e_tot = M + K + N + L
                if beta_zero and e_tot > 0:
                    continue
                kerr = _wrap(gamma3 * (M * M + N * N - K * K - L * L))
                base_log = lf[j] + lf[y]
                if not beta_zero:
                    base_log += e_tot * log_pref_scale
                c_kerr = math.cos(kerr)
                s_kerr = math.sin(kerr)
                for m in range(max(0, j - N), min(M, j) + 1):
                    n = S - m - y
                    g_ket = (lf[m] + lf[M - m]) + (lf[n] + lf[N - n])
                    for k in range(max(0, j - L), min(K, j) + 1):
                        l = j - k
                        g_bra = (lf[k] + lf[K - k]) + (lf[l] + lf[L - l])
                        mag = math.exp(base_log - (g_ket + g_bra))
                        q = ((L + M - m + n) - (N + K - k + l)) % 4
                        re, im = _rotate_i(mag * c_kerr, mag * s_kerr, q)
                        sr, cr = _neumaier(sr, cr, re)
                        si, ci = _neumaier(si, ci, im)
        out[N, 0] = sr
        out[N, 1] = cr
        out[N, 2] = si
        out[N, 3] = ci
    return out


def _combine(partials: np.ndarray) -> complex:
    re = math.fsum(partials[:, 0].tolist() + partials[:, 1].tolist())
    im = math.fsum(partials[:, 2].tolist() + partials[:, 3].tolist())
    return complex(re, im)


@dataclass(frozen=True)
class ClosedFormConfig:
    """Parameters of the closed-form sums.

    ``alpha`` enters at input port 1 and ``beta`` at input port 0.  A cutoff
    of 0 selects the Poisson-tail policy for ``max(|alpha|^2, |beta|^2)``.
    """

    alpha: complex
    beta: complex
    gamma3: float
    bs: BeamSplitter = field(default_factory=BeamSplitter.balanced)
    cutoff: int = 0
    kerr_convention: KerrConvention = KerrConvention.N_SQUARED
    check_convergence: bool = False

    def __post_init__(self):
        if self.cutoff < 0:
            raise ValueError("cutoff must be >= 0")
        if not (math.isfinite(abs(self.alpha)) and math.isfinite(abs(self.beta))):
            raise ValueError("amplitudes must be finite")

    @classmethod
    def from_interferometer(cls, cfg: InterferometerConfig, **kw) -> "ClosedFormConfig":
        return cls(alpha=cfg.alpha, beta=cfg.beta, gamma3=cfg.gamma3, bs=cfg.bs,
                   cutoff=cfg.resolved_cutoff, kerr_convention=cfg.convention, **kw)

    @property
    def resolved_cutoff(self) -> int:
        if self.cutoff:
            return check_cutoff(self.cutoff)
        return max(1, auto_cutoff(max(abs(self.alpha), abs(self.beta)) ** 2))


def _log_or_zero(v: float) -> tuple[float, bool]:
    return (math.log(v), False) if v > 0 else (0.0, True)


def _general_sum(fixed: int, port3: bool, cfg: ClosedFormConfig, cutoff: int) -> complex:
    lf = np.asarray(shared_factorial_table(2 * cutoff).log_fact)
    la, az = _log_or_zero(abs(cfg.alpha))
    lb, bz = _log_or_zero(abs(cfg.beta))
    lt, tz = _log_or_zero(cfg.bs.t)
    lr, rz = _log_or_zero(cfg.bs.r)
    linear = 1 if cfg.kerr_convention is KerrConvention.N_SQUARED_MINUS_N else 0
    log_pref = -(abs(cfg.alpha) ** 2 + abs(cfg.beta) ** 2)
    parts = _general_partials(int(fixed), bool(port3), int(cutoff), lf,
                              la, math.atan2(cfg.alpha.imag, cfg.alpha.real), az,
                              lb, math.atan2(cfg.beta.imag, cfg.beta.real), bz,
                              lt, tz, lr, rz, float(cfg.gamma3), linear, log_pref)
    return _combine(parts)


def _finish(raw: complex, what: str) -> float:
    if abs(raw.imag) >= IMAG_TOL:
        raise ArithmeticError(f"{what}: imaginary residue {raw.imag:.3e}")
    if not -PROB_TOL <= raw.real <= 1.0 + PROB_TOL:
        raise ArithmeticError(f"{what}: value {raw.real!r} is not a probability")
    return min(1.0, max(0.0, raw.real))


def _evaluate(fixed: int, port: Port, cfg: ClosedFormConfig) -> float:
    if fixed < 0:
        raise ValueError("photon number must be >= 0")
    cutoff = cfg.resolved_cutoff
    label = f"p{int(port)}({fixed})"
    value = _finish(_general_sum(fixed, port == Port.PORT_3, cfg, cutoff), label)
    if cfg.check_convergence:
        wider = _finish(_general_sum(fixed, port == Port.PORT_3, cfg, cutoff + 2), label)
        if abs(wider - value) > CONVERGENCE_TOL:
            warnings.warn(f"{label} changed by {abs(wider - value):.3e} at cutoff "
                          f"{cutoff + 2}; cutoff {cutoff} is too small",
                          CutoffConvergenceWarning, stacklevel=3)
    return value


def p2(x: int, cfg: ClosedFormConfig) -> float:
    """Probability of ``x`` photons at output port 2."""
    return _evaluate(x, Port.PORT_2, cfg)


def p3(y: int, cfg: ClosedFormConfig) -> float:
    """Probability of ``y`` photons at output port 3."""
    return _evaluate(y, Port.PORT_3, cfg)


def port_pmf(port: Port, cfg: ClosedFormConfig, max_n: int) -> np.ndarray:
    f = p3 if port == Port.PORT_3 else p2
    return np.array([f(n, cfg) for n in range(max_n + 1)])


def p3_symmetric(y: int, beta_mag: float, gamma3: float, cutoff: int = 0) -> float:
    """Port-3 probability in the dark-port configuration.

    Balanced splitter, ``alpha = beta * exp(-i pi/2)``; every amplitude factor
    collapses to a power of ``|beta|/sqrt(2)`` and a power of ``i``.
    """
    if y < 0:
        raise ValueError("photon number must be >= 0")
    if beta_mag < 0:
        raise ValueError("beta_mag must be >= 0")
    cutoff = check_cutoff(cutoff) if cutoff else max(1, auto_cutoff(beta_mag ** 2))
    lf = np.asarray(shared_factorial_table(2 * cutoff).log_fact)
    lb, bz = _log_or_zero(beta_mag)
    parts = _symmetric_partials(int(y), int(cutoff), lf, lb, bz, float(gamma3))
    raw = _combine(parts) * math.exp(-2.0 * beta_mag * beta_mag)
    return _finish(raw, f"p3_symmetric({y})")


@dataclass(frozen=True)
class SumIndexTuple:
    """Free summation indices of one dark-port term; the rest follow from ``y``."""

    N: int
    M: int
    K: int
    m: int
    k: int

    def derived(self, y: int) -> dict[str, int]:
        L = self.M + self.N - self.K
        n = self.M + self.N - self.m - y
        j = self.m + n
        return {"L": L, "n": n, "j": j, "l": j - self.k}

    def is_valid(self, y: int) -> bool:
        d = self.derived(y)
        return (min(self.N, self.M, self.K, y) >= 0
                and 0 <= self.m <= self.M and 0 <= self.k <= self.K
                and d["L"] >= 0 and 0 <= d["n"] <= self.N
                and 0 <= d["l"] <= d["L"] and d["j"] >= 0)

    def swap_bra(self, y: int) -> "SumIndexTuple":
        """Simultaneous exchange ``K <-> L`` and ``k <-> l``."""
        d = self.derived(y)
        return SumIndexTuple(self.N, self.M, d["L"], self.m, d["l"])

    def swap_ket(self, y: int) -> "SumIndexTuple":
        """Simultaneous exchange ``M <-> N`` and ``m <-> n``."""
        d = self.derived(y)
        return SumIndexTuple(self.M, self.N, self.K, d["n"], self.k)


def symmetric_term(idx: SumIndexTuple, y: int, beta_mag: float, gamma3: float) -> complex:
    """One summand of the dark-port sum (prefactor ``exp(-2|beta|^2)`` included).

    The log-magnitude is summed with ``math.fsum`` so the result is
    independent of the order of the factorial arguments.
    """
    if not idx.is_valid(y):
        raise ValueError(f"index tuple {idx} is not valid for y={y}")
    N, M, K, m, k = idx.N, idx.M, idx.K, idx.m, idx.k
    d = idx.derived(y)
    L, n, j, l = d["L"], d["n"], d["j"], d["l"]
    lf = shared_factorial_table(max(2 * max(N + M, 1), j, y)).log_fact
    e_tot = M + K + N + L
    if beta_mag == 0.0:
        if e_tot > 0:
            return 0j
        scale = 0.0
    else:
        scale = e_tot * (math.log(beta_mag) - 0.5 * math.log(2.0))
    logmag = math.fsum([-2.0 * beta_mag * beta_mag, scale, lf[j], lf[y],
                        -lf[m], -lf[M - m], -lf[n], -lf[N - n],
                        -lf[k], -lf[K - k], -lf[l], -lf[L - l]])
    kerr = _wrap(gamma3 * (M * M + N * N - K * K - L * L))
    mag = math.exp(logmag)
    q = ((L + M - m + n) - (N + K - k + l)) % 4
    re, im = _rotate_i(mag * math.cos(kerr), mag * math.sin(kerr), q)
    return complex(re, im)


@dataclass(frozen=True)
class PairVerdict:
    idx: SumIndexTuple
    partner: SumIndexTuple
    y: int
    term: complex
    partner_term: complex
    self_paired: bool
    residual: float
    passed: bool

    @property
    def pair_sum(self) -> complex:
        if self.self_paired:
            return self.term
        return self.term + self.partner_term


def cancellation_pair_check(idx: SumIndexTuple, y: int, beta_mag: float, gamma3: float,
                            exchange: str = "bra", rel_tol: float = PAIR_REL_TOL) -> PairVerdict:
    """Evaluate a term and its exchange partner and test the parity relation.

    The partner equals ``(-1)**y`` times the term, so pairs cancel for odd
    ``y`` and double for even ``y``.  ``residual`` is the relative deviation
    from that relation; a self-paired term must vanish for odd ``y``.
    """
    if exchange not in ("bra", "ket"):
        raise ValueError("exchange must be 'bra' (K<->L, k<->l) or 'ket' (M<->N, m<->n)")
    partner = idx.swap_bra(y) if exchange == "bra" else idx.swap_ket(y)
    a = symmetric_term(idx, y, beta_mag, gamma3)
    b = symmetric_term(partner, y, beta_mag, gamma3)
    scale = max(abs(a), abs(b))
    self_paired = partner == idx
    if y % 2:
        dev = abs(a) if self_paired else abs(a + b)
    else:
        dev = abs(b - a)
    residual = dev / scale if scale > 0 else 0.0
    return PairVerdict(idx, partner, y, a, b, self_paired, residual, residual <= rel_tol)


def random_index_tuple(rng: np.random.Generator, y: int, cutoff: int) -> SumIndexTuple:
    """Uniform draw among valid dark-port tuples with all indices <= cutoff."""
    if 2 * cutoff < y:
        raise ValueError(f"no valid tuples for y={y} at cutoff {cutoff}")
    while True:
        idx = SumIndexTuple(*(int(v) for v in rng.integers(0, cutoff + 1, size=5)))
        if idx.is_valid(y) and idx.derived(y)["L"] <= cutoff:
            return idx
