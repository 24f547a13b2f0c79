"""Parameter sweeps, fringe visibility, distribution reports and verification suites."""

from __future__ import annotations

import enum
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import stats

from . import closed_form as cf
from .fock_core import DensityMatrix
from .interferometer import (
    BeamSplitter,
    Distribution,
    InterferometerConfig,
    Port,
    beam_splitter_transform,
    mean_photon_number,
    odd_probability_mass,
    output_state,
    partial_trace,
    phase_distribution,
    photon_number_distribution,
)
from .state_prep import (
    CoherentParams,
    KerrConvention,
    KerrParams,
    apply_kerr,
    coherent_state,
    fock_state,
)

CONSERVATION_TOL = 1e-8
PATH_AGREEMENT_TOL = 1e-6
CROSS_PATH_TOL = 1e-8
PARITY_TOL = 1e-10

FIG2_GAMMAS = (0.01, 0.1, 0.3, 0.6, 1.0, 2.0)
FIG3_DELTAS = (0.0, 0.05, 0.1, 0.2, 0.4)
VISIBILITY_POINTS = 128
FRINGE_POINTS = 64


class SweepVariable(enum.Enum):
    THETA = "theta"
    GAMMA3 = "gamma3"


class PathChoice(enum.Enum):
    MATRIX = "matrix"
    CLOSED_FORM = "closed"
    BOTH = "both"


@dataclass(frozen=True)
class SweepSpec:
    variable: SweepVariable
    start: float
    stop: float
    steps: int
    base: InterferometerConfig
    path: PathChoice = PathChoice.MATRIX

    def __post_init__(self):
        if self.steps < 2:
            raise ValueError("a sweep needs at least 2 steps")
        if not self.start < self.stop:
            raise ValueError("sweep start must be below stop")

    def values(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.steps)

    def config_at(self, value: float) -> InterferometerConfig:
        key = "theta" if self.variable is SweepVariable.THETA else "gamma3"
        return replace(self.base, **{key: float(value)})


@dataclass(frozen=True)
class SweepRow:
    value: float
    mean_n2: float
    mean_n3: float
    odd_mass_3: float
    total_mean: float
    tail_bound: float
    expected_total: float
    path_residual: float | None = None

    @property
    def conserved(self) -> bool:
        return abs(self.total_mean - self.expected_total) < CONSERVATION_TOL

    @property
    def paths_agree(self) -> bool:
        return self.path_residual is None or self.path_residual <= PATH_AGREEMENT_TOL


def _matrix_pmfs(cfg: InterferometerConfig) -> tuple[Distribution, Distribution]:
    joint = output_state(cfg)
    return (photon_number_distribution(partial_trace(joint, Port.PORT_2)),
            photon_number_distribution(partial_trace(joint, Port.PORT_3)))


def _closed_pmfs(cfg: InterferometerConfig) -> tuple[Distribution, Distribution]:
    ccfg = cf.ClosedFormConfig.from_interferometer(cfg)
    top = 2 * ccfg.resolved_cutoff
    out = []
    for port in (Port.PORT_2, Port.PORT_3):
        probs = cf.port_pmf(port, ccfg, top)
        tail = max(0.0, 1.0 - math.fsum(probs))
        out.append(Distribution(np.arange(top + 1), probs, tail_bound=tail))
    return out[0], out[1]


def _row(args: tuple[float, InterferometerConfig, PathChoice]) -> SweepRow:
    value, cfg, path = args
    residual = None
    if path is PathChoice.CLOSED_FORM:
        d2, d3 = _closed_pmfs(cfg)
    else:
        d2, d3 = _matrix_pmfs(cfg)
        if path is PathChoice.BOTH:
            c2, c3 = _closed_pmfs(cfg)
            residual = max(float(np.max(np.abs(c2.probs - d2.probs))),
                           float(np.max(np.abs(c3.probs - d3.probs))))
    m2, m3 = mean_photon_number(d2), mean_photon_number(d3)
    return SweepRow(
        value=float(value), mean_n2=m2, mean_n3=m3,
        odd_mass_3=odd_probability_mass(d3), total_mean=m2 + m3,
        tail_bound=max(d2.tail_bound, d3.tail_bound),
        expected_total=abs(cfg.alpha) ** 2 + abs(cfg.beta) ** 2,
        path_residual=residual)


def _map(func, items, workers: int):
    items = list(items)
    if workers <= 1 or len(items) < 2:
        return [func(it) for it in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, items))


def sweep(spec: SweepSpec, workers: int = 1) -> list[SweepRow]:
    """Rows in ascending order of the swept variable, each computed independently."""
    jobs = [(v, spec.config_at(v), spec.path) for v in spec.values()]
    return _map(_row, jobs, workers)


def _mean_n3(cfg: InterferometerConfig) -> float:
    return mean_photon_number(_matrix_pmfs(cfg)[1])


def visibility(gamma3: float, base: InterferometerConfig, points: int = VISIBILITY_POINTS,
               workers: int = 1) -> float:
    """Fringe visibility of the port-3 mean photon number over a full turn of theta."""
    if points < 32:
        raise ValueError("visibility needs at least 32 theta points")
    thetas = np.arange(points) * (2.0 * math.pi / points)
    cfgs = [replace(base, gamma3=float(gamma3), theta=float(th)) for th in thetas]
    means = np.array(_map(_mean_n3, cfgs, workers))
    hi, lo = float(means.max()), float(means.min())
    if hi + lo <= 0.0:
        if hi > 0.0:
            return 1.0
        raise ValueError("no light at port 3 anywhere on the theta grid")
    return (hi - lo) / (hi + lo)


def distribution_report(port: Port, cfg: InterferometerConfig, max_n: int | None = None,
                        path: PathChoice = PathChoice.MATRIX) -> Distribution:
    """Photon-number pmf of one port with provenance metadata.

    With ``PathChoice.BOTH`` the matrix values are returned and the largest
    disagreement is stored as ``metadata['path_residual']``.
    """
    cutoff = cfg.resolved_cutoff
    top = 2 * cutoff if max_n is None else int(max_n)
    if top < 0:
        raise ValueError("max_n must be >= 0")
    meta = {"port": int(port), "path": path.value, "cutoff": cutoff}

    if path is PathChoice.CLOSED_FORM:
        probs = cf.port_pmf(port, cf.ClosedFormConfig.from_interferometer(cfg), top)
    else:
        full = photon_number_distribution(partial_trace(output_state(cfg), port))
        padded = np.zeros(max(top + 1, full.probs.size))
        padded[:full.probs.size] = full.probs
        probs = padded[:top + 1]
        if path is PathChoice.BOTH:
            other = cf.port_pmf(port, cf.ClosedFormConfig.from_interferometer(cfg), top)
            meta["path_residual"] = float(np.max(np.abs(other - probs)))
    tail = max(0.0, 1.0 - math.fsum(probs))
    meta["tail_bound"] = tail
    return Distribution(np.arange(top + 1), probs, tail_bound=tail, metadata=meta)


def phase_report(port: Port, cfg: InterferometerConfig, points: int) -> Distribution:
    rho: DensityMatrix = partial_trace(output_state(cfg), port)
    dist = phase_distribution(rho, points)
    return Distribution(dist.support, dist.probs, metadata={
        "port": int(port), "path": "matrix", "cutoff": cfg.resolved_cutoff})


# -- verification -----------------------------------------------------------


class Level(enum.Enum):
    QUICK = "quick"
    FULL = "full"


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    residual: float
    tolerance: float
    detail: str = ""


@dataclass
class VerificationReport:
    level: Level
    checks: list[Check] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def add(self, name: str, residual: float, tolerance: float, detail: str = "",
            strict: bool = True) -> Check:
        ok = residual < tolerance if strict else residual <= tolerance
        check = Check(name, bool(ok), float(residual), float(tolerance), detail)
        self.checks.append(check)
        return check


def _cross_path_residual(args) -> float:
    cfg, max_n = args
    d2, d3 = _matrix_pmfs(cfg)
    ccfg = cf.ClosedFormConfig.from_interferometer(cfg)
    worst = 0.0
    for n in range(max_n + 1):
        worst = max(worst, abs(cf.p2(n, ccfg) - d2[n]), abs(cf.p3(n, ccfg) - d3[n]))
    return worst


def cancellation_audit(samples: int, y_values, beta_mag: float, gamma3: float,
                       cutoff: int, seed: int) -> tuple[float, int]:
    """Worst relative pair residual over random index tuples; returns (residual, failures)."""
    rng = np.random.default_rng(seed)
    worst, failures = 0.0, 0
    for i in range(samples):
        y = int(y_values[i % len(y_values)])
        idx = cf.random_index_tuple(rng, y, cutoff)
        for exchange in ("bra", "ket"):
            v = cf.cancellation_pair_check(idx, y, beta_mag, gamma3, exchange=exchange)
            worst = max(worst, v.residual)
            failures += not v.passed
    return worst, failures


def verify(level: Level = Level.QUICK, seed: int = 0, workers: int = 1) -> VerificationReport:
    """Run the parity, conservation, cross-path and cancellation suites."""
    full = level is Level.FULL
    report = VerificationReport(level)
    half_pi = math.pi / 2

    # parity of the dark port
    betas = (math.sqrt(2), 2.0, math.sqrt(6)) if full else (math.sqrt(6),)
    gammas = (0.01, 0.1, 0.4, 1.0, math.pi / 4) if full else (0.1, 1.0)
    for b in betas:
        for g in gammas:
            for conv in KerrConvention:
                d3 = _matrix_pmfs(InterferometerConfig(b, half_pi, g, convention=conv))[1]
                report.add(f"parity/beta2={b * b:.3g}/gamma3={g:.4g}/{conv.value}",
                           odd_probability_mass(d3), PARITY_TOL)
    for g in (0.1, 0.5, 1.0, math.pi / 4):
        worst = max(cf.p3_symmetric(y, math.sqrt(6), g) for y in (1, 3, 5))
        report.add(f"parity-closed/gamma3={g:.4g}", worst, 1e-12)

    # conservation
    n_theta = FRINGE_POINTS if full else 16
    rows = sweep(SweepSpec(SweepVariable.THETA, 0.0, 2 * math.pi, n_theta,
                           InterferometerConfig(2.0, 0.0, 0.1)), workers=workers)
    report.add("conservation/beta=2/gamma3=0.1",
               max(abs(r.total_mean - r.expected_total) for r in rows), CONSERVATION_TOL)

    # coherent limit
    d2, d3 = _matrix_pmfs(InterferometerConfig(2.0, half_pi, 0.0))
    poisson = stats.poisson.pmf(np.arange(d2.probs.size), 8.0)
    report.add("coherent-limit/dark-port", 1.0 - d3[0], 1e-10)
    report.add("coherent-limit/bright-port-poisson",
               float(np.max(np.abs(d2.probs - poisson))), 1e-9)

    # Hong-Ou-Mandel
    hom = beam_splitter_transform(fock_state(1, 2), fock_state(1, 2), BeamSplitter.balanced())
    report.add("hong-ou-mandel/p11", abs(hom.amps[1, 1]) ** 2, 1e-14, strict=False)

    # Kerr statistics
    coh = coherent_state(CoherentParams(2.0, 0.3), 30)
    mismatch = 0.0
    for g in (0.1, 1.0, 2.5):
        for conv in KerrConvention:
            kerr = apply_kerr(coh, KerrParams(g, conv))
            mismatch = max(mismatch, float(np.max(np.abs(kerr.pmf() - coh.pmf()))))
    report.add("kerr-pmf-invariance", mismatch, 0.0, strict=False)

    # cross-path equivalence
    if full:
        grid = [(b2, th, g, t2) for b2 in (2.0, 4.0, 6.0) for th in (0.0, math.pi / 4, half_pi)
                for g in (0.0, 0.1, 0.4, 1.0) for t2 in (0.5, 0.7)]
    else:
        grid = [(2.0, half_pi, 0.1, 0.5), (2.0, math.pi / 4, 0.4, 0.7), (4.0, 0.0, 0.1, 0.5)]
    jobs = [(InterferometerConfig(math.sqrt(b2), th, g,
                                  BeamSplitter.from_transmission(math.sqrt(t2)),
                                  cutoff=0 if full else 14), 10)
            for b2, th, g, t2 in grid]
    for (b2, th, g, t2), res in zip(grid, _map(_cross_path_residual, jobs, workers)):
        report.add(f"cross-path/beta2={b2:g}/theta={th:.4g}/gamma3={g:g}/t2={t2:g}",
                   res, CROSS_PATH_TOL)
    for b, g in ((2.0, 0.1), (math.sqrt(6), 0.4)):
        ccfg = cf.ClosedFormConfig(alpha=b * complex(0.0, -1.0), beta=complex(b), gamma3=g)
        res = max(abs(cf.p3_symmetric(y, b, g) - cf.p3(y, ccfg)) for y in range(7))
        report.add(f"symmetric-vs-general/beta2={b * b:.3g}/gamma3={g:g}", res, 1e-10)

    # pair-wise cancellation
    samples = 10_000 if full else 1_000
    worst, failures = cancellation_audit(samples, (1, 3, 5, 7), math.sqrt(6), 0.1, 25, seed)
    report.add("cancellation/odd-y", worst, cf.PAIR_REL_TOL, f"{failures} failing pairs",
               strict=False)
    worst, failures = cancellation_audit(samples, (0, 2, 4, 6), math.sqrt(6), 0.1, 25, seed + 1)
    report.add("cancellation/even-y", worst, cf.PAIR_REL_TOL, f"{failures} failing pairs",
               strict=False)
    return report
