"""Interference of Kerr-squeezed coherent states at a beam splitter.

Two independent routes to the output photon statistics: a truncated
Fock-space state/density-matrix computation and direct evaluation of the
closed-form combinatorial sums.
"""

__version__ = "0.1.0"

from .fock_core import (  # noqa: E402
    DensityMatrix,
    FactorialTable,
    FockVector,
    ResourceBoundError,
    TwoModeState,
    auto_cutoff,
    make_factorial_table,
    norm_sq,
)
from .state_prep import (  # noqa: E402
    CoherentParams,
    KerrConvention,
    KerrParams,
    apply_kerr,
    coherent_state,
    fock_state,
)
from .interferometer import (  # noqa: E402
    BeamSplitter,
    Distribution,
    InterferometerConfig,
    Port,
    beam_splitter_transform,
    mean_photon_number,
    odd_probability_mass,
    partial_trace,
    phase_distribution,
    photon_number_distribution,
)

__all__ = [
    "BeamSplitter", "CoherentParams", "DensityMatrix", "Distribution", "FactorialTable",
    "FockVector", "InterferometerConfig", "KerrConvention", "KerrParams", "Port",
    "ResourceBoundError", "TwoModeState", "apply_kerr", "auto_cutoff",
    "beam_splitter_transform", "coherent_state", "fock_state", "make_factorial_table",
    "mean_photon_number", "norm_sq", "odd_probability_mass", "partial_trace",
    "phase_distribution", "photon_number_distribution",
]
