import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from kerrfock.fock_core import norm_sq, poisson_tail
from kerrfock.state_prep import (
    CoherentParams,
    KerrConvention,
    KerrParams,
    apply_kerr,
    coherent_state,
    fock_state,
)


def test_zero_amplitude_is_vacuum():
    state = coherent_state(CoherentParams(0.0, 1.234), 10)
    assert state.mags[0] == 1.0
    assert np.all(state.mags[1:] == 0.0)


def test_coherent_matches_poisson():
    state = coherent_state(CoherentParams(2.0, 0.0), 30)
    expected = stats.poisson.pmf(np.arange(31), 4.0)
    np.testing.assert_allclose(state.pmf(), expected, rtol=0, atol=1e-13)
    assert state.pmf()[4] == pytest.approx(math.exp(-4) * 4 ** 4 / 24, rel=1e-13)


def test_coherent_phase_pi_alternates_sign():
    ref = coherent_state(CoherentParams(2.0, 0.0), 20).amps
    flipped = coherent_state(CoherentParams(2.0, math.pi), 20).amps
    signs = (-1.0) ** np.arange(21)
    np.testing.assert_allclose(flipped, signs * ref, atol=1e-14)


@given(st.floats(0.0, 3.0), st.floats(-10.0, 10.0))
@settings(max_examples=40, deadline=None)
def test_coherent_norm_within_tail(mag, phase):
    cutoff = 30
    state = coherent_state(CoherentParams(mag, phase), cutoff)
    n = norm_sq(state)
    assert n <= 1.0 + 1e-12
    assert n >= 1.0 - poisson_tail(mag * mag, cutoff) - 1e-13


def test_invalid_coherent_params():
    with pytest.raises(ValueError):
        CoherentParams(-1.0)
    with pytest.raises(ValueError):
        CoherentParams(1.0, float("nan"))
    with pytest.raises(ValueError):
        KerrParams(float("inf"))


def test_kerr_identity_cases():
    coh = coherent_state(CoherentParams(2.0, 0.4), 20)
    assert apply_kerr(coh, KerrParams(0.0)) is coh
    vac = fock_state(0, 5)
    out = apply_kerr(vac, KerrParams(0.37))
    np.testing.assert_array_equal(out.amps, vac.amps)


def test_kerr_phase_values():
    coh = coherent_state(CoherentParams(1.0), 6)
    g = 0.3
    out = apply_kerr(coh, KerrParams(g))
    n = np.arange(7)
    np.testing.assert_allclose(out.amps, coh.amps * np.exp(1j * g * n ** 2), atol=1e-15)
    out2 = apply_kerr(coh, KerrParams(g, KerrConvention.N_SQUARED_MINUS_N))
    np.testing.assert_allclose(out2.amps, coh.amps * np.exp(1j * g * (n ** 2 - n)), atol=1e-15)


@given(st.floats(0.0, 3.0), st.floats(-7.0, 7.0), st.floats(-50.0, 50.0),
       st.sampled_from(list(KerrConvention)))
@settings(max_examples=60, deadline=None)
def test_kerr_preserves_magnitudes_bitwise(mag, phase, gamma3, conv):
    coh = coherent_state(CoherentParams(mag, phase), 30)
    kerr = apply_kerr(coh, KerrParams(gamma3, conv))
    assert np.array_equal(kerr.mags, coh.mags)
    assert np.array_equal(kerr.pmf(), coh.pmf())


@given(st.floats(0.1, 2.5), st.floats(-3.0, 3.0))
@settings(max_examples=30, deadline=None)
def test_conventions_differ_by_linear_rotation(mag, gamma3):
    cutoff = 25
    coh = coherent_state(CoherentParams(mag), cutoff)
    sq = apply_kerr(coh, KerrParams(gamma3, KerrConvention.N_SQUARED))
    sq_minus = apply_kerr(coh, KerrParams(gamma3, KerrConvention.N_SQUARED_MINUS_N))
    n = np.arange(cutoff + 1)
    np.testing.assert_allclose(sq_minus.amps, sq.amps * np.exp(-1j * gamma3 * n), atol=1e-12)
    # same as rotating the coherent phase by -gamma3 before the n^2 evolution
    rotated = apply_kerr(coherent_state(CoherentParams(mag, -gamma3), cutoff), KerrParams(gamma3))
    np.testing.assert_allclose(sq_minus.amps, rotated.amps, atol=1e-12)


def test_large_gamma_phase_reduction():
    coh = coherent_state(CoherentParams(2.0), 30)
    out = apply_kerr(coh, KerrParams(1000.0))
    assert np.all((out.phases >= 0) & (out.phases < 2 * math.pi))
    n = np.arange(31)
    expected = np.mod(1000.0 * n ** 2, 2 * math.pi)
    np.testing.assert_allclose(np.exp(1j * out.phases), np.exp(1j * expected), atol=1e-9)


def test_fock_state():
    np.testing.assert_array_equal(fock_state(1, 4).amps, [0, 1, 0, 0, 0])
    assert fock_state(0, 0).mags.tolist() == [1.0]
    for k in range(7):
        assert norm_sq(fock_state(k, 6)) == 1.0
    with pytest.raises(ValueError):
        fock_state(5, 4)
    with pytest.raises(ValueError):
        fock_state(-1, 4)
