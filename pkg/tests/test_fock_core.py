import math

import mpmath
import numpy as np
import pytest

from kerrfock.fock_core import (
    DensityMatrix,
    FockVector,
    ResourceBoundError,
    TwoModeState,
    auto_cutoff,
    check_cutoff,
    make_factorial_table,
    norm_sq,
    poisson_tail,
)
from kerrfock.state_prep import CoherentParams, coherent_state


def test_factorial_table_empty_product():
    table = make_factorial_table(0)
    assert table.log_fact.tolist() == [0.0]


def test_factorial_table_five():
    assert math.exp(make_factorial_table(5)[5]) == pytest.approx(120.0, rel=1e-13)


def test_factorial_table_matches_exact_integers():
    table = make_factorial_table(30)
    for n in range(31):
        exact = mpmath.log(mpmath.mpf(math.factorial(n)))
        assert table[n] == pytest.approx(float(exact), rel=1e-13, abs=1e-15)
    for n in range(21):
        assert math.exp(table[n]) == pytest.approx(math.factorial(n), rel=1e-13)


def test_factorial_table_170_against_arbitrary_precision():
    table = make_factorial_table(170)
    with mpmath.workdps(40):
        exact = mpmath.factorial(170)
    value = math.exp(table[170])
    assert math.isfinite(value)
    assert value == pytest.approx(float(exact), rel=1e-10)


def test_factorial_table_monotone():
    lf = make_factorial_table(200).log_fact
    assert lf[0] == 0.0 and lf[1] == 0.0
    assert np.all(np.diff(lf[1:]) > 0)


def test_factorial_table_bounds():
    with pytest.raises(ValueError):
        make_factorial_table(-1)
    with pytest.raises(ResourceBoundError):
        make_factorial_table(5000)
    make_factorial_table(4096)


def test_norm_sq_vacuum_and_zero():
    vac = FockVector([1.0, 0.0, 0.0], [0.0, 0.0, 0.0])
    assert norm_sq(vac) == 1.0
    assert norm_sq(FockVector(np.zeros(4), np.zeros(4))) == 0.0
    assert norm_sq(TwoModeState(np.zeros((3, 3)))) == 0.0


def test_norm_sq_coherent_tail():
    state = coherent_state(CoherentParams(2.0), 30)
    with mpmath.workdps(40):
        tail = mpmath.e ** -4 * mpmath.nsum(lambda n: mpmath.mpf(4) ** n / mpmath.factorial(n),
                                             [31, mpmath.inf])
    assert float(tail) < 1e-12
    assert norm_sq(state) == pytest.approx(1.0 - float(tail), abs=1e-14)


def test_norm_sq_rejects_other_types():
    with pytest.raises(TypeError):
        norm_sq(np.ones(3))


def test_poisson_tail_and_auto_cutoff():
    assert poisson_tail(0.0, 0) == 0.0
    assert auto_cutoff(0.0) == 0
    c = auto_cutoff(4.0)
    assert poisson_tail(4.0, c) < 1e-12 <= poisson_tail(4.0, c - 1)
    assert 20 <= c <= 30
    with pytest.raises(ResourceBoundError):
        auto_cutoff(200.0)


def test_check_cutoff():
    assert check_cutoff(10) == 10
    with pytest.raises(ValueError):
        check_cutoff(-1)
    with pytest.raises(ResourceBoundError):
        check_cutoff(81)


def test_fock_vector_validation():
    with pytest.raises(ValueError):
        FockVector([1.0, 1.0], [0.0, 0.0])
    with pytest.raises(ValueError):
        FockVector([-0.5], [0.0])
    with pytest.raises(ValueError):
        FockVector([np.nan], [0.0])
    v = FockVector.from_amplitudes([0.6, 0.8j])
    assert v.cutoff == 1
    np.testing.assert_allclose(v.amps, [0.6, 0.8j], atol=1e-16)
    with pytest.raises(ValueError):
        v.mags[0] = 0.0  # immutable


def test_density_matrix_invariants():
    with pytest.raises(ValueError):
        DensityMatrix(np.array([[0.5, 0.1], [0.2, 0.5]]))
    with pytest.raises(ValueError):
        DensityMatrix(np.diag([1.1, -0.1]))
    with pytest.raises(ValueError):
        DensityMatrix(np.diag([0.5, 0.2]))
    rho = DensityMatrix(np.diag([0.5, 0.2]), tail=0.3)
    assert rho.cutoff == 1


def test_density_matrix_from_pure_has_exact_diagonal():
    state = coherent_state(CoherentParams(1.3, 0.7), 12)
    rho = DensityMatrix.from_pure(state)
    assert np.array_equal(rho.elems.diagonal().real, state.mags ** 2)
    assert np.all(rho.elems.diagonal().imag == 0.0)
