import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from contact_bar.acceptance import _quadrature_matrices
from contact_bar.assembly import (
    InvalidModeError,
    Mesh1D,
    Mode,
    assemble_load,
    assemble_mass,
    assemble_stiffness,
    assemble_system,
    build_weights,
    custom_weights,
    reduce_system,
)


@pytest.mark.parametrize("m", [3, 4, 6])
@pytest.mark.parametrize("mode", [Mode.MOD1, Mode.MOD2, Mode.MOD3])
def test_matrices_match_quadrature(m, mode):
    mesh = Mesh1D(m)
    wp = build_weights(mode, m)
    Mq, Sq = _quadrature_matrices(m, wp.w, panels=2000)
    np.testing.assert_allclose(assemble_mass(mesh, wp).todense(), Mq, atol=1e-8)
    np.testing.assert_allclose(assemble_stiffness(mesh).todense(), Sq, atol=1e-8)


def test_weight_profiles():
    np.testing.assert_array_equal(build_weights(Mode.MOD1, 4).w, [1, 1, 1, 1])
    np.testing.assert_allclose(build_weights(Mode.MOD2, 4).w, [0, 4 / 3, 4 / 3, 4 / 3])
    np.testing.assert_array_equal(build_weights(Mode.MOD3, 4).w, [0, 2, 1, 1])
    assert build_weights("3", 4).redistributed and not build_weights(1, 4).redistributed


@pytest.mark.parametrize("m", range(3, 49))
@pytest.mark.parametrize("mode", [Mode.MOD2, Mode.MOD3])
def test_total_mass_conserved(m, mode):
    w = build_weights(mode, m).w
    # exact in rationals; the float sum may be one ulp off for some m
    exact = [Fraction(0)] + [Fraction(m, m - 1)] * (m - 1) if mode is Mode.MOD2 else [0, 2] + [1] * (m - 2)
    assert sum(Fraction(v) for v in exact) / m == 1
    assert Mesh1D(m).h * math.fsum(w) == pytest.approx(1.0, abs=4 * np.finfo(float).eps)
    np.testing.assert_allclose(w, [float(v) for v in exact], rtol=0, atol=0)


def test_mass_matrix_row_sums_give_total_mass():
    m = 6
    mesh = Mesh1D(m)
    for mode in (Mode.MOD1, Mode.MOD2, Mode.MOD3):
        M = assemble_mass(mesh, build_weights(mode, m)).todense()
        # add the row/column of the Dirichlet node so constants integrate fully
        w = build_weights(mode, m).w
        assert M.sum() + 2 * mesh.h / 6 * w[-1] + mesh.h / 3 * w[-1] == pytest.approx(1.0)


def test_invalid_modes():
    with pytest.raises(ValueError, match="unknown mod"):
        Mode.parse("mod7")
    with pytest.raises(ValueError):
        build_weights(Mode.MOD2, 2)
    with pytest.raises(ValueError):
        custom_weights([1.0, -1.0, 1.0])


def test_reduction_requires_massless_node():
    mesh = Mesh1D(4)
    wp = build_weights(Mode.MOD1, 4)
    with pytest.raises(InvalidModeError):
        reduce_system(assemble_mass(mesh, wp), assemble_stiffness(mesh), np.zeros(4), mesh.h)
    assert not assemble_system(mesh, wp).reduced


def test_reduced_operators_are_scaled():
    sys = assemble_system(Mesh1D(6), build_weights(Mode.MOD3, 6))
    h = sys.h
    np.testing.assert_allclose(sys.Mstar.todense(), sys.M.todense()[1:, 1:] / h)
    np.testing.assert_allclose(sys.Sstar.todense(), sys.S.todense()[1:, 1:] * h)
    # Sstar is the integer Laplacian
    np.testing.assert_allclose(sys.Sstar.diag, 2.0)
    np.testing.assert_allclose(sys.Sstar.off, -1.0)


def test_constant_load_mod3():
    m = 6
    mesh = Mesh1D(m)
    F = assemble_load(mesh, build_weights(Mode.MOD3, m), lambda x, t: 1.0 + 0 * x)
    h = mesh.h
    # node 0 sees only the massless element; node 1 sees h/2 * (0 + 2)
    np.testing.assert_allclose(F, [0.0, h, 1.5 * h, h, h, h])


@settings(max_examples=50, deadline=None)
@given(st.integers(3, 20), st.floats(-2, 2), st.floats(-2, 2))
def test_load_exact_for_linear_f(m, a, b):
    """Two-point Gauss integrates (a + b x) phi_i w exactly."""
    mesh = Mesh1D(m)
    wp = build_weights(Mode.MOD3, m)
    F = assemble_load(mesh, wp, lambda x, t: a + b * x)
    h = mesh.h
    expected = np.zeros(m)
    for j in range(m):
        x0 = j * h
        # int over element of (a + b x) * phi_left and phi_right
        left = h * (a / 2 + b * (x0 / 2 + h / 6))
        right = h * (a / 2 + b * (x0 / 2 + h / 3))
        expected[j] += wp.w[j] * left
        if j + 1 < m:
            expected[j + 1] += wp.w[j] * right
    np.testing.assert_allclose(F, expected, atol=1e-12)
