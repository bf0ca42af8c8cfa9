"""Lattice geometry, state invariants, and initial data."""

import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from sqgspec import (
    NonFiniteError,
    Params,
    SEED_MODE,
    SHEAR_MODE,
    SpectralState,
    full_field,
    half_lattice_contains,
    initial_data,
    kernel_weight,
    make_random_state,
    state_from_modes,
    wedge,
)
from sqgspec.lattice import geometry

nonzero_mode = st.tuples(st.integers(-40, 40), st.integers(-40, 40)).filter(
    lambda k: k != (0, 0)
)


def test_half_lattice_convention():
    assert half_lattice_contains((1, 0))
    assert half_lattice_contains((-5, 3))
    assert half_lattice_contains((0, 1))
    assert not half_lattice_contains((-1, 0))
    assert not half_lattice_contains((0, -1))
    assert not half_lattice_contains((3, -2))


def test_half_lattice_origin_rejected():
    with pytest.raises(ValueError):
        half_lattice_contains((0, 0))


@given(k=nonzero_mode)
def test_exactly_one_of_pair_stored(k):
    # for any nonzero k, exactly one of +-k is the stored representative
    assert half_lattice_contains(k) != half_lattice_contains((-k[0], -k[1]))


def test_wedge():
    assert wedge((1, 0), (0, 2)) == 2
    assert wedge((0, 2), (1, 0)) == -2
    assert wedge((3, 4), (6, 8)) == 0


def test_kernel_weight_frozen_value():
    # the triad that feeds the seed pair from shear x (0,2)
    v = kernel_weight((1, 0), (1, 2))
    assert v == pytest.approx(1.1055728090000843, abs=1e-15)
    # symmetric: both factors flip sign under swap
    assert kernel_weight((1, 2), (1, 0)) == pytest.approx(v, abs=1e-16)


def test_kernel_weight_zero_mode_rejected():
    with pytest.raises(ValueError):
        kernel_weight((0, 0), (1, 0))


@given(l=nonzero_mode, m=nonzero_mode)
def test_kernel_weight_bound(l, m):
    # |wedge| <= |l||m| and |1/|l| - 1/|m|| <= |l+m| / (|l| |m|) give 2|l+m|;
    # the factor-2 version is the one the tail estimates use
    w = kernel_weight(l, m)
    k = (l[0] + m[0], l[1] + m[1])
    assert abs(w) <= 2.0 * math.hypot(*k) + 1e-12


def test_initial_data_slots():
    tau = 0.05
    stt = initial_data(tau, 8)
    assert stt.get(SHEAR_MODE) == 1.0
    assert stt.get(SEED_MODE) == tau
    assert stt.get((SEED_MODE[0] + 1, SEED_MODE[1])) == tau
    # evenness: the mirrored slots read the same
    assert stt.get((-1, 0)) == 1.0
    assert stt.get((0, -2)) == tau
    assert stt.get((-1, -2)) == tau
    # exactly three stored entries
    assert np.count_nonzero(stt.coeff) == 3


def test_initial_data_validation():
    with pytest.raises(ValueError):
        initial_data(0.0, 8)
    with pytest.raises(ValueError):
        initial_data(-0.1, 8)


def test_state_rejects_odd_rows():
    c = np.zeros((9, 17))
    c[3, 4] = 1.0
    with pytest.raises(ValueError, match="odd"):
        SpectralState(c)


def test_state_rejects_row_zero_mirror_slots():
    c = np.zeros((9, 17))
    c[0, 3] = 1.0  # k = (-5, 0) is not a stored representative
    with pytest.raises(ValueError):
        SpectralState(c)


def test_state_rejects_nonfinite():
    c = np.zeros((9, 17))
    c[2, 4] = np.nan
    with pytest.raises(NonFiniteError):
        SpectralState(c)


def test_state_rejects_bad_shape():
    with pytest.raises(ValueError):
        SpectralState(np.zeros((9, 16)))


def test_state_coeff_read_only():
    stt = initial_data(0.1, 8)
    with pytest.raises(ValueError):
        stt.coeff[2, 8] = 5.0


def test_get_out_of_box_is_zero():
    stt = initial_data(0.1, 8)
    assert stt.get((9, 0)) == 0.0
    assert stt.get((0, 100)) == 0.0


def test_state_from_modes_accepts_either_representative():
    a = state_from_modes(6, {(2, 4): 0.3, (-1, 0): 0.7})
    assert a.get((2, 4)) == 0.3
    assert a.get((-2, -4)) == 0.3
    assert a.get((1, 0)) == 0.7
    with pytest.raises(ValueError):
        state_from_modes(4, {(5, 0): 1.0})


def test_full_field_matches_get():
    stt = make_random_state(8, seed=7, theta_e=0.9)
    F = full_field(stt.coeff)
    N = stt.N
    rng = np.random.default_rng(0)
    for _ in range(50):
        k1, k2 = rng.integers(-N, N + 1, size=2)
        if (k1, k2) == (0, 0):
            continue
        assert F[k2 + N, k1 + N] == stt.get((int(k1), int(k2)))
    assert F[N, N] == 0.0


def test_make_random_state_structure():
    stt = make_random_state(10, seed=3, margin=2, theta_e=0.5)
    c = stt.coeff
    assert np.all(c[1::2, :] == 0.0)
    assert np.all(c[9:, :] == 0.0)  # rows beyond N - margin
    assert np.all(c[:, :2] == 0.0) and np.all(c[:, -2:] == 0.0)
    assert stt.theta_e() == 0.5
    again = make_random_state(10, seed=3, margin=2, theta_e=0.5)
    assert np.array_equal(c, again.coeff)
    assert not np.array_equal(c, make_random_state(10, seed=4, margin=2).coeff)


def test_geometry_cached_and_read_only():
    g1 = geometry(8)
    g2 = geometry(8)
    assert g1[2] is g2[2]
    with pytest.raises(ValueError):
        g1[2][0, 0] = 1.0


def test_geometry_values():
    K1, K2, KN, inv, phi, stored = geometry(4)
    assert K1[0, 0] == -4 and K1[0, 8] == 4
    assert K2[3, 0] == 3
    assert KN[2, 4 + 1] == pytest.approx(math.sqrt(5))
    assert inv[0, 4] == 0.0  # origin sentinel
    assert phi[0, 4] == 0.5
    assert not stored[0, 4] and stored[0, 5] and stored[1, 0]


def test_params_validation():
    with pytest.raises(ValueError):
        Params(tau=0.0, N=64, dt=0.01, t_max=1.0)
    with pytest.raises(ValueError):
        Params(tau=0.05, N=4, dt=0.01, t_max=1.0)
    with pytest.raises(ValueError):
        Params(tau=0.05, N=64, dt=0.0, t_max=1.0)
    with pytest.raises(ValueError):
        Params(tau=0.05, N=64, dt=0.01, t_max=-1.0)
    with pytest.raises(ValueError):
        Params(tau=0.05, N=64, dt=0.01, t_max=1.0, sample_every=0)
    p = Params(tau=0.1, N=64, dt=0.01, t_max=1.0)
    assert p.tau_flagged
    assert not Params(tau=0.05, N=64, dt=0.01, t_max=1.0).tau_flagged
