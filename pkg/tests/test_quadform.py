"""Site forms, their eigenvalue landscape, the scanned constant, and the
certified lower bound."""

import numpy as np
import pytest

from sqgspec import (
    domination_constant,
    form_coefficients,
    make_random_state,
    min_eigenvalue,
    shear_rate,
    sigma_lower_bound_certificate,
    state_from_modes,
)
from sqgspec.quadform import scan_grids

C_STAR = 1.5180414142221392  # attained at (-2, 1); frozen from the 256-box scan


def test_form_coefficients_frozen_values():
    fc = form_coefficients((0, 2))
    # both neighbors at distance sqrt(5): a = b = c
    assert fc.a == fc.b == fc.c == pytest.approx(0.5527864045000421, abs=1e-16)
    fc = form_coefficients((1, 2))
    assert fc.a == pytest.approx(0.5, abs=1e-16)
    assert fc.b == pytest.approx(0.6464466094067263, abs=1e-16)
    assert fc.c == pytest.approx(0.42677669529663687, abs=1e-16)


def test_form_requires_positive_k2():
    with pytest.raises(ValueError):
        form_coefficients((3, 0))


def test_min_eigenvalue_against_linalg():
    rng = np.random.default_rng(1)
    for _ in range(30):
        k = (int(rng.integers(-20, 21)), int(rng.integers(1, 21)))
        fc = form_coefficients(k)
        want = float(np.linalg.eigvalsh(fc.matrix())[0])
        assert min_eigenvalue(fc) == pytest.approx(want, abs=1e-13)


def test_min_eigenvalue_frozen_values():
    assert min_eigenvalue(form_coefficients((1, 2))) == pytest.approx(
        0.14021060281114384, abs=1e-16
    )


def test_axis_forms_are_exact_squares():
    # k1 = 0: a = b = c, the form is a(x + y)^2, lambda_min identically zero
    for k2 in range(1, 513):
        assert min_eigenvalue(form_coefficients((0, k2))) == 0.0


def test_e_adjacent_sites_are_indefinite():
    # at (+-1, 1) one neighbor weight 1 - 1/|k -+ e| vanishes on the unit
    # circle; these two sites are excluded from the scan and touch only
    # odd-k2 coefficients, which vanish for every admissible state
    lam = min_eigenvalue(form_coefficients((1, 1)))
    assert lam == pytest.approx(-0.11448581291968857, abs=1e-16)
    assert min_eigenvalue(form_coefficients((-1, 1))) == pytest.approx(lam, abs=1e-16)


def test_reflection_symmetry():
    for k1, k2 in ((1, 1), (3, 2), (7, 5), (2, 9)):
        a = min_eigenvalue(form_coefficients((k1, k2)))
        b = min_eigenvalue(form_coefficients((-k1, k2)))
        assert a == pytest.approx(b, abs=1e-16)


def test_scan_grids_match_scalar_forms():
    box = 12
    k1g, k2g, a, b, c, lam = scan_grids(box)
    for k1, k2 in ((-12, 1), (5, 3), (1, 12), (-1, 1)):
        fc = form_coefficients((k1, k2))
        r, j = k2 - 1, k1 + box
        assert a[r, j] == pytest.approx(fc.a, abs=1e-15)
        assert b[r, j] == pytest.approx(fc.b, abs=1e-15)
        assert c[r, j] == pytest.approx(fc.c, abs=1e-15)
        assert lam[r, j] == pytest.approx(min_eigenvalue(fc), abs=1e-15)


def test_domination_constant_frozen():
    c_star, site = domination_constant(256)
    assert c_star == pytest.approx(C_STAR, abs=1e-13)
    assert site == (-2, 1)
    assert c_star > 0


def test_domination_constant_box_stable():
    # the minimum sits at small k, so growing the box cannot move it
    c128, _ = domination_constant(128)
    c256, _ = domination_constant(256)
    assert abs(c256 - c128) <= 0.05 * c128


def test_certificate_on_random_states():
    for seed in range(10):
        stt = make_random_state(12, seed=seed, margin=2, theta_e=0.5 + 0.05 * seed)
        rep = sigma_lower_bound_certificate(stt)
        assert rep.ok
        assert rep.Sigma == pytest.approx(shear_rate(stt), abs=0)
        assert rep.bound == pytest.approx(
            rep.kappa * rep.c_star * rep.theta_e * rep.low_mass, abs=1e-18
        )


def test_certificate_margin_on_seed_mode():
    # single even mode (0,2): guaranteed per-mode factor is about 1.48
    stt = state_from_modes(8, {(1, 0): 1.0, (0, 2): 0.3})
    rep = sigma_lower_bound_certificate(stt)
    assert rep.ok
    assert rep.Sigma >= 1.4 * rep.bound


def test_certificate_requires_positive_shear():
    stt = state_from_modes(8, {(1, 0): -1.0, (0, 2): 0.3})
    with pytest.raises(ValueError):
        sigma_lower_bound_certificate(stt)


def test_certificate_excludes_row_zero_mass():
    # axis modes carry no certified mass: adding one must not change the bound
    a = state_from_modes(8, {(1, 0): 1.0, (0, 2): 0.3})
    b = state_from_modes(8, {(1, 0): 1.0, (0, 2): 0.3, (5, 0): 2.0})
    ra = sigma_lower_bound_certificate(a)
    rb = sigma_lower_bound_certificate(b)
    assert ra.low_mass == rb.low_mass


def test_positivity_on_scan_domain():
    # every site with 1 <= |k1|, k2 <= 128 except (+-1, 1) has lambda_min > 0
    box = 128
    _, _, _, _, _, lam = scan_grids(box)
    mask = np.ones(lam.shape, dtype=bool)
    mask[:, box] = False
    mask[0, box - 1] = mask[0, box + 1] = False
    assert np.min(lam[mask]) > 0.0
    assert lam[0, box + 1] < 0.0  # and the excluded ones really are indefinite
