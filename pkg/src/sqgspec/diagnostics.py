"""Conserved quantities, the growth functional, and run diagnostics.

The dynamics conserve the quadratic sums  sum theta_k^2  and
sum theta_k^2 / |k|  (full lattice), hence also their difference.  Growth is
tracked through the functional

    J = sum_{stored k} Phi(k) theta_k theta_{k+e},   Phi(k) = k1 + 1/2,

whose time derivative splits into a shear part Sigma (triads through the
+-(1,0) pair) and a remainder sigma (all other triads).  The split here is
exact by construction: both pieces are the J-gradient contracted against the
corresponding piece of the tendency, so sigma + Sigma reproduces dJ/dt to
roundoff on every state, boundary-supported or not.  The quadratic-form
rewriting of Sigma is provided separately and agrees with the split form
whenever the support keeps two rings of margin from the truncation boundary.

All weighted sums (W_phi, W_k2, low_mass, h_half) run over the stored half
lattice minus the shear slot.  The interpolation checks deliberately use that
same index set for every factor, so the single-mode equality cases are exact
rather than off by a lattice constant.
"""

import logging
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .lattice import SpectralState, geometry
from .tendency import rhs_fast

log = logging.getLogger(__name__)


class MarginError(ValueError):
    """Support touches the outer rings where the rewritten forms lose terms."""


def l2_sum(state):
    """Full-lattice sum of theta_k^2 (conserved)."""
    return 2.0 * float(np.sum(state.coeff**2))


def hm12_sum(state):
    """Full-lattice sum of theta_k^2 / |k| (conserved)."""
    _, _, _, inv, _, _ = geometry(state.N)
    return 2.0 * float(np.sum(state.coeff**2 * inv))


def combined_invariant(state):
    return l2_sum(state) - hm12_sum(state)


def tail_mass(state):
    """Full-lattice theta^2 mass outside the shear pair."""
    return l2_sum(state) - 2.0 * state.theta_e() ** 2


@lru_cache(maxsize=32)
def _tail_mask(N):
    _, _, _, _, _, stored = geometry(N)
    m = stored.copy()
    m[0, N + 1] = False  # drop the shear slot
    m.setflags(write=False)
    return m


def j_functional(state):
    """J = sum Phi(k) theta_k theta_{k+e} over the stored half lattice."""
    c = state.coeff
    _, _, _, _, phi, _ = geometry(state.N)
    # non-stored slots are exact zeros, so the straight shifted product works
    return float(np.sum(phi[:, :-1] * c[:, :-1] * c[:, 1:]))


def shear_field(state):
    """Per-mode tendency contribution of triads through the shear pair.

    shear_k = k2 theta_e [ (1 - 1/|k-e|) theta_{k-e} - (1 - 1/|k+e|) theta_{k+e} ].
    Row zero vanishes (k2 = 0), so the shear pair itself feels no shear term.
    """
    c = state.coeff
    N = state.N
    _, K2, _, inv, _, _ = geometry(N)
    tm = np.zeros_like(c)
    tm[:, 1:] = (1.0 - inv[:, :-1]) * c[:, :-1]
    tp = np.zeros_like(c)
    tp[:, :-1] = (1.0 - inv[:, 1:]) * c[:, 1:]
    return K2 * state.theta_e() * (tm - tp)


def _j_rate(coeff, tend, phi):
    """Contraction sum Phi(k) (f_k theta_{k+e} + theta_k f_{k+e})."""
    lhs = tend[:, :-1] * coeff[:, 1:]
    rhs = coeff[:, :-1] * tend[:, 1:]
    return float(np.sum(phi[:, :-1] * (lhs + rhs)))


def shear_rate(state):
    """The Sigma piece of dJ/dt alone; needs no tendency evaluation."""
    _, _, _, _, phi, _ = geometry(state.N)
    return _j_rate(state.coeff, shear_field(state), phi)


def _margin_ok(state, rings=2):
    c = state.coeff
    N = state.N
    return not (
        np.any(c[N - rings + 1 :, :] != 0.0)
        or np.any(c[:, :rings] != 0.0)
        or np.any(c[:, 2 * N + 1 - rings :] != 0.0)
    )


def sigma_and_Sigma(state, evaluator=None, strict=False):
    """Split dJ/dt into (sigma, Sigma): non-shear and shear contributions.

    Sigma contracts the shear field against the J-gradient; sigma does the
    same with the tendency of the state with its shear pair removed.  The two
    always add up to the exact truncated dJ/dt.  With strict=True, raise
    MarginError when support touches the outer two rings — there the
    quadratic-form reading of Sigma would drop boundary terms.
    """
    if strict and not _margin_ok(state):
        raise MarginError("support within two rings of the truncation boundary")
    ev = evaluator if evaluator is not None else rhs_fast
    N = state.N
    _, _, _, _, phi, _ = geometry(N)
    ns = state.coeff.copy()
    ns[0, N + 1] = 0.0
    tns = ev(SpectralState(ns, state.time))
    return _j_rate(state.coeff, tns, phi), shear_rate(state)


def Sigma_rewritten(state, strict=False):
    """Sigma as a sum of 2x2 quadratic forms, one per site with k2 >= 1.

    Sigma = theta_e * sum_k (k2/2) [ a x^2 + b y^2 + 2 c x y ] with
    x = theta_{k-e}, y = theta_{k+e}, a = 1 - 1/|k-e|, b = 1 - 1/|k+e| and
    c = (k1 + 1/2) a - (k1 - 1/2) b.  The site sum runs one column past the
    box on both sides so every stored pair is seen.  Matches
    sigma_and_Sigma's Sigma when the support keeps two rings of margin from
    the boundary.
    """
    if strict and not _margin_ok(state):
        raise MarginError("support within two rings of the truncation boundary")
    c = state.coeff
    N = state.N
    W = 2 * N + 3  # site columns k1 = -N-1 .. N+1
    k1 = np.arange(-N - 1, N + 2, dtype=float)[None, :]
    k2 = np.arange(1, N + 1, dtype=float)[:, None]
    a = 1.0 - 1.0 / np.hypot(k1 - 1.0, k2)
    b = 1.0 - 1.0 / np.hypot(k1 + 1.0, k2)
    cc = (k1 + 0.5) * a - (k1 - 0.5) * b
    x = np.zeros((N, W))
    x[:, 2:] = c[1:, :]
    y = np.zeros((N, W))
    y[:, : W - 2] = c[1:, :]
    forms = a * x**2 + b * y**2 + 2.0 * cc * x * y
    return state.theta_e() * float(np.sum(0.5 * k2 * forms))


def w_phi_sum(state):
    """sum |k| |Phi(k)| |theta_k| over stored modes minus the shear slot."""
    _, _, KN, _, phi, _ = geometry(state.N)
    m = _tail_mask(state.N)
    return float(np.sum((KN * np.abs(phi) * np.abs(state.coeff))[m]))


def w_k2_sum(state):
    """sum |k|^2 |theta_k| over stored modes minus the shear slot."""
    _, _, KN, _, _, _ = geometry(state.N)
    m = _tail_mask(state.N)
    return float(np.sum((KN**2 * np.abs(state.coeff))[m]))


def low_mass_sum(state):
    """sum |k|^-3 theta_k^2 over stored modes minus the shear slot."""
    _, _, _, inv, _, _ = geometry(state.N)
    m = _tail_mask(state.N)
    return float(np.sum((inv**3 * state.coeff**2)[m]))


def h_half_sum(state):
    """sum |k| theta_k^2 over stored modes minus the shear slot."""
    _, _, KN, _, _, _ = geometry(state.N)
    m = _tail_mask(state.N)
    return float(np.sum((KN * state.coeff**2)[m]))


def sobolev_sum(state, s):
    """Full-lattice sum of |k|^(2s) theta_k^2."""
    _, _, KN, _, _, _ = geometry(state.N)
    m = _tail_mask(state.N)
    c = state.coeff
    return 2.0 * float(np.sum((KN ** (2.0 * s) * c**2)[m]) + state.theta_e() ** 2)


@dataclass(frozen=True)
class InterpolationReport:
    """Both interpolation inequalities with their two sides exposed."""

    w_k2: float
    w_k2_bound: float
    h_half: float
    h_half_bound: float

    @property
    def ok_w_k2(self):
        return self.w_k2 <= self.w_k2_bound * (1.0 + 1e-13)

    @property
    def ok_h_half(self):
        return self.h_half <= self.h_half_bound * (1.0 + 1e-13)


def interpolation_checks(state):
    """Verify both interpolation bounds on the common truncated index set.

    Over stored modes minus the shear slot:
      sum |k|^2 |theta|  <=  (sum theta^2)^(1/3) (sum |k|^21 theta^2)^(1/6) (sum |k|^-3)^(1/2)
      sum |k| theta^2    <=  (sum |k|^-3 theta^2)^(5/6) (sum |k|^21 theta^2)^(1/6)

    Every factor uses the same index set.  A single-mode state saturates the
    second bound exactly; in the first, the |k|^-3 factor is an unweighted
    lattice sum, so a single mode at k0 attains exactly the ratio
    (|k0|^-3 / sum |k|^-3)^(1/2) of its bound.
    """
    _, _, KN, inv, _, _ = geometry(state.N)
    m = _tail_mask(state.N)
    th = state.coeff[m]
    kn = KN[m]
    iv = inv[m]
    th2 = th**2
    high = float(np.sum(kn**21 * th2))
    lhs1 = float(np.sum(kn**2 * np.abs(th)))
    rhs1 = float(np.sum(th2)) ** (1.0 / 3.0) * high ** (1.0 / 6.0) * float(np.sum(iv**3)) ** 0.5
    lhs2 = float(np.sum(kn * th2))
    rhs2 = float(np.sum(iv**3 * th2)) ** (5.0 / 6.0) * high ** (1.0 / 6.0)
    return InterpolationReport(lhs1, rhs1, lhs2, rhs2)


def sigma_bound_check(state, sigma=None, evaluator=None, constant=2.0):
    """Check |sigma| <= 2 * tail_mass * W_phi; logs the attained ratio."""
    if sigma is None:
        sigma, _ = sigma_and_Sigma(state, evaluator=evaluator)
    bound = constant * tail_mass(state) * w_phi_sum(state)
    ratio = abs(sigma) / bound if bound > 0 else (0.0 if sigma == 0 else math.inf)
    log.debug("sigma bound ratio %.3e at t=%.6g", ratio, state.time)
    return abs(sigma) <= bound


@dataclass(frozen=True)
class CaseThresholds:
    """Cutoffs for the growth trichotomy at amplitude tau."""

    w_phi_min: float
    low_mass_min: float

    @classmethod
    def from_tau(cls, tau):
        return cls(w_phi_min=tau**0.5, low_mass_min=tau**2.5)


def classify_case(state, thresholds):
    """'A' when W_phi clears its cutoff, else 'B' on low_mass, else 'NONE'."""
    if w_phi_sum(state) >= thresholds.w_phi_min:
        return "A"
    if low_mass_sum(state) >= thresholds.low_mass_min:
        return "B"
    return "NONE"


@dataclass(frozen=True)
class DiagnosticsRecord:
    """One sampled row of a run; field order matches the CSV schema."""

    t: float
    l2: float
    hm12: float
    combined: float
    tail: float
    theta_e: float
    J: float
    sigma: float
    Sigma: float
    W_phi: float
    W_k2: float
    low_mass: float
    h_half: float
    sob_half: float
    sob_s: float
    case: str


def make_record(state, thresholds, s=11.0, evaluator=None):
    """Evaluate the full diagnostic set on one state."""
    sigma, Sigma = sigma_and_Sigma(state, evaluator=evaluator)
    l2 = l2_sum(state)
    hm12 = hm12_sum(state)
    return DiagnosticsRecord(
        t=state.time,
        l2=l2,
        hm12=hm12,
        combined=l2 - hm12,
        tail=tail_mass(state),
        theta_e=state.theta_e(),
        J=j_functional(state),
        sigma=sigma,
        Sigma=Sigma,
        W_phi=w_phi_sum(state),
        W_k2=w_k2_sum(state),
        low_mass=low_mass_sum(state),
        h_half=h_half_sum(state),
        sob_half=sobolev_sum(state, 10.5),
        sob_s=sobolev_sum(state, s),
        case=classify_case(state, thresholds),
    )
