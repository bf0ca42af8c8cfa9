"""Shared test helpers: a literal dict-based triad sum used as an
independent reference for the package evaluators, and small state builders."""

import math

import numpy as np

from sqgspec import SpectralState


def full_dict(state):
    """All nonzero coefficients over the full box as a {mode: value} map."""
    N = state.N
    out = {}
    for k2 in range(-N, N + 1):
        for k1 in range(-N, N + 1):
            if (k1, k2) == (0, 0):
                continue
            v = state.get((k1, k2))
            if v != 0.0:
                out[(k1, k2)] = v
    return out


def brute_rhs(state):
    """Literal triad sum: for every stored k, sum over l + m = k.

    Deliberately naive (dict loops, scalar math) so it shares no code with
    the array evaluators under test.
    """
    N = state.N
    coeffs = full_dict(state)
    out = {}
    for k2 in range(0, N + 1):
        for k1 in range(-N, N + 1):
            if k2 == 0 and k1 <= 0:
                continue
            acc = 0.0
            for (l1, l2), tl in coeffs.items():
                m1, m2 = k1 - l1, k2 - l2
                tm = coeffs.get((m1, m2))
                if tm is None:
                    continue
                w = (l1 * m2 - l2 * m1) * (1.0 / math.hypot(l1, l2) - 1.0 / math.hypot(m1, m2))
                acc += w * tl * tm
            out[(k1, k2)] = 0.5 * acc
    return out


def as_array(brute, N):
    """Pack a brute_rhs result into the stored-layout array."""
    a = np.zeros((N + 1, 2 * N + 1))
    for (k1, k2), v in brute.items():
        a[k2, k1 + N] = v
    return a
