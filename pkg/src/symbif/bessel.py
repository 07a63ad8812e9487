"""Bessel functions of integer order, spherical Bessel functions, and the
radial Neumann condition on the disk and the 3-ball.

Everything is self-contained: ascending series for small argument, Miller-style
downward recurrence for large argument.  Roots of the Neumann condition are
bracketed on a coarse grid and refined by bisection.
"""

from __future__ import annotations

import math

SERIES_CUTOFF = 12.0
ROOT_GRID_STEP = 0.1
ROOT_TOL = 1e-12


def besselj(order: int, x: float) -> float:
    """Bessel function J_order(x) for integer order >= 0."""
    if order < 0:
        raise ValueError("order must be a nonnegative integer")
    x = float(x)
    if x < 0.0:
        val = besselj(order, -x)
        return -val if order % 2 else val
    if x == 0.0:
        return 1.0 if order == 0 else 0.0
    if x <= SERIES_CUTOFF:
        return _besselj_series(order, x)
    return _besselj_miller(order, x)


def _besselj_series(order, x):
    half = 0.5 * x
    term = half**order / math.factorial(order)
    total = term
    m = 0
    hh = half * half
    while True:
        m += 1
        term *= -hh / (m * (m + order))
        total += term
        if abs(term) < 1e-18 * (abs(total) + 1e-300):
            return total
        if m > 400:
            return total


def _besselj_miller(order, x):
    # downward recurrence, normalized with J0 + 2*sum J_{2k} = 1
    start = max(order, int(x)) + 20 + int(8.0 * math.sqrt(max(1.0, x)))
    if start % 2:
        start += 1
    jp1 = 0.0
    j = 1e-30
    norm = 0.0
    wanted = 0.0
    for n in range(start, 0, -1):
        jm1 = (2.0 * n / x) * j - jp1
        jp1 = j
        j = jm1
        if n - 1 == order:
            wanted = j
        if (n - 1) % 2 == 0:
            norm += 2.0 * j
        if abs(j) > 1e250:
            j *= 1e-250
            jp1 *= 1e-250
            norm *= 1e-250
            wanted *= 1e-250
    norm -= j  # the n=0 term was added twice
    return wanted / norm


def besseljp(order: int, x: float) -> float:
    """Derivative J_order'(x)."""
    if order == 0:
        return -besselj(1, x)
    return 0.5 * (besselj(order - 1, x) - besselj(order + 1, x))


def sphericalj(order: int, x: float) -> float:
    """Spherical Bessel function j_order(x), order >= 0."""
    if order < 0:
        raise ValueError("order must be a nonnegative integer")
    x = float(x)
    if x < 0.0:
        val = sphericalj(order, -x)
        return -val if order % 2 else val
    if x == 0.0:
        return 1.0 if order == 0 else 0.0
    if x <= SERIES_CUTOFF:
        return _sphericalj_series(order, x)
    return _sphericalj_miller(order, x)


def _dfact(n):
    # (2n+1)!! for the series prefactor
    out = 1.0
    for k in range(1, 2 * n + 2, 2):
        out *= k
    return out


def _sphericalj_series(order, x):
    term = x**order / _dfact(order)
    total = term
    m = 0
    hh = 0.5 * x * x
    while True:
        m += 1
        term *= -hh / (m * (2 * (m + order) + 1))
        total += term
        if abs(term) < 1e-18 * (abs(total) + 1e-300):
            return total
        if m > 400:
            return total


def _sphericalj_miller(order, x):
    start = max(order, int(x)) + 20 + int(8.0 * math.sqrt(max(1.0, x)))
    jp1 = 0.0
    j = 1e-30
    vals = {}
    for n in range(start, 0, -1):
        jm1 = ((2.0 * n + 1.0) / x) * j - jp1
        jp1 = j
        j = jm1
        if n - 1 in (order, 0, 1):
            vals[n - 1] = j
        if abs(j) > 1e250:
            j *= 1e-250
            jp1 *= 1e-250
            vals = {k: v * 1e-250 for k, v in vals.items()}
    j0 = math.sin(x) / x
    j1 = math.sin(x) / (x * x) - math.cos(x) / x
    # normalize against whichever reference value is better conditioned
    if abs(j0) >= abs(j1):
        scale = j0 / vals[0]
    else:
        scale = j1 / vals[1]
    return vals[order] * scale


def sphericaljp(order: int, x: float) -> float:
    """Derivative j_order'(x)."""
    if order == 0:
        return -sphericalj(1, x)
    return sphericalj(order - 1, x) - (order + 1.0) / x * sphericalj(order, x)


def neumann_condition(ambient_dim: int, angular_degree: int):
    """Radial Neumann boundary function g with g(x) = 0 at sqrt(eigenvalue).

    The eigenfunctions of the unit ball in dimension N are
    r^((2-N)/2) J_{l+(N-2)/2}(x r) times a spherical harmonic; the zero-normal-
    derivative condition at r = 1 reduces to J_l'(x) = 0 for N = 2 and
    j_l'(x) = 0 for N = 3.
    """
    if ambient_dim == 2:
        return lambda x: besseljp(angular_degree, x)
    if ambient_dim == 3:
        return lambda x: sphericaljp(angular_degree, x)
    raise ValueError("ball domains are supported for N in {2, 3}")


def neumann_roots(ambient_dim: int, angular_degree: int, x_max: float):
    """Positive roots x <= x_max of the radial Neumann condition, ascending."""
    if x_max <= 0.0:
        return []
    g = neumann_condition(ambient_dim, angular_degree)
    roots = []
    a = 0.5 * ROOT_GRID_STEP
    fa = g(a)
    x = a
    while x < x_max:
        b = min(x + ROOT_GRID_STEP, x_max)
        fb = g(b)
        # an exact grid zero is underflow (x^(l-1) tail), not a root bracket
        if fa != 0.0 and fb != 0.0 and fa * fb < 0.0:
            roots.append(_bisect(g, x, b, fa, fb))
        x, fa = b, fb
    return roots


def _bisect(g, a, b, fa, fb):
    while b - a > ROOT_TOL:
        mid = 0.5 * (a + b)
        fm = g(mid)
        if fm == 0.0:
            return mid
        if fa * fm < 0.0:
            b, fb = mid, fm
        else:
            a, fa = mid, fm
    return 0.5 * (a + b)
