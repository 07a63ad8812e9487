"""Laplacian spectra and eigenfunction bases on round domains.

Supported domains: the sphere S^{N-1} for any N >= 2 (closed-form spectrum,
basis evaluation for N in {2, 3}) and the Neumann problem on the unit ball
B^N for N in {2, 3} (Bessel-root spectrum, basis evaluation on the disk).
Distinct eigenvalues are indexed from 1 with beta_1 = 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import bessel

__all__ = [
    "DomainId",
    "LaplaceEigenvalue",
    "BasisFunction",
    "Quadrature",
    "sphere",
    "ball",
    "harmonic_dimension",
    "sphere_spectrum",
    "ball_neumann_spectrum",
    "ball_neumann_spectrum_count",
    "basis",
    "circle_quadrature",
    "sphere2_quadrature",
    "disk_quadrature",
    "default_quadrature",
    "spectrum_to_json",
]


@dataclass(frozen=True)
class DomainId:
    """A round domain: kind is "sphere" (S^{N-1}) or "ball" (B^N)."""

    kind: str
    dim: int

    def __post_init__(self):
        if self.kind not in ("sphere", "ball"):
            raise ValueError(f"unknown domain kind {self.kind!r}")
        if self.dim < 2:
            raise ValueError("ambient dimension must be at least 2")
        if self.kind == "ball" and self.dim not in (2, 3):
            raise ValueError("ball domains are supported for N in {2, 3}")

    @property
    def measure(self) -> float:
        if self.kind == "sphere":
            if self.dim == 2:
                return 2.0 * math.pi
            if self.dim == 3:
                return 4.0 * math.pi
            # surface of the unit (N-1)-sphere
            return 2.0 * math.pi ** (self.dim / 2.0) / math.gamma(self.dim / 2.0)
        if self.dim == 2:
            return math.pi
        return 4.0 * math.pi / 3.0

    @property
    def label(self) -> str:
        return f"{self.kind}{self.dim}"


def sphere(dim: int) -> DomainId:
    return DomainId("sphere", dim)


def ball(dim: int) -> DomainId:
    return DomainId("ball", dim)


@dataclass(frozen=True)
class LaplaceEigenvalue:
    """One distinct eigenvalue of -Laplace with its multiplicity.

    index is the 1-based rank among distinct eigenvalues, angular_degree the
    spherical-harmonic degree l (for the sphere l = index - 1), radial_index
    the 1-based rank of the radial mode at fixed l (ball only).
    """

    index: int
    value: float
    multiplicity: int
    angular_degree: int
    radial_index: Optional[int] = None
    is_radial: Optional[bool] = None


@dataclass(frozen=True)
class BasisFunction:
    """An L2-orthonormal eigenfunction; evaluator takes coordinate arrays."""

    domain: DomainId
    eigenvalue_index: int
    component_index: int
    beta: float
    evaluator: Callable


def harmonic_dimension(ambient_dim: int, degree: int) -> int:
    """Dimension of degree-l spherical harmonics on S^{N-1}."""
    if ambient_dim < 2:
        raise ValueError("ambient dimension must be at least 2")
    if degree < 0:
        raise ValueError("degree must be nonnegative")
    n, l = ambient_dim, degree
    if l == 0:
        return 1
    low = math.comb(n + l - 3, l - 2) if l >= 2 else 0
    return math.comb(n + l - 1, l) - low


def sphere_spectrum(ambient_dim: int, count: int) -> list[LaplaceEigenvalue]:
    """First `count` distinct eigenvalues of -Laplace on S^{N-1}, ascending."""
    if ambient_dim < 2:
        raise ValueError("ambient dimension must be at least 2")
    if count < 1:
        raise ValueError("count must be positive")
    out = []
    for k in range(1, count + 1):
        l = k - 1
        beta = float(l * (l + ambient_dim - 2))
        out.append(
            LaplaceEigenvalue(
                index=k,
                value=beta,
                multiplicity=harmonic_dimension(ambient_dim, l),
                angular_degree=l,
            )
        )
    return out


def ball_neumann_spectrum(ambient_dim: int, beta_cutoff: float) -> list[LaplaceEigenvalue]:
    """All distinct Neumann eigenvalues beta <= cutoff of -Laplace on B^N.

    Eigenvalues are squares of the positive roots of the radial Neumann
    condition, tagged with (l, radial_index, multiplicity); beta = 0 is the
    constant mode (l = 0, radial_index = 1).  Numerically coincident values
    across different l are kept as distinct catalog entries.
    """
    if ambient_dim not in (2, 3):
        raise ValueError("ball domains are supported for N in {2, 3}")
    if beta_cutoff <= 0.0:
        raise ValueError("beta_cutoff must be positive")
    x_max = math.sqrt(beta_cutoff)
    entries = [(0.0, 0, 1)]  # (beta, l, radial_index)
    l = 0
    while True:
        roots = bessel.neumann_roots(ambient_dim, l, x_max)
        if not roots and l > 0:
            break
        base = 2 if l == 0 else 1  # the constant mode occupies radial_index 1
        for i, r in enumerate(roots):
            entries.append((r * r, l, base + i))
        l += 1
    entries.sort(key=lambda t: (t[0], t[1]))
    out = []
    for k, (beta, deg, ridx) in enumerate(entries, start=1):
        out.append(
            LaplaceEigenvalue(
                index=k,
                value=beta,
                multiplicity=harmonic_dimension(ambient_dim, deg),
                angular_degree=deg,
                radial_index=ridx,
                is_radial=(deg == 0),
            )
        )
    return out


def ball_neumann_spectrum_count(ambient_dim: int, count: int) -> list[LaplaceEigenvalue]:
    """First `count` distinct Neumann eigenvalues on B^N."""
    if count < 1:
        raise ValueError("count must be positive")
    cutoff = 10.0
    while True:
        entries = ball_neumann_spectrum(ambient_dim, cutoff)
        if len(entries) >= count:
            return entries[:count]
        cutoff *= 2.0


# --------------------------------------------------------------------------
# eigenfunction bases


def basis(domain: DomainId, index: int) -> list[BasisFunction]:
    """L2-orthonormal evaluators spanning the eigenspace of beta_index."""
    if index < 1:
        raise ValueError("eigenvalue index must be positive")
    if domain.kind == "sphere" and domain.dim == 2:
        return _circle_basis(domain, index)
    if domain.kind == "sphere" and domain.dim == 3:
        return _sphere2_basis(domain, index)
    if domain.kind == "ball" and domain.dim == 2:
        return _disk_basis(domain, index)
    raise ValueError(f"basis evaluation is not supported on {domain.label}")


def _circle_basis(domain, index):
    freq = index - 1
    beta = float(freq * freq)
    if freq == 0:
        c = 1.0 / math.sqrt(2.0 * math.pi)
        ev = lambda theta: np.full_like(np.asarray(theta, float), c)
        return [BasisFunction(domain, index, 1, beta, ev)]
    c = 1.0 / math.sqrt(math.pi)

    def make(trig):
        return lambda theta: c * trig(freq * np.asarray(theta, float))

    return [
        BasisFunction(domain, index, 1, beta, make(np.cos)),
        BasisFunction(domain, index, 2, beta, make(np.sin)),
    ]


def _assoc_legendre(l, m, x):
    """Associated Legendre P_l^m on arrays, Condon-Shortley phase included."""
    x = np.asarray(x, float)
    somx2 = np.sqrt(np.maximum(0.0, (1.0 - x) * (1.0 + x)))
    pmm = np.ones_like(x)
    fact = 1.0
    for _ in range(m):
        pmm = pmm * (-fact) * somx2
        fact += 2.0
    if l == m:
        return pmm
    pmmp1 = x * (2.0 * m + 1.0) * pmm
    if l == m + 1:
        return pmmp1
    for ll in range(m + 2, l + 1):
        pll = (x * (2.0 * ll - 1.0) * pmmp1 - (ll + m - 1.0) * pmm) / (ll - m)
        pmm = pmmp1
        pmmp1 = pll
    return pmmp1


def _sphere2_basis(domain, index):
    l = index - 1
    beta = float(l * (l + 1))
    funcs = []
    j = 1

    def norm_const(m):
        return math.sqrt(
            (2 * l + 1) / (4.0 * math.pi) * math.factorial(l - m) / math.factorial(l + m)
        )

    n0 = norm_const(0)

    def make_zonal():
        return lambda theta, phi: n0 * _assoc_legendre(l, 0, np.cos(np.asarray(theta, float)))

    funcs.append(BasisFunction(domain, index, j, beta, make_zonal()))
    j += 1
    for m in range(1, l + 1):
        nm = math.sqrt(2.0) * norm_const(m)

        def make(trig, m=m, nm=nm):
            def ev(theta, phi):
                theta = np.asarray(theta, float)
                phi = np.asarray(phi, float)
                return nm * _assoc_legendre(l, m, np.cos(theta)) * trig(m * phi)

            return ev

        funcs.append(BasisFunction(domain, index, j, beta, make(np.cos)))
        funcs.append(BasisFunction(domain, index, j + 1, beta, make(np.sin)))
        j += 2
    return funcs


def _besselj_array(order, xs):
    xs = np.asarray(xs, float)
    flat = xs.ravel()
    out = np.array([bessel.besselj(order, float(v)) for v in flat])
    return out.reshape(xs.shape)


def _disk_basis(domain, index):
    entries = ball_neumann_spectrum_count(2, index)
    eig = entries[index - 1]
    l = eig.angular_degree
    beta = eig.value
    if beta == 0.0:
        c = 1.0 / math.sqrt(math.pi)
        ev = lambda r, theta: np.full_like(np.asarray(r, float), c)
        return [BasisFunction(domain, index, 1, beta, ev)]
    x = math.sqrt(beta)
    jl = bessel.besselj(l, x)
    if l == 0:
        radial_norm = 0.5 * jl * jl
        c = 1.0 / math.sqrt(2.0 * math.pi * radial_norm)
        ev = lambda r, theta: c * _besselj_array(0, x * np.asarray(r, float))
        return [BasisFunction(domain, index, 1, beta, ev)]
    # at a Neumann root, int_0^1 J_l(x r)^2 r dr = (1 - l^2/x^2) J_l(x)^2 / 2
    radial_norm = 0.5 * (1.0 - l * l / (x * x)) * jl * jl
    c = 1.0 / math.sqrt(math.pi * radial_norm)

    def make(trig):
        def ev(r, theta):
            r = np.asarray(r, float)
            theta = np.asarray(theta, float)
            return c * _besselj_array(l, x * r) * trig(l * theta)

        return ev

    return [
        BasisFunction(domain, index, 1, beta, make(np.cos)),
        BasisFunction(domain, index, 2, beta, make(np.sin)),
    ]


# --------------------------------------------------------------------------
# quadrature


@dataclass(frozen=True)
class Quadrature:
    """Nodes (per-coordinate arrays) and weights for a domain."""

    domain: DomainId
    points: tuple
    weights: np.ndarray


def circle_quadrature(n: int) -> Quadrature:
    """Trapezoid rule; exact for trigonometric polynomials of degree < n."""
    theta = 2.0 * math.pi * np.arange(n) / n
    w = np.full(n, 2.0 * math.pi / n)
    return Quadrature(sphere(2), (theta,), w)


def sphere2_quadrature(n_theta: int, n_phi: int) -> Quadrature:
    """Gauss-Legendre in cos(theta) times uniform longitudes."""
    x, wx = np.polynomial.legendre.leggauss(n_theta)
    theta = np.arccos(x)
    phi = 2.0 * math.pi * np.arange(n_phi) / n_phi
    tg, pg = np.meshgrid(theta, phi, indexing="ij")
    wg = np.repeat(wx, n_phi) * (2.0 * math.pi / n_phi)
    return Quadrature(sphere(3), (tg.ravel(), pg.ravel()), wg)


def disk_quadrature(n_r: int, n_theta: int) -> Quadrature:
    """Gauss-Legendre radial (weight r) times trapezoid angular."""
    x, wx = np.polynomial.legendre.leggauss(n_r)
    r = 0.5 * (x + 1.0)
    wr = 0.5 * wx * r
    theta = 2.0 * math.pi * np.arange(n_theta) / n_theta
    rg, tg = np.meshgrid(r, theta, indexing="ij")
    wg = np.repeat(wr, n_theta) * (2.0 * math.pi / n_theta)
    return Quadrature(ball(2), (rg.ravel(), tg.ravel()), wg)


def default_quadrature(domain: DomainId, max_degree: int) -> Quadrature:
    """A quadrature integrating products of basis functions up to the given
    total angular degree exactly (radially: to spectral accuracy on the disk)."""
    if domain.kind == "sphere" and domain.dim == 2:
        n = max(32, 8 * ((max_degree + 4) // 8 + 1))
        return circle_quadrature(n)
    if domain.kind == "sphere" and domain.dim == 3:
        n_theta = max_degree // 2 + 4
        n_phi = max(16, 2 * ((max_degree + 6) // 2 + 1))
        return sphere2_quadrature(n_theta, n_phi)
    if domain.kind == "ball" and domain.dim == 2:
        n_theta = max(32, 8 * ((max_degree + 4) // 8 + 1))
        return disk_quadrature(64, n_theta)
    raise ValueError(f"no quadrature available on {domain.label}")


def spectrum_to_json(entries: list[LaplaceEigenvalue]) -> list[dict]:
    """Serializable records; beta is rounded to 12 significant digits."""
    out = []
    for e in entries:
        out.append(
            {
                "k": e.index,
                "beta": float(f"{e.value:.12g}"),
                "multiplicity": e.multiplicity,
                "l": e.angular_degree,
                "radial_index": e.radial_index,
            }
        )
    return out
