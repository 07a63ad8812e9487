"""Bifurcation-level prediction for -Laplace u = grad F(u, lambda) on spheres
and balls.

The linearization around the constant state decomposes into blocks indexed by
Laplacian eigenvalues beta_k and matrix eigenvalues alpha_j, with block
eigenvalue (beta_k - lambda alpha_j) / (1 + beta_k).  Candidate levels are the
quotients beta_k / alpha_j; each candidate carries the resonant eigenspace
descriptor, the slice Brouwer degrees on both sides, and the degree-jump
verdict.  Sphere candidates are exact bifurcation levels; ball candidates come
with an interval alternative.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import euler_ring, potentials, spectral
from .euler_ring import ATOM_ON_MINUS, ATOM_ON_PLUS
from .potentials import PotentialSpec
from .spectral import DomainId, LaplaceEigenvalue

RESONANCE_TOL = 1e-9

__all__ = [
    "SpectrumEntry",
    "SliceOperatorSpectrum",
    "RepresentationBlock",
    "RepresentationDescriptor",
    "SphereGlobal",
    "BallAlternative",
    "BifurcationCandidate",
    "eigen_catalog",
    "slice_spectrum",
    "lambda_set",
    "zero_eigenspace",
    "negative_eigenspace",
    "window_eigenspace",
    "default_epsilon",
    "degree_jump",
    "predict",
    "candidate_to_json",
]


@dataclass(frozen=True)
class SpectrumEntry:
    beta: float
    alpha: float
    eigenvalue: float
    dimension: int
    nontrivial: bool


@dataclass(frozen=True)
class SliceOperatorSpectrum:
    """Blocks of the linearized operator at the constant state."""

    domain: DomainId
    lam: float
    entries: tuple


@dataclass(frozen=True)
class RepresentationBlock:
    beta: float
    copies: int
    dimension: int
    nontrivial: bool


@dataclass(frozen=True)
class RepresentationDescriptor:
    """Isotypic blocks of an eigenspace viewed as a rotation representation."""

    blocks: tuple

    @property
    def total_dimension(self) -> int:
        return sum(b.copies * b.dimension for b in self.blocks)

    @property
    def is_nontrivial(self) -> bool:
        return any(b.nontrivial for b in self.blocks)

    def to_json(self) -> dict:
        return {
            "blocks": [
                {
                    "beta": b.beta,
                    "copies": b.copies,
                    "dimension": b.dimension,
                    "nontrivial": b.nontrivial,
                }
                for b in self.blocks
            ],
            "dim": self.total_dimension,
        }


@dataclass(frozen=True)
class SphereGlobal:
    kind: str = "sphere-global"


@dataclass(frozen=True)
class BallAlternative:
    """Either local bifurcation along a half-interval next to the level, or a
    global bifurcation somewhere in the interval."""

    lo: float
    hi: float
    kind: str = "ball-alternative"


@dataclass(frozen=True)
class BifurcationCandidate:
    lambda0: float
    witnesses: tuple  # ((alpha, beta), ...)
    V: RepresentationDescriptor
    guarantee: Optional[object]
    b_minus: int
    b_plus: int
    jump: bool
    epsilon: float


def eigen_catalog(domain: DomainId, beta_cutoff: float) -> list[LaplaceEigenvalue]:
    """Distinct Laplacian eigenvalues up to beta_cutoff on the domain."""
    if beta_cutoff <= 0:
        raise ValueError("beta_cutoff must be positive")
    if domain.kind == "sphere":
        out = []
        k = 1
        while True:
            l = k - 1
            beta = l * (l + domain.dim - 2)
            if beta > beta_cutoff:
                break
            out.append(spectral.sphere_spectrum(domain.dim, k)[-1])
            k += 1
        return out
    return spectral.ball_neumann_spectrum(domain.dim, beta_cutoff)


def _block_nontrivial(domain: DomainId, eig: LaplaceEigenvalue) -> bool:
    # sphere: every nonzero eigenvalue has a nontrivial rotation action;
    # ball: multiplicity one means radial, hence trivial
    if domain.kind == "sphere":
        return eig.value != 0.0
    return eig.multiplicity > 1


def _alpha_groups(spec: PotentialSpec):
    ms = potentials.matrix_spectrum(spec.A)
    return [(g.value, g.multiplicity) for g in ms.eigenpairs]


def slice_spectrum(
    spec: PotentialSpec, domain: DomainId, lam: float, beta_cutoff: float
) -> SliceOperatorSpectrum:
    """All eigenvalue blocks (beta_k - lambda alpha_j) / (1 + beta_k)."""
    catalog = eigen_catalog(domain, beta_cutoff)
    if not catalog:
        raise ValueError("empty spectrum request")
    entries = []
    for eig in catalog:
        for alpha, mult in _alpha_groups(spec):
            value = (eig.value - lam * alpha) / (1.0 + eig.value)
            entries.append(
                SpectrumEntry(
                    beta=eig.value,
                    alpha=alpha,
                    eigenvalue=value,
                    dimension=eig.multiplicity * mult,
                    nontrivial=_block_nontrivial(domain, eig),
                )
            )
    return SliceOperatorSpectrum(domain=domain, lam=lam, entries=tuple(entries))


def lambda_set(spec: PotentialSpec, domain: DomainId, beta_cutoff: float) -> list[float]:
    """Sorted candidate levels beta_k / alpha_j over nonzero alpha and beta."""
    levels = []
    for eig in eigen_catalog(domain, beta_cutoff):
        if eig.value == 0.0:
            continue
        for alpha, _ in _alpha_groups(spec):
            if abs(alpha) <= RESONANCE_TOL:
                continue
            levels.append(eig.value / alpha)
    levels.sort()
    out = []
    for lv in levels:
        if not out or abs(lv - out[-1]) > RESONANCE_TOL * max(1.0, abs(lv)):
            out.append(lv)
    return out


def _resonant_blocks(spec, domain, predicate, beta_cutoff):
    """Blocks (alpha, eig) with beta != 0 selected by predicate(beta, alpha)."""
    hits = []
    for eig in eigen_catalog(domain, beta_cutoff):
        if eig.value == 0.0:
            continue
        for alpha, mult in _alpha_groups(spec):
            if predicate(eig.value, alpha):
                hits.append((alpha, mult, eig))
    return hits


def _descriptor(domain, hits) -> RepresentationDescriptor:
    blocks = [
        RepresentationBlock(
            beta=eig.value,
            copies=mult,
            dimension=eig.multiplicity,
            nontrivial=_block_nontrivial(domain, eig),
        )
        for _, mult, eig in sorted(hits, key=lambda h: (h[2].value, h[0]))
    ]
    return RepresentationDescriptor(blocks=tuple(blocks))


def zero_eigenspace(
    spec: PotentialSpec, domain: DomainId, lam0: float, beta_cutoff: float
) -> RepresentationDescriptor:
    """Resonant eigenspace at lam0: blocks with beta = lam0 * alpha, beta != 0."""

    def hit(beta, alpha):
        return abs(beta - lam0 * alpha) <= RESONANCE_TOL * max(1.0, abs(beta))

    return _descriptor(domain, _resonant_blocks(spec, domain, hit, beta_cutoff))


def negative_eigenspace(
    spec: PotentialSpec, domain: DomainId, lam: float, beta_cutoff: float
) -> RepresentationDescriptor:
    """Blocks with 0 < beta < lam * alpha."""

    def hit(beta, alpha):
        return beta < lam * alpha - RESONANCE_TOL * max(1.0, abs(beta))

    return _descriptor(domain, _resonant_blocks(spec, domain, hit, beta_cutoff))


def window_eigenspace(
    spec: PotentialSpec, domain: DomainId, lo: float, hi: float, beta_cutoff: float
) -> RepresentationDescriptor:
    """Union of resonant eigenspaces over all levels inside (lo, hi)."""

    def hit(beta, alpha):
        if abs(alpha) <= RESONANCE_TOL:
            return False
        return lo < beta / alpha < hi

    return _descriptor(domain, _resonant_blocks(spec, domain, hit, beta_cutoff))


def default_epsilon(lam0: float, levels) -> float:
    """Half the gap to the nearest other level, capped at half the distance
    to zero."""
    gap = min(
        (abs(lam0 - other) for other in levels if abs(other - lam0) > RESONANCE_TOL * max(1.0, abs(lam0))),
        default=math.inf,
    )
    return min(gap / 2.0, abs(lam0) / 2.0)


def _witnesses(spec, domain, lam0, beta_cutoff):
    def hit(beta, alpha):
        return abs(beta - lam0 * alpha) <= RESONANCE_TOL * max(1.0, abs(beta))

    hits = _resonant_blocks(spec, domain, hit, beta_cutoff)
    return tuple(sorted((alpha, eig.value) for alpha, _, eig in hits))


def degree_jump(
    spec: PotentialSpec,
    domain: DomainId,
    lam0: float,
    eps: float,
    beta_cutoff: Optional[float] = None,
    rng=None,
) -> BifurcationCandidate:
    """Degree-jump decision at a candidate level.

    Computes the slice Brouwer degrees b_minus / b_plus at lam0 -/+ eps, the
    resonant eigenspace descriptor, and whether the two-sided degrees differ
    (the jump).  The window (lam0 - eps, lam0 + eps) must not contain zero,
    and on the sphere it must contain no other candidate level.
    """
    if lam0 == 0.0:
        raise ValueError("lambda0 must be nonzero")
    if eps <= 0.0:
        raise ValueError("epsilon must be positive")
    if abs(lam0) < eps:
        raise ValueError("window (lambda0 - eps, lambda0 + eps) must not contain 0")
    alphas = [a for a, _ in _alpha_groups(spec)]
    max_alpha = max((abs(a) for a in alphas), default=0.0)
    if beta_cutoff is None:
        beta_cutoff = max(1.0, (abs(lam0) + eps) * max_alpha * 1.5 + 1.0)
    levels = lambda_set(spec, domain, beta_cutoff)
    if domain.kind == "sphere":
        inside = [
            lv
            for lv in levels
            if lam0 - eps <= lv <= lam0 + eps
            and abs(lv - lam0) > RESONANCE_TOL * max(1.0, abs(lam0))
        ]
        if inside:
            raise ValueError(
                f"window around lambda0={lam0} contains other candidate levels {inside}"
            )
    witnesses = _witnesses(spec, domain, lam0, beta_cutoff)
    if not witnesses:
        raise ValueError(f"no resonant eigenvalue blocks at lambda0={lam0}")
    if domain.kind == "sphere":
        V = zero_eigenspace(spec, domain, lam0, beta_cutoff)
    else:
        V = window_eigenspace(spec, domain, lam0 - eps, lam0 + eps, beta_cutoff)
    b_minus, _ = potentials.slice_brouwer_degree(spec, lam0 - eps, rng=rng)
    b_plus, _ = potentials.slice_brouwer_degree(spec, lam0 + eps, rng=rng)
    D = euler_ring.deg_minus_id(V)
    side = ATOM_ON_PLUS if lam0 > 0 else ATOM_ON_MINUS
    jump = euler_ring.product_decision(b_plus, b_minus, D, side)
    guarantee = None
    if jump:
        if domain.kind == "sphere":
            guarantee = SphereGlobal()
        else:
            guarantee = BallAlternative(lo=lam0 - eps, hi=lam0 + eps)
    return BifurcationCandidate(
        lambda0=lam0,
        witnesses=witnesses,
        V=V,
        guarantee=guarantee,
        b_minus=b_minus,
        b_plus=b_plus,
        jump=jump,
        epsilon=eps,
    )


def _validate_basics(spec: PotentialSpec):
    for lam in (-1.0, 0.5):
        g = np.asarray(spec.grad(spec.u0, lam), float)
        if np.max(np.abs(g)) > 1e-9:
            raise ValueError("u0 is not a critical point of the potential")
        h = np.asarray(spec.hess(spec.u0, lam), float)
        if np.max(np.abs(h - lam * spec.A)) > 1e-9:
            raise ValueError("Hessian at u0 does not equal lambda * A")
    for g in spec.action.sample_elements(16):
        if np.max(np.abs(g - np.eye(spec.p))) > 1e-12:
            if np.linalg.norm(g @ spec.u0 - spec.u0) <= 1e-12:
                raise ValueError("a nonidentity sampled group element fixes u0")


def predict(
    spec: PotentialSpec,
    domain: DomainId,
    beta_cutoff: float,
    epsilon: Optional[float] = None,
    rng=None,
) -> list[BifurcationCandidate]:
    """All bifurcation candidates below the cutoff, ascending in level.

    Sphere: one candidate per level in the quotient set (no bifurcation can
    occur outside it).  Ball: one candidate per (alpha, beta) pair whose
    eigenspace has dimension greater than one, with an interval guarantee.
    """
    _validate_basics(spec)
    levels = lambda_set(spec, domain, beta_cutoff)
    out = []
    if domain.kind == "sphere":
        for lam0 in levels:
            eps = epsilon if epsilon is not None else default_epsilon(lam0, levels)
            out.append(degree_jump(spec, domain, lam0, eps, beta_cutoff=beta_cutoff, rng=rng))
        return out
    catalog = eigen_catalog(domain, beta_cutoff)
    pairs = []
    for eig in catalog:
        if eig.value == 0.0 or eig.multiplicity <= 1:
            continue
        for alpha, _ in _alpha_groups(spec):
            if abs(alpha) <= RESONANCE_TOL:
                continue
            pairs.append((eig.value / alpha, alpha, eig.value))
    pairs.sort()
    for lam0, alpha, beta in pairs:
        eps = epsilon if epsilon is not None else default_epsilon(lam0, levels)
        out.append(degree_jump(spec, domain, lam0, eps, beta_cutoff=beta_cutoff, rng=rng))
    return out


def candidate_to_json(c: BifurcationCandidate) -> dict:
    if isinstance(c.guarantee, SphereGlobal):
        guarantee = {"kind": "sphere-global"}
    elif isinstance(c.guarantee, BallAlternative):
        guarantee = {
            "kind": "ball-alternative",
            "interval": [c.guarantee.lo, c.guarantee.hi],
            "statement": (
                "either a local bifurcation occurs at every level on one side "
                "of lambda0 within the interval, or a global bifurcation "
                "occurs somewhere in the interval"
            ),
        }
    else:
        guarantee = None
    return {
        "lambda0": c.lambda0,
        "witnesses": [{"alpha": a, "beta": b} for a, b in c.witnesses],
        "V": c.V.to_json(),
        "b_minus": c.b_minus,
        "b_plus": c.b_plus,
        "jump": c.jump,
        "epsilon": c.epsilon,
        "guarantee": guarantee,
    }
