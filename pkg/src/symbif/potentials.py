"""Potentials F(u, lambda) with symmetry data: the group action on R^p, the
base critical point u0, the linearization matrix A, and a checker for the
standing assumptions on these objects.

Builtin potentials cover the scalar pitchfork, a rotation-invariant ring
minimum, and degenerate variants of both.  User potentials are polynomials
parsed from a config file; their gradients and Hessians come from symbolic
differentiation.
"""

from __future__ import annotations

import configparser
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import brouwer
from .polynomial import parse_polynomial

__all__ = [
    "GroupAction",
    "PotentialSpec",
    "NormalSlice",
    "EigenGroup",
    "MatrixSpectrum",
    "AssumptionResult",
    "AssumptionReport",
    "trivial_action",
    "so2_action",
    "cyclic_action",
    "product_action",
    "normal_slice",
    "matrix_spectrum",
    "check_assumptions",
    "slice_brouwer_degree",
    "builtin",
    "builtin_names",
    "from_config_file",
    "from_config_dict",
]


def _plane_generator(p, i, j):
    g = np.zeros((p, p))
    g[i, j] = -1.0
    g[j, i] = 1.0
    return g


def _plane_rotation(p, i, j, angle):
    r = np.eye(p)
    c, s = math.cos(angle), math.sin(angle)
    r[i, i] = c
    r[i, j] = -s
    r[j, i] = s
    r[j, j] = c
    return r


@dataclass(frozen=True)
class GroupAction:
    """Orthogonal action of a compact group on R^p.

    Factors are primitive pieces acting in coordinate planes:
    ("trivial",), ("so2", i, j), or ("zn", n, i, j); several factors form a
    product acting on disjoint planes.
    """

    p: int
    factors: tuple

    def __post_init__(self):
        used = set()
        for f in self.factors:
            if f[0] == "trivial":
                continue
            if f[0] not in ("so2", "zn"):
                raise ValueError(f"unknown action factor {f[0]!r}")
            i, j = f[-2], f[-1]
            if not (0 <= i < self.p and 0 <= j < self.p and i != j):
                raise ValueError(f"invalid plane ({i}, {j}) for p={self.p}")
            if i in used or j in used:
                raise ValueError("action factors must act on disjoint planes")
            used.update((i, j))
            if f[0] == "zn" and f[1] < 2:
                raise ValueError("cyclic order must be at least 2")

    @property
    def kind(self) -> str:
        names = []
        for f in self.factors:
            if f[0] == "trivial":
                names.append("trivial")
            elif f[0] == "so2":
                names.append(f"so2({f[1] + 1},{f[2] + 1})")
            else:
                names.append(f"zn({f[1]};{f[2] + 1},{f[3] + 1})")
        return "*".join(names) if names else "trivial"

    @property
    def continuous_dimension(self) -> int:
        return sum(1 for f in self.factors if f[0] == "so2")

    def generators(self) -> list[np.ndarray]:
        """Infinitesimal generators of the continuous factors."""
        return [_plane_generator(self.p, f[1], f[2]) for f in self.factors if f[0] == "so2"]

    def sample_elements(self, count: int = 64) -> list[np.ndarray]:
        """A finite sampling of group elements (includes the identity)."""
        per_factor = []
        for f in self.factors:
            if f[0] == "trivial":
                per_factor.append([np.eye(self.p)])
            elif f[0] == "so2":
                angles = 2.0 * math.pi * np.arange(count) / count
                per_factor.append([_plane_rotation(self.p, f[1], f[2], a) for a in angles])
            else:
                n = f[1]
                angles = 2.0 * math.pi * np.arange(n) / n
                per_factor.append([_plane_rotation(self.p, f[2], f[3], a) for a in angles])
        if not per_factor:
            return [np.eye(self.p)]
        elems = per_factor[0]
        for group in per_factor[1:]:
            elems = [a @ b for a in elems for b in group]
            if len(elems) > 4 * count:
                elems = elems[:: max(1, len(elems) // (4 * count))]
        return elems


def trivial_action(p: int) -> GroupAction:
    return GroupAction(p, (("trivial",),))


def so2_action(p: int, plane=(0, 1)) -> GroupAction:
    return GroupAction(p, (("so2", plane[0], plane[1]),))


def cyclic_action(p: int, n: int, plane=(0, 1)) -> GroupAction:
    return GroupAction(p, (("zn", n, plane[0], plane[1]),))


def product_action(p: int, factors) -> GroupAction:
    flat = []
    for a in factors:
        flat.extend(a.factors)
    return GroupAction(p, tuple(flat))


@dataclass
class PotentialSpec:
    """The potential, its symmetry, the base point, and the matrix A with
    Hessian(u0, lambda) = lambda * A.

    value/grad/hess broadcast over batches: u of shape (..., p) yields grad of
    shape (..., p) and hess of shape (..., p, p).  growth_exponent is metadata
    only; grad_degree (max polynomial degree of the gradient in u) sizes the
    dealiased quadrature for the Galerkin solver.
    """

    name: str
    p: int
    action: GroupAction
    u0: np.ndarray
    value: Callable
    grad: Callable
    hess: Callable
    A: np.ndarray
    growth_exponent: Optional[float] = None
    grad_degree: Optional[int] = None

    def __post_init__(self):
        self.u0 = np.asarray(self.u0, float).reshape(self.p)
        self.A = np.asarray(self.A, float).reshape(self.p, self.p)


@dataclass(frozen=True)
class NormalSlice:
    """Orthonormal basis (columns) of the complement of the orbit tangent."""

    basis: np.ndarray
    dimension: int


@dataclass(frozen=True)
class EigenGroup:
    value: float
    multiplicity: int
    vectors: np.ndarray  # columns


@dataclass(frozen=True)
class MatrixSpectrum:
    """Grouped eigenvalues of A, full and restricted to the normal slice."""

    eigenpairs: tuple
    slice_eigenpairs: tuple

    @property
    def values(self):
        return tuple(g.value for g in self.eigenpairs)

    @property
    def slice_values(self):
        return tuple(g.value for g in self.slice_eigenpairs)


def normal_slice(spec: PotentialSpec) -> NormalSlice:
    """Orthonormal basis of the orthogonal complement of T_{u0} Gamma(u0)."""
    gens = spec.action.generators()
    tangents = []
    for g in gens:
        t = g @ spec.u0
        if np.linalg.norm(t) < 1e-12:
            raise ValueError(
                "orbit of u0 degenerates to a point under a continuous rotation "
                "factor: the trivial-isotropy assumption fails"
            )
        tangents.append(t)
    if not tangents:
        return NormalSlice(basis=np.eye(spec.p), dimension=spec.p)
    T = np.stack(tangents, axis=1)
    u, s, _ = np.linalg.svd(T, full_matrices=True)
    rank = int(np.sum(s > 1e-12))
    comp = u[:, rank:]
    # deterministic sign: make the largest-magnitude entry of each column positive
    for col in range(comp.shape[1]):
        i = int(np.argmax(np.abs(comp[:, col])))
        if comp[i, col] < 0:
            comp[:, col] = -comp[:, col]
    return NormalSlice(basis=comp, dimension=spec.p - rank)


def _group_eigenpairs(values, vectors, tol):
    groups = []
    start = 0
    for i in range(1, len(values) + 1):
        if i == len(values) or values[i] - values[start] > tol:
            groups.append(
                EigenGroup(
                    value=float(np.mean(values[start:i])),
                    multiplicity=i - start,
                    vectors=vectors[:, start:i].copy(),
                )
            )
            start = i
    return tuple(groups)


def matrix_spectrum(A, slice: Optional[NormalSlice] = None, group_tol: float = 1e-9) -> MatrixSpectrum:
    """Eigenvalues of a symmetric matrix grouped by multiplicity, plus the
    spectrum of the restriction to the normal slice."""
    A = np.asarray(A, float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("A must be a square matrix")
    if np.max(np.abs(A - A.T)) > 1e-12:
        raise ValueError("A is not symmetric within 1e-12")
    vals, vecs = np.linalg.eigh(A)
    full = _group_eigenpairs(vals, vecs, group_tol)
    if slice is None:
        restricted = full
    else:
        S = slice.basis
        B = S.T @ A @ S
        if B.size:
            svals, svecs = np.linalg.eigh(0.5 * (B + B.T))
            restricted = _group_eigenpairs(svals, svecs, group_tol)
        else:
            restricted = tuple()
    return MatrixSpectrum(eigenpairs=full, slice_eigenpairs=restricted)


# --------------------------------------------------------------------------
# builtin potentials


def _pitchfork_scalar():
    def value(u, lam):
        u = np.asarray(u, float)[..., 0]
        return lam * u**2 / 2.0 - u**4 / 4.0

    def grad(u, lam):
        u = np.asarray(u, float)
        return lam * u - u**3

    def hess(u, lam):
        u = np.asarray(u, float)[..., 0]
        return (lam - 3.0 * u**2)[..., None, None]

    return PotentialSpec(
        name="pitchfork-scalar",
        p=1,
        action=trivial_action(1),
        u0=np.zeros(1),
        value=value,
        grad=grad,
        hess=hess,
        A=np.array([[1.0]]),
        growth_exponent=3.0,
        grad_degree=3,
    )


def _pitchfork_degenerate():
    def value(u, lam):
        u = np.asarray(u, float)[..., 0]
        return lam * u**2 / 2.0 - u**6 / 6.0

    def grad(u, lam):
        u = np.asarray(u, float)
        return lam * u - u**5

    def hess(u, lam):
        u = np.asarray(u, float)[..., 0]
        return (lam - 5.0 * u**4)[..., None, None]

    return PotentialSpec(
        name="pitchfork-degenerate",
        p=1,
        action=trivial_action(1),
        u0=np.zeros(1),
        value=value,
        grad=grad,
        hess=hess,
        A=np.array([[1.0]]),
        growth_exponent=5.0,
        grad_degree=5,
    )


def _so2_ring():
    u0 = np.array([1.0, 0.0])

    def value(u, lam):
        u = np.asarray(u, float)
        s = np.sum(u * u, axis=-1) - 1.0
        return lam * s**2 / 8.0

    def grad(u, lam):
        u = np.asarray(u, float)
        s = np.sum(u * u, axis=-1) - 1.0
        return 0.5 * lam * s[..., None] * u

    def hess(u, lam):
        u = np.asarray(u, float)
        s = np.sum(u * u, axis=-1) - 1.0
        eye = np.eye(2)
        outer = u[..., :, None] * u[..., None, :]
        return lam * (0.5 * s[..., None, None] * eye + outer)

    return PotentialSpec(
        name="so2-ring",
        p=2,
        action=so2_action(2),
        u0=u0,
        value=value,
        grad=grad,
        hess=hess,
        A=np.outer(u0, u0),
        growth_exponent=3.0,
        grad_degree=3,
    )


def _so2_ring_degenerate():
    u0 = np.array([1.0, 0.0])

    def value(u, lam):
        u = np.asarray(u, float)
        s = np.sum(u * u, axis=-1) - 1.0
        return lam * s**4 / 16.0

    def grad(u, lam):
        u = np.asarray(u, float)
        s = np.sum(u * u, axis=-1) - 1.0
        return 0.5 * lam * (s**3)[..., None] * u

    def hess(u, lam):
        u = np.asarray(u, float)
        s = np.sum(u * u, axis=-1) - 1.0
        eye = np.eye(2)
        outer = u[..., :, None] * u[..., None, :]
        return lam * (0.5 * (s**3)[..., None, None] * eye + 3.0 * (s**2)[..., None, None] * outer)

    return PotentialSpec(
        name="so2-ring-degenerate",
        p=2,
        action=so2_action(2),
        u0=u0,
        value=value,
        grad=grad,
        hess=hess,
        A=np.zeros((2, 2)),
        growth_exponent=7.0,
        grad_degree=7,
    )


_BUILTINS = {
    "pitchfork-scalar": _pitchfork_scalar,
    "pitchfork-degenerate": _pitchfork_degenerate,
    "so2-ring": _so2_ring,
    "so2-ring-degenerate": _so2_ring_degenerate,
}


def builtin_names() -> list[str]:
    return sorted(_BUILTINS)


def builtin(name: str) -> PotentialSpec:
    """A fully populated builtin potential by catalog name."""
    if name not in _BUILTINS:
        raise ValueError(f"unknown builtin potential {name!r}; have {builtin_names()}")
    return _BUILTINS[name]()


# --------------------------------------------------------------------------
# assumption checking


@dataclass(frozen=True)
class AssumptionResult:
    status: str  # "pass" | "fail" | "undecidable"
    details: dict


@dataclass(frozen=True)
class AssumptionReport:
    potential: str
    lambda_samples: tuple
    results: dict

    @property
    def ok(self) -> bool:
        return all(r.status != "fail" for r in self.results.values())

    def to_json(self) -> dict:
        return {
            "potential": self.potential,
            "lambda_samples": list(self.lambda_samples),
            "assumptions": {
                name: {"status": r.status, **r.details} for name, r in self.results.items()
            },
            "ok": self.ok,
        }


def slice_brouwer_degree(
    spec: PotentialSpec,
    lam: float,
    half_width: float = 0.5,
    max_halvings: int = 6,
    rng=None,
):
    """Brouwer degree of the gradient restricted to the normal slice at u0.

    The region is a box of the given half-width in slice coordinates, halved
    on admissibility failures.  Returns (degree, half_width_used).
    """
    sl = normal_slice(spec)
    d = sl.dimension
    if d == 0:
        raise ValueError("normal slice is zero-dimensional")
    if d > 3:
        raise ValueError(f"slice dimension {d} exceeds the supported maximum 3")
    S = sl.basis

    def f(v):
        v = np.asarray(v, float)
        return S.T @ np.asarray(spec.grad(spec.u0 + S @ v, lam), float)

    w = float(half_width)
    last_error = None
    for _ in range(max_halvings + 1):
        try:
            if d == 1:
                deg = brouwer.degree_1d(lambda t: float(f(np.array([t]))[0]), brouwer.Interval(-w, w))
            elif d == 2:
                deg = brouwer.degree_2d(f, brouwer.Box((-w, -w), (w, w)))
            else:
                deg = brouwer.degree_nd(f, brouwer.Box((-w,) * 3, (w,) * 3), rng=rng)
            return deg, w
        except (brouwer.AdmissibilityError, brouwer.InconclusiveDegreeError) as err:
            last_error = err
            w *= 0.5
    raise brouwer.InconclusiveDegreeError(
        f"slice degree at lambda={lam} failed after {max_halvings} shrinks: {last_error}"
    )


def check_assumptions(
    spec: PotentialSpec,
    lambda_samples=(-0.1, 0.1),
    tol: float = 1e-10,
    rng=None,
) -> AssumptionReport:
    """Check the standing assumptions on a potential, to the extent decidable.

    Orthogonality of the action and triviality of the isotropy of u0 are
    sampled; the Hessian-at-u0 linearity in lambda is a residual test; the
    growth bound and the global isolation of the critical orbit are not
    decidable from point samples and come back "undecidable" with evidence;
    the slice-degree condition is evaluated at every nonzero lambda sample.
    """
    if not any(abs(l) > 0 for l in lambda_samples):
        raise ValueError("need at least one nonzero lambda sample")
    if rng is None:
        rng = np.random.default_rng(0)
    results = {}
    elements = spec.action.sample_elements(64)

    # B1: orthogonal representation
    ortho_err = max(float(np.max(np.abs(g.T @ g - np.eye(spec.p)))) for g in elements)
    results["B1"] = AssumptionResult(
        "pass" if ortho_err <= 1e-12 else "fail",
        {"max_orthogonality_residual": ortho_err, "sampled_elements": len(elements)},
    )

    # B2: growth bound is metadata; report a fitted exponent
    radii = np.logspace(0, 3, 13)
    dirs = rng.normal(size=(8, spec.p))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    lam0 = max(lambda_samples, key=abs)
    hnorm = []
    for r in radii:
        pts = r * dirs
        h = np.asarray(spec.hess(pts, lam0), float)
        hnorm.append(float(np.max(np.abs(h))))
    logs_r = np.log(radii[-6:])
    logs_h = np.log(np.maximum(1e-300, hnorm[-6:]))
    slope = float(np.polyfit(logs_r, logs_h, 1)[0])
    results["B2"] = AssumptionResult(
        "undecidable",
        {
            "fitted_growth_exponent": slope + 1.0,
            "declared_growth_exponent": spec.growth_exponent,
            "max_radius": float(radii[-1]),
        },
    )

    # B3: grad(u0) = 0 and hess(u0, lambda) = lambda * A
    grad_res = max(
        float(np.max(np.abs(np.asarray(spec.grad(spec.u0, l), float)))) for l in lambda_samples
    )
    hess_res = max(
        float(np.max(np.abs(np.asarray(spec.hess(spec.u0, l), float) - l * spec.A)))
        for l in lambda_samples
    )
    results["B3"] = AssumptionResult(
        "pass" if grad_res <= tol and hess_res <= tol else "fail",
        {"max_grad_residual": grad_res, "max_hessian_residual": hess_res},
    )

    # B4: only the identity fixes u0 among sampled elements
    fixing = sum(
        1 for g in elements if np.linalg.norm(g @ spec.u0 - spec.u0) <= 1e-9 * (1 + np.linalg.norm(spec.u0))
    )
    identity_count = sum(1 for g in elements if np.max(np.abs(g - np.eye(spec.p))) <= 1e-12)
    results["B4"] = AssumptionResult(
        "pass" if fixing == identity_count else "fail",
        {"fixing_elements": fixing, "identity_elements": identity_count},
    )

    # B5: local annulus scan around the orbit; global isolation is undecidable
    scale = max(1.0, float(np.linalg.norm(spec.u0)))
    n_pts = 10_000
    pts = rng.normal(size=(n_pts, spec.p))
    pts /= np.linalg.norm(pts, axis=1, keepdims=True)
    pts *= (0.02 + 0.23 * rng.random((n_pts, 1))) * scale
    base = spec.u0 if np.linalg.norm(spec.u0) > 0 else np.zeros(spec.p)
    pts += base
    # dense orbit sampling so the tube exclusion tracks the true orbit
    orbit = np.stack([g @ spec.u0 for g in spec.action.sample_elements(1024)])
    dists = np.min(np.linalg.norm(pts[:, None, :] - orbit[None, :, :], axis=2), axis=1)
    keep = dists > 0.02 * scale
    lam_scan = max(lambda_samples, key=abs)
    gvals = np.linalg.norm(np.asarray(spec.grad(pts[keep], lam_scan), float), axis=-1)
    near_zero = int(np.sum(gvals <= 1e-6))
    results["B5"] = AssumptionResult(
        "undecidable",
        {
            "scan_points": int(np.sum(keep)),
            "annulus": [0.02 * scale, 0.25 * scale],
            "min_grad_norm": float(gvals.min()) if gvals.size else None,
            "near_zero_count": near_zero,
        },
    )

    # B6: slice Brouwer degree nonzero at every nonzero lambda sample
    degrees = {}
    status = "pass"
    for l in lambda_samples:
        if l == 0:
            continue
        try:
            deg, used = slice_brouwer_degree(spec, l, rng=rng)
            degrees[repr(l)] = {"degree": deg, "half_width": used}
            if deg == 0:
                status = "fail"
        except (brouwer.InconclusiveDegreeError, brouwer.AdmissibilityError) as err:
            degrees[repr(l)] = {"error": str(err)}
            status = "undecidable" if status != "fail" else status
    results["B6"] = AssumptionResult(status, {"degrees": degrees})

    return AssumptionReport(
        potential=spec.name, lambda_samples=tuple(lambda_samples), results=results
    )


# --------------------------------------------------------------------------
# user-defined potentials from config files


def _parse_action(text: str, p: int) -> GroupAction:
    factors = []
    for piece in text.split("*"):
        piece = piece.strip()
        if piece == "trivial":
            factors.append(("trivial",))
        elif piece.startswith("so2(") and piece.endswith(")"):
            i, j = (int(x) for x in piece[4:-1].split(","))
            factors.append(("so2", i - 1, j - 1))
        elif piece.startswith("zn(") and piece.endswith(")"):
            head, plane = piece[3:-1].split(";")
            i, j = (int(x) for x in plane.split(","))
            factors.append(("zn", int(head), i - 1, j - 1))
        else:
            raise ValueError(f"cannot parse action {piece!r}")
    return GroupAction(p, tuple(factors))


def _parse_matrix(text: str, p: int) -> np.ndarray:
    rows = [row.strip() for row in text.split(";") if row.strip()]
    data = [[float(x) for x in row.replace(",", " ").split()] for row in rows]
    A = np.array(data, float)
    if A.shape != (p, p):
        raise ValueError(f"matrix must be {p}x{p}, got {A.shape}")
    return A


def from_config_dict(cfg: dict) -> PotentialSpec:
    """Build a PotentialSpec from a flat mapping of string settings."""
    try:
        p = int(cfg["p"])
        action = _parse_action(cfg.get("action", "trivial"), p)
        u0 = np.array([float(x) for x in cfg["u0"].replace(",", " ").split()], float)
        A = _parse_matrix(cfg["a"], p)
        f_text = cfg["f"]
    except KeyError as err:
        raise ValueError(f"potential config is missing key {err.args[0]!r}") from err
    if u0.shape != (p,):
        raise ValueError(f"u0 must have {p} entries")
    names = [f"u{i + 1}" for i in range(p)] + ["lambda"]
    F = parse_polynomial(f_text, names)
    grads = [F.diff(i) for i in range(p)]
    hesses = [[g.diff(j) for j in range(p)] for g in grads]

    def value(u, lam):
        u = np.asarray(u, float)
        args = [u[..., i] for i in range(p)] + [np.asarray(lam, float)]
        return F(*args)

    def grad(u, lam):
        u = np.asarray(u, float)
        args = [u[..., i] for i in range(p)] + [np.asarray(lam, float)]
        return np.stack([g(*args) for g in grads], axis=-1)

    def hess(u, lam):
        u = np.asarray(u, float)
        args = [u[..., i] for i in range(p)] + [np.asarray(lam, float)]
        rows = [np.stack([h(*args) for h in row], axis=-1) for row in hesses]
        return np.stack(rows, axis=-2)

    grad_degree = max((g.degree(variables=range(p)) for g in grads), default=0)
    growth = cfg.get("growth_exponent")
    return PotentialSpec(
        name=cfg.get("name", "user"),
        p=p,
        action=action,
        u0=u0,
        value=value,
        grad=grad,
        hess=hess,
        A=A,
        growth_exponent=float(growth) if growth is not None else None,
        grad_degree=grad_degree,
    )


def from_config_file(path) -> PotentialSpec:
    """Read a [potential] section: p, action, u0, A, F, optional metadata."""
    parser = configparser.ConfigParser()
    read = parser.read(path)
    if not read:
        raise ValueError(f"cannot read potential file {path!r}")
    if "potential" not in parser:
        raise ValueError("potential file needs a [potential] section")
    return from_config_dict({k.lower(): v for k, v in parser["potential"].items()})
