"""Spectral Galerkin discretization of -Laplace u = grad F(u, lambda) on the
circle, the 2-sphere, and the disk, with Newton solves, pseudo-arclength
continuation, bifurcation detection on the trivial branch, and branch
switching.

The residual lives in L2-orthonormal coordinates: for basis function e_b with
eigenvalue beta_b and component i,

    residual[b, i] = beta_b c[b, i] - int (grad F(u(x), lambda))_i e_b(x) dx,

with u = u0 + sum c[b, :] e_b.  Nonlinear terms are evaluated pseudo-
spectrally on a quadrature dense enough to kill aliasing for the declared
polynomial degree of the gradient.  Continuous symmetries (component
rotations and domain rotations) are pinned by orthogonality rows appended to
the Newton systems.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import spectral
from .potentials import PotentialSpec
from .spectral import DomainId, Quadrature

__all__ = [
    "NewtonError",
    "NoBranchError",
    "GalerkinProblem",
    "BranchPoint",
    "Branch",
    "build_problem",
    "assemble_residual",
    "jacobian",
    "newton_solve",
    "detect_bifurcation",
    "switch_branch",
    "continue_branch",
    "symmetry_vectors",
    "apply_group_element",
    "discrete_energy",
    "branch_to_csv",
    "branch_to_json",
]

NEWTON_TOL = 1e-10


class NewtonError(RuntimeError):
    """Newton iteration failed to converge."""


class NoBranchError(RuntimeError):
    """Branch switching collapsed back to the trivial family on both sides."""


@dataclass
class GalerkinProblem:
    """Immutable discretization data for one (domain, potential) pair.

    Coefficient layout: c.reshape(n_funcs, p), basis functions ordered
    eigenvalue-major (k ascending, component index j inside), potential
    components innermost.  extra_rotation_generators hold the off-axis
    rotation generators on the 2-sphere (empty on the circle and the disk,
    whose full rotation group is the reference axis).
    """

    domain: DomainId
    spec: PotentialSpec
    eigens: list
    funcs: list  # BasisFunction, flattened over (k, j)
    beta: np.ndarray  # per basis function
    E: np.ndarray  # (n_funcs, n_quad) basis values at quadrature nodes
    quad: Quadrature
    measure: float
    extra_rotation_generators: tuple = ()

    @property
    def n_funcs(self) -> int:
        return len(self.funcs)

    @property
    def p(self) -> int:
        return self.spec.p

    @property
    def n_dof(self) -> int:
        return self.n_funcs * self.p

    def evaluate(self, c) -> np.ndarray:
        """Values of u = u0 + expansion(c) at the quadrature nodes, (nq, p)."""
        C = np.asarray(c, float).reshape(self.n_funcs, self.p)
        return self.spec.u0[None, :] + self.E.T @ C

    def sup_deviation(self, c) -> float:
        """Max euclidean deviation |u(x) - u0| over quadrature nodes."""
        C = np.asarray(c, float).reshape(self.n_funcs, self.p)
        dev = self.E.T @ C
        return float(np.max(np.linalg.norm(dev, axis=1))) if dev.size else 0.0


def build_problem(
    domain: DomainId,
    spec: PotentialSpec,
    truncation: Optional[int] = None,
    beta_cutoff: Optional[float] = None,
) -> GalerkinProblem:
    """Assemble basis and quadrature for a domain/potential pair.

    Defaults: 16 distinct eigenvalues on the circle, spherical-harmonic degree
    8 on the 2-sphere, beta <= 60 on the disk.
    """
    gd = spec.grad_degree or 3
    if domain.kind == "sphere" and domain.dim == 2:
        n = truncation or 16
        eigens = spectral.sphere_spectrum(2, n)
    elif domain.kind == "sphere" and domain.dim == 3:
        n = truncation or 9
        eigens = spectral.sphere_spectrum(3, n)
    elif domain.kind == "ball" and domain.dim == 2:
        cutoff = beta_cutoff or 60.0
        eigens = spectral.ball_neumann_spectrum(2, cutoff)
        if truncation is not None:
            eigens = eigens[:truncation]
    else:
        raise ValueError(f"no Galerkin support on {domain.label}")
    max_l = max(e.angular_degree for e in eigens)
    quad = spectral.default_quadrature(domain, (gd + 1) * max_l)
    funcs = []
    for eig in eigens:
        funcs.extend(spectral.basis(domain, eig.index))
    E = np.stack([f.evaluator(*quad.points) for f in funcs])
    beta = np.array([f.beta for f in funcs])
    extra = ()
    if domain.kind == "sphere" and domain.dim == 3:
        extra = tuple(_sphere_offaxis_generators(funcs, E, quad))
    return GalerkinProblem(
        domain=domain,
        spec=spec,
        eigens=eigens,
        funcs=funcs,
        beta=beta,
        E=E,
        quad=quad,
        measure=domain.measure,
        extra_rotation_generators=extra,
    )


def _sphere_offaxis_generators(funcs, E, quad):
    """Generator matrices of the x- and y-axis rotations on the 2-sphere.

    Rotation of a band-limited state stays band-limited, so the projection of
    the rotated state onto the basis is quadrature-exact; the generator is a
    central difference of these exact rotation matrices.
    """
    theta, phi = quad.points
    pts = np.stack(
        [np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta)], axis=1
    )
    Ew = E * quad.weights[None, :]
    h = 1e-4
    gens = []
    for axis in (0, 1):
        mats = []
        for s in (h, -h):
            R = np.eye(3)
            c, sn = math.cos(s), math.sin(s)
            i, j = (1, 2) if axis == 0 else (2, 0)
            R[i, i] = c
            R[i, j] = -sn
            R[j, i] = sn
            R[j, j] = c
            rot = pts @ R  # R^{-1} x per row
            th2 = np.arccos(np.clip(rot[:, 2], -1.0, 1.0))
            ph2 = np.arctan2(rot[:, 1], rot[:, 0])
            E2 = np.stack([f.evaluator(th2, ph2) for f in funcs])
            mats.append(Ew @ E2.T)
        gens.append((mats[0] - mats[1]) / (2.0 * h))
    return gens


# --------------------------------------------------------------------------
# residual and Jacobian


def assemble_residual(problem: GalerkinProblem, c, lam: float) -> np.ndarray:
    c = np.asarray(c, float)
    if c.size != problem.n_dof:
        raise ValueError(f"coefficient vector must have {problem.n_dof} entries")
    C = c.reshape(problem.n_funcs, problem.p)
    U = problem.evaluate(c)
    G = np.asarray(problem.spec.grad(U, lam), float).reshape(U.shape)
    proj = problem.E @ (problem.quad.weights[:, None] * G)
    return (problem.beta[:, None] * C - proj).ravel()


def jacobian(problem: GalerkinProblem, c, lam: float) -> np.ndarray:
    c = np.asarray(c, float)
    U = problem.evaluate(c)
    H = np.asarray(problem.spec.hess(U, lam), float).reshape(U.shape[0], problem.p, problem.p)
    Ew = problem.E * problem.quad.weights[None, :]
    nf, p = problem.n_funcs, problem.p
    J = np.zeros((nf, p, nf, p))
    for i in range(p):
        for j in range(p):
            J[:, i, :, j] = -Ew @ (H[:, i, j][:, None] * problem.E.T)
    J = J.reshape(problem.n_dof, problem.n_dof)
    J[np.diag_indices_from(J)] += np.repeat(problem.beta, p)
    return J


def _residual_lambda_derivative(problem, c, lam):
    h = 1e-6 * (1.0 + abs(lam))
    rp = assemble_residual(problem, c, lam + h)
    rm = assemble_residual(problem, c, lam - h)
    return (rp - rm) / (2.0 * h)


def discrete_energy(problem: GalerkinProblem, c, lam: float) -> float:
    """Discretized functional: quadratic Dirichlet part minus the potential."""
    c = np.asarray(c, float)
    C = c.reshape(problem.n_funcs, problem.p)
    dirichlet = 0.5 * float(np.sum(problem.beta[:, None] * C * C))
    U = problem.evaluate(c)
    Fv = np.asarray(problem.spec.value(U, lam), float)
    return dirichlet - float(np.dot(problem.quad.weights, Fv))


# --------------------------------------------------------------------------
# symmetry machinery


def _angular_pairs(problem):
    """(cos_row, sin_row, frequency) triples of basis functions that rotate
    into each other under the domain rotation about the reference axis."""
    pairs = []
    row = 0
    for eig in problem.eigens:
        if problem.domain.kind == "sphere" and problem.domain.dim == 2:
            l = eig.angular_degree
            if l > 0:
                pairs.append((row, row + 1, l))
            row += eig.multiplicity
        elif problem.domain.kind == "ball":
            l = eig.angular_degree
            if l > 0:
                pairs.append((row, row + 1, l))
            row += eig.multiplicity
        else:  # 2-sphere: ordering m = 0, (1, cos), (1, sin), (2, cos), ...
            l = eig.angular_degree
            base = row + 1
            for m in range(1, l + 1):
                pairs.append((base, base + 1, m))
                base += 2
            row += eig.multiplicity
    return pairs


def _domain_generator(problem, C):
    out = np.zeros_like(C)
    for cos_row, sin_row, freq in _angular_pairs(problem):
        out[cos_row, :] = -freq * C[sin_row, :]
        out[sin_row, :] = freq * C[cos_row, :]
    return out


def symmetry_vectors(problem: GalerkinProblem, c) -> list[np.ndarray]:
    """Tangent vectors of the continuous-symmetry orbit at coefficients c.

    Component rotations act on the full state u = u0 + v, so their generator
    contributes a constant-block offset for u0 on top of the blockwise
    rotation of v; domain rotations fix constants.  On the 2-sphere the
    off-axis rotation generators are included, so the full rotation group is
    pinned on every supported domain.  Near-zero vectors (directions the
    symmetry fixes) are dropped.
    """
    C = np.asarray(c, float).reshape(problem.n_funcs, problem.p)
    vecs = []
    for g in problem.spec.action.generators():
        v = C @ g.T
        v[0, :] += math.sqrt(problem.measure) * (g @ problem.spec.u0)
        vecs.append(v.ravel())
    vecs.append(_domain_generator(problem, C).ravel())
    for T in problem.extra_rotation_generators:
        vecs.append((T @ C).ravel())
    return [v for v in vecs if np.linalg.norm(v) > 1e-12]


def _pinning_rows(problem, c):
    vecs = symmetry_vectors(problem, c)
    if not vecs:
        return np.zeros((0, problem.n_dof))
    rows = np.stack([v / np.linalg.norm(v) for v in vecs])
    return rows


def _offsym_complement(problem, c):
    rows = _pinning_rows(problem, c)
    if rows.shape[0] == 0:
        return np.eye(problem.n_dof)
    u, s, _ = np.linalg.svd(rows.T, full_matrices=True)
    rank = int(np.sum(s > 1e-10))
    return u[:, rank:]


def min_offsym_singular(problem: GalerkinProblem, c, lam: float) -> float:
    """Smallest singular value of the Jacobian restricted off symmetry
    directions."""
    J = jacobian(problem, c, lam)
    Q = _offsym_complement(problem, c)
    M = Q.T @ J @ Q
    if M.size == 0:
        return 0.0
    return float(np.linalg.svd(M, compute_uv=False)[-1])


# --------------------------------------------------------------------------
# Newton and branch data


@dataclass(frozen=True)
class BranchPoint:
    """One converged solution: sup_norm is the max deviation |u - u0| over
    quadrature nodes."""

    lam: float
    c: np.ndarray
    residual_norm: float
    min_offsym_singular: float
    sup_norm: float


@dataclass
class Branch:
    """A continuation path with its origin and the observed stopping reason."""

    points: list
    origin: tuple  # ("trivial", None) or ("bifurcated", lambda_star)
    termination: Optional[str] = None


def _make_point(problem, c, lam, residual_norm):
    return BranchPoint(
        lam=float(lam),
        c=np.asarray(c, float).copy(),
        residual_norm=float(residual_norm),
        min_offsym_singular=min_offsym_singular(problem, c, lam),
        sup_norm=problem.sup_deviation(c),
    )


def newton_solve(
    problem: GalerkinProblem,
    c0,
    lam: float,
    tol: float = NEWTON_TOL,
    maxit: int = 25,
    pin: bool = True,
) -> BranchPoint:
    """Newton iteration at fixed lambda with symmetry pinning rows appended."""
    c = np.asarray(c0, float).copy()
    if not np.all(np.isfinite(c)):
        raise ValueError("initial guess must be finite")
    for _ in range(maxit):
        r = assemble_residual(problem, c, lam)
        rn = float(np.linalg.norm(r))
        J = jacobian(problem, c, lam)
        if pin:
            rows = _pinning_rows(problem, c)
            A = np.vstack([J, rows])
            b = np.concatenate([-r, np.zeros(rows.shape[0])])
        else:
            A, b = J, -r
        svals = np.linalg.svd(A, compute_uv=False)
        if svals[-1] < 1e-12 * svals[0]:
            raise NewtonError(
                f"singular Jacobian beyond pinning rank at lambda={lam}"
            )
        if rn <= tol:
            return _make_point(problem, c, lam, rn)
        delta, *_ = np.linalg.lstsq(A, b, rcond=None)
        if not np.all(np.isfinite(delta)) or np.linalg.norm(delta) > 1e8 * (1.0 + np.linalg.norm(c)):
            raise NewtonError(f"Newton step diverged at lambda={lam}")
        c = c + delta
    r = assemble_residual(problem, c, lam)
    rn = float(np.linalg.norm(r))
    if rn <= tol:
        return _make_point(problem, c, lam, rn)
    raise NewtonError(f"Newton did not converge at lambda={lam} (residual {rn:.3e})")


# --------------------------------------------------------------------------
# bifurcation detection on the trivial branch


def _morse_index(problem, lam, zero_tol):
    J = jacobian(problem, np.zeros(problem.n_dof), lam)
    Q = _offsym_complement(problem, np.zeros(problem.n_dof))
    M = Q.T @ J @ Q
    vals = np.linalg.eigvalsh(0.5 * (M + M.T))
    return int(np.sum(vals < -zero_tol))


def detect_bifurcation(
    problem: GalerkinProblem,
    window,
    steps: int = 200,
    zero_tol: float = 1e-10,
    refine_tol: float = 1e-9,
) -> list[float]:
    """Levels in the window where an off-symmetry eigenvalue of the
    trivial-branch Jacobian crosses zero, refined by bisection.

    The crossing test is a change of the count of negative eigenvalues, which
    is robust for even-multiplicity crossings; persistent zero modes stay
    outside the count.  Crossings at lambda = 0 are not bifurcation levels and
    are dropped.
    """
    lo, hi = float(window[0]), float(window[1])
    if not hi > lo:
        raise ValueError("window must have positive length")
    if steps < 2:
        raise ValueError("need at least 2 steps")
    grid = list(np.linspace(lo, hi, steps + 1))
    grid = [g if abs(g) > 1e-12 else 1e-12 for g in grid]
    morse = [_morse_index(problem, g, zero_tol) for g in grid]

    found = []

    def refine(a, ma, b, mb):
        if b - a < refine_tol:
            found.append(0.5 * (a + b))
            return
        mid = 0.5 * (a + b)
        mm = _morse_index(problem, mid, zero_tol)
        if mm != ma:
            refine(a, ma, mid, mm)
        if mb != mm:
            refine(mid, mm, b, mb)

    for i in range(len(grid) - 1):
        if morse[i + 1] != morse[i]:
            refine(grid[i], morse[i], grid[i + 1], morse[i + 1])

    out = []
    for lam in sorted(found):
        if abs(lam) < 1e-6:
            continue
        if not out or abs(lam - out[-1]) > 1e-8:
            out.append(lam)
    return out


def _kernel_direction(problem, lam_star):
    J = jacobian(problem, np.zeros(problem.n_dof), lam_star)
    Q = _offsym_complement(problem, np.zeros(problem.n_dof))
    M = Q.T @ J @ Q
    vals, vecs = np.linalg.eigh(0.5 * (M + M.T))
    idx = int(np.argmin(np.abs(vals)))
    v = Q @ vecs[:, idx]
    # scale so the seed function has unit sup deviation
    amp = problem.sup_deviation(v)
    if amp <= 0:
        raise NoBranchError(f"no kernel direction found at lambda={lam_star}")
    return v / amp


def _amplitude_pinned_solve(problem, v, amplitude, lam_star, tol=NEWTON_TOL, maxit=30):
    """Bordered Newton with the kernel-direction amplitude held fixed and
    lambda free; regular at pitchforks where fixed-lambda iterations bounce
    between the mirror branches."""
    vhat = v / np.linalg.norm(v)
    c = amplitude * v
    lam = float(lam_star)
    target = float(np.dot(vhat, c))
    n = problem.n_dof
    for _ in range(maxit):
        r = assemble_residual(problem, c, lam)
        border = float(np.dot(vhat, c)) - target
        if np.linalg.norm(r) <= tol and abs(border) <= tol:
            return _make_point(problem, c, lam, float(np.linalg.norm(r)))
        J = jacobian(problem, c, lam)
        rl = _residual_lambda_derivative(problem, c, lam)
        rows = _pinning_rows(problem, c)
        A = np.zeros((n + rows.shape[0] + 1, n + 1))
        A[:n, :n] = J
        A[:n, n] = rl
        if rows.shape[0]:
            A[n:-1, :n] = rows
        A[-1, :n] = vhat
        b = np.zeros(A.shape[0])
        b[:n] = -r
        b[-1] = -border
        delta, *_ = np.linalg.lstsq(A, b, rcond=None)
        if not np.all(np.isfinite(delta)):
            return None
        c = c + delta[:n]
        lam = lam + delta[n]
        if abs(lam - lam_star) > 0.5 * max(1.0, abs(lam_star)):
            return None
    return None


def switch_branch(
    problem: GalerkinProblem,
    lam_star: float,
    amplitude: float = 0.05,
    offset: Optional[float] = None,
) -> Branch:
    """Seed a bifurcated branch near a detected level.

    The initial guess is amplitude times the normalized kernel direction; a
    Newton correction is attempted at lambda offset on both sides, and the
    side that converges to a nontrivial solution wins.  If both fixed-lambda
    probes collapse to the trivial family (degenerate kernels make them
    fragile), an amplitude-pinned bordered solve locates the branch with
    lambda free.
    """
    if amplitude <= 0.0:
        raise ValueError("amplitude must be positive")
    v = _kernel_direction(problem, lam_star)
    seed = amplitude * v
    if offset is None:
        # first-order location of the branch at the seed amplitude: shift
        # lambda to zero the kernel-direction residual
        r0 = assemble_residual(problem, seed, lam_star)
        rl = _residual_lambda_derivative(problem, seed, lam_star)
        vhat = v / np.linalg.norm(v)
        den = float(np.dot(rl, vhat))
        delta = -float(np.dot(r0, vhat)) / den if abs(den) > 1e-14 else 0.0
        offset = math.copysign(max(abs(delta), 1e-4), delta if delta else 1.0)
    for lam in (lam_star + offset, lam_star - offset):
        try:
            bp = newton_solve(problem, seed, lam)
        except NewtonError:
            continue
        if bp.sup_norm > 0.05 * amplitude:
            return Branch(points=[bp], origin=("bifurcated", float(lam_star)))
    bp = _amplitude_pinned_solve(problem, v, amplitude, lam_star)
    if bp is not None and bp.sup_norm > 0.05 * amplitude and abs(bp.lam - lam_star) > 1e-13:
        return Branch(points=[bp], origin=("bifurcated", float(lam_star)))
    raise NoBranchError(f"no branch captured at lambda_star={lam_star}")


# --------------------------------------------------------------------------
# pseudo-arclength continuation


def _tangent(problem, c, lam, t_prev):
    J = jacobian(problem, c, lam)
    rl = _residual_lambda_derivative(problem, c, lam)
    rows = _pinning_rows(problem, c)
    n = problem.n_dof
    A = np.zeros((n + rows.shape[0] + 1, n + 1))
    A[:n, :n] = J
    A[:n, n] = rl
    if rows.shape[0]:
        A[n:-1, :n] = rows
    A[-1, :] = t_prev
    b = np.zeros(A.shape[0])
    b[-1] = 1.0
    t, *_ = np.linalg.lstsq(A, b, rcond=None)
    nt = np.linalg.norm(t)
    if nt == 0 or not np.all(np.isfinite(t)):
        raise NewtonError("tangent computation failed")
    t = t / nt
    if np.dot(t, t_prev) < 0:
        t = -t
    return t


def _corrector(problem, c_pred, lam_pred, t, ds, base, tol, maxit=12):
    c = c_pred.copy()
    lam = float(lam_pred)
    n = problem.n_dof
    for _ in range(maxit):
        r = assemble_residual(problem, c, lam)
        arc = float(np.dot(t[:n], c - base[0]) + t[n] * (lam - base[1]) - ds)
        if np.linalg.norm(r) <= tol and abs(arc) <= tol * 10:
            return c, lam, float(np.linalg.norm(r))
        J = jacobian(problem, c, lam)
        rl = _residual_lambda_derivative(problem, c, lam)
        rows = _pinning_rows(problem, c)
        A = np.zeros((n + rows.shape[0] + 1, n + 1))
        A[:n, :n] = J
        A[:n, n] = rl
        if rows.shape[0]:
            A[n:-1, :n] = rows
        A[-1, :] = t
        b = np.zeros(A.shape[0])
        b[:n] = -r
        b[-1] = -arc
        delta, *_ = np.linalg.lstsq(A, b, rcond=None)
        if not np.all(np.isfinite(delta)):
            raise NewtonError("corrector step diverged")
        c = c + delta[:n]
        lam = lam + delta[n]
    raise NewtonError("corrector did not converge")


def continue_branch(
    problem: GalerkinProblem,
    seed: Branch,
    lam_limits,
    max_steps: int = 200,
    ds0: float = 0.02,
    ds_min: float = 1e-4,
    ds_max: float = 0.2,
    tol: float = NEWTON_TOL,
) -> Branch:
    """Pseudo-arclength continuation from a seed branch.

    Steps adapt by halving on corrector failure and growing on fast
    convergence; the run stops at the lambda limits, on step underflow, after
    max_steps, or when the branch returns to the trivial family away from its
    origin level ("reconnects-to-trivial").
    """
    lo, hi = float(lam_limits[0]), float(lam_limits[1])
    points = list(seed.points)
    if not points:
        raise ValueError("seed branch has no points")
    origin = seed.origin
    branch = Branch(points=points, origin=origin)
    c = points[-1].c.copy()
    lam = points[-1].lam
    n = problem.n_dof
    if origin[0] == "bifurcated" and origin[1] is not None:
        t_prev = np.concatenate([c, [lam - origin[1]]])
        nt = np.linalg.norm(t_prev)
        t_prev = t_prev / nt if nt > 0 else np.concatenate([np.zeros(n), [1.0]])
    else:
        t_prev = np.concatenate([np.zeros(n), [1.0]])
    ds = ds0
    for _ in range(max_steps):
        try:
            t = _tangent(problem, c, lam, t_prev)
        except NewtonError:
            branch.termination = "tangent-failure"
            return branch
        accepted = False
        while ds >= ds_min:
            c_pred = c + ds * t[:n]
            lam_pred = lam + ds * t[n]
            try:
                c_new, lam_new, rn = _corrector(
                    problem, c_pred, lam_pred, t, ds, (c, lam), tol
                )
                accepted = True
                break
            except NewtonError:
                ds *= 0.5
        if not accepted:
            branch.termination = "step-underflow"
            return branch
        c, lam = c_new, lam_new
        t_prev = t
        bp = _make_point(problem, c, lam, rn)
        branch.points.append(bp)
        ds = min(ds * 1.4, ds_max)
        if lam < lo or lam > hi:
            branch.termination = "lambda-limit"
            return branch
        if origin[0] == "bifurcated" and bp.sup_norm < 1e-7 and abs(lam - origin[1]) > 1e-3:
            branch.termination = "reconnects-to-trivial"
            return branch
    branch.termination = "max-steps"
    return branch


# --------------------------------------------------------------------------
# group action on coefficient vectors (exact, for equivariance checks)


def apply_group_element(
    problem: GalerkinProblem,
    c,
    domain_angle: float = 0.0,
    gamma: Optional[np.ndarray] = None,
    include_shift: bool = True,
) -> np.ndarray:
    """Coefficients of (gamma, rotation) applied to the state u = u0 + v.

    Domain rotation is about the reference axis (the full rotation group on
    the circle and the disk).  With include_shift=False only the linear part
    acts, which is how the residual transforms.
    """
    C = np.asarray(c, float).reshape(problem.n_funcs, problem.p).copy()
    if domain_angle != 0.0:
        out = C.copy()
        for cos_row, sin_row, freq in _angular_pairs(problem):
            ang = freq * domain_angle
            ca, sa = math.cos(ang), math.sin(ang)
            out[cos_row, :] = ca * C[cos_row, :] - sa * C[sin_row, :]
            out[sin_row, :] = sa * C[cos_row, :] + ca * C[sin_row, :]
        C = out
    if gamma is not None:
        gamma = np.asarray(gamma, float)
        C = C @ gamma.T
        if include_shift:
            C[0, :] += math.sqrt(problem.measure) * (gamma @ problem.spec.u0 - problem.spec.u0)
    return C.ravel()


# --------------------------------------------------------------------------
# export


def branch_to_csv(branch: Branch, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["lambda", "sup_norm", "residual_norm", "min_offsym_singular"])
        for bp in branch.points:
            writer.writerow([bp.lam, bp.sup_norm, bp.residual_norm, bp.min_offsym_singular])


def branch_to_json(branch: Branch, include_coefficients: bool = False) -> dict:
    doc = {
        "origin": {"kind": branch.origin[0], "lambda_star": branch.origin[1]},
        "termination": branch.termination,
        "points": [
            {
                "lambda": bp.lam,
                "sup_norm": bp.sup_norm,
                "residual_norm": bp.residual_norm,
                "min_offsym_singular": bp.min_offsym_singular,
            }
            for bp in branch.points
        ],
    }
    if include_coefficients:
        for rec, bp in zip(doc["points"], branch.points):
            rec["coefficients"] = [float(x) for x in bp.c]
    return doc
