"""Pseudo-arclength continuation of symmetric equilibria.

Branches start on the unit ring at a critical charge value, leave it along
the destabilising vertical mode, and are traced by a predictor-corrector:
the predictor steps along the unit tangent of the solution curve in
(coordinates, mu)-space, the corrector runs Newton on the map stacked with
the hyperplane condition E(U) = (U - predictor) . tangent = 0.  Accepted
points can be certified individually as true equilibria at their frozen mu
via the Newton-Kantorovich engine.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .certify import Certificate, CertificationProblem, approx_inverse, certify, default_r_star
from .errors import (
    BifurcationDetected,
    CollisionProximity,
    DomainError,
    NumericsError,
    StepRejected,
)
from .model import ReducedSpace, critical_mu, min_pair_distance, polygon


@dataclass
class ContinuationOptions:
    ds0: float = 1e-3
    eps0: float = 1e-4
    ds_min: float = 1e-8
    ds_max: float = 1e-1
    newton_tol: float = 1e-12
    newton_max_iter: int = 20
    max_points: int = 500
    grow_after: int = 5
    collision_stop: float = 1e-3
    mu_hi_factor: float = 10.0


@dataclass
class BranchPoint:
    """One accepted point: stacked unknowns U = (x, mu), its unit tangent,
    the arclength step used to reach it, and an optional certificate."""

    U: np.ndarray
    tangent: np.ndarray
    step: float
    cert: Optional[Certificate] = None
    flags: list[str] = field(default_factory=list)

    @property
    def x(self) -> np.ndarray:
        return self.U[:-1]

    @property
    def mu(self) -> float:
        return float(self.U[-1])


@dataclass
class Branch:
    n: int
    k: int
    family: int
    direction: str
    points: list[BranchPoint]
    termination: str = "max_points"

    @property
    def space(self) -> ReducedSpace:
        return ReducedSpace(self.n, self.family)


def branch_seed(
    n: int, k: int, family: int, direction: str, eps0: float = 1e-4
) -> BranchPoint:
    """Ring solution at the k-th critical charge value with the tangent set
    to the (signed) vertical kernel mode; mu-component of the tangent is 0."""
    if not (2 <= k <= n / 2):
        raise ValueError(f"mode k must satisfy 2 <= k <= n/2, got k={k}, n={n}")
    if direction not in ("plus", "minus"):
        raise ValueError("direction must be 'plus' or 'minus'")
    space = ReducedSpace(n, family)
    x0 = space.project(polygon(n).reshape(-1))
    mu0 = critical_mu(n, k, mode="float")
    sign = 1.0 if direction == "plus" else -1.0
    tangent = np.concatenate([sign * space.kernel_direction(k), [0.0]])
    return BranchPoint(U=np.concatenate([x0, [mu0]]), tangent=tangent, step=float(eps0))


def tangent_at(space: ReducedSpace, U: np.ndarray, prev_tangent: np.ndarray) -> np.ndarray:
    """Unit null vector of the N x (N+1) branch Jacobian, oriented along the
    previous tangent."""
    x, mu = U[:-1], float(U[-1])
    jac = np.concatenate(
        [space.reduced_jacobian(x, mu), space.reduced_dmu(x)[:, None]], axis=1
    )
    _, sing, vt = np.linalg.svd(jac)
    if sing[-1] < 1e-12 * max(sing[0], 1.0):
        raise BifurcationDetected(
            f"branch Jacobian rank-deficient (sigma_min={sing[-1]:.3e})"
        )
    t = vt[-1]
    if t @ prev_tangent < 0.0:
        t = -t
    return t


def _corrector(
    space: ReducedSpace,
    u_init: np.ndarray,
    tangent: np.ndarray,
    predictor: np.ndarray,
    opts: ContinuationOptions,
) -> np.ndarray:
    u = u_init.copy()
    dim = space.dim
    best = np.inf
    for _ in range(opts.newton_max_iter):
        x, mu = u[:-1], float(u[-1])
        try:
            f_val = space.reduced_map(x, mu)
        except DomainError as exc:
            raise StepRejected(f"corrector left the domain: {exc}") from exc
        g = np.concatenate([[(u - predictor) @ tangent], f_val])
        res = float(np.abs(g).max())
        if res <= opts.newton_tol:
            return u
        if res > 1e3 * max(best, 1.0):
            raise StepRejected(f"corrector diverging (residual {res:.3e})")
        best = min(best, res)
        jac = np.zeros((dim + 1, dim + 1))
        jac[0, :] = tangent
        jac[1:, :-1] = space.reduced_jacobian(x, mu)
        jac[1:, -1] = space.reduced_dmu(x)
        try:
            u = u - np.linalg.solve(jac, g)
        except np.linalg.LinAlgError as exc:
            raise StepRejected(f"corrector Jacobian singular: {exc}") from exc
    raise StepRejected(f"corrector did not reach {opts.newton_tol:g} in "
                       f"{opts.newton_max_iter} iterations")


def predict_correct(
    space: ReducedSpace, point: BranchPoint, ds: float, opts: ContinuationOptions
) -> BranchPoint:
    """One predictor-corrector step of length ds from an accepted point."""
    if ds <= 0.0:
        raise ValueError("step must be positive")
    predictor = point.U + ds * point.tangent
    u_new = _corrector(space, predictor, point.tangent, predictor, opts)
    pos = space.lift(u_new[:-1]).reshape(space.n, 3)
    if min_pair_distance(pos) < opts.collision_stop:
        raise CollisionProximity(
            f"minimal distance {min_pair_distance(pos):.3e} below "
            f"{opts.collision_stop:g}"
        )
    flags: list[str] = []
    try:
        tangent = tangent_at(space, u_new, point.tangent)
    except BifurcationDetected:
        tangent = point.tangent.copy()
        flags.append("tangent_reused_near_singularity")
    return BranchPoint(U=u_new, tangent=tangent, step=ds, flags=flags)


def certify_point(space: ReducedSpace, point: BranchPoint) -> Certificate:
    """Newton-Kantorovich certificate for the equilibrium at frozen mu."""
    x = point.x
    mu = point.mu

    def f_point(xx):
        return space.reduced_map(xx, mu)

    def f_interval(box):
        return space.reduced_map_interval(box, mu)

    def df_interval(box):
        return space.reduced_jacobian_interval(box, mu)

    try:
        residual = float(np.abs(f_point(x)).max())
        a = approx_inverse(space.reduced_jacobian(x, mu))
    except (DomainError, NumericsError) as exc:
        return Certificate(np.inf, np.inf, 0.0, None, False, str(exc))
    prob = CertificationProblem(
        f_point=f_point,
        f_interval=f_interval,
        df_interval=df_interval,
        ubar=x,
        A=a,
        r_star=default_r_star(residual),
    )
    return certify(prob)


def run_branch(
    n: int,
    k: int,
    family: int,
    direction: str,
    opts: Optional[ContinuationOptions] = None,
) -> Branch:
    """Trace one branch from the ring until a termination condition hits.

    Certification is not performed here; see pipeline.run for the full
    certified workflow.
    """
    opts = opts or ContinuationOptions()
    space = ReducedSpace(n, family)
    seed = branch_seed(n, k, family, direction, eps0=opts.eps0)
    branch = Branch(n=n, k=k, family=family, direction=direction, points=[seed])
    ds = opts.eps0
    accepted_since_growth = 0
    current = seed
    while len(branch.points) < opts.max_points:
        try:
            new_point = predict_correct(space, current, ds, opts)
        except StepRejected:
            if ds <= opts.ds_min:
                branch.termination = "step_underflow"
                return branch
            ds = max(ds / 2.0, opts.ds_min)
            continue
        except CollisionProximity:
            branch.termination = "collision_proximity"
            return branch
        branch.points.append(new_point)
        current = new_point
        if not (0.0 < current.mu <= opts.mu_hi_factor * n):
            branch.termination = "parameter_bound"
            return branch
        if len(branch.points) == 2:
            ds = opts.ds0  # seed perturbation done; switch to the step policy
            accepted_since_growth = 0
            continue
        accepted_since_growth += 1
        if accepted_since_growth >= opts.grow_after:
            ds = min(ds * 2.0, opts.ds_max)
            accepted_since_growth = 0
    branch.termination = "max_points"
    return branch


def detect_secondary(space: ReducedSpace, branch: Branch) -> list[tuple[int, int]]:
    """Indices (i, i+1) of consecutive accepted points between which
    det(D_x F) changes sign at frozen mu -- candidate secondary
    bifurcations (folds in mu flip the determinant as well).

    Points that are singular to machine precision (the seed sits exactly on
    a bifurcation) carry an undetermined sign and produce no flag with their
    neighbours.
    """
    signs = []
    for pt in branch.points:
        jac = space.reduced_jacobian(pt.x, pt.mu)
        sign, _ = np.linalg.slogdet(jac)
        sing = np.linalg.svd(jac, compute_uv=False)
        if sing[-1] < 1e-10 * max(sing[0], 1.0):
            sign = 0.0
        signs.append(sign)
    flagged = []
    for i in range(len(signs) - 1):
        if signs[i] * signs[i + 1] < 0.0:
            flagged.append((i, i + 1))
    return flagged


def secondary_seed(
    space: ReducedSpace, branch: Branch, flag: tuple[int, int], eps: float = 1e-4
) -> BranchPoint:
    """Perturbed start for a branch born at a flagged determinant sign
    change: steps off along the near-kernel direction of D_x F."""
    pt = branch.points[flag[1]]
    jac = space.reduced_jacobian(pt.x, pt.mu)
    _, _, vt = np.linalg.svd(jac)
    null_dir = vt[-1]
    tangent = np.concatenate([null_dir, [0.0]])
    return BranchPoint(U=pt.U.copy(), tangent=tangent, step=eps)


def consecutive_ball_overlap_flags(branch: Branch) -> list[int]:
    """Indices whose certified uniqueness ball overlaps the next certified
    point's ball (possible double-counting of the same solution)."""
    flagged = []
    pts = branch.points
    for i in range(len(pts) - 1):
        a, b = pts[i], pts[i + 1]
        if not (a.cert and a.cert.success and b.cert and b.cert.success):
            continue
        gap = float(np.abs(a.U[:-1] - b.U[:-1]).max())
        if gap <= a.cert.r0 + b.cert.r0:
            flagged.append(i)
    return flagged
