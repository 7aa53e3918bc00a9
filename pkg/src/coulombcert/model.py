"""Rotating-frame model of n unit negative charges around a fixed center.

The effective potential in a frame rotating with frequency sqrt(mu - c1),
where c1 is the first critical charge value of the ring, is

    V(u; mu) = (mu - c1)/2 * sum_j |P u_j|^2 + sum_j mu/|u_j|
               - sum_{i<j} 1/|u_j - u_i|

with P the orthogonal projection onto the rotation plane.  The unit ring
(regular n-gon in the plane) is a critical point of V for every mu, and its
vertical mode k destabilises exactly at mu = critical_mu(n, k).  This module
provides:

* critical_mu -- the critical charge values, with certified enclosures;
* polygon / polygon_interval -- the unit ring configuration;
* gradient and Hessian of V, in fast float and in rigorous interval form;
* ReducedSpace -- coordinates on the fixed-point space of the two
  reflection families, with lift/projection and reduced maps;
* the first-order linearisation of the equations of motion at an
  equilibrium, and the sampled first-order normal-mode trajectory.

Point-mode evaluation raises DomainError when charges come within 1e-12 of
a collision; interval mode raises when a distance enclosure touches zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DomainError, SymmetryError
from .intervals import PI, Interval, IntervalArray, imatmul

COLLISION_TOL = 1e-12

# xy-plane projection, infinitesimal xy-rotation, and the two reflections
P_XY = np.diag([1.0, 1.0, 0.0])
J_XY = np.array([[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 0.0]])
R_Y = np.diag([1.0, -1.0, 1.0])
R_Z = np.diag([1.0, 1.0, -1.0])


@dataclass(frozen=True)
class Configuration:
    """Positions of the n charges (flat length-3n vector) plus the central
    charge mu."""

    u: np.ndarray
    mu: float

    @property
    def n(self) -> int:
        return self.u.size // 3

    @property
    def positions(self) -> np.ndarray:
        return self.u.reshape(-1, 3)


# ---------------------------------------------------------------------------
# critical charge values
# ---------------------------------------------------------------------------


@lru_cache(maxsize=None)
def _sin_table(n: int) -> IntervalArray:
    """Enclosures of sin(j*pi/n) for j = 0..n-1, vectorised.

    All arguments lie in [0, pi); writing x = pi/2 + y with |y| <= pi/2 the
    value is cos(y), evaluated by its Taylor series with an explicit
    Lagrange remainder (terms through y^24, remainder y^26/26! < 1e-21).
    """
    j = np.arange(n, dtype=np.float64)
    x = IntervalArray.point(j) * PI / float(n)
    y = x - PI * 0.5
    y2 = y.square()
    p = IntervalArray.point(np.ones(n))
    s = IntervalArray.point(np.zeros(n))
    terms = 13
    inv_fact = Interval(1.0)
    fact = Interval(1.0)
    for m in range(terms):
        if m > 0:
            fact = fact * Interval(float(2 * m - 1)) * Interval(float(2 * m))
            inv_fact = Interval(1.0) / fact
        term = p * inv_fact
        s = s + term if m % 2 == 0 else s - term
        p = p * y2
    fact = fact * Interval(float(2 * terms - 1)) * Interval(float(2 * terms))
    rem = float((p * (Interval(1.0) / fact)).mag().max())
    s = s + Interval(-rem, rem)
    return IntervalArray(np.maximum(s.lo, -1.0), np.minimum(s.hi, 1.0))


@lru_cache(maxsize=None)
def critical_mu_interval(n: int, k: int) -> Interval:
    """Certified enclosure of the k-th critical charge value of the n-ring:

        (1/4) * sum_{j=1}^{n-1} sin(k j pi / n)^2 / sin(j pi / n)^3

    The numerator is reduced exactly through sin((kj mod n) pi / n)^2.
    """
    if not (0 <= k <= n - 1) or n < 2:
        raise ValueError(f"need 0 <= k <= n-1 and n >= 2, got n={n} k={k}")
    tab = _sin_table(n)
    j = np.arange(1, n)
    num = tab[(k * j) % n].square()
    den_s = tab[j]
    den = den_s * den_s * den_s
    terms = num / den
    total = terms.sum(axis=0).scalar()
    return total * Interval(0.25)


def critical_mu(n: int, k: int, mode: str = "interval"):
    """Critical charge value; `mode` selects a certified enclosure or a
    plain float approximation."""
    if mode == "interval":
        return critical_mu_interval(n, k)
    if mode == "float":
        j = np.arange(1, n)
        return 0.25 * float(
            np.sum(np.sin(k * j * np.pi / n) ** 2 / np.sin(j * np.pi / n) ** 3)
        )
    raise ValueError(f"unknown mode {mode!r}")


@lru_cache(maxsize=None)
def _c1_float(n: int) -> float:
    return critical_mu(n, 1, mode="float")


# ---------------------------------------------------------------------------
# the unit ring
# ---------------------------------------------------------------------------


def polygon(n: int) -> np.ndarray:
    """Float positions (n, 3) of the unit ring."""
    if n < 3:
        raise ValueError("need at least 3 charges")
    ang = 2.0 * np.pi * np.arange(n) / n
    return np.stack([np.cos(ang), np.sin(ang), np.zeros(n)], axis=1)


def polygon_interval(n: int) -> IntervalArray:
    """Enclosure (n, 3) of the exact unit-ring positions."""
    if n < 3:
        raise ValueError("need at least 3 charges")
    lo = np.zeros((n, 3))
    hi = np.zeros((n, 3))
    two_pi_over_n = PI * 2.0 / float(n)
    for j in range(n):
        arg = two_pi_over_n * float(j)
        c = arg.cos()
        s = arg.sin()
        lo[j, 0], hi[j, 0] = c.lo, c.hi
        lo[j, 1], hi[j, 1] = s.lo, s.hi
    return IntervalArray(lo, hi)


def polygon_config(n: int, mu: float) -> Configuration:
    return Configuration(u=polygon(n).reshape(-1), mu=float(mu))


def min_pair_distance(pos: np.ndarray) -> float:
    diff = pos[None, :, :] - pos[:, None, :]
    d2 = np.sum(diff**2, axis=2)
    np.fill_diagonal(d2, np.inf)
    return float(np.sqrt(d2.min()))


# ---------------------------------------------------------------------------
# gradient and Hessian of the rotating-frame potential
# ---------------------------------------------------------------------------


def _pair_geometry(pos: np.ndarray):
    n = pos.shape[0]
    diff = pos[None, :, :] - pos[:, None, :]  # diff[i, j] = u_j - u_i
    d2 = np.sum(diff**2, axis=2)
    off = ~np.eye(n, dtype=bool)
    if np.sqrt(d2[off].min()) < COLLISION_TOL:
        raise DomainError("charges in near-collision")
    np.fill_diagonal(d2, 1.0)
    r2 = np.sum(pos**2, axis=1)
    if np.sqrt(r2.min()) < COLLISION_TOL:
        raise DomainError("charge collides with the center")
    return diff, d2, r2


def grad_V(u: np.ndarray, mu: float, n: int) -> np.ndarray:
    """Gradient of V at a float configuration; returns a flat 3n vector."""
    pos = u.reshape(n, 3)
    omega = mu - _c1_float(n)
    diff, d2, r2 = _pair_geometry(pos)
    inv_d3 = d2**-1.5
    np.fill_diagonal(inv_d3, 0.0)
    g = (
        omega * (pos @ P_XY)
        - mu * pos * (r2**-1.5)[:, None]
        + np.sum(diff * inv_d3[:, :, None], axis=0)
    )
    return g.reshape(-1)


def grad_V_interval(u_box: IntervalArray, mu, n: int) -> IntervalArray:
    """Rigorous gradient enclosure over a configuration box (flat 3n)."""
    pos = u_box.reshape(n, 3)
    mu_iv = mu if isinstance(mu, Interval) else Interval(float(mu))
    omega = mu_iv - critical_mu_interval(n, 1)
    diff = pos[None, :, :] - pos[:, None, :]
    d2 = diff.square().sum(axis=2)
    off = ~np.eye(n, dtype=bool)
    if (d2.lo[off] <= 0.0).any():
        raise DomainError("distance enclosure touches a collision")
    d2 = IntervalArray(np.where(off, d2.lo, 1.0), np.where(off, d2.hi, 1.0))
    s = d2.sqrt()
    inv_d3 = 1.0 / (s * d2)
    inv_d3 = IntervalArray(np.where(off, inv_d3.lo, 0.0), np.where(off, inv_d3.hi, 0.0))
    r2 = pos.square().sum(axis=1)
    if (r2.lo <= 0.0).any():
        raise DomainError("distance to the center touches zero")
    inv_r3 = 1.0 / (r2.sqrt() * r2)
    planar = IntervalArray(pos.lo * np.diag(P_XY), pos.hi * np.diag(P_XY))
    g = (
        planar * omega
        - pos * mu_iv * IntervalArray(inv_r3.lo[:, None], inv_r3.hi[:, None])
        + (diff * IntervalArray(inv_d3.lo[:, :, None], inv_d3.hi[:, :, None])).sum(axis=0)
    )
    return g.reshape(-1)


def dgrad_dmu(u: np.ndarray, n: int) -> np.ndarray:
    """Derivative of grad_V with respect to mu (flat 3n, float)."""
    pos = u.reshape(n, 3)
    _, _, r2 = _pair_geometry(pos)
    return ((pos @ P_XY) - pos * (r2**-1.5)[:, None]).reshape(-1)


def hess_V(u: np.ndarray, mu: float, n: int) -> np.ndarray:
    """Hessian of V at a float configuration; (3n, 3n), symmetric."""
    pos = u.reshape(n, 3)
    omega = mu - _c1_float(n)
    diff, d2, r2 = _pair_geometry(pos)
    inv_d3 = d2**-1.5
    inv_d5 = d2**-2.5
    np.fill_diagonal(inv_d3, 0.0)
    np.fill_diagonal(inv_d5, 0.0)
    eye3 = np.eye(3)
    # off-diagonal blocks H[j, i] = -I/d^3 + 3 w w^T / d^5, w = u_j - u_i
    outer = diff[:, :, :, None] * diff[:, :, None, :]
    blocks = -eye3[None, None] * inv_d3[:, :, None, None] + 3.0 * outer * inv_d5[:, :, None, None]
    inv_r3 = r2**-1.5
    inv_r5 = r2**-2.5
    self_outer = pos[:, :, None] * pos[:, None, :]
    diag = (
        omega * P_XY[None]
        - mu * (eye3[None] * inv_r3[:, None, None] - 3.0 * self_outer * inv_r5[:, None, None])
        - np.sum(blocks, axis=0)
    )
    H = blocks.transpose(1, 0, 2, 3).copy()  # H[j, i]
    H[np.arange(n), np.arange(n)] = diag
    return H.transpose(0, 2, 1, 3).reshape(3 * n, 3 * n)


def hess_V_interval(u_box: IntervalArray, mu, n: int) -> IntervalArray:
    """Rigorous Hessian enclosure over a configuration box (flat 3n)."""
    pos = u_box.reshape(n, 3)
    mu_iv = mu if isinstance(mu, Interval) else Interval(float(mu))
    omega = mu_iv - critical_mu_interval(n, 1)
    diff = pos[None, :, :] - pos[:, None, :]
    d2 = diff.square().sum(axis=2)
    off = ~np.eye(n, dtype=bool)
    if (d2.lo[off] <= 0.0).any():
        raise DomainError("distance enclosure touches a collision")
    d2 = IntervalArray(np.where(off, d2.lo, 1.0), np.where(off, d2.hi, 1.0))
    s = d2.sqrt()
    d3 = s * d2
    inv_d3 = 1.0 / d3
    inv_d5 = 1.0 / (d3 * d2)
    mask = off[:, :, None, None]
    eye3 = np.eye(3)
    outer = diff.reshape(n, n, 3, 1) * diff.reshape(n, n, 1, 3)
    b = (
        outer * IntervalArray(inv_d5.lo[:, :, None, None], inv_d5.hi[:, :, None, None]) * 3.0
        - IntervalArray(
            eye3[None, None] * inv_d3.lo[:, :, None, None],
            eye3[None, None] * inv_d3.hi[:, :, None, None],
        )
    )
    blocks = IntervalArray(np.where(mask, b.lo, 0.0), np.where(mask, b.hi, 0.0))
    r2 = pos.square().sum(axis=1)
    if (r2.lo <= 0.0).any():
        raise DomainError("distance to the center touches zero")
    r3 = r2.sqrt() * r2
    inv_r3 = 1.0 / r3
    inv_r5 = 1.0 / (r3 * r2)
    self_outer = pos.reshape(n, 3, 1) * pos.reshape(n, 1, 3)
    center_term = (
        IntervalArray(eye3[None] * inv_r3.lo[:, None, None], eye3[None] * inv_r3.hi[:, None, None])
        - self_outer * IntervalArray(inv_r5.lo[:, None, None], inv_r5.hi[:, None, None]) * 3.0
    )
    diag = (
        IntervalArray(P_XY[None].repeat(n, 0) * 1.0) * omega
        - center_term * mu_iv
        - blocks.sum(axis=0)
    )
    lo = blocks.lo.transpose(1, 0, 2, 3).copy()
    hi = blocks.hi.transpose(1, 0, 2, 3).copy()
    lo[np.arange(n), np.arange(n)] = diag.lo
    hi[np.arange(n), np.arange(n)] = diag.hi
    return IntervalArray(
        lo.transpose(0, 2, 1, 3).reshape(3 * n, 3 * n),
        hi.transpose(0, 2, 1, 3).reshape(3 * n, 3 * n),
    )


# ---------------------------------------------------------------------------
# symmetry operations
# ---------------------------------------------------------------------------


def cyclic_rotation_operator(n: int, steps: int) -> np.ndarray:
    """Matrix of the ring symmetry: shift charge labels by `steps` composed
    with the xy-rotation by the matching angle.  Fixes the unit ring."""
    ang = 2.0 * np.pi * steps / n
    rot = np.array(
        [
            [math.cos(ang), math.sin(ang), 0.0],
            [-math.sin(ang), math.cos(ang), 0.0],
            [0.0, 0.0, 1.0],
        ]
    )
    op = np.zeros((3 * n, 3 * n))
    for j in range(n):
        src = (j + steps) % n
        op[3 * j : 3 * j + 3, 3 * src : 3 * src + 3] = rot
    return op


def cyclic_symmetry_defect(u: np.ndarray, n: int, k: int) -> float:
    """Inf-norm of rho(zeta^(n/h)) u - u with h = gcd(k, n)."""
    h = math.gcd(k, n)
    op = cyclic_rotation_operator(n, n // h)
    return float(np.abs(op @ u - u).max())


def vertical_mode(n: int, k: int) -> np.ndarray:
    """Vertical perturbation mode of the ring (flat 3n): block j carries
    (0, 0, cos(jk*2pi/n)) for k <= n/2 and (0, 0, sin(jk*2pi/n)) above."""
    j = np.arange(n)
    ang = 2.0 * np.pi * k * j / n
    z = np.cos(ang) if 2 * k <= n else np.sin(ang)
    v = np.zeros((n, 3))
    v[:, 2] = z
    return v.reshape(-1)


def orbit_direction(u: np.ndarray) -> np.ndarray:
    """Generator of the planar-rotation orbit through u (flat in, flat out)."""
    pos = u.reshape(-1, 3)
    return (pos @ J_XY.T).reshape(-1)


# ---------------------------------------------------------------------------
# reduced coordinates on the reflection-symmetric subspaces
# ---------------------------------------------------------------------------


class ReducedSpace:
    """Coordinates on the fixed-point space of one reflection family.

    Family 1 pairs charge j with R_y applied to charge n-j, family 2 uses
    R_z R_y.  Charges 0 and (for even n) n/2 are fixed by the reflection, so
    their constrained components are dropped from the coordinates:
    family 1 keeps (x, z) there, family 2 keeps only x.
    """

    def __init__(self, n: int, family: int):
        if family not in (1, 2):
            raise ValueError("family must be 1 or 2")
        if n < 3:
            raise ValueError("need at least 3 charges")
        self.n = n
        self.family = family
        self.half = n // 2
        self.reflection = R_Y if family == 1 else R_Z @ R_Y
        refl_diag = np.diag(self.reflection)
        free: list[tuple[int, int]] = []
        for j in range(self.half + 1):
            boundary = j == 0 or (n % 2 == 0 and j == self.half)
            axes = ((0, 2) if family == 1 else (0,)) if boundary else (0, 1, 2)
            for ax in axes:
                free.append((j, ax))
        self.free = free
        self.dim = len(free)
        lift = np.zeros((3 * n, self.dim))
        for col, (j, ax) in enumerate(free):
            lift[3 * j + ax, col] = 1.0
            mirror = (n - j) % n
            if mirror != j:
                lift[3 * mirror + ax, col] = refl_diag[ax]
        self.lift_matrix = lift
        self.select = np.array([3 * j + ax for j, ax in free])

    # -- lift / project -----------------------------------------------------

    def lift(self, x: np.ndarray) -> np.ndarray:
        return self.lift_matrix @ x

    def lift_interval(self, x_box: IntervalArray) -> IntervalArray:
        return imatmul(self.lift_matrix, x_box)

    def project(self, u: np.ndarray, atol: float = 1e-9) -> np.ndarray:
        self.check_symmetry(u, atol=atol)
        return u[self.select]

    def check_symmetry(self, u: np.ndarray, atol: float = 1e-9) -> None:
        pos = u.reshape(self.n, 3)
        for j in range(self.n):
            mirrored = self.reflection @ pos[(self.n - j) % self.n]
            if np.abs(pos[j] - mirrored).max() > atol:
                raise SymmetryError(
                    f"charge {j} violates family-{self.family} reflection by "
                    f"{np.abs(pos[j] - mirrored).max():.3e}"
                )

    # -- reduced maps ---------------------------------------------------------

    def reduced_map(self, x: np.ndarray, mu: float) -> np.ndarray:
        return grad_V(self.lift(x), mu, self.n)[self.select]

    def reduced_map_interval(self, x_box: IntervalArray, mu) -> IntervalArray:
        g = grad_V_interval(self.lift_interval(x_box), mu, self.n)
        return g[self.select]

    def reduced_map_direct(self, x: np.ndarray, mu: float) -> np.ndarray:
        """Explicit half-range sums; cross-checked against reduced_map."""
        n, half = self.n, self.half
        pos = self.lift(x).reshape(n, 3)[: half + 1]
        omega = mu - _c1_float(n)
        out = np.zeros_like(pos)
        for j in range(half + 1):
            pj = pos[j]
            rj = np.linalg.norm(pj)
            acc = omega * (P_XY @ pj) - mu * pj / rj**3
            for i in range(half + 1):
                if i == j:
                    continue
                w = pj - pos[i]
                acc += w / np.linalg.norm(w) ** 3
            for i in range(1, (n - 1) // 2 + 1):
                if n % 2 == 0 and i == half:
                    continue
                w = pj - self.reflection @ pos[i]
                acc += w / np.linalg.norm(w) ** 3
            out[j] = acc
        full = np.zeros(3 * n)
        full[: 3 * (half + 1)] = out.reshape(-1)
        return full[self.select]

    def reduced_jacobian(self, x: np.ndarray, mu: float) -> np.ndarray:
        h = hess_V(self.lift(x), mu, self.n)
        return (h @ self.lift_matrix)[self.select]

    def reduced_jacobian_interval(self, x_box: IntervalArray, mu) -> IntervalArray:
        h = hess_V_interval(self.lift_interval(x_box), mu, self.n)
        return imatmul(h, self.lift_matrix)[self.select]

    def reduced_dmu(self, x: np.ndarray) -> np.ndarray:
        return dgrad_dmu(self.lift(x), self.n)[self.select]

    def kernel_direction(self, k: int) -> np.ndarray:
        """Unit restriction of the destabilising vertical mode to the reduced
        space; raises if the mode is incompatible with the family."""
        n = self.n
        j = np.arange(n)
        ang = 2.0 * np.pi * k * j / n
        z = np.cos(ang) if self.family == 1 else np.sin(ang)
        v = np.zeros((n, 3))
        v[:, 2] = z
        flat = v.reshape(-1)
        x = flat[self.select]
        nrm = np.linalg.norm(x)
        if nrm < 1e-9:
            raise SymmetryError(
                f"vertical mode k={k} has no component in family {self.family}"
            )
        # the mode must genuinely live in the fixed-point space
        if np.abs(self.lift(x / nrm) - flat / nrm).max() > 1e-12:
            raise SymmetryError(
                f"vertical mode k={k} is not invariant under family {self.family}"
            )
        return x / nrm


# ---------------------------------------------------------------------------
# linearisation and normal modes
# ---------------------------------------------------------------------------


def _rotation_generator_big(n: int) -> np.ndarray:
    return np.kron(np.eye(n), J_XY)


def linearization(u: np.ndarray, mu: float, n: int) -> np.ndarray:
    """First-order system matrix at an equilibrium: positions stacked over
    velocities, with the Coriolis block -2*sqrt(mu - c1) * J."""
    c1 = _c1_float(n)
    if mu <= c1:
        raise DomainError(f"mu = {mu} not above the first critical value {c1}")
    h = hess_V(u, mu, n)
    m = np.zeros((6 * n, 6 * n))
    m[: 3 * n, 3 * n :] = np.eye(3 * n)
    m[3 * n :, : 3 * n] = h
    m[3 * n :, 3 * n :] = -2.0 * math.sqrt(mu - c1) * _rotation_generator_big(n)
    return m


def linearization_interval(u_box: IntervalArray, mu, n: int) -> IntervalArray:
    mu_iv = mu if isinstance(mu, Interval) else Interval(float(mu))
    gap = mu_iv - critical_mu_interval(n, 1)
    if gap.lo <= 0.0:
        raise DomainError("mu enclosure not above the first critical value")
    coriolis = Interval(-2.0) * gap.sqrt()
    h = hess_V_interval(u_box, mu, n)
    jbig = _rotation_generator_big(n)
    lo = np.zeros((6 * n, 6 * n))
    hi = np.zeros((6 * n, 6 * n))
    lo[: 3 * n, 3 * n :] = np.eye(3 * n)
    hi[: 3 * n, 3 * n :] = np.eye(3 * n)
    lo[3 * n :, : 3 * n] = h.lo
    hi[3 * n :, : 3 * n] = h.hi
    block = IntervalArray(jbig) * coriolis
    lo[3 * n :, 3 * n :] = block.lo
    hi[3 * n :, 3 * n :] = block.hi
    return IntervalArray(lo, hi)


def normal_mode_expansion(
    u0: np.ndarray, nu0: float, eigvec: np.ndarray, eps: float, samples: int
) -> np.ndarray:
    """First-order periodic trajectory u0 + eps*Re(exp(i nu0 t) w), sampled
    inclusively over one period; returns (samples, n, 3).  Plot output only,
    evaluated in plain floats."""
    n = u0.size // 3
    t = np.linspace(0.0, 2.0 * np.pi / nu0, samples)
    phase = np.exp(1j * nu0 * t)
    traj = u0[None, :] + eps * np.real(phase[:, None] * eigvec[None, :])
    return traj.reshape(samples, n, 3)
