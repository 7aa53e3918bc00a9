"""Newton-Kantorovich certification of approximate zeros.

Given an approximate zero ubar of F: R^N -> R^N, an approximate inverse A
of DF(ubar) and interval extensions of F and DF, the engine computes

    Y >= |A F(ubar)|_inf
    Z >= sup over the box [ubar - r*, ubar + r*] of |I - A DF(.)|_inf

and, when the radii polynomial p(r) = (Z - 1) r + Y is negative at some
r0 in (0, r*], certifies a unique true zero within r0 of ubar (in the
infinity norm, so the uniqueness ball is a coordinate box).  Failure is a
value, not an exception: the returned certificate names the inequality
that could not be established.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import DomainError, NumericsError
from .intervals import Interval, IntervalArray, imatmul, induced_norm_inf, _up

# Smallest radius ever proposed; p(r) = (Z-1)r + Y needs r > 0 even when Y = 0.
_MIN_RADIUS = 1e-300


@dataclass
class CertificationProblem:
    """A square zero-finding problem prepared for certification."""

    f_point: Callable[[np.ndarray], np.ndarray]
    f_interval: Callable[[IntervalArray], IntervalArray]
    df_interval: Callable[[IntervalArray], IntervalArray]
    ubar: np.ndarray
    A: np.ndarray
    r_star: float

    def __post_init__(self):
        if not np.isfinite(self.A).all():
            raise NumericsError("approximate inverse has non-finite entries")
        if not self.r_star > 0.0:
            raise ValueError("r_star must be positive")


@dataclass
class Certificate:
    """Outcome of one certification attempt."""

    Y: float
    Z: float
    r_star: float
    r0: Optional[float]
    success: bool
    diagnostics: str = ""

    def as_record(self) -> dict:
        return {
            "Y": self.Y,
            "Z": self.Z,
            "r_star": self.r_star,
            "r0": self.r0,
            "success": self.success,
        }


def approx_inverse(j: np.ndarray) -> np.ndarray:
    """Floating-point inverse; rigour comes from the Z bound, not from here."""
    try:
        a = np.linalg.inv(j)
    except np.linalg.LinAlgError as exc:
        raise NumericsError(f"Jacobian numerically singular: {exc}") from exc
    if not np.isfinite(a).all():
        raise NumericsError("Jacobian inverse has non-finite entries")
    return a


def default_r_star(residual: float) -> float:
    return max(1e-6, 100.0 * residual)


def bound_Y(prob: CertificationProblem) -> float:
    """Rigorous upper bound of |A F(ubar)|_inf."""
    f_enc = prob.f_interval(IntervalArray.point(prob.ubar))
    return imatmul(prob.A, f_enc).norm_inf().hi


def bound_Z(prob: CertificationProblem, r_star: Optional[float] = None) -> float:
    """Rigorous upper bound of sup |I - A DF(z)|_inf over the r*-box."""
    r = prob.r_star if r_star is None else r_star
    box = IntervalArray.box(prob.ubar, r)
    df = prob.df_interval(box)
    residual = IntervalArray.point(np.eye(len(prob.ubar))) - imatmul(prob.A, df)
    return induced_norm_inf(residual).hi


def certify(prob: CertificationProblem) -> Certificate:
    """Run the radii-polynomial check; retries once with r*/10 if Z >= 1.

    The verified radius is the near-minimal one (Y/(1-Z) inflated by 1%),
    which keeps downstream disk bookkeeping tight; the final inequality
    p(r0) < 0 is re-verified in interval arithmetic before success is
    claimed.
    """
    try:
        y = bound_Y(prob)
    except DomainError as exc:
        return Certificate(np.inf, np.inf, prob.r_star, None, False, f"Y bound failed: {exc}")

    z = np.inf
    r_used = prob.r_star
    diag = ""
    for r_try in (prob.r_star, prob.r_star / 10.0):
        r_used = r_try
        try:
            z = bound_Z(prob, r_try)
        except DomainError as exc:
            diag = f"Z bound failed on r*={r_try:g}: {exc}"
            continue
        if z < 1.0:
            break
        diag = f"Z >= 1 (Z={z:.6g} at r*={r_try:g})"
    if not z < 1.0:
        return Certificate(y, z, r_used, None, False, diag or "Z >= 1")

    quotient = Interval(y) / (Interval(1.0) - Interval(z))
    r0 = min(r_used, max(_up(quotient.hi * 1.01), _MIN_RADIUS))
    p = (Interval(z) - Interval(1.0)) * Interval(r0) + Interval(y)
    if p.hi < 0.0 and 0.0 < r0 <= r_used:
        return Certificate(y, z, r_used, r0, True, "")
    return Certificate(
        y, z, r_used, None, False,
        f"radii polynomial has no root in (0, r*] (Y={y:.3e}, Z={z:.6g}, r*={r_used:g})",
    )


def recheck(y: float, z: float, r0: float) -> bool:
    """Re-verify a stored certificate's final inequality in intervals."""
    if not (z < 1.0 and r0 > 0.0):
        return False
    p = (Interval(z) - Interval(1.0)) * Interval(r0) + Interval(y)
    return p.hi < 0.0
