"""Certified spectra of the equilibrium linearisation.

At a certified equilibrium the 6n x 6n first-order system matrix is
evaluated over the uncertainty box of the equilibrium, each numerically
computed eigenpair is anchored by a phase condition on its largest
eigenvector component and certified as the unique nearby zero of

    (L v - lambda v, v . e_k - anchor) = 0

realified to dimension 2(6n+1).  A certified disk around a numerically
imaginary eigenvalue is promoted to a genuine frequency on the imaginary
axis by a disk-counting argument, and the rotational-nonresonance condition
(no integer multiple i*l*nu0, l >= 2, meets the spectrum; i*nu0 simple) is
then checked rigorously against the certified disk layout.

The double zero eigenvalue coming from the planar rotation group is not
certified through the phase-anchored map (which is singular there):
the orbit-direction kernel vector is checked to lie in the kernel of the
interval linearisation, the remaining 6n-2 disks are checked to exclude
zero, and the count zero_count = 2 is recorded as the structural input it
is.  Frequency simplicity and the finiteness of the multiple check both
rest on that partition.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .certify import CertificationProblem, approx_inverse, certify, default_r_star
from .errors import DomainError, EigValidationFailed, NumericsError, PromotionFailed
from .intervals import SQRT2, Interval, IntervalArray, imatmul, _dn, _up, _dn_arr, _up_arr
from .model import ReducedSpace, linearization, linearization_interval, orbit_direction

# The rotational double zero is defective, so eigensolvers report it as a
# conjugate pair of size sqrt(machine eps * |L|) ~ 1e-7; the tolerance must
# sit above that and far below the first genuine frequency.
ZERO_MODE_TOL = 1e-6


@dataclass
class EigenPair:
    """Numerical eigenvalue/eigenvector with a frozen phase anchor."""

    lam: complex
    v: np.ndarray
    anchor: int
    anchor_value: complex

    @classmethod
    def from_raw(cls, lam: complex, v: np.ndarray) -> "EigenPair":
        anchor = int(np.argmax(np.abs(v)))
        return cls(lam=complex(lam), v=v, anchor=anchor, anchor_value=complex(v[anchor]))


def _hypot_interval(a: Interval, b: Interval) -> Interval:
    """Enclosure of sqrt(a^2 + b^2); the sum of squares is clamped at zero
    so outward rounding of exact zeros cannot leave the sqrt domain."""
    s = a.square() + b.square()
    return Interval(max(s.lo, 0.0), max(s.hi, 0.0)).sqrt()


@dataclass(frozen=True)
class Disk:
    """Complex disk certified to contain one true eigenvalue."""

    center: complex
    radius: float

    def abs_center(self) -> Interval:
        return _hypot_interval(Interval(self.center.real), Interval(self.center.imag))


def certainly_disjoint(a: Disk, b: Disk) -> bool:
    """True only when |centers| distance provably exceeds the radii sum."""
    dre = Interval(a.center.real) - Interval(b.center.real)
    dim = Interval(a.center.imag) - Interval(b.center.imag)
    dist = _hypot_interval(dre, dim)
    return dist.lo > (Interval(a.radius) + Interval(b.radius)).hi


def certainly_excludes_zero(d: Disk) -> bool:
    return d.abs_center().lo > Interval(d.radius).hi


@dataclass
class SpectralCertificate:
    """Certified rotationally-nonresonant frequency candidate."""

    nu_lo: float
    nu_hi: float
    disk_pos: Disk
    disk_neg: Disk
    others: list[Disk]
    nonresonant: bool
    max_multiple_checked: int
    zero_count: int = 2
    detail: str = ""


@dataclass
class SpectralResult:
    """Everything the spectral stage established at one equilibrium."""

    status: str  # certified_nonresonant | nonresonance_unverified | eig_unverified
    disks: list[Disk] = field(default_factory=list)
    certificates: list[SpectralCertificate] = field(default_factory=list)
    zero_audit_ok: bool = False
    unstable_disks: int = 0
    failures: list[str] = field(default_factory=list)
    diagnostics: str = ""

    @property
    def nonresonant_frequencies(self) -> list[tuple[float, float]]:
        return [(c.nu_lo, c.nu_hi) for c in self.certificates if c.nonresonant]


def numeric_spectrum(l_matrix: np.ndarray) -> list[EigenPair]:
    """Dense eigendecomposition; pairs sorted by |Im|, then Re, then Im."""
    if not np.isfinite(l_matrix).all():
        raise NumericsError("linearisation matrix has non-finite entries")
    try:
        vals, vecs = np.linalg.eig(l_matrix)
    except np.linalg.LinAlgError as exc:
        raise NumericsError(f"eigensolver failed: {exc}") from exc
    order = sorted(
        range(len(vals)),
        key=lambda i: (abs(vals[i].imag), vals[i].real, vals[i].imag),
    )
    return [EigenPair.from_raw(vals[i], vecs[:, i]) for i in order]


def zero_mode_indices(pairs: list[EigenPair]) -> tuple[int, int]:
    """Indices of the two smallest-magnitude eigenvalues (the rotation-group
    zero modes)."""
    mags = [abs(p.lam) for p in pairs]
    order = sorted(range(len(pairs)), key=lambda i: mags[i])
    return order[0], order[1]


class _EigenSystem:
    """Realified phase-anchored eigenproblem for one pair.

    Unknowns X = [Re v, Im v, Re lambda, Im lambda], maps assembled with the
    interval linearisation so that certificates hold for every equilibrium
    inside its uncertainty box.
    """

    def __init__(self, l_box: IntervalArray, l_mid: np.ndarray, pair: EigenPair):
        self.l_box = l_box
        self.l_mid = l_mid
        self.m = l_mid.shape[0]
        self.pair = pair

    def xbar(self) -> np.ndarray:
        p = self.pair
        return np.concatenate([p.v.real, p.v.imag, [p.lam.real], [p.lam.imag]])

    def _split(self, x):
        m = self.m
        return x[:m], x[m : 2 * m], x[2 * m], x[2 * m + 1]

    def f_point(self, x: np.ndarray) -> np.ndarray:
        vre, vim, lre, lim = self._split(x)
        p = self.pair
        top = self.l_mid @ vre - lre * vre + lim * vim
        mid = self.l_mid @ vim - lre * vim - lim * vre
        return np.concatenate(
            [top, mid, [vre[p.anchor] - p.anchor_value.real, vim[p.anchor] - p.anchor_value.imag]]
        )

    def f_interval(self, box: IntervalArray) -> IntervalArray:
        m = self.m
        p = self.pair
        vre = box[np.arange(m)]
        vim = box[np.arange(m, 2 * m)]
        lre = box.item(2 * m)
        lim = box.item(2 * m + 1)
        top = imatmul(self.l_box, vre) - vre * lre + vim * lim
        mid = imatmul(self.l_box, vim) - vim * lre - vre * lim
        ph_re = vre.item(p.anchor) - Interval(p.anchor_value.real)
        ph_im = vim.item(p.anchor) - Interval(p.anchor_value.imag)
        lo = np.concatenate([top.lo, mid.lo, [ph_re.lo, ph_im.lo]])
        hi = np.concatenate([top.hi, mid.hi, [ph_re.hi, ph_im.hi]])
        return IntervalArray(lo, hi)

    def df_point(self, x: np.ndarray) -> np.ndarray:
        vre, vim, lre, lim = self._split(x)
        m = self.m
        d = 2 * m + 2
        jac = np.zeros((d, d))
        eye = np.eye(m)
        jac[:m, :m] = self.l_mid - lre * eye
        jac[:m, m : 2 * m] = lim * eye
        jac[:m, 2 * m] = -vre
        jac[:m, 2 * m + 1] = vim
        jac[m : 2 * m, :m] = -lim * eye
        jac[m : 2 * m, m : 2 * m] = self.l_mid - lre * eye
        jac[m : 2 * m, 2 * m] = -vim
        jac[m : 2 * m, 2 * m + 1] = -vre
        jac[2 * m, self.pair.anchor] = 1.0
        jac[2 * m + 1, m + self.pair.anchor] = 1.0
        return jac

    def df_interval(self, box: IntervalArray) -> IntervalArray:
        m = self.m
        d = 2 * m + 2
        vre_lo, vre_hi = box.lo[:m], box.hi[:m]
        vim_lo, vim_hi = box.lo[m : 2 * m], box.hi[m : 2 * m]
        lre = box.item(2 * m)
        lim = box.item(2 * m + 1)
        lo = np.zeros((d, d))
        hi = np.zeros((d, d))
        lo[:m, :m] = self.l_box.lo
        hi[:m, :m] = self.l_box.hi
        lo[m : 2 * m, m : 2 * m] = self.l_box.lo
        hi[m : 2 * m, m : 2 * m] = self.l_box.hi
        idx = np.arange(2 * m)
        lo[idx, idx] = _dn_arr(lo[idx, idx] - lre.hi)
        hi[idx, idx] = _up_arr(hi[idx, idx] - lre.lo)
        i1 = np.arange(m)
        lo[i1, m + i1] = lim.lo
        hi[i1, m + i1] = lim.hi
        lo[m + i1, i1] = -lim.hi
        hi[m + i1, i1] = -lim.lo
        lo[:m, 2 * m] = -vre_hi
        hi[:m, 2 * m] = -vre_lo
        lo[:m, 2 * m + 1] = vim_lo
        hi[:m, 2 * m + 1] = vim_hi
        lo[m : 2 * m, 2 * m] = -vim_hi
        hi[m : 2 * m, 2 * m] = -vim_lo
        lo[m : 2 * m, 2 * m + 1] = -vre_hi
        hi[m : 2 * m, 2 * m + 1] = -vre_lo
        lo[2 * m, self.pair.anchor] = 1.0
        hi[2 * m, self.pair.anchor] = 1.0
        lo[2 * m + 1, m + self.pair.anchor] = 1.0
        hi[2 * m + 1, m + self.pair.anchor] = 1.0
        return IntervalArray(lo, hi)


def validate_eigenpair(
    l_box: IntervalArray,
    l_mid: np.ndarray,
    pair: EigenPair,
    r_star: Optional[float] = None,
) -> tuple[Disk, object]:
    """Certify one phase-anchored eigenpair; returns the eigenvalue disk.

    The certified ball has radius r0 in the componentwise max norm over the
    realified unknowns, so the eigenvalue lies within r0*sqrt(2) of its
    numerical value.
    """
    if abs(pair.anchor_value) == 0.0:
        raise EigValidationFailed("anchor component vanishes")
    system = _EigenSystem(l_box, l_mid, pair)
    xbar = system.xbar()
    try:
        a = approx_inverse(system.df_point(xbar))
    except NumericsError as exc:
        raise EigValidationFailed(f"anchored Jacobian singular: {exc}") from exc
    residual = system.f_interval(IntervalArray.point(xbar)).norm_inf().hi
    prob = CertificationProblem(
        f_point=system.f_point,
        f_interval=system.f_interval,
        df_interval=system.df_interval,
        ubar=xbar,
        A=a,
        r_star=r_star if r_star is not None else default_r_star(residual),
    )
    cert = certify(prob)
    if not cert.success:
        raise EigValidationFailed(
            f"eigenpair at {pair.lam:.6g} not certified: {cert.diagnostics}"
        )
    radius = (Interval(cert.r0) * SQRT2).hi
    return Disk(center=pair.lam, radius=radius), cert


def kernel_mode_audit(l_box: IntervalArray, u_bar: np.ndarray) -> bool:
    """Check that the rotation-orbit direction lies in the kernel of the
    interval linearisation (position block of the kernel vector)."""
    w = orbit_direction(u_bar)
    vec = np.concatenate([w, np.zeros_like(w)])
    image = imatmul(l_box, vec)
    return image.contains(np.zeros(len(vec)))


def promote_imaginary(d_pos: Disk, d_neg: Disk, others: list[Disk]) -> Interval:
    """Promote a certified disk to a purely imaginary frequency enclosure.

    Eigenvalues of the real Hamiltonian-type linearisation close under both
    z -> -conj(z) and z -> conj(z); with every eigenvalue pinned to the
    certified disk partition, isolation of the two mirrors of d_pos forces
    the enclosed eigenvalue onto the imaginary axis and its conjugate into
    d_neg.
    """
    c, r = d_pos.center, d_pos.radius
    if not (Interval(c.imag) - Interval(r)).lo > 0.0:
        raise PromotionFailed("disk touches the real axis")
    # the imaginary-axis mirror must certifiably overlap the disk itself ...
    if not (Interval(2.0) * Interval(abs(c.real))).hi <= (Interval(2.0) * Interval(r)).lo:
        raise PromotionFailed("disk does not overlap its imaginary-axis mirror")
    mirror_im = Disk(center=complex(-c.real, c.imag), radius=r)
    mirror_re = Disk(center=complex(c.real, -c.imag), radius=r)
    # ... and be isolated from every other disk, pinning -conj(lam) to d_pos
    for other in [d_neg, *others]:
        if not certainly_disjoint(mirror_im, other):
            raise PromotionFailed(
                f"imaginary-axis mirror meets the disk at {other.center:.6g}"
            )
    # the real-axis mirror pins conj(lam) = -i*nu to d_neg
    for other in others:
        if not certainly_disjoint(mirror_re, other):
            raise PromotionFailed(
                f"real-axis mirror meets the disk at {other.center:.6g}"
            )
    return Interval(_dn(c.imag - r), _up(c.imag + r))


def check_nonresonance(
    nu: Interval, d_pos: Disk, d_neg: Disk, others: list[Disk]
) -> tuple[bool, int, str]:
    """Simplicity of the frequency plus exclusion of all integer multiples.

    Returns (ok, max multiple checked, detail).  Only finitely many
    multiples can meet the bounded disk layout; the bound is recorded.
    """
    for other in [d_neg, *others]:
        if not certainly_disjoint(d_pos, other):
            return False, 0, f"frequency disk meets the disk at {other.center:.6g}"
    all_disks = [d_pos, d_neg, *others]
    reach = 0.0
    for d in all_disks:
        reach = max(reach, _up((d.abs_center() + Interval(d.radius)).hi))
    l_max = int(math.ceil(reach / nu.lo)) + 1
    for ell in range(2, l_max + 1):
        seg = Interval(float(ell)) * nu  # i*ell*nu sweeps {i t : t in seg}
        for d in all_disks:
            gap_im = max(_dn(seg.lo - d.center.imag), _dn(d.center.imag - seg.hi), 0.0)
            dist = _hypot_interval(Interval(d.center.real), Interval(gap_im))
            if not dist.lo > Interval(d.radius).hi:
                return False, ell, (
                    f"multiple {ell}*nu0 meets the disk at {d.center:.6g}"
                )
    return True, l_max, ""


@dataclass
class SpectralOptions:
    cluster_shrink: bool = True
    zero_mode_tol: float = ZERO_MODE_TOL


def spectral_pipeline(
    space: ReducedSpace,
    x: np.ndarray,
    mu: float,
    r0: float,
    opts: Optional[SpectralOptions] = None,
) -> SpectralResult:
    """Full spectral stage at one certified equilibrium.

    Assembles the linearisation over the equilibrium box of radius r0,
    validates every non-zero-mode eigenpair, promotes each numerically
    imaginary candidate and reports every frequency that passes the
    nonresonance check.
    """
    opts = opts or SpectralOptions()
    n = space.n
    u_bar = space.lift(x)
    u_box = IntervalArray.box(u_bar, r0)
    try:
        l_box = linearization_interval(u_box, mu, n)
        l_mid = linearization(u_bar, mu, n)
    except DomainError as exc:
        return SpectralResult(status="eig_unverified", diagnostics=str(exc))
    pairs = numeric_spectrum(l_mid)
    z0, z1 = zero_mode_indices(pairs)
    zero_sized = sum(1 for p in pairs if abs(p.lam) <= opts.zero_mode_tol)
    audit_ok = kernel_mode_audit(l_box, u_bar) and zero_sized == 2

    vals = np.array([p.lam for p in pairs])
    disks: list[Disk] = []
    failures: list[str] = []
    for idx, pair in enumerate(pairs):
        if idx in (z0, z1):
            continue
        gaps = np.abs(vals - pair.lam)
        gaps[idx] = np.inf
        gap = float(gaps.min())
        r_star = None
        if opts.cluster_shrink and gap < 4e-6:
            r_star = max(gap / 4.0, 1e-12)
        try:
            disk, _ = validate_eigenpair(l_box, l_mid, pair, r_star=r_star)
            disks.append(disk)
        except EigValidationFailed as exc:
            failures.append(str(exc))

    if failures or not audit_ok:
        diag = "; ".join(failures[:3])
        if not audit_ok:
            diag = f"zero-mode audit failed ({zero_sized} small eigenvalues); " + diag
        return SpectralResult(
            status="eig_unverified",
            disks=disks,
            zero_audit_ok=audit_ok,
            failures=failures,
            unstable_disks=_count_unstable(disks),
            diagnostics=diag,
        )

    zero_excluded = all(certainly_excludes_zero(d) for d in disks)
    certificates: list[SpectralCertificate] = []
    for i, d in enumerate(disks):
        if d.center.imag <= 0.0:
            continue
        conj_center = complex(d.center.real, -d.center.imag)
        partner = min(
            (j for j in range(len(disks)) if j != i),
            key=lambda j: abs(disks[j].center - conj_center),
        )
        rest = [disks[j] for j in range(len(disks)) if j not in (i, partner)]
        if not zero_excluded:
            break
        try:
            nu = promote_imaginary(d, disks[partner], rest)
        except PromotionFailed:
            continue
        ok, l_max, detail = check_nonresonance(nu, d, disks[partner], rest)
        certificates.append(
            SpectralCertificate(
                nu_lo=nu.lo,
                nu_hi=nu.hi,
                disk_pos=d,
                disk_neg=disks[partner],
                others=rest,
                nonresonant=ok,
                max_multiple_checked=l_max,
                detail=detail,
            )
        )

    any_ok = any(c.nonresonant for c in certificates)
    status = "certified_nonresonant" if any_ok else "nonresonance_unverified"
    diag = "" if zero_excluded else "a certified disk may contain zero"
    return SpectralResult(
        status=status,
        disks=disks,
        certificates=certificates,
        zero_audit_ok=audit_ok,
        unstable_disks=_count_unstable(disks),
        failures=[],
        diagnostics=diag,
    )


def _count_unstable(disks: list[Disk]) -> int:
    """Diagnostic count of disks certainly in the open right half plane."""
    return sum(1 for d in disks if (Interval(d.center.real) - Interval(d.radius)).lo > 0.0)
