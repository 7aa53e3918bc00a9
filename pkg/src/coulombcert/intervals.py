"""Self-contained outward-rounded interval arithmetic.

Every rigorous statement made by this package reduces to the enclosures
produced here, so the rounding contract is spelled out once and applies
everywhere:

* Floats are IEEE-754 binary64 evaluated in the default round-to-nearest
  mode.  The FPU state is never altered, every operation is pure, and the
  scheme is therefore state-free and thread-safe.
* A single float operation (+, -, *, /, sqrt) returns the correctly rounded
  image of the exact value, so the exact value lies within one ulp of the
  computed float.  Elementary interval operations widen each endpoint by one
  ``nextafter`` step.
* Accumulated operations (sums along an axis, dot products, BLAS matrix
  products) are bounded by the standard backward-error term
  gamma_m = m*u / (1 - m*u) with u = 2^-53, evaluated with extra slack so
  that the float evaluation of the bound itself is covered (see ``_gamma``).
  This assumes the BLAS in use evaluates plain inner products -- any
  summation order and FMA are fine, Strassen-type algorithms are not.
* ``sin``/``cos`` are evaluated from their Taylor series with an explicit
  Lagrange remainder after argument reduction by a hard-coded two-float
  enclosure of pi.  No accuracy assumption is made about libm
  transcendentals.

Invalid constructions (NaN or infinite bounds, lo > hi, division by an
interval containing zero) raise immediately; there are no NaN-propagating
interval values.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import DomainError, ShapeError

_U = 2.0 ** -53
_INF = math.inf

# Certified two-float enclosure of pi.  0x1.921fb54442d18p+1 is the double
# closest to pi from below; the next float up is above pi.
_PI_LO = float.fromhex("0x1.921fb54442d18p+1")
_PI_HI = float.fromhex("0x1.921fb54442d19p+1")


def _dn(x: float) -> float:
    return math.nextafter(x, -_INF)


def _up(x: float) -> float:
    return math.nextafter(x, _INF)


def _dn_arr(x):
    return np.nextafter(x, -_INF)


def _up_arr(x):
    return np.nextafter(x, _INF)


def _gamma(m: int) -> float:
    """Upper bound for the accumulation error factor of an m-term reduction.

    Uses gamma_{m+4} inflated by (1 + 16u).  The +4 and the inflation absorb
    the rounding of the bound evaluation itself and the final combination of
    partial results, so multiplying ``_gamma(m)`` by a float upper bound of
    sum(|terms|) dominates the true accumulated rounding error.
    """
    t = ((m + 4) * _U) / (1.0 - (m + 4) * _U)
    return t * (1.0 + 16.0 * _U)


class Interval:
    """Closed scalar enclosure [lo, hi]; treated as immutable."""

    __slots__ = ("lo", "hi")

    def __init__(self, lo, hi=None):
        if hi is None:
            hi = lo
        lo = float(lo)
        hi = float(hi)
        if not (math.isfinite(lo) and math.isfinite(hi)) or lo > hi:
            raise DomainError(f"invalid interval [{lo!r}, {hi!r}]")
        self.lo = lo
        self.hi = hi

    def __repr__(self):
        return f"Interval({self.lo!r}, {self.hi!r})"

    # -- geometry ---------------------------------------------------------

    def width(self) -> float:
        return _up(self.hi - self.lo)

    def mid(self) -> float:
        return self.lo + 0.5 * (self.hi - self.lo)

    def mag(self) -> float:
        """Largest absolute value over the interval."""
        return max(abs(self.lo), abs(self.hi))

    def mig(self) -> float:
        """Smallest absolute value over the interval."""
        if self.lo > 0.0:
            return self.lo
        if self.hi < 0.0:
            return -self.hi
        return 0.0

    def contains(self, x: float) -> bool:
        return self.lo <= x <= self.hi

    def contains_interval(self, other: "Interval") -> bool:
        return self.lo <= other.lo and other.hi <= self.hi

    def intersects(self, other: "Interval") -> bool:
        return self.lo <= other.hi and other.lo <= self.hi

    def hull(self, other: "Interval") -> "Interval":
        return Interval(min(self.lo, other.lo), max(self.hi, other.hi))

    # -- arithmetic -------------------------------------------------------

    @staticmethod
    def _coerce(x) -> "Interval":
        if isinstance(x, Interval):
            return x
        return Interval(float(x))

    def __neg__(self):
        return Interval(-self.hi, -self.lo)

    def __add__(self, other):
        o = Interval._coerce(other)
        return Interval(_dn(self.lo + o.lo), _up(self.hi + o.hi))

    __radd__ = __add__

    def __sub__(self, other):
        o = Interval._coerce(other)
        return Interval(_dn(self.lo - o.hi), _up(self.hi - o.lo))

    def __rsub__(self, other):
        return Interval._coerce(other) - self

    def __mul__(self, other):
        o = Interval._coerce(other)
        ll = self.lo * o.lo
        lh = self.lo * o.hi
        hl = self.hi * o.lo
        hh = self.hi * o.hi
        return Interval(_dn(min(ll, lh, hl, hh)), _up(max(ll, lh, hl, hh)))

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = Interval._coerce(other)
        if o.lo <= 0.0 <= o.hi:
            raise DomainError(f"division by interval containing zero: {o!r}")
        ll = self.lo / o.lo
        lh = self.lo / o.hi
        hl = self.hi / o.lo
        hh = self.hi / o.hi
        return Interval(_dn(min(ll, lh, hl, hh)), _up(max(ll, lh, hl, hh)))

    def __rtruediv__(self, other):
        return Interval._coerce(other) / self

    def square(self) -> "Interval":
        ll = self.lo * self.lo
        hh = self.hi * self.hi
        hi = _up(max(ll, hh))
        if self.lo <= 0.0 <= self.hi:
            return Interval(0.0, hi)
        return Interval(_dn(min(ll, hh)), hi)

    def sqrt(self) -> "Interval":
        if self.lo < 0.0:
            raise DomainError(f"sqrt of interval with negative bound: {self!r}")
        return Interval(_dn(math.sqrt(self.lo)), _up(math.sqrt(self.hi)))

    def inv_sqrt_cubed(self) -> "Interval":
        """Enclosure of x^(-3/2); requires a strictly positive interval."""
        if self.lo <= 0.0:
            raise DomainError(f"x^(-3/2) needs positive interval: {self!r}")
        s = self.sqrt()
        return Interval(1.0) / (s * s * s)

    def abs(self) -> "Interval":
        return Interval(self.mig(), self.mag())

    # -- trigonometry ------------------------------------------------------

    def sin(self) -> "Interval":
        if self.hi - self.lo >= TWO_PI.hi:
            return Interval(-1.0, 1.0)
        a = _point_sin(self.lo)
        b = _point_sin(self.hi)
        lo = min(a.lo, b.lo)
        hi = max(a.hi, b.hi)
        if _crosses_half_multiple(self, 0.5):
            hi = 1.0
        if _crosses_half_multiple(self, -0.5):
            lo = -1.0
        return Interval(max(lo, -1.0), min(hi, 1.0))

    def cos(self) -> "Interval":
        if self.hi - self.lo >= TWO_PI.hi:
            return Interval(-1.0, 1.0)
        a = _point_cos(self.lo)
        b = _point_cos(self.hi)
        lo = min(a.lo, b.lo)
        hi = max(a.hi, b.hi)
        if _crosses_half_multiple(self, 0.0):
            hi = 1.0
        if _crosses_half_multiple(self, 1.0):
            lo = -1.0
        return Interval(max(lo, -1.0), min(hi, 1.0))


PI = Interval(_PI_LO, _PI_HI)
TWO_PI = Interval(_dn(2.0 * _PI_LO), _up(2.0 * _PI_HI))
HALF_PI = Interval(0.5 * _PI_LO, 0.5 * _PI_HI)  # halving is exact
SQRT2 = Interval(2.0).sqrt()


def _crosses_half_multiple(x: Interval, c: float) -> bool:
    """Conservatively decide whether [x.lo, x.hi] contains c*pi + 2*pi*m
    for some integer m.  May report True on borderline cases, which only
    widens trigonometric enclosures."""
    q1 = (Interval(x.lo) - PI * c) / TWO_PI
    q2 = (Interval(x.hi) - PI * c) / TWO_PI
    return math.ceil(q1.lo) <= math.floor(q2.hi)


def _inv_factorials(kmax: int) -> list[Interval]:
    out = [Interval(1.0)]
    f = Interval(1.0)
    for i in range(1, kmax + 1):
        f = f * Interval(float(i))
        out.append(Interval(1.0) / f)
    return out


_INV_FACT = _inv_factorials(30)
_SIN_TERMS = 9  # partial sum through y^17/17!; remainder bounded explicitly


def _sin_taylor(y: Interval) -> Interval:
    """sin on |y| <= 0.9 via alternating series with Lagrange remainder."""
    y2 = y.square()
    p = y
    s = Interval(0.0)
    for m in range(_SIN_TERMS):
        term = p * _INV_FACT[2 * m + 1]
        s = s + term if m % 2 == 0 else s - term
        p = p * y2
    r = (p * _INV_FACT[2 * _SIN_TERMS + 1]).mag()
    s = s + Interval(-r, r)
    return Interval(max(s.lo, -1.0), min(s.hi, 1.0))


def _cos_taylor(y: Interval) -> Interval:
    y2 = y.square()
    p = Interval(1.0)
    s = Interval(0.0)
    for m in range(_SIN_TERMS):
        term = p * _INV_FACT[2 * m]
        s = s + term if m % 2 == 0 else s - term
        p = p * y2
    r = (p * _INV_FACT[2 * _SIN_TERMS]).mag()
    s = s + Interval(-r, r)
    return Interval(max(s.lo, -1.0), min(s.hi, 1.0))


def _point_sin(x: float) -> Interval:
    """Tight enclosure of sin at a representable point."""
    k = round(x / HALF_PI.mid())
    y = Interval(x) - HALF_PI * float(k)
    if y.mag() > 0.9:
        # reduction failed (argument astronomically large); stay sound
        return Interval(-1.0, 1.0)
    r = k % 4
    if r == 0:
        return _sin_taylor(y)
    if r == 1:
        return _cos_taylor(y)
    if r == 2:
        return -_sin_taylor(y)
    return -_cos_taylor(y)


def _point_cos(x: float) -> Interval:
    k = round(x / HALF_PI.mid())
    y = Interval(x) - HALF_PI * float(k)
    if y.mag() > 0.9:
        return Interval(-1.0, 1.0)
    r = k % 4
    if r == 0:
        return _cos_taylor(y)
    if r == 1:
        return -_sin_taylor(y)
    if r == 2:
        return -_cos_taylor(y)
    return _sin_taylor(y)


# ---------------------------------------------------------------------------
# vectorised enclosures
# ---------------------------------------------------------------------------


class IntervalArray:
    """ndarray of enclosures stored as two float64 arrays of equal shape.

    Supports elementwise arithmetic with the same outward-rounding contract
    as ``Interval``.  Instances are treated as immutable.
    """

    __slots__ = ("lo", "hi")

    def __init__(self, lo, hi=None):
        lo = np.array(lo, dtype=np.float64, copy=True)
        hi = lo.copy() if hi is None else np.array(hi, dtype=np.float64, copy=True)
        if lo.shape != hi.shape:
            raise ShapeError(f"bound shapes differ: {lo.shape} vs {hi.shape}")
        self._validate(lo, hi)
        self.lo = lo
        self.hi = hi

    @staticmethod
    def _validate(lo, hi):
        if not (np.isfinite(lo).all() and np.isfinite(hi).all()):
            raise DomainError("non-finite interval bound")
        if (lo > hi).any():
            raise DomainError("interval with lo > hi")

    @classmethod
    def _wrap(cls, lo, hi):
        obj = cls.__new__(cls)
        cls._validate(lo, hi)
        obj.lo = lo
        obj.hi = hi
        return obj

    @classmethod
    def point(cls, arr) -> "IntervalArray":
        a = np.array(arr, dtype=np.float64, copy=True)
        return cls._wrap(a, a.copy())

    @classmethod
    def box(cls, center, radius: float) -> "IntervalArray":
        """Coordinate box center +- radius, rounded outward."""
        c = np.asarray(center, dtype=np.float64)
        return cls._wrap(_dn_arr(c - radius), _up_arr(c + radius))

    # -- shape / access ----------------------------------------------------

    @property
    def shape(self):
        return self.lo.shape

    @property
    def ndim(self):
        return self.lo.ndim

    def __len__(self):
        return len(self.lo)

    def __getitem__(self, idx) -> "IntervalArray":
        lo = self.lo[idx]
        hi = self.hi[idx]
        if np.ndim(lo) == 0:
            return IntervalArray._wrap(np.asarray(lo).reshape(()), np.asarray(hi).reshape(()))
        return IntervalArray._wrap(np.array(lo), np.array(hi))

    def reshape(self, *shape) -> "IntervalArray":
        return IntervalArray._wrap(self.lo.reshape(*shape), self.hi.reshape(*shape))

    def scalar(self) -> Interval:
        if self.lo.size != 1:
            raise ShapeError("scalar() on non-singleton IntervalArray")
        return Interval(float(self.lo.reshape(-1)[0]), float(self.hi.reshape(-1)[0]))

    def item(self, idx) -> Interval:
        return Interval(float(self.lo[idx]), float(self.hi[idx]))

    # -- geometry ----------------------------------------------------------

    def mid(self):
        return self.lo + 0.5 * (self.hi - self.lo)

    def width(self):
        return _up_arr(self.hi - self.lo)

    def mag(self):
        return np.maximum(np.abs(self.lo), np.abs(self.hi))

    def mig(self):
        return np.where(self.lo > 0.0, self.lo, np.where(self.hi < 0.0, -self.hi, 0.0))

    def contains(self, arr) -> bool:
        a = np.asarray(arr, dtype=np.float64)
        return bool((self.lo <= a).all() and (a <= self.hi).all())

    def contains_zero(self):
        return (self.lo <= 0.0) & (0.0 <= self.hi)

    def widen(self, radius: float) -> "IntervalArray":
        return IntervalArray._wrap(_dn_arr(self.lo - radius), _up_arr(self.hi + radius))

    # -- arithmetic ---------------------------------------------------------

    @staticmethod
    def _bounds(x):
        if isinstance(x, IntervalArray):
            return x.lo, x.hi
        if isinstance(x, Interval):
            return x.lo, x.hi
        a = np.asarray(x, dtype=np.float64)
        return a, a

    def __neg__(self):
        return IntervalArray._wrap(-self.hi, -self.lo)

    def __add__(self, other):
        bl, bh = IntervalArray._bounds(other)
        return IntervalArray._wrap(_dn_arr(self.lo + bl), _up_arr(self.hi + bh))

    __radd__ = __add__

    def __sub__(self, other):
        bl, bh = IntervalArray._bounds(other)
        return IntervalArray._wrap(_dn_arr(self.lo - bh), _up_arr(self.hi - bl))

    def __rsub__(self, other):
        bl, bh = IntervalArray._bounds(other)
        return IntervalArray._wrap(_dn_arr(bl - self.hi), _up_arr(bh - self.lo))

    def __mul__(self, other):
        bl, bh = IntervalArray._bounds(other)
        ll = self.lo * bl
        lh = self.lo * bh
        hl = self.hi * bl
        hh = self.hi * bh
        lo = np.minimum(np.minimum(ll, lh), np.minimum(hl, hh))
        hi = np.maximum(np.maximum(ll, lh), np.maximum(hl, hh))
        return IntervalArray._wrap(_dn_arr(lo), _up_arr(hi))

    __rmul__ = __mul__

    def __truediv__(self, other):
        bl, bh = IntervalArray._bounds(other)
        bl = np.broadcast_to(bl, np.broadcast_shapes(np.shape(bl), self.shape))
        bh = np.broadcast_to(bh, bl.shape)
        if ((bl <= 0.0) & (0.0 <= bh)).any():
            raise DomainError("division by interval containing zero")
        ll = self.lo / bl
        lh = self.lo / bh
        hl = self.hi / bl
        hh = self.hi / bh
        lo = np.minimum(np.minimum(ll, lh), np.minimum(hl, hh))
        hi = np.maximum(np.maximum(ll, lh), np.maximum(hl, hh))
        return IntervalArray._wrap(_dn_arr(lo), _up_arr(hi))

    def __rtruediv__(self, other):
        bl, bh = IntervalArray._bounds(other)
        num = IntervalArray._wrap(
            np.broadcast_to(bl, self.shape).copy(), np.broadcast_to(bh, self.shape).copy()
        )
        return num / self

    def square(self) -> "IntervalArray":
        ll = self.lo * self.lo
        hh = self.hi * self.hi
        lo = np.minimum(ll, hh)
        hi = np.maximum(ll, hh)
        lo = np.where(self.contains_zero(), 0.0, _dn_arr(lo))
        return IntervalArray._wrap(lo, _up_arr(hi))

    def sqrt(self) -> "IntervalArray":
        if (self.lo < 0.0).any():
            raise DomainError("sqrt of interval array with negative bound")
        return IntervalArray._wrap(_dn_arr(np.sqrt(self.lo)), _up_arr(np.sqrt(self.hi)))

    def sum(self, axis=None) -> "IntervalArray":
        """Rigorous sum; the gamma accumulation bound covers any summation
        order used by numpy."""
        if axis is None:
            flat = self.reshape(-1)
            return flat.sum(axis=0)
        m = self.shape[axis]
        slo = np.asarray(np.sum(self.lo, axis=axis))
        shi = np.asarray(np.sum(self.hi, axis=axis))
        e = _gamma(m) * np.asarray(np.sum(self.mag(), axis=axis))
        return IntervalArray._wrap(
            np.asarray(_dn_arr(slo - e)), np.asarray(_up_arr(shi + e))
        )

    # -- norms ---------------------------------------------------------------

    def norm_inf(self) -> Interval:
        """Range of the max-abs-entry norm over all point selections."""
        mig = self.mig()
        mag = self.mag()
        if mig.size == 0:
            return Interval(0.0)
        return Interval(float(mig.max()), float(mag.max()))


def norm_inf(v: IntervalArray) -> Interval:
    return v.norm_inf()


def induced_norm_inf(m) -> Interval:
    """Range of the max-row-abs-sum operator norm of a matrix enclosure."""
    if isinstance(m, np.ndarray):
        m = IntervalArray.point(m)
    if m.ndim != 2:
        raise ShapeError("induced_norm_inf expects a matrix")
    cols = m.shape[1]
    hi_rows = np.sum(m.mag(), axis=1)
    hi = _up(float(hi_rows.max()) * (1.0 + _gamma(cols)))
    lo_rows = np.sum(m.mig(), axis=1)
    lo = _dn(float(lo_rows.max()) * (1.0 - _gamma(cols)))
    return Interval(max(lo, 0.0), hi)


# ---------------------------------------------------------------------------
# rigorous matrix products
# ---------------------------------------------------------------------------


def _check_matmul_shapes(a_shape, b_shape):
    if len(a_shape) not in (1, 2) or len(b_shape) not in (1, 2):
        raise ShapeError("matmul operands must be vectors or matrices")
    if a_shape[-1] != b_shape[0]:
        raise ShapeError(f"incompatible shapes {a_shape} @ {b_shape}")


def _matmul_point_point(a, b):
    _check_matmul_shapes(a.shape, b.shape)
    m = a.shape[-1]
    c = a @ b
    e = _up_arr((_gamma(m) * (np.abs(a) @ np.abs(b))) * (1.0 + 16.0 * _U))
    return IntervalArray._wrap(_dn_arr(c - e), _up_arr(c + e))


def _matmul_point_interval(a, b: IntervalArray):
    _check_matmul_shapes(a.shape, b.shape)
    m = a.shape[-1]
    ap = np.where(a > 0.0, a, 0.0)
    an = a - ap
    lo = ap @ b.lo + an @ b.hi
    hi = ap @ b.hi + an @ b.lo
    e = _up_arr((_gamma(m) * (np.abs(a) @ b.mag())) * (1.0 + 16.0 * _U))
    return IntervalArray._wrap(_dn_arr(lo - e), _up_arr(hi + e))


def _matmul_interval_point(a: IntervalArray, b):
    _check_matmul_shapes(a.shape, b.shape)
    if b.ndim == 1:
        res = _matmul_point_interval(b[None, :], IntervalArray._wrap(a.lo.T, a.hi.T))
        lo = res.lo.T.reshape(-1) if a.ndim == 2 else res.lo.reshape(())
        hi = res.hi.T.reshape(-1) if a.ndim == 2 else res.hi.reshape(())
        return IntervalArray._wrap(np.array(lo), np.array(hi))
    res = _matmul_point_interval(b.T, IntervalArray._wrap(a.lo.T, a.hi.T))
    return IntervalArray._wrap(res.lo.T.copy(), res.hi.T.copy())


def _matmul_interval_interval(a: IntervalArray, b: IntervalArray):
    _check_matmul_shapes(a.shape, b.shape)
    m = a.shape[-1]
    ma = a.mid()
    ra = _up_arr(np.maximum(ma - a.lo, a.hi - ma))
    mb = b.mid()
    rb = _up_arr(np.maximum(mb - b.lo, b.hi - mb))
    p = ma @ mb
    abs_ma = np.abs(ma)
    abs_mb = np.abs(mb)
    r = abs_ma @ rb + ra @ (abs_mb + rb) + _gamma(m) * (abs_ma @ abs_mb)
    r = _up_arr(r * (1.0 + 8.0 * _gamma(m)))
    return IntervalArray._wrap(_dn_arr(p - r), _up_arr(p + r))


def imatmul(a, b) -> IntervalArray:
    """Rigorous matrix-matrix or matrix-vector product.

    Either operand may be a plain ndarray (treated as exact) or an
    IntervalArray.
    """
    a_iv = isinstance(a, IntervalArray)
    b_iv = isinstance(b, IntervalArray)
    if not a_iv:
        a = np.asarray(a, dtype=np.float64)
    if not b_iv:
        b = np.asarray(b, dtype=np.float64)
    if a_iv and b_iv:
        return _matmul_interval_interval(a, b)
    if a_iv:
        return _matmul_interval_point(a, b)
    if b_iv:
        return _matmul_point_interval(a, b)
    return _matmul_point_point(a, b)


def imatvec(a, v) -> IntervalArray:
    return imatmul(a, v)


def iadd(a: IntervalArray, b: IntervalArray) -> IntervalArray:
    if a.shape != b.shape:
        raise ShapeError(f"incompatible shapes {a.shape} + {b.shape}")
    return a + b


def isub(a: IntervalArray, b: IntervalArray) -> IntervalArray:
    if a.shape != b.shape:
        raise ShapeError(f"incompatible shapes {a.shape} - {b.shape}")
    return a - b


# ---------------------------------------------------------------------------
# rectangular complex enclosures
# ---------------------------------------------------------------------------


class ComplexInterval:
    """Rectangle re x im enclosing a set of complex numbers."""

    __slots__ = ("re", "im")

    def __init__(self, re, im=None):
        if isinstance(re, complex) and im is None:
            re, im = re.real, re.imag
        self.re = re if isinstance(re, Interval) else Interval(float(re))
        self.im = im if isinstance(im, Interval) else Interval(0.0 if im is None else float(im))

    def __repr__(self):
        return f"ComplexInterval({self.re!r}, {self.im!r})"

    def __add__(self, other):
        o = _as_cplx(other)
        return ComplexInterval(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, other):
        o = _as_cplx(other)
        return ComplexInterval(self.re - o.re, self.im - o.im)

    def __rsub__(self, other):
        return _as_cplx(other) - self

    def __mul__(self, other):
        o = _as_cplx(other)
        return ComplexInterval(
            self.re * o.re - self.im * o.im,
            self.re * o.im + self.im * o.re,
        )

    __rmul__ = __mul__

    def __neg__(self):
        return ComplexInterval(-self.re, -self.im)

    def conj(self):
        return ComplexInterval(self.re, -self.im)

    def abs_bounds(self) -> Interval:
        """Enclosure of |z| over the rectangle."""
        lo = (Interval(self.re.mig()).square() + Interval(self.im.mig()).square()).sqrt().lo
        hi = (Interval(self.re.mag()).square() + Interval(self.im.mag()).square()).sqrt().hi
        return Interval(lo, hi)

    def contains(self, z: complex) -> bool:
        return self.re.contains(z.real) and self.im.contains(z.imag)


def _as_cplx(x) -> ComplexInterval:
    if isinstance(x, ComplexInterval):
        return x
    if isinstance(x, complex):
        return ComplexInterval(x)
    return ComplexInterval(Interval._coerce(x), Interval(0.0))
