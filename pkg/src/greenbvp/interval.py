"""Outward-rounded interval arithmetic for scalars and stacked matrices.

Rounding is done after the fact: every inexact floating-point result is
pushed one representable number outward with ``nextafter``. Round-to-nearest
is off by at most half an ulp, so one step is enough and no hardware
rounding mode is touched. Results that are known to be exact (sums with a
zero addend, products with a structurally zero factor) are not widened, so
sparsity survives long chains of operations.

Every value carries a ``rigorous`` flag. With ``rigorous=False`` the same
code runs without widening, which gives the cheap approximate bounds of
fast-float mode. Mixing the two raises :class:`ModeError`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import DomainError, ModeError, ShapeError

UNIT_ROUNDOFF = 2.0 ** -53

_INF = np.inf


# ---------------------------------------------------------------------------
# raw endpoint kernels
# ---------------------------------------------------------------------------

def _dn(x):
    return np.nextafter(x, -_INF)


def _up(x):
    return np.nextafter(x, _INF)


def _clean(lo, hi):
    # NaN only arises from inf - inf or 0 * inf at unbounded endpoints
    if np.isnan(lo).any() or np.isnan(hi).any():
        lo = np.where(np.isnan(lo), -_INF, lo)
        hi = np.where(np.isnan(hi), _INF, hi)
    return lo, hi


def _add_raw(alo, ahi, blo, bhi, rigorous):
    lo = alo + blo
    hi = ahi + bhi
    if rigorous:
        lo = np.where((alo == 0) | (blo == 0), lo, _dn(lo))
        hi = np.where((ahi == 0) | (bhi == 0), hi, _up(hi))
    return _clean(lo, hi)


def _is_point(lo, hi):
    return lo is hi or np.array_equal(lo, hi)


def _mul_raw(alo, ahi, blo, bhi, rigorous):
    with np.errstate(over="ignore", invalid="ignore"):
        return _mul_kernel(alo, ahi, blo, bhi, rigorous)


def _mul_kernel(alo, ahi, blo, bhi, rigorous):
    if _is_point(alo, ahi):
        p1 = alo * blo
        p2 = alo * bhi
        lo = np.fmin(p1, p2)
        hi = np.fmax(p1, p2)
    elif _is_point(blo, bhi):
        p1 = alo * blo
        p2 = ahi * blo
        lo = np.fmin(p1, p2)
        hi = np.fmax(p1, p2)
    else:
        p1 = alo * blo
        p2 = alo * bhi
        p3 = ahi * blo
        p4 = ahi * bhi
        lo = np.fmin(np.fmin(p1, p2), np.fmin(p3, p4))
        hi = np.fmax(np.fmax(p1, p2), np.fmax(p3, p4))
    if rigorous:
        zero = ((alo == 0) & (ahi == 0)) | ((blo == 0) & (bhi == 0))
        lo = np.where(zero, 0.0, _dn(lo))
        hi = np.where(zero, 0.0, _up(hi))
    return _clean(lo, hi)


def _div_raw(alo, ahi, blo, bhi, rigorous):
    if np.any((blo <= 0) & (bhi >= 0)):
        raise DomainError("division by an interval containing zero")
    with np.errstate(over="ignore", under="ignore"):
        q1 = alo / blo
        q2 = alo / bhi
        q3 = ahi / blo
        q4 = ahi / bhi
    lo = np.fmin(np.fmin(q1, q2), np.fmin(q3, q4))
    hi = np.fmax(np.fmax(q1, q2), np.fmax(q3, q4))
    if rigorous:
        zero = (alo == 0) & (ahi == 0)
        lo = np.where(zero, 0.0, _dn(lo))
        hi = np.where(zero, 0.0, _up(hi))
    return _clean(lo, hi)


# ---------------------------------------------------------------------------
# directed-rounding helpers for nonnegative bound bookkeeping
# ---------------------------------------------------------------------------

def add_up(a, b, rigorous=True):
    """Upper bound on ``a + b``; exact when either term is zero."""
    s = np.add(a, b)
    if not rigorous:
        return s
    return np.where((np.asarray(a) == 0) | (np.asarray(b) == 0), s, _up(s))


def mul_up(a, b, rigorous=True):
    """Upper bound on ``a * b`` for nonnegative inputs."""
    p = np.multiply(a, b)
    if not rigorous:
        return p
    return np.where((np.asarray(a) == 0) | (np.asarray(b) == 0), 0.0, _up(p))


def div_up(a, b, rigorous=True):
    """Upper bound on ``a / b`` for nonnegative ``a`` and positive ``b``."""
    q = np.divide(a, b)
    if not rigorous:
        return q
    return np.where(np.asarray(a) == 0, 0.0, _up(q))


def sum_up(x, axis=-1, rigorous=True):
    """Upper bound on the sum of nonnegative entries along ``axis``.

    Any summation order of k nonnegative terms is within a relative
    ``(k-1) u / (1 - (k-1) u)`` of the exact sum; we inflate by ``2 k u``.
    """
    x = np.asarray(x, dtype=float)
    s = np.sum(x, axis=axis)
    if not rigorous:
        return s
    k = x.shape[axis] if x.ndim else 1
    inflated = _up(_up(s) * (1.0 + 2.0 * k * UNIT_ROUNDOFF))
    return np.where(s == 0, 0.0, inflated)


def pow_up(x, k, rigorous=True):
    """Upper bound on ``x**k`` for nonnegative ``x`` and integer ``k >= 0``."""
    out = np.ones_like(np.asarray(x, dtype=float))
    for _ in range(k):
        out = mul_up(out, x, rigorous)
    return out


# ---------------------------------------------------------------------------
# scalar intervals
# ---------------------------------------------------------------------------

Number = Union[int, float]


@dataclass(frozen=True)
class Interval:
    """A closed interval ``[lo, hi]`` of IEEE doubles."""

    lo: float
    hi: float
    rigorous: bool = True

    def __post_init__(self):
        lo, hi = float(self.lo), float(self.hi)
        if math.isnan(lo) or math.isnan(hi):
            raise DomainError("interval endpoint is NaN")
        if lo > hi:
            raise DomainError(f"empty interval [{lo}, {hi}]")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @classmethod
    def point(cls, x: Number, rigorous: bool = True) -> "Interval":
        return cls(x, x, rigorous)

    def _coerce(self, other) -> "Interval":
        if isinstance(other, Interval):
            if other.rigorous != self.rigorous:
                raise ModeError("cannot mix rigorous and fast-float intervals")
            return other
        if isinstance(other, (int, float, np.floating, np.integer)):
            return Interval(float(other), float(other), self.rigorous)
        return NotImplemented

    def _wrap(self, lo, hi) -> "Interval":
        return Interval(float(lo), float(hi), self.rigorous)

    @property
    def mid(self) -> float:
        return 0.5 * self.lo + 0.5 * self.hi

    @property
    def width(self) -> float:
        return self.hi - self.lo

    @property
    def mag(self) -> float:
        return max(abs(self.lo), abs(self.hi))

    def __contains__(self, x) -> bool:
        if isinstance(x, Interval):
            return self.lo <= x.lo and x.hi <= self.hi
        return self.lo <= x <= self.hi

    def __neg__(self):
        return self._wrap(-self.hi, -self.lo)

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return self._wrap(*_add_raw(np.float64(self.lo), np.float64(self.hi),
                                    np.float64(o.lo), np.float64(o.hi), self.rigorous))

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return self + (-o)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return o + (-self)

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return self._wrap(*_mul_raw(np.float64(self.lo), np.float64(self.hi),
                                    np.float64(o.lo), np.float64(o.hi), self.rigorous))

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return self._wrap(*_div_raw(np.float64(self.lo), np.float64(self.hi),
                                    np.float64(o.lo), np.float64(o.hi), self.rigorous))

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return o / self

    def sqrt(self) -> "Interval":
        if self.lo < 0:
            raise DomainError("square root of an interval with negative part")
        lo, hi = math.sqrt(self.lo), math.sqrt(self.hi)
        if self.rigorous:
            lo = max(0.0, math.nextafter(lo, -math.inf)) if lo > 0 else 0.0
            hi = math.nextafter(hi, math.inf) if hi > 0 else 0.0
        return self._wrap(lo, hi)

    def hull(self, other: "Interval") -> "Interval":
        o = self._coerce(other)
        return self._wrap(min(self.lo, o.lo), max(self.hi, o.hi))

    def __repr__(self):
        return f"Interval({self.lo!r}, {self.hi!r})"


def iv_arith(a: Interval, b: Interval, op: str) -> Interval:
    """Apply ``op`` in {'add', 'sub', 'mul', 'div'} with outward rounding."""
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "div":
        return a / b
    raise DomainError(f"unknown interval operation {op!r}")


# ---------------------------------------------------------------------------
# interval arrays
# ---------------------------------------------------------------------------

class IntervalMatrix:
    """Stack of interval matrices (or vectors) stored as ``lo``/``hi`` arrays.

    Elementwise operators broadcast like numpy. ``@`` multiplies over the
    last two axes, batching over the leading ones.
    """

    __slots__ = ("lo", "hi", "rigorous")
    __array_priority__ = 100

    def __init__(self, lo, hi=None, rigorous: bool = True, check: bool = True):
        lo = np.asarray(lo, dtype=float)
        hi = lo if hi is None else np.asarray(hi, dtype=float)
        if lo.shape != hi.shape:
            lo, hi = np.broadcast_arrays(lo, hi)
        if check:
            if np.isnan(lo).any() or np.isnan(hi).any():
                raise DomainError("interval endpoint is NaN")
            if np.any(lo > hi):
                raise DomainError("interval with lo > hi")
        self.lo = lo
        self.hi = hi
        self.rigorous = bool(rigorous)

    # construction -------------------------------------------------------
    @classmethod
    def point(cls, x, rigorous: bool = True) -> "IntervalMatrix":
        x = np.asarray(x, dtype=float)
        return cls(x, x, rigorous)

    @classmethod
    def eye(cls, n: int, rigorous: bool = True) -> "IntervalMatrix":
        return cls.point(np.eye(n), rigorous)

    @classmethod
    def zeros(cls, shape, rigorous: bool = True) -> "IntervalMatrix":
        return cls.point(np.zeros(shape), rigorous)

    @classmethod
    def from_radius(cls, center, radius, rigorous: bool = True) -> "IntervalMatrix":
        center = np.asarray(center, dtype=float)
        radius = np.asarray(radius, dtype=float)
        lo, hi = center - radius, center + radius
        if rigorous:
            lo = np.where(radius == 0, center, _dn(lo))
            hi = np.where(radius == 0, center, _up(hi))
        return cls(lo, hi, rigorous)

    @staticmethod
    def stack(items, axis=0) -> "IntervalMatrix":
        items = list(items)
        rig = _common_mode(items)
        return IntervalMatrix(np.stack([i.lo for i in items], axis),
                              np.stack([i.hi for i in items], axis), rig, check=False)

    @staticmethod
    def concatenate(items, axis=0) -> "IntervalMatrix":
        items = list(items)
        rig = _common_mode(items)
        return IntervalMatrix(np.concatenate([i.lo for i in items], axis),
                              np.concatenate([i.hi for i in items], axis), rig, check=False)

    @staticmethod
    def where(mask, a: "IntervalMatrix", b: "IntervalMatrix") -> "IntervalMatrix":
        rig = _common_mode([a, b])
        return IntervalMatrix(np.where(mask, a.lo, b.lo), np.where(mask, a.hi, b.hi),
                              rig, check=False)

    def _new(self, lo, hi) -> "IntervalMatrix":
        return IntervalMatrix(lo, hi, self.rigorous, check=False)

    def _coerce(self, other) -> "IntervalMatrix":
        if isinstance(other, IntervalMatrix):
            if other.rigorous != self.rigorous:
                raise ModeError("cannot mix rigorous and fast-float intervals")
            return other
        if isinstance(other, Interval):
            if other.rigorous != self.rigorous:
                raise ModeError("cannot mix rigorous and fast-float intervals")
            return IntervalMatrix(other.lo, other.hi, self.rigorous, check=False)
        arr = np.asarray(other, dtype=float)
        return IntervalMatrix(arr, arr, self.rigorous, check=False)

    # array protocol -----------------------------------------------------
    @property
    def shape(self):
        return self.lo.shape

    @property
    def ndim(self):
        return self.lo.ndim

    def __len__(self):
        return len(self.lo)

    def __getitem__(self, idx) -> "IntervalMatrix":
        return self._new(self.lo[idx], self.hi[idx])

    def reshape(self, *shape) -> "IntervalMatrix":
        return self._new(self.lo.reshape(*shape), self.hi.reshape(*shape))

    def broadcast_to(self, shape) -> "IntervalMatrix":
        return self._new(np.broadcast_to(self.lo, shape), np.broadcast_to(self.hi, shape))

    @property
    def T(self) -> "IntervalMatrix":
        return self._new(np.swapaxes(self.lo, -1, -2), np.swapaxes(self.hi, -1, -2))

    def copy(self) -> "IntervalMatrix":
        return self._new(self.lo.copy(), self.hi.copy())

    # summaries ----------------------------------------------------------
    def mid(self) -> np.ndarray:
        m = 0.5 * self.lo + 0.5 * self.hi
        return np.where(np.isfinite(m), m, np.where(self.lo == self.hi, self.lo, 0.0))

    def rad(self) -> np.ndarray:
        return 0.5 * (self.hi - self.lo)

    def mag(self) -> np.ndarray:
        return np.maximum(np.abs(self.lo), np.abs(self.hi))

    def mig(self) -> np.ndarray:
        straddle = (self.lo <= 0) & (self.hi >= 0)
        return np.where(straddle, 0.0, np.minimum(np.abs(self.lo), np.abs(self.hi)))

    @property
    def is_point(self) -> bool:
        return _is_point(self.lo, self.hi)

    def contains(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return (self.lo <= x) & (x <= self.hi)

    def contains_zero(self) -> np.ndarray:
        return (self.lo <= 0) & (self.hi >= 0)

    def hull(self, other) -> "IntervalMatrix":
        o = self._coerce(other)
        return self._new(np.minimum(self.lo, o.lo), np.maximum(self.hi, o.hi))

    def widen(self, radius) -> "IntervalMatrix":
        """Enlarge every entry by ``radius`` on both sides."""
        r = np.asarray(radius, dtype=float)
        lo, hi = self.lo - r, self.hi + r
        if self.rigorous:
            lo, hi = _dn(lo), _up(hi)
        return self._new(lo, hi)

    # arithmetic ---------------------------------------------------------
    def __neg__(self):
        return self._new(-self.hi, -self.lo)

    def __pos__(self):
        return self

    def __add__(self, other):
        o = self._coerce(other)
        return self._new(*_add_raw(self.lo, self.hi, o.lo, o.hi, self.rigorous))

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        return self._new(*_add_raw(self.lo, self.hi, -o.hi, -o.lo, self.rigorous))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        o = self._coerce(other)
        return self._new(*_mul_raw(self.lo, self.hi, o.lo, o.hi, self.rigorous))

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        return self._new(*_div_raw(self.lo, self.hi, o.lo, o.hi, self.rigorous))

    def __rtruediv__(self, other):
        return self._coerce(other) / self

    def __matmul__(self, other):
        return mat_mul(self, self._coerce(other))

    def __rmatmul__(self, other):
        return mat_mul(self._coerce(other), self)

    def sum(self, axis=0) -> "IntervalMatrix":
        """Outward-rounded sum along ``axis`` (sequential accumulation)."""
        lo = np.moveaxis(self.lo, axis, 0)
        hi = np.moveaxis(self.hi, axis, 0)
        if lo.shape[0] == 0:
            return self._new(np.zeros(lo.shape[1:]), np.zeros(lo.shape[1:]))
        acc_lo, acc_hi = lo[0], hi[0]
        for k in range(1, lo.shape[0]):
            acc_lo, acc_hi = _add_raw(acc_lo, acc_hi, lo[k], hi[k], self.rigorous)
        return self._new(acc_lo, acc_hi)

    def cumsum(self, axis=0) -> "IntervalMatrix":
        lo = np.moveaxis(self.lo, axis, 0)
        hi = np.moveaxis(self.hi, axis, 0)
        out_lo = np.empty_like(lo)
        out_hi = np.empty_like(hi)
        if lo.shape[0]:
            out_lo[0], out_hi[0] = lo[0], hi[0]
            for k in range(1, lo.shape[0]):
                out_lo[k], out_hi[k] = _add_raw(out_lo[k - 1], out_hi[k - 1],
                                                lo[k], hi[k], self.rigorous)
        return self._new(np.moveaxis(out_lo, 0, axis), np.moveaxis(out_hi, 0, axis))

    def __repr__(self):
        tag = "" if self.rigorous else ", fast"
        return f"IntervalMatrix(shape={self.shape}{tag})"


def _common_mode(items) -> bool:
    modes = {i.rigorous for i in items}
    if len(modes) > 1:
        raise ModeError("cannot mix rigorous and fast-float intervals")
    return modes.pop() if modes else True


def as_interval_matrix(x, rigorous: bool = True) -> IntervalMatrix:
    if isinstance(x, IntervalMatrix):
        if x.rigorous != rigorous:
            raise ModeError("cannot mix rigorous and fast-float intervals")
        return x
    return IntervalMatrix.point(x, rigorous)


def mat_mul(A: IntervalMatrix, B: IntervalMatrix) -> IntervalMatrix:
    """Interval matrix product over the last two axes, batched over the rest."""
    if A.rigorous != B.rigorous:
        raise ModeError("cannot mix rigorous and fast-float intervals")
    if A.ndim < 2 or B.ndim < 2:
        raise ShapeError("mat_mul needs at least two dimensions")
    if A.shape[-1] != B.shape[-2]:
        raise ShapeError(f"inner dimensions differ: {A.shape} @ {B.shape}")
    rig = A.rigorous
    a_point = A.is_point
    b_point = B.is_point
    acc_lo = acc_hi = None
    for k in range(A.shape[-1]):
        alo = A.lo[..., :, k:k + 1]
        blo = B.lo[..., k:k + 1, :]
        ahi = alo if a_point else A.hi[..., :, k:k + 1]
        bhi = blo if b_point else B.hi[..., k:k + 1, :]
        plo, phi = _mul_raw(alo, ahi, blo, bhi, rig)
        if acc_lo is None:
            acc_lo, acc_hi = plo, phi
        else:
            acc_lo, acc_hi = _add_raw(acc_lo, acc_hi, plo, phi, rig)
    return IntervalMatrix(acc_lo, acc_hi, rig, check=False)


# ---------------------------------------------------------------------------
# weights and norms
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class WeightMatrix:
    """Positive diagonal weight W; vector norm ``|Wv|_inf``."""

    diag: np.ndarray

    def __post_init__(self):
        d = np.asarray(self.diag, dtype=float).reshape(-1)
        if d.size == 0 or not np.all(np.isfinite(d)) or np.any(d <= 0):
            raise DomainError("weights must be finite and strictly positive")
        d.setflags(write=False)
        object.__setattr__(self, "diag", d)

    @classmethod
    def identity(cls, n: int) -> "WeightMatrix":
        return cls(np.ones(n))

    @property
    def n(self) -> int:
        return self.diag.size

    @property
    def is_identity(self) -> bool:
        return bool(np.all(self.diag == 1.0))

    def tolist(self):
        return [float(x) for x in self.diag]


def norm_upper(M: IntervalMatrix, W: WeightMatrix | None = None,
               vector: bool = False) -> np.ndarray:
    """Upper bounds on weighted infinity norms, batched over leading axes.

    Operator mode bounds ``|W X W^-1|_inf`` for every real ``X`` in each
    trailing matrix; vector mode bounds ``|W x|_inf`` for each trailing
    vector.
    """
    rig = M.rigorous
    mag = M.mag()
    if vector:
        if W is not None:
            if W.n != M.shape[-1]:
                raise ShapeError("weight size does not match vector length")
            if not W.is_identity:
                mag = mul_up(mag, W.diag, rig)
        return np.max(mag, axis=-1) if mag.shape[-1] else np.zeros(mag.shape[:-1])
    if M.ndim < 2:
        raise ShapeError("operator norm needs a matrix")
    if W is not None:
        if W.n != M.shape[-1] or W.n != M.shape[-2]:
            raise ShapeError("weight size does not match matrix shape")
        if not W.is_identity:
            mag = div_up(mul_up(mag, W.diag[:, None], rig), W.diag[None, :], rig)
    rows = sum_up(mag, axis=-1, rigorous=rig)
    return np.max(rows, axis=-1)


def _norm_lower(M: IntervalMatrix, W: WeightMatrix | None, vector: bool) -> np.ndarray:
    mig = M.mig()
    if vector:
        if W is not None:
            mig = _dn(mig * W.diag) if M.rigorous else mig * W.diag
        return np.maximum(np.max(mig, axis=-1), 0.0)
    if W is not None:
        mig = mig * W.diag[:, None] / W.diag[None, :]
        if M.rigorous:
            mig = _dn(_dn(mig))
    rows = np.sum(np.maximum(mig, 0.0), axis=-1)
    if M.rigorous:
        rows = _dn(rows * (1.0 - 2.0 * mig.shape[-1] * UNIT_ROUNDOFF))
    return np.maximum(np.max(rows, axis=-1), 0.0)


def weighted_inf_norm(M: IntervalMatrix, W: WeightMatrix | None = None,
                      vector: bool = False):
    """Enclosure of the weighted infinity norm over all real representatives.

    Returns an :class:`Interval` for a single matrix or vector, otherwise an
    :class:`IntervalMatrix` of enclosures over the leading axes. The upper
    endpoint is the rigorous bound consumers rely on; the lower endpoint is
    the norm of the entrywise mignitude.
    """
    hi = norm_upper(M, W, vector)
    lo = np.minimum(_norm_lower(M, W, vector), hi)
    if np.ndim(hi) == 0:
        return Interval(float(lo), float(hi), M.rigorous)
    return IntervalMatrix(lo, hi, M.rigorous, check=False)
