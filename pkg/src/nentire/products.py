"""Genus-0 canonical products over the zeros of a spectral sequence.

``h(z) = lim_{r->inf} prod_{0<|b|<=r} (1 - z/b)``, times ``z`` when 0 is a
zero.  The stored zeros are multiplied directly (in log space); the part of
the product beyond the stored data is estimated from the sequence's tail
model with an Euler-Maclaurin sum.  The split used is

    log h(z) = sum_stored log(1 - z/b) - z*L + sum_tail [log(1 - z/b) + z/b]

where ``L`` is the symmetric-limit sum of 1/b over the unstored zeros.  The
bracketed tail terms are O((z/b)^2) and converge absolutely for exponents
above 1/2; ``L`` needs either a convergent one-sided sum or two infinite
branches cancelling in the symmetric limit.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import InconclusiveError, InvalidParameterError, NumericalFailure
from .spectra import ABS_EQ_TOL, REL_EQ_TOL, SpectralSequence

# |z| must stay below this fraction of every tail anchor for the tail series
MAX_ANCHOR_RATIO = 0.5
_BLOCK = 32


def worker_count() -> int:
    try:
        return max(1, int(os.environ.get("NENTIRE_THREADS", "")))
    except ValueError:
        return min(8, os.cpu_count() or 1)


@dataclass(frozen=True)
class ProductValue:
    value: complex | float
    rel_error: float
    trace: list = field(default_factory=list)


@dataclass(frozen=True)
class DerivativeValue:
    value: float
    rel_error: float
    finite_difference: float | None = None


@dataclass(frozen=True)
class _Layout:
    """Stored zeros used up to a cutoff, plus the tail anchors beyond it."""

    zeros: np.ndarray          # included nonzero zeros, sorted by value
    anchors: tuple             # (sign, t) per infinite branch, t in index units
    exponent: float
    coefficient: float
    linear_tail: float
    radius: float              # cutoff actually used
    modelled: bool             # True when the tail model supplies the remainder


@dataclass(frozen=True, eq=False)
class CanonicalProduct:
    zeros: SpectralSequence
    origin_zero: bool | None = None

    def __post_init__(self):
        if self.origin_zero is None:
            object.__setattr__(self, "origin_zero", self.zeros.has_zero)
        elif bool(self.origin_zero) != self.zeros.has_zero:
            raise InvalidParameterError("origin_zero must match whether 0 is a stored zero")

    @cached_property
    def layout(self) -> _Layout:
        return self.layout_at(None)

    def layout_at(self, r_max: float | None) -> _Layout:
        seq = self.zeros
        tail = seq.tail
        cover = seq.coverage()
        radius = cover if r_max is None else min(float(r_max), cover)
        parts, anchors = [], []
        for name, sign in (("positive", 1.0), ("negative", -1.0)):
            b = seq.branch(name)
            if not seq.is_infinite(name):
                parts.append(b)
                continue
            inc = b[np.abs(b) <= radius * (1 + 1e-15)]
            if inc.size == 0:
                raise InconclusiveError(f"no stored {name} zeros below r_max={radius}")
            parts.append(inc)
            if tail is not None:
                t = (abs(inc[-1]) / tail.coefficient) ** (1.0 / tail.exponent)
                anchors.append((sign, t))
        zeros = np.sort(np.concatenate(parts))
        if tail is None:
            return _Layout(zeros, (), 0.0, 0.0, 0.0, radius, False)
        p, c = tail.exponent, tail.coefficient
        return _Layout(zeros, tuple(anchors), p, c,
                       _linear_tail(anchors, p, c), radius, True)


def _linear_tail(anchors, p, c) -> float:
    """Symmetric-limit sum of 1/b over the modelled zeros beyond the anchors."""
    if not anchors:
        return 0.0

    def f(t):
        return 1.0 / (c * t ** p)

    def fp(t):
        return -p / (c * t ** (p + 1))

    if len(anchors) == 2:
        (_, tp), (_, tn) = anchors
        if p == 1:
            integral = math.log(tn / tp) / c
        else:
            integral = (tn ** (1 - p) - tp ** (1 - p)) / (c * (1 - p))
        return integral - (f(tp) - f(tn)) / 2 - (fp(tp) - fp(tn)) / 12
    (sign, t), = anchors
    if p <= 1:
        raise InconclusiveError(
            f"one-sided zero set with tail exponent {p} <= 1: the genus-0 product diverges")
    return sign * (t ** (1 - p) / (c * (p - 1)) - f(t) / 2 - fp(t) / 12)


def _quadratic_tail(layout: _Layout, z: np.ndarray) -> np.ndarray:
    """Euler-Maclaurin estimate of sum_tail [log(1 - z/b) + z/b]."""
    out = np.zeros(z.shape, dtype=z.dtype)
    p, c = layout.exponent, layout.coefficient
    for sign, t in layout.anchors:
        u = z / (sign * c * t ** p)
        au = float(np.max(np.abs(u))) if u.size else 0.0
        if au > MAX_ANCHOR_RATIO:
            raise InconclusiveError(
                f"|z| too large for the tail model (|z/b_anchor| = {au:.3g})")
        integral = np.zeros_like(out)
        if au > 0:
            m_max = int(math.ceil(math.log(1e-18) / math.log(au))) + 1
            power = u * u
            for m in range(2, max(m_max, 2) + 1):
                integral = integral + power / (m * (p * m - 1))
                power = power * u
        g = np.log1p(-u) + u
        gp = p * u * u / (t * (1 - u))
        out = out - t * integral - g / 2 - gp / 12
    return out


def _row_blocks(fn, z: np.ndarray) -> np.ndarray:
    """Apply ``fn`` to blocks of ``z`` (possibly in threads); order preserved."""
    if z.size <= _BLOCK:
        return fn(z)
    chunks = [z[i:i + _BLOCK] for i in range(0, z.size, _BLOCK)]
    workers = worker_count()
    if workers > 1 and z.size * 1 > 4 * _BLOCK:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            results = list(ex.map(fn, chunks))
    else:
        results = [fn(ch) for ch in chunks]
    return np.concatenate(results)


def _log_real(h: CanonicalProduct, layout: _Layout, x: np.ndarray, skip=None):
    """(log|h(x)|, sign h(x)) for real x; ``skip`` drops one factor per point."""
    zs = layout.zeros

    def block(rows):
        xs, idx = rows[:, 0], rows[:, 1]
        d = np.abs(1.0 - xs[:, None] / zs[None, :])
        if skip is not None:
            ii = idx.astype(int)
            d[np.arange(xs.size), ii] = 1.0
        return np.sum(np.log(d), axis=1)

    idx = np.zeros_like(x) if skip is None else np.asarray(skip, dtype=float)
    s = _row_blocks(block, np.column_stack([x, idx]))
    if layout.modelled:
        s = s - x * layout.linear_tail + _quadratic_tail(layout, x)
    # sign: factors (1 - x/b) are negative exactly when x lies beyond b on b's side
    pos = zs[zs > 0]
    neg = zs[zs < 0]
    nneg = np.where(x > 0, np.searchsorted(pos, x, side="left"),
                    neg.size - np.searchsorted(neg, x, side="right"))
    if skip is not None:
        own = zs[np.asarray(skip, dtype=int)]
        # the skipped factor is never counted by the strict comparisons above
        nneg = nneg - ((own > 0) & (own < x)) - ((own < 0) & (own > x))
    sign = np.where(nneg % 2 == 0, 1.0, -1.0)
    if h.origin_zero:
        s = s + np.log(np.abs(np.where(x == 0, 1.0, x)))
        sign = sign * np.sign(x)
    return s, sign


def _log_complex(h: CanonicalProduct, layout: _Layout, z: np.ndarray) -> np.ndarray:
    zs = layout.zeros

    def block(rows):
        return np.sum(np.log1p(-rows[:, None] / zs[None, :]), axis=1)

    s = _row_blocks(block, z)
    if layout.modelled:
        s = s - z * layout.linear_tail + _quadratic_tail(layout, z)
    if h.origin_zero:
        s = s + np.log(z)
    return s


def _check_not_near_zero(h: CanonicalProduct, z: complex):
    """True if z is exactly a stored zero; raise if merely close to one."""
    zs = h.zeros.values()
    if zs.size == 0:
        return False
    i = int(np.argmin(np.abs(zs - z)))
    d = abs(zs[i] - z)
    if d == 0:
        return True
    if d <= max(REL_EQ_TOL * abs(zs[i]), ABS_EQ_TOL):
        raise InvalidParameterError(f"z={z} is within 1e-12 of the zero {zs[i]}")
    return False


def _eval_at(h, layout, z, real):
    if real:
        s, sign = _log_real(h, layout, np.array([z.real]))
        return float(sign[0] * math.exp(s[0])), complex(s[0])
    s = _log_complex(h, layout, np.array([complex(z)]))
    return complex(np.exp(s[0])), complex(s[0])


def evaluate(h: CanonicalProduct, z, r_max: float | None = None,
             rel_tol: float = 1e-8) -> ProductValue:
    """Value of the canonical product at ``z`` with an estimated relative error.

    Real ``z`` goes through real arithmetic, so the result is a float.  The
    error estimate compares the result obtained with cutoff r and r/2 (both
    tail corrected); without a tail model the plain partial products at
    r, r/2, r/4, r/8 are compared instead.
    """
    real = np.isrealobj(z) or complex(z).imag == 0
    z = complex(z)
    if _check_not_near_zero(h, z.real if real else z):
        return ProductValue(0.0 if real else 0j, 0.0)
    seq = h.zeros
    if not any(seq.is_infinite(b) for b in ("positive", "negative")):
        val, _ = _eval_at(h, h.layout_at(None), z, real)
        return ProductValue(val, 0.0)
    base = h.layout_at(r_max)
    if base.modelled:
        radii = [base.radius, base.radius / 2]
    else:
        radii = [base.radius / 2 ** k for k in range(4)]
    trace = []
    for r in radii:
        lay = base if r == base.radius else h.layout_at(r)
        val, logv = _eval_at(h, lay, z, real)
        trace.append((r, val, logv))
    err = abs(trace[0][2] - trace[1][2]) if base.modelled else abs(trace[-2][2] - trace[-1][2])
    err = max(err, 1e-15)
    if err > rel_tol:
        raise InconclusiveError(
            f"partial products do not settle to rel_tol={rel_tol:g} (change {err:.3g})",
            [(r, v) for r, v, _ in trace])
    return ProductValue(trace[0][1], err, [(r, v) for r, v, _ in trace])


def log_abs(h: CanonicalProduct, x) -> np.ndarray:
    """log|h(x)| at real points x (no stored zero among them), full data."""
    x = np.asarray(x, dtype=float)
    s, _ = _log_real(h, h.layout, x)
    return s


def _zero_indices(layout: _Layout, x: np.ndarray) -> np.ndarray:
    zs = layout.zeros
    idx = np.clip(np.searchsorted(zs, x), 0, zs.size - 1)
    left = np.clip(idx - 1, 0, zs.size - 1)
    idx = np.where(np.abs(zs[left] - x) < np.abs(zs[idx] - x), left, idx)
    tol = np.maximum(REL_EQ_TOL * np.abs(x), ABS_EQ_TOL)
    if np.any(np.abs(zs[idx] - x) > tol):
        raise InvalidParameterError("derivative requested at a point that is not a stored zero")
    return idx


def log_abs_derivative_at_zeros(h: CanonicalProduct, x) -> np.ndarray:
    """log|h'(x)| at stored nonzero zeros x (vectorised, no cross-check)."""
    x = np.asarray(x, dtype=float)
    lay = h.layout
    idx = _zero_indices(lay, x)
    s, _ = _log_real(h, lay, x, skip=idx)
    # derivative of the vanishing factor (1 - z/b) is -1/b
    return s - np.log(np.abs(lay.zeros[idx]))


def derivative_at_zero(h: CanonicalProduct, x: float, check: bool = True,
                       fd_tol: float = 1e-4) -> DerivativeValue:
    """h'(x) at a stored zero: product of the other factors times the
    derivative of the vanishing one, cross-checked by central differences."""
    x = float(x)
    lay = h.layout
    if x == 0:
        if not h.origin_zero:
            raise InvalidParameterError("0 is not a zero of this product")
        # leading factor z has derivative 1; the rest is 1 at the origin
        value = 1.0
    else:
        idx = _zero_indices(lay, np.array([x]))
        s, sign = _log_real(h, lay, np.array([x]), skip=idx)
        b = lay.zeros[idx[0]]
        value = float(sign[0] * math.exp(s[0]) * (-1.0 / b))
    if not check:
        return DerivativeValue(value, 0.0)
    step = 1e-6 * max(1.0, abs(x))
    plus = evaluate(h, x + step, rel_tol=1.0).value
    minus = evaluate(h, x - step, rel_tol=1.0).value
    fd = (plus - minus) / (2 * step)
    rel = abs(fd - value) / max(abs(value), 1e-300)
    if rel > fd_tol:
        raise NumericalFailure(
            f"analytic derivative {value!r} disagrees with finite difference {fd!r}",
            (x - step, x + step))
    return DerivativeValue(value, rel, fd)
