"""Spectral sequences of canonical selfadjoint extensions and model generators.

A :class:`SpectralSequence` stores the (simple, real) eigenvalues of one
extension split into a positive and a negative branch, both ordered by
increasing modulus, plus an optional power-law tail model ``|x_j| ~ C j**p``
that lets downstream code extrapolate beyond the stored entries.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import brentq

from .errors import InterlacingViolation, InvalidParameterError, NumericalFailure

REL_EQ_TOL = 1e-12
ABS_EQ_TOL = 1e-14

BRANCHES = ("positive", "negative")


def same_eigenvalue(x: float, y: float) -> bool:
    """Equality test used everywhere eigenvalues are compared."""
    return abs(x - y) <= max(REL_EQ_TOL * max(abs(x), abs(y)), ABS_EQ_TOL)


@dataclass(frozen=True)
class Tail:
    """Asymptotic model ``|x_j| ~ coefficient * j**exponent`` (j counted from 1).

    ``branches`` lists the branches that are infinite and follow the model;
    a branch not listed is complete as stored (possibly empty).
    """

    exponent: float
    coefficient: float
    branches: tuple = BRANCHES

    def __post_init__(self):
        if not (self.exponent > 0 and self.coefficient > 0):
            raise InvalidParameterError("tail exponent and coefficient must be positive")
        if not set(self.branches) <= set(BRANCHES):
            raise InvalidParameterError(f"unknown tail branches {self.branches!r}")
        object.__setattr__(self, "branches", tuple(b for b in BRANCHES if b in self.branches))

    def model(self, j):
        return self.coefficient * np.asarray(j, dtype=float) ** self.exponent


def _frozen(values) -> np.ndarray:
    arr = np.array(values, dtype=float).ravel()
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class SpectralSequence:
    positive: np.ndarray
    negative: np.ndarray
    has_zero: bool = False
    tail: Tail | None = None
    # only sequences long enough for the asymptotics to have kicked in are checked
    tail_check_min: int = field(default=100, repr=False)

    def __post_init__(self):
        pos = _frozen(self.positive)
        neg = _frozen(self.negative)
        object.__setattr__(self, "positive", pos)
        object.__setattr__(self, "negative", neg)
        object.__setattr__(self, "has_zero", bool(self.has_zero))
        if not (np.all(np.isfinite(pos)) and np.all(np.isfinite(neg))):
            raise InvalidParameterError("eigenvalues must be finite reals")
        if np.any(pos <= 0) or np.any(neg >= 0):
            raise InvalidParameterError("branch entries have the wrong sign (0 goes in has_zero)")
        if pos.size > 1 and np.any(np.diff(pos) <= 0):
            raise InvalidParameterError("positive branch must be strictly increasing")
        if neg.size > 1 and np.any(np.diff(neg) >= 0):
            raise InvalidParameterError("negative branch must be stored by increasing modulus")
        for branch in (pos, neg):
            a = np.abs(branch)
            if a.size > 1 and np.any(np.diff(a) <= np.maximum(REL_EQ_TOL * a[1:], ABS_EQ_TOL)):
                raise InvalidParameterError("repeated eigenvalue: spectra must be simple")
        if self.tail is not None:
            bad = self.tail_mismatch()
            if bad is not None:
                raise InvalidParameterError(
                    f"{bad[0]} branch does not follow its tail model "
                    f"(relative error {bad[1]:.3g} > 5%)"
                )

    @classmethod
    def from_values(cls, values: Sequence[float], tail: Tail | None = None) -> "SpectralSequence":
        """Build from an unordered collection of eigenvalues."""
        v = np.sort(np.asarray(values, dtype=float).ravel())
        zero = np.abs(v) <= ABS_EQ_TOL
        pos = v[(v > 0) & ~zero]
        neg = v[(v < 0) & ~zero][::-1]
        return cls(pos, neg, bool(zero.any()), tail)

    def branch(self, name: str) -> np.ndarray:
        return self.positive if name == "positive" else self.negative

    def is_infinite(self, name: str) -> bool:
        if self.tail is not None:
            return name in self.tail.branches
        # without a model, any stored data is assumed truncated
        return self.branch(name).size > 0

    def tail_mismatch(self):
        """First (branch, relative error) violating the 5% tail fit, else None."""
        for name in self.tail.branches:
            x = np.abs(self.branch(name))
            if x.size < self.tail_check_min:
                continue
            start = x.size - max(1, x.size // 10)
            j = np.arange(start + 1, x.size + 1)
            err = np.max(np.abs(x[start:] / self.tail.model(j) - 1.0))
            if err > 0.05:
                return name, float(err)
        return None

    def values(self) -> np.ndarray:
        """All eigenvalues in increasing order."""
        zero = [0.0] if self.has_zero else []
        return np.concatenate([self.negative[::-1], zero, self.positive])

    def nonzero_by_modulus(self) -> np.ndarray:
        """Nonzero eigenvalues ordered by increasing modulus (stable on ties)."""
        v = np.concatenate([self.positive, self.negative])
        return v[np.argsort(np.abs(v), kind="stable")]

    def coverage(self) -> float:
        """Radius up to which the stored data is complete."""
        radii = [np.abs(self.branch(b))[-1] for b in BRANCHES
                 if self.is_infinite(b) and self.branch(b).size]
        if radii:
            return float(min(radii))
        return math.inf

    def __len__(self):
        return self.positive.size + self.negative.size + int(self.has_zero)

    def __eq__(self, other):
        if not isinstance(other, SpectralSequence):
            return NotImplemented
        return (np.array_equal(self.positive, other.positive)
                and np.array_equal(self.negative, other.negative)
                and self.has_zero == other.has_zero and self.tail == other.tail)


@dataclass(frozen=True)
class ExtensionPair:
    """Spectra of A_0 (``seq_a``) and A_gamma (``seq_b``), 0 < gamma < pi."""

    seq_a: SpectralSequence
    seq_b: SpectralSequence
    gamma: float = math.pi / 2

    def __post_init__(self):
        if not 0 < self.gamma < math.pi:
            raise InvalidParameterError("gamma must lie in (0, pi)")


@dataclass(frozen=True)
class InterlacingResult:
    ok: bool
    witness: tuple | None = None
    reason: str = ""

    def __bool__(self):
        return self.ok


def check_interlacing(pair: ExtensionPair) -> InterlacingResult:
    a = pair.seq_a.values()
    b = pair.seq_b.values()
    if a.size == 0 or b.size == 0:
        raise InvalidParameterError("both sequences must be nonempty")
    merged = np.concatenate([a, b])
    src = np.concatenate([np.zeros(a.size, int), np.ones(b.size, int)])
    order = np.argsort(merged, kind="stable")
    merged, src = merged[order], src[order]
    gaps = np.diff(merged)
    scale = np.maximum(np.abs(merged[1:]), np.abs(merged[:-1]))
    shared = (src[1:] != src[:-1]) & (np.abs(gaps) <= np.maximum(REL_EQ_TOL * scale, ABS_EQ_TOL))
    repeat = src[1:] == src[:-1]
    bad = np.flatnonzero(shared | repeat)
    if bad.size == 0:
        return InterlacingResult(True)
    i = int(bad[0])
    pair_vals = (float(merged[i]), float(merged[i + 1]))
    if shared[i]:
        return InterlacingResult(
            False, pair_vals,
            "shared eigenvalue: each real number belongs to one, and only one, extension spectrum")
    return InterlacingResult(False, pair_vals, f"consecutive entries of seq_{'ab'[src[i]]}")


def require_interlaced(pair: ExtensionPair) -> None:
    res = check_interlacing(pair)
    if not res:
        raise InterlacingViolation(res.reason, res.witness)


# ---------------------------------------------------------------- generators


def _check_positive(**kw):
    for name, val in kw.items():
        if not (isinstance(val, (int, float, np.floating, np.integer)) and val > 0
                and math.isfinite(val)):
            raise InvalidParameterError(f"{name} must be positive, got {val!r}")


def _check_angle(name, val, closed=True):
    if not (0 <= val < math.pi if closed else 0 < val < math.pi):
        raise InvalidParameterError(f"{name} must lie in [0, pi), got {val!r}")


def momentum_spectrum(a: float, gamma: float, j_max: int) -> SpectralSequence:
    """Spectrum {(gamma + k pi)/a : k in Z} of i d/dx on [-a, a]."""
    _check_positive(a=a, j_max=j_max)
    _check_angle("gamma", gamma)
    j_max = int(j_max)
    k = np.arange(j_max, dtype=float)
    if gamma == 0:
        pos = (k + 1) * math.pi / a
    else:
        pos = (gamma + k * math.pi) / a
    neg = (gamma - (k + 1) * math.pi) / a
    return SpectralSequence(pos, neg, gamma == 0, Tail(1.0, math.pi / a))


_SMALL_ROOT = 1e-6


def _laplacian_roots(a, beta, j_max):
    """Positive eigenvalues, plus the negative eigenvalue if any."""
    cb, sb = math.cos(beta), math.sin(beta)

    def mismatch(s):
        # boundary form at x=a for the eigenfunction cos(s x); no poles, same roots as s tan(sa) = tan(beta)
        return s * math.sin(s * a) * cb - math.cos(s * a) * sb

    roots, first = [], []
    k0 = 0 if cb > 0 else 1
    t = sb / cb
    if k0 == 0 and t * a < _SMALL_ROOT:
        # s tan(sa) = s^2 a + s^4 a^3/3 + ...: the root is too close to 0 to bracket
        first = [t / a - t * t * a / 3]
        k0 = 1
        j_max -= 1
    for k in range(k0, k0 + j_max):
        lo = (k - 0.5) * math.pi / a if k else 0.0
        hi = (k + 0.5) * math.pi / a
        flo, fhi = mismatch(lo), mismatch(hi)
        if flo == 0:
            roots.append(lo)
            continue
        if flo * fhi > 0:
            raise NumericalFailure("root not bracketed between consecutive poles", (lo, hi))
        roots.append(brentq(mismatch, lo, hi, xtol=1e-15, rtol=1e-15, maxiter=200))
    negative = []
    if cb < 0:
        # cos(i k x): -k tanh(k a) cos(beta) ... root of k tanh(k a) = -tan(beta)
        t = -sb / cb
        if t * a < _SMALL_ROOT:
            negative.append(-(t / a + t * t * a / 3))
            return np.concatenate([first, np.array(roots) ** 2]), negative

        def g(kappa):
            return kappa * math.tanh(kappa * a) - t

        hi = max(1.0, t) * 2 + 1 / a
        while g(hi) < 0:
            hi *= 2
        kappa = brentq(g, 0.0, hi, xtol=1e-15, rtol=1e-15, maxiter=200)
        negative.append(-kappa * kappa)
    return np.concatenate([first, np.array(roots) ** 2]), negative


def neumann_laplacian_spectrum(a: float, beta: float, j_max: int,
                               include_zero: bool = False) -> SpectralSequence:
    """Eigenvalues of -d^2/dx^2 on [0, a] with phi'(0)=0 and
    phi(a) sin(beta) + phi'(a) cos(beta) = 0.

    For ``beta == 0`` the constant function is an eigenfunction with
    eigenvalue 0; it is left out unless ``include_zero`` is set.
    """
    _check_positive(a=a, j_max=j_max)
    _check_angle("beta", beta)
    j_max = int(j_max)
    k = np.arange(1, j_max + 1, dtype=float)
    neg = []
    if beta == 0:
        pos = (math.pi * k / a) ** 2
    elif beta == math.pi / 2:
        pos = (math.pi * (k - 0.5) / a) ** 2
    else:
        pos, neg = _laplacian_roots(a, beta, j_max)
    tail = Tail(2.0, (math.pi / a) ** 2, ("positive",))
    return SpectralSequence(pos, neg, include_zero and beta == 0, tail)


def harmonic_oscillator_spectrum(j_max: int) -> SpectralSequence:
    """{1, 3, 5, ...}: spectrum of -d^2/dx^2 + x^2 on the line."""
    _check_positive(j_max=j_max)
    j = np.arange(1, int(j_max) + 1, dtype=float)
    return SpectralSequence(2 * j - 1, [], False, Tail(1.0, 2.0, ("positive",)))


# ------------------------------------------------------------ Schrodinger


def _potential_midpoints(potential, a, cells):
    x = (np.arange(cells) + 0.5) * (a / cells)
    if callable(potential):
        try:
            vals = potential(x)
        except TypeError:
            vals = [potential(t) for t in x]
        v = np.broadcast_to(np.asarray(vals, dtype=float), x.shape).copy()
    elif np.isscalar(potential):
        v = np.full(cells, float(potential))
    else:
        xs, vs = (np.asarray(c, dtype=float) for c in potential)
        if xs.ndim != 1 or xs.shape != vs.shape or xs.size < 2:
            raise InvalidParameterError("sampled potential needs matching 1-D x and V arrays")
        if abs(xs[0]) > 1e-12 * a or abs(xs[-1] - a) > 1e-9 * a:
            raise InvalidParameterError("potential samples must span [0, a]")
        v = np.interp(x, xs, vs)
    if not np.all(np.isfinite(v)):
        raise InvalidParameterError("potential must be finite")
    return v


def load_potential(path) -> tuple[np.ndarray, np.ndarray]:
    """Read a two-column (x, V(x)) text file on a uniform grid."""
    data = np.loadtxt(path, ndmin=2)
    if data.shape[1] != 2:
        raise InvalidParameterError("potential file must have two columns")
    x, v = data[:, 0], data[:, 1]
    step = np.diff(x)
    if step.size == 0 or np.any(step <= 0) or np.ptp(step) > 1e-6 * step.mean():
        raise InvalidParameterError("potential grid must be uniform and increasing")
    return x, v


def _end_phase(lam: np.ndarray, v: np.ndarray, h: float) -> np.ndarray:
    """Continuous Pruefer angle atan2(y, y') at x=a for each trial eigenvalue.

    Starts from y(0)=1, y'(0)=0 and propagates exactly through cells of
    constant potential, so the step size is not tied to the oscillation
    frequency.
    """
    y = np.ones_like(lam)
    yp = np.zeros_like(lam)
    theta = np.full_like(lam, math.pi / 2)
    ang = theta.copy()
    for vm in v:
        w2 = lam - vm
        osc = w2 > 0
        if osc.all():
            w = np.sqrt(w2)
            c, s = np.cos(w * h), np.sin(w * h)
            d_in = ang - np.arctan2(y, yp / w)
            y, yp = c * y + (s / w) * yp, -w * s * y + c * yp
            new = np.arctan2(y, yp)
            theta += w * h + (new - np.arctan2(y, yp / w)) - d_in
        else:
            w = np.sqrt(np.abs(w2))
            wh = w * h
            safe = np.where(w > 0, w, 1.0)
            c = np.where(osc, np.cos(wh), np.cosh(wh))
            s_over = np.where(w > 0, np.where(osc, np.sin(wh), np.sinh(wh)) / safe, h)
            sgn = np.where(osc, -1.0, 1.0)
            d_in = ang - np.arctan2(y, yp / safe)
            y, yp = c * y + s_over * yp, sgn * w * w * s_over * y + c * yp
            new = np.arctan2(y, yp)
            d_out = new - np.arctan2(y, yp / safe)
            step_osc = wh + d_out - d_in
            step_flat = np.mod(new - ang + math.pi, 2 * math.pi) - math.pi
            theta += np.where(osc, step_osc, step_flat)
        norm = np.hypot(y, yp)
        y, yp = y / norm, yp / norm
        ang = new
    return theta


def schrodinger_spectrum(a: float, potential, beta: float, j_max: int, *,
                         cells: int = 2048, include_zero: bool = False,
                         tol: float = 1e-10) -> SpectralSequence:
    """Eigenvalues of -d^2/dx^2 + V on [0, a], phi'(0)=0,
    phi(a) sin(beta) + phi'(a) cos(beta) = 0, by shooting.

    ``potential`` is a callable, a constant, or an ``(x, V)`` pair of
    uniformly sampled arrays.  Each eigenvalue is bracketed by the free
    Laplacian eigenvalue of the same index shifted by min V and max V, then
    bisected on the Pruefer angle at x=a.  With ``beta == 0`` the eigenvalue
    continuing the free b=0 mode is dropped unless ``include_zero``.
    """
    _check_positive(a=a, j_max=j_max, cells=cells)
    _check_angle("beta", beta)
    j_max, cells = int(j_max), int(cells)
    v = _potential_midpoints(potential, a, cells)
    h = a / cells

    free = neumann_laplacian_spectrum(a, beta, j_max, include_zero=True).values()
    skip = 1 if (beta == 0 and not include_zero) else 0
    free = free[skip:skip + j_max]
    first = (beta - math.pi / 2) % math.pi or math.pi
    targets = first + math.pi * (np.arange(free.size) + skip)

    margin = 1e-6 * np.maximum(1.0, np.abs(free)) + 1e-3
    lo = free + v.min() - margin
    hi = free + v.max() + margin
    th_lo, th_hi = _end_phase(lo, v, h), _end_phase(hi, v, h)
    bad = np.flatnonzero(~((th_lo < targets) & (targets < th_hi)))
    if bad.size:
        i = int(bad[0])
        raise NumericalFailure(
            f"eigenvalue {i} missing from its Sturm bracket (oscillation count mismatch)",
            (float(lo[i]), float(hi[i])))
    width_tol = np.maximum(tol, 4e-14 * np.abs(free))
    for _ in range(200):
        active = (hi - lo) > width_tol
        if not active.any():
            break
        mid = 0.5 * (lo + hi)
        th = _end_phase(mid, v, h)
        below = th < targets
        lo = np.where(active & below, mid, lo)
        hi = np.where(active & ~below, mid, hi)
    else:
        raise NumericalFailure("bisection did not converge")
    eig = 0.5 * (lo + hi)
    if eig.size > 1 and np.any(np.diff(eig) <= 0):
        raise NumericalFailure("shooting produced non-increasing eigenvalues")
    tail = Tail(2.0, (math.pi / a) ** 2, ("positive",))
    zero = np.abs(eig) <= width_tol
    return SpectralSequence(eig[(eig > 0) & ~zero], eig[(eig < 0) & ~zero][::-1],
                            bool(zero.any()), tail)
