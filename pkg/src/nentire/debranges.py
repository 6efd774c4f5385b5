"""De Branges space tools: Hermite-Biehler functions, the s_beta family,
reproducing kernels, resolvent action, eigenfunctions and the weighted
inner products <f, g>_{-n}.

Evaluators are callables of one complex argument; they are tried on numpy
arrays first and fall back to element-wise evaluation.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate

from .errors import DivergentIntegralError, InvalidParameterError, PoleError

FD_STEP = 1e-6
# below this relative distance a removable singularity is filled in
_NEAR = 1e-8


def _apply(fn: Callable, z):
    """Evaluate ``fn`` on an array, element-wise if it refuses arrays."""
    arr = np.asarray(z, dtype=complex)
    try:
        out = np.asarray(fn(arr), dtype=complex)
        if out.shape == arr.shape:
            return out
    except (TypeError, ValueError):
        pass
    return np.array([complex(fn(complex(v))) for v in arr.ravel()]).reshape(arr.shape)


def _scalar_or_array(z, out):
    return complex(out) if np.ndim(z) == 0 else out


@dataclass(frozen=True)
class HermiteBiehlerFunction:
    """An entire function e; e^#(z) = conj(e(conj z)) is always derived."""

    eval: Callable
    name: str = "e"

    def __call__(self, z):
        return _scalar_or_array(z, _apply(self.eval, z))

    def sharp(self, z):
        out = np.conj(_apply(self.eval, np.conj(np.asarray(z, dtype=complex))))
        return _scalar_or_array(z, out)


@dataclass(frozen=True)
class KernelEvaluator:
    eval: Callable
    source: str = "closed-form"

    def __call__(self, z, w):
        return self.eval(z, w)


@dataclass(frozen=True)
class HBCheck:
    ok: bool
    witness: complex | None = None

    def __bool__(self):
        return self.ok


def default_grid() -> np.ndarray:
    xs = np.linspace(-5.0, 5.0, 11)
    ys = np.array([0.1, 0.5, 1.0, 2.0, 5.0])
    return (xs[None, :] + 1j * ys[:, None]).ravel()


def hb_check(e: HermiteBiehlerFunction, grid=None) -> HBCheck:
    """|e(z)| > |e^#(z)| at every grid point of the open upper half-plane."""
    pts = default_grid() if grid is None else np.atleast_1d(np.asarray(grid, dtype=complex))
    if pts.size == 0:
        raise InvalidParameterError("grid must be nonempty")
    if np.any(pts.imag <= 0):
        raise InvalidParameterError("grid points must lie in the open upper half-plane")
    big = np.abs(_apply(e.eval, pts))
    small = np.abs(e.sharp(pts))
    bad = np.nonzero(~(big > small))[0]
    if bad.size:
        return HBCheck(False, complex(pts[bad[0]]))
    return HBCheck(True)


def s_beta(e: HermiteBiehlerFunction, beta: float, z):
    """(i/2) [e^{i beta} e(z) - e^{-i beta} e^#(z)]."""
    if not 0 <= beta < math.pi:
        raise InvalidParameterError("beta must lie in [0, pi)")
    rot = complex(math.cos(beta), math.sin(beta))
    zz = np.asarray(z, dtype=complex)
    val = 0.5j * (rot * _apply(e.eval, zz) - rot.conjugate() * e.sharp(zz))
    # on the real axis the two terms are conjugate; drop the rounding residue
    val = np.where(zz.imag == 0, val.real + 0j, val)
    return _scalar_or_array(z, val)


def momentum_kernel(a: float, z, w):
    """2 sin(a(conj w - z)) / (conj w - z), equal to 2a where conj w = z."""
    if not a > 0:
        raise InvalidParameterError("a must be positive")
    u = np.conj(np.asarray(w, dtype=complex)) - np.asarray(z, dtype=complex)
    small = np.abs(a * u) < 1e-4
    safe = np.where(small, 1.0, u)
    au2 = (a * u) ** 2
    series = 2 * a * (1 - au2 / 6 + au2 * au2 / 120)
    out = np.where(small, series, 2 * np.sin(a * u) / safe)
    return complex(out) if out.ndim == 0 else out


def momentum_kernel_quadrature(a: float, z: complex, w: complex) -> complex:
    """Direct quadrature of the defining integral of exp(i(z - conj w)x) over [-a, a]."""
    c = complex(z) - complex(w).conjugate()

    def part(fn):
        # full_output keeps quad quiet when a part is exactly zero and epsrel is unreachable
        return integrate.quad(lambda x: fn(np.exp(1j * c * x)), -a, a,
                              epsabs=1e-13, epsrel=1e-13, limit=200, full_output=1)[0]

    return complex(part(np.real), part(np.imag))


def momentum_kernel_evaluator(a: float) -> KernelEvaluator:
    if not a > 0:
        raise InvalidParameterError("a must be positive")
    return KernelEvaluator(lambda z, w: momentum_kernel(a, z, w), f"momentum:a={a:g}")


def e_from_kernel(k: KernelEvaluator, w0: complex = 1j) -> HermiteBiehlerFunction:
    """e(z) = -i sqrt(pi / (k(w0,w0) Im w0)) (z - conj w0) k(z, w0)."""
    w0 = complex(w0)
    if w0.imag <= 0:
        raise InvalidParameterError("w0 must lie in the upper half-plane")
    k00 = complex(k(w0, w0))
    if not (k00.real > 0 and abs(k00.imag) <= 1e-12 * k00.real):
        raise InvalidParameterError(f"k(w0, w0) = {k00} is not positive")
    c = -1j * math.sqrt(math.pi / (k00.real * w0.imag))
    wc = w0.conjugate()

    def e(z):
        z = np.asarray(z, dtype=complex)
        return c * (z - wc) * k(z, w0)

    return HermiteBiehlerFunction(e, f"from-kernel({k.source}, w0={w0})")


def paley_wiener(a: float) -> HermiteBiehlerFunction:
    if not a > 0:
        raise InvalidParameterError("a must be positive")
    return HermiteBiehlerFunction(lambda z: np.exp(-1j * a * np.asarray(z, dtype=complex)),
                                  f"paley-wiener:a={a:g}")


def named_e(key: str) -> HermiteBiehlerFunction:
    """'paley-wiener:a=<val>' or 'momentum:a=<val>' (kernel-derived, w0 = i)."""
    m = re.fullmatch(r"\s*(paley-wiener|momentum)\s*:\s*a\s*=\s*([^\s]+)\s*", key)
    if not m:
        raise InvalidParameterError(f"unknown e function {key!r}")
    try:
        a = float(m.group(2))
    except ValueError as exc:
        raise InvalidParameterError(f"bad parameter in {key!r}") from exc
    if m.group(1) == "paley-wiener":
        return paley_wiener(a)
    return e_from_kernel(momentum_kernel_evaluator(a), 1j)


def _scale(w: complex) -> float:
    return max(1.0, abs(w))


def _centered(fn: Callable[[complex], complex], w: complex) -> complex:
    h = FD_STEP * _scale(w)
    return (fn(w + h) - fn(w - h)) / (2 * h)


def resolvent_apply(e: HermiteBiehlerFunction, beta: float, f: Callable, w: complex, z):
    """(f(z) - s_beta(z)/s_beta(w) f(w)) / (z - w)."""
    w = complex(w)
    sw = s_beta(e, beta, w)
    if abs(sw) <= 1e-14 * max(1.0, abs(e(w))):
        raise PoleError(f"w = {w} is a zero of s_beta (an eigenvalue)")
    ratio = complex(_apply(f, w)) / sw

    def numerator(zz):
        # written so that f = s_beta cancels exactly
        return _apply(f, zz) - s_beta(e, beta, zz) * ratio

    zz = np.asarray(z, dtype=complex)
    d = zz - w
    near = np.abs(d) <= _NEAR * _scale(w)
    out = numerator(zz) / np.where(near, 1.0, d)
    if np.any(near):
        deriv = _centered(lambda t: complex(numerator(np.asarray(t))), w)
        out = np.where(near, deriv, out)
    return _scalar_or_array(z, out)


def eigenfunction(e: HermiteBiehlerFunction, beta: float, x_n: float, z):
    """g_n(z) = s_beta(z) / (z - x_n) for a real zero x_n of s_beta."""
    x_n = float(x_n)
    if abs(s_beta(e, beta, x_n)) > 1e-10 * max(1.0, abs(e(x_n))):
        raise InvalidParameterError(f"{x_n} is not a zero of s_beta")
    zz = np.asarray(z, dtype=complex)
    d = zz - x_n
    near = np.abs(d) <= _NEAR * _scale(x_n)
    out = s_beta(e, beta, zz) / np.where(near, 1.0, d)
    if np.any(near):
        out = np.where(near, _centered(lambda t: complex(s_beta(e, beta, t)), x_n), out)
    return _scalar_or_array(z, out)


# ---------------------------------------------------------------- weighted inner product

@dataclass(frozen=True)
class InnerProduct:
    value: complex
    error: float
    cutoff: float
    decay_exponent: float | None


_GL_X, _GL_W = np.polynomial.legendre.leggauss(20)


def exponential_type(e: HermiteBiehlerFunction) -> float:
    """Type of e read from log|e(iy)| at two heights on the imaginary axis."""
    y1, y2 = 10.0, 20.0
    with np.errstate(divide="ignore", over="ignore"):
        l1, l2 = np.log(np.abs(_apply(e.eval, np.array([1j * y1, 1j * y2]))))
    t = (l2 - l1) / (y2 - y1)
    return float(t) if np.isfinite(t) and t > 0 else 0.0


def _panels(lo: float, hi: float, width: float, integrand) -> np.ndarray:
    """Gauss-Legendre panel integrals over [lo, hi], in interval order."""
    n = max(1, int(math.ceil((hi - lo) / width - 1e-9)))
    edges = np.linspace(lo, hi, n + 1)
    mid = 0.5 * (edges[1:] + edges[:-1])
    half = 0.5 * (edges[1:] - edges[:-1])
    x = mid[:, None] + half[:, None] * _GL_X[None, :]
    vals = integrand(x.ravel()).reshape(x.shape)
    return (vals * _GL_W[None, :]).sum(axis=1) * half


def weighted_inner(e: HermiteBiehlerFunction, n: int, f: Callable, g: Callable, *,
                   tol: float = 1e-9, max_doublings: int = 14) -> InnerProduct:
    """int conj(f(x)) g(x) / ((x^2+1)^n |e(x)|^2) dx over the real line.

    The integral is taken over [-X, X] with X doubling from a multiple of
    the oscillation period; the shells between successive cutoffs give a
    fitted decay exponent, which both extrapolates the remainder and
    detects non-integrable tails.
    """
    if int(n) != n or n < 0:
        raise InvalidParameterError("n must be a nonnegative integer")
    tau = exponential_type(e)
    period = math.pi / tau if tau > 1e-3 else 2 * math.pi
    width = min(period / 2, 1.0)

    def integrand(x):
        fx = _apply(f, x)
        gx = _apply(g, x)
        ex = _apply(e.eval, x)
        return np.conj(fx) * gx / ((x * x + 1.0) ** n * np.abs(ex) ** 2)

    x0 = period * math.ceil(16.0 / period)
    core = _panels(-x0, x0, width, integrand).sum()
    total = core
    shells, estimates = [], []
    lo = x0
    for _ in range(max_doublings):
        hi = 2 * lo
        s = _panels(lo, hi, width, integrand).sum() + _panels(-hi, -lo, width, integrand).sum()
        shells.append(s)
        total = total + s
        lo = hi
        if len(shells) == 2 and core == 0 and shells[0] == 0 and s == 0:
            # identically vanishing integrand
            return InnerProduct(0j, 0.0, lo, None)
        if len(shells) < 3 or shells[-2] == 0:
            continue
        ratio = abs(shells[-1]) / abs(shells[-2])
        p = 1 - math.log2(ratio) if ratio > 0 else math.inf
        if p <= 1:
            if len(shells) >= 4:
                raise DivergentIntegralError(
                    f"integrand tail decays like |x|^-{p:.3g}; the integral diverges")
            continue
        if math.isinf(p):
            estimates.append((total, 0.0, p))
        else:
            r = 2.0 ** (1 - p)
            estimates.append((total + shells[-1] * r / (1 - r), abs(shells[-1] * r / (1 - r)), p))
        if len(estimates) >= 2:
            delta = abs(estimates[-1][0] - estimates[-2][0])
            if delta <= tol * max(1.0, abs(estimates[-1][0])):
                break
    if not estimates:
        raise DivergentIntegralError("could not establish decay of the integrand")
    value, rem, p = estimates[-1]
    err = abs(estimates[-1][0] - estimates[-2][0]) if len(estimates) > 1 else rem
    return InnerProduct(complex(value), float(err), lo, p)


def reproducing_check(k: KernelEvaluator, e: HermiteBiehlerFunction, w: complex, w2: complex):
    """(quadrature of <k_w, k_w2>, k(w, w2), k(w2, w)) for comparison."""
    ip = weighted_inner(e, 0, lambda x: k(x, w), lambda x: k(x, w2))
    return ip, complex(k(w, w2)), complex(k(w2, w))
