"""Piecewise-polynomial gauge functions and closed-form checks of the gauge
identities for the momentum and Neumann-Laplacian models.

Every transform of a polynomial piece against exp(-izx) is done in closed
form: a power series when |z x| is small and integration by parts
otherwise.  No numerical quadrature is involved.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidParameterError

MAX_DEGREE = 4
_SERIES_LIMIT = 1.0


@dataclass(frozen=True)
class Piece:
    lo: float
    hi: float
    coeffs: tuple  # complex, ascending powers of x

    def __call__(self, x):
        return np.polynomial.polynomial.polyval(np.asarray(x, dtype=float), np.array(self.coeffs))


@dataclass(frozen=True)
class PiecewisePolyGauge:
    """A function on [lo, hi] given by polynomials on consecutive subintervals."""

    interval: tuple
    pieces: tuple
    component: int = 0

    def __post_init__(self):
        lo, hi = (float(v) for v in self.interval)
        if not lo < hi:
            raise InvalidParameterError("interval must satisfy lo < hi")
        pieces = tuple(p if isinstance(p, Piece) else Piece(float(p[0][0]), float(p[0][1]),
                                                            tuple(complex(c) for c in p[1]))
                       for p in self.pieces)
        if not pieces:
            raise InvalidParameterError("a gauge needs at least one piece")
        edge = lo
        for p in pieces:
            if not math.isclose(p.lo, edge, rel_tol=0, abs_tol=1e-12 * max(1.0, abs(edge))):
                raise InvalidParameterError("pieces must partition the interval in order")
            if not p.lo < p.hi:
                raise InvalidParameterError("empty piece")
            if len(p.coeffs) - 1 > MAX_DEGREE or not p.coeffs:
                raise InvalidParameterError(f"piece degree must be at most {MAX_DEGREE}")
            edge = p.hi
        if not math.isclose(edge, hi, rel_tol=0, abs_tol=1e-12 * max(1.0, abs(hi))):
            raise InvalidParameterError("pieces must cover the whole interval")
        if int(self.component) != self.component or self.component < 0:
            raise InvalidParameterError("component must be a nonnegative integer")
        object.__setattr__(self, "interval", (lo, hi))
        object.__setattr__(self, "pieces", pieces)

    def __call__(self, x, side: str = "right"):
        """Point values; at an interior breakpoint ``side`` picks the piece."""
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape, dtype=complex)
        for i, p in enumerate(self.pieces):
            last = i == len(self.pieces) - 1
            first = i == 0
            if side == "right":
                m = (x >= p.lo) & ((x < p.hi) | (last & (x == p.hi)))
            else:
                m = ((x > p.lo) | (first & (x == p.lo))) & (x <= p.hi)
            out = np.where(m, p(x), out)
        return out if out.ndim else complex(out)

    def scaled(self, factor: complex) -> "PiecewisePolyGauge":
        return PiecewisePolyGauge(self.interval,
                                  tuple(Piece(p.lo, p.hi, tuple(factor * c for c in p.coeffs))
                                        for p in self.pieces), self.component)

    def fourier(self, z) -> np.ndarray:
        """int exp(-i z x) mu(x) dx, closed form per piece."""
        z = np.asarray(z, dtype=complex)
        total = np.zeros(z.shape, dtype=complex)
        for p in self.pieces:
            for m, c in enumerate(p.coeffs):
                if c != 0:
                    total = total + c * monomial_transform(m, p.lo, p.hi, z)
        return total

    def cosine(self, y) -> np.ndarray:
        """int cos(y x) mu(x) dx."""
        y = np.asarray(y, dtype=complex)
        return 0.5 * (self.fourier(y) + self.fourier(-y))

    def to_dict(self) -> dict:
        return {"interval": list(self.interval),
                "pieces": [{"sub": [p.lo, p.hi],
                            "coeffs_re": [c.real for c in p.coeffs],
                            "coeffs_im": [c.imag for c in p.coeffs]} for p in self.pieces],
                "component": self.component}

    @classmethod
    def from_dict(cls, d: dict) -> "PiecewisePolyGauge":
        try:
            pieces = []
            for p in d["pieces"]:
                re_ = [float(v) for v in p["coeffs_re"]]
                im_ = [float(v) for v in p.get("coeffs_im", [0.0] * len(re_))]
                if len(im_) != len(re_):
                    raise InvalidParameterError("coeffs_re and coeffs_im differ in length")
                pieces.append(Piece(float(p["sub"][0]), float(p["sub"][1]),
                                    tuple(complex(r, i) for r, i in zip(re_, im_))))
            return cls(tuple(d["interval"]), tuple(pieces), int(d.get("component", 0)))
        except (KeyError, TypeError, ValueError, IndexError) as exc:
            if isinstance(exc, InvalidParameterError):
                raise
            raise InvalidParameterError(f"malformed gauge: {exc}") from exc


def _series(m: int, lo: float, hi: float, c: np.ndarray) -> np.ndarray:
    """sum_k c^k/k! (hi^{m+k+1} - lo^{m+k+1})/(m+k+1), for small |c x|."""
    out = np.zeros(c.shape, dtype=complex)
    term = np.ones(c.shape, dtype=complex)
    for k in range(60):
        e = m + k + 1
        out = out + term * (hi ** e - lo ** e) / e
        term = term * c / (k + 1)
        if k > 4 and not np.any(np.abs(term) * max(abs(hi), abs(lo)) ** (e + 1) > 1e-18 * np.abs(out)):
            break
    return out


def _by_parts(m: int, lo: float, hi: float, c: np.ndarray) -> np.ndarray:
    """int x^m e^{cx} dx via I_m = [x^m e^{cx}]/c - (m/c) I_{m-1}."""
    ehi, elo = np.exp(c * hi), np.exp(c * lo)
    val = (ehi - elo) / c
    for k in range(1, m + 1):
        val = (hi ** k * ehi - lo ** k * elo) / c - (k / c) * val
    return val


def monomial_transform(m: int, lo: float, hi: float, z) -> np.ndarray:
    """int_lo^hi x^m exp(-i z x) dx in closed form."""
    c = -1j * np.asarray(z, dtype=complex)
    small = np.abs(c) * max(abs(lo), abs(hi)) < _SERIES_LIMIT
    safe = np.where(small, 1.0, c)
    # both branches are evaluated everywhere; the unused one may overflow
    with np.errstate(over="ignore", invalid="ignore"):
        return np.where(small, _series(m, lo, hi, np.where(small, c, 0)),
                        _by_parts(m, lo, hi, safe))


# ---------------------------------------------------------------- defaults and checks

def default_momentum_gauge(a: float):
    """mu_0 = 1/(2a) on [-a, a]; mu_1 = -i(a+x)/(2a) on [-a, 0], i(a-x)/(2a) on [0, a]."""
    if not a > 0:
        raise InvalidParameterError("a must be positive")
    mu0 = PiecewisePolyGauge((-a, a), (Piece(-a, a, (1 / (2 * a),)),), 0)
    mu1 = PiecewisePolyGauge((-a, a), (Piece(-a, 0.0, (-0.5j, -1j / (2 * a))),
                                       Piece(0.0, a, (0.5j, -1j / (2 * a)))), 1)
    return mu0, mu1


def default_laplacian_gauge(a: float):
    """mu_0 = 1/a and mu_1 = (x - a)^2 / (2a) on [0, a]."""
    if not a > 0:
        raise InvalidParameterError("a must be positive")
    mu0 = PiecewisePolyGauge((0.0, a), (Piece(0.0, a, (1 / a,)),), 0)
    mu1 = PiecewisePolyGauge((0.0, a), (Piece(0.0, a, (a / 2, -1.0, 1 / (2 * a))),), 1)
    return mu0, mu1


@dataclass(frozen=True)
class GaugeCheck:
    ok: bool
    max_residual: float
    worst_point: complex | None = None
    residuals: np.ndarray = field(default=None, repr=False)

    def __bool__(self):
        return self.ok


def _check(res: np.ndarray, pts: np.ndarray, tol: float) -> GaugeCheck:
    i = int(np.argmax(res))
    return GaugeCheck(bool(res[i] <= tol), float(res[i]), complex(pts[i]), res)


def momentum_grid(n: int = 100, radius: float = 20.0) -> np.ndarray:
    return np.linspace(-radius, radius, n)


def verify_momentum_gauge(a: float, mu0: PiecewisePolyGauge, mu1: PiecewisePolyGauge,
                          z_grid=None, tol: float = 1e-12) -> GaugeCheck:
    """max |F mu_0(z) + z F mu_1(z) - 1| over the grid."""
    for mu in (mu0, mu1):
        if not np.allclose(mu.interval, (-a, a)):
            raise InvalidParameterError("momentum gauges must live on [-a, a]")
    z = np.atleast_1d(np.asarray(momentum_grid() if z_grid is None else z_grid, dtype=complex))
    res = np.abs(mu0.fourier(z) + z * mu1.fourier(z) - 1.0)
    return _check(res, z, tol)


def laplacian_grid() -> np.ndarray:
    return np.arange(1, 41) * 0.5


def verify_laplacian_gauge(a: float, mu0: PiecewisePolyGauge, mu1: PiecewisePolyGauge,
                           y_grid=None, tol: float = 1e-12) -> GaugeCheck:
    """max |C mu_0(y) + y^2 C mu_1(y) - 1| over positive y, C the cosine transform."""
    for mu in (mu0, mu1):
        if not np.allclose(mu.interval, (0.0, a)):
            raise InvalidParameterError("Laplacian gauges must live on [0, a]")
    y = np.atleast_1d(np.asarray(laplacian_grid() if y_grid is None else y_grid, dtype=float))
    if np.any(y < 0):
        raise InvalidParameterError("y grid must be nonnegative")
    res = np.abs(mu0.cosine(y) + y ** 2 * mu1.cosine(y) - 1.0)
    return _check(res, y.astype(complex), tol)


# ---------------------------------------------------------------- defect sets

@dataclass(frozen=True)
class DefectRoot:
    z: complex
    converged: bool
    residual: float


def _defect_function(model: str, gauges):
    """G and G' in the search variable (z for momentum, y = sqrt(z) for Laplacian)."""
    if model == "momentum":
        def G(z):
            return sum(z ** g.component * g.fourier(z) for g in gauges)

        def dG(z):
            out = 0
            for g in gauges:
                k = g.component
                deriv = _fourier_derivative(g, z)
                out = out + (k * z ** (k - 1) * g.fourier(z) if k else 0) + z ** k * deriv
            return out
    elif model == "laplacian":
        def G(y):
            return sum(y ** (2 * g.component) * g.cosine(y) for g in gauges)

        def dG(y):
            out = 0
            for g in gauges:
                k = g.component
                cos_d = 0.5 * (_fourier_derivative(g, y) - _fourier_derivative(g, -y))
                out = out + (2 * k * y ** (2 * k - 1) * g.cosine(y) if k else 0) + y ** (2 * k) * cos_d
            return out
    else:
        raise InvalidParameterError(f"unknown model {model!r}")
    return G, dG


def _fourier_derivative(g: PiecewisePolyGauge, z):
    """d/dz int exp(-izx) mu(x) dx = int (-ix) exp(-izx) mu(x) dx."""
    z = np.asarray(z, dtype=complex)
    total = np.zeros(z.shape, dtype=complex)
    for p in g.pieces:
        for m, c in enumerate(p.coeffs):
            if c != 0:
                total = total - 1j * c * monomial_transform(m + 1, p.lo, p.hi, z)
    return total


def _abs_moment_mass(g: PiecewisePolyGauge) -> float:
    """Upper bound for int |mu(x)| dx from the coefficient moduli."""
    total = 0.0
    for p in g.pieces:
        for m, c in enumerate(p.coeffs):
            def prim(t):
                return math.copysign(abs(t) ** (m + 1) / (m + 1), t)
            total += abs(c) * (prim(p.hi) - prim(p.lo))
    return total


def _rounding_floor(model: str, gauges, v):
    """Bound on the rounding error of G(v): the transforms carry exp(|Im v| |x|)."""
    reach = max(max(abs(g.interval[0]), abs(g.interval[1])) for g in gauges)
    power = 2 if model == "laplacian" else 1
    v = np.asarray(v, dtype=complex)
    terms = sum(np.abs(v) ** (power * g.component) * _abs_moment_mass(g) for g in gauges)
    return 8 * np.finfo(float).eps * terms * np.exp(np.abs(v.imag) * reach)


def gauge_defect_set(model: str, gauges, box, density: int = 400, *,
                     newton_tol: float = 1e-12, max_iter: int = 50) -> list[DefectRoot]:
    """Zeros of G(z) = sum_k z^k F mu_k(z) inside ``box``.

    ``box`` is (re_lo, re_hi, im_lo, im_hi) in the search variable; for the
    Laplacian model the variable is y = sqrt(z) and the roots are returned
    as z = y^2.  Candidates are grid-local minima of |G| refined by complex
    Newton steps; a candidate that does not converge is returned with
    ``converged=False``.  Far from the real axis the transforms grow like
    exp(|Im z| a) and rounding swamps G; a non-converged candidate whose
    |G| does not rise above that rounding floor is discarded.
    """
    gauges = list(gauges)
    if not gauges:
        raise InvalidParameterError("gauge tuple must be nonempty")
    G, dG = _defect_function(model, gauges)
    re_lo, re_hi, im_lo, im_hi = (float(v) for v in box)
    nx = max(3, int(density))
    ny = max(3, int(density * (im_hi - im_lo) / max(re_hi - re_lo, 1e-300))) if im_hi > im_lo else 1
    xs = np.linspace(re_lo, re_hi, nx)
    ys = np.linspace(im_lo, im_hi, ny) if ny > 1 else np.array([im_lo])
    Z = xs[None, :] + 1j * ys[:, None]
    A = np.abs(G(Z))
    # local minima of |G| over the 8-neighbourhood (edges padded with +inf)
    P = np.pad(A, 1, constant_values=np.inf)
    is_min = np.ones_like(A, dtype=bool)
    for di in (-1, 0, 1):
        for dj in (-1, 0, 1):
            if di or dj:
                is_min &= A <= P[1 + di:1 + di + A.shape[0], 1 + dj:1 + dj + A.shape[1]]
    F = _rounding_floor(model, gauges, Z)
    resolved = A > 1e6 * F
    scale = max(1.0, float(np.median(A[resolved] if resolved.any() else A)))
    # near a simple zero |G| is at most about |G'| times the grid spacing
    h = max(xs[1] - xs[0], (ys[1] - ys[0]) if ys.size > 1 else 0.0)
    starts, floors = Z[is_min], F[is_min]
    keep = A[is_min] <= 2 * h * np.abs(dG(starts)) + 1e-12 * scale
    span = max(re_hi - re_lo, im_hi - im_lo)
    roots: list[DefectRoot] = []
    for z0, floor0 in zip(starts[keep], floors[keep]):
        z, ok = complex(z0), False
        for _ in range(max_iter):
            d = complex(dG(np.asarray(z)))
            if d == 0 or not np.isfinite(d):
                break
            step = complex(G(np.asarray(z))) / d
            z -= step
            if abs(z - z0) > span:
                break
            if abs(step) <= newton_tol * max(1.0, abs(z)):
                ok = True
                break
        if not ok:
            if abs(complex(G(np.asarray(z0)))) <= floor0:
                continue
            # keep the bracketed grid candidate rather than a runaway iterate
            z = complex(z0)
        res = abs(complex(G(np.asarray(z))))
        inside = (re_lo - 1e-9 <= z.real <= re_hi + 1e-9) and (im_lo - 1e-9 <= z.imag <= im_hi + 1e-9)
        if not inside:
            continue
        if ok and res > max(1e-8 * scale, float(_rounding_floor(model, gauges, z))):
            ok = False
        if any(abs(z - r.z) <= 1e-8 * max(1.0, abs(z)) for r in roots):
            continue
        roots.append(DefectRoot(z, ok, res))
    if model == "laplacian":
        roots = [DefectRoot(r.z ** 2, r.converged, r.residual) for r in roots]
        # y and -y give the same z
        uniq: list[DefectRoot] = []
        for r in roots:
            if not any(abs(r.z - u.z) <= 1e-8 * max(1.0, abs(r.z)) for u in uniq):
                uniq.append(r)
        roots = uniq
    return sorted(roots, key=lambda r: (r.z.real, r.z.imag))
