"""Semi-infinite Jacobi matrices and their orthogonal polynomials.

The matrix has diagonal q_1, q_2, ... and off-diagonal b_1, b_2, ...; the
polynomials solve

    b_k P_k(z) = (z - q_k) P_{k-1}(z) - b_{k-1} P_{k-2}(z),

with P_0 = 1, P_1 = (z - q_1)/b_1 (first kind) and Q_0 = 0, Q_1 = 1/b_1
(second kind).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .classify import Verdict, series_verdict
from .errors import InvalidParameterError
from .spectra import SpectralSequence

FORMULAS: dict[str, tuple[Callable[[int], float], Callable[[int], float]]] = {
    "free": (lambda k: 1.0, lambda k: 0.0),
    "quadratic": (lambda k: float((k + 1) ** 2), lambda k: 0.0),
    "linear": (lambda k: float(k), lambda k: 0.0),
}
EXTENSIONS = ("periodic", "last")

LIMIT_CIRCLE = "limit-circle"
LIMIT_POINT = "limit-point"
INCONCLUSIVE = "inconclusive"

_RESCALE = 1e150


def _extend(values: list[float], rule: str, formula_part: Callable[[int], float] | None):
    vals = [float(v) for v in values]
    n = len(vals)

    def at(k: int) -> float:
        if k <= n:
            return vals[k - 1]
        if rule == "periodic":
            return vals[(k - 1) % n]
        if rule == "last":
            return vals[-1]
        return formula_part(k)

    return at


@dataclass(frozen=True)
class JacobiMatrix:
    """Coefficients as 1-indexed callables ``b(k)`` and ``q(k)``."""

    b: Callable[[int], float]
    q: Callable[[int], float]
    description: str = field(default="", compare=False)

    def b_at(self, k: int) -> float:
        v = float(self.b(k))
        if not v > 0:
            raise InvalidParameterError(f"b_{k} = {v} is not positive")
        return v

    def q_at(self, k: int) -> float:
        v = float(self.q(k))
        if not math.isfinite(v):
            raise InvalidParameterError(f"q_{k} is not finite")
        return v

    def b_array(self, n: int) -> np.ndarray:
        return np.array([self.b_at(k) for k in range(1, n + 1)])

    def q_array(self, n: int) -> np.ndarray:
        return np.array([self.q_at(k) for k in range(1, n + 1)])

    @classmethod
    def formula(cls, name: str) -> "JacobiMatrix":
        if name not in FORMULAS:
            raise InvalidParameterError(f"unknown formula {name!r}; known: {sorted(FORMULAS)}")
        b, q = FORMULAS[name]
        return cls(b, q, f"formula:{name}")

    @classmethod
    def from_lists(cls, b, q, extension: str = "last") -> "JacobiMatrix":
        if len(b) == 0 or len(q) == 0:
            raise InvalidParameterError("b and q must be nonempty")
        if any(not float(v) > 0 for v in b):
            raise InvalidParameterError("all b_k must be positive")
        fb = fq = None
        if extension.startswith("formula:"):
            name = extension.split(":", 1)[1]
            if name not in FORMULAS:
                raise InvalidParameterError(f"unknown formula {name!r}")
            fb, fq = FORMULAS[name]
        elif extension not in EXTENSIONS:
            raise InvalidParameterError(f"unknown extension rule {extension!r}")
        return cls(_extend(b, extension, fb), _extend(q, extension, fq),
                   f"lists[{len(b)}]/{extension}")

    @classmethod
    def from_json(cls, d: dict) -> "JacobiMatrix":
        try:
            return cls.from_lists(d["b"], d["q"], d.get("extension", "last"))
        except (KeyError, TypeError) as exc:
            raise InvalidParameterError(f"malformed Jacobi data: {exc}") from exc


def _check_count(n: int):
    if int(n) != n or n < 1:
        raise InvalidParameterError("n must be a positive integer")


def _recurrence(J: JacobiMatrix, z: complex, n: int, first: complex, second: complex):
    out = [first, second][:n]
    for k in range(2, n):
        out.append(((z - J.q_at(k)) * out[-1] - J.b_at(k - 1) * out[-2]) / J.b_at(k))
    return out


def orthopoly_first(J: JacobiMatrix, z: complex, n: int) -> list[complex]:
    """P_0(z), ..., P_{n-1}(z)."""
    _check_count(n)
    z = complex(z)
    return _recurrence(J, z, n, 1.0 + 0j, (z - J.q_at(1)) / J.b_at(1))


def orthopoly_second(J: JacobiMatrix, z: complex, n: int) -> list[complex]:
    """Q_0(z), ..., Q_{n-1}(z)."""
    _check_count(n)
    return _recurrence(J, complex(z), n, 0j, 1.0 / J.b_at(1) + 0j)


def wronskian(J: JacobiMatrix, z: complex, n: int) -> np.ndarray:
    """b_k (P_k Q_{k-1} - P_{k-1} Q_k) for k = 1..n-1; constant (-1) in k."""
    p = np.array(orthopoly_first(J, z, n))
    q = np.array(orthopoly_second(J, z, n))
    b = J.b_array(n - 1)
    return b * (p[1:] * q[:-1] - p[:-1] * q[1:])


@dataclass(frozen=True)
class DeficiencyResult:
    verdict: str
    exponent: float | None
    last_ratio: float
    log_partial_sum: float
    reason: str

    def __str__(self):
        return self.verdict


def _log_square_moduli(J: JacobiMatrix, z: complex, n: int) -> np.ndarray:
    """log |P_k(z)|^2 for k = 0..n-1 with joint rescaling against overflow."""
    logs = np.empty(n)
    prev, cur = 0j, 1.0 + 0j
    shift = 0.0          # log of the common scale factor of (prev, cur)
    logs[0] = 0.0
    if n > 1:
        prev, cur = cur, (z - J.q_at(1)) / J.b_at(1)
        logs[1] = 2 * math.log(abs(cur)) if cur != 0 else -math.inf
    for k in range(2, n):
        prev, cur = cur, ((z - J.q_at(k)) * cur - J.b_at(k - 1) * prev) / J.b_at(k)
        m = max(abs(cur), abs(prev))
        if m > _RESCALE or (0 < m < 1 / _RESCALE):
            prev, cur = prev / m, cur / m
            shift += math.log(m)
        logs[k] = 2 * (math.log(abs(cur)) + shift) if cur != 0 else -math.inf
    return logs


def deficiency_heuristic(J: JacobiMatrix, z: complex = 1j, n_max: int = 2000,
                         window: int = 50) -> DeficiencyResult:
    """Guess limit-circle versus limit-point from the growth of sum |P_k(z)|^2.

    Limit-circle is reported at once when every increment in the last window
    is below 1e-12 of the partial sum, limit-point at once when the window
    sums of |P_k|^2 keep growing.  Otherwise the decay exponent of those
    window sums over the second half of the range decides, with the same dead
    band as the series test: summable decay (exponent > 1.05) means
    limit-circle, decay no faster than 1/k means limit-point.
    """
    z = complex(z)
    if z.imag == 0:
        raise InvalidParameterError("z must be non-real")
    if window < 1 or n_max < 4 * window:
        raise InvalidParameterError("need n_max >= 4*window and window >= 1")
    logs = _log_square_moduli(J, z, n_max)
    log_partial = np.logaddexp.accumulate(logs)
    ratios = np.exp(logs[-window:] - log_partial[-window:])
    last_ratio = float(ratios.max())
    if last_ratio < 1e-12:
        return DeficiencyResult(LIMIT_CIRCLE, None, last_ratio, float(log_partial[-1]),
                                "increments negligible against the partial sum")
    # block sums over the window smooth out parity oscillations in |P_k|
    blocks = (n_max - 1) // window
    tail = logs[1:1 + blocks * window].reshape(blocks, window)
    log_blocks = np.logaddexp.reduce(tail, axis=1)
    centres = 1 + window * np.arange(blocks) + (window - 1) / 2
    late = log_blocks[blocks // 2:]
    if np.all(np.diff(late) > 0):
        return DeficiencyResult(LIMIT_POINT, None, last_ratio, float(log_partial[-1]),
                                "window sums of |P_k|^2 keep growing")
    fit = series_verdict(centres, log_terms=log_blocks, fit_from=n_max / 2)
    if fit.verdict is Verdict.PASS:
        verdict = LIMIT_CIRCLE
    elif fit.verdict is Verdict.FAIL:
        verdict = LIMIT_POINT
    else:
        verdict = INCONCLUSIVE
    return DeficiencyResult(verdict, fit.exponent, last_ratio, float(log_partial[-1]),
                            f"|P_k|^2 decay exponent {fit.exponent}: {fit.reason}")


def truncated_spectrum(J: JacobiMatrix, N: int) -> SpectralSequence:
    """Eigenvalues of the leading N x N block (no tail model)."""
    if int(N) != N or N < 2:
        raise InvalidParameterError("N must be an integer >= 2")
    w = eigh_tridiagonal(J.q_array(N), J.b_array(N - 1), eigvals_only=True)
    return SpectralSequence.from_values(w)
