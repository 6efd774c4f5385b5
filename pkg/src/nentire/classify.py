"""Spectral tests deciding whether a pair of extension spectra is n-entire.

Three conditions are checked on the spectra Sp(A_0) (``seq_a``) and
Sp(A_gamma) (``seq_b``):

* C1  the symmetric sums of 1/x over the zeros of s_gamma converge;
* C2  the one-sided counting densities j/|x_j| agree;
* C3  the series of |x_j^{-2n} / (h_0(x_j) h_gamma'(x_j))| converges.

Finite data cannot prove convergence, so every decision is made from a fit
of the tail and reports ``inconclusive`` when the fit is not decisive.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from enum import Enum

import numpy as np

from . import products
from .errors import InconclusiveError
from .products import CanonicalProduct
from .spectra import BRANCHES, ExtensionPair, SpectralSequence, require_interlaced

# series decision band on the fitted decay exponent
PASS_EXPONENT = 1.05
FAIL_EXPONENT = 0.95
MAX_EXPONENT_STDERR = 0.05

DEFAULT_J_MAX = 100_000
DEFAULT_N_MAX = 4
C2_TOL = 1e-3
C1_ABS_TOL = 1e-8

ASSUMPTIONS = (
    "e(x) != 0 for real x (not verifiable from spectra alone)",
    "e(0) = 1/sin(gamma) normalization not verified; constant factors do not affect C3",
)


class Verdict(str, Enum):
    PASS = "pass"
    FAIL = "fail"
    INCONCLUSIVE = "inconclusive"

    def __str__(self):
        return self.value


def default_schedule() -> np.ndarray:
    return np.geomspace(10.0, 1e6, 25)


@dataclass
class C1Result:
    verdict: Verdict
    limit: float | None
    error: float | None
    reason: str = ""
    trace: list = field(default_factory=list)


@dataclass
class C2Result:
    verdict: Verdict
    densities: tuple
    residuals: tuple = (0.0, 0.0)
    reason: str = ""


@dataclass
class C3Result:
    verdict: Verdict
    exponent: float | None
    stderr: float | None = None
    partial_sums: list = field(default_factory=list)
    reason: str = ""


@dataclass
class ClassificationReport:
    c1: C1Result
    c2: C2Result
    c3: dict
    minimal_n: int | str
    diagnostics: dict = field(default_factory=dict)
    assumptions: tuple = ASSUMPTIONS

    def to_dict(self) -> dict:
        d = asdict(self)
        d["c3"] = {str(n): asdict(r) for n, r in self.c3.items()}
        return _plain(d)

    def to_json(self, **kw) -> str:
        from .io import dumps17
        return dumps17(self.to_dict(), **kw)


def _plain(obj):
    """Recursively convert numpy scalars, tuples and enums to JSON types."""
    if isinstance(obj, Verdict):
        return obj.value
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    return obj


# ---------------------------------------------------------------- C1

def _symmetric_sums(seq: SpectralSequence, radii: np.ndarray):
    """S(r) = sum over 0 < |x| <= r of 1/x, plus the per-branch counts."""
    out = []
    for name in BRANCHES:
        b = np.abs(seq.branch(name))
        csum = np.concatenate([[0.0], np.cumsum(1.0 / b)])
        counts = np.searchsorted(b, radii * (1 + 1e-15), side="right")
        out.append((csum[counts], counts))
    (sp, n_pos), (sn, n_neg) = out
    return sp - sn, n_pos, n_neg


def _c1_tolerance(seq: SpectralSequence, r: float, n_pos: int, n_neg: int) -> float:
    """How far S(r) may still move beyond radius r under the tail model."""
    tail = seq.tail
    if tail is None:
        return 0.0
    infinite = [b for b in BRANCHES if seq.is_infinite(b)]
    if len(infinite) == 2:
        return 2.0 * (1 + abs(int(n_pos) - int(n_neg))) / r
    if len(infinite) == 1 and tail.exponent > 1:
        p, c = tail.exponent, tail.coefficient
        t = (r / c) ** (1.0 / p)
        return 2.0 * t ** (1 - p) / (c * (p - 1))
    return 0.0


def _trend(radii: np.ndarray, sums: np.ndarray):
    """Best of a log or power-law fit to |S(r)|; returns (kind, r2) or None."""
    lr = np.log(radii)
    fits = []
    if np.ptp(lr) > 0:
        coef = np.polyfit(lr, sums, 1)
        resid = sums - np.polyval(coef, lr)
        ss = np.sum((sums - sums.mean()) ** 2)
        if ss > 0:
            fits.append(("log", 1 - np.sum(resid ** 2) / ss))
        mag = np.abs(sums)
        if np.all(mag > 0):
            lm = np.log(mag)
            coef = np.polyfit(lr, lm, 1)
            resid = lm - np.polyval(coef, lr)
            ss = np.sum((lm - lm.mean()) ** 2)
            if ss > 0 and coef[0] > 0:
                fits.append(("power", 1 - np.sum(resid ** 2) / ss))
    if not fits:
        return None
    return max(fits, key=lambda f: f[1])


def test_c1(seq: SpectralSequence, r_schedule=None) -> C1Result:
    """Symmetric-sum test on the reciprocals of the nonzero eigenvalues."""
    radii = np.asarray(default_schedule() if r_schedule is None else r_schedule, dtype=float)
    if radii.size < 4 or np.any(np.diff(radii) <= 0) or radii[0] <= 0:
        raise ValueError("r_schedule must be at least 4 increasing positive radii")
    if len(seq) == 0:
        raise ValueError("empty spectral sequence")
    cover = seq.coverage()
    if seq.tail is None and radii[-1] > cover:
        return C1Result(Verdict.INCONCLUSIVE, None, None,
                        f"insufficient data: schedule reaches {radii[-1]:g} but stored "
                        f"zeros are complete only up to {cover:g}")
    radii = radii[radii <= cover]
    if radii.size < 4:
        return C1Result(Verdict.INCONCLUSIVE, None, None,
                        f"insufficient data: fewer than 4 schedule radii below {cover:g}")
    sums, n_pos, n_neg = _symmetric_sums(seq, radii)
    trace = [(float(r), float(s)) for r, s in zip(radii, sums)]
    half = radii.size // 2
    diffs = np.abs(np.diff(sums))
    tol = np.array([C1_ABS_TOL + _c1_tolerance(seq, r, p, n)
                    for r, p, n in zip(radii[:-1], n_pos[:-1], n_neg[:-1])])
    late = slice(half - 1, None)
    if np.all(diffs[late] <= tol[late]):
        limit, err = _c1_limit(seq, cover)
        err = max(err, float(tol[-1]))
        return C1Result(Verdict.PASS, limit, err, "symmetric sums settle", trace)
    steps = np.diff(sums)[late]
    consistent = np.all(steps > tol[late]) or np.all(steps < -tol[late])
    trend = _trend(radii[half:], sums[half:])
    if consistent and trend is not None and trend[1] > 0.99:
        return C1Result(Verdict.FAIL, None, None,
                        f"symmetric sums grow with a {trend[0]} trend (R^2={trend[1]:.4f})", trace)
    return C1Result(Verdict.INCONCLUSIVE, float(sums[-1]), None,
                    "symmetric sums neither settle nor show a consistent trend", trace)


def _c1_limit(seq: SpectralSequence, cover: float):
    """Full stored sum plus the tail-model remainder, with a halving error estimate."""
    def estimate(radius):
        s, _, _ = _symmetric_sums(seq, np.array([radius]))
        if seq.tail is None or not math.isfinite(radius):
            return float(s[0])
        lay = CanonicalProduct(seq).layout_at(radius)
        return float(s[0]) + lay.linear_tail

    if not math.isfinite(cover):
        return estimate(cover), 0.0
    full = estimate(cover)
    try:
        half = estimate(cover / 2)
    except InconclusiveError:
        return full, math.inf
    return full, abs(full - half)


# ---------------------------------------------------------------- C2

def _branch_density(x: np.ndarray):
    """(limit, relative residual, diverges) for j/|x_j| on the last half."""
    j = np.arange(1, x.size + 1, dtype=float)
    start = x.size // 2
    jj = j[start:]
    y = jj / np.abs(x[start:])
    design = np.column_stack([np.ones_like(jj), 1 / jj, 1 / jj ** 2])
    coef, *_ = np.linalg.lstsq(design, y, rcond=None)
    resid = y - design @ coef
    scale = max(float(np.max(np.abs(y))), 1e-300)
    rel = float(np.sqrt(np.mean(resid ** 2)) / scale)
    # growth check on the log-log slope of the density itself
    slope = np.polyfit(np.log(jj), np.log(y), 1)[0]
    return float(coef[0]), rel, bool(slope > 0.05)


def test_c2(seq: SpectralSequence, min_terms: int = 16) -> C2Result:
    """Compare the one-sided densities lim j/x_j^+ and -lim j/x_j^-."""
    if len(seq) == 0:
        raise ValueError("empty spectral sequence")
    dens, resids = [], []
    for name in BRANCHES:
        x = seq.branch(name)
        if not seq.is_infinite(name) or x.size == 0:
            dens.append(0.0)
            resids.append(0.0)
            continue
        if x.size < min_terms:
            return C2Result(Verdict.INCONCLUSIVE, (None, None), (None, None),
                            f"{name} branch has only {x.size} terms")
        limit, rel, diverges = _branch_density(x)
        if diverges:
            return C2Result(Verdict.FAIL, (math.inf, math.inf), (rel, rel),
                            f"{name} density j/|x_j| diverges")
        dens.append(limit)
        resids.append(rel)
    d = (dens[0], dens[1])
    if max(resids) >= C2_TOL:
        return C2Result(Verdict.INCONCLUSIVE, d, tuple(resids), "poor density fit")
    if abs(d[0] - d[1]) <= C2_TOL * max(1.0, abs(d[0]), abs(d[1])):
        return C2Result(Verdict.PASS, d, tuple(resids), "one-sided densities agree")
    return C2Result(Verdict.FAIL, d, tuple(resids),
                    f"one-sided densities differ ({d[0]:.6g} vs {d[1]:.6g})")


# ---------------------------------------------------------------- C3

def series_verdict(j, terms=None, fit_from: float | None = None, *,
                   log_terms=None) -> C3Result:
    """Decide convergence of sum t_j from a power-law fit t_j ~ C j^{-p}.

    Terms may be given directly or as ``log_terms`` (for values that would
    overflow).  Only indices ``j >= fit_from`` enter the fit (default: sqrt
    of the largest index, at least 8).  Verdicts: pass when p > 1.05, fail
    when p < 0.95, inconclusive in between or when the slope is poorly
    determined.
    """
    j = np.asarray(j, dtype=float)
    if log_terms is None:
        t = np.asarray(terms, dtype=float)
        if np.any(t <= 0) or not np.all(np.isfinite(t)):
            return C3Result(Verdict.INCONCLUSIVE, None, None, [], "nonpositive or nonfinite terms")
        with np.errstate(divide="ignore"):
            logt = np.log(t)
    else:
        logt = np.asarray(log_terms, dtype=float)
        if not np.all(np.isfinite(logt)):
            return C3Result(Verdict.INCONCLUSIVE, None, None, [], "nonfinite terms")
    if j.size != logt.size or j.size == 0:
        raise ValueError("j and terms must be nonempty and of equal length")
    if fit_from is None:
        fit_from = max(8.0, math.sqrt(j.max()))
    mask = j >= fit_from
    if mask.sum() < 8:
        return C3Result(Verdict.INCONCLUSIVE, None, None, [], "too few terms in the fit range")
    (slope, icpt), cov = np.polyfit(np.log(j[mask]), logt[mask], 1, cov=True)
    p = -float(slope)
    stderr = float(math.sqrt(max(cov[0, 0], 0.0)))
    partial = _partial_sums(j, np.exp(logt)) if logt.max() < 700 else []
    if stderr > MAX_EXPONENT_STDERR:
        return C3Result(Verdict.INCONCLUSIVE, p, stderr, partial, "decay exponent poorly determined")
    if p > PASS_EXPONENT:
        return C3Result(Verdict.PASS, p, stderr, partial, "terms decay faster than 1/j")
    if p < FAIL_EXPONENT:
        return C3Result(Verdict.FAIL, p, stderr, partial, "terms decay no faster than 1/j")
    return C3Result(Verdict.INCONCLUSIVE, p, stderr, partial,
                    f"decay exponent {p:.3f} inside the dead band ({FAIL_EXPONENT}, {PASS_EXPONENT})")


def _partial_sums(j: np.ndarray, t: np.ndarray, checkpoints: int = 8) -> list:
    """Partial sums at a few indices; exact where every index was sampled,
    trapezoid in log-log space across gaps."""
    order = np.argsort(j)
    j, t = j[order], t[order]
    total, out = 0.0, []
    marks = set(np.unique(np.geomspace(1, j.size, checkpoints).astype(int) - 1))
    prev_j, prev_t = 0.0, None
    for k, (jk, tk) in enumerate(zip(j, t)):
        gap = jk - prev_j
        if prev_t is None or gap <= 1:
            total += tk
        else:
            # sum over prev_j+1..jk of a power law through the two samples
            ex = math.log(tk / prev_t) / math.log(jk / prev_j)
            idx = np.arange(prev_j + 1, jk + 1)
            total += float(np.sum(prev_t * (idx / prev_j) ** ex))
        prev_j, prev_t = jk, tk
        if k in marks:
            out.append((int(jk), total))
    return out


def sample_indices(count: int, dense: int = 64, total: int = 256) -> np.ndarray:
    """All indices up to ``dense`` plus log-spaced ones up to ``count`` (1-based)."""
    if count <= total:
        return np.arange(1, count + 1)
    tail = np.unique(np.geomspace(dense + 1, count, total - dense).round().astype(int))
    return np.unique(np.concatenate([np.arange(1, dense + 1), tail]))


@dataclass
class _C3Base:
    j: np.ndarray
    x: np.ndarray
    log_base: np.ndarray      # log of 1/|h_0(x) h_gamma'(x)|
    diagnostics: dict


def _c3_base(pair: ExtensionPair, j_max: int) -> _C3Base:
    a, b = pair.seq_a, pair.seq_b
    h0 = CanonicalProduct(a)
    hg = CanonicalProduct(b)
    limit = products.MAX_ANCHOR_RATIO * 0.5 * min(a.coverage(), b.coverage())
    zeros = b.nonzero_by_modulus()
    usable = zeros[np.abs(zeros) <= limit][:j_max]
    diag = {
        "c3_zero_of_seq_b_excluded": bool(b.has_zero),
        "c3_usable_zeros": int(usable.size),
        "c3_radius": float(min(limit, np.abs(usable[-1]) if usable.size else 0.0)),
        "tail_models": [a.tail is not None, b.tail is not None],
    }
    if usable.size == 0:
        return _C3Base(np.array([]), np.array([]), np.array([]), diag)
    j = sample_indices(usable.size)
    x = usable[j - 1]
    log_base = -(products.log_abs(h0, x) + products.log_abs_derivative_at_zeros(hg, x))
    return _C3Base(j.astype(float), x, log_base, diag)


def _c3_from_base(base: _C3Base, n: int) -> C3Result:
    if base.j.size == 0:
        return C3Result(Verdict.INCONCLUSIVE, None, None, [], "no usable zeros")
    logt = base.log_base - 2 * n * np.log(np.abs(base.x))
    return series_verdict(base.j, log_terms=logt)


def test_c3(pair: ExtensionPair, n: int, j_max: int = DEFAULT_J_MAX) -> C3Result:
    """Convergence test for the weighted series over the zeros of s_gamma."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    require_interlaced(pair)
    try:
        base = _c3_base(pair, j_max)
    except InconclusiveError as exc:
        return C3Result(Verdict.INCONCLUSIVE, None, None, [], str(exc))
    return _c3_from_base(base, n)


# ---------------------------------------------------------------- driver

def minimal_n(pair: ExtensionPair, n_max: int = DEFAULT_N_MAX, j_max: int = DEFAULT_J_MAX,
              r_schedule=None) -> ClassificationReport:
    """Run C1 and C2 on seq_b, then C3 for n = 0..n_max until the first pass."""
    if n_max < 0 or j_max <= 0:
        raise ValueError("budgets must be positive")
    require_interlaced(pair)
    c1 = test_c1(pair.seq_b, r_schedule)
    c2 = test_c2(pair.seq_b)
    diag = {"c1_seq_a": _diag_c1(pair.seq_a, r_schedule)}
    c3: dict = {}
    if Verdict.FAIL in (c1.verdict, c2.verdict):
        return ClassificationReport(c1, c2, c3, f"not n-entire up to {n_max}", diag)
    if Verdict.INCONCLUSIVE in (c1.verdict, c2.verdict):
        return ClassificationReport(c1, c2, c3, "inconclusive", diag)
    try:
        base = _c3_base(pair, j_max)
    except InconclusiveError as exc:
        diag["c3_error"] = str(exc)
        return ClassificationReport(c1, c2, c3, "inconclusive", diag)
    diag.update(base.diagnostics)
    result: int | str = f"not n-entire up to {n_max}"
    for n in range(n_max + 1):
        r = _c3_from_base(base, n)
        c3[n] = r
        if r.verdict is Verdict.PASS:
            result = n
            break
        if r.verdict is Verdict.INCONCLUSIVE:
            result = "inconclusive"
            break
    return ClassificationReport(c1, c2, c3, result, diag)


def _diag_c1(seq, r_schedule):
    try:
        r = test_c1(seq, r_schedule)
    except (ValueError, InconclusiveError) as exc:
        return {"verdict": "inconclusive", "reason": str(exc)}
    return _plain(asdict(r) | {"trace": r.trace[-3:]})


def report_consistent(report: ClassificationReport) -> bool:
    """Structural check tying minimal_n to the per-condition verdicts."""
    m = report.minimal_n
    verdicts = {int(n): r.verdict for n, r in report.c3.items()}
    seen_pass = False
    for n in sorted(verdicts):
        if seen_pass and verdicts[n] is not Verdict.PASS:
            return False
        seen_pass = seen_pass or verdicts[n] is Verdict.PASS
    if isinstance(m, int):
        return (report.c1.verdict is Verdict.PASS and report.c2.verdict is Verdict.PASS
                and verdicts.get(m) is Verdict.PASS
                and all(verdicts.get(k) is Verdict.FAIL for k in range(m)))
    if m == "inconclusive":
        return Verdict.INCONCLUSIVE in (report.c1.verdict, report.c2.verdict,
                                        *verdicts.values()) or "c3_error" in report.diagnostics
    return (Verdict.FAIL in (report.c1.verdict, report.c2.verdict)
            or (verdicts and all(v is Verdict.FAIL for v in verdicts.values())))
