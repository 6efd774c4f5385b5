"""Command-line front end: ``nentire spectrum | classify | gauge-verify | kernel``.

Exit codes: 0 definite result, 1 verification failed, 2 invalid input,
3 inconclusive (including numerical failures).
"""

from __future__ import annotations

import argparse
import math
import sys
from dataclasses import dataclass, field

import numpy as np

from . import classify, debranges, gauges, io, models, spectra
from .errors import InconclusiveError, InterlacingViolation, InvalidParameterError, NumericalFailure

EXIT_OK, EXIT_FAILED, EXIT_INPUT, EXIT_INCONCLUSIVE = 0, 1, 2, 3

POTENTIALS = {"sin": math.sin, "cos": math.cos, "zero": 0.0}


@dataclass
class RunConfig:
    command: str
    model: str | None = None
    params: dict = field(default_factory=dict)
    j_max: int | None = None
    n_max: int = classify.DEFAULT_N_MAX
    r_schedule: list | None = None
    fmt: str = "json"
    output: str | None = None

    def __post_init__(self):
        for name in ("j_max", "n_max"):
            v = getattr(self, name)
            if v is not None and (int(v) != v or v < (0 if name == "n_max" else 1)):
                raise InvalidParameterError(f"{name} must be a positive integer")
        if self.r_schedule is not None:
            r = np.asarray(self.r_schedule, dtype=float)
            if r.size < 4 or np.any(r <= 0) or np.any(np.diff(r) <= 0):
                raise InvalidParameterError("r schedule must be >= 4 increasing positive radii")
        if self.fmt not in ("json", "table"):
            raise InvalidParameterError("format must be json or table")


def parse_complex(text: str) -> complex:
    t = text.strip().replace(" ", "").replace("i", "j")
    if t in ("j", "+j"):
        return 1j
    if t == "-j":
        return -1j
    try:
        return complex(t)
    except ValueError as exc:
        raise InvalidParameterError(f"cannot parse complex number {text!r}") from exc


def _schedule(text: str | None):
    if text is None:
        return None
    try:
        lo, hi, steps = text.split(",")
        return list(np.geomspace(float(lo), float(hi), int(steps)))
    except ValueError as exc:
        raise InvalidParameterError("--r-schedule expects lo,hi,steps") from exc


def _potential(text: str):
    if text in POTENTIALS:
        return POTENTIALS[text]
    try:
        return spectra.load_potential(text)
    except OSError as exc:
        raise InvalidParameterError(f"cannot read potential {text!r}: {exc}") from exc


def _emit(text: str, output: str | None):
    if output:
        with open(output, "w") as fh:
            fh.write(text if text.endswith("\n") else text + "\n")
    else:
        print(text)


# ---------------------------------------------------------------- commands

def cmd_spectrum(cfg: RunConfig) -> int:
    p = cfg.params
    n = cfg.j_max
    if cfg.model == "momentum":
        seq = spectra.momentum_spectrum(p["a"], p["gamma"], n)
    elif cfg.model == "laplacian":
        seq = spectra.neumann_laplacian_spectrum(p["a"], p["beta"], n, include_zero=p["include_zero"])
    elif cfg.model == "harmonic":
        seq = spectra.harmonic_oscillator_spectrum(n)
    elif cfg.model == "schrodinger":
        seq = spectra.schrodinger_spectrum(p["a"], _potential(p["potential"]), p["beta"], n,
                                           cells=p["cells"], include_zero=p["include_zero"])
    else:
        raise InvalidParameterError(f"unknown model {cfg.model!r}")
    _emit(io.dumps17(io.spectral_to_dict(seq)), cfg.output)
    return EXIT_OK


def _pair_from_config(cfg: RunConfig) -> spectra.ExtensionPair:
    p = cfg.params
    if p.get("seq_a") or p.get("seq_b"):
        if not (p.get("seq_a") and p.get("seq_b")):
            raise InvalidParameterError("give both --seq-a and --seq-b")
        try:
            a, b = io.read_spectral(p["seq_a"]), io.read_spectral(p["seq_b"])
        except OSError as exc:
            raise InvalidParameterError(str(exc)) from exc
        return spectra.ExtensionPair(a, b, p.get("gamma") or math.pi / 2)
    if cfg.model is None:
        raise InvalidParameterError("give --model or --seq-a/--seq-b")
    kw = {"j_max": cfg.j_max}
    if cfg.model in ("momentum", "laplacian", "schrodinger"):
        kw["a"] = p.get("a")
    if cfg.model == "schrodinger":
        kw["potential"] = _potential(p.get("potential") or "sin")
    return models.builtin_pair(cfg.model, **kw)


def _table(report: classify.ClassificationReport) -> str:
    lines = [f"minimal_n: {report.minimal_n}",
             f"C1: {report.c1.verdict}  limit={report.c1.limit}  error={report.c1.error}  {report.c1.reason}",
             f"C2: {report.c2.verdict}  densities={report.c2.densities}  {report.c2.reason}"]
    for n, r in report.c3.items():
        lines.append(f"C3(n={n}): {r.verdict}  exponent={r.exponent}  {r.reason}")
    return "\n".join(lines)


def cmd_classify(cfg: RunConfig) -> int:
    pair = _pair_from_config(cfg)
    report = classify.minimal_n(pair, n_max=cfg.n_max,
                                j_max=cfg.params.get("j_max_c3") or classify.DEFAULT_J_MAX,
                                r_schedule=cfg.r_schedule)
    _emit(report.to_json() if cfg.fmt == "json" else _table(report), cfg.output)
    return EXIT_INCONCLUSIVE if report.minimal_n == "inconclusive" else EXIT_OK


def _load_gauges(path: str | None, model: str, a: float):
    if path is None:
        pair = (gauges.default_momentum_gauge(a) if model == "momentum"
                else gauges.default_laplacian_gauge(a))
        return list(pair)
    data = io.read_json(path)
    items = data if isinstance(data, list) else data.get("gauges", [data]) if isinstance(data, dict) else None
    if not items:
        raise InvalidParameterError("gauge file holds no gauges")
    gs = [gauges.PiecewisePolyGauge.from_dict(d) for d in items]
    by_comp = {g.component: g for g in gs}
    if len(by_comp) != len(gs):
        raise InvalidParameterError("duplicate gauge components")
    return [by_comp.get(0), by_comp.get(1)]


def cmd_gauge_verify(cfg: RunConfig) -> int:
    p = cfg.params
    model, a = cfg.model, p["a"]
    if model not in ("momentum", "laplacian"):
        raise InvalidParameterError("gauge-verify supports momentum and laplacian")
    mu0, mu1 = _load_gauges(p.get("gauge"), model, a)
    if mu0 is None:
        raise InvalidParameterError("a component-0 gauge is required")
    if mu1 is None:
        lo, hi = mu0.interval
        mu1 = gauges.PiecewisePolyGauge((lo, hi), (gauges.Piece(lo, hi, (0j,)),), 1)
    if p.get("zero_mu1"):
        mu1 = mu1.scaled(0)
    if p.get("scale_mu1") is not None:
        mu1 = mu1.scaled(p["scale_mu1"])
    check = (gauges.verify_momentum_gauge if model == "momentum"
             else gauges.verify_laplacian_gauge)(a, mu0, mu1, tol=p["tol"])
    out = {"model": model, "a": a, "pass": check.ok, "max_residual": check.max_residual,
           "worst_point": [check.worst_point.real, check.worst_point.imag]}
    if cfg.fmt == "json":
        _emit(io.dumps17(out), cfg.output)
    else:
        _emit(f"{'PASS' if check.ok else 'FAIL'}  max residual {check.max_residual:.3e}", cfg.output)
    return EXIT_OK if check.ok else EXIT_FAILED


def cmd_kernel(cfg: RunConfig) -> int:
    p = cfg.params
    if cfg.model != "momentum":
        raise InvalidParameterError("kernel supports the momentum model")
    a, z, w = p["a"], p["z"], p["w"]
    if p.get("e_w0") is not None:
        e = debranges.e_from_kernel(debranges.momentum_kernel_evaluator(a), p["e_w0"])
        value = complex(e(z))
        out = {"e": [value.real, value.imag], "hb_check": bool(debranges.hb_check(e))}
    else:
        value = debranges.momentum_kernel(a, z, w)
        quad = debranges.momentum_kernel_quadrature(a, z, w)
        out = {"k": [value.real, value.imag], "quadrature_delta": abs(value - quad)}
    if cfg.fmt == "json":
        _emit(io.dumps17(out), cfg.output)
    else:
        _emit("  ".join(f"{k}={v}" for k, v in out.items()), cfg.output)
    return EXIT_OK


# ---------------------------------------------------------------- parsing

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="nentire", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, models_):
        p.add_argument("--model", choices=models_)
        p.add_argument("--a", type=float, default=math.pi)
        p.add_argument("--format", dest="fmt", choices=("json", "table"), default="json")
        p.add_argument("--output", "-o")

    sp = sub.add_parser("spectrum", help="write a spectral sequence file")
    common(sp, models.MODELS)
    sp.add_argument("--gamma", type=float, default=0.0)
    sp.add_argument("--beta", type=float, default=0.0)
    sp.add_argument("--terms", type=int, default=1000)
    sp.add_argument("--potential", default="sin", help="sin, cos, zero or a two-column file")
    sp.add_argument("--cells", type=int, default=2048)
    sp.add_argument("--include-zero", action="store_true")

    cp = sub.add_parser("classify", help="classify a pair of extension spectra")
    common(cp, models.MODELS)
    cp.add_argument("--seq-a")
    cp.add_argument("--seq-b")
    cp.add_argument("--gamma", type=float)
    cp.add_argument("--terms", type=int, help="eigenvalues per built-in spectrum")
    cp.add_argument("--j-max", type=int, help="terms used by the C3 series test")
    cp.add_argument("--n-max", type=int, default=classify.DEFAULT_N_MAX)
    cp.add_argument("--r-schedule", help="lo,hi,steps for the C1 radii")
    cp.add_argument("--potential")

    gp = sub.add_parser("gauge-verify", help="check a gauge identity in closed form")
    common(gp, ("momentum", "laplacian"))
    gp.add_argument("--gauge", help="gauge JSON file (default: the built-in pair)")
    gp.add_argument("--zero-mu1", action="store_true")
    gp.add_argument("--scale-mu1", type=float)
    gp.add_argument("--tol", type=float, default=1e-12)

    kp = sub.add_parser("kernel", help="evaluate the momentum reproducing kernel")
    common(kp, ("momentum",))
    kp.add_argument("--z", default="0")
    kp.add_argument("--w", default="0")
    kp.add_argument("--e-w0", help="evaluate e built from the kernel at w0 instead")
    return ap


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    params = {k: v for k, v in vars(ns).items()
              if k not in ("command", "model", "fmt", "output", "terms", "j_max", "n_max", "r_schedule")}
    if ns.command == "kernel":
        params["z"] = parse_complex(ns.z)
        params["w"] = parse_complex(ns.w)
        params["e_w0"] = parse_complex(ns.e_w0) if ns.e_w0 else None
    if "a" in params and not params["a"] > 0:
        raise InvalidParameterError("--a must be positive")
    j_max = getattr(ns, "terms", None)
    if ns.command == "classify":
        params["j_max_c3"] = ns.j_max
    if ns.command == "spectrum" and ns.model is None:
        raise InvalidParameterError("--model is required")
    if ns.command in ("gauge-verify", "kernel") and ns.model is None:
        ns.model = "momentum"
    return RunConfig(ns.command, ns.model, params, j_max,
                     getattr(ns, "n_max", classify.DEFAULT_N_MAX),
                     _schedule(getattr(ns, "r_schedule", None)), ns.fmt, ns.output)


COMMANDS = {"spectrum": cmd_spectrum, "classify": cmd_classify,
            "gauge-verify": cmd_gauge_verify, "kernel": cmd_kernel}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        cfg = config_from_args(ns)
        return COMMANDS[cfg.command](cfg)
    except (InvalidParameterError, InterlacingViolation) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (InconclusiveError, NumericalFailure) as exc:
        print(f"inconclusive: {exc}", file=sys.stderr)
        return EXIT_INCONCLUSIVE


if __name__ == "__main__":
    sys.exit(main())
