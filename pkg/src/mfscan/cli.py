"""Command-line front end.

Subcommands map one-to-one onto the scanner and table operations; every
flag's help text states its precondition.  Usage problems (unknown
flags, bad spec grammar, violated preconditions) exit 1 with a message;
capacity failures exit 2 with a machine-readable JSON object on stderr.
An optional flat ``key = value`` config file seeds any subcommand's
flags, with explicit flags winning.
"""

from __future__ import annotations

import argparse
import math
import sys
from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np

from . import analytic, dickman, mfunc, scanners, serialize
from ._parallel import default_threads
from .errors import CapacityError, UsageError
from .s_system import bind_to_x, parse_system, validate
from .sieve import Window, sieve_factorize

SUBCOMMANDS = (
    "sieve",
    "scan-short",
    "scan-bilinear",
    "chowla",
    "signs",
    "smooth",
    "dickman",
    "halasz",
    "s-system",
)


@dataclass
class RunConfig:
    subcommand: str
    function: Optional[mfunc.MultiplicativeFunctionSpec] = None
    args: Dict[str, object] = field(default_factory=dict)
    output: str = "csv"
    out_path: Optional[str] = None
    svg_path: Optional[str] = None
    threads: int = 1
    seed: int = 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mfscan",
        description="Multiplicative-function short-interval scanners and sieve tables",
    )
    parser.add_argument(
        "--config",
        help="flat 'key = value' file applied before flags (flags override)",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def add_common(p, function=True):
        if function:
            p.add_argument(
                "--f",
                default="liouville",
                help="function spec: one | moebius | liouville | abs_moebius | "
                "smooth:<y> | negp:<p1,p2,...>",
            )
        p.add_argument("--output", choices=("csv", "json"), default="csv")
        p.add_argument("--out", help="output path (default stdout)")
        p.add_argument("--svg", help="also write a minimal SVG plot to this path")
        p.add_argument(
            "--threads",
            type=int,
            default=default_threads(),
            help="worker count; >= 1 (results are identical for any value)",
        )
        p.add_argument("--seed", type=int, default=0, help="sampling seed; >= 0")

    p = sub.add_parser("sieve", help="factor a window exactly")
    p.add_argument("--start", type=int, required=True, help="window start; >= 1")
    p.add_argument(
        "--len", type=int, required=True, help="window length; >= 1, end <= 2^62"
    )
    add_common(p, function=False)

    p = sub.add_parser("scan-short", help="short-vs-long average discrepancy scan")
    add_common(p)
    p.add_argument("--X", type=int, required=True, help="range base; X >= h >= 2")
    p.add_argument("--h", type=int, required=True, help="interval length; 2 <= h <= X")
    p.add_argument("--delta", type=float, default=0.1, help="threshold offset; > 0")
    p.add_argument("--samples", type=int, default=100, help="sampled windows; >= 1")
    p.add_argument(
        "--system",
        help="optional S-set restriction: auto:eta,logP1,logQ1,count or "
        "explicit:P1-Q1[,...]; J binds via sqrt(log X)",
    )

    p = sub.add_parser("scan-bilinear", help="bilinear square-root-interval average")
    add_common(p)
    p.add_argument("--x", type=int, required=True, help="base point; >= h, <= 10^12")
    p.add_argument("--h", type=int, required=True, help="scaled length; 10 <= h <= x")
    p.add_argument("--system", help="optional S-set restriction (see scan-short)")

    p = sub.add_parser("chowla", help="shift correlation (1/X) sum f(n) f(n+h)")
    add_common(p)
    p.add_argument("--h", type=int, required=True, help="shift; >= 1")
    p.add_argument("--X", type=int, required=True, help="range; X >= h")

    p = sub.add_parser("signs", help="sign changes of the zero-skipped sequence")
    add_common(p)
    p.add_argument("--X", type=int, required=True, help="range; >= 2")
    p.add_argument(
        "--psi",
        type=int,
        help="when set, sample intervals [x, x+psi] instead; psi >= 2",
    )
    p.add_argument("--samples", type=int, default=100, help="sampled windows; >= 1")

    p = sub.add_parser("smooth", help="smooth numbers in short intervals")
    add_common(p, function=False)
    p.add_argument("--X", type=int, required=True, help="range base; >= 2")
    p.add_argument("--u", type=float, help="smoothness index; >= 1 (interval scan)")
    p.add_argument("--psi", type=int, default=1000, help="interval length; >= 10")
    p.add_argument("--samples", type=int, default=100, help="sampled intervals; >= 1")
    p.add_argument(
        "--eps",
        type=float,
        help="smoothness exponent for the sqrt-interval count; in (0, 1]",
    )

    p = sub.add_parser("dickman", help="smooth-number density table")
    add_common(p, function=False)
    p.add_argument("--u", type=float, help="evaluate rho(u); 0 <= u <= 20")
    p.add_argument("--table", help="dump the full (u, rho) grid as CSV to this path")

    p = sub.add_parser("halasz", help="distance-based mean bound shape vs measurement")
    add_common(p)
    p.add_argument("--x", type=int, required=True, help="prime cutoff / range base; >= 16")
    p.add_argument("--T0", type=float, default=10.0, help="twist window; >= 1")
    p.add_argument("--tmin", type=float, default=0.0, help="first t of the sweep")
    p.add_argument("--tmax", type=float, default=10.0, help="last t of the sweep")
    p.add_argument("--tsteps", type=int, default=11, help="sweep points; >= 1")

    p = sub.add_parser("s-system", help="validate an interval system and bind J")
    add_common(p, function=False)
    p.add_argument(
        "--system",
        required=True,
        help="auto:eta,logP1,logQ1,count or explicit:P1-Q1[,...]",
    )
    p.add_argument("--X", type=int, help="bind J against this X; >= 16")
    p.add_argument("--logX", type=float, help="bind J against log X directly")

    return parser


def _apply_config_file(argv: List[str], path: str) -> List[str]:
    """Turn 'key = value' lines into leading flags (so real flags override)."""
    injected: List[str] = []
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{line_no}: expected 'key = value'")
            key, value = (part.strip() for part in line.split("=", 1))
            injected.extend([f"--{key}", value])
    # argv[0] is the subcommand; injected flags go right after it.
    return argv[:1] + injected + argv[1:]


def parse(argv: List[str]) -> RunConfig:
    """Parse argv into a validated RunConfig; raises UsageError on any problem."""
    parser = _build_parser()
    if "--config" in argv:
        idx = argv.index("--config")
        if idx + 1 >= len(argv):
            raise UsageError("--config needs a path")
        path = argv[idx + 1]
        rest = argv[:idx] + argv[idx + 2 :]
        if not rest:
            raise UsageError("config file without a subcommand")
        argv = _apply_config_file(rest, path)
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        if exc.code not in (0, None):
            raise UsageError("bad command line") from None
        raise
    cfg = RunConfig(
        subcommand=ns.subcommand,
        output=getattr(ns, "output", "csv"),
        out_path=getattr(ns, "out", None),
        svg_path=getattr(ns, "svg", None),
        threads=max(1, getattr(ns, "threads", 1)),
        seed=getattr(ns, "seed", 0),
    )
    if hasattr(ns, "f"):
        cfg.function = mfunc.parse_function(ns.f)
    cfg.args = {
        k: v
        for k, v in vars(ns).items()
        if k
        not in {"subcommand", "f", "output", "out", "svg", "threads", "seed", "config"}
    }
    _validate_config(cfg)
    return cfg


def _validate_config(cfg: RunConfig) -> None:
    a = cfg.args
    sc = cfg.subcommand
    if cfg.seed < 0:
        raise UsageError("--seed must be >= 0")
    if sc == "sieve":
        if a["start"] < 1:
            raise UsageError("--start must be >= 1")
        if a["len"] < 1:
            raise UsageError("--len must be >= 1")
    elif sc == "scan-short":
        if not 2 <= a["h"] <= a["X"]:
            raise UsageError("scan-short needs 2 <= --h <= --X")
        if a["delta"] <= 0:
            raise UsageError("--delta must be > 0")
        if a["samples"] < 1:
            raise UsageError("--samples must be >= 1")
    elif sc == "scan-bilinear":
        if a["h"] < 10:
            raise UsageError("scan-bilinear needs --h >= 10")
        if a["h"] > a["x"]:
            raise UsageError("scan-bilinear needs --h <= --x")
    elif sc == "chowla":
        if a["h"] < 1:
            raise UsageError("chowla needs --h >= 1")
        if a["X"] < a["h"]:
            raise UsageError("chowla needs --X >= --h")
    elif sc == "signs":
        if a["X"] < 2:
            raise UsageError("signs needs --X >= 2")
        if a.get("psi") is not None and a["psi"] < 2:
            raise UsageError("signs needs --psi >= 2")
    elif sc == "smooth":
        if a.get("eps") is None and a.get("u") is None:
            raise UsageError("smooth needs --u (interval scan) or --eps (sqrt count)")
        if a.get("u") is not None and a["u"] < 1:
            raise UsageError("smooth needs --u >= 1")
        if a.get("eps") is not None and not 0 < a["eps"] <= 1:
            raise UsageError("smooth needs --eps in (0, 1]")
        if a.get("u") is not None and a["psi"] < 10:
            raise UsageError("smooth needs --psi >= 10")
    elif sc == "dickman":
        if a.get("u") is None and a.get("table") is None:
            raise UsageError("dickman needs --u or --table")
        if a.get("u") is not None and not 0 <= a["u"] <= 20:
            raise UsageError("dickman needs 0 <= --u <= 20")
    elif sc == "halasz":
        if a["x"] < 16:
            raise UsageError("halasz needs --x >= 16")
        if a["T0"] < 1:
            raise UsageError("halasz needs --T0 >= 1")
        if a["tsteps"] < 1:
            raise UsageError("halasz needs --tsteps >= 1")


def _emit(cfg: RunConfig, text: str) -> None:
    if cfg.out_path:
        with open(cfg.out_path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _restriction(cfg: RunConfig, x_for_binding: int):
    text = cfg.args.get("system")
    if not text:
        return None
    system = parse_system(text)
    j = bind_to_x(system, x_for_binding)
    return system, j


def run(cfg: RunConfig) -> int:
    """Execute a validated config; returns the process exit code."""
    sc = cfg.subcommand
    a = cfg.args
    if sc == "sieve":
        table = sieve_factorize(Window(a["start"], a["len"]))
        _emit(cfg, serialize.factor_csv(table))
        return 0

    if sc == "scan-short":
        report = scanners.scan_short(
            cfg.function,
            a["X"],
            a["h"],
            a["delta"],
            a["samples"],
            cfg.seed,
            restrict=_restriction(cfg, a["X"]),
            threads=cfg.threads,
        )
        if cfg.output == "json":
            _emit(cfg, serialize.scan_report_to_json(report) + "\n")
        else:
            _emit(cfg, serialize.scan_report_to_csv(report))
        if cfg.svg_path:
            svg = serialize.histogram_svg(
                [r.diff for r in report.records], title="short-vs-long |diff|"
            )
            with open(cfg.svg_path, "w", encoding="utf-8") as fh:
                fh.write(svg)
        return 0

    if sc == "scan-bilinear":
        result = scanners.scan_bilinear(
            cfg.function, a["x"], a["h"], restrict=_restriction(cfg, a["x"])
        )
        if cfg.output == "json":
            _emit(
                cfg,
                serialize.dumps(
                    {"lhs": result.lhs, "rhs": result.rhs, "diff": result.diff}
                )
                + "\n",
            )
        else:
            _emit(
                cfg,
                "lhs,rhs,diff\n"
                f"{serialize.fmt_float(result.lhs)},{serialize.fmt_float(result.rhs)},"
                f"{serialize.fmt_float(result.diff)}\n",
            )
        return 0

    if sc == "chowla":
        value = scanners.correlation(cfg.function, a["h"], a["X"], threads=cfg.threads)
        if cfg.output == "json":
            _emit(cfg, serialize.dumps({"h": a["h"], "X": a["X"], "value": value}) + "\n")
        else:
            _emit(cfg, serialize.correlation_csv(a["h"], a["X"], value))
        return 0

    if sc == "signs":
        if a.get("psi") is not None:
            scan = scanners.sign_change_in_intervals(
                cfg.function, a["X"], a["psi"], a["samples"], cfg.seed, cfg.threads
            )
            if cfg.output == "json":
                _emit(
                    cfg,
                    serialize.dumps(
                        {
                            "X": a["X"],
                            "psi": a["psi"],
                            "samples": scan.samples,
                            "hits": scan.hits,
                            "fraction": scan.fraction,
                        }
                    )
                    + "\n",
                )
            else:
                _emit(
                    cfg,
                    "X,psi,samples,hits,fraction\n"
                    f"{a['X']},{a['psi']},{scan.samples},{scan.hits},"
                    f"{serialize.fmt_float(scan.fraction)}\n",
                )
            return 0
        result = scanners.sign_changes(cfg.function, a["X"], threads=cfg.threads)
        if cfg.output == "json":
            _emit(
                cfg,
                serialize.dumps(
                    {
                        "X": a["X"],
                        "count": result.count,
                        "nonzero": result.nonzero,
                        "density": result.count / a["X"],
                    }
                )
                + "\n",
            )
        else:
            _emit(cfg, serialize.signs_csv(a["X"], result.count, result.nonzero))
        return 0

    if sc == "smooth":
        if a.get("eps") is not None:
            result = scanners.smooth_in_sqrt_interval(a["eps"], a["X"])
            payload = {
                "eps": result.eps,
                "X": result.X,
                "constant": result.constant,
                "window_length": result.window_length,
                "truncated": result.truncated,
                "count": result.count,
                "threshold": result.threshold,
            }
            if cfg.output == "json":
                _emit(cfg, serialize.dumps(payload) + "\n")
            else:
                keys = ",".join(payload)
                vals = ",".join(
                    serialize.fmt_float(v) if isinstance(v, float) else str(v)
                    for v in payload.values()
                )
                _emit(cfg, f"{keys}\n{vals}\n")
            return 0
        scan = scanners.smooth_in_intervals(
            a["u"], a["X"], a["psi"], a["samples"], cfg.seed, threads=cfg.threads
        )
        if cfg.output == "json":
            _emit(
                cfg,
                serialize.dumps(
                    {
                        "u": scan.u,
                        "X": scan.X,
                        "psi": scan.psi,
                        "samples": scan.samples,
                        "seed": scan.seed,
                        "expected": scan.expected,
                        "mean_count": scan.mean_count,
                        "ratio": scan.ratio,
                        "records": [
                            {"x": x, "count": c} for x, c in zip(scan.xs, scan.counts)
                        ],
                    }
                )
                + "\n",
            )
        else:
            _emit(cfg, serialize.smooth_scan_csv(scan))
        return 0

    if sc == "dickman":
        table = dickman.default_table()
        if a.get("table"):
            us = np.arange(table.values.size) * table.step
            lines = ["u,rho"]
            for u, r in zip(us, table.values):
                lines.append(f"{serialize.fmt_float(float(u))},{serialize.fmt_float(float(r))}")
            with open(a["table"], "w", encoding="utf-8") as fh:
                fh.write("\n".join(lines) + "\n")
        if a.get("u") is not None:
            value = dickman.rho(a["u"], table)
            _emit(cfg, serialize.fmt_float(value) + "\n")
        if cfg.svg_path:
            us = np.arange(table.values.size) * table.step
            svg = serialize.curve_svg(us, table.values, title="smooth density rho(u)")
            with open(cfg.svg_path, "w", encoding="utf-8") as fh:
                fh.write(svg)
        return 0

    if sc == "halasz":
        ts = np.linspace(a["tmin"], a["tmax"], a["tsteps"])
        poly = analytic.build_poly(cfg.function, a["x"], normalize=True)
        lines = ["t,measured,shape_bound,ratio"]
        for t in ts:
            measured = abs(analytic.eval_at(poly, 0.0, float(t)))
            shape = analytic.halasz_bound_shape(cfg.function, a["x"], a["T0"], float(t))
            ratio = measured / shape if shape else math.inf
            lines.append(
                f"{serialize.fmt_float(float(t))},{serialize.fmt_float(measured)},"
                f"{serialize.fmt_float(shape)},{serialize.fmt_float(ratio)}"
            )
        _emit(cfg, "\n".join(lines) + "\n")
        return 0

    if sc == "s-system":
        system = parse_system(a["system"])
        violations = validate(system)
        j = None
        if a.get("X") is not None or a.get("logX") is not None:
            j = bind_to_x(system, a.get("X"), log_x=a.get("logX"))
        payload = {
            "eta": system.eta,
            "intervals": [[lp, lq] for lp, lq in system.intervals],
            "violations": [
                {"j": v.j, "condition": v.condition, "lhs": v.lhs, "rhs": v.rhs}
                for v in violations
            ],
            "J": j,
        }
        _emit(cfg, serialize.dumps(payload) + "\n")
        for v in violations:
            sys.stderr.write(
                f"warning: interval {v.j} fails {v.condition}: "
                f"{serialize.fmt_float(v.lhs)} vs {serialize.fmt_float(v.rhs)}\n"
            )
        return 0

    raise UsageError(f"unknown subcommand {sc!r}")


def main(argv: Optional[List[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        cfg = parse(argv)
    except SystemExit:
        return 0  # --help
    except (UsageError, ValueError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1
    try:
        return run(cfg)
    except CapacityError as exc:
        sys.stderr.write(
            serialize.dumps({"error": "capacity", "message": str(exc)}) + "\n"
        )
        return 2
    except UsageError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
