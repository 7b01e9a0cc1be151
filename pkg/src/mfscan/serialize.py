"""Report serialization: CSV, JSON, and minimal SVG plots.

Floats are always written with 17 significant digits, which round-trips
IEEE doubles exactly; JSON reports therefore re-parse into equal report
values.  Infinities (the tiny-eps smooth constant marker) serialize as
the string "inf".
"""

from __future__ import annotations

import json
import math
from typing import Iterable, List, Optional, Sequence

from .s_system import IntervalSystem
from .scanners import (
    DiscrepancyRecord,
    ScanParams,
    ScanReport,
    SmoothIntervalScan,
)


def fmt_float(x: float) -> str:
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    if math.isnan(x):
        return "nan"
    return format(float(x), ".17g")


def dumps(obj) -> str:
    """Compact, deterministic JSON with 17-significant-digit floats."""

    def encode(value) -> str:
        if value is None:
            return "null"
        if value is True:
            return "true"
        if value is False:
            return "false"
        if isinstance(value, float):
            if math.isinf(value) or math.isnan(value):
                return json.dumps(fmt_float(value))
            return fmt_float(value)
        if isinstance(value, int):
            return str(value)
        if isinstance(value, str):
            return json.dumps(value)
        if isinstance(value, dict):
            parts = [f"{json.dumps(str(k))}:{encode(v)}" for k, v in value.items()]
            return "{" + ",".join(parts) + "}"
        if isinstance(value, (list, tuple)):
            return "[" + ",".join(encode(v) for v in value) + "]"
        raise TypeError(f"cannot serialize {type(value)!r}")

    return encode(obj)


# ---------------------------------------------------------------------------
# ScanReport JSON


def _system_to_obj(system: Optional[IntervalSystem]):
    if system is None:
        return None
    return {
        "eta": system.eta,
        "intervals": [[lp, lq] for lp, lq in system.intervals],
    }


def _system_from_obj(obj) -> Optional[IntervalSystem]:
    if obj is None:
        return None
    return IntervalSystem(
        obj["eta"], tuple((lp, lq) for lp, lq in obj["intervals"])
    )


def scan_report_to_json(report: ScanReport) -> str:
    params = report.params
    obj = {
        "params": {
            "function": params.function,
            "X": params.X,
            "h": params.h,
            "delta": params.delta,
            "samples": params.samples,
            "seed": params.seed,
            "system": _system_to_obj(params.system),
            "J": params.J,
        },
        "long_avg": report.long_avg,
        "records": [
            {"x": r.x, "short_avg": r.short_avg, "long_avg": r.long_avg, "diff": r.diff}
            for r in report.records
        ],
        "paper_threshold": report.paper_threshold,
        "vacuous_at_desk_scale": report.vacuous_at_desk_scale,
        "exceptional_count": report.exceptional_count,
        "exceptional_counts_user": [
            {"threshold": t, "count": c}
            for t, c in sorted(report.exceptional_counts_user.items())
        ],
        "paper_exceptional_bound": report.paper_exceptional_bound,
        "mean_square_discrepancy": report.mean_square_discrepancy,
    }
    return dumps(obj)


def scan_report_from_json(text: str) -> ScanReport:
    obj = json.loads(text)
    p = obj["params"]
    params = ScanParams(
        p["function"],
        p["X"],
        p["h"],
        p["delta"],
        p["samples"],
        p["seed"],
        _system_from_obj(p["system"]),
        p["J"],
    )
    records = tuple(
        DiscrepancyRecord(r["x"], r["short_avg"], r["long_avg"], r["diff"])
        for r in obj["records"]
    )
    return ScanReport(
        params=params,
        long_avg=obj["long_avg"],
        records=records,
        paper_threshold=obj["paper_threshold"],
        vacuous_at_desk_scale=obj["vacuous_at_desk_scale"],
        exceptional_count=obj["exceptional_count"],
        exceptional_counts_user={
            e["threshold"]: e["count"] for e in obj["exceptional_counts_user"]
        },
        paper_exceptional_bound=obj["paper_exceptional_bound"],
        mean_square_discrepancy=obj["mean_square_discrepancy"],
    )


# ---------------------------------------------------------------------------
# CSV writers


def scan_report_to_csv(report: ScanReport) -> str:
    lines = ["x,short_avg,long_avg,diff"]
    for r in report.records:
        lines.append(
            f"{r.x},{fmt_float(r.short_avg)},{fmt_float(r.long_avg)},{fmt_float(r.diff)}"
        )
    return "\n".join(lines) + "\n"


def correlation_csv(h: int, X: int, value: float) -> str:
    return f"h,X,value\n{h},{X},{fmt_float(value)}\n"


def signs_csv(X: int, count: int, nonzero: int) -> str:
    density = count / X
    return f"X,count,nonzero,density\n{X},{count},{nonzero},{fmt_float(density)}\n"


def smooth_scan_csv(scan: SmoothIntervalScan) -> str:
    lines = ["x,count,expected"]
    for x, count in zip(scan.xs, scan.counts):
        lines.append(f"{x},{count},{fmt_float(scan.expected)}")
    return "\n".join(lines) + "\n"


def factor_csv(table) -> str:
    lines = ["n,factors"]
    for i in range(table.size):
        entry = table.entry(i)
        text = ";".join(f"{p}^{e}" for p, e in entry)
        lines.append(f"{table.n(i)},{text}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Minimal self-contained SVG (no renderer dependency)


def _svg_document(body: List[str], width: int, height: int) -> str:
    head = (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
        f'height="{height}" viewBox="0 0 {width} {height}">'
    )
    return "\n".join([head, *body, "</svg>"]) + "\n"


def histogram_svg(values: Sequence[float], bins: int = 40, title: str = "") -> str:
    width, height, margin = 640, 400, 40
    if not values:
        return _svg_document([f"<text x='10' y='20'>{title}: no data</text>"], width, height)
    lo, hi = min(values), max(values)
    if hi == lo:
        hi = lo + 1.0
    counts = [0] * bins
    for v in values:
        idx = min(int((v - lo) / (hi - lo) * bins), bins - 1)
        counts[idx] += 1
    peak = max(counts)
    bar_w = (width - 2 * margin) / bins
    body = [f'<text x="{margin}" y="20" font-size="14">{title}</text>']
    for i, c in enumerate(counts):
        bar_h = (height - 2 * margin) * c / peak if peak else 0
        x = margin + i * bar_w
        y = height - margin - bar_h
        body.append(
            f'<rect x="{x:.2f}" y="{y:.2f}" width="{bar_w:.2f}" '
            f'height="{bar_h:.2f}" fill="steelblue"/>'
        )
    body.append(
        f'<text x="{margin}" y="{height - 10}" font-size="12">{fmt_float(lo)}</text>'
    )
    body.append(
        f'<text x="{width - margin - 60}" y="{height - 10}" font-size="12">'
        f"{fmt_float(hi)}</text>"
    )
    return _svg_document(body, width, height)


def curve_svg(xs: Iterable[float], ys: Iterable[float], title: str = "") -> str:
    xs, ys = list(xs), list(ys)
    width, height, margin = 640, 400, 40
    if not xs:
        return _svg_document([f"<text x='10' y='20'>{title}: no data</text>"], width, height)
    x_lo, x_hi = min(xs), max(xs)
    y_lo, y_hi = min(ys), max(ys)
    if x_hi == x_lo:
        x_hi = x_lo + 1.0
    if y_hi == y_lo:
        y_hi = y_lo + 1.0
    pts = []
    for x, y in zip(xs, ys):
        px = margin + (x - x_lo) / (x_hi - x_lo) * (width - 2 * margin)
        py = height - margin - (y - y_lo) / (y_hi - y_lo) * (height - 2 * margin)
        pts.append(f"{px:.2f},{py:.2f}")
    body = [
        f'<text x="{margin}" y="20" font-size="14">{title}</text>',
        f'<polyline points="{" ".join(pts)}" fill="none" stroke="firebrick" '
        'stroke-width="1.5"/>',
    ]
    return _svg_document(body, width, height)
