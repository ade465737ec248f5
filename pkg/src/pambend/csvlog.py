"""Deterministic text serialization: run logs, metric tables, SVG plots.

All floats are written with 9 significant digits and no locale, so a
given (config, seed) pair always produces byte-identical files.  Nothing
here ever writes a wall-clock timestamp.
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .core import SAMPLE_FIELDS, TimeSeries

# On-disk column names: kp columns are stored as amplification ratios
# relative to the baseline gain kp0.
CSV_COLUMNS = (
    "t", "theta_ref", "theta_ref_d1", "theta_ref_d2", "theta", "error",
    "p_a", "p_b", "pd_a", "pd_b", "u_a", "u_b", "kp_ratio_a", "kp_ratio_b",
)


def fmt(x: float) -> str:
    """Canonical float formatting: 9 significant digits."""
    return f"{x:.9g}"


def series_to_csv(series: TimeSeries, kp0: float) -> str:
    """Render a run log; kp columns become kp/kp0 ratios on disk."""
    lines = [",".join(CSV_COLUMNS)]
    cols = [series.column(name) for name in SAMPLE_FIELDS]
    ka = SAMPLE_FIELDS.index("kp_a")
    kb = SAMPLE_FIELDS.index("kp_b")
    cols[ka] = cols[ka] / kp0
    cols[kb] = cols[kb] / kp0
    for row in zip(*cols):
        lines.append(",".join(fmt(v) for v in row))
    return "\n".join(lines) + "\n"


def series_from_csv(text: str, kp0: float, dt_nominal: float) -> TimeSeries:
    """Parse a run log back; kp ratios are rescaled by kp0."""
    lines = [ln for ln in text.splitlines() if ln.strip()]
    header = tuple(lines[0].split(","))
    if header != CSV_COLUMNS:
        raise ValueError(f"unexpected CSV header: {lines[0]!r}")
    data = np.array([[float(v) for v in ln.split(",")] for ln in lines[1:]])
    if data.size == 0:
        raise ValueError("CSV contains no samples")
    columns = {}
    for j, name in enumerate(SAMPLE_FIELDS):
        col = data[:, j]
        if name in ("kp_a", "kp_b"):
            col = col * kp0
        columns[name] = col
    return TimeSeries(columns, dt_nominal)


def table_to_csv(header: list[str], rows: list[list]) -> str:
    """Generic small-table CSV; floats canonically formatted."""
    out = [",".join(header)]
    for row in rows:
        out.append(",".join(fmt(v) if isinstance(v, float) else str(v) for v in row))
    return "\n".join(out) + "\n"


def aligned_table(header: list[str], rows: list[list[str]]) -> str:
    """Space-padded text table (for the human-readable metrics files)."""
    table = [header] + [[str(v) for v in row] for row in rows]
    widths = [max(len(r[j]) for r in table) for j in range(len(header))]
    lines = []
    for i, row in enumerate(table):
        lines.append("  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip())
        if i == 0:
            lines.append("  ".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"


def write_text(path: Path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8", newline="\n")


def write_json(path: Path, obj) -> None:
    write_text(path, json.dumps(obj, indent=2, sort_keys=True) + "\n")


def svg_line_plot(path: Path, t: np.ndarray, traces: list[tuple[str, np.ndarray]],
                  title: str, width: int = 900, height: int = 300) -> None:
    """Minimal deterministic SVG polyline plot (one panel, shared x axis)."""
    colors = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#8c564b", "#e377c2")
    t = np.asarray(t, dtype=float)
    ys = [np.asarray(y, dtype=float) for _, y in traces]
    y_all = np.concatenate(ys) if ys else np.array([0.0, 1.0])
    y_lo, y_hi = float(y_all.min()), float(y_all.max())
    if y_hi == y_lo:
        y_hi = y_lo + 1.0
    x_lo, x_hi = float(t[0]), float(t[-1])
    if x_hi == x_lo:
        x_hi = x_lo + 1.0
    pad, legend_h = 40, 18

    def sx(x):
        return pad + (x - x_lo) / (x_hi - x_lo) * (width - 2 * pad)

    def sy(y):
        return height - pad - (y - y_lo) / (y_hi - y_lo) * (height - 2 * pad - legend_h)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{pad}" y="16" font-family="monospace" font-size="13">{title}</text>',
        f'<line x1="{pad}" y1="{height - pad}" x2="{width - pad}" y2="{height - pad}" '
        f'stroke="black" stroke-width="1"/>',
        f'<line x1="{pad}" y1="{height - pad}" x2="{pad}" y2="{pad + legend_h}" '
        f'stroke="black" stroke-width="1"/>',
        f'<text x="{pad}" y="{height - pad + 14}" font-family="monospace" font-size="10">'
        f'{fmt(x_lo)}</text>',
        f'<text x="{width - pad - 40}" y="{height - pad + 14}" font-family="monospace" '
        f'font-size="10">{fmt(x_hi)}</text>',
        f'<text x="2" y="{height - pad}" font-family="monospace" font-size="10">{fmt(y_lo)}</text>',
        f'<text x="2" y="{pad + legend_h + 8}" font-family="monospace" font-size="10">'
        f'{fmt(y_hi)}</text>',
    ]
    # Thin dense traces so files stay small; plots are qualitative aids.
    stride = max(1, len(t) // 2000)
    for i, (label, y) in enumerate(traces):
        color = colors[i % len(colors)]
        pts = " ".join(f"{sx(tv):.2f},{sy(yv):.2f}" for tv, yv in zip(t[::stride], y[::stride]))
        parts.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.2" points="{pts}"/>')
        parts.append(
            f'<text x="{pad + 10 + 140 * i}" y="{pad + 12}" font-family="monospace" '
            f'font-size="11" fill="{color}">{label}</text>')
    parts.append("</svg>")
    write_text(path, "\n".join(parts) + "\n")
