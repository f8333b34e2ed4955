"""File emitters for a regime map: CSV, PPM image, SVG curve overlay, report.

All text outputs are deterministic: floats print with repr (shortest exact
round trip), iteration follows the grid, nothing embeds a timestamp.  The
PPM uses one pixel per cell, columns over dx ascending, rows over dt
descending, with the fixed palette

    U red (255,0,0)   UO yellow (255,255,0)   SO light blue (135,206,250)
    OFS dark blue (0,0,139)   Invalid grey (128,128,128)
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict
from pathlib import Path

import numpy as np

from .atlas import (
    CODE_IDS,
    CODE_NAMES,
    ConjectureAudit,
    RegimeMap,
    SweepConfig,
    so_region_report,
)

PALETTE = {
    "OFS": (0, 0, 139),
    "SO": (135, 206, 250),
    "UO": (255, 255, 0),
    "U": (255, 0, 0),
    "Invalid": (128, 128, 128),
}

CSV_HEADER = ("dx", "dt", "code", "min_re_lambda", "max_re_lambda", "rho")


def _fmt(x: float) -> str:
    return repr(float(x))


def write_csv(regime_map: RegimeMap, path: Path,
              collapse_uo: bool = False) -> None:
    """One row per cell, dt varying fastest inside each dx block."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(CSV_HEADER) + "\n")
        for i, dx in enumerate(regime_map.dx_axis):
            for j, dt in enumerate(regime_map.dt_axis):
                code = regime_map.code_name(i, j)
                if collapse_uo and code == "UO":
                    code = "U"
                fh.write(",".join((
                    _fmt(dx), _fmt(dt), code,
                    _fmt(regime_map.min_re[i, j]),
                    _fmt(regime_map.max_re[i, j]),
                    _fmt(regime_map.rho[i, j]),
                )) + "\n")


def read_csv(path: Path) -> dict:
    """Re-ingest a sweep CSV into axes, a code grid, and spectra summaries."""
    rows: list[tuple[float, float, str, float, float, float]] = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = tuple(next(reader))
        if header != CSV_HEADER:
            raise ValueError(f"unexpected CSV header {header!r}")
        for rec in reader:
            rows.append((float(rec[0]), float(rec[1]), rec[2],
                         float(rec[3]), float(rec[4]), float(rec[5])))
    dx_axis = sorted(dict.fromkeys(r[0] for r in rows))
    dt_axis = sorted(dict.fromkeys(r[1] for r in rows))
    index = {(dx, dt): k for k, (dx, dt, *_rest) in enumerate(rows)}
    n_dx, n_dt = len(dx_axis), len(dt_axis)
    codes = np.full((n_dx, n_dt), CODE_IDS["Invalid"], dtype=np.int8)
    min_re = np.full((n_dx, n_dt), np.nan)
    max_re = np.full((n_dx, n_dt), np.nan)
    rho = np.full((n_dx, n_dt), np.nan)
    for i, dx in enumerate(dx_axis):
        for j, dt in enumerate(dt_axis):
            rec = rows[index[(dx, dt)]]
            codes[i, j] = CODE_IDS[rec[2]]
            min_re[i, j], max_re[i, j], rho[i, j] = rec[3], rec[4], rec[5]
    return {
        "dx_axis": np.array(dx_axis),
        "dt_axis": np.array(dt_axis),
        "codes": codes,
        "min_re": min_re,
        "max_re": max_re,
        "rho": rho,
    }


def write_ppm(regime_map: RegimeMap, path: Path,
              collapse_uo: bool = False) -> None:
    """Binary P6 pixmap, one pixel per cell, top row at the largest dt."""
    n_dx, n_dt = regime_map.shape
    pixels = np.zeros((n_dt, n_dx, 3), dtype=np.uint8)
    for i in range(n_dx):
        for j in range(n_dt):
            code = regime_map.code_name(i, j)
            if collapse_uo and code == "UO":
                code = "U"
            pixels[n_dt - 1 - j, i] = PALETTE[code]
    with open(path, "wb") as fh:
        fh.write(f"P6\n{n_dx} {n_dt}\n255\n".encode("ascii"))
        fh.write(pixels.tobytes())


_SVG_CURVE_COLORS = {
    "vn-stability": "#c0392b",
    "positive-eigenvalue": "#2c3e50",
    "dominance": "#27ae60",
}


def write_svg(regime_map: RegimeMap, path: Path, width: int = 640,
              height: int = 480) -> None:
    """Overlay of the analytic condition curves on log-log axes."""
    cfg = regime_map.config
    margin = 60
    x_lo, x_hi = (math.log10(v) for v in cfg.dx_range)
    y_lo, y_hi = (math.log10(v) for v in cfg.dt_range)

    def sx(dx: float) -> float:
        return margin + (math.log10(dx) - x_lo) / (x_hi - x_lo) * (width - 2 * margin)

    def sy(dt: float) -> float:
        return height - margin - (math.log10(dt) - y_lo) / (y_hi - y_lo) * (height - 2 * margin)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect x="{margin}" y="{margin}" width="{width - 2 * margin}" '
        f'height="{height - 2 * margin}" fill="none" stroke="black"/>',
        f'<text x="{width // 2}" y="{height - 18}" text-anchor="middle" '
        f'font-size="14">dx (log scale)</text>',
        f'<text x="18" y="{height // 2}" text-anchor="middle" font-size="14" '
        f'transform="rotate(-90 18 {height // 2})">dt (log scale)</text>',
    ]
    for axis_val in (cfg.dx_range[0], cfg.dx_range[1]):
        parts.append(
            f'<text x="{sx(axis_val):.2f}" y="{height - margin + 18}" '
            f'text-anchor="middle" font-size="11">{axis_val:g}</text>')
    for axis_val in (cfg.dt_range[0], cfg.dt_range[1]):
        parts.append(
            f'<text x="{margin - 6}" y="{sy(axis_val):.2f}" text-anchor="end" '
            f'font-size="11">{axis_val:g}</text>')

    legend_y = margin + 16
    for curve in regime_map.curves:
        color = _SVG_CURVE_COLORS.get(curve.kind, "#7f8c8d")
        label = curve.kind
        if curve.unconditional:
            label += " (unconditional)"
            parts.append(
                f'<text x="{width - margin - 4}" y="{legend_y}" text-anchor="end" '
                f'font-size="12" fill="{color}">{label}</text>')
            legend_y += 16
            continue
        points = []
        for dx, bound in curve.samples:
            if bound <= 0 or not math.isfinite(bound):
                continue
            dt_clip = min(max(bound, cfg.dt_range[0]), cfg.dt_range[1])
            points.append(f"{sx(dx):.2f},{sy(dt_clip):.2f}")
        if points:
            parts.append(
                f'<polyline fill="none" stroke="{color}" stroke-width="1.5" '
                f'points="{" ".join(points)}"/>')
        parts.append(
            f'<text x="{width - margin - 4}" y="{legend_y}" text-anchor="end" '
            f'font-size="12" fill="{color}">{label}</text>')
        legend_y += 16
    parts.append("</svg>")
    path.write_text("\n".join(parts) + "\n", encoding="utf-8")


def _curve_payload(curve) -> dict:
    samples = [
        [float(dx), None if not math.isfinite(b) else float(b)]
        for dx, b in curve.samples
    ]
    return {
        "kind": curve.kind,
        "vn_slack_C": curve.vn_slack_C,
        "unconditional": curve.unconditional,
        "samples": samples,
    }


def write_report(regime_map: RegimeMap, audits: list[ConjectureAudit],
                 cfg: SweepConfig, path: Path) -> None:
    """JSON report: config echo, code counts, audits, curves, SO region."""
    payload = {
        "config": cfg.to_dict(),
        "code_counts": regime_map.code_counts(collapse_uo=cfg.collapse_uo),
        "freeze_bound": regime_map.freeze_bound,
        "dx_effective": [float(v) for v in regime_map.dx_effective],
        "audits": [
            {
                "conjecture_id": a.conjecture_id,
                "description": a.description,
                "cells_tested": a.cells_tested,
                "cells_consistent": a.cells_consistent,
                "consistency": a.consistency,
                "counterexamples": [
                    {"dx": dx, "dt": dt, "detail": detail}
                    for dx, dt, detail in a.counterexamples
                ],
            }
            for a in audits
        ],
        "so_region": so_region_report(regime_map),
        "curves": [_curve_payload(c) for c in regime_map.curves],
    }
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n",
                    encoding="utf-8")


def write_outputs(regime_map: RegimeMap, audits: list[ConjectureAudit],
                  cfg: SweepConfig) -> dict[str, Path]:
    """Emit every requested artifact into cfg.output_dir; returns the paths."""
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    stem = cfg.stem()
    written: dict[str, Path] = {}
    if "csv" in cfg.emit:
        path = out / f"{stem}.csv"
        write_csv(regime_map, path, collapse_uo=cfg.collapse_uo)
        written["csv"] = path
    if "image" in cfg.emit:
        path = out / f"{stem}.ppm"
        write_ppm(regime_map, path, collapse_uo=cfg.collapse_uo)
        written["image"] = path
    if "svg" in cfg.emit:
        path = out / f"{stem}_curves.svg"
        write_svg(regime_map, path)
        written["svg"] = path
    if "report" in cfg.emit:
        path = out / f"{stem}_report.json"
        write_report(regime_map, audits, cfg, path)
        written["report"] = path
    if "png" in cfg.emit:
        from .figures import render_regime_map

        path = out / f"{stem}.png"
        render_regime_map(regime_map, path)
        written["png"] = path
    return written
