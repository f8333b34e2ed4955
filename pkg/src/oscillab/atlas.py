"""Regime-map sweeps over (dx, dt): classification, condition curves, audits.

Every cell of the sweep grid runs one simulation plus one spectral analysis
of the (frozen, for per-step schemes) update matrix, and lands in one of

    OFS  oscillation-free stable      SO  stable with oscillations
    U    unstable                     UO  unstable with oscillations
    Invalid  the cell could not be assembled

Cells are classified from the runtime flags; divergence outranks the
oscillation flag, so UO needs both.  Fisher-KPP cells take their oscillation
verdict from the frozen spectrum instead (positively dominated eigenvalues
mean oscillation-free): the runtime test cannot tell its travelling wave
from method oscillation.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import spectral
from .diagnostics import DiagnosticsConfig, RunFlags, run_simulation
from .problems import BC_KINDS, EQUATION_NAMES, default_ibvp, equation_by_name
from .schemes import SCHEME_KINDS
from .spectral import ConditionCurve, Spectrum, dominance_test

CODE_NAMES = ("OFS", "SO", "UO", "U", "Invalid")
CODE_IDS = {name: i for i, name in enumerate(CODE_NAMES)}
EMIT_KINDS = ("csv", "image", "svg", "report", "png")

# Interior-node floor for sweep meshes: a single interior node has a
# one-point spectrum whose discrete thresholds sit far from the Fourier
# curves, so coarse columns snap to at least two interior nodes.
_MIN_SWEEP_CELLS = 3

_CURVE_SAMPLES = 200
_BISECT_DEPTH = 40


@dataclass(frozen=True)
class SweepConfig:
    """One regime-map run: axes, problem selection, diagnostics, outputs."""

    equation: str = "heat"
    scheme: str = "ftcs"
    bc: str = "dirichlet"
    dx_range: tuple[float, float] = (0.01, 1.0)
    dt_range: tuple[float, float] = (0.01, 1.0)
    resolution: int = 100
    ic: str = "default"
    length: float = 1.0
    final_time: float = 30.0
    mode_seed: float = 0.01
    diagnostics: DiagnosticsConfig = field(default_factory=DiagnosticsConfig)
    output_dir: Path = Path(".")
    emit: frozenset[str] = frozenset(EMIT_KINDS)
    log_axes: bool = False
    collapse_uo: bool = False
    workers: int = 1

    def __post_init__(self) -> None:
        if self.equation not in EQUATION_NAMES:
            raise ValueError(f"unknown equation {self.equation!r}")
        if self.scheme not in SCHEME_KINDS:
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if self.bc not in BC_KINDS:
            raise ValueError(f"unknown boundary kind {self.bc!r}")
        for low, high in (self.dx_range, self.dt_range):
            if not (0 < low < high):
                raise ValueError("ranges must satisfy 0 < low < high")
        if self.resolution < 2:
            raise ValueError("resolution must be at least 2")
        unknown = set(self.emit) - set(EMIT_KINDS)
        if unknown:
            raise ValueError(f"unknown emit kinds {sorted(unknown)}")

    def stem(self) -> str:
        return f"{self.equation}_{self.scheme}_{self.bc}"

    def to_dict(self) -> dict:
        return {
            "equation": self.equation,
            "scheme": self.scheme,
            "bc": self.bc,
            "dx_range": list(self.dx_range),
            "dt_range": list(self.dt_range),
            "resolution": self.resolution,
            "ic": self.ic,
            "length": self.length,
            "final_time": self.final_time,
            "mode_seed": self.mode_seed,
            "cap_K": self.diagnostics.cap_K,
            "osc_deadband": self.diagnostics.osc_deadband,
            "osc_min_nodes": self.diagnostics.osc_min_nodes,
            "osc_persistence": self.diagnostics.osc_persistence,
            "transient_skip": self.diagnostics.transient_skip,
            "max_steps": self.diagnostics.max_steps,
            "output_dir": str(self.output_dir),
            "emit": sorted(self.emit),
            "log_axes": self.log_axes,
            "collapse_uo": self.collapse_uo,
            "workers": self.workers,
        }


def load_sweep_config(path: str | Path) -> SweepConfig:
    """Read a SweepConfig from its JSON mirror."""
    with open(path, "r", encoding="utf-8") as fh:
        raw = json.load(fh)
    diag_keys = ("cap_K", "osc_deadband", "osc_min_nodes", "osc_persistence",
                 "transient_skip", "max_steps")
    diag = DiagnosticsConfig(**{k: raw[k] for k in diag_keys if k in raw})
    kwargs: dict = {}
    for key in ("equation", "scheme", "bc", "ic", "length", "final_time",
                "mode_seed", "resolution", "log_axes", "collapse_uo", "workers"):
        if key in raw:
            kwargs[key] = raw[key]
    if "dx_range" in raw:
        kwargs["dx_range"] = tuple(raw["dx_range"])
    if "dt_range" in raw:
        kwargs["dt_range"] = tuple(raw["dt_range"])
    if "output_dir" in raw:
        kwargs["output_dir"] = Path(raw["output_dir"])
    if "emit" in raw:
        kwargs["emit"] = frozenset(raw["emit"])
    return SweepConfig(diagnostics=diag, **kwargs)


@dataclass(frozen=True)
class Classification:
    """One cell verdict."""

    code: str

    def __post_init__(self) -> None:
        if self.code not in CODE_NAMES:
            raise ValueError(f"unknown classification {self.code!r}")


@dataclass
class RegimeMap:
    """Grid of classifications plus the analytic curves and spectra summaries.

    Arrays are indexed [i_dx, j_dt].  `dx_effective` holds the per-column
    mesh spacing actually simulated (coarse columns snap so the mesh keeps at
    least two interior nodes); side-of-curve bookkeeping uses it.
    """

    dx_axis: np.ndarray
    dt_axis: np.ndarray
    dx_effective: np.ndarray
    codes: np.ndarray
    min_re: np.ndarray
    max_re: np.ndarray
    rho: np.ndarray
    oscillatory: np.ndarray
    monotone: np.ndarray
    diverged: np.ndarray
    curves: list[ConditionCurve]
    config: SweepConfig
    freeze_bound: float | None = None

    @property
    def shape(self) -> tuple[int, int]:
        return self.codes.shape

    def code_name(self, i: int, j: int) -> str:
        return CODE_NAMES[self.codes[i, j]]

    def code_counts(self, collapse_uo: bool = False) -> dict[str, int]:
        counts = {name: int(np.count_nonzero(self.codes == CODE_IDS[name]))
                  for name in CODE_NAMES}
        if collapse_uo:
            counts["U"] += counts.pop("UO")
        return {k: v for k, v in counts.items() if v}


@dataclass(frozen=True)
class ConjectureAudit:
    """Empirical check of one conjectured oscillation condition."""

    conjecture_id: str
    description: str
    cells_tested: int
    cells_consistent: int
    counterexamples: list[tuple[float, float, str]]

    @property
    def consistency(self) -> float:
        if self.cells_tested == 0:
            return 1.0
        return self.cells_consistent / self.cells_tested


def sweep_mesh_cells(length: float, dx: float) -> int:
    """Cell count for a sweep column: round(L/dx) floored at two interior nodes."""
    return max(_MIN_SWEEP_CELLS, int(round(length / dx)))


def _summary_from_spectrum(spec: Spectrum) -> tuple[float, float, float]:
    real = spec.eigenvalues.real
    return float(real.min()), float(real.max()),\
        float(np.abs(spec.eigenvalues).max())


def classify_cell(flags: RunFlags, spectrum_summary: tuple[float, float, float] | None,
                  spectral_oscillation: bool | None = None) -> Classification:
    """D-precedence classification: divergence first, then the oscillation flag.

    `spectral_oscillation` overrides the runtime flag when given (Fisher-KPP
    cells pass the frozen-spectrum verdict).
    """
    oscillatory = flags.oscillatory
    if spectral_oscillation is not None:
        oscillatory = spectral_oscillation
    if not flags.stable:
        return Classification("UO" if oscillatory else "U")
    return Classification("SO" if oscillatory else "OFS")


def _freeze_candidates(cfg: SweepConfig) -> tuple[float, ...]:
    ibvp = default_ibvp(cfg.equation, cfg.bc, length=cfg.length,
                        final_time=cfg.final_time, ic=cfg.ic)
    xs = np.linspace(0.0, cfg.length, 513)
    u0 = np.array([ibvp.initial_condition(float(x)) for x in xs])
    return (float(u0.min()), float(u0.max()), 0.0, 1.0)


def _cell_spectrum_summary(cfg: SweepConfig, dx_eff: float, dt: float,
                           freeze: float | None) -> tuple[tuple[float, float, float], bool]:
    """(min Re, max Re, rho) of the cell's static update matrix, plus dominance."""
    from .problems import build_mesh
    from .schemes import frozen_surrogate

    eq = equation_by_name(cfg.equation)
    mesh = build_mesh(cfg.length, dx_eff)
    bc_ibvp = default_ibvp(cfg.equation, cfg.bc, length=cfg.length,
                           final_time=cfg.final_time, ic=cfg.ic)
    with np.errstate(all="ignore"):
        scheme = frozen_surrogate(cfg.scheme, eq, mesh, dt, bc_ibvp.bc,
                                  freeze if freeze is not None else 0.0)
        spec = spectral.scheme_spectrum(scheme)
    summary = _summary_from_spectrum(spec)
    return summary, dominance_test(spec)


def _simulate_cell(payload: tuple) -> tuple[int, int, int, float, float, float, bool, bool, bool]:
    """Worker for one sweep cell; takes and returns primitives only."""
    (cfg_dict, i, j, dx_eff, dt) = payload
    cfg = _config_from_dict(cfg_dict)
    ibvp = default_ibvp(cfg.equation, cfg.bc, length=cfg.length,
                        final_time=cfg.final_time, ic=cfg.ic)
    freeze = None
    eq = equation_by_name(cfg.equation)
    if eq.is_nonlinear:
        freeze = spectral.worst_freeze_bound(
            cfg.scheme, eq, dt / dx_eff**2, dt, _freeze_candidates(cfg))
    try:
        flags = run_simulation(ibvp, cfg.scheme, dx_eff, dt, cfg.diagnostics,
                               mode_seed=cfg.mode_seed)
        summary, dominant = _cell_spectrum_summary(cfg, dx_eff, dt, freeze)
    except ValueError:
        return (i, j, CODE_IDS["Invalid"], math.nan, math.nan, math.nan,
                False, False, False)
    spectral_osc = None
    if cfg.equation == "fisher":
        spectral_osc = not dominant
    code = classify_cell(flags, summary, spectral_osc)
    return (i, j, CODE_IDS[code.code], summary[0], summary[1], summary[2],
            flags.oscillatory, flags.temporally_monotone, not flags.stable)


def _config_from_dict(d: dict) -> SweepConfig:
    diag = DiagnosticsConfig(
        cap_K=d["cap_K"], osc_deadband=d["osc_deadband"],
        osc_min_nodes=d["osc_min_nodes"], osc_persistence=d["osc_persistence"],
        transient_skip=d["transient_skip"], max_steps=d["max_steps"],
    )
    return SweepConfig(
        equation=d["equation"], scheme=d["scheme"], bc=d["bc"],
        dx_range=tuple(d["dx_range"]), dt_range=tuple(d["dt_range"]),
        resolution=d["resolution"], ic=d["ic"], length=d["length"],
        final_time=d["final_time"], mode_seed=d["mode_seed"],
        diagnostics=diag, output_dir=Path(d["output_dir"]),
        emit=frozenset(d["emit"]), log_axes=d["log_axes"],
        collapse_uo=d["collapse_uo"], workers=d["workers"],
    )


def theoretical_curves(cfg: SweepConfig,
                       freeze_bound: float | None = None) -> list[ConditionCurve]:
    """The three analytic condition curves over log-spaced dx samples."""
    eq = equation_by_name(cfg.equation)
    lo, hi = cfg.dx_range
    dx_samples = np.geomspace(lo, hi, _CURVE_SAMPLES)
    if freeze_bound is None and eq.is_nonlinear:
        mid = math.sqrt(lo * hi)
        freeze_bound = spectral.worst_freeze_bound(
            cfg.scheme, eq, math.sqrt(cfg.dt_range[0] * cfg.dt_range[1]) / mid**2,
            0.1, _freeze_candidates(cfg))
    C = vn_slack(cfg.equation)

    def n_of_dx(dx: float) -> int:
        cells = sweep_mesh_cells(cfg.length, dx)
        return cells - 1 if cfg.bc == "dirichlet" else cells + 1

    return [
        spectral.vn_stability_curve(cfg.scheme, eq, dx_samples, C=C,
                                    freeze_bound=freeze_bound),
        spectral.positive_eig_curve(cfg.scheme, eq, dx_samples, n_of_dx,
                                    freeze_bound=freeze_bound),
        spectral.dominance_curve(cfg.scheme, eq, dx_samples, n_of_dx,
                                 freeze_bound=freeze_bound),
    ]


def vn_slack(equation: str) -> float:
    """Von Neumann slack constant: 1 for the exponentially growing equation."""
    return 1.0 if equation == "fisher" else 0.0


def run_sweep(cfg: SweepConfig) -> RegimeMap:
    """Simulate and classify every (dx, dt) cell; attach the analytic curves.

    Per-cell failures classify as Invalid and never abort the sweep.  Cell
    results are merged by index, so worker count does not affect the map.
    """
    dx_axis = np.linspace(cfg.dx_range[0], cfg.dx_range[1], cfg.resolution)
    dt_axis = np.linspace(cfg.dt_range[0], cfg.dt_range[1], cfg.resolution)
    dx_eff = np.array([cfg.length / sweep_mesh_cells(cfg.length, dx)
                       for dx in dx_axis])

    n = cfg.resolution
    codes = np.full((n, n), CODE_IDS["Invalid"], dtype=np.int8)
    min_re = np.full((n, n), np.nan)
    max_re = np.full((n, n), np.nan)
    rho = np.full((n, n), np.nan)
    oscillatory = np.zeros((n, n), dtype=bool)
    monotone = np.zeros((n, n), dtype=bool)
    diverged = np.zeros((n, n), dtype=bool)

    cfg_dict = cfg.to_dict()
    payloads = [(cfg_dict, i, j, float(dx_eff[i]), float(dt_axis[j]))
                for i in range(n) for j in range(n)]

    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            results = list(pool.map(_simulate_cell, payloads,
                                    chunksize=max(1, len(payloads) // (8 * cfg.workers))))
    else:
        results = [_simulate_cell(p) for p in payloads]

    for (i, j, code, lo_re, hi_re, radius, osc, mono, div) in results:
        codes[i, j] = code
        min_re[i, j] = lo_re
        max_re[i, j] = hi_re
        rho[i, j] = radius
        oscillatory[i, j] = osc
        monotone[i, j] = mono
        diverged[i, j] = div

    eq = equation_by_name(cfg.equation)
    freeze = None
    if eq.is_nonlinear:
        mid_dx = float(np.median(dx_eff))
        mid_dt = float(np.median(dt_axis))
        freeze = spectral.worst_freeze_bound(cfg.scheme, eq, mid_dt / mid_dx**2,
                                             mid_dt, _freeze_candidates(cfg))
    curves = theoretical_curves(cfg, freeze_bound=freeze)
    return RegimeMap(
        dx_axis=dx_axis, dt_axis=dt_axis, dx_effective=dx_eff, codes=codes,
        min_re=min_re, max_re=max_re, rho=rho, oscillatory=oscillatory,
        monotone=monotone, diverged=diverged, curves=curves, config=cfg,
        freeze_bound=freeze,
    )


def curve_band_mask(regime_map: RegimeMap) -> np.ndarray:
    """Cells within one grid cell of any finite analytic curve.

    Discrete sampling straddles the curves, so audits exclude this band.
    Bounds are evaluated at each column's effective dx, and neighbouring
    columns widen the band where a curve is steep.
    """
    n_dx, n_dt = regime_map.shape
    dt_axis = regime_map.dt_axis
    dt_spacing = dt_axis[1] - dt_axis[0] if n_dt > 1 else 0.0
    mask = np.zeros((n_dx, n_dt), dtype=bool)
    for curve in regime_map.curves:
        if curve.unconditional:
            continue
        bounds = np.array([curve.bound_at(dx) for dx in regime_map.dx_effective])
        for i in range(n_dx):
            lo_i = max(0, i - 1)
            hi_i = min(n_dx - 1, i + 1)
            lo = bounds[lo_i:hi_i + 1].min() - dt_spacing
            hi = bounds[lo_i:hi_i + 1].max() + dt_spacing
            mask[i] |= (dt_axis >= lo) & (dt_axis <= hi)
    return mask


def _curve_by_kind(regime_map: RegimeMap, kind: str) -> ConditionCurve:
    for curve in regime_map.curves:
        if curve.kind == kind:
            return curve
    raise ValueError(f"map carries no {kind!r} curve")


def conjecture_audit(regime_map: RegimeMap) -> list[ConjectureAudit]:
    """Audit the four conjectured oscillation conditions against the map.

    C1  stable oscillations only above the positive-eigenvalue curve
    C2  oscillation-free exactly where a positive eigenvalue dominates
    C3  frozen-form stability plus dominance implies an OFS cell (nonlinear)
    C4  temporally monotone runs are oscillation-free

    Counterexample lists are truncated to 200 entries; the counts are exact.
    """
    cfg = regime_map.config
    band = curve_band_mask(regime_map)
    pos_curve = _curve_by_kind(regime_map, "positive-eigenvalue")
    C = vn_slack(cfg.equation)
    eq = equation_by_name(cfg.equation)

    audits: list[ConjectureAudit] = []
    cap = 200
    n_dx, n_dt = regime_map.shape

    def cells():
        for i in range(n_dx):
            for j in range(n_dt):
                if band[i, j]:
                    continue
                code = regime_map.code_name(i, j)
                if code == "Invalid":
                    continue
                yield i, j, code

    # C1: every SO cell lies above the positive-eigenvalue bound.
    tested = consistent = 0
    examples: list[tuple[float, float, str]] = []
    for i, j, code in cells():
        if code != "SO":
            continue
        tested += 1
        bound = pos_curve.bound_at(regime_map.dx_effective[i])
        if regime_map.dt_axis[j] > bound:
            consistent += 1
        elif len(examples) < cap:
            examples.append((float(regime_map.dx_axis[i]),
                             float(regime_map.dt_axis[j]),
                             f"SO at dt <= positive-eigenvalue bound {bound:.6g}"))
    audits.append(ConjectureAudit(
        "C1", "stable oscillations sit above the positive-eigenvalue curve",
        tested, consistent, examples))

    # C2: dominance verdict == (cell is OFS).
    tested = consistent = 0
    examples = []
    for i, j, code in cells():
        real_lo = regime_map.min_re[i, j]
        real_hi = regime_map.max_re[i, j]
        if not (np.isfinite(real_lo) and np.isfinite(real_hi)):
            continue
        dominant = real_hi - max(abs(real_lo), abs(real_hi)) >= 0
        tested += 1
        if dominant == (code == "OFS"):
            consistent += 1
        elif len(examples) < cap:
            examples.append((float(regime_map.dx_axis[i]),
                             float(regime_map.dt_axis[j]),
                             f"dominance={dominant} but code={code}"))
    audits.append(ConjectureAudit(
        "C2", "oscillation-free iff a positive eigenvalue dominates",
        tested, consistent, examples))

    # C3: linearized stability + dominance + positivity implies OFS.
    tested = consistent = 0
    examples = []
    if eq.is_nonlinear:
        for i, j, code in cells():
            real_lo = regime_map.min_re[i, j]
            real_hi = regime_map.max_re[i, j]
            radius = regime_map.rho[i, j]
            if not np.isfinite(radius):
                continue
            dt = regime_map.dt_axis[j]
            ok = (radius <= 1.0 + C * dt and real_lo > 0
                  and real_hi - max(abs(real_lo), abs(real_hi)) >= 0)
            if not ok:
                continue
            tested += 1
            if code == "OFS":
                consistent += 1
            elif len(examples) < cap:
                examples.append((float(regime_map.dx_axis[i]),
                                 float(regime_map.dt_axis[j]),
                                 f"linearized conditions hold but code={code}"))
    audits.append(ConjectureAudit(
        "C3", "linearized oscillation-free conditions suffice for the nonlinear run",
        tested, consistent, examples))

    # C4: monotone runs are non-oscillatory.
    tested = consistent = 0
    examples = []
    for i, j, code in cells():
        if not regime_map.monotone[i, j]:
            continue
        tested += 1
        if not regime_map.oscillatory[i, j]:
            consistent += 1
        elif len(examples) < cap:
            examples.append((float(regime_map.dx_axis[i]),
                             float(regime_map.dt_axis[j]),
                             "monotone run flagged oscillatory"))
    audits.append(ConjectureAudit(
        "C4", "temporally monotone runs are oscillation-free",
        tested, consistent, examples))
    return audits


def so_region_report(regime_map: RegimeMap) -> dict:
    """Extent of the stable-oscillation region, with a linear front fit.

    Fits dt_onset ~ slope * dx over columns that contain SO cells; a tight
    linear fit is exactly the unexplained straight front the time-averaged
    scheme shows.
    """
    so = regime_map.codes == CODE_IDS["SO"]
    count = int(so.sum())
    report: dict = {"cell_count": count}
    if count == 0:
        return report
    onsets: list[tuple[float, float]] = []
    for i in range(regime_map.shape[0]):
        js = np.nonzero(so[i])[0]
        if js.size:
            onsets.append((float(regime_map.dx_effective[i]),
                           float(regime_map.dt_axis[js[0]])))
    xs = np.array([p[0] for p in onsets])
    ys = np.array([p[1] for p in onsets])
    report["columns_with_so"] = len(onsets)
    report["dt_onset_min"] = float(ys.min())
    report["dt_onset_max"] = float(ys.max())
    if len(onsets) >= 2 and float(np.ptp(xs)) > 0:
        slope, intercept = np.polyfit(xs, ys, 1)
        fit = slope * xs + intercept
        ss_res = float(((ys - fit) ** 2).sum())
        ss_tot = float(((ys - ys.mean()) ** 2).sum())
        report["front_fit"] = {
            "slope": float(slope),
            "intercept": float(intercept),
            "r_squared": 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0,
        }
    return report


def behavior_set(regime_map: RegimeMap, *, collapse_uo: bool = True,
                 exclude_band: bool = True, min_fraction: float = 0.0) -> set[str]:
    """Distinct codes appearing in the map, for behaviour-table comparisons."""
    codes = regime_map.codes.copy()
    keep = codes != CODE_IDS["Invalid"]
    if exclude_band:
        keep &= ~curve_band_mask(regime_map)
    selected = codes[keep]
    total = selected.size
    out: set[str] = set()
    for name in ("OFS", "SO", "UO", "U"):
        count = int(np.count_nonzero(selected == CODE_IDS[name]))
        if count == 0:
            continue
        if total and count / total < min_fraction:
            continue
        out.add(name)
    if collapse_uo and "UO" in out:
        out.discard("UO")
        out.add("U")
    return out
