"""Runtime verdicts for a single simulation: divergence, oscillation, monotonicity.

A run is capped once ||u||_inf reaches cap_K * ||u0||_2; this catches growth
long before overflow because the infinity norm bounds the 2-norm from below.
Oscillation is the sign-product test on three consecutive levels,

    sign(u^{n+2} - u^{n+1}) * sign(u^{n+1} - u^n) < 0,

with a deadband that zeroes rounding-level differences, and it must fire on
two distinct triples before a run counts as oscillatory.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .problems import IBVP, build_mesh, sample_initial_condition
from .schemes import StateVector, assemble, step
from .spectral import worst_freeze_bound


@dataclass(frozen=True)
class DiagnosticsConfig:
    """Calibration knobs for the runtime checks.

    cap_K           divergence threshold multiplier (>> 1)
    osc_deadband    absolute difference treated as zero; None derives
                    1e-12 * ||u0||_inf at run time
    osc_min_nodes   nodes that must flip within one triple
    osc_persistence distinct triples required before the run is oscillatory
    transient_skip  steps ignored before oscillation checking starts
    max_steps       hard cap on ceil(T/dt)
    """

    cap_K: float = 1e6
    osc_deadband: float | None = None
    osc_min_nodes: int = 1
    osc_persistence: int = 2
    transient_skip: int = 0
    max_steps: int = 50_000

    def __post_init__(self) -> None:
        if self.cap_K <= 1:
            raise ValueError("cap_K must exceed 1")
        if self.max_steps < 3:
            raise ValueError("max_steps must allow at least three levels")


@dataclass(frozen=True)
class RunFlags:
    """Verdict of one simulation."""

    stable: bool
    oscillatory: bool
    temporally_monotone: bool
    diverged_at_step: int | None
    max_inf_norm_ratio: float
    steps_run: int = 0
    oscillation_events: int = 0
    transient_skipped: int = 0
    monotonicity_limited: bool = False
    freeze_bound: float | None = None


def infinity_norm(u: np.ndarray) -> float:
    u = np.asarray(u)
    return float(np.abs(u).max()) if u.size else 0.0


def stability_check(u: np.ndarray, u0_l2: float, cfg: DiagnosticsConfig) -> bool:
    """False (abort the run) once ||u||_inf >= cap_K * ||u0||_2.

    A zero initial norm bypasses the check; non-finite values always fail.
    """
    peak = infinity_norm(u)
    if not math.isfinite(peak):
        return False
    if u0_l2 == 0.0:
        return True
    return peak < cfg.cap_K * u0_l2


def _signs(diff: np.ndarray, deadband: float) -> np.ndarray:
    out = np.sign(diff)
    out[np.abs(diff) < deadband] = 0.0
    return out


def oscillation_check(u_nm2: np.ndarray, u_nm1: np.ndarray, u_n: np.ndarray,
                      cfg: DiagnosticsConfig,
                      deadband: float | None = None) -> bool:
    """Whether the sign-product test fires on this triple of levels."""
    eps = deadband if deadband is not None else (cfg.osc_deadband or 0.0)
    s1 = _signs(np.asarray(u_nm1) - np.asarray(u_nm2), eps)
    s2 = _signs(np.asarray(u_n) - np.asarray(u_nm1), eps)
    return int(np.count_nonzero(s1 * s2 < 0)) >= cfg.osc_min_nodes


def monotonicity_check(trace: np.ndarray, deadband: float = 0.0,
                       axis: int = 0) -> bool:
    """Whether every slice along `axis` is non-increasing or non-decreasing.

    axis=0 walks time at fixed node (temporal monotonicity); axis=1 walks
    nodes at fixed time (the spatial variant).
    """
    trace = np.asarray(trace, dtype=float)
    diffs = np.diff(trace, axis=axis)
    signs = _signs(diffs, deadband)
    has_up = (signs > 0).any(axis=axis)
    has_down = (signs < 0).any(axis=axis)
    return not bool(np.any(has_up & has_down))


def nyquist_seed(u0: np.ndarray, amplitude: float) -> np.ndarray:
    """Add the highest resolvable mesh mode at a relative amplitude.

    The stock profiles are single smooth modes with no content in the fast
    modes, so instabilities seeded only by rounding can take thousands of
    steps to surface; this makes them observable on sweep time scales.
    """
    n = u0.size
    if amplitude == 0.0 or n == 0:
        return u0
    k = np.arange(1, n + 1)
    mode = np.sin(n * k * np.pi / (n + 1))
    scale = infinity_norm(u0)
    return u0 + amplitude * (scale if scale > 0 else 1.0) * mode


class _MonotoneTracker:
    """Streaming per-node monotonicity with a deadband."""

    def __init__(self, n: int, deadband: float):
        self.deadband = deadband
        self.direction = np.zeros(n)
        self.broken = np.zeros(n, dtype=bool)

    def update(self, prev: np.ndarray, curr: np.ndarray) -> None:
        s = _signs(curr - prev, self.deadband)
        conflict = (self.direction != 0) & (s != 0) & (s != self.direction)
        self.broken |= conflict
        fresh = (self.direction == 0) & (s != 0)
        self.direction[fresh] = s[fresh]

    @property
    def monotone(self) -> bool:
        return not bool(self.broken.any())


def run_simulation(ibvp: IBVP, scheme_kind: str, dx: float, dt: float,
                   cfg: DiagnosticsConfig | None = None, *,
                   mode_seed: float = 0.0,
                   collect_trace: bool = False) -> RunFlags | tuple[RunFlags, list]:
    """Step an IBVP to its final time or divergence and report the verdicts.

    Runs ceil(T/dt) steps (capped at cfg.max_steps).  Fisher-KPP runs skip
    the first fifth of the steps before oscillation checking (the diffusive
    transient is physical) and are flagged `monotonicity_limited`: runtime
    monotonicity cannot separate its travelling wave from method oscillation,
    so eigenvalue tests stay authoritative for that equation.

    `mode_seed` perturbs the sampled initial profile with the highest mesh
    mode at that relative amplitude (0 leaves the profile untouched).
    With `collect_trace`, also returns [(step, time, ||u||_inf), ...].
    """
    cfg = cfg or DiagnosticsConfig()
    mesh = build_mesh(ibvp.length, dx)
    u0 = nyquist_seed(sample_initial_condition(ibvp, mesh), mode_seed)
    eq = ibvp.equation

    freeze = None
    if scheme_kind == "btcs-frozen":
        candidates = (float(u0.min()), float(u0.max()), 0.0, 1.0)
        freeze = worst_freeze_bound(scheme_kind, eq, dt / mesh.dx**2, dt,
                                    candidates)
    scheme = assemble(scheme_kind, eq, mesh, dt, ibvp.bc, u0=u0,
                      freeze_bound=freeze)

    n_steps = min(cfg.max_steps, max(3, math.ceil(ibvp.final_time / dt)))
    skip = cfg.transient_skip
    limited = eq.name == "fisher"
    if limited and cfg.transient_skip == 0:
        skip = n_steps // 5

    deadband = cfg.osc_deadband
    if deadband is None:
        deadband = 1e-12 * infinity_norm(u0)
    u0_l2 = float(np.linalg.norm(u0))

    tracker = _MonotoneTracker(u0.size, deadband)
    trace: list[tuple[int, float, float]] = [(0, 0.0, infinity_norm(u0))]

    state = StateVector(values=u0, time_index=0)
    prev2: np.ndarray | None = None
    prev: np.ndarray = u0
    events = 0
    max_ratio = infinity_norm(u0) / u0_l2 if u0_l2 > 0 else 0.0
    diverged_at: int | None = None

    for k in range(1, n_steps + 1):
        state = step(scheme, state)
        u = state.values
        if u0_l2 > 0:
            max_ratio = max(max_ratio, infinity_norm(u) / u0_l2)
        if collect_trace:
            trace.append((k, k * dt, infinity_norm(u)))
        if not stability_check(u, u0_l2, cfg):
            diverged_at = k
            break
        tracker.update(prev, u)
        if prev2 is not None and k > skip:
            if oscillation_check(prev2, prev, u, cfg, deadband=deadband):
                events += 1
        prev2, prev = prev, u

    flags = RunFlags(
        stable=diverged_at is None,
        oscillatory=events >= cfg.osc_persistence,
        temporally_monotone=tracker.monotone,
        diverged_at_step=diverged_at,
        max_inf_norm_ratio=max_ratio,
        steps_run=state.time_index,
        oscillation_events=events,
        transient_skipped=skip,
        monotonicity_limited=limited,
        freeze_bound=freeze,
    )
    if collect_trace:
        return flags, trace
    return flags
