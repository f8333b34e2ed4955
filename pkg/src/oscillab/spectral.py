"""Eigenvalues, amplification factors, and the analytic condition curves.

Constant tridiagonal matrices with bands (c, b, a) have the closed-form
spectrum b + 2 sqrt(a c) cos(k pi / (N+1)); the symmetric case carries the
discrete sine eigenvectors.  Everything else goes through a dense solver.
Three conditions are traced over dx:

    vn-stability        max_theta |g(theta)| <= 1 + C dt
    positive-eigenvalue min Re(lambda) > 0
    dominance           max Re(lambda) >= max |Re(lambda)|
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .problems import EquationSpec
from .schemes import TwoLevelScheme, thomas_solve

# Fourier sample points for max_theta |g|; the extrema of every factor here
# sit at the ends of [0, pi], so a moderate grid is exact enough.
_THETA = np.linspace(0.0, math.pi, 129)

# dt probe used to detect unconditional bounds.
_UNCONDITIONAL_PROBE = 1e6

FREEZE_CANDIDATE_BASE = (0.0, 1.0)


@dataclass(frozen=True)
class Spectrum:
    """Eigenvalues sorted by descending real part, optionally with vectors."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray | None
    source: str
    tolerance: float

    @property
    def n(self) -> int:
        return self.eigenvalues.size


@dataclass(frozen=True)
class ConditionCurve:
    """Largest admissible dt per dx for one analytic condition.

    `samples` is an (n, 2) array of (dx, dt_bound) pairs; `unconditional`
    marks conditions satisfied for every dt in the probed range.
    """

    kind: str
    samples: np.ndarray
    vn_slack_C: float = 0.0
    unconditional: bool = False

    def bound_at(self, dx: float) -> float:
        if self.unconditional:
            return math.inf
        return float(np.interp(dx, self.samples[:, 0], self.samples[:, 1]))


def _sorted_spectrum(values: np.ndarray, vectors: np.ndarray | None,
                     source: str, tolerance: float) -> Spectrum:
    values = np.asarray(values)
    order = np.lexsort((-values.imag, -values.real))
    vecs = vectors[:, order] if vectors is not None else None
    return Spectrum(eigenvalues=values[order], eigenvectors=vecs,
                    source=source, tolerance=tolerance)


def tridiag_eigenvalues_closed(a: float, b: float, c: float, N: int) -> Spectrum:
    """Closed-form spectrum of the constant tridiagonal with bands (c, b, a).

    A negative product a*c pushes the spectrum onto the complex line
    b + 2i sqrt(|a c|) cos(k pi/(N+1)).
    """
    if N < 1:
        raise ValueError("matrix size must be at least 1")
    k = np.arange(1, N + 1)
    cosines = np.cos(np.pi * k / (N + 1))
    product = a * c
    if product >= 0:
        values = b + 2.0 * math.sqrt(product) * cosines
    else:
        values = b + 2.0j * math.sqrt(-product) * cosines
    return _sorted_spectrum(values, None, "closed-form", 0.0)


def tridiag_eigenvectors(N: int) -> np.ndarray:
    """Discrete sine eigenvectors of the symmetric constant tridiagonal.

    Column i holds sin(i k pi / (N+1)) over node index k.
    """
    k = np.arange(1, N + 1)
    return np.sin(np.outer(k, k) * np.pi / (N + 1)).T


def heat_ftcs_eigenvalues(r: float, N: int) -> Spectrum:
    """lambda_i = 1 - 4 r sin^2(i pi / (2(N+1))), all inside (1-4r, 1)."""
    if r <= 0:
        raise ValueError("r must be positive")
    i = np.arange(1, N + 1)
    values = 1.0 - 4.0 * r * np.sin(np.pi * i / (2 * (N + 1))) ** 2
    return _sorted_spectrum(values, None, "closed-form", 0.0)


def dense_eigenvalues(M: np.ndarray, tol: float = 1e-9,
                      want_vectors: bool = False) -> Spectrum:
    """LAPACK spectrum of a small dense real matrix (desk-scale N <= 512)."""
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError("dense eigensolver needs a square matrix")
    if M.shape[0] > 512:
        raise ValueError("dense eigensolver is limited to N <= 512")
    try:
        if want_vectors:
            values, vectors = np.linalg.eig(M)
        else:
            values = np.linalg.eigvals(M)
            vectors = None
    except np.linalg.LinAlgError as exc:
        raise ValueError("eigensolver failed") from exc
    return _sorted_spectrum(values, vectors, "dense", tol)


def effective_update_matrix(scheme: TwoLevelScheme) -> np.ndarray:
    """Dense M = A^{-1} B, built column by column through the banded solver."""
    B = scheme.B.to_dense()
    if scheme.A.is_identity():
        return B
    cols = [thomas_solve(scheme.A, B[:, j]) for j in range(scheme.n)]
    return np.column_stack(cols)


def _constant_bands(tri) -> tuple[float, float, float] | None:
    """(lower, diag, upper) when the matrix is constant with no overrides."""
    if tri.first_row_override is not None or tri.last_row_override is not None:
        return None
    diag = tri.diag
    if tri.n == 1:
        return 0.0, float(diag[0]), 0.0
    lower, upper = tri.lower, tri.upper
    if (np.all(diag == diag[0]) and np.all(lower == lower[0])
            and np.all(upper == upper[0])):
        return float(lower[0]), float(diag[0]), float(upper[0])
    return None


def scheme_spectrum(scheme: TwoLevelScheme, tol: float = 1e-9) -> Spectrum:
    """Spectrum of M = A^{-1} B, closed form when both sides share sine modes.

    Constant symmetric tridiagonal A and B diagonalize in the same discrete
    sine basis, so the eigenvalues are the ratio of the band formulas; any
    other structure (Neumann edge rows, per-node diagonals) goes dense.
    """
    a_bands = _constant_bands(scheme.A)
    b_bands = _constant_bands(scheme.B)
    if (a_bands is not None and b_bands is not None
            and a_bands[0] == a_bands[2] and b_bands[0] == b_bands[2]):
        N = scheme.n
        k = np.arange(1, N + 1)
        cosines = np.cos(np.pi * k / (N + 1))
        num = b_bands[1] + 2.0 * b_bands[0] * cosines
        den = a_bands[1] + 2.0 * a_bands[0] * cosines
        if np.all(np.abs(den) > 0):
            return _sorted_spectrum(num / den, None, "closed-form", 0.0)
    return dense_eigenvalues(effective_update_matrix(scheme), tol)


def spectral_radius(spectrum: Spectrum) -> float:
    return float(np.abs(spectrum.eigenvalues).max())


def positive_real_test(spectrum: Spectrum) -> bool:
    """True iff every eigenvalue has strictly positive real part."""
    return bool(np.all(spectrum.eigenvalues.real > 0))


def dominance_test(spectrum: Spectrum) -> bool:
    """True iff no eigenvalue's real part outweighs the largest one in magnitude."""
    real = spectrum.eigenvalues.real
    return bool(real.max() - np.abs(real).max() >= 0)


def matrix_powers_bounded(M: np.ndarray, power: int = 100,
                          threshold: float = 1e6) -> bool:
    """Whether entries of M^power stay below threshold in floating point."""
    P = np.asarray(M, dtype=float)
    acc = np.eye(P.shape[0])
    for _ in range(power):
        acc = acc @ P
        peak = np.abs(acc).max()
        if not np.isfinite(peak) or peak > threshold:
            return False
    return True


def _frozen_coefficient(scheme_kind: str, eq: EquationSpec, u_bound: float) -> float:
    """Constant reaction rate the named scheme sees once frozen at u_bound."""
    if not eq.is_nonlinear:
        return float(eq.linear_rate)
    if scheme_kind == "btcs-linapprox":
        return float(eq.reaction_derivative(np.float64(u_bound)))
    return float(eq.freezing_split(np.float64(u_bound)))


def von_neumann_factor(scheme_kind: str, eq: EquationSpec, r: float, dt: float,
                       theta: float, freeze_bound: float | None = None) -> complex:
    """Amplification factor g(theta) of the Fourier mode e^{i m theta}.

    Nonlinear equations use the frozen coefficient at `freeze_bound`
    (worst case over {0, 1} when not given).
    """
    if freeze_bound is None and eq.is_nonlinear:
        freeze_bound = worst_freeze_bound(scheme_kind, eq, r, dt,
                                          FREEZE_CANDIDATE_BASE)
    rho = _frozen_coefficient(scheme_kind, eq, freeze_bound or 0.0)
    s = math.sin(0.5 * theta) ** 2
    if scheme_kind == "ftcs":
        return complex(1.0 - 4.0 * r * s + dt * rho)
    if scheme_kind in ("btcs", "btcs-frozen", "btcs-linapprox"):
        return complex(1.0 / (1.0 + 4.0 * r * s - dt * rho))
    if scheme_kind == "cn":
        return complex((1.0 - 2.0 * r * s + 0.5 * dt * rho)
                       / (1.0 + 2.0 * r * s - 0.5 * dt * rho))
    if scheme_kind == "semi":
        return complex((1.0 - 4.0 * r * s) / (1.0 - dt * rho))
    raise ValueError(f"unknown scheme {scheme_kind!r}")


def _factor_profile(scheme_kind: str, eq: EquationSpec, r: float, dt: float,
                    freeze_bound: float) -> np.ndarray:
    rho = _frozen_coefficient(scheme_kind, eq, freeze_bound)
    s = np.sin(0.5 * _THETA) ** 2
    with np.errstate(all="ignore"):
        if scheme_kind == "ftcs":
            return 1.0 - 4.0 * r * s + dt * rho
        if scheme_kind in ("btcs", "btcs-frozen", "btcs-linapprox"):
            return 1.0 / (1.0 + 4.0 * r * s - dt * rho)
        if scheme_kind == "cn":
            return (1.0 - 2.0 * r * s + 0.5 * dt * rho) / (1.0 + 2.0 * r * s - 0.5 * dt * rho)
        if scheme_kind == "semi":
            return (1.0 - 4.0 * r * s) / (1.0 - dt * rho)
    raise ValueError(f"unknown scheme {scheme_kind!r}")


def worst_freeze_bound(scheme_kind: str, eq: EquationSpec, r: float, dt: float,
                       candidates: tuple[float, ...]) -> float:
    """Pick the freezing bound with the strongest frozen reaction.

    Candidates are typically {min u0, max u0, 0, 1}.  The bound maximizing
    the magnitude of the frozen coefficient perturbs the diffusion scheme's
    error factor the most, independent of the mesh ratio; ties resolve toward
    the growth direction.  On the stock profiles this freezes the quadratic
    decay equation at its maximum and the logistic equation at zero (the
    maximal-growth state).
    """
    if not eq.is_nonlinear:
        return 0.0
    del r, dt  # the selection is mesh-independent
    best: tuple[tuple[float, float], float] | None = None
    for cand in dict.fromkeys(float(c) for c in candidates):
        coeff = _frozen_coefficient(scheme_kind, eq, cand)
        key = (abs(coeff), coeff)
        if best is None or key > best[0]:
            best = (key, cand)
    return best[1]


def _bisect_dt(feasible, dt_lo: float = 1e-10, dt_hi: float = 10.0,
               depth: int = 40) -> tuple[float, bool]:
    """Largest feasible dt by bisection; (bound, unconditional) pair."""
    if feasible(_UNCONDITIONAL_PROBE):
        return math.inf, True
    if not feasible(dt_lo):
        return 0.0, False
    lo, hi = dt_lo, dt_hi
    while feasible(hi):
        lo, hi = hi, hi * 4.0
        if hi > _UNCONDITIONAL_PROBE:
            return math.inf, True
    for _ in range(depth):
        mid = 0.5 * (lo + hi)
        if feasible(mid):
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-6 * max(lo, 1e-12):
            break
    return lo, False


def vn_stability_curve(scheme_kind: str, eq: EquationSpec,
                       dx_samples: np.ndarray, C: float = 0.0,
                       freeze_bound: float | None = None) -> ConditionCurve:
    """Largest dt per dx with max_theta |g| <= 1 + C dt."""
    if C < 0:
        raise ValueError("the stability slack C must be nonnegative")
    dx_samples = np.asarray(dx_samples, dtype=float)
    bounds = np.empty_like(dx_samples)
    all_unconditional = True
    for idx, dx in enumerate(dx_samples):
        def feasible(dt: float, dx: float = dx) -> bool:
            fb = freeze_bound
            if fb is None and eq.is_nonlinear:
                fb = worst_freeze_bound(scheme_kind, eq, dt / dx**2, dt,
                                        FREEZE_CANDIDATE_BASE)
            profile = _factor_profile(scheme_kind, eq, dt / dx**2, dt, fb or 0.0)
            with np.errstate(all="ignore"):
                peak = float(np.abs(profile).max())
            return math.isfinite(peak) and peak <= 1.0 + C * dt

        bounds[idx], flat = _bisect_dt(feasible)
        all_unconditional = all_unconditional and flat
    return ConditionCurve(kind="vn-stability",
                          samples=np.column_stack([dx_samples, bounds]),
                          vn_slack_C=C, unconditional=all_unconditional)


def _static_spectrum(scheme_kind: str, eq: EquationSpec, r: float, dt: float,
                     N: int, freeze_bound: float) -> Spectrum:
    """Closed-form Dirichlet spectrum of the frozen constant-coefficient scheme."""
    rho = _frozen_coefficient(scheme_kind, eq, freeze_bound)
    k = np.arange(1, N + 1)
    s = np.sin(np.pi * k / (2 * (N + 1))) ** 2
    with np.errstate(all="ignore"):
        if scheme_kind == "ftcs":
            values = 1.0 - 4.0 * r * s + dt * rho
        elif scheme_kind in ("btcs", "btcs-frozen", "btcs-linapprox"):
            values = 1.0 / (1.0 + 4.0 * r * s - dt * rho)
        elif scheme_kind == "cn":
            values = (1.0 - 2.0 * r * s + 0.5 * dt * rho) / (1.0 + 2.0 * r * s - 0.5 * dt * rho)
        elif scheme_kind == "semi":
            values = (1.0 - 4.0 * r * s) / (1.0 - dt * rho)
        else:
            raise ValueError(f"unknown scheme {scheme_kind!r}")
    return _sorted_spectrum(values, None, "closed-form", 0.0)


def _condition_curve(kind: str, predicate, scheme_kind: str, eq: EquationSpec,
                     dx_samples: np.ndarray, n_of_dx,
                     freeze_bound: float | None) -> ConditionCurve:
    dx_samples = np.asarray(dx_samples, dtype=float)
    bounds = np.empty_like(dx_samples)
    all_unconditional = True
    for idx, dx in enumerate(dx_samples):
        N = int(n_of_dx(dx))

        def feasible(dt: float, dx: float = dx, N: int = N) -> bool:
            fb = freeze_bound
            if fb is None and eq.is_nonlinear:
                fb = worst_freeze_bound(scheme_kind, eq, dt / dx**2, dt,
                                        FREEZE_CANDIDATE_BASE)
            with np.errstate(all="ignore"):
                spec = _static_spectrum(scheme_kind, eq, dt / dx**2, dt, N,
                                        fb or 0.0)
                if not np.all(np.isfinite(spec.eigenvalues)):
                    return False
                return predicate(spec)

        bounds[idx], flat = _bisect_dt(feasible)
        all_unconditional = all_unconditional and flat
    return ConditionCurve(kind=kind,
                          samples=np.column_stack([dx_samples, bounds]),
                          unconditional=all_unconditional)


def positive_eig_curve(scheme_kind: str, eq: EquationSpec,
                       dx_samples: np.ndarray, n_of_dx,
                       freeze_bound: float | None = None) -> ConditionCurve:
    """Largest dt per dx keeping every eigenvalue's real part positive."""
    return _condition_curve("positive-eigenvalue", positive_real_test,
                            scheme_kind, eq, dx_samples, n_of_dx, freeze_bound)


def dominance_curve(scheme_kind: str, eq: EquationSpec, dx_samples: np.ndarray,
                    n_of_dx, freeze_bound: float | None = None) -> ConditionCurve:
    """Largest dt per dx keeping the spectrum positively dominated."""
    return _condition_curve("dominance", dominance_test, scheme_kind, eq,
                            dx_samples, n_of_dx, freeze_bound)
