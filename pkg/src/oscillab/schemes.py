"""Two-level difference systems A u^{n+1} = B u^n + dt g for every scheme.

Interior stencils, with r = dt/dx^2 and rho the linear reaction rate:

    ftcs            A = I                B = (r, 1 - 2r + dt*rho, r)
    btcs            A = (-r, 1 + 2r - dt*rho, -r)            B = I
    cn              A = I - (dt/2)(L + rho I)   B = I + (dt/2)(L + rho I)
    semi            A = I - dt diag(sigma(u^n)) B = I + dt L
    btcs-frozen     btcs with rho replaced by the frozen coefficient sigma(U~)
    btcs-linapprox  btcs with rho replaced per node by f_u(u^n); the explicit
                    remainder f(u^n) - f_u(u^n) u^n rides in g

Nonlinear equations under ftcs evaluate f(u^n) straight into g.  Dirichlet
boundary values enter g; Neumann fluxes enter via second-order ghost-node
elimination, which keeps the matrix tridiagonal but doubles the edge
off-diagonal entries.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.linalg

from .problems import BoundaryCondition, EquationSpec, Mesh1D

SCHEME_KINDS = ("ftcs", "btcs", "cn", "semi", "btcs-frozen", "btcs-linapprox")
NONLINEAR_ONLY = ("semi", "btcs-frozen", "btcs-linapprox")

# Relative pivot floor below which the no-pivot sweep hands off to the
# partial-pivoting banded solver.
_PIVOT_FLOOR = 1e-13


@dataclass(frozen=True)
class TridiagonalMatrix:
    """Compact tridiagonal storage with optional edge-row overrides.

    `lower` and `upper` have length n-1.  The overrides replace the first row
    (diag, upper) and last row (lower, diag); Neumann ghost-node rows use them
    so the interior bands can stay constant.
    """

    lower: np.ndarray
    diag: np.ndarray
    upper: np.ndarray
    first_row_override: tuple[float, float] | None = None
    last_row_override: tuple[float, float] | None = None

    @property
    def n(self) -> int:
        return self.diag.size

    @classmethod
    def constant(cls, lower: float, diag: float, upper: float, n: int,
                 first_row: tuple[float, float] | None = None,
                 last_row: tuple[float, float] | None = None) -> "TridiagonalMatrix":
        return cls(
            lower=np.full(max(n - 1, 0), lower, dtype=float),
            diag=np.full(n, diag, dtype=float),
            upper=np.full(max(n - 1, 0), upper, dtype=float),
            first_row_override=first_row,
            last_row_override=last_row,
        )

    @classmethod
    def identity(cls, n: int) -> "TridiagonalMatrix":
        return cls.constant(0.0, 1.0, 0.0, n)

    def bands(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Bands with the edge overrides folded in."""
        lower = self.lower.copy()
        diag = self.diag.copy()
        upper = self.upper.copy()
        if self.first_row_override is not None:
            diag[0], first_upper = self.first_row_override
            if upper.size:
                upper[0] = first_upper
        if self.last_row_override is not None:
            last_lower, diag[-1] = self.last_row_override
            if lower.size:
                lower[-1] = last_lower
        return lower, diag, upper

    def to_dense(self) -> np.ndarray:
        lower, diag, upper = self.bands()
        return np.diag(diag) + np.diag(upper, 1) + np.diag(lower, -1)

    def matvec(self, u: np.ndarray) -> np.ndarray:
        lower, diag, upper = self.bands()
        out = diag * u
        if u.size > 1:
            out[:-1] += upper * u[1:]
            out[1:] += lower * u[:-1]
        return out

    def is_identity(self) -> bool:
        lower, diag, upper = self.bands()
        return (
            np.all(diag == 1.0) and np.all(lower == 0.0) and np.all(upper == 0.0)
        )


@dataclass(frozen=True)
class StateVector:
    """Solution values at the scheme's unknowns at time index n."""

    values: np.ndarray
    time_index: int = 0


@dataclass
class TwoLevelScheme:
    """Assembled stepper A u^{n+1} = B u^n + dt g.

    `rebuild` is "static" when the system is fixed for the whole run and
    "per-step" when entries depend on the current state; per-step schemes
    refresh only the state-dependent entries before each step.
    """

    A: TridiagonalMatrix
    B: TridiagonalMatrix
    g: np.ndarray
    rebuild: str
    r: float
    dt: float
    scheme_kind: str
    equation: EquationSpec
    bc: BoundaryCondition
    mesh: Mesh1D
    freeze_bound: float | None = None
    _refresh: Callable[["TwoLevelScheme", np.ndarray], None] | None = field(
        default=None, repr=False
    )

    @property
    def n(self) -> int:
        return self.A.n

    def refresh(self, u: np.ndarray) -> None:
        if self.rebuild == "per-step" and self._refresh is not None:
            self._refresh(self, u)


def _diffusion_parts(mesh: Mesh1D, bc: BoundaryCondition) -> tuple[int, np.ndarray, np.ndarray, np.ndarray, np.ndarray, tuple, tuple]:
    """Semi-discrete Laplacian bands plus the boundary source vector q.

    Returns (n, lower, diag, upper, q, first_row, last_row) so that
    u_t = L u + q + f(u) holds at the unknowns.  Edge rows are overrides for
    Neumann (ghost elimination) and None-equivalent plain rows for Dirichlet.
    """
    inv_dx2 = 1.0 / mesh.dx**2
    if bc.is_dirichlet:
        n = mesh.n_interior
        lower = np.full(n - 1, inv_dx2)
        diag = np.full(n, -2.0 * inv_dx2)
        upper = np.full(n - 1, inv_dx2)
        q = np.zeros(n)
        q[0] += bc.left_value * inv_dx2
        q[-1] += bc.right_value * inv_dx2
        return n, lower, diag, upper, q, (), ()
    # Neumann: unknowns include the boundary nodes; the ghost value
    # u_{-1} = u_1 - 2 dx q_L keeps the stencil second order.
    n = mesh.n_interior + 2
    lower = np.full(n - 1, inv_dx2)
    diag = np.full(n, -2.0 * inv_dx2)
    upper = np.full(n - 1, inv_dx2)
    q = np.zeros(n)
    q[0] -= 2.0 * bc.left_value / mesh.dx
    q[-1] += 2.0 * bc.right_value / mesh.dx
    first_row = (-2.0 * inv_dx2, 2.0 * inv_dx2)
    last_row = (2.0 * inv_dx2, -2.0 * inv_dx2)
    return n, lower, diag, upper, q, first_row, last_row


def _identity_plus(mesh: Mesh1D, bc: BoundaryCondition, factor: float,
                   rate: float) -> tuple[TridiagonalMatrix, np.ndarray]:
    """Matrix I + factor*(L + rate*I) and the matching source factor*q/dt...

    Returns the tridiagonal and the raw boundary vector q (caller scales).
    """
    n, lower, diag, upper, q, first, last = _diffusion_parts(mesh, bc)
    tri = TridiagonalMatrix(
        lower=factor * lower,
        diag=1.0 + factor * (diag + rate),
        upper=factor * upper,
        first_row_override=(
            (1.0 + factor * (first[0] + rate), factor * first[1]) if first else None
        ),
        last_row_override=(
            (factor * last[0], 1.0 + factor * (last[1] + rate)) if last else None
        ),
    )
    return tri, q


def _require_linear(eq: EquationSpec, scheme: str) -> float:
    if eq.is_nonlinear:
        raise ValueError(
            f"linearization required: {scheme} cannot treat {eq.name} directly;"
            " use semi, btcs-frozen or btcs-linapprox"
        )
    return float(eq.linear_rate)


def assemble_ftcs(eq: EquationSpec, mesh: Mesh1D, dt: float,
                  bc: BoundaryCondition) -> TwoLevelScheme:
    """Explicit scheme; nonlinear reactions are evaluated into g each step."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    rate = 0.0 if eq.is_nonlinear else float(eq.linear_rate)
    B, q = _identity_plus(mesh, bc, dt, rate)
    A = TridiagonalMatrix.identity(B.n)
    scheme = TwoLevelScheme(
        A=A, B=B, g=q.copy(), rebuild="static", r=dt / mesh.dx**2, dt=dt,
        scheme_kind="ftcs", equation=eq, bc=bc, mesh=mesh,
    )
    if eq.is_nonlinear:
        def refresh(s: TwoLevelScheme, u: np.ndarray) -> None:
            s.g[:] = q + s.equation.reaction(u)

        scheme.rebuild = "per-step"
        scheme._refresh = refresh
    return scheme


def assemble_btcs(eq: EquationSpec, mesh: Mesh1D, dt: float,
                  bc: BoundaryCondition) -> TwoLevelScheme:
    if dt <= 0:
        raise ValueError("dt must be positive")
    rate = _require_linear(eq, "btcs")
    A, q = _identity_plus(mesh, bc, -dt, rate)
    return TwoLevelScheme(
        A=A, B=TridiagonalMatrix.identity(A.n), g=q, rebuild="static",
        r=dt / mesh.dx**2, dt=dt, scheme_kind="btcs", equation=eq, bc=bc,
        mesh=mesh,
    )


def assemble_crank_nicolson(eq: EquationSpec, mesh: Mesh1D, dt: float,
                            bc: BoundaryCondition) -> TwoLevelScheme:
    if dt <= 0:
        raise ValueError("dt must be positive")
    rate = _require_linear(eq, "cn")
    A, q = _identity_plus(mesh, bc, -0.5 * dt, rate)
    B, _ = _identity_plus(mesh, bc, 0.5 * dt, rate)
    return TwoLevelScheme(
        A=A, B=B, g=q, rebuild="static", r=dt / mesh.dx**2, dt=dt,
        scheme_kind="cn", equation=eq, bc=bc, mesh=mesh,
    )


def assemble_semi_implicit(eq: EquationSpec, mesh: Mesh1D, dt: float,
                           bc: BoundaryCondition,
                           u0: np.ndarray | None = None) -> TwoLevelScheme:
    """Diffusion explicit, reaction implicit as sigma(u^n) * u^{n+1}."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    if not eq.is_nonlinear:
        raise ValueError("semi-implicit reserved for nonlinear equations")
    B, q = _identity_plus(mesh, bc, dt, 0.0)
    n = B.n
    A = TridiagonalMatrix(
        lower=np.zeros(n - 1), diag=np.ones(n), upper=np.zeros(n - 1)
    )

    def refresh(s: TwoLevelScheme, u: np.ndarray) -> None:
        s.A.diag[:] = 1.0 - s.dt * s.equation.freezing_split(u)

    scheme = TwoLevelScheme(
        A=A, B=B, g=q, rebuild="per-step", r=dt / mesh.dx**2, dt=dt,
        scheme_kind="semi", equation=eq, bc=bc, mesh=mesh, _refresh=refresh,
    )
    if u0 is not None:
        refresh(scheme, np.asarray(u0, dtype=float))
    return scheme


def assemble_btcs_frozen(eq: EquationSpec, mesh: Mesh1D, dt: float,
                         bc: BoundaryCondition, u_bound: float) -> TwoLevelScheme:
    """Implicit scheme with the nonlinearity frozen at u_bound for the whole run.

    Freezing a linear reaction reproduces plain btcs; the coefficient is the
    constant rate regardless of u_bound.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    coeff = float(eq.freezing_split(np.float64(u_bound)))
    A, q = _identity_plus(mesh, bc, -dt, coeff)
    return TwoLevelScheme(
        A=A, B=TridiagonalMatrix.identity(A.n), g=q, rebuild="static",
        r=dt / mesh.dx**2, dt=dt, scheme_kind="btcs-frozen", equation=eq,
        bc=bc, mesh=mesh, freeze_bound=float(u_bound),
    )


def assemble_btcs_linapprox(eq: EquationSpec, mesh: Mesh1D, dt: float,
                            bc: BoundaryCondition,
                            u0: np.ndarray | None = None) -> TwoLevelScheme:
    """Implicit scheme with the reaction replaced by its tangent at u^n.

    Exact on the linear equations, where it reproduces plain btcs bit for bit.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    A_base, q = _identity_plus(mesh, bc, -dt, 0.0)
    base_diag = A_base.diag.copy()
    base_first = A_base.first_row_override
    base_last = A_base.last_row_override

    def refresh(s: TwoLevelScheme, u: np.ndarray) -> None:
        fu = s.equation.reaction_derivative(u)
        s.A.diag[:] = base_diag - s.dt * fu
        if base_first is not None:
            d0, up0 = base_first
            lo, dN = base_last
            object.__setattr__(s.A, "first_row_override", (d0 - s.dt * fu[0], up0))
            object.__setattr__(s.A, "last_row_override", (lo, dN - s.dt * fu[-1]))
        s.g[:] = q + s.equation.reaction(u) - fu * u

    scheme = TwoLevelScheme(
        A=A_base, B=TridiagonalMatrix.identity(A_base.n), g=q.copy(),
        rebuild="per-step", r=dt / mesh.dx**2, dt=dt,
        scheme_kind="btcs-linapprox", equation=eq, bc=bc, mesh=mesh,
        _refresh=refresh,
    )
    if u0 is not None:
        refresh(scheme, np.asarray(u0, dtype=float))
    return scheme


_ASSEMBLERS = {
    "ftcs": assemble_ftcs,
    "btcs": assemble_btcs,
    "cn": assemble_crank_nicolson,
}


def assemble(scheme_kind: str, eq: EquationSpec, mesh: Mesh1D, dt: float,
             bc: BoundaryCondition, *, u0: np.ndarray | None = None,
             freeze_bound: float | None = None) -> TwoLevelScheme:
    """Dispatch to the named assembler; per-step schemes prime from u0."""
    if scheme_kind in _ASSEMBLERS:
        scheme = _ASSEMBLERS[scheme_kind](eq, mesh, dt, bc)
        if u0 is not None:
            scheme.refresh(np.asarray(u0, dtype=float))
        return scheme
    if scheme_kind == "semi":
        return assemble_semi_implicit(eq, mesh, dt, bc, u0=u0)
    if scheme_kind == "btcs-frozen":
        if freeze_bound is None:
            raise ValueError("btcs-frozen requires a freeze bound")
        return assemble_btcs_frozen(eq, mesh, dt, bc, freeze_bound)
    if scheme_kind == "btcs-linapprox":
        return assemble_btcs_linapprox(eq, mesh, dt, bc, u0=u0)
    raise ValueError(
        f"unknown scheme {scheme_kind!r}; expected one of {SCHEME_KINDS}"
    )


def frozen_surrogate(scheme_kind: str, eq: EquationSpec, mesh: Mesh1D, dt: float,
                     bc: BoundaryCondition, freeze_bound: float) -> TwoLevelScheme:
    """Static stand-in for a per-step scheme, frozen at the worst-case bound.

    Spectral analysis of per-step schemes happens on this constant-coefficient
    matrix rather than on the per-step sequence.
    """
    if not eq.is_nonlinear:
        if scheme_kind in ("btcs-frozen", "btcs-linapprox"):
            return assemble_btcs(eq, mesh, dt, bc)
        return assemble(scheme_kind, eq, mesh, dt, bc)
    coeff = float(eq.freezing_split(np.float64(freeze_bound)))
    if scheme_kind == "ftcs":
        B, q = _identity_plus(mesh, bc, dt, coeff)
        return TwoLevelScheme(
            A=TridiagonalMatrix.identity(B.n), B=B, g=q, rebuild="static",
            r=dt / mesh.dx**2, dt=dt, scheme_kind="ftcs", equation=eq, bc=bc,
            mesh=mesh, freeze_bound=freeze_bound,
        )
    if scheme_kind == "semi":
        B, q = _identity_plus(mesh, bc, dt, 0.0)
        n = B.n
        A = TridiagonalMatrix(
            lower=np.zeros(n - 1),
            diag=np.full(n, 1.0 - dt * coeff),
            upper=np.zeros(n - 1),
        )
        return TwoLevelScheme(
            A=A, B=B, g=q, rebuild="static", r=dt / mesh.dx**2, dt=dt,
            scheme_kind="semi", equation=eq, bc=bc, mesh=mesh,
            freeze_bound=freeze_bound,
        )
    if scheme_kind == "btcs-frozen":
        return assemble_btcs_frozen(eq, mesh, dt, bc, freeze_bound)
    if scheme_kind == "btcs-linapprox":
        fu = float(eq.reaction_derivative(np.float64(freeze_bound)))
        A, q = _identity_plus(mesh, bc, -dt, fu)
        return TwoLevelScheme(
            A=A, B=TridiagonalMatrix.identity(A.n), g=q, rebuild="static",
            r=dt / mesh.dx**2, dt=dt, scheme_kind="btcs-linapprox", equation=eq,
            bc=bc, mesh=mesh, freeze_bound=freeze_bound,
        )
    raise ValueError(f"no frozen surrogate for scheme {scheme_kind!r}")


def thomas_solve(A: TridiagonalMatrix, rhs: np.ndarray) -> np.ndarray:
    """Solve A x = rhs by the Thomas sweep, with a pivoted banded fallback.

    A vanishing pivot hands the system to LAPACK's partial-pivoting banded
    solver; a system that is singular for both raises ValueError.
    """
    lower, diag, upper = A.bands()
    n = diag.size
    b = np.asarray(rhs, dtype=float)
    if b.shape != (n,):
        raise ValueError(f"rhs length {b.size} does not match system size {n}")
    scale = max(np.abs(diag).max(), np.abs(lower).max(initial=0.0),
                np.abs(upper).max(initial=0.0), 1.0)
    beta = np.empty(n)
    z = np.empty(n)
    beta[0] = diag[0]
    if abs(beta[0]) < _PIVOT_FLOOR * scale:
        return _banded_fallback(lower, diag, upper, b)
    z[0] = b[0] / beta[0]
    gamma = np.empty(max(n - 1, 0))
    for i in range(1, n):
        gamma[i - 1] = upper[i - 1] / beta[i - 1]
        beta[i] = diag[i] - lower[i - 1] * gamma[i - 1]
        if abs(beta[i]) < _PIVOT_FLOOR * scale:
            return _banded_fallback(lower, diag, upper, b)
        z[i] = (b[i] - lower[i - 1] * z[i - 1]) / beta[i]
    x = np.empty(n)
    x[-1] = z[-1]
    for i in range(n - 2, -1, -1):
        x[i] = z[i] - gamma[i] * x[i + 1]
    return x


def _banded_fallback(lower: np.ndarray, diag: np.ndarray, upper: np.ndarray,
                     rhs: np.ndarray) -> np.ndarray:
    n = diag.size
    ab = np.zeros((3, n))
    ab[0, 1:] = upper
    ab[1, :] = diag
    ab[2, :-1] = lower
    try:
        return scipy.linalg.solve_banded((1, 1), ab, rhs)
    except (np.linalg.LinAlgError, scipy.linalg.LinAlgError, ValueError) as exc:
        raise ValueError("singular or non-dominant system") from exc


def step(scheme: TwoLevelScheme, state: StateVector) -> StateVector:
    """Advance one time level; per-step schemes rebuild from the state first."""
    u = np.asarray(state.values, dtype=float)
    if u.shape != (scheme.n,):
        raise ValueError(
            f"state length {u.size} does not match scheme size {scheme.n}"
        )
    scheme.refresh(u)
    rhs = scheme.B.matvec(u) + scheme.dt * scheme.g
    if scheme.A.is_identity():
        new = rhs
    else:
        new = thomas_solve(scheme.A, rhs)
    return StateVector(values=new, time_index=state.time_index + 1)
