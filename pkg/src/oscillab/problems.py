"""Continuous problem definitions: meshes, boundary conditions, reaction terms.

Everything here is scheme-independent.  A problem is an interval, a pair of
boundary conditions of one kind, one of four reaction-diffusion equations,
and an initial profile.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

BC_KINDS = ("dirichlet", "neumann")
EQUATION_NAMES = ("heat", "linear-rd", "nonlinear-rd", "fisher")

# Two-sided sampling offset used to take the mean of left/right limits at a
# point; small enough to be exact for smooth profiles in double precision.
_LIMIT_EPS = 1e-9


@dataclass(frozen=True)
class Mesh1D:
    """Uniform 1D mesh on [0, L] with `n_interior` interior nodes."""

    length: float
    dx: float
    n_interior: int
    node_positions: np.ndarray
    requested_dx: float

    @property
    def interior_positions(self) -> np.ndarray:
        return self.node_positions[1:-1]

    @property
    def was_snapped(self) -> bool:
        return self.dx != self.requested_dx


def build_mesh(length: float, dx: float) -> Mesh1D:
    """Build a uniform mesh; snap dx to L/round(L/dx) when L/dx is not integral.

    Raises ValueError("mesh too coarse") when the snapped mesh would have
    fewer than one interior node.
    """
    if length <= 0:
        raise ValueError("domain length must be positive")
    if dx <= 0:
        raise ValueError("dx must be positive")
    cells = int(round(length / dx))
    if cells < 2:
        raise ValueError(
            f"mesh too coarse: dx={dx} on L={length} leaves no interior node"
        )
    snapped = length / cells
    positions = np.linspace(0.0, length, cells + 1)
    return Mesh1D(
        length=length,
        dx=snapped,
        n_interior=cells - 1,
        node_positions=positions,
        requested_dx=dx,
    )


@dataclass(frozen=True)
class BoundaryCondition:
    """Same-kind conditions at both ends: values for Dirichlet, fluxes for Neumann."""

    kind: str
    left_value: float = 0.0
    right_value: float = 0.0

    def __post_init__(self) -> None:
        if self.kind not in BC_KINDS:
            raise ValueError(f"unknown boundary kind {self.kind!r}; expected one of {BC_KINDS}")

    @property
    def is_dirichlet(self) -> bool:
        return self.kind == "dirichlet"


@dataclass(frozen=True)
class EquationSpec:
    """One of the four reaction-diffusion equations u_t = u_xx + f(u).

    `freezing_split` is the coefficient sigma with f(u) = sigma(u) * u,
    extended continuously by sigma(0) = f'(0); it is what nonlinear freezing
    and the semi-implicit split treat as a constant.  `linear_rate` is the
    constant reaction rate for the linear equations and None otherwise.
    """

    name: str
    reaction: Callable[[np.ndarray], np.ndarray]
    reaction_derivative: Callable[[np.ndarray], np.ndarray]
    freezing_split: Callable[[np.ndarray], np.ndarray]
    linear_rate: float | None

    @property
    def is_nonlinear(self) -> bool:
        return self.linear_rate is None


HEAT = EquationSpec(
    name="heat",
    reaction=lambda u: np.zeros_like(np.asarray(u, dtype=float)),
    reaction_derivative=lambda u: np.zeros_like(np.asarray(u, dtype=float)),
    freezing_split=lambda u: np.zeros_like(np.asarray(u, dtype=float)),
    linear_rate=0.0,
)

LINEAR_RD = EquationSpec(
    name="linear-rd",
    reaction=lambda u: -np.asarray(u, dtype=float),
    reaction_derivative=lambda u: -np.ones_like(np.asarray(u, dtype=float)),
    freezing_split=lambda u: -np.ones_like(np.asarray(u, dtype=float)),
    linear_rate=-1.0,
)

NONLINEAR_RD = EquationSpec(
    name="nonlinear-rd",
    reaction=lambda u: -np.asarray(u, dtype=float) ** 2,
    reaction_derivative=lambda u: -2.0 * np.asarray(u, dtype=float),
    freezing_split=lambda u: -np.asarray(u, dtype=float),
    linear_rate=None,
)

FISHER_KPP = EquationSpec(
    name="fisher",
    reaction=lambda u: np.asarray(u, dtype=float) * (1.0 - np.asarray(u, dtype=float)),
    reaction_derivative=lambda u: 1.0 - 2.0 * np.asarray(u, dtype=float),
    freezing_split=lambda u: 1.0 - np.asarray(u, dtype=float),
    linear_rate=None,
)

EQUATIONS = {eq.name: eq for eq in (HEAT, LINEAR_RD, NONLINEAR_RD, FISHER_KPP)}


def equation_by_name(name: str) -> EquationSpec:
    try:
        return EQUATIONS[name]
    except KeyError:
        raise ValueError(
            f"unknown equation {name!r}; expected one of {tuple(EQUATIONS)}"
        ) from None


@dataclass(frozen=True)
class IBVP:
    """Initial boundary value problem on [0, L] up to time T.

    `ic_boundary_compatible` records whether the initial profile meets the
    Dirichlet boundary values; a False value marks a deliberately
    discontinuous start (a known oscillation source for time-averaged
    schemes).  Neumann problems are always marked compatible.
    """

    equation: EquationSpec
    length: float
    bc: BoundaryCondition
    initial_condition: Callable[[float], float]
    final_time: float
    ic_boundary_compatible: bool = field(init=False)

    def __post_init__(self) -> None:
        if self.length <= 0:
            raise ValueError("domain length must be positive")
        if self.final_time <= 0:
            raise ValueError("final time must be positive")
        compatible = True
        if self.bc.is_dirichlet:
            u0 = self.initial_condition
            compatible = (
                abs(float(u0(0.0)) - self.bc.left_value) <= 1e-9
                and abs(float(u0(self.length)) - self.bc.right_value) <= 1e-9
            )
        object.__setattr__(self, "ic_boundary_compatible", compatible)


def named_initial_condition(name: str, equation: EquationSpec, bc: BoundaryCondition,
                            length: float) -> Callable[[float], float]:
    """Resolve an initial-condition name to a profile function.

    "default" picks per problem: sin(pi x / L) for Dirichlet, cos(pi x / L)
    for Neumann, and a linear front max(0, 1 - 4x/L) for Fisher-KPP.
    """
    L = length
    if name == "default":
        if equation.name == "fisher":
            name = "front"
        elif bc.is_dirichlet:
            name = "sine"
        else:
            name = "cosine"
    if name == "sine":
        return lambda x: math.sin(math.pi * x / L)
    if name == "cosine":
        return lambda x: math.cos(math.pi * x / L)
    if name == "front":
        return lambda x: max(0.0, 1.0 - 4.0 * x / L)
    if name == "step":
        return lambda x: 1.0 if x < 0.5 * L else 0.0
    if name == "zero":
        return lambda x: 0.0
    raise ValueError(
        f"unknown initial condition {name!r}; expected default|sine|cosine|front|step|zero"
    )


def default_ibvp(equation: EquationSpec | str, bc_kind: str = "dirichlet", *,
                 length: float = 1.0, final_time: float = 30.0,
                 ic: str = "default") -> IBVP:
    """Assemble an IBVP with the stock boundary values and initial profile."""
    eq = equation_by_name(equation) if isinstance(equation, str) else equation
    bc = BoundaryCondition(kind=bc_kind)
    u0 = named_initial_condition(ic, eq, bc, length)
    return IBVP(equation=eq, length=length, bc=bc, initial_condition=u0,
                final_time=final_time)


def sample_initial_condition(ibvp: IBVP, mesh: Mesh1D) -> np.ndarray:
    """Sample the initial profile on the scheme's unknowns.

    Dirichlet problems carry interior nodes only; Neumann problems carry all
    nodes.  Each node takes the mean of the left/right limits, so a jump that
    lands exactly on a node gets the usual weak midpoint value.
    """
    if ibvp.bc.is_dirichlet:
        xs = mesh.interior_positions
    else:
        xs = mesh.node_positions
    u0 = ibvp.initial_condition
    h = _LIMIT_EPS * max(1.0, ibvp.length)
    return np.array(
        [0.5 * (float(u0(x - h)) + float(u0(x + h))) for x in xs], dtype=float
    )
