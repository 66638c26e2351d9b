"""Predictability sieve: which initial Gaussian shape grows least in area.

For t >> 1/lambda the only initial-state dependence of det sigma(t) left is
the exp(-2 lambda t) cross term, so the sieve minimizes

    (hbar A / 2) * {cos^2 th [a^2 T_pp + a^-2 T_qq] + sin^2 th [a^-2 T_pp + a^2 T_qq]
                    - 2 sin th cos th (a^-2 - a^2) T_pq}

over the rotation ``th`` and squeezing ``a`` of the initial state. Two
independent routes are provided: the closed form and a grid + coordinate
descent minimizer that knows nothing about the closed form.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import NegativeTime, PositivityViolation
from .gaussian_core import ShapeDecomposition, wrap_angle
from .lindblad_model import LindbladParams, kernels_scaled

DEGENERACY_RTOL = 1e-12
TIME_SPREAD_TOL = 1e-10


class Method(str, enum.Enum):
    CLOSED_FORM = "closed_form"
    NUMERIC = "numeric"


@dataclass(frozen=True)
class SievePoint:
    """Sieve kernels at evaluation time ``t`` (all in units of action)."""

    t_pp: float
    t_qq: float
    t_pq: float
    t: float = 0.0
    hbar: float = 1.0

    @property
    def trace(self) -> float:
        return self.t_pp + self.t_qq

    @property
    def anisotropy(self) -> float:
        """sqrt((T_pp - T_qq)^2 + 4 T_pq^2); rotation invariant like the trace."""
        return math.hypot(self.t_pp - self.t_qq, 2.0 * self.t_pq)

    @property
    def det(self) -> float:
        return self.t_pp * self.t_qq - self.t_pq**2

    @property
    def is_isotropic(self) -> bool:
        scale = DEGENERACY_RTOL * self.trace
        return abs(self.t_pp - self.t_qq) <= scale and abs(2.0 * self.t_pq) <= scale


@dataclass(frozen=True)
class SieveResult:
    """Optimal initial shape.

    ``theta_star``/``aleph_star`` use the ``aleph <= 1`` branch;
    ``theta_canonical``/``aleph_canonical`` are the same state in the
    ``aleph >= 1`` gauge.
    """

    theta_star: float
    aleph_star: float
    objective_value: float
    method: Method
    degenerate: bool = False
    cross_residual: float | None = None
    theta_canonical: float = field(init=False)
    aleph_canonical: float = field(init=False)

    def __post_init__(self):
        if not self.aleph_star > 0:
            raise ValueError(f"aleph_star must be > 0, got {self.aleph_star!r}")
        if self.aleph_star > 1.0:
            raise ValueError("aleph_star must be stored on the aleph <= 1 branch")
        object.__setattr__(self, "aleph_canonical", 1.0 / self.aleph_star)
        theta_c = 0.0 if self.aleph_star == 1.0 else wrap_angle(self.theta_star + 0.5 * math.pi)
        object.__setattr__(self, "theta_canonical", theta_c)

    def shape(self, area: float = 1.0) -> ShapeDecomposition:
        """Canonical-gauge shape of the selected state with the given area."""
        return ShapeDecomposition(area=area, theta=self.theta_canonical, aleph=self.aleph_canonical)


@dataclass(frozen=True)
class GridSpec:
    n_theta: int = 128
    n_aleph: int = 129
    aleph_min: float = 1e-3
    aleph_max: float = 1e3
    refine: bool = True
    max_passes: int = 60
    xtol: float = 1e-13

    def __post_init__(self):
        if self.n_theta < 64 or self.n_aleph < 64:
            raise ValueError("grid needs at least 64 theta and 64 aleph samples")
        if not 0 < self.aleph_min < 1 < self.aleph_max:
            raise ValueError("aleph range must bracket 1")


def sieve_kernels(t: float, lp: LindbladParams) -> SievePoint:
    if not t >= 0:
        raise NegativeTime(f"time must be >= 0, got {t!r}")
    t_pp, t_qq, t_pq = kernels_scaled(t, lp)
    return SievePoint(t_pp=t_pp, t_qq=t_qq, t_pq=t_pq, t=float(t), hbar=lp.pc.hbar)


def objective_surface(theta, aleph, area, point: SievePoint):
    """Sieve objective, broadcasting over array-valued ``theta``/``aleph``."""
    c, s = np.cos(theta), np.sin(theta)
    a2 = aleph * aleph
    ai2 = 1.0 / a2
    bracket = (
        c * c * (a2 * point.t_pp + ai2 * point.t_qq)
        + s * s * (ai2 * point.t_pp + a2 * point.t_qq)
        - 2.0 * s * c * (ai2 - a2) * point.t_pq
    )
    return 0.5 * point.hbar * area * bracket


def _objective_scalar(theta: float, log_aleph: float, point: SievePoint) -> float:
    """Bracket of the objective at unit area, parametrized by log(aleph)."""
    c, s = math.cos(theta), math.sin(theta)
    a2 = math.exp(2.0 * log_aleph)
    ai2 = 1.0 / a2
    return (c * c * (a2 * point.t_pp + ai2 * point.t_qq)
            + s * s * (ai2 * point.t_pp + a2 * point.t_qq)
            - 2.0 * s * c * (ai2 - a2) * point.t_pq)


def sieve_objective(shape: ShapeDecomposition, point: SievePoint) -> float:
    return float(objective_surface(shape.theta, shape.aleph, shape.area, point))


def _lower_branch(theta: float, aleph: float) -> tuple[float, float]:
    if aleph > 1.0:
        return wrap_angle(theta + 0.5 * math.pi), 1.0 / aleph
    return wrap_angle(theta), aleph


def optimal_shape_from_kernels(point: SievePoint) -> SieveResult:
    """Closed-form optimum: tan 2th* = 2T_pq/(T_pp - T_qq), a*^4 = (S - X)/(S + X)."""
    if point.is_isotropic:
        return SieveResult(
            theta_star=0.0,
            aleph_star=1.0,
            objective_value=float(objective_surface(0.0, 1.0, 1.0, point)),
            method=Method.CLOSED_FORM,
            degenerate=True,
        )
    total, spread = point.trace, point.anisotropy
    # S - X written as (S^2 - X^2)/(S + X) to dodge cancellation
    aleph_lo = (4.0 * point.det / (total + spread) ** 2) ** 0.25
    theta_a = wrap_angle(0.5 * math.atan2(2.0 * point.t_pq, point.t_pp - point.t_qq))
    theta_b = wrap_angle(theta_a + 0.5 * math.pi)
    candidates = [
        (theta, aleph)
        for aleph in (aleph_lo, 1.0 / aleph_lo)
        for theta in (theta_a, theta_b)
    ]
    values = [float(objective_surface(th, al, 1.0, point)) for th, al in candidates]
    best = int(np.argmin(values))
    theta, aleph = _lower_branch(*candidates[best])
    return SieveResult(
        theta_star=theta,
        aleph_star=min(aleph, 1.0),
        objective_value=values[best],
        method=Method.CLOSED_FORM,
    )


def optimal_squeezing_closed_form(lp: LindbladParams) -> float:
    """Selected squeezing (aleph <= 1 branch) straight from friction and diffusion."""
    mw = lp.pc.m_omega
    a, b = mw * lp.d_qq, lp.d_pp / mw
    spread = math.hypot(a - b, 2.0 * lp.d_pq)
    ratio = lp.pc.omega / lp.lam
    gain = math.sqrt(1.0 + ratio * ratio) * (a + b)
    # G^2 - X^2 expanded; nonnegative whenever the diffusion matrix is positive
    numerator = 4.0 * (lp.d_qq * lp.d_pp - lp.d_pq**2) + ratio * ratio * (a + b) ** 2
    if not (numerator > 0 and gain + spread > 0):
        raise PositivityViolation("diffusion matrix admits no finite optimal squeezing")
    return (numerator / (gain + spread) ** 2) ** 0.25


def _line_min(fun, lo: float, hi: float, xtol: float) -> float:
    res = minimize_scalar(fun, bounds=(lo, hi), method="bounded", options={"xatol": xtol})
    return float(res.x)


def optimal_shape_numeric(point: SievePoint, grid: GridSpec | None = None) -> SieveResult:
    """Grid scan over (theta, log aleph) followed by coordinate descent."""
    grid = grid or GridSpec()
    thetas = np.pi * np.arange(grid.n_theta) / grid.n_theta
    logs = np.linspace(math.log(grid.aleph_min), math.log(grid.aleph_max), grid.n_aleph)
    surface = objective_surface(thetas[:, None], np.exp(logs)[None, :], 1.0, point)
    i, j = np.unravel_index(int(np.argmin(surface)), surface.shape)
    theta, u = float(thetas[i]), float(logs[j])

    if grid.refine:
        du = logs[1] - logs[0]
        best = _objective_scalar(theta, u, point)
        for _ in range(grid.max_passes):
            u_new = _line_min(lambda x: _objective_scalar(theta, x, point),
                              u - 2.0 * du, u + 2.0 * du, grid.xtol)
            theta_new = _line_min(lambda x: _objective_scalar(x, u_new, point),
                                  theta - 0.5 * math.pi, theta + 0.5 * math.pi, grid.xtol)
            value = _objective_scalar(theta_new, u_new, point)
            if value > best:
                break
            moved = max(abs(u_new - u), abs(theta_new - theta))
            theta, u, best = theta_new, u_new, value
            if moved < 1e-10:
                break

    aleph = math.exp(u)
    value = float(objective_surface(theta, aleph, 1.0, point))
    ring = objective_surface(thetas, aleph, 1.0, point)
    degenerate = float(np.ptp(ring)) <= DEGENERACY_RTOL * abs(value)
    theta, aleph = _lower_branch(theta, aleph)
    if degenerate:
        theta = 0.0
    return SieveResult(
        theta_star=theta,
        aleph_star=aleph,
        objective_value=value,
        method=Method.NUMERIC,
        degenerate=degenerate,
    )


def cross_check(point: SievePoint, grid: GridSpec | None = None) -> SieveResult:
    """Numeric optimum annotated with its distance to the closed form."""
    numeric = optimal_shape_numeric(point, grid)
    closed = optimal_shape_from_kernels(point)
    return SieveResult(
        theta_star=numeric.theta_star,
        aleph_star=numeric.aleph_star,
        objective_value=numeric.objective_value,
        method=Method.NUMERIC,
        degenerate=numeric.degenerate,
        cross_residual=abs(closed.aleph_star - numeric.aleph_star),
    )


@dataclass(frozen=True)
class TimeIndependenceReport:
    times: tuple[float, ...]
    aleph_stars: tuple[float, ...]
    theta_stars: tuple[float, ...]
    spread: float
    tolerance: float = TIME_SPREAD_TOL

    @property
    def ok(self) -> bool:
        return self.spread <= self.tolerance


def sieve_time_independence_check(
    lp: LindbladParams, times: Sequence[float]
) -> TimeIndependenceReport:
    """Closed-form aleph* at each evaluation time; only theta* should move."""
    if len(times) == 0:
        raise ValueError("times must be nonempty")
    results = [optimal_shape_from_kernels(sieve_kernels(float(t), lp)) for t in times]
    alephs = tuple(r.aleph_star for r in results)
    return TimeIndependenceReport(
        times=tuple(float(t) for t in times),
        aleph_stars=alephs,
        theta_stars=tuple(r.theta_star for r in results),
        spread=max(alephs) - min(alephs),
    )
