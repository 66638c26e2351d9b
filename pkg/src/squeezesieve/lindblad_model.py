"""Environment parameters and exact second-moment dynamics of the damped oscillator.

For Lindblad operators linear in q and p the covariance obeys

    sigma(t) = R(t) (sigma(0) - sigma(inf)) R(t)^T + sigma(inf),
    R(t) = exp(-lambda t) [[cos wt, sin wt], [-sin wt, cos wt]],

on the dimensionless correlation matrix (see :mod:`.gaussian_core`).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import HeisenbergViolation, NegativeTime, NonDissipative, PositivityViolation
from .gaussian_core import (
    HEISENBERG_ATOL,
    HEISENBERG_RTOL,
    CovarianceMatrix,
    PhysicalConstants,
    check_heisenberg,
    satisfies_heisenberg,
)


@dataclass(frozen=True)
class GeneratorCoefficients:
    """V_i = a_i p + b_i q for i = 1, 2."""

    a1: complex
    a2: complex
    b1: complex
    b2: complex

    def __post_init__(self):
        for name in ("a1", "a2", "b1", "b2"):
            value = complex(getattr(self, name))
            if not (math.isfinite(value.real) and math.isfinite(value.imag)):
                raise ValueError(f"{name} must be finite, got {value!r}")
            object.__setattr__(self, name, value)


@dataclass(frozen=True)
class LindbladParams:
    """Friction constant and phase-space diffusion matrix.

    ``allow_nonpositive`` skips the diffusion positivity check; Heisenberg
    violations during evolution then emit warnings instead of raising.
    """

    lam: float
    d_qq: float
    d_pp: float
    d_pq: float = 0.0
    pc: PhysicalConstants = field(default_factory=PhysicalConstants)
    allow_nonpositive: bool = False

    def __post_init__(self):
        for name in ("lam", "d_qq", "d_pp", "d_pq"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if not self.lam > 0:
            raise NonDissipative(f"friction constant must be > 0, got {self.lam!r}")
        if self.allow_nonpositive:
            return
        if self.d_qq < 0 or self.d_pp < 0:
            raise PositivityViolation(
                f"diffusion coefficients must be >= 0 (d_qq={self.d_qq!r}, d_pp={self.d_pp!r})"
            )
        bound = (self.lam * self.pc.hbar) ** 2 / 4.0
        if self.positivity_margin < -(HEISENBERG_RTOL * bound + HEISENBERG_ATOL):
            raise PositivityViolation(
                f"d_pp*d_qq - d_pq^2 = {self.d_pp * self.d_qq - self.d_pq**2!r} "
                f"< (lambda*hbar/2)^2 = {bound!r}"
            )

    @property
    def positivity_margin(self) -> float:
        return self.d_pp * self.d_qq - self.d_pq**2 - (self.lam * self.pc.hbar) ** 2 / 4.0


@dataclass(frozen=True)
class Propagator:
    r11: float
    r12: float
    r21: float
    r22: float

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.r11, self.r12], [self.r21, self.r22]])

    @property
    def det(self) -> float:
        return self.r11 * self.r22 - self.r12 * self.r21


def coefficients_to_parameters(
    c: GeneratorCoefficients, pc: PhysicalConstants | None = None
) -> LindbladParams:
    pc = pc or PhysicalConstants()
    half_hbar = 0.5 * pc.hbar
    overlap = c.a1.conjugate() * c.b1 + c.a2.conjugate() * c.b2
    lam = -overlap.imag
    if not lam > 0:
        raise NonDissipative(f"coefficients give friction constant {lam!r} <= 0")
    return LindbladParams(
        lam=lam,
        d_qq=half_hbar * (abs(c.a1) ** 2 + abs(c.a2) ** 2),
        d_pp=half_hbar * (abs(c.b1) ** 2 + abs(c.b2) ** 2),
        d_pq=-half_hbar * overlap.real,
        pc=pc,
    )


def stationary_scaled(lp: LindbladParams) -> np.ndarray:
    m, w, lam = lp.pc.m, lp.pc.omega, lp.lam
    mw = m * w
    denom = 2.0 * lam * (lam * lam + w * w)
    s_qq = (mw * mw * (2 * lam * lam + w * w) * lp.d_qq + w * w * lp.d_pp
            + 2 * m * w * w * lam * lp.d_pq) / (denom * mw * mw)
    s_pp = (mw * mw * w * w * lp.d_qq + (2 * lam * lam + w * w) * lp.d_pp
            - 2 * m * w * w * lam * lp.d_pq) / denom
    s_pq = (-lam * mw * mw * lp.d_qq + lam * lp.d_pp + 2 * m * lam * lam * lp.d_pq) / (denom * m)
    return np.array([[mw * s_qq, s_pq], [s_pq, s_pp / mw]])


def stationary_covariance(lp: LindbladParams) -> CovarianceMatrix:
    """Long-time covariance fixed point."""
    return CovarianceMatrix.from_scaled(stationary_scaled(lp), lp.pc)


def _rotation(times: np.ndarray, lp: LindbladParams) -> np.ndarray:
    """Stack of R(t) matrices with shape (n, 2, 2)."""
    phase = lp.pc.omega * times
    decay = np.exp(-lp.lam * times)
    c, s = decay * np.cos(phase), decay * np.sin(phase)
    return np.stack([np.stack([c, s], axis=-1), np.stack([-s, c], axis=-1)], axis=-2)


def propagator(t: float, lp: LindbladParams) -> Propagator:
    if not t >= 0:
        raise NegativeTime(f"time must be >= 0, got {t!r}")
    r = _rotation(np.array([float(t)]), lp)[0]
    return Propagator(float(r[0, 0]), float(r[0, 1]), float(r[1, 0]), float(r[1, 1]))


def _check_evolved(det: float, lp: LindbladParams, t: float) -> None:
    if satisfies_heisenberg(det, lp.pc.hbar):
        return
    msg = f"evolved state violates Heisenberg bound at t={t!r} (det={det!r})"
    if lp.allow_nonpositive:
        warnings.warn(msg, RuntimeWarning, stacklevel=3)
    else:
        raise HeisenbergViolation(msg)


def _check_initial(sigma0: CovarianceMatrix, lp: LindbladParams) -> None:
    if lp.allow_nonpositive:
        if not satisfies_heisenberg(sigma0.det, lp.pc.hbar):
            warnings.warn("initial state violates Heisenberg bound", RuntimeWarning, stacklevel=3)
    else:
        check_heisenberg(sigma0, lp.pc)


def evolve_many(sigma0: CovarianceMatrix, times, lp: LindbladParams) -> np.ndarray:
    """Scaled covariance matrices at each time, shape (n, 2, 2).

    Entries at ``t == 0`` are the initial matrix itself, bit for bit.
    """
    times = np.asarray(times, dtype=float).reshape(-1)
    if np.any(~(times >= 0)):
        raise NegativeTime("all times must be >= 0")
    _check_initial(sigma0, lp)
    m0 = sigma0.scaled(lp.pc)
    m_inf = stationary_scaled(lp)
    r = _rotation(times, lp)
    out = r @ (m0 - m_inf) @ np.swapaxes(r, -1, -2) + m_inf
    out[times == 0] = m0
    dets = out[:, 0, 0] * out[:, 1, 1] - out[:, 0, 1] * out[:, 1, 0]
    for t, det in zip(times, dets):
        _check_evolved(float(det), lp, float(t))
    return out


def evolve(sigma0: CovarianceMatrix, t: float, lp: LindbladParams) -> CovarianceMatrix:
    if not t >= 0:
        raise NegativeTime(f"time must be >= 0, got {t!r}")
    if t == 0:
        _check_initial(sigma0, lp)
        return sigma0
    return CovarianceMatrix.from_scaled(evolve_many(sigma0, [t], lp)[0], lp.pc)


def kernels_scaled(t: float, lp: LindbladParams) -> tuple[float, float, float]:
    """(T_pp, T_qq, T_pq) built from the stationary covariance."""
    m_inf = stationary_scaled(lp)
    x_inf, y_inf, z_inf = m_inf[0, 0], m_inf[1, 1], m_inf[0, 1]
    phase = lp.pc.omega * t
    c, s = math.cos(phase), math.sin(phase)
    t_pp = y_inf * c * c + x_inf * s * s + 2.0 * z_inf * s * c
    t_qq = y_inf * s * s + x_inf * c * c - 2.0 * z_inf * s * c
    t_pq = (x_inf - y_inf) * s * c + z_inf * (c * c - s * s)
    return float(t_pp), float(t_qq), float(t_pq)


def det_sigma_expanded(sigma0: CovarianceMatrix, t: float, lp: LindbladParams) -> float:
    """det sigma(t) from the three-term expansion (decay^2, decay, stationary)."""
    if not t >= 0:
        raise NegativeTime(f"time must be >= 0, got {t!r}")
    _check_initial(sigma0, lp)
    m_inf = stationary_scaled(lp)
    diff = sigma0.scaled(lp.pc) - m_inf
    t_pp, t_qq, t_pq = kernels_scaled(t, lp)
    det_diff = diff[0, 0] * diff[1, 1] - diff[0, 1] ** 2
    det_inf = m_inf[0, 0] * m_inf[1, 1] - m_inf[0, 1] ** 2
    cross = diff[0, 0] * t_pp + diff[1, 1] * t_qq - 2.0 * diff[0, 1] * t_pq
    decay = math.exp(-2.0 * lp.lam * t)
    return float(decay * decay * det_diff + decay * cross + det_inf)
