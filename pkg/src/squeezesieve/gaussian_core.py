"""Quasi-free (Gaussian) single-mode states described by second moments.

All matrix work happens on the dimensionless correlation matrix

    [[m*omega*sigma_qq, sigma_pq            ],
     [sigma_pq,         sigma_pp/(m*omega)  ]]

whose entries all carry units of action. Physical units only appear when a
:class:`CovarianceMatrix` is built or read.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import HeisenbergViolation, InvalidArea, InvalidShape, NotPositive

HEISENBERG_RTOL = 1e-9
HEISENBERG_ATOL = 1e-15
AREA_TOL = 1e-12

# below this relative anisotropy the matrix is treated as a multiple of the identity
_ISOTROPY_TOL = 1e-15


@dataclass(frozen=True)
class PhysicalConstants:
    m: float = 1.0
    omega: float = 1.0
    hbar: float = 1.0

    def __post_init__(self):
        for name in ("m", "omega", "hbar"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise NotPositive(f"{name} must be finite and > 0, got {value!r}")

    @property
    def m_omega(self) -> float:
        return self.m * self.omega


@dataclass(frozen=True)
class CovarianceMatrix:
    """Central second moments of position and momentum.

    ``sigma_pq`` is the symmetrized covariance <(pq+qp)/2> - <p><q>.
    Construction checks only the diagonal signs; the Heisenberg bound needs
    ``hbar`` and is checked by :func:`check_heisenberg`.
    """

    sigma_qq: float
    sigma_pp: float
    sigma_pq: float = 0.0

    def __post_init__(self):
        if not (self.sigma_qq > 0):
            raise NotPositive(f"sigma_qq must be > 0, got {self.sigma_qq!r}")
        if not (self.sigma_pp > 0):
            raise NotPositive(f"sigma_pp must be > 0, got {self.sigma_pp!r}")
        if not math.isfinite(self.sigma_pq):
            raise NotPositive(f"sigma_pq must be finite, got {self.sigma_pq!r}")

    @property
    def det(self) -> float:
        """sigma_qq*sigma_pp - sigma_pq**2, identical for the scaled matrix."""
        return self.sigma_qq * self.sigma_pp - self.sigma_pq**2

    def scaled(self, pc: PhysicalConstants) -> np.ndarray:
        mw = pc.m_omega
        return np.array(
            [[mw * self.sigma_qq, self.sigma_pq], [self.sigma_pq, self.sigma_pp / mw]]
        )

    @classmethod
    def from_scaled(cls, matrix: np.ndarray, pc: PhysicalConstants) -> "CovarianceMatrix":
        mw = pc.m_omega
        return cls(
            sigma_qq=float(matrix[0, 0]) / mw,
            sigma_pp=float(matrix[1, 1]) * mw,
            sigma_pq=0.5 * (float(matrix[0, 1]) + float(matrix[1, 0])),
        )

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.sigma_qq, self.sigma_pp, self.sigma_pq)


@dataclass(frozen=True)
class ShapeDecomposition:
    """Phase-space area, rotation angle and squeezing of a Gaussian state.

    Any ``aleph > 0`` is accepted so that gauge-equivalent forms can be
    represented; :func:`decompose` and :func:`canonicalize` return the
    canonical gauge ``aleph >= 1``, ``0 <= theta < pi``.
    """

    area: float
    theta: float
    aleph: float

    def __post_init__(self):
        if not (math.isfinite(self.area) and self.area >= 1.0 - AREA_TOL):
            raise InvalidShape(f"area must be >= 1, got {self.area!r}")
        if not (math.isfinite(self.aleph) and self.aleph > 0):
            raise InvalidShape(f"aleph must be > 0, got {self.aleph!r}")
        if not math.isfinite(self.theta):
            raise InvalidShape(f"theta must be finite, got {self.theta!r}")

    @property
    def is_canonical(self) -> bool:
        if self.aleph < 1.0 or not (0.0 <= self.theta < math.pi):
            return False
        return self.aleph != 1.0 or self.theta == 0.0


def heisenberg_margin(sigma: CovarianceMatrix, pc: PhysicalConstants) -> float:
    return sigma.det - pc.hbar**2 / 4.0


def satisfies_heisenberg(det: float, hbar: float) -> bool:
    bound = hbar**2 / 4.0
    return det >= bound - (HEISENBERG_RTOL * bound + HEISENBERG_ATOL)


def check_heisenberg(sigma: CovarianceMatrix, pc: PhysicalConstants) -> None:
    if not satisfies_heisenberg(sigma.det, pc.hbar):
        raise HeisenbergViolation(
            f"det sigma = {sigma.det!r} < hbar^2/4 = {pc.hbar**2 / 4.0!r}"
        )


def wrap_angle(theta: float) -> float:
    """Reduce to [0, pi)."""
    wrapped = math.fmod(theta, math.pi)
    if wrapped < 0:
        wrapped += math.pi
    if wrapped >= math.pi:
        wrapped = 0.0
    return wrapped


def shape_matrix(theta: float, aleph: float) -> np.ndarray:
    """O(theta)^T diag(aleph^2, aleph^-2) O(theta), a unit-determinant matrix."""
    c, s = math.cos(theta), math.sin(theta)
    a2, ai2 = aleph * aleph, 1.0 / (aleph * aleph)
    off = s * c * (ai2 - a2)
    return np.array([[c * c * a2 + s * s * ai2, off], [off, s * s * a2 + c * c * ai2]])


def decompose_scaled(matrix: np.ndarray, hbar: float) -> ShapeDecomposition:
    x, y = float(matrix[0, 0]), float(matrix[1, 1])
    z = 0.5 * (float(matrix[0, 1]) + float(matrix[1, 0]))
    det = x * y - z * z
    if det <= 0 or not satisfies_heisenberg(det, hbar):
        raise HeisenbergViolation(f"det = {det!r} below hbar^2/4 = {hbar**2 / 4.0!r}")
    # rounding inside the Heisenberg slack must not produce A < 1
    area = max(2.0 * math.sqrt(det) / hbar, 1.0)
    half_area = 0.5 * hbar * area
    trace = x + y
    spread = math.hypot(x - y, 2.0 * z)
    if spread <= _ISOTROPY_TOL * trace:
        return ShapeDecomposition(area=area, theta=0.0, aleph=1.0)
    aleph = math.sqrt((trace + spread) / (2.0 * half_area))
    theta = wrap_angle(0.5 * math.atan2(-2.0 * z, x - y))
    return ShapeDecomposition(area=area, theta=theta, aleph=aleph)


def decompose(sigma: CovarianceMatrix, pc: PhysicalConstants) -> ShapeDecomposition:
    """Split ``sigma`` into area, rotation and squeezing (canonical gauge)."""
    check_heisenberg(sigma, pc)
    return decompose_scaled(sigma.scaled(pc), pc.hbar)


def compose_scaled(shape: ShapeDecomposition, hbar: float) -> np.ndarray:
    return 0.5 * hbar * shape.area * shape_matrix(shape.theta, shape.aleph)


def compose(shape: ShapeDecomposition, pc: PhysicalConstants) -> CovarianceMatrix:
    return CovarianceMatrix.from_scaled(compose_scaled(shape, pc.hbar), pc)


def canonicalize(shape: ShapeDecomposition) -> ShapeDecomposition:
    theta, aleph = shape.theta, shape.aleph
    if aleph < 1.0:
        theta, aleph = theta + 0.5 * math.pi, 1.0 / aleph
    theta = 0.0 if aleph == 1.0 else wrap_angle(theta)
    return ShapeDecomposition(area=shape.area, theta=theta, aleph=aleph)


def entropy(area):
    """Von Neumann entropy of a single-mode Gaussian state with phase-space area ``area``.

    Works elementwise on arrays. ``area == 1`` (pure state) gives exactly 0.
    """
    a = np.asarray(area, dtype=float)
    if np.any(~np.isfinite(a)) or np.any(a < 1.0 - AREA_TOL):
        raise InvalidArea(f"area must be >= 1, got {area!r}")
    a = np.maximum(a, 1.0)
    plus = 0.5 * (a + 1.0)
    minus = 0.5 * (a - 1.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        minus_term = np.where(minus > 0, minus * np.log(np.where(minus > 0, minus, 1.0)), 0.0)
    s = plus * np.log(plus) - minus_term
    if np.ndim(s) == 0:
        return float(s)
    return s
