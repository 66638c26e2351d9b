"""Scenario configuration documents (JSON) and their conversion to physics objects."""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Literal, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from .gaussian_core import CovarianceMatrix, PhysicalConstants, ShapeDecomposition, compose
from .lindblad_model import GeneratorCoefficients, LindbladParams, coefficients_to_parameters
from .sieve import GridSpec

TimeUnit = Literal["time", "periods"]


class _Model(BaseModel):
    model_config = ConfigDict(extra="forbid", populate_by_name=True, allow_inf_nan=False)


class ConstantsModel(_Model):
    m: float = Field(1.0, gt=0)
    omega: float = Field(1.0, gt=0)
    hbar: float = Field(1.0, gt=0)


class ParamsModel(_Model):
    lam: float = Field(alias="lambda")
    d_qq: float
    d_pp: float
    d_pq: float = 0.0


class CoefficientsModel(_Model):
    """Each coefficient as a ``[re, im]`` pair."""

    a1: tuple[float, float]
    a2: tuple[float, float] = (0.0, 0.0)
    b1: tuple[float, float]
    b2: tuple[float, float] = (0.0, 0.0)

    def to_coefficients(self) -> GeneratorCoefficients:
        return GeneratorCoefficients(*(complex(*getattr(self, k)) for k in ("a1", "a2", "b1", "b2")))


class ShapeModel(_Model):
    area: float = 1.0
    theta: float = 0.0
    aleph: float = 1.0


class CovarianceModel(_Model):
    sigma_qq: float
    sigma_pp: float
    sigma_pq: float = 0.0


class InitialStateModel(_Model):
    shape: Optional[ShapeModel] = None
    covariance: Optional[CovarianceModel] = None

    @model_validator(mode="after")
    def _exactly_one(self):
        if (self.shape is None) == (self.covariance is None):
            raise ValueError("give exactly one of 'shape' or 'covariance'")
        return self


class TimeGridModel(_Model):
    t_max: Optional[float] = Field(None, gt=0)
    steps: Optional[int] = Field(None, ge=1)
    times: Optional[list[float]] = None
    unit: TimeUnit = "time"

    @model_validator(mode="after")
    def _grid_or_list(self):
        if self.times is not None:
            if self.t_max is not None or self.steps is not None:
                raise ValueError("give either 'times' or 't_max'/'steps', not both")
            if not self.times or any(not (t >= 0 and math.isfinite(t)) for t in self.times):
                raise ValueError("'times' must be a nonempty list of finite values >= 0")
        elif self.t_max is None or self.steps is None:
            raise ValueError("'t_max' and 'steps' are both required without 'times'")
        return self


class SieveGridModel(_Model):
    theta: int = Field(128, ge=64)
    aleph: int = Field(129, ge=64)


class SieveModel(_Model):
    eval_time: Union[Literal["auto"], float] = "auto"
    unit: TimeUnit = "time"
    grid: SieveGridModel = Field(default_factory=SieveGridModel)

    @model_validator(mode="after")
    def _nonnegative(self):
        if self.eval_time != "auto" and not self.eval_time >= 0:
            raise ValueError("eval_time must be 'auto' or >= 0")
        return self


class RangeModel(_Model):
    start: Optional[float] = None
    stop: Optional[float] = None
    num: Optional[int] = Field(None, ge=1)
    spacing: Literal["linear", "log"] = "linear"
    values: Optional[list[float]] = None

    @model_validator(mode="after")
    def _range_or_values(self):
        if self.values is not None:
            if self.start is not None or self.stop is not None or self.num is not None:
                raise ValueError("give either 'values' or 'start'/'stop'/'num', not both")
            if not self.values:
                raise ValueError("'values' must be nonempty")
            return self
        if self.start is None or self.stop is None or self.num is None:
            raise ValueError("'start', 'stop' and 'num' are required without 'values'")
        if self.spacing == "log" and not (self.start > 0 and self.stop > 0):
            raise ValueError("log spacing needs positive 'start' and 'stop'")
        return self

    def points(self) -> np.ndarray:
        if self.values is not None:
            return np.asarray(self.values, dtype=float)
        if self.spacing == "log":
            return np.geomspace(self.start, self.stop, self.num)
        return np.linspace(self.start, self.stop, self.num)


SCAN_KEYS = ("lambda", "d_qq", "d_pp", "d_pq", "omega")


class ScanModel(_Model):
    lam: Optional[RangeModel] = Field(None, alias="lambda")
    d_qq: Optional[RangeModel] = None
    d_pp: Optional[RangeModel] = None
    d_pq: Optional[RangeModel] = None
    omega: Optional[RangeModel] = None

    def axes(self) -> dict[str, np.ndarray]:
        out = {}
        for key, attr in zip(SCAN_KEYS, ("lam", "d_qq", "d_pp", "d_pq", "omega")):
            rng = getattr(self, attr)
            if rng is not None:
                out[key] = rng.points()
        return out


class OutputModel(_Model):
    path: Optional[str] = None
    format: Literal["csv", "json"] = "csv"


class ScenarioConfig(_Model):
    constants: ConstantsModel = Field(default_factory=ConstantsModel)
    params: Optional[ParamsModel] = None
    coefficients: Optional[CoefficientsModel] = None
    allow_nonpositive: bool = False
    initial_state: InitialStateModel = Field(
        default_factory=lambda: InitialStateModel(shape=ShapeModel())
    )
    time_grid: Optional[TimeGridModel] = None
    sieve: SieveModel = Field(default_factory=SieveModel)
    scan: Optional[ScanModel] = None
    output: OutputModel = Field(default_factory=OutputModel)

    @model_validator(mode="after")
    def _one_environment(self):
        if self.params is not None and self.coefficients is not None:
            raise ValueError("give exactly one of 'params' or 'coefficients'")
        return self

    # conversion to physics objects; these raise PhysicsError subclasses

    def physical_constants(self) -> PhysicalConstants:
        c = self.constants
        return PhysicalConstants(m=c.m, omega=c.omega, hbar=c.hbar)

    def lindblad_params(self) -> LindbladParams:
        pc = self.physical_constants()
        if self.coefficients is not None:
            lp = coefficients_to_parameters(self.coefficients.to_coefficients(), pc)
            if self.allow_nonpositive:
                return LindbladParams(lp.lam, lp.d_qq, lp.d_pp, lp.d_pq, pc, True)
            return lp
        p = self.params
        return LindbladParams(
            lam=p.lam, d_qq=p.d_qq, d_pp=p.d_pp, d_pq=p.d_pq, pc=pc,
            allow_nonpositive=self.allow_nonpositive,
        )

    def initial_covariance(self) -> CovarianceMatrix:
        pc = self.physical_constants()
        state = self.initial_state
        if state.covariance is not None:
            c = state.covariance
            return CovarianceMatrix(c.sigma_qq, c.sigma_pp, c.sigma_pq)
        s = state.shape
        return compose(ShapeDecomposition(area=s.area, theta=s.theta, aleph=s.aleph), pc)

    def _to_time(self, value: float, unit: TimeUnit) -> float:
        if unit == "periods":
            return value * 2.0 * math.pi / self.constants.omega
        return value

    def times(self) -> np.ndarray:
        grid = self.time_grid
        if grid.times is not None:
            return np.array([self._to_time(t, grid.unit) for t in grid.times])
        t_max = self._to_time(grid.t_max, grid.unit)
        return t_max * np.arange(grid.steps + 1) / grid.steps

    def eval_time(self, lam: float) -> float:
        if self.sieve.eval_time == "auto":
            return 10.0 / lam
        return self._to_time(float(self.sieve.eval_time), self.sieve.unit)

    def grid_spec(self) -> GridSpec:
        return GridSpec(n_theta=self.sieve.grid.theta, n_aleph=self.sieve.grid.aleph)

    def dump(self) -> dict:
        return self.model_dump(mode="json", by_alias=True, exclude_none=True)


def load_config(path: str | Path) -> ScenarioConfig:
    """Parse a JSON scenario file. Raises ``ValueError`` or pydantic's ``ValidationError``."""
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise ValueError("config document must be a JSON object")
    return ScenarioConfig.model_validate(data)
