"""Request/response schemas of the solver service."""

from __future__ import annotations

import numpy as np
from pydantic import BaseModel, Field


class SystemSpec(BaseModel):
    n1: int = Field(ge=1)
    n2: int = Field(ge=1)
    nr: int = Field(ge=1)
    v1: float = Field(default=1.0, gt=0)
    v2: float = Field(default=1.0, gt=0)
    sigma2_r: float = Field(default=1.0, gt=0)
    sigma2_1: float = Field(default=1.0, gt=0)
    sigma2_2: float = Field(default=1.0, gt=0)
    reciprocal: bool = False


class PowerSpec(BaseModel):
    p1max: float = Field(ge=0)
    p2max: float = Field(ge=0)
    prmax: float = Field(ge=0)


class ComplexMatrix(BaseModel):
    re: list[list[float]]
    im: list[list[float]]

    @classmethod
    def wrap(cls, M: np.ndarray) -> "ComplexMatrix":
        M = np.asarray(M, dtype=complex)
        return cls(re=M.real.tolist(), im=M.imag.tolist())

    def unwrap(self) -> np.ndarray:
        return np.asarray(self.re) + 1j * np.asarray(self.im)


class TraceRow(BaseModel):
    iter: int
    R_obj: float
    R_ma: float
    R_bc_sum: float
    R_tw: float
    P1: float
    P2: float
    Pr: float


class SolveRequest(BaseModel):
    system: SystemSpec
    power: PowerSpec
    seed: int = 0
    trial: int = 0
    eps: float = Field(default=1e-6, gt=0)


class SolveResponse(BaseModel):
    status: str
    subcase: str
    pair_i: int
    pair_j: int
    iterations: int
    rates: dict[str, float]
    powers: dict[str, float]
    levels: dict[str, float]
    D1: ComplexMatrix
    D2: ComplexMatrix
    B1: ComplexMatrix
    B2: ComplexMatrix
    trace: list[TraceRow]
    summary: dict[str, float | int | str]


class SweepRequest(BaseModel):
    system: SystemSpec
    power: PowerSpec
    seed: int = 0
    trials: int = Field(default=100, ge=0)
    eps: float = Field(default=1e-6, gt=0)
    jobs: int = Field(default=1, ge=1)
    pairing: str = "product"
    axes: dict[str, list[float]]


class SweepCellModel(BaseModel):
    coords: dict[str, float]
    counts: dict[str, int]
    failures: int
    mean_Rtw: float
    mean_power: float
    trials: int


class SweepResponse(BaseModel):
    cells: list[SweepCellModel]


class OracleRequest(BaseModel):
    system: SystemSpec
    power: PowerSpec
    seed: int = 0
    trials: int = Field(default=100, ge=0)
    eps: float = Field(default=1e-6, gt=0)
    steps: int = Field(default=200, ge=100)


class OracleRowModel(BaseModel):
    trial: int
    seed: int
    Rtw_alg: float
    Rtw_oracle: float
    dP: float
    passed: bool


class OracleResponse(BaseModel):
    rows: list[OracleRowModel]
    pass_rate: float


class HealthResponse(BaseModel):
    status: str
    version: str
