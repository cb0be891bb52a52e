"""Pydantic request/response models for the optimization service."""

from __future__ import annotations

from typing import Optional

from pydantic import BaseModel, Field


class SessionCreateRequest(BaseModel):
    d: int = Field(ge=1)
    lam: Optional[int] = None
    m0: float | list[float] = 0.0
    sigma0: float = 1.0
    d0: Optional[list[float]] = None
    v0: Optional[list[float]] = None
    target_fval: Optional[float] = None  # None means no target
    max_evals: Optional[int] = None
    seed: int = 0


class StateSnapshot(BaseModel):
    t: int
    phase: str
    evals_used: int
    sigma: float
    p_sigma_norm: float
    v_norm: float
    d_min: float
    d_max: float
    best_fval: Optional[float]  # None until the first tell
    d_clamp_count: int
    healthy: bool


class SessionResponse(BaseModel):
    session_id: str
    state: StateSnapshot


class AskResponse(BaseModel):
    session_id: str
    candidates: list[list[float]]


class TellRequest(BaseModel):
    fvals: list[float]


class TrialRequest(BaseModel):
    function: str
    d: int = Field(ge=1)
    lam: Optional[int] = None
    seed: int = 0
    trial: int = 0
    target_fval: float = 1e-10
    max_evals: Optional[int] = None  # None -> 5d * 10^4


class TrialResponse(BaseModel):
    function: str
    d: int
    lam: int
    trial: int
    seed: int
    evals_used: int
    best_fval: float
    success: bool
    wall_time: float


class TimingRequest(BaseModel):
    dims: list[int]
    lam: int = 20
    iterations: int = Field(default=1000, ge=1)
    repeats: int = Field(default=30, ge=1)
    seed: int = 0


class TimingRowModel(BaseModel):
    d: int
    lam: int
    iterations: int
    repeats: int
    mean_seconds: float
    std_seconds: float


class TimingResponse(BaseModel):
    rows: list[TimingRowModel]


class BenchmarksResponse(BaseModel):
    functions: list[str]
