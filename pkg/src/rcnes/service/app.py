"""HTTP service exposing optimizer sessions and benchmark runs.

Sessions hold one optimizer each for remote ask/tell loops, where candidate
evaluation happens on the client side.  The benchmark endpoints run whole
trials server-side against the built-in objectives.
"""

from __future__ import annotations

import math
import threading
import uuid

from fastapi import FastAPI, HTTPException

from ..benchmarks import BENCHMARK_NAMES
from ..errors import AskTellOrderError, NumericalError
from ..experiments import run_trial, timing_bench
from ..strategy import Optimizer, StrategyConfig, default_lambda
from .schemas import (
    AskResponse,
    BenchmarksResponse,
    SessionCreateRequest,
    SessionResponse,
    StateSnapshot,
    TellRequest,
    TimingRequest,
    TimingResponse,
    TimingRowModel,
    TrialRequest,
    TrialResponse,
)

app = FastAPI(title="rcnes", version="0.1.0")

class _Session:
    """One optimizer plus a lock serializing access to it.

    Endpoints run on a thread pool, so two requests for the same session may
    arrive concurrently; the optimizer itself is single-threaded by design.
    """

    def __init__(self, opt: Optimizer):
        self.opt = opt
        self.lock = threading.Lock()


_sessions: dict[str, _Session] = {}
_sessions_lock = threading.Lock()


def _snapshot(opt: Optimizer) -> StateSnapshot:
    snap = opt.snapshot()
    best = snap["best_fval"]
    snap["best_fval"] = None if math.isinf(best) else best
    return StateSnapshot(**snap)


def _get_session(session_id: str) -> _Session:
    with _sessions_lock:
        session = _sessions.get(session_id)
    if session is None:
        raise HTTPException(status_code=404, detail=f"no session {session_id}")
    return session


@app.get("/health")
def health() -> dict:
    return {"status": "ok"}


@app.get("/benchmarks", response_model=BenchmarksResponse)
def benchmarks() -> BenchmarksResponse:
    return BenchmarksResponse(functions=list(BENCHMARK_NAMES))


@app.post("/sessions", response_model=SessionResponse)
def create_session(req: SessionCreateRequest) -> SessionResponse:
    try:
        config = StrategyConfig(
            d=req.d,
            lam=req.lam,
            m0=req.m0,
            sigma0=req.sigma0,
            d0=req.d0,
            v0=req.v0,
            target_fval=-math.inf if req.target_fval is None else req.target_fval,
            max_evals=req.max_evals,
            seed=req.seed,
        )
        opt = Optimizer(config)
    except ValueError as exc:
        raise HTTPException(status_code=400, detail=str(exc))
    session_id = uuid.uuid4().hex
    with _sessions_lock:
        _sessions[session_id] = _Session(opt)
    return SessionResponse(session_id=session_id, state=_snapshot(opt))


@app.get("/sessions/{session_id}", response_model=SessionResponse)
def session_state(session_id: str) -> SessionResponse:
    session = _get_session(session_id)
    with session.lock:
        return SessionResponse(session_id=session_id, state=_snapshot(session.opt))


@app.post("/sessions/{session_id}/ask", response_model=AskResponse)
def session_ask(session_id: str) -> AskResponse:
    session = _get_session(session_id)
    try:
        with session.lock:
            xs = session.opt.ask()
    except AskTellOrderError as exc:
        raise HTTPException(status_code=409, detail=str(exc))
    except NumericalError as exc:
        raise HTTPException(status_code=409, detail=str(exc))
    return AskResponse(session_id=session_id, candidates=xs.tolist())


@app.post("/sessions/{session_id}/tell", response_model=SessionResponse)
def session_tell(session_id: str, req: TellRequest) -> SessionResponse:
    session = _get_session(session_id)
    try:
        with session.lock:
            session.opt.tell(req.fvals)
    except AskTellOrderError as exc:
        raise HTTPException(status_code=409, detail=str(exc))
    except NumericalError as exc:
        raise HTTPException(status_code=409, detail=str(exc))
    except ValueError as exc:
        raise HTTPException(status_code=400, detail=str(exc))
    with session.lock:
        return SessionResponse(session_id=session_id, state=_snapshot(session.opt))


@app.delete("/sessions/{session_id}")
def session_delete(session_id: str) -> dict:
    with _sessions_lock:
        if session_id not in _sessions:
            raise HTTPException(status_code=404, detail=f"no session {session_id}")
        del _sessions[session_id]
    return {"deleted": session_id}


@app.post("/benchmarks/trial", response_model=TrialResponse)
def benchmark_trial(req: TrialRequest) -> TrialResponse:
    lam = req.lam if req.lam is not None else default_lambda(req.d)
    try:
        rec = run_trial(
            function=req.function,
            d=req.d,
            lam=lam,
            seed=req.seed,
            target_fval=req.target_fval,
            max_evals=req.max_evals,
            trial=req.trial,
        )
    except ValueError as exc:
        raise HTTPException(status_code=400, detail=str(exc))
    return TrialResponse(
        function=rec.function,
        d=rec.d,
        lam=rec.lam,
        trial=rec.trial,
        seed=rec.seed,
        evals_used=rec.evals_used,
        best_fval=rec.best_fval,
        success=rec.success,
        wall_time=rec.wall_time,
    )


@app.post("/benchmarks/timing", response_model=TimingResponse)
def benchmark_timing(req: TimingRequest) -> TimingResponse:
    try:
        rows = timing_bench(
            d_list=req.dims,
            lam=req.lam,
            iterations=req.iterations,
            repeats=req.repeats,
            seed=req.seed,
        )
    except ValueError as exc:
        raise HTTPException(status_code=400, detail=str(exc))
    return TimingResponse(
        rows=[
            TimingRowModel(
                d=r.d,
                lam=r.lam,
                iterations=r.iterations,
                repeats=r.repeats,
                mean_seconds=r.mean_seconds,
                std_seconds=r.std_seconds,
            )
            for r in rows
        ]
    )
