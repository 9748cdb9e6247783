"""HTTP/JSON service running live preference-optimization sessions.

A human decision-maker is the preference oracle: the service surfaces one
pending comparison at a time and feeds each posted answer into the engine,
which runs on a per-session worker thread.  Sessions are event-sourced: the
log stores only the creation request and the answers, and state is rebuilt by
deterministic replay, so a server restart mid-session is invisible.

Endpoints:
    POST /sessions                creates a session; returns the descriptor
    GET  /sessions/{id}           descriptor + history snapshot
    POST /sessions/{id}/answer    feeds one answer {token, preference}

Answer convention: ``-1`` means the left candidate is better, ``+1`` the
right one, ``0`` no preference.  The left candidate is always the first
argument of the underlying preference query (the incumbent during the
initial comparisons, the new proposal afterwards).
"""

from __future__ import annotations

import json
import queue
import threading
import uuid
from pathlib import Path
from typing import Optional

import numpy as np
from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field

from .acquisition import Variant
from .driver import SolverConfig, solve
from .problem import ConstraintSet
from .pso import PsoConfig

__all__ = ["create_app", "SessionManager"]


class CreateSessionRequest(BaseModel):
    lower: list[float]
    upper: list[float]
    names: Optional[list[str]] = None
    units: Optional[list[str]] = None
    budget: Optional[int] = Field(default=None, ge=3)
    n_init: Optional[int] = Field(default=None, ge=2)
    seed: int = 0
    delta_cycle: Optional[list[float]] = None
    variant: str = "glispr"
    k_aug: Optional[int] = Field(default=None, ge=1)
    swarm_size: Optional[int] = Field(default=None, ge=5)
    max_iters: Optional[int] = Field(default=None, ge=10)


class AnswerRequest(BaseModel):
    token: str
    preference: int


def _validate_request(req: CreateSessionRequest, default_budget: int) -> dict:
    n = len(req.lower)
    if n != len(req.upper):
        raise HTTPException(422, "lower and upper bounds must have the same length")
    if not 1 <= n <= 20:
        raise HTTPException(422, "between 1 and 20 decision variables are supported")
    bad = [i for i in range(n) if not req.lower[i] < req.upper[i]]
    if bad:
        raise HTTPException(
            422, f"lower bound must be strictly below upper bound at indexes {bad}"
        )
    if req.names is not None and len(req.names) != n:
        raise HTTPException(422, "one name per variable is required")
    if req.units is not None and len(req.units) != n:
        raise HTTPException(422, "one unit per variable is required")
    n_init = req.n_init if req.n_init is not None else 4 * n
    budget = req.budget if req.budget is not None else default_budget
    if budget <= n_init:
        raise HTTPException(422, f"budget must exceed the initial design size ({n_init})")
    if req.variant not in {v.value for v in Variant}:
        raise HTTPException(422, f"unknown variant {req.variant!r}")
    if req.delta_cycle is not None:
        if not req.delta_cycle or any(not 0.0 <= d <= 1.0 for d in req.delta_cycle):
            raise HTTPException(422, "delta_cycle entries must lie in [0, 1]")
    return {
        "lower": list(req.lower),
        "upper": list(req.upper),
        "names": req.names or [f"x{i + 1}" for i in range(n)],
        "units": req.units or [""] * n,
        "budget": budget,
        "n_init": n_init,
        "seed": req.seed,
        "delta_cycle": req.delta_cycle or [0.95, 0.7, 0.35, 0.0],
        "variant": req.variant,
        "k_aug": req.k_aug or 5,
        "swarm_size": req.swarm_size,
        "max_iters": req.max_iters,
    }


class _PendingQuery:
    def __init__(self, token: str, left, right, is_initial: bool):
        self.token = token
        self.left = [float(v) for v in np.asarray(left).ravel()]
        self.right = [float(v) for v in np.asarray(right).ravel()]
        self.is_initial = is_initial


class _BridgeOracle:
    """Blocks the engine thread on each query until an answer is posted.

    Replayed answers (event-log recovery) are consumed silently: the queries
    they re-answer were already shown to the user in the original run and
    must not surface as pending again.
    """

    def __init__(self, session: "Session", replay: list[int]):
        self.session = session
        self.answers: queue.Queue[int] = queue.Queue()
        self._replay = list(replay)

    def query(self, xi, xj) -> int:
        if self._replay:
            return self._replay.pop(0)
        self.session._publish_query(xi, xj)
        return self.answers.get()


class Session:
    """One live optimization run, event-sourced onto a JSONL log."""

    def __init__(self, session_id: str, config: dict, log_path: Path, replay: list[int]):
        self.id = session_id
        self.config = config
        self.log_path = log_path
        self._lock = threading.Lock()
        self._pending: Optional[_PendingQuery] = None
        self._queries_issued = len(replay)
        self._queries_answered = len(replay)
        self._history: list[dict] = []
        self._best: Optional[list[float]] = None
        self._result: Optional[list[float]] = None
        self._error: Optional[str] = None
        self._oracle = _BridgeOracle(self, replay)
        self._thread = threading.Thread(target=self._run, daemon=True)
        self._thread.start()

    # engine side -----------------------------------------------------------

    def _run(self):
        cfg = self.config
        problem = ConstraintSet(np.array(cfg["lower"]), np.array(cfg["upper"]))
        pso = PsoConfig()
        if cfg["swarm_size"] is not None:
            pso.swarm_size = cfg["swarm_size"]
        if cfg["max_iters"] is not None:
            pso.max_iters = cfg["max_iters"]
        solver_cfg = SolverConfig(
            n_init=cfg["n_init"],
            n_max=cfg["budget"],
            seed=cfg["seed"],
            delta_cycle=tuple(cfg["delta_cycle"]),
            variant=Variant(cfg["variant"]),
            k_aug=cfg["k_aug"],
            pso=pso,
        )
        try:
            result = solve(problem, self._oracle, solver_cfg, observer=self._observe)
        except Exception as exc:  # surfaced via the descriptor
            with self._lock:
                self._error = f"{type(exc).__name__}: {exc}"
                self._pending = None
            return
        with self._lock:
            self._result = [float(v) for v in result.x_best]
            self._best = self._result
            self._pending = None

    def _observe(self, state):
        with self._lock:
            self._best = [float(v) for v in state.best_x()]
            self._history = [
                {
                    "iteration": rec.iteration,
                    "delta": rec.delta,
                    "proposed_x": [float(v) for v in rec.proposed_x],
                    "best_index": rec.best_index,
                }
                for rec in state.history
            ]

    def _publish_query(self, xi, xj):
        with self._lock:
            token = f"q{self._queries_issued}"
            is_initial = self._queries_issued < self.config["n_init"] - 1
            self._pending = _PendingQuery(token, xi, xj, is_initial)
            self._queries_issued += 1

    # API side ---------------------------------------------------------------

    def answer(self, token: str, preference: int):
        if preference not in (-1, 0, 1):
            raise HTTPException(422, "preference must be -1, 0 or 1")
        with self._lock:
            if self._result is not None:
                raise HTTPException(409, "session is already finished")
            if self._error is not None:
                raise HTTPException(409, f"session failed: {self._error}")
            if self._pending is None:
                raise HTTPException(409, "no pending comparison (still computing)")
            if self._pending.token != token:
                raise HTTPException(409, f"stale query token {token!r}")
            self._pending = None
            self._queries_answered += 1
            with open(self.log_path, "a") as fh:
                fh.write(json.dumps({"type": "answer", "token": token, "preference": preference}) + "\n")
        self._oracle.answers.put(preference)

    def wait_idle(self, timeout: float = 30.0):
        """Block until a comparison is pending or the run finished (tests)."""
        import time

        deadline = time.monotonic() + timeout
        while time.monotonic() < deadline:
            with self._lock:
                if self._pending is not None or self._result is not None or self._error:
                    return
            time.sleep(0.005)

    def descriptor(self) -> dict:
        with self._lock:
            if self._error is not None:
                phase = "failed"
            elif self._result is not None:
                phase = "done"
            elif self._pending is None:
                phase = "computing"
            elif self._pending.is_initial:
                phase = "initial_queries"
            else:
                phase = "iterating"
            pending = None
            if self._pending is not None:
                if self._pending.is_initial:
                    labels = ("incumbent", "candidate")
                else:
                    labels = ("proposal", "incumbent")
                pending = {
                    "token": self._pending.token,
                    "left": self._pending.left,
                    "right": self._pending.right,
                    "left_label": labels[0],
                    "right_label": labels[1],
                }
            return {
                "id": self.id,
                "phase": phase,
                "pending_query": pending,
                "queries_answered": self._queries_answered,
                "total_queries": self.config["budget"] - 1,
                "config": {
                    "lower": self.config["lower"],
                    "upper": self.config["upper"],
                    "names": self.config["names"],
                    "units": self.config["units"],
                    "budget": self.config["budget"],
                    "n_init": self.config["n_init"],
                },
                "best": self._best,
                "x_best": self._result,
                "history": list(self._history),
                "error": self._error,
            }


class SessionManager:
    def __init__(self, data_dir: Path, default_budget: int):
        self.data_dir = Path(data_dir)
        self.data_dir.mkdir(parents=True, exist_ok=True)
        self.default_budget = default_budget
        self._sessions: dict[str, Session] = {}
        self._lock = threading.Lock()

    def create(self, req: CreateSessionRequest) -> Session:
        config = _validate_request(req, self.default_budget)
        session_id = uuid.uuid4().hex[:12]
        log_path = self.data_dir / f"{session_id}.jsonl"
        with open(log_path, "w") as fh:
            fh.write(json.dumps({"type": "created", "config": config}) + "\n")
        session = Session(session_id, config, log_path, replay=[])
        with self._lock:
            self._sessions[session_id] = session
        return session

    def get(self, session_id: str) -> Session:
        with self._lock:
            if session_id in self._sessions:
                return self._sessions[session_id]
        session = self._load(session_id)
        if session is None:
            raise HTTPException(404, f"unknown session {session_id!r}")
        with self._lock:
            self._sessions.setdefault(session_id, session)
            return self._sessions[session_id]

    def _load(self, session_id: str) -> Optional[Session]:
        log_path = self.data_dir / f"{session_id}.jsonl"
        if not log_path.exists():
            return None
        config = None
        answers: list[int] = []
        with open(log_path) as fh:
            for line in fh:
                event = json.loads(line)
                if event["type"] == "created":
                    config = event["config"]
                elif event["type"] == "answer":
                    answers.append(int(event["preference"]))
        if config is None:
            return None
        return Session(session_id, config, log_path, replay=answers)


def create_app(data_dir="./pbo-sessions", default_budget: int = 40) -> FastAPI:
    app = FastAPI(title="preference-optimization sessions")
    manager = SessionManager(Path(data_dir), default_budget)
    app.state.manager = manager

    @app.post("/sessions", status_code=201)
    def create_session(req: CreateSessionRequest):
        session = manager.create(req)
        session.wait_idle()
        return session.descriptor()

    @app.get("/sessions/{session_id}")
    def get_session(session_id: str):
        return manager.get(session_id).descriptor()

    @app.post("/sessions/{session_id}/answer")
    def answer_session(session_id: str, req: AnswerRequest):
        session = manager.get(session_id)
        session.answer(req.token, req.preference)
        return session.descriptor()

    return app
