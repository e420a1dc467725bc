"""HTTP API: job queue for slow solves plus catalog/spec endpoints.

Endpoints (JSON bodies use the trace serialization dialect):

* ``POST /jobs``            submit a solve / explain request -> {id}
* ``GET  /jobs/{id}``       status + steps completed so far
* ``POST /jobs/{id}/choice`` answer a manual-mode choice
* ``GET  /catalog``         bundled puzzles and instances
* ``POST /specs``           upload & validate a user spec+instance -> {id}

Jobs run on a bounded thread pool; the store is a lock-protected map, so
status polls never observe partially written results and never block on
solving.  Manual-mode jobs park on an event until a choice arrives.
"""

from __future__ import annotations

import threading
import queue
import uuid

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel

from . import dsl, pipeline, zoo
from . import encode as enc
from .mus import SearchConfig


class JobRequest(BaseModel):
    puzzle: str | None = None       # bundled puzzle id
    instance: str | None = None     # bundled instance id (default: first)
    spec_id: str | None = None      # id returned by POST /specs
    mode: str = "auto"              # auto | manual | force
    force: str | None = None        # "name[i,j]=v" for force mode
    seed: int = 0
    positive_only: bool | None = None
    max_mus_size: int | None = None
    attempts: int = 10


class ChoiceBody(BaseModel):
    index: int


class SpecUpload(BaseModel):
    spec: str
    instance: str


class Job:
    def __init__(self, jid, request):
        self.id = jid
        self.request = request
        self.status = "queued"      # queued|running|partial|done|failed
        self.steps = []             # step JSON completed so far
        self.error = None
        self.trace = None
        # manual mode handshake
        self.choices = None         # options offered, or None
        self.choice_event = threading.Event()
        self.choice_index = None


class JobStore:
    """Synchronized job map + bounded worker pool."""

    def __init__(self, pool_size=2, search_workers=1):
        self.lock = threading.Lock()
        self.jobs = {}
        self.specs = {}             # spec_id -> (spec_text, instance_text)
        self.queue = queue.Queue()
        self.search_workers = search_workers
        self.threads = [
            threading.Thread(target=self._worker, daemon=True)
            for _ in range(pool_size)
        ]
        for t in self.threads:
            t.start()

    def submit(self, request):
        jid = uuid.uuid4().hex[:12]
        job = Job(jid, request)
        with self.lock:
            self.jobs[jid] = job
        self.queue.put(job)
        return job

    def get(self, jid):
        with self.lock:
            job = self.jobs.get(jid)
        if job is None:
            raise HTTPException(404, f"unknown job {jid!r}")
        return job

    def add_spec(self, upload):
        # validate eagerly so /specs rejects broken uploads with a 422
        try:
            spec = dsl.parse_spec(upload.spec)
            inst = dsl.parse_instance(upload.instance, spec)
            enc.encode(dsl.ground(spec, inst), verify=True)
        except enc.NonUniqueError as ex:
            raise HTTPException(422, f"instance is not uniquely solvable: {ex}")
        except (dsl.DslError, ValueError, KeyError) as ex:
            raise HTTPException(422, f"invalid spec or instance: {ex}")
        sid = uuid.uuid4().hex[:12]
        with self.lock:
            self.specs[sid] = (upload.spec, upload.instance)
        return sid

    # -- worker side --------------------------------------------------

    def _build(self, request):
        if request.spec_id is not None:
            with self.lock:
                pair = self.specs.get(request.spec_id)
            if pair is None:
                raise ValueError(f"unknown spec id {request.spec_id!r}")
            spec = dsl.parse_spec(pair[0])
            inst = dsl.parse_instance(pair[1], spec)
            puzzle = enc.encode(dsl.ground(spec, inst), verify=True)
            positive = bool(request.positive_only)
        else:
            if not request.puzzle:
                raise ValueError("request needs either puzzle or spec_id")
            entry = zoo.get_entry(request.puzzle)
            puzzle = zoo.build(request.puzzle, request.instance)
            positive = (entry.positive_only if request.positive_only is None
                        else request.positive_only)
        return puzzle, positive

    def _worker(self):
        while True:
            job = self.queue.get()
            try:
                self._run(job)
            except Exception as ex:   # failure is a job state, not a crash
                with self.lock:
                    job.status = "failed"
                    job.error = f"{type(ex).__name__}: {ex}"
            finally:
                job.choice_event.set()   # unblock anything waiting

    def _run(self, job):
        request = job.request
        with self.lock:
            job.status = "running"
        puzzle, positive = self._build(request)
        config = SearchConfig(seed=request.seed, attempts=request.attempts,
                              max_size=request.max_mus_size,
                              workers=self.search_workers)

        if request.mode == "force":
            cell, value = _parse_force(request.force, puzzle)
            search = pipeline.make_search(puzzle, config)
            try:
                state = pipeline.SolveState(puzzle)
                step = pipeline.force_explain(search, state, cell, value,
                                              positive_only=positive)
            finally:
                search.close()
            with self.lock:
                if step is None:
                    job.trace = {"explained": None,
                                 "reason": "not deducible"}
                else:
                    job.trace = {"explained": pipeline.step_json(puzzle, step)}
                job.status = "done"
            return

        chooser = None
        if request.mode == "manual":
            def chooser(options):
                with self.lock:
                    job.choices = options
                    job.choice_event.clear()
                job.choice_event.wait()
                with self.lock:
                    picked = job.choice_index
                    job.choices = None
                    job.choice_index = None
                if picked is None:      # store shut down mid-choice
                    picked = 0
                return picked

        def on_step(step, state):
            payload = pipeline.step_json(puzzle, step)
            with self.lock:
                job.steps.append(payload)
                job.status = "partial"

        from .cli import solve_with_chooser
        trace = solve_with_chooser(puzzle, config, positive,
                                   chooser=chooser, on_step=on_step)
        with self.lock:
            job.trace = trace
            job.status = "done"


def _parse_force(text, puzzle):
    from .cli import parse_force
    if not text:
        raise ValueError("force mode needs a force literal")
    return parse_force(text, puzzle)


def create_app(pool_size=2, search_workers=1):
    app = FastAPI(title="musolve", version="0.1.0")
    store = JobStore(pool_size=pool_size, search_workers=search_workers)
    app.state.store = store

    @app.get("/catalog")
    def catalog():
        return {
            "puzzles": [
                {
                    "id": e.id,
                    "title": e.title,
                    "positive_only": e.positive_only,
                    "instances": [
                        {"id": r.id, "note": r.note} for r in e.instances
                    ],
                }
                for e in zoo.list_catalog()
            ]
        }

    @app.post("/specs")
    def upload_spec(upload: SpecUpload):
        return {"id": store.add_spec(upload)}

    @app.post("/jobs")
    def submit(request: JobRequest):
        if request.mode not in ("auto", "manual", "force"):
            raise HTTPException(422, f"unknown mode {request.mode!r}")
        if request.puzzle is not None:
            try:
                entry = zoo.get_entry(request.puzzle)
                if request.instance is not None:
                    ids = [r.id for r in entry.instances]
                    if request.instance not in ids:
                        raise KeyError(request.instance)
            except KeyError as ex:
                raise HTTPException(422, f"unknown puzzle/instance: {ex}")
        job = store.submit(request)
        return {"id": job.id}

    @app.get("/jobs/{jid}")
    def status(jid: str):
        job = store.get(jid)
        with store.lock:
            out = {
                "id": job.id,
                "status": job.status,
                "step_index": len(job.steps),
                "steps": list(job.steps),
            }
            if job.choices is not None:
                out["awaiting_choice"] = True
                out["choices"] = job.choices
            if job.status == "done":
                out["result"] = job.trace
            if job.status == "failed":
                out["error"] = job.error
        return out

    @app.post("/jobs/{jid}/choice")
    def choose(jid: str, body: ChoiceBody):
        job = store.get(jid)
        with store.lock:
            if job.choices is None:
                raise HTTPException(
                    409, "job is not waiting for a choice")
            if not 0 <= body.index < len(job.choices):
                raise HTTPException(
                    422, f"choice index out of range 0..{len(job.choices)-1}")
            job.choice_index = body.index
        job.choice_event.set()
        return {"ok": True}

    return app
