"""Experiment orchestration: single runs, twin runs, eps sweeps and inequality sweeps.

Every experiment writes into its own output directory.  On failure a file
named ``FAILED`` holding the error message marks the directory as partial.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import asdict, dataclass, field

import numpy as np

from . import spectral as sp
from .config import EpsSweepJob, InequalityJob, SimConfig, TwinRunJob, serialize_config
from .diagnostics import bound_monitors, inequality_terms, sobolev_norms
from .errors import ConfigError, GridMismatchError, PrimhdError, SnapshotError, StabilityError
from .fields import PEMState, SMHDState
from .initial import preset, random_perturbation
from .inequalities import draw_sample, eval_lemma22, evaluate, summarize
from .pem import step_pem
from .smhd import step_smhd
from .storage import checkpoint, restore, write_rows, write_timeseries

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_UNSTABLE = 3
EXIT_IO = 4

SENTINEL = "FAILED"


@dataclass
class RunResult:
    status: int
    output_dir: str
    summary: dict = field(default_factory=dict)
    message: str = ""


def stepper_for(state):
    return step_smhd if isinstance(state, SMHDState) else step_pem


def simulate(
    state, stepper_cfg, n_steps, record_every=1, quartic=True, terms=False, on_record=None, records=None, ineq=None
):
    """Advance ``n_steps`` steps, recording norms every ``record_every`` steps.

    Returns ``(final_state, records, inequality_terms)``; the last list is
    empty unless ``terms`` is set (hydrostatic states only).  The initial
    state is always recorded, and so is the final one.  Passing lists as
    ``records`` / ``ineq`` keeps what was recorded if a step fails.
    """
    step = stepper_for(state)
    records = [] if records is None else records
    ineq = [] if ineq is None else ineq

    def record(s):
        records.append(sobolev_norms(s, quartic=quartic))
        if terms:
            ineq.append(inequality_terms(s))
        if on_record is not None:
            on_record(s)

    record(state)
    for k in range(1, n_steps + 1):
        state = step(state, stepper_cfg)
        if k % record_every == 0 or k == n_steps:
            record(state)
    return state, records, ineq


def initial_state(cfg: SimConfig, resume=None):
    """Initial state of a run from its preset, a snapshot or a resume file."""
    grid = cfg.grid
    source = resume
    if source is None and cfg.initial_condition.startswith("snapshot:"):
        source = cfg.initial_condition[len("snapshot:") :]
    if source is not None:
        state = restore(source, grid=grid)
        if state.model != cfg.model:
            raise SnapshotError(f"snapshot holds a {state.model} state, run uses {cfg.model}")
        if cfg.model == "SMHD" and state.eps != cfg.eps:
            raise SnapshotError(f"snapshot eps {state.eps} differs from configured eps {cfg.eps}")
        return state
    pem = preset(cfg.initial_condition, grid, cfg.seed, cfg.ic_amplitude)
    if cfg.model == "SMHD":
        return SMHDState.well_prepared(pem, cfg.eps)
    return pem


def _steps_to(cfg, t0):
    return max(0, int(round((cfg.T_final - t0) / cfg.dt)))


def _prepare_dir(path):
    os.makedirs(path, exist_ok=True)
    sentinel = os.path.join(path, SENTINEL)
    if os.path.exists(sentinel):
        os.remove(sentinel)


def _write_json(path, data):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(data, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _fail(out, status, exc):
    message = f"{type(exc).__name__}: {exc}"
    try:
        os.makedirs(out, exist_ok=True)
        with open(os.path.join(out, SENTINEL), "w", encoding="utf-8") as fh:
            fh.write(message + "\n")
    except OSError:
        pass
    return RunResult(status, out, {}, message)


# -- experiments ------------------------------------------------------------------------


def _run_single(cfg: SimConfig, out, resume):
    state = initial_state(cfg, resume)
    initial = state
    want_terms = isinstance(state, PEMState)
    partial = []
    try:
        final, records, terms = simulate(
            state,
            cfg.stepper,
            _steps_to(cfg, state.time),
            cfg.record_every,
            quartic=True,
            terms=want_terms,
            records=partial,
        )
    except StabilityError:
        if partial:
            write_timeseries(partial, os.path.join(out, "timeseries.csv"))
        raise
    write_timeseries(records, os.path.join(out, "timeseries.csv"))
    checkpoint(final, os.path.join(out, "final.snap"))
    report = bound_monitors(records, initial, cfg.C_user, terms)
    _write_json(os.path.join(out, "bounds.json"), asdict(report))
    return {"final_time": final.time, "records": len(records), "bounds": asdict(report)}


def twin_states(cfg: SimConfig, delta, perturbation_seed=1):
    """Base initial state and a copy perturbed by an admissible pair of norm ``delta``."""
    base = initial_state(cfg)
    if delta > 0:
        x0, y0 = random_perturbation(base.grid, perturbation_seed, delta)
        return base, PEMState(base.grid, base.u + x0, base.b + y0, base.time)
    return base, base


def _diff_row(s1, s2):
    g = s1.grid
    sq = sp.norm2(g, s1.u - s2.u) + sp.norm2(g, s1.b - s2.b)
    return (s1.time, sq, math.sqrt(sq))


def twin_difference(cfg: SimConfig, delta, perturbation_seed=1, record_every=None, on_record=None):
    """Evolve both twins; returns ``(final_base, rows)`` with rows (time, |X|^2+|Y|^2, sqrt)."""
    a, b = twin_states(cfg, delta, perturbation_seed)
    every = record_every or cfg.record_every
    n = _steps_to(cfg, a.time)
    rows = [_diff_row(a, b)]
    if on_record is not None:
        on_record(a)
    for k in range(1, n + 1):
        a = step_pem(a, cfg.stepper)
        b = step_pem(b, cfg.stepper)
        if k % every == 0 or k == n:
            rows.append(_diff_row(a, b))
            if on_record is not None:
                on_record(a)
    return a, rows


def _run_twin(job: TwinRunJob, out):
    records = []
    final, rows = twin_difference(
        job.base, job.delta, job.perturbation_seed, on_record=lambda s: records.append(sobolev_norms(s))
    )
    write_timeseries(records, os.path.join(out, "timeseries.csv"))
    write_rows(os.path.join(out, "difference.csv"), ("time", "diff_l2sq", "diff_l2"), rows)
    checkpoint(final, os.path.join(out, "final.snap"))
    return {"final_time": final.time, "final_diff_l2sq": rows[-1][1], "final_diff_l2": rows[-1][2]}


def _horizontal_distance(grid, s1, s2):
    u1, b1 = s1.horizontal()
    u2, b2 = s2.horizontal()
    return math.sqrt(sp.norm2(grid, u1 - u2) + sp.norm2(grid, b1 - b2))


def eps_sweep_differences(cfg: SimConfig, eps_values):
    """Horizontal L2 distance at T between SMHD(eps) and PEM from the same well-prepared data."""
    pem0 = preset(cfg.initial_condition, cfg.grid, cfg.seed, cfg.ic_amplitude)
    n = _steps_to(cfg, 0.0)
    ref, _, _ = simulate(pem0, cfg.stepper, n, record_every=max(n, 1), quartic=False)
    diffs = []
    for eps in eps_values:
        final, _, _ = simulate(SMHDState.well_prepared(pem0, eps), cfg.stepper, n, record_every=max(n, 1), quartic=False)
        diffs.append(_horizontal_distance(cfg.grid, final, ref))
    return ref.time, diffs


def _run_sweep(job: EpsSweepJob, out):
    T, diffs = eps_sweep_differences(job.base, job.eps_values)
    rows = []
    for i, (eps, d) in enumerate(zip(job.eps_values, diffs)):
        local = math.nan
        if i > 0 and d > 0 and diffs[i - 1] > 0:
            local = math.log(diffs[i - 1] / d) / math.log(job.eps_values[i - 1] / eps)
        rows.append((float(eps), float(d), local))
    write_rows(os.path.join(out, "convergence.csv"), ("eps", "diff_l2", "local_order"), rows)
    fitted = fit_order(job.eps_values, diffs)
    summary = {"eps": list(job.eps_values), "diff_l2": diffs, "fitted_order": fitted, "T": T}
    _write_json(os.path.join(out, "convergence.json"), summary)
    return summary


def fit_order(eps_values, diffs):
    """Least-squares slope of log(diff) against log(eps)."""
    e = np.asarray(eps_values, dtype=float)
    d = np.asarray(diffs, dtype=float)
    if e.size < 2 or np.any(d <= 0):
        return math.nan
    return float(np.polyfit(np.log(e), np.log(d), 1)[0])


def inequality_statistics(job: InequalityJob, grid):
    """{lemma: stats} over ``job.samples`` seeded samples on ``grid``."""
    out = {}
    n, seed = job.samples, job.base.seed
    wanted = set(job.lemmas)
    if wanted & {"l22a", "l22b"}:
        pairs = [eval_lemma22(grid, *draw_sample("l22a", grid, seed + i, job.band, job.alpha)) for i in range(n)]
        for k, name in enumerate(("l22a", "l22b")):
            if name in wanted:
                out[name] = summarize([p[k] for p in pairs])
    for name in job.lemmas:
        if name in ("l22a", "l22b"):
            continue
        out[name] = summarize(
            [evaluate(name, grid, draw_sample(name, grid, seed + i, job.band, job.alpha)) for i in range(n)]
        )
    return {name: out[name] for name in job.lemmas}


def _run_inequalities(job: InequalityJob, out):
    grids = [job.base.grid]
    if job.N_check:
        g = job.base.grid
        grids.append(sp.Grid.cube(job.N_check, g.L1, g.L2))
    rows, summary = [], {}
    for grid in grids:
        stats = inequality_statistics(job, grid)
        summary[str(grid.Nx)] = stats
        for name, s in stats.items():
            rows.append((name, grid.Nx, s["max"], s["mean"], s["p99"], s["n"], s["flagged"]))
    write_rows(
        os.path.join(out, "inequalities.csv"), ("lemma", "N", "max", "mean", "p99", "n", "flagged"), rows
    )
    _write_json(os.path.join(out, "inequalities.json"), summary)
    return summary


def run_experiment(job, output_dir=None, resume=None):
    """Run any experiment job and report an exit status; never raises for run failures."""
    base = job if isinstance(job, SimConfig) else job.base
    out = output_dir or base.output_dir
    try:
        _prepare_dir(out)
        with open(os.path.join(out, "config.txt"), "w", encoding="utf-8") as fh:
            fh.write(serialize_config(job))
        if isinstance(job, SimConfig):
            summary = _run_single(job, out, resume)
        elif resume is not None:
            raise ConfigError("--resume applies to single runs only")
        elif isinstance(job, TwinRunJob):
            summary = _run_twin(job, out)
        elif isinstance(job, EpsSweepJob):
            summary = _run_sweep(job, out)
        elif isinstance(job, InequalityJob):
            summary = _run_inequalities(job, out)
        else:
            raise TypeError(f"unsupported experiment job {type(job).__name__}")
    except (ConfigError, GridMismatchError) as exc:
        return _fail(out, EXIT_CONFIG, exc)
    except StabilityError as exc:
        return _fail(out, EXIT_UNSTABLE, exc)
    except (OSError, SnapshotError) as exc:
        return _fail(out, EXIT_IO, exc)
    except PrimhdError as exc:
        return _fail(out, EXIT_UNSTABLE, exc)
    return RunResult(EXIT_OK, out, summary)
