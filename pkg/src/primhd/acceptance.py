"""Acceptance criteria 1-8, each returning a :class:`CriterionResult`.

``run_all`` prints one ``PASS``/``FAIL`` line per criterion.  Everything is
seeded, so results are reproducible bit for bit on a given platform.
"""

from __future__ import annotations

import filecmp
import json
import math
import os
import tempfile
import time
import warnings
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from . import spectral as sp
from .config import InequalityJob, SimConfig, parse_config
from .diagnostics import (
    INEQUALITIES,
    decay_rate_fit,
    empirical_constant,
    energy_identity_residual,
)
from .experiments import (
    EXIT_OK,
    eps_sweep_differences,
    inequality_statistics,
    run_experiment,
    simulate,
    twin_difference,
)
from .fields import SMHDState
from .initial import random_smooth, shear, shear_velocity
from .pem import StepperConfig
from .storage import checkpoint, read_timeseries, restore, write_timeseries

CONSTRAINT_LIMIT = 1e-9
BASELINE_FILE = "inequality_baselines.json"


@dataclass
class CriterionResult:
    number: int
    title: str
    passed: bool
    details: dict = field(default_factory=dict)
    seconds: float = 0.0

    def line(self):
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] criterion {self.number}: {self.title} ({self.seconds:.1f} s) {_brief(self.details)}"


def _brief(details):
    return json.dumps(details, sort_keys=True, default=_jsonable)


def _jsonable(x):
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    if isinstance(x, np.ndarray):
        return x.tolist()
    return str(x)


def _order(e_coarse, e_fine):
    if e_coarse <= 0 or e_fine <= 0:
        return math.nan
    return math.log2(e_coarse / e_fine)


# -- 1 ----------------------------------------------------------------------------------


def energy_identity(n=32, T=1.0, dts=(1e-3, 5e-4), seed=0, rule="lagrange6"):
    """Relative energy-identity residual and its observed order for RK2 and RK3."""
    grid = sp.Grid.cube(n)
    state = random_smooth(grid, seed)
    min_order = {"RK2": 1.9, "RK3": 2.8}
    details, ok = {}, True
    for scheme in ("RK2", "RK3"):
        res = []
        for dt in dts:
            _, records, _ = simulate(state, StepperConfig(dt, scheme), int(round(T / dt)), quartic=False)
            res.append(energy_identity_residual(records, rule))
        order = _order(res[0], res[1])
        details[scheme] = {"residuals": res, "order": order}
        ok &= res[0] <= 1e-5 and order >= min_order[scheme]
    return ok, details


# -- 2 ----------------------------------------------------------------------------------


def shear_decay(n=16, T=1.0, dt=1e-3, check_every=10):
    """Pointwise error against the exact shear flow and the fitted decay rate of |u|^2."""
    grid = sp.Grid.cube(n)
    errors = []

    def compare(s):
        u = sp.inverse_transform(grid, s.u)
        b = sp.inverse_transform(grid, s.b)
        exact = shear_velocity(grid, s.time)
        errors.append(max(float(np.max(np.abs(u - exact))), float(np.max(np.abs(b)))))

    _, records, _ = simulate(
        shear(grid), StepperConfig(dt, "RK3"), int(round(T / dt)), check_every, quartic=False, on_record=compare
    )
    rate = decay_rate_fit([r.time for r in records], [r.l2_u for r in records])
    expected = 2 * (2 * math.pi / grid.L2) ** 2
    details = {"max_pointwise_error": max(errors), "decay_rate": rate, "expected_rate": expected}
    return max(errors) <= 1e-10 and abs(rate - expected) <= 1e-6, details


# -- 3 ----------------------------------------------------------------------------------


def constraint_preservation(n=16, steps=1000, dt=1e-3, eps=0.1, seed=0):
    """Largest constraint residual over every step of both models."""
    grid = sp.Grid.cube(n)
    pem0 = random_smooth(grid, seed)
    details = {}
    for name, state in (("PEM", pem0), ("SMHD", SMHDState.well_prepared(pem0, eps))):
        worst = {}

        def track(s):
            for key, value in s.constraint_residuals().items():
                worst[key] = max(worst.get(key, 0.0), float(value))

        simulate(state, StepperConfig(dt, "RK3"), steps, 1, quartic=False, on_record=track)
        details[name] = worst
    ok = all(v <= CONSTRAINT_LIMIT for d in details.values() for v in d.values())
    return ok, details


# -- 4 ----------------------------------------------------------------------------------


def _curve_deviation(r1, r2):
    """Largest relative gap between two lhs / rhs curves sampled at the same times."""
    a, b = np.asarray(r1), np.asarray(r2)
    scale = np.maximum(np.abs(a), np.abs(b))
    gap = np.where(scale > 0, np.abs(a - b) / np.where(scale > 0, scale, 1.0), 0.0)
    return float(np.max(gap))


def _stable(a, b, tol=0.2):
    if a == b:
        return True
    if not (math.isfinite(a) and math.isfinite(b)):
        return False
    return abs(a - b) <= tol * max(abs(a), abs(b))


def lp_boundedness(n=16, T=5.0, dts=(1e-2, 5e-3), seeds=range(10), record_dt=0.05):
    """Elsasser L4 growth and empirical constants of the differential inequalities.

    Besides the minimal constant (zero whenever every left side is negative)
    the whole lhs / rhs curve is compared across time steps at shared record
    times, since it stays informative in the dissipation-dominated regime.
    """
    grid = sp.Grid.cube(n)
    gated = ("l4", "dz", "h2")
    worst_growth = 0.0
    largest_C = {name: 0.0 for name in INEQUALITIES}
    deviation = {name: 0.0 for name in INEQUALITIES}
    unstable = []
    ok = True
    for seed in seeds:
        state = random_smooth(grid, seed)
        fits = []
        for dt in dts:
            every = int(round(record_dt / dt))
            _, records, terms = simulate(
                state, StepperConfig(dt, "RK3", cfl_limit=1.0), int(round(T / dt)), every, quartic=True, terms=True
            )
            l4 = np.array([r.l4_A + r.l4_Astar for r in records])
            growth = float(np.max(l4) / l4[0])
            worst_growth = max(worst_growth, growth)
            ok &= bool(np.all(np.isfinite(l4))) and growth <= 10.0
            fit = {}
            for name in INEQUALITIES:
                lhs = [getattr(x, f"{name}_lhs") for x in terms]
                rhs = [getattr(x, f"{name}_rhs") for x in terms]
                fit[name] = (empirical_constant(lhs, rhs), [a / b for a, b in zip(lhs, rhs)])
            fits.append(fit)
        for name in INEQUALITIES:
            (c1, r1), (c2, r2) = fits[0][name], fits[1][name]
            dev = _curve_deviation(r1, r2)
            largest_C[name] = max(largest_C[name], c1, c2)
            deviation[name] = max(deviation[name], dev)
            stable = math.isfinite(c1) and math.isfinite(c2) and _stable(c1, c2) and dev <= 0.2
            if not stable:
                unstable.append(f"{name}/seed{seed}")
                ok &= name not in gated
    details = {
        "max_l4_growth": worst_growth,
        "largest_empirical_C": largest_C,
        "max_ratio_curve_deviation": deviation,
        "unstable": unstable,
    }
    return ok, details


# -- 5 ----------------------------------------------------------------------------------


def load_baselines():
    text = resources.files("primhd").joinpath("data", BASELINE_FILE).read_text(encoding="utf-8")
    return json.loads(text)


def inequality_baseline_job(samples=1000, seed=0):
    base = SimConfig(model="PEM", T_final=1.0, Nx=32, Ny=32, Nz=32, seed=seed)
    return InequalityJob(base, samples=samples, N_check=64)


def compute_baselines(samples=1000, n=32):
    job = inequality_baseline_job(samples)
    stats = inequality_statistics(job, sp.Grid.cube(n))
    return {
        "N": n,
        "samples": samples,
        "seed": job.base.seed,
        "band": job.band,
        "alpha": job.alpha,
        "max": {name: s["max"] for name, s in stats.items()},
    }


def inequality_lab(samples=1000, baselines=None):
    """Largest ratio per lemma at N = 32 and N = 64 against the frozen baseline."""
    baselines = baselines or load_baselines()
    job = inequality_baseline_job(samples, baselines["seed"])
    ok = samples >= 1000
    details = {}
    for n in (32, 64):
        stats = inequality_statistics(job, sp.Grid.cube(n))
        for name, s in stats.items():
            ref = baselines["max"][name]
            rel = (s["max"] - ref) / ref
            good = s["max"] <= 1.1 * ref if n == 32 else abs(rel) <= 0.1
            ok &= good and s["flagged"] == 0
            details.setdefault(name, {})[str(n)] = {"max": s["max"], "rel_to_baseline": rel, "flagged": s["flagged"]}
    return ok, details


# -- 6 ----------------------------------------------------------------------------------


def continuous_dependence(n=16, T=1.0, dt=1e-3, deltas=(1e-3, 5e-4)):
    """Final difference norm ratio for two perturbation sizes and the zero perturbation."""
    cfg = SimConfig(model="PEM", T_final=T, Nx=n, Ny=n, Nz=n, dt=dt)
    finals = []
    for delta in deltas:
        _, rows = twin_difference(cfg, delta, record_every=int(round(T / dt)))
        finals.append(rows[-1][2])
    _, rows0 = twin_difference(cfg, 0.0, record_every=1)
    zero = max(r[1] for r in rows0)
    ratio = finals[0] / finals[1]
    details = {"final_diff_l2": finals, "ratio": ratio, "max_diff_l2sq_delta0": zero}
    return abs(ratio - 2.0) <= 0.2 and zero <= 1e-12, details


# -- 7 ----------------------------------------------------------------------------------


def eps_limit(n=16, T=1.0, dt=1e-3, eps_values=(0.2, 0.1, 0.05)):
    """Horizontal SMHD-PEM distance at T for decreasing eps; monotone decrease is the gate."""
    from .experiments import fit_order

    cfg = SimConfig(model="PEM", T_final=T, Nx=n, Ny=n, Nz=n, dt=dt)
    _, diffs = eps_sweep_differences(cfg, eps_values)
    decreasing = all(b < a for a, b in zip(diffs, diffs[1:]))
    return decreasing, {"eps": list(eps_values), "diff_l2": diffs, "fitted_order": fit_order(eps_values, diffs)}


# -- 8 ----------------------------------------------------------------------------------

_SMALL_RUN = "model = PEM\nT_final = 0.02\nN = 8\ndt = 1e-3\nseed = 3\nrecord_every = 2\n"


def infrastructure():
    """Checkpoint continuation, byte-identical reruns and exact CSV round trip."""
    details = {}
    with tempfile.TemporaryDirectory() as tmp:
        # bitwise continuation from a checkpoint
        grid = sp.Grid.cube(8)
        cfg = StepperConfig(1e-3, "RK3")
        s0 = random_smooth(grid, 5)
        full, rec_full, _ = simulate(s0, cfg, 20, 1)
        half, rec_a, _ = simulate(s0, cfg, 10, 1)
        path = os.path.join(tmp, "mid.snap")
        checkpoint(half, path)
        back = restore(path, grid)
        roundtrip = np.array_equal(back.stacked(), half.stacked()) and back.time == half.time
        resumed, rec_b, _ = simulate(back, cfg, 10, 1)
        write_timeseries(rec_full, os.path.join(tmp, "full.csv"))
        write_timeseries(rec_a + rec_b[1:], os.path.join(tmp, "split.csv"))
        details["checkpoint_bitwise"] = bool(roundtrip)
        details["continuation_identical"] = bool(
            np.array_equal(resumed.stacked(), full.stacked())
            and filecmp.cmp(os.path.join(tmp, "full.csv"), os.path.join(tmp, "split.csv"), shallow=False)
        )

        # byte-identical reruns through the experiment runner
        same = True
        for kind, extra in (("run", ""), ("twin", "delta = 1e-3\n")):
            outs = []
            for k in range(2):
                out = os.path.join(tmp, f"{kind}{k}")
                res = run_experiment(parse_config(_SMALL_RUN + extra, kind), out)
                same &= res.status == EXIT_OK
                outs.append(out)
            names = sorted(os.listdir(outs[0]))
            match, mismatch, errors = filecmp.cmpfiles(outs[0], outs[1], names, shallow=False)
            same &= not mismatch and not errors and names == sorted(os.listdir(outs[1]))
        details["reruns_identical"] = bool(same)

        # CSV round trip
        csv_path = os.path.join(tmp, "full.csv")
        details["csv_roundtrip"] = read_timeseries(csv_path) == rec_full
    return all(details.values()), details


# -- driver -----------------------------------------------------------------------------

CRITERIA = {
    1: ("energy identity", energy_identity),
    2: ("exact shear decay", shear_decay),
    3: ("constraint preservation", constraint_preservation),
    4: ("Elsasser L4 and higher-order inequalities", lp_boundedness),
    5: ("inequality lab baselines", inequality_lab),
    6: ("continuous dependence", continuous_dependence),
    7: ("eps limit", eps_limit),
    8: ("infrastructure", infrastructure),
}


def run_criterion(number):
    title, fn = CRITERIA[number]
    start = time.perf_counter()
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        passed, details = fn()
    return CriterionResult(number, title, bool(passed), details, time.perf_counter() - start)


def run_all(numbers=None, out=print):
    results = []
    for number in numbers or sorted(CRITERIA):
        result = run_criterion(number)
        if out is not None:
            out(result.line())
        results.append(result)
    return results
