"""Monte Carlo percolation experiments.

Trials are embarrassingly parallel and individually seeded, so every result
is reproducible bit for bit regardless of worker count. The threshold
estimator couples all probe probabilities through one uniform array per
trial, which makes the percolation indicator monotone in p along every
sample path.
"""

from __future__ import annotations

import datetime
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import MemoryGuardError
from .families import UpdateFamily
from .lattice import closure_grid
from .rng import trial_uniforms
from .stats import wilson_interval

ARTIFACT_VERSION = "0.1.0"
SCHEMA_VERSION = 1


def resolve_workers(workers: int | None) -> int:
    if workers is not None:
        return max(1, int(workers))
    env = os.environ.get("BOOTSTRAP_LAB_WORKERS")
    if env:
        return max(1, int(env))
    return max(1, os.cpu_count() or 1)


def _map_trials(fn, trials: int, workers: int) -> list:
    """Deterministic trial map: results are indexed by trial, so scheduling
    order cannot affect the outcome."""
    if workers <= 1 or trials <= 1:
        return [fn(t) for t in range(trials)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, range(trials)))


# ---------------------------------------------------------------------------
# p-random torus sampling


@dataclass(frozen=True)
class TrialPlan:
    family: UpdateFamily
    n: int
    p: float
    trials: int
    master_seed: int

    def __post_init__(self):
        if self.n < 1 or self.trials < 0 or not (0.0 <= self.p <= 1.0):
            raise ValueError("invalid trial plan")

    def to_dict(self) -> dict:
        return {"family": self.family.to_dict(), "n": self.n, "p": self.p,
                "trials": self.trials, "master_seed": self.master_seed}

    @staticmethod
    def from_dict(d: dict) -> "TrialPlan":
        return TrialPlan(UpdateFamily.from_dict(d["family"]), d["n"], d["p"],
                         d["trials"], d["master_seed"])


@dataclass(frozen=True)
class RunManifest:
    plan: TrialPlan
    outcomes: tuple[bool, ...]
    fraction: float
    interval: tuple[float, float]
    created: str
    artifact_version: str = ARTIFACT_VERSION
    schema_version: int = SCHEMA_VERSION

    def to_dict(self) -> dict:
        return {"schema_version": self.schema_version,
                "artifact_version": self.artifact_version,
                "kind": "simulate",
                "created": self.created,
                "plan": self.plan.to_dict(),
                "outcomes": [int(o) for o in self.outcomes],
                "fraction": self.fraction,
                "interval": list(self.interval)}

    @staticmethod
    def from_dict(d: dict) -> "RunManifest":
        return RunManifest(plan=TrialPlan.from_dict(d["plan"]),
                           outcomes=tuple(bool(o) for o in d["outcomes"]),
                           fraction=d["fraction"],
                           interval=(d["interval"][0], d["interval"][1]),
                           created=d["created"],
                           artifact_version=d.get("artifact_version", ARTIFACT_VERSION),
                           schema_version=d.get("schema_version", SCHEMA_VERSION))


def _torus_percolation_trial(family: UpdateFamily, n: int, p: float,
                             master_seed: int, trial: int) -> bool:
    u = trial_uniforms(master_seed, trial, n * n)
    grid = (u < p).reshape(n, n)
    return bool(closure_grid(grid, family, torus=True).all())


def sample_percolation(plan: TrialPlan, workers: int | None = None) -> RunManifest:
    """Estimate the percolation probability of a p-random torus subset."""
    workers = resolve_workers(workers)
    outcomes = _map_trials(
        lambda t: _torus_percolation_trial(plan.family, plan.n, plan.p,
                                           plan.master_seed, t),
        plan.trials, workers)
    succ = sum(outcomes)
    frac = succ / plan.trials if plan.trials else 0.0
    return RunManifest(plan=plan, outcomes=tuple(outcomes), fraction=frac,
                       interval=wilson_interval(succ, plan.trials),
                       created=datetime.datetime.now(datetime.timezone.utc).isoformat())


def replay_matches(manifest: RunManifest, workers: int | None = None) -> bool:
    """Re-run the manifest's plan and compare outcomes bit for bit."""
    fresh = sample_percolation(manifest.plan, workers=workers)
    return fresh.outcomes == manifest.outcomes


# ---------------------------------------------------------------------------
# critical probability estimation (coupled bisection)


@dataclass(frozen=True)
class Probe:
    p: float
    fraction: float
    interval: tuple[float, float]
    outcomes: tuple[bool, ...]


@dataclass(frozen=True)
class PcEstimate:
    family_name: str
    n: int
    p_hat: float
    bracket: tuple[float, float]
    tolerance: float
    trials_per_probe: int
    master_seed: int
    probes: tuple[Probe, ...]
    degenerate: bool = False

    @property
    def interval_radius(self) -> float:
        return 0.5 * (self.bracket[1] - self.bracket[0])

    def to_dict(self) -> dict:
        return {"schema_version": SCHEMA_VERSION, "kind": "estimate_pc",
                "family": self.family_name, "n": self.n, "p_hat": self.p_hat,
                "bracket": list(self.bracket), "tolerance": self.tolerance,
                "trials_per_probe": self.trials_per_probe,
                "master_seed": self.master_seed, "degenerate": self.degenerate,
                "probes": [{"p": pr.p, "fraction": pr.fraction,
                            "interval": list(pr.interval)} for pr in self.probes]}


def check_coupled_monotonicity(probes) -> bool:
    """Along each sample path, the percolation indicator must be nondecreasing
    in p (all probes of one trial share the same per-site uniforms)."""
    ordered = sorted(probes, key=lambda pr: pr.p)
    for t in range(len(ordered[0].outcomes)):
        prev = False
        for pr in ordered:
            cur = pr.outcomes[t]
            if prev and not cur:
                return False
            prev = cur
    return True


def estimate_pc(family: UpdateFamily, n: int, trials_per_probe: int = 200,
                tolerance: float | None = None, master_seed: int = 0,
                workers: int | None = None) -> PcEstimate:
    """Bisection for the p where the percolation fraction crosses 1/2.

    Sound because percolation probability is nondecreasing in p; the coupled
    sampling (one uniform array per trial, a site is infected at probe p iff
    its uniform is below p) makes each sample path monotone too, which is
    asserted on the full probe ladder.
    """
    if tolerance is None:
        tolerance = 1.0 / (4.0 * math.log(n)) if n > 1 else 0.25
    if tolerance <= 0:
        raise ValueError("tolerance must be positive")
    workers = resolve_workers(workers)

    probes: list[Probe] = []

    def probe(p: float) -> Probe:
        outcomes = _map_trials(
            lambda t: _torus_percolation_trial(family, n, p, master_seed, t),
            trials_per_probe, workers)
        succ = sum(outcomes)
        pr = Probe(p=p, fraction=succ / trials_per_probe,
                   interval=wilson_interval(succ, trials_per_probe),
                   outcomes=tuple(outcomes))
        probes.append(pr)
        return pr

    lo, hi = 0.0, 1.0
    f_lo = probe(lo).fraction
    f_hi = probe(hi).fraction
    name = family.name or "custom"
    if f_lo >= 0.5 or f_hi < 0.5:
        return PcEstimate(name, n, math.nan, (lo, hi), tolerance, trials_per_probe,
                          master_seed, tuple(probes), degenerate=True)

    while hi - lo > tolerance:
        mid = 0.5 * (lo + hi)
        if probe(mid).fraction >= 0.5:
            hi = mid
        else:
            lo = mid

    if not check_coupled_monotonicity(probes):
        raise AssertionError("coupled sample path lost monotonicity in p")

    return PcEstimate(name, n, 0.5 * (lo + hi), (lo, hi), tolerance,
                      trials_per_probe, master_seed, tuple(probes))


# ---------------------------------------------------------------------------
# scaling sweep


@dataclass(frozen=True)
class SweepRow:
    family: str
    n: int
    p_hat: float
    lo: float
    hi: float
    normalized: float

    def csv(self) -> str:
        return (f"{self.family},{self.n},{self.p_hat:.10g},{self.lo:.10g},"
                f"{self.hi:.10g},{self.normalized:.10g}")


SWEEP_HEADER = "family,n,p_hat,lo,hi,normalized"


def normalization(p_hat: float, n: int) -> float:
    """p_hat * log n / (log log n)^2 -- the quantity with the sharp limit."""
    return p_hat * math.log(n) / (math.log(math.log(n)) ** 2)


def scaling_sweep(families, n_list, trials_per_probe: int = 200,
                  master_seed: int = 0, workers: int | None = None,
                  estimates_out: list | None = None) -> list[SweepRow]:
    if list(n_list) != sorted(n_list):
        raise ValueError("n_list must be nondecreasing")
    rows = []
    for family in families:
        for n in n_list:
            est = estimate_pc(family, n, trials_per_probe=trials_per_probe,
                              master_seed=master_seed, workers=workers)
            if estimates_out is not None:
                estimates_out.append(est)
            rows.append(SweepRow(family=est.family_name, n=n, p_hat=est.p_hat,
                                 lo=est.bracket[0], hi=est.bracket[1],
                                 normalized=normalization(est.p_hat, n)))
    return rows


# ---------------------------------------------------------------------------
# growth construction (upper-bound mechanism)


Rect = tuple[int, int, int, int]  # inclusive x0, y0, x1, y1


@dataclass(frozen=True)
class GrowthStage:
    label: str
    index: int
    window: Rect
    assumed: tuple[Rect, ...]   # pre-infected, conditioning of the stage
    fresh: tuple[Rect, ...]     # sampled p-random
    target: tuple[Rect, ...]    # must be infected by the closure
    bound: float                # analytic lower bound from the integer geometry
    real_dims: dict = field(default_factory=dict)

    @property
    def window_sites(self) -> int:
        x0, y0, x1, y1 = self.window
        return (x1 - x0 + 1) * (y1 - y0 + 1)


@dataclass(frozen=True)
class GrowthStageReport:
    stage: GrowthStage
    trials: int
    successes: int
    emp: float
    interval: tuple[float, float]

    def csv(self) -> str:
        return (f"{self.stage.index},{self.stage.label},{self.emp:.10g},"
                f"{self.interval[0]:.10g},{self.interval[1]:.10g},"
                f"{self.stage.bound:.10g}")


GROWTH_HEADER = "stage,event,emp,lo,hi,bound"


def _column_bound(p: float, rows: int, cols: int) -> float:
    # every column holding at least one fresh site suffices for rightward fill
    return (1.0 - (1.0 - p) ** rows) ** cols


def _tworow_bound(p: float, segment: int, steps: int) -> float:
    # each two-row climb needs one fresh site in its width-segment of the top row
    if steps <= 0:
        return 1.0
    return (1.0 - (1.0 - p) ** segment) ** steps


def growth_stages(epsilon: float, p: float,
                  max_window_sites: int = 2 ** 23) -> list[GrowthStage]:
    """The staged rectangles of the constructive growth route.

    Heights and widths are real-valued; the integer geometry floors them and
    both are recorded. Epsilon is replaced by 1/ceil(1/epsilon) so the stage
    count k = 1/eps is an integer.
    """
    if not (0.0 < p < 1.0) or epsilon <= 0:
        raise ValueError("need 0 < p < 1 and epsilon > 0")
    k = math.ceil(1.0 / epsilon)
    eps = 1.0 / k
    logq = math.log(1.0 / p)
    h = eps / p * logq
    H = [math.floor(i * h) for i in range(k + 2)]     # top row of height i*h
    w_real = [p ** (-1.0 - i * eps) for i in range(k + 1)]  # w_real[i] = w_i, i>=1
    W = [0] + [math.floor(w_real[i]) for i in range(1, k + 1)]
    X = [0]
    for i in range(1, k + 1):
        X.append(X[-1] + W[i])

    stages: list[GrowthStage] = []
    col0 = (0, 0, 0, H[1])
    stages.append(GrowthStage(
        label="seed_fill", index=0, window=col0, assumed=(), fresh=(col0,),
        target=(col0,), bound=p ** (H[1] // 2 + 1),
        real_dims={"h": h}))

    for i in range(1, k + 1):
        rows = H[i] + 1
        right = (X[i - 1] + 1, 0, X[i], H[i])
        stages.append(GrowthStage(
            label="right", index=i,
            window=(X[i - 1], 0, X[i], H[i]),
            assumed=((X[i - 1], 0, X[i - 1], H[i]),),
            fresh=(right,), target=(right,),
            bound=_column_bound(p, rows, W[i]),
            real_dims={"w_i": w_real[i], "height": i * h}))

        steps = math.ceil((H[i + 1] - H[i]) / 2)
        seg = max(1, math.floor(w_real[i] / h))
        stages.append(GrowthStage(
            label="up", index=i,
            window=(X[i - 1] + 1, 0, X[i], H[i + 1]),
            assumed=(right,),
            fresh=((X[i - 1] + 1, H[i] + 1, X[i], H[i + 1]),) if H[i + 1] > H[i] else (),
            target=((X[i], 0, X[i], H[i + 1]),),
            bound=_tworow_bound(p, seg, steps),
            real_dims={"w_i": w_real[i], "h": h, "segment": w_real[i] / h}))

    # the four chained events that carry the boundary to the far side
    Hh0 = math.floor((1.0 + eps) / p * logq)
    W1 = math.floor(p ** (-2.0 - eps))
    Hh1 = math.floor(p ** (-1.0 - eps / 2.0))
    AX = math.floor(p ** -5.0)
    BY = math.floor(p ** -3.0)

    hat1 = (X[k] + 1, 0, X[k] + W1, Hh0)
    stages.append(GrowthStage(
        label="hat1_right", index=k + 1,
        window=(X[k], 0, X[k] + W1, Hh0),
        assumed=((X[k], 0, X[k], Hh0),),
        fresh=(hat1,), target=(hat1,),
        bound=_column_bound(p, Hh0 + 1, W1),
        real_dims={"width": p ** (-2.0 - eps), "height": (1.0 + eps) / p * logq}))

    top = max(Hh0, Hh1)
    steps = max(0, math.ceil((Hh1 - Hh0) / 2))
    seg = max(1, math.floor(p ** (-2.0 - eps) / p ** (-1.0 - eps / 2.0)))
    stages.append(GrowthStage(
        label="hat1_up", index=k + 2,
        window=(X[k] + 1, 0, X[k] + W1, top),
        assumed=(hat1,),
        fresh=((X[k] + 1, Hh0 + 1, X[k] + W1, Hh1),) if Hh1 > Hh0 else (),
        target=((X[k] + W1, 0, X[k] + W1, Hh1),),
        bound=_tworow_bound(p, seg, steps),
        real_dims={"height": p ** (-1.0 - eps / 2.0)}))

    hat2 = (X[k] + W1 + 1, 0, AX, Hh1)
    stages.append(GrowthStage(
        label="hat2_right", index=k + 3,
        window=(X[k] + W1, 0, AX, Hh1),
        assumed=((X[k] + W1, 0, X[k] + W1, Hh1),),
        fresh=(hat2,), target=(hat2,),
        bound=_column_bound(p, Hh1 + 1, AX - X[k] - W1),
        real_dims={"width": p ** -5.0 - p ** (-2.0 - eps)}))

    steps = max(0, math.ceil((BY - Hh1) / 2))
    seg = max(1, math.floor((AX - X[k] - W1) / p ** -3.0))
    stages.append(GrowthStage(
        label="final_up", index=k + 4,
        window=(0, 0, AX, BY),
        assumed=(hat2,),
        fresh=((0, 0, AX, BY),),  # everything outside `assumed` is sampled
        target=((AX, 0, AX, BY),),
        bound=_tworow_bound(p, seg, steps),
        real_dims={"a": p ** -5.0, "b": p ** -3.0}))

    for st in stages:
        if st.window_sites > max_window_sites:
            raise MemoryGuardError(
                f"stage {st.label}[{st.index}] needs {st.window_sites} sites "
                f"(cap {max_window_sites}); increase p or the cap")
    return stages


def _rect_slices(window: Rect, rect: Rect) -> tuple[slice, slice]:
    wx0, wy0, _, _ = window
    x0, y0, x1, y1 = rect
    return slice(y0 - wy0, y1 - wy0 + 1), slice(x0 - wx0, x1 - wx0 + 1)


_STAGE_STREAM = {"seed_fill": 1, "right": 2, "up": 3, "hat1_right": 4,
                 "hat1_up": 5, "hat2_right": 6, "final_up": 7}


def _run_stage_trial(stage: GrowthStage, p: float, master_seed: int,
                     trial: int, family: UpdateFamily) -> bool:
    x0, y0, x1, y1 = stage.window
    shape = (y1 - y0 + 1, x1 - x0 + 1)
    grid = np.zeros(shape, dtype=np.bool_)
    rng_u = trial_uniforms(master_seed, trial, shape[0] * shape[1],
                           stream=stage.index * 8 + _STAGE_STREAM[stage.label])
    mask = (rng_u < p).reshape(shape)
    for rect in stage.fresh:
        ys, xs = _rect_slices(stage.window, rect)
        grid[ys, xs] = mask[ys, xs]
    for rect in stage.assumed:
        ys, xs = _rect_slices(stage.window, rect)
        grid[ys, xs] = True
    closed = closure_grid(grid, family, torus=False)
    for rect in stage.target:
        ys, xs = _rect_slices(stage.window, rect)
        if not closed[ys, xs].all():
            return False
    return True


def growth_construction(epsilon: float, p: float, trials: int, master_seed: int,
                        family: UpdateFamily | None = None,
                        workers: int | None = None,
                        max_window_sites: int = 2 ** 23) -> list[GrowthStageReport]:
    """Estimate each stage event's probability by conditioning as the
    construction does: pre-infect the assumed set, sample only the fresh
    region, run the closure, and test the target."""
    from .families import builtin_family
    if family is None:
        family = builtin_family("duarte")
    workers = resolve_workers(workers)
    stages = growth_stages(epsilon, p, max_window_sites=max_window_sites)
    reports = []
    for stage in stages:
        outcomes = _map_trials(
            lambda t: _run_stage_trial(stage, p, master_seed, t, family),
            trials, workers)
        succ = sum(outcomes)
        reports.append(GrowthStageReport(
            stage=stage, trials=trials, successes=succ,
            emp=succ / trials if trials else 0.0,
            interval=wilson_interval(succ, trials)))
    return reports


# ---------------------------------------------------------------------------
# empty-line diagnostic


@dataclass(frozen=True)
class LineCheckReport:
    n: int
    p: float
    run_length: int
    trials: int
    successes: int
    fraction: float
    interval: tuple[float, float]
    analytic_bound: float

    def to_dict(self) -> dict:
        return {"schema_version": SCHEMA_VERSION, "kind": "lines", "n": self.n,
                "p": self.p, "run_length": self.run_length, "trials": self.trials,
                "fraction": self.fraction, "interval": list(self.interval),
                "analytic_bound": self.analytic_bound}


def _max_circular_gap(occupied_1d: np.ndarray) -> int:
    n = occupied_1d.shape[0]
    pos = np.flatnonzero(occupied_1d)
    if pos.size == 0:
        return n
    if pos.size == 1:
        return n - 1
    gaps = np.diff(pos) - 1
    wrap = pos[0] + n - pos[-1] - 1
    return int(max(gaps.max(initial=0), wrap))


def no_empty_line_check(n: int, p: float, master_seed: int, trials: int,
                        workers: int | None = None) -> LineCheckReport:
    """Frequency with which every row and column run of ceil(p^-3) torus sites
    holds at least one infected site."""
    run_length = n if p <= 0.0 else min(n, math.ceil(p ** -3.0))
    workers = resolve_workers(workers)

    def one(trial: int) -> bool:
        u = trial_uniforms(master_seed, trial, n * n)
        grid = (u < p).reshape(n, n)
        for row in grid:
            if _max_circular_gap(row) >= run_length:
                return False
        for col in grid.T:
            if _max_circular_gap(col) >= run_length:
                return False
        return True

    outcomes = _map_trials(one, trials, workers)
    succ = sum(outcomes)
    analytic = 1.0 - 2.0 * n * n * (1.0 - p) ** (p ** -3.0) if p > 0 else -math.inf
    return LineCheckReport(n=n, p=p, run_length=run_length, trials=trials,
                           successes=succ, fraction=succ / trials if trials else 0.0,
                           interval=wilson_interval(succ, trials),
                           analytic_bound=analytic)
