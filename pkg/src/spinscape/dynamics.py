"""Trajectory simulation of the continuized Metropolis dynamics.

The chain is sampled exactly by uniformization: proposals arrive on a
rate-1 Poisson clock (the walk proposal has total rate 1 and acceptance
probabilities are at most 1, so the clock dominates at every state), a
uniform coordinate is proposed at each tick, and the flip is accepted
with probability exp(-(Hmod(new) - Hmod(old))_+).  No time
discretization error is involved.

Every run owns a counter-based stream keyed by (seed, run index), so
experiments are reproducible run by run: raising the horizon extends a
run's own stream and never perturbs the others, and aggregation order
is fixed by the run index.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .landscape import ModificationParams, modified_energy, modified_energy_table
from .models import ENUMERATION_LIMIT, EnergyModel
from .rng import stream
from .spins import SpinConfig
from .util import wilson_interval

_CHUNK0 = 256
_CHUNK_MAX = 1 << 16


def _as_bits(state) -> int:
    return state.bits if hasattr(state, "bits") else int(state)


# ---------------------------------------------------------------------------
# single trajectories
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Trajectory:
    """Jump record of one run: (time, new state bits) per accepted flip."""

    initial: SpinConfig
    events: tuple[tuple[float, int], ...]
    horizon: float
    seed: int

    def state_at(self, t: float) -> int:
        if t < 0 or t > self.horizon:
            raise ValueError(f"time {t} outside [0, {self.horizon}]")
        bits = self.initial.bits
        for when, new in self.events:
            if when > t:
                break
            bits = new
        return bits

    def final_state(self) -> int:
        return self.events[-1][1] if self.events else self.initial.bits

    def to_csv_rows(self):
        yield 0.0, self.initial.bits
        yield from self.events


def simulate(model: EnergyModel, params: ModificationParams, init,
             horizon: float, seed: int) -> Trajectory:
    """Exact-in-law sample of the chain up to the horizon."""
    if horizon < 0:
        raise ValueError(f"horizon must be >= 0, got {horizon}")
    n = model.n
    init_bits = _as_bits(init)
    table = model.n <= ENUMERATION_LIMIT
    if table:
        hf = modified_energy_table(model, params)
    else:
        h_cur = model.energy(init_bits)
    rng = stream(seed)
    events: list[tuple[float, int]] = []
    bits = init_bits
    t = 0.0
    while True:
        t += rng.standard_exponential()
        if t > horizon:
            break
        i = int(rng.integers(0, n))
        if table:
            d = float(hf[bits ^ (1 << i)] - hf[bits])
        else:
            dh = model.flip_delta(bits, i)
            d = (modified_energy(None, params, value=h_cur + dh)
                 - modified_energy(None, params, value=h_cur))
        accept_p = math.exp(-max(d, 0.0))
        assert accept_p <= 1.0  # uniformization validity: clock rate dominates
        if d <= 0.0 or rng.random() < accept_p:
            bits ^= 1 << i
            if not table:
                h_cur += dh
            events.append((t, bits))
    return Trajectory(initial=SpinConfig(init_bits, n), events=tuple(events),
                      horizon=horizon, seed=seed)


# ---------------------------------------------------------------------------
# chunked kernel driver
# ---------------------------------------------------------------------------

def _drive_fixed(hf: np.ndarray, n: int, start: int, horizon: float,
                 gen: np.random.Generator, target_mask: np.ndarray | None,
                 record_times: np.ndarray | None):
    """Run one walk to hit/horizon; returns (state, status, hit_time, rec_states)."""
    if target_mask is None:
        target_mask, has_target = _kernels.no_target(), False
    else:
        has_target = True
    if record_times is None:
        record_times, rec_states = _kernels.no_records()
    else:
        rec_states = np.empty(record_times.shape[0], dtype=np.int64)
    state, t, rec_idx = start, 0.0, 0
    if has_target and target_mask[state]:
        return state, _kernels.HIT, 0.0, rec_states
    chunk = _CHUNK0
    while True:
        dts = gen.standard_exponential(chunk)
        coords = gen.integers(0, n, chunk)
        us = gen.random(chunk)
        state, t, _, status, hit_time, rec_idx = _kernels.walk_fixed(
            state, t, horizon, dts, coords, us, hf,
            target_mask, has_target, record_times, rec_states, rec_idx)
        if status != _kernels.CHUNK_EXHAUSTED:
            break
        chunk = min(chunk * 2, _CHUNK_MAX)
    if status == _kernels.HORIZON:
        rec_states[rec_idx:] = state  # no more jumps before the horizon
    return state, status, hit_time, rec_states


# ---------------------------------------------------------------------------
# hitting times
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class HittingSample:
    start: int
    target: tuple[int, ...]
    hit_time: float | None
    censored: bool
    seed: int


def _target_mask(size: int, target_set) -> tuple[np.ndarray, tuple[int, ...]]:
    targets = tuple(sorted({_as_bits(s) for s in target_set}))
    if not targets:
        raise ValueError("target set must be nonempty")
    mask = np.zeros(size, dtype=np.bool_)
    for s in targets:
        mask[s] = True
    return mask, targets


def hitting_time(model: EnergyModel, params: ModificationParams, start,
                 target_set, max_horizon: float, seed: int, run: int = 0) -> HittingSample:
    """First entry time into the target set, censored at the horizon."""
    hf = modified_energy_table(model, params)
    mask, targets = _target_mask(hf.shape[0], target_set)
    start_bits = _as_bits(start)
    gen = stream(seed, run)
    _, status, hit_time, _ = _drive_fixed(hf, model.n, start_bits, max_horizon, gen, mask, None)
    hit = status == _kernels.HIT
    return HittingSample(start=start_bits, target=targets,
                         hit_time=hit_time if hit else None,
                         censored=not hit, seed=seed)


@dataclass(frozen=True)
class HittingBatch:
    start: int
    target: tuple[int, ...]
    times: np.ndarray      # nan where censored
    censored: np.ndarray
    horizon: float
    seed: int

    @property
    def n_censored(self) -> int:
        return int(self.censored.sum())

    def mean(self) -> float | None:
        """Mean over uncensored runs; None when everything censored."""
        ok = ~self.censored
        return float(self.times[ok].mean()) if ok.any() else None

    def se(self) -> float | None:
        ok = ~self.censored
        k = int(ok.sum())
        if k < 2:
            return None
        return float(self.times[ok].std(ddof=1) / math.sqrt(k))

    def mean_lower_bound(self) -> float:
        """Censored runs contribute the horizon: a valid lower bound on the mean."""
        vals = np.where(self.censored, self.horizon, self.times)
        return float(vals.mean())


def hitting_times_batch(model: EnergyModel, params: ModificationParams, start,
                        target_set, runs: int, max_horizon: float, seed: int) -> HittingBatch:
    """Independent hitting-time samples, one stream per run index."""
    hf = modified_energy_table(model, params)
    mask, targets = _target_mask(hf.shape[0], target_set)
    start_bits = _as_bits(start)
    times = np.full(runs, np.nan)
    censored = np.zeros(runs, dtype=bool)
    for run in range(runs):
        gen = stream(seed, run)
        _, status, hit_time, _ = _drive_fixed(hf, model.n, start_bits, max_horizon, gen, mask, None)
        if status == _kernels.HIT:
            times[run] = hit_time
        else:
            censored[run] = True
    return HittingBatch(start=start_bits, target=targets, times=times,
                        censored=censored, horizon=max_horizon, seed=seed)


# ---------------------------------------------------------------------------
# experiments
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TunnelingRow:
    start: int
    runs: int
    censored: int
    mean: float | None
    se: float | None
    mean_lower_bound: float


@dataclass(frozen=True)
class TunnelingReport:
    rows: tuple[TunnelingRow, ...]
    target: tuple[int, ...]
    horizon: float
    seed: int
    warnings: tuple[str, ...]
    batches: tuple[tuple[int, int, HittingBatch], ...] = ()  # (start, seed, batch)

    def sup_mean(self) -> float | None:
        means = [r.mean for r in self.rows if r.mean is not None]
        return max(means) if means else None

    def worst_start(self) -> int | None:
        best = None
        for r in self.rows:
            if r.mean is not None and (best is None or r.mean > best.mean):
                best = r
        return best.start if best else None


def tunneling_experiment(model: EnergyModel, params: ModificationParams,
                         runs: int, max_horizon: float, seed: int) -> TunnelingReport:
    """Mean hitting time of the ground set from every local minimum.

    Censored runs never enter the means; they are counted and folded into
    the reported lower bounds only.
    """
    stats = model.statistics()
    warnings = []
    if not stats.unique_global_min:
        warnings.append("global minimum not unique; targeting the whole ground set")
    target = stats.global_minima
    rows = []
    batches = []
    for idx, start in enumerate(stats.local_minima):
        if start in target:
            rows.append(TunnelingRow(start=start, runs=runs, censored=0,
                                     mean=0.0, se=0.0, mean_lower_bound=0.0))
            continue
        batch = hitting_times_batch(model, params, start, target, runs,
                                    max_horizon, seed + idx)
        batches.append((start, seed + idx, batch))
        rows.append(TunnelingRow(start=start, runs=runs, censored=batch.n_censored,
                                 mean=batch.mean(), se=batch.se(),
                                 mean_lower_bound=batch.mean_lower_bound()))
    return TunnelingReport(rows=tuple(rows), target=target, horizon=max_horizon,
                           seed=seed, warnings=tuple(warnings), batches=tuple(batches))


def sample_states_at(model: EnergyModel, params: ModificationParams, start,
                     times, runs: int, seed: int) -> np.ndarray:
    """States X(t) at the given times for independent runs, shape (runs, len(times))."""
    hf = modified_energy_table(model, params)
    record = np.asarray(sorted(float(t) for t in times))
    if record.size and record[0] < 0:
        raise ValueError("times must be nonnegative")
    horizon = float(record[-1]) if record.size else 0.0
    out = np.empty((runs, record.size), dtype=np.int64)
    start_bits = _as_bits(start)
    for run in range(runs):
        gen = stream(seed, run)
        _, _, _, rec = _drive_fixed(hf, model.n, start_bits, horizon, gen, None, record)
        out[run] = rec
    return out


@dataclass(frozen=True)
class GroundTimeReport:
    eps: float
    grid: tuple[float, ...]
    starts: tuple[int, ...]
    fractions: np.ndarray    # starts x grid
    wilson_low: np.ndarray
    estimate: float | None   # smallest grid time certified for every start
    censored: bool
    runs: int
    seed: int


def time_to_ground(model: EnergyModel, params: ModificationParams, eps: float,
                   runs: int, horizon_grid, seed: int, starts=None) -> GroundTimeReport:
    """Empirical first time the chain sits at the ground level with probability 1 - eps.

    The probability is over the state occupied at time t, per starting
    state.  Exhausting every start is infeasible beyond exact scale, so
    the start set defaults to the local minima and the estimate is
    labeled by that choice.
    """
    if not 0.0 < eps < 1.0:
        raise ValueError(f"eps must lie in (0, 1), got {eps}")
    stats = model.statistics()
    energies = model.energy_table()
    ground = energies <= stats.h_star + model.tie_tol
    grid = tuple(sorted(float(t) for t in horizon_grid))
    if starts is None:
        starts = stats.local_minima
    starts = tuple(_as_bits(s) for s in starts)

    record = np.asarray(grid)
    fractions = np.zeros((len(starts), len(grid)))
    lows = np.zeros_like(fractions)
    for si, start in enumerate(starts):
        hits = np.zeros(len(grid), dtype=np.int64)
        hf = modified_energy_table(model, params)
        for run in range(runs):
            gen = stream(seed, run, replica=si)
            _, _, _, rec = _drive_fixed(hf, model.n, start, float(grid[-1]), gen, None, record)
            hits += ground[rec]
        fractions[si] = hits / runs
        lows[si] = [wilson_interval(int(k), runs)[0] for k in hits]

    estimate = None
    for gi, t in enumerate(grid):
        if np.all(lows[:, gi] >= 1.0 - eps):
            estimate = t
            break
    return GroundTimeReport(eps=eps, grid=grid, starts=starts, fractions=fractions,
                            wilson_low=lows, estimate=estimate,
                            censored=estimate is None, runs=runs, seed=seed)
