"""Power-law cooling and the time-inhomogeneous annealed chain.

The schedule is beta_t = t**a with a in (0, 1); the chain at time s is
the fixed-temperature modified dynamics with the quadratic modification
and alpha = beta both equal to beta_s.  Because every acceptance
probability is at most 1 uniformly in time, a rate-1 Poisson clock
dominates the whole schedule and thinning gives exact samples: at a tick
at time s, propose a uniform coordinate and accept with the probability
evaluated at beta_s.  beta_0 = 0 makes the t = 0 modified energy vanish
identically, so early ticks accept everything: no special-casing.

The theory's horizon constants are evaluated for reference; they are
astronomically conservative at desk scale and are reported, never used
as test runtimes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .models import EnergyModel
from .rng import stream
from .spins import SpinConfig
from .dynamics import Trajectory, _as_bits, _CHUNK0, _CHUNK_MAX
from .util import wilson_interval


@dataclass(frozen=True)
class Schedule:
    """Inverse-temperature trajectory with its drift bound.

    kind "power": beta_t = t**a, the schedule carrying the long-time
    convergence guarantee.  kind "log": beta_t = ln(1 + t) / e_scale, the classical
    baseline, available for side-by-side runs on the same simulator.
    kind "frozen": beta_t constant (used to cross-check the annealed
    simulator against the fixed-temperature one).  gamma_at is the
    schedule's derivative times the landscape oscillation, the quantity
    the convergence proof compares against the spectral gap floor.
    """

    kind: str = "power"
    a: float | None = None
    beta_const: float | None = None
    e_scale: float | None = None
    oscillation: float = 0.0

    def __post_init__(self) -> None:
        if self.kind == "power":
            if self.a is None or not 0.0 < self.a < 1.0:
                raise ValueError(f"power schedule needs a in (0, 1), got {self.a}")
        elif self.kind == "frozen":
            if self.beta_const is None or self.beta_const < 0:
                raise ValueError("frozen schedule needs beta_const >= 0")
        elif self.kind == "log":
            if self.e_scale is None or self.e_scale <= 0:
                raise ValueError("log schedule needs e_scale > 0")
        else:
            raise ValueError(f"unknown schedule kind {self.kind!r}")
        if self.oscillation < 0:
            raise ValueError("oscillation must be >= 0")

    def beta_at(self, t: float) -> float:
        if self.kind == "frozen":
            return self.beta_const
        if self.kind == "log":
            return math.log1p(t) / self.e_scale
        return t ** self.a

    def beta_derivative(self, t: float) -> float:
        if self.kind == "frozen":
            return 0.0
        if self.kind == "log":
            return 1.0 / (self.e_scale * (1.0 + t))
        if t <= 0.0:
            return math.inf
        return self.a * t ** (self.a - 1.0)

    def gamma_at(self, t: float) -> float:
        return self.beta_derivative(t) * self.oscillation

    @classmethod
    def power(cls, a: float, model: EnergyModel) -> "Schedule":
        stats = model.statistics()
        return cls(kind="power", a=a, oscillation=stats.h_max - stats.h_star)


@dataclass(frozen=True)
class HorizonConstants:
    """The four horizon scales of the convergence guarantee, plus inputs."""

    n: int
    a: float
    eps: float
    delta: float
    oscillation: float
    t0: float
    tau1: float
    tau2: float
    tau3: float

    def horizon(self) -> float:
        return max(self.t0, self.tau1, self.tau2, self.tau3)


def horizon_constants(model: EnergyModel, a: float, eps: float, delta: float) -> HorizonConstants:
    """Evaluate t0 and tau1..tau3 exactly as the guarantee states them.

    tau3 contains exp(4 * t0) inside a logarithm; it is expanded
    analytically (ln 3/eps^2 + 4 t0 + a ln t0 + ln oscillation) since the
    inner exponential overflows for any nontrivial t0.
    """
    if not 0.0 < a < 1.0:
        raise ValueError(f"a must lie in (0, 1), got {a}")
    if eps <= 0:
        raise ValueError(f"eps must be positive, got {eps}")
    if delta <= 0:
        raise ValueError(f"delta must be positive, got {delta}")
    stats = model.statistics()
    osc = stats.h_max - stats.h_star
    if osc <= 0:
        raise ValueError("flat landscape: oscillation is zero")
    n = model.n
    poly = n ** 3 * math.exp(math.pi / 2.0) / 2.0

    t0 = (a * osc * (1.0 + eps ** 2 / 3.0) * 3.0 * n ** 3 * math.exp(math.pi / 2.0)
          / (4.0 * eps ** 2)) ** (1.0 / (1.0 - a))
    tau1 = ((1.0 / delta) * ((n + 1) * math.log(2.0) + math.log(1.0 / eps))) ** (1.0 / a)
    tau2 = max((poly * osc) ** (1.0 / (1.0 - a)),
               poly * math.log(3.0 * (2 ** n + 1) / eps ** 2))
    tau3 = poly * (math.log(3.0 / eps ** 2) + 4.0 * t0 + a * math.log(t0) + math.log(osc))
    return HorizonConstants(n=n, a=a, eps=eps, delta=delta, oscillation=osc,
                            t0=t0, tau1=tau1, tau2=tau2, tau3=tau3)


# ---------------------------------------------------------------------------
# annealed simulation
# ---------------------------------------------------------------------------

def _anneal_tables(model: EnergyModel, c: float, h_star: float | None):
    energies = model.energy_table()
    if h_star is None:
        h_star = model.statistics().h_star
    below = np.minimum(energies, c) - h_star
    above = np.maximum(energies - c, 0.0)
    return below, above


def simulate_annealing(model: EnergyModel, c: float, schedule: Schedule, init,
                       horizon: float, seed: int, h_star: float | None = None) -> Trajectory:
    """Exact-in-law sample of the annealed chain up to the horizon."""
    if horizon < 0:
        raise ValueError(f"horizon must be >= 0, got {horizon}")
    below, above = _anneal_tables(model, c, h_star)
    n = model.n
    bits = _as_bits(init)
    rng = stream(seed)
    events: list[tuple[float, int]] = []
    t = 0.0
    while True:
        t += rng.standard_exponential()
        if t > horizon:
            break
        beta = schedule.beta_at(t)
        i = int(rng.integers(0, n))
        nb = bits ^ (1 << i)
        d = (beta * (below[nb] - below[bits])
             + math.atan(beta * above[nb]) - math.atan(beta * above[bits]))
        if d <= 0.0 or rng.random() < math.exp(-d):
            bits = nb
            events.append((t, bits))
    return Trajectory(initial=SpinConfig(_as_bits(init), n), events=tuple(events),
                      horizon=horizon, seed=seed)


def _drive_anneal(below, above, n, schedule: Schedule, start: int, horizon: float,
                  gen, record_times: np.ndarray):
    if schedule.kind == "power":
        kind, a_exp, param = _kernels.SCHEDULE_POWER, schedule.a, 0.0
    elif schedule.kind == "frozen":
        kind, a_exp, param = _kernels.SCHEDULE_FROZEN, 0.0, schedule.beta_const
    else:
        kind, a_exp, param = _kernels.SCHEDULE_LOG, 0.0, schedule.e_scale
    rec_states = np.empty(record_times.shape[0], dtype=np.int64)
    target_mask = _kernels.no_target()
    state, t, rec_idx = start, 0.0, 0
    chunk = _CHUNK0
    while True:
        dts = gen.standard_exponential(chunk)
        coords = gen.integers(0, n, chunk)
        us = gen.random(chunk)
        state, t, _, status, _, rec_idx = _kernels.walk_anneal(
            state, t, horizon, dts, coords, us, below, above, kind, a_exp, param,
            target_mask, False, record_times, rec_states, rec_idx)
        if status != _kernels.CHUNK_EXHAUSTED:
            break
        chunk = min(chunk * 2, _CHUNK_MAX)
    rec_states[rec_idx:] = state
    return rec_states


def anneal_states_at(model: EnergyModel, c: float, schedule: Schedule, start,
                     times, runs: int, seed: int, h_star: float | None = None,
                     replica: int = 0) -> np.ndarray:
    """Annealed states X(t) at the given times, shape (runs, len(times))."""
    below, above = _anneal_tables(model, c, h_star)
    record = np.asarray(sorted(float(t) for t in times))
    horizon = float(record[-1]) if record.size else 0.0
    out = np.empty((runs, record.size), dtype=np.int64)
    start_bits = _as_bits(start)
    for run in range(runs):
        gen = stream(seed, run, replica=replica)
        out[run] = _drive_anneal(below, above, model.n, schedule, start_bits,
                                 horizon, gen, record)
    return out


@dataclass(frozen=True)
class ExceedanceCurve:
    delta: float
    grid: tuple[float, ...]
    starts: tuple[int, ...]
    fractions: np.ndarray   # starts x grid, P(H(X_t) >= h_star + delta)
    ci_low: np.ndarray
    ci_high: np.ndarray
    runs: int
    seed: int


def success_probability(model: EnergyModel, c: float, schedule: Schedule,
                        delta: float, horizon_grid, runs: int, seed: int,
                        starts=None, h_star: float | None = None) -> ExceedanceCurve:
    """Empirical exceedance P(H(X_t) >= h_star + delta) along the horizon grid.

    The approximation gap must satisfy delta < c - h_star; that
    precondition is enforced here.
    """
    stats = model.statistics()
    ref = stats.h_star if h_star is None else h_star
    if not 0.0 < delta < c - ref:
        raise ValueError(f"need 0 < delta < c - h_star = {c - ref}, got {delta}")
    energies = model.energy_table()
    exceed = energies >= ref + delta
    grid = tuple(sorted(float(t) for t in horizon_grid))
    if starts is None:
        starts = stats.local_minima
    starts = tuple(_as_bits(s) for s in starts)

    fractions = np.zeros((len(starts), len(grid)))
    lo = np.zeros_like(fractions)
    hi = np.zeros_like(fractions)
    for si, start in enumerate(starts):
        states = anneal_states_at(model, c, schedule, start, grid, runs, seed,
                                  h_star=h_star, replica=si)
        counts = exceed[states].sum(axis=0)
        fractions[si] = counts / runs
        for gi, k in enumerate(counts):
            lo[si, gi], hi[si, gi] = wilson_interval(int(k), runs)
    return ExceedanceCurve(delta=delta, grid=grid, starts=starts,
                           fractions=fractions, ci_low=lo, ci_high=hi,
                           runs=runs, seed=seed)
