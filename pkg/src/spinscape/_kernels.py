"""Numba kernels for the uniformized walks.

Each kernel folds one chunk of pre-drawn randomness (exponential
interarrivals, proposal coordinates, acceptance uniforms) into the
trajectory of a single run.  Randomness is drawn outside, from the run's
own counter-based stream, so results are independent of chunk size and
of how runs are scheduled.

Status codes: 0 chunk exhausted, 1 target hit, 2 horizon reached.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

CHUNK_EXHAUSTED = 0
HIT = 1
HORIZON = 2


@njit(cache=True)
def walk_fixed(state, t, horizon, dts, coords, us, hf,
               target_mask, has_target, record_times, rec_states, rec_idx):
    """Advance a fixed-parameter walk through one chunk of ticks.

    Returns (state, t, ticks_used, status, hit_time, rec_idx).
    record_times must be sorted and bounded by horizon; rec_states[j]
    receives the state occupied at record_times[j].
    """
    n_rec = record_times.shape[0]
    for k in range(dts.shape[0]):
        tn = t + dts[k]
        while rec_idx < n_rec and record_times[rec_idx] < tn:
            rec_states[rec_idx] = state
            rec_idx += 1
        if tn > horizon:
            return state, t, k + 1, HORIZON, -1.0, rec_idx
        t = tn
        nb = state ^ (1 << coords[k])
        d = hf[nb] - hf[state]
        if d <= 0.0 or us[k] < math.exp(-d):
            state = nb
            if has_target and target_mask[state]:
                return state, t, k + 1, HIT, t, rec_idx
    return state, t, dts.shape[0], CHUNK_EXHAUSTED, -1.0, rec_idx


SCHEDULE_POWER = 0
SCHEDULE_FROZEN = 1
SCHEDULE_LOG = 2


@njit(cache=True)
def walk_anneal(state, t, horizon, dts, coords, us, below, above,
                schedule_kind, a_exp, param, target_mask, has_target,
                record_times, rec_states, rec_idx):
    """Annealed walk: acceptance re-evaluated at the tick's own time.

    The quadratic modification with alpha = beta gives
    Hmod(s) = beta * below[s] + atan(beta * above[s]) with
    below = min(H, c) - h_star and above = (H - c)_+, so only those two
    tables are needed.  beta at time s is s**a_exp (power schedule),
    param (frozen) or log(1+s)/param (log).  beta = 0 accepts everything.
    """
    n_rec = record_times.shape[0]
    for k in range(dts.shape[0]):
        tn = t + dts[k]
        while rec_idx < n_rec and record_times[rec_idx] < tn:
            rec_states[rec_idx] = state
            rec_idx += 1
        if tn > horizon:
            return state, t, k + 1, HORIZON, -1.0, rec_idx
        t = tn
        if schedule_kind == SCHEDULE_POWER:
            beta = t ** a_exp
        elif schedule_kind == SCHEDULE_FROZEN:
            beta = param
        else:
            beta = math.log(1.0 + t) / param
        nb = state ^ (1 << coords[k])
        d = beta * (below[nb] - below[state]) + math.atan(beta * above[nb]) - math.atan(beta * above[state])
        if d <= 0.0 or us[k] < math.exp(-d):
            state = nb
            if has_target and target_mask[state]:
                return state, t, k + 1, HIT, t, rec_idx
    return state, t, dts.shape[0], CHUNK_EXHAUSTED, -1.0, rec_idx


_EMPTY_TIMES = np.empty(0, dtype=np.float64)
_EMPTY_STATES = np.empty(0, dtype=np.int64)
_EMPTY_MASK = np.zeros(1, dtype=np.bool_)


def no_records() -> tuple[np.ndarray, np.ndarray]:
    return _EMPTY_TIMES, _EMPTY_STATES


def no_target() -> np.ndarray:
    return _EMPTY_MASK
