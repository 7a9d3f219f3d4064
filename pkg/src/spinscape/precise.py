"""Arbitrary-precision spectral gaps and hitting times.

Deeply metastable chains have spectral gaps of order exp(-beta * m),
which drops below float64 resolution (absolute eigensolve error is about
1e-16 of the top of the spectrum) long before the interesting
temperature range is exhausted.  These routines rebuild the symmetrized
generator in mpmath with working precision chosen from the spread of the
modified energies, so the bottom of the spectrum is exact to many digits
at any temperature reachable in double-precision energy tables.
"""

from __future__ import annotations

import math

import mpmath as mp
import numpy as np

from .exact import _as_state_set
from .landscape import ModificationParams, modified_energy_table
from .models import EnergyModel

_GUARD_DPS = 40


def _working_dps(hf: np.ndarray, dps: int | None) -> int:
    if dps is not None:
        return dps
    spread = float(hf.max() - hf.min())
    return max(50, int(spread / math.log(10.0)) + _GUARD_DPS)


def _symmetrized_mp(hf: np.ndarray, n: int) -> mp.matrix:
    size = hf.shape[0]
    vals = [mp.mpf(float(x)) for x in hf]
    S = mp.zeros(size, size)
    inv_n = mp.mpf(1) / n
    for a in range(size):
        diag = mp.mpf(0)
        ha = vals[a]
        for i in range(n):
            b = a ^ (1 << i)
            d = vals[b] - ha
            S[a, b] = -mp.exp(-abs(d) / 2) * inv_n
            diag += mp.exp(-max(d, mp.mpf(0))) * inv_n
        S[a, a] = diag
    return S


def spectral_gap_mp(model: EnergyModel, params: ModificationParams,
                    dps: int | None = None) -> mp.mpf:
    """Second smallest eigenvalue of -L, exact far below float64 range."""
    hf = modified_energy_table(model, params)
    with mp.workdps(_working_dps(hf, dps)):
        S = _symmetrized_mp(hf, model.n)
        ev = mp.eigsy(S, eigvals_only=True)
        vals = sorted(ev[i] for i in range(ev.rows))
        gap = vals[1]
    return gap


def ln_relaxation_mp(model: EnergyModel, params: ModificationParams,
                     dps: int | None = None) -> float:
    """ln(1 / spectral gap) as a float; the natural scale for slope fits."""
    gap = spectral_gap_mp(model, params, dps=dps)
    return float(-mp.log(gap))


def _generator_mp(hf: np.ndarray, n: int) -> tuple[mp.matrix, list[mp.mpf]]:
    size = hf.shape[0]
    vals = [mp.mpf(float(x)) for x in hf]
    L = mp.zeros(size, size)
    inv_n = mp.mpf(1) / n
    for a in range(size):
        total = mp.mpf(0)
        for i in range(n):
            b = a ^ (1 << i)
            rate = mp.exp(-max(vals[b] - vals[a], mp.mpf(0))) * inv_n
            L[a, b] = rate
            total += rate
        L[a, a] = -total
    weights = [mp.exp(-v) for v in vals]
    z = mp.fsum(weights)
    pi = [w / z for w in weights]
    return L, pi


def mean_hitting_time_mp(model: EnergyModel, params: ModificationParams,
                         x: int, B, dps: int | None = None,
                         check_tol: float = 1e-8) -> mp.mpf:
    """E_x of the hitting time of B through both exact routes, cross-checked.

    Same contract as exact.mean_hitting_time, in arbitrary precision:
    the direct Dirichlet solve and the capacity formula must agree to
    ``check_tol`` relative or the call raises.
    """
    x = x.bits if hasattr(x, "bits") else int(x)
    B = _as_state_set(B)
    if x in B:
        return mp.mpf(0)
    hf = modified_energy_table(model, params)
    size = hf.shape[0]
    with mp.workdps(_working_dps(hf, dps)):
        L, pi = _generator_mp(hf, model.n)

        # direct solve of (-L) u = 1 off B
        keep = [s for s in range(size) if s not in set(B)]
        A = mp.zeros(len(keep), len(keep))
        for r, a in enumerate(keep):
            for cidx, b in enumerate(keep):
                A[r, cidx] = -L[a, b]
        rhs = mp.matrix([mp.mpf(1)] * len(keep))
        u = mp.lu_solve(A, rhs)
        direct = u[keep.index(x)]

        # capacity route: equilibrium potential h with h(x)=1, h|B=0
        interior = [s for s in range(size) if s != x and s not in set(B)]
        h = [mp.mpf(0)] * size
        h[x] = mp.mpf(1)
        if interior:
            Ai = mp.zeros(len(interior), len(interior))
            bi = mp.matrix([mp.mpf(0)] * len(interior))
            for r, a in enumerate(interior):
                for cidx, b in enumerate(interior):
                    Ai[r, cidx] = L[a, b]
                bi[r] = -L[a, x]
            sol = mp.lu_solve(Ai, bi)
            for r, a in enumerate(interior):
                h[a] = sol[r]
        cap = mp.mpf(0)
        for a in range(size):
            for i in range(model.n):
                b = a ^ (1 << i)
                cap += pi[a] * L[a, b] * (h[a] - h[b]) ** 2 / 2
        formula = mp.fsum(pi[s] * h[s] for s in range(size)) / cap

        rel = abs(direct - formula) / abs(direct)
        if rel > check_tol:
            raise RuntimeError(f"hitting-time routes disagree at relative {mp.nstr(rel, 5)}")
        result = direct
    return result
