"""Shared fixtures and independent reference implementations.

The references here deliberately avoid the production algorithms: the
minimax oracle decides connectivity of sub-level sets by BFS instead of
union-find, critical heights are taken over explicit pair loops, and
statistics use a plain double loop.  Tests compare the fast paths
against these.
"""

from __future__ import annotations

import numpy as np
import pytest

from spinscape.models import EnergyModel, GraphSpec


@pytest.fixture(scope="session")
def table4() -> EnergyModel:
    """The 4-state workhorse: energies [0, 2, 3, 1] indexed by bits."""
    return EnergyModel.from_table([0.0, 2.0, 3.0, 1.0])


@pytest.fixture(scope="session")
def two_state() -> EnergyModel:
    return EnergyModel.from_table([0.0, 1.0])


@pytest.fixture(scope="session")
def k4() -> EnergyModel:
    return EnergyModel.from_ising(GraphSpec.complete(4, 1.0, 0.5))


@pytest.fixture(scope="session")
def k6() -> EnergyModel:
    return EnergyModel.from_ising(GraphSpec.complete(6, 1.0, 0.5))


def random_table(rng: np.random.Generator, n: int, distinct: bool = False) -> EnergyModel:
    vals = rng.uniform(0.0, 4.0, 1 << n)
    if distinct:
        vals = np.sort(rng.uniform(0.0, 4.0, 1 << n))
        rng.shuffle(vals)
    return EnergyModel.from_table(vals)


# ---------------------------------------------------------------------------
# reference implementations
# ---------------------------------------------------------------------------

def bfs_connected(energies: np.ndarray, n: int, level: float, a: int, b: int) -> bool:
    """Are a and b joined inside the sub-level set {H <= level}?"""
    if energies[a] > level or energies[b] > level:
        return False
    seen = {a}
    queue = [a]
    while queue:
        cur = queue.pop()
        if cur == b:
            return True
        for i in range(n):
            nxt = cur ^ (1 << i)
            if nxt not in seen and energies[nxt] <= level:
                seen.add(nxt)
                queue.append(nxt)
    return False


def reference_minimax(energies: np.ndarray, n: int, a: int, b: int) -> float:
    """Least highest elevation by scanning thresholds with BFS connectivity."""
    for level in sorted(set(float(x) for x in energies)):
        if bfs_connected(energies, n, level, a, b):
            return level
    raise AssertionError("unreachable: hypercube is connected")


def reference_classical_m(energies: np.ndarray, n: int) -> float:
    """Direct all-pairs maximum of H(a,b) - H(a) - H(b) + h_star."""
    size = 1 << n
    h_star = float(energies.min())
    best = -np.inf
    for a in range(size):
        for b in range(size):
            hab = energies[a] if a == b else reference_minimax(energies, n, a, b)
            best = max(best, hab - energies[a] - energies[b] + h_star)
    return float(best)


def reference_modified_m(hf: np.ndarray, n: int) -> float:
    """Direct all-ordered-pairs walk of the canonical flip paths."""
    size = 1 << n
    best = -np.inf
    for a in range(size):
        for b in range(size):
            cur = a
            elev = hf[a]
            for bit in range(n - 1, -1, -1):
                if (a ^ b) >> bit & 1:
                    cur ^= 1 << bit
                    elev = max(elev, hf[cur])
            best = max(best, elev - hf[a] - hf[b])
    return float(best)


def reference_stats(energies: np.ndarray, n: int):
    """Double-loop landscape statistics (exact comparisons)."""
    size = 1 << n
    h_star = min(energies)
    h_max = max(energies)
    local = []
    for s in range(size):
        if all(energies[s ^ (1 << i)] >= energies[s] for i in range(n)):
            local.append(s)
    glob = [s for s in range(size) if energies[s] == h_star]
    above = [e - h_star for e in energies if e > h_star]
    delta = min(above) if above else None
    return h_star, h_max, delta, tuple(local), tuple(glob)
