"""Critical heights of the original and modified landscapes.

The classical critical height is

    m = max over ordered pairs (a, b) of  H(a, b) - H(a) - H(b) + h_star,

where H(a, b) is the least highest elevation over all hypercube paths
from a to b.  It is computed exactly with a Kruskal-style sweep:
activate states in ascending energy order, union activated neighbors,
and read H(a, b) off the energy of the state whose activation first
joins the two components.  The pairwise maximum is attained at
component-merge events, at the pair of per-component energy minimizers,
so one sweep yields m without touching all 4**n pairs.

The modified critical height replaces arbitrary paths by the single
canonical path that flips the differing coordinates one at a time in a
fixed order, and measures elevations in the modified energy.  Canonical
paths of a pair and its reverse traverse the same states in opposite
order, and the maximum runs over ordered pairs, so the computed value
does not depend on which end of the coordinate order goes first; flips
here start from the highest differing bit, matching the printed
bitstring left to right.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass

import numpy as np

from .landscape import ModificationParams, modified_energy_table
from .models import CapacityError, ENUMERATION_LIMIT, EnergyModel

PAIRWISE_LIMIT = 10  # canonical-path maximum walks all ordered pairs


@dataclass(frozen=True)
class SaddleReport:
    """Critical heights with their attaining pairs.

    ``pair`` orders the classical maximizer as (metastable minimum,
    ground-side minimum).  Fields for the height not requested stay None.
    """

    n: int
    m: float | None = None
    pair: tuple[int, int] | None = None
    saddle_state: int | None = None
    saddle_energy: float | None = None
    m_modified: float | None = None
    mod_pair: tuple[int, int] | None = None
    mod_saddle_state: int | None = None
    mod_saddle_value: float | None = None

    def to_dict(self) -> dict:
        def bitstr(s):
            return None if s is None else format(s, f"0{self.n}b")

        d = asdict(self)
        d["pair"] = None if self.pair is None else [bitstr(self.pair[0]), bitstr(self.pair[1])]
        d["mod_pair"] = None if self.mod_pair is None else [bitstr(self.mod_pair[0]), bitstr(self.mod_pair[1])]
        d["saddle_state"] = bitstr(self.saddle_state)
        d["mod_saddle_state"] = bitstr(self.mod_saddle_state)
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def merged(self, other: "SaddleReport") -> "SaddleReport":
        """Combine a classical-part report with a modified-part report."""
        return SaddleReport(
            n=self.n,
            m=self.m if self.m is not None else other.m,
            pair=self.pair or other.pair,
            saddle_state=self.saddle_state if self.saddle_state is not None else other.saddle_state,
            saddle_energy=self.saddle_energy if self.saddle_energy is not None else other.saddle_energy,
            m_modified=self.m_modified if self.m_modified is not None else other.m_modified,
            mod_pair=self.mod_pair or other.mod_pair,
            mod_saddle_state=self.mod_saddle_state if self.mod_saddle_state is not None else other.mod_saddle_state,
            mod_saddle_value=self.mod_saddle_value if self.mod_saddle_value is not None else other.mod_saddle_value,
        )


class _UnionFind:
    __slots__ = ("parent", "min_energy", "min_state")

    def __init__(self, size: int, energies: np.ndarray):
        self.parent = list(range(size))
        self.min_energy = [float(e) for e in energies]
        self.min_state = list(range(size))

    def find(self, v: int) -> int:
        p = self.parent
        while p[v] != v:
            p[v] = p[p[v]]
            v = p[v]
        return v

    def union(self, a: int, b: int) -> int:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return ra
        self.parent[rb] = ra
        if self.min_energy[rb] < self.min_energy[ra]:
            self.min_energy[ra] = self.min_energy[rb]
            self.min_state[ra] = self.min_state[rb]
        return ra


def _ascending_states(energies: np.ndarray) -> np.ndarray:
    # ties broken by state index for determinism
    return np.argsort(energies, kind="stable")


def minimax_elevation(model: EnergyModel, eta, sigma, limit: int = ENUMERATION_LIMIT) -> float:
    """Least highest elevation over all paths from eta to sigma."""
    if model.n > limit:
        raise CapacityError(f"minimax elevation enumerates 2**{model.n} states (limit 2**{limit})")
    a = eta.bits if hasattr(eta, "bits") else int(eta)
    b = sigma.bits if hasattr(sigma, "bits") else int(sigma)
    energies = model.energy_table(limit=limit)
    if a == b:
        return float(energies[a])
    uf = _UnionFind(energies.shape[0], energies)
    active = np.zeros(energies.shape[0], dtype=bool)
    for w in _ascending_states(energies):
        w = int(w)
        active[w] = True
        for i in range(model.n):
            nb = w ^ (1 << i)
            if active[nb]:
                uf.union(w, nb)
        if uf.find(a) == uf.find(b):
            return float(energies[w])
    raise AssertionError("hypercube is connected; unreachable")


def classical_m(model: EnergyModel, limit: int = ENUMERATION_LIMIT) -> SaddleReport:
    """Exact classical critical height with its attaining pair.

    At each merge event caused by activating state w, the best pair drawn
    from two distinct joining components is the pair of their energy
    minimizers, giving contribution E(w) minus the two smallest component
    minima plus h_star.  The sweep maximum over events equals the maximum
    over all ordered pairs; the attaining pair consists of an energy
    minimizer of a sub-level component (always a local minimum) on each
    side, the lower of the two sitting at the ground level.
    """
    if model.n > limit:
        raise CapacityError(f"critical height enumerates 2**{model.n} states (limit 2**{limit})")
    energies = model.energy_table(limit=limit)
    h_star = float(energies.min())
    uf = _UnionFind(energies.shape[0], energies)
    active = np.zeros(energies.shape[0], dtype=bool)

    best = -np.inf
    best_pair: tuple[int, int] | None = None
    best_saddle: int | None = None
    for w in _ascending_states(energies):
        w = int(w)
        active[w] = True
        roots = []
        for i in range(model.n):
            nb = w ^ (1 << i)
            if active[nb]:
                r = uf.find(nb)
                if r not in roots:
                    roots.append(r)
        if roots:
            # participating components: {w} plus each neighbor component
            mins = [(float(energies[w]), w)] + [(uf.min_energy[r], uf.min_state[r]) for r in roots]
            mins.sort()
            contribution = float(energies[w]) - mins[0][0] - mins[1][0] + h_star
            if contribution > best:
                best = contribution
                # metastable side first, ground side second
                best_pair = (mins[1][1], mins[0][1])
                best_saddle = w
            root = w
            for r in roots:
                root = uf.union(root, r)
    if best_pair is None:  # single-state model
        best, best_pair, best_saddle = 0.0, (0, 0), 0
    return SaddleReport(
        n=model.n,
        m=float(best),
        pair=best_pair,
        saddle_state=best_saddle,
        saddle_energy=float(energies[best_saddle]),
    )


def _descending_prefixes(mask: int) -> list[int]:
    """Cumulative flips of the set bits of mask, highest bit first."""
    prefixes = [0]
    acc = 0
    for b in range(mask.bit_length() - 1, -1, -1):
        if mask >> b & 1:
            acc |= 1 << b
            prefixes.append(acc)
    return prefixes


def canonical_path(eta: int, sigma: int) -> list[int]:
    """The unique one-coordinate-at-a-time path used by the modified height."""
    return [eta ^ p for p in _descending_prefixes(eta ^ sigma)]


def modified_m(model: EnergyModel, params: ModificationParams,
               limit: int = PAIRWISE_LIMIT) -> SaddleReport:
    """Critical height of the modified landscape over canonical paths.

    Walks every ordered pair grouped by XOR difference: for a fixed
    difference mask the canonical paths of all 2**n pairs visit the same
    flip prefixes, so each mask costs a handful of vectorized table
    lookups instead of a per-pair walk.
    """
    if model.n > limit:
        raise CapacityError(
            f"modified critical height walks 4**{model.n} pairs (limit n <= {limit})")
    hf = modified_energy_table(model, params)
    size = hf.shape[0]
    states = np.arange(size, dtype=np.int64)

    best = -np.inf
    best_eta = best_mask = 0
    for mask in range(size):
        elev = hf.copy()
        acc = 0
        for b in range(model.n - 1, -1, -1):
            if mask >> b & 1:
                acc |= 1 << b
                np.maximum(elev, hf[states ^ acc], out=elev)
        contrib = elev - hf - hf[states ^ mask]
        k = int(np.argmax(contrib))
        if contrib[k] > best:
            best = float(contrib[k])
            best_eta, best_mask = k, mask

    eta, sigma = best_eta, best_eta ^ best_mask
    path = canonical_path(eta, sigma)
    top = max(path, key=lambda s: hf[s])
    return SaddleReport(
        n=model.n,
        m_modified=best,
        mod_pair=(eta, sigma),
        mod_saddle_state=int(top),
        mod_saddle_value=float(hf[top]),
    )


def modified_m_upper_bound(model: EnergyModel, params: ModificationParams) -> tuple[float, bool]:
    """max Hmod - min Hmod over non-global local minima.

    Returns (bound, fallback): with no non-global local minimum the bound
    degrades to max Hmod minus the second-lowest Hmod and fallback is True.
    """
    hf = modified_energy_table(model, params)
    stats = model.statistics()
    nonglobal = stats.nonglobal_local_minima
    if nonglobal:
        floor = min(float(hf[s]) for s in nonglobal)
        return float(hf.max()) - floor, False
    second = float(np.partition(hf, 1)[1])
    return float(hf.max()) - second, True


def full_saddle_report(model: EnergyModel, params: ModificationParams,
                       limit: int = PAIRWISE_LIMIT) -> SaddleReport:
    """Classical and modified heights in one report."""
    return classical_m(model).merged(modified_m(model, params, limit=limit))
