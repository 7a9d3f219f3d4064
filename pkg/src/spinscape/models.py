"""Energy models on the hypercube and their exhaustively computed landscape statistics.

Three model kinds are supported:

* ``table``   -- an explicit array of 2**n energies indexed by state bits;
* ``ising-graph`` -- H(s) = -(J/2) * sum_{(v,w) in E} s_v s_w - (h/2) * sum_v s_v
  on an arbitrary simple graph;
* ``rem``     -- H(s) = -sqrt(n) * X_s with i.i.d. standard normal disorder X.

Landscape statistics (ground level, maximal level, minimal gap above the
ground level, minimal uphill move from a local minimum, local and global
minima) come from full enumeration and are exact.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .rng import stream
from .spins import SpinConfig

ENUMERATION_LIMIT = 24  # 16M states; full tables and statistics up to here
DENSE_LIMIT = 12        # dense generator matrices and eigensolves up to here
ISING_TIE_TOL = 1e-12   # computed Ising energies may tie only up to rounding


class CapacityError(RuntimeError):
    """Raised when an exhaustive operation is asked to exceed its size limit."""


# ---------------------------------------------------------------------------
# graphs
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GraphSpec:
    """Simple undirected graph with ferromagnetic coupling J and field h."""

    n: int
    edges: tuple[tuple[int, int], ...]
    j: float = 1.0
    h: float = 0.5

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError("graph needs at least one vertex")
        seen = set()
        for v, w in self.edges:
            if v == w:
                raise ValueError(f"self-loop at vertex {v}")
            if not (0 <= v < self.n and 0 <= w < self.n):
                raise ValueError(f"edge ({v},{w}) out of range")
            key = (min(v, w), max(v, w))
            if key in seen:
                raise ValueError(f"duplicate edge {key}")
            seen.add(key)

    @classmethod
    def complete(cls, n: int, j: float = 1.0, h: float = 0.5) -> "GraphSpec":
        edges = tuple((v, w) for v in range(n) for w in range(v + 1, n))
        return cls(n, edges, j, h)

    def adjacency(self) -> list[list[int]]:
        adj: list[list[int]] = [[] for _ in range(self.n)]
        for v, w in self.edges:
            adj[v].append(w)
            adj[w].append(v)
        return adj

    def degrees(self) -> list[int]:
        deg = [0] * self.n
        for v, w in self.edges:
            deg[v] += 1
            deg[w] += 1
        return deg

    def is_connected(self) -> bool:
        if self.n == 1:
            return True
        adj = self.adjacency()
        seen = {0}
        queue = [0]
        while queue:
            for w in adj[queue.pop()]:
                if w not in seen:
                    seen.add(w)
                    queue.append(w)
        return len(seen) == self.n


def ising_energy(graph: GraphSpec, sigma: SpinConfig) -> float:
    """H(s) = -(J/2) sum_{(v,w) in E} s_v s_w - (h/2) sum_v s_v."""
    if sigma.n != graph.n:
        raise ValueError(f"configuration has {sigma.n} spins, graph has {graph.n}")
    s = sigma.spins()
    pair = sum(s[v] * s[w] for v, w in graph.edges)
    return -graph.j / 2.0 * pair - graph.h / 2.0 * sum(s)


def ising_flip_delta(graph: GraphSpec, adjacency: list[list[int]], bits: int, i: int) -> float:
    """Energy change of flipping spin i: J*s_i*sum_{w~i} s_w + h*s_i.

    O(deg(i)) against a full re-evaluation; used on trajectories at sizes
    where the 2**n table does not fit.
    """
    s_i = 1.0 if bits >> i & 1 else -1.0
    acc = 0.0
    for w in adjacency[i]:
        acc += 1.0 if bits >> w & 1 else -1.0
    return graph.j * s_i * acc + graph.h * s_i


def random_regular_graph(n: int, r: int, seed: int, j: float = 1.0, h: float = 0.5) -> GraphSpec:
    """Uniform simple r-regular graph via the pairing model with rejection.

    Draws a uniform perfect matching on n*r half-edges and retries until it
    contains no self-loop or parallel edge, which makes the accepted graph
    exactly uniform over simple r-regular graphs.
    """
    if n * r % 2 != 0:
        raise ValueError("n*r must be even")
    if not 3 <= r < n:
        raise ValueError("need n > r >= 3")
    rng = stream(seed)
    stubs = np.repeat(np.arange(n), r)
    while True:
        rng.shuffle(stubs)
        pairs = stubs.reshape(-1, 2)
        edges = set()
        ok = True
        for v, w in pairs:
            v, w = int(v), int(w)
            if v == w:
                ok = False
                break
            key = (min(v, w), max(v, w))
            if key in edges:
                ok = False
                break
            edges.add(key)
        if ok:
            return GraphSpec(n, tuple(sorted(edges)), j, h)


def erdos_renyi_graph(n: int, p: float, seed: int, j: float = 1.0, h: float = 0.5) -> GraphSpec:
    """Erdos-Renyi G(n, p): each of the C(n,2) edges present independently."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"edge probability must lie in [0, 1], got {p}")
    rng = stream(seed)
    edges = []
    for v in range(n):
        for w in range(v + 1, n):
            if rng.random() < p:
                edges.append((v, w))
    return GraphSpec(n, tuple(edges), j, h)


# ---------------------------------------------------------------------------
# random energy model disorder
# ---------------------------------------------------------------------------

_REM_MAGIC = b"SPINREM1"


@dataclass(frozen=True)
class RemDisorder:
    """2**n i.i.d. standard normal draws, reproducible from the seed."""

    n: int
    seed: int
    values: np.ndarray

    @classmethod
    def from_seed(cls, n: int, seed: int) -> "RemDisorder":
        if n > ENUMERATION_LIMIT:
            raise CapacityError(f"REM disorder needs a 2**{n} table; limit is n <= {ENUMERATION_LIMIT}")
        values = stream(seed).standard_normal(1 << n)
        values.flags.writeable = False
        return cls(n, seed, values)

    def save(self, path: str | Path) -> None:
        """Binary layout: 8-byte magic, uint32 n, uint64 seed, 2**n little-endian float64."""
        with open(path, "wb") as fh:
            fh.write(_REM_MAGIC)
            fh.write(struct.pack("<IQ", self.n, self.seed))
            fh.write(self.values.astype("<f8").tobytes())

    @classmethod
    def load(cls, path: str | Path) -> "RemDisorder":
        with open(path, "rb") as fh:
            magic = fh.read(8)
            if magic != _REM_MAGIC:
                raise ValueError(f"not a REM disorder file: bad magic {magic!r}")
            n, seed = struct.unpack("<IQ", fh.read(12))
            values = np.frombuffer(fh.read(), dtype="<f8")
        if values.shape[0] != 1 << n:
            raise ValueError(f"expected {1 << n} disorder values, found {values.shape[0]}")
        values = values.copy()
        values.flags.writeable = False
        return cls(n, seed, values)


def rem_energy(disorder: RemDisorder, sigma: SpinConfig) -> float:
    """H(s) = -sqrt(n) * X_s."""
    if sigma.n != disorder.n:
        raise ValueError(f"configuration has {sigma.n} spins, disorder has {disorder.n}")
    return -np.sqrt(disorder.n) * float(disorder.values[sigma.bits])


# ---------------------------------------------------------------------------
# landscape statistics
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LandscapeStats:
    """Exhaustive landscape summary.

    ``delta`` is the smallest positive gap above the ground level and is
    None on a flat landscape.  ``min_uphill`` is the smallest energy
    increase available from any local minimum and is None when some local
    minimum has a tied neighbor (the quantity would be zero, which the
    torpid-escape bound cannot use).
    """

    h_star: float
    h_max: float
    delta: float | None
    min_uphill: float | None
    local_minima: tuple[int, ...]
    global_minima: tuple[int, ...]
    unique_global_min: bool

    @property
    def nonglobal_local_minima(self) -> tuple[int, ...]:
        gm = set(self.global_minima)
        return tuple(s for s in self.local_minima if s not in gm)


class EnergyModel:
    """Hamiltonian over 2**n states plus cached landscape statistics.

    Instances are immutable apart from internal caches (the energy table
    and statistics are computed once on first use and are deterministic,
    so sharing across threads is safe).
    """

    def __init__(self, kind: str, n: int, *, energies: np.ndarray | None = None,
                 graph: GraphSpec | None = None, disorder: RemDisorder | None = None,
                 tie_tol: float | None = None):
        if kind not in ("table", "ising-graph", "rem"):
            raise ValueError(f"unknown model kind {kind!r}")
        self.kind = kind
        self.n = n
        self.graph = graph
        self.disorder = disorder
        self._energies = energies
        if tie_tol is None:
            tie_tol = ISING_TIE_TOL if kind == "ising-graph" else 0.0
        self.tie_tol = tie_tol
        self._stats: LandscapeStats | None = None
        self._adjacency = graph.adjacency() if graph is not None else None

    # -- constructors ------------------------------------------------------

    @classmethod
    def from_table(cls, energies) -> "EnergyModel":
        arr = np.asarray(energies, dtype=float)
        if arr.ndim != 1 or arr.shape[0] < 2 or arr.shape[0] & (arr.shape[0] - 1):
            raise ValueError("table length must be a power of two >= 2")
        if not np.all(np.isfinite(arr)):
            raise ValueError("energies must be finite")
        n = int(arr.shape[0]).bit_length() - 1
        arr = arr.copy()
        arr.flags.writeable = False
        return cls("table", n, energies=arr)

    @classmethod
    def from_ising(cls, graph: GraphSpec) -> "EnergyModel":
        return cls("ising-graph", graph.n, graph=graph)

    @classmethod
    def from_rem(cls, disorder: RemDisorder) -> "EnergyModel":
        return cls("rem", disorder.n, disorder=disorder)

    # -- evaluation --------------------------------------------------------

    def energy(self, state: SpinConfig | int) -> float:
        bits = state.bits if isinstance(state, SpinConfig) else state
        if isinstance(state, SpinConfig) and state.n != self.n:
            raise ValueError(f"configuration has {state.n} spins, model has {self.n}")
        if self._energies is not None:
            return float(self._energies[bits])
        if self.kind == "ising-graph":
            return ising_energy(self.graph, SpinConfig(bits, self.n))
        raise AssertionError("unreachable")

    def energy_table(self, limit: int = ENUMERATION_LIMIT) -> np.ndarray:
        """All 2**n energies, indexed by state bits."""
        if self._energies is None:
            if self.n > limit:
                raise CapacityError(
                    f"enumerating 2**{self.n} states exceeds the limit of 2**{limit}; "
                    "supply the ground level externally for large systems")
            self._energies = self._build_table()
            self._energies.flags.writeable = False
        return self._energies

    def _build_table(self) -> np.ndarray:
        size = 1 << self.n
        if self.kind == "rem":
            return -np.sqrt(self.n) * self.disorder.values
        # ising-graph: vectorize over all states with bit arithmetic
        states = np.arange(size, dtype=np.int64)
        total = np.zeros(size)
        spin_sum = np.zeros(size)
        spins = {}
        for v in range(self.n):
            spins[v] = (states >> v & 1).astype(float) * 2.0 - 1.0
            spin_sum += spins[v]
        for v, w in self.graph.edges:
            total += spins[v] * spins[w]
        return -self.graph.j / 2.0 * total - self.graph.h / 2.0 * spin_sum

    def flip_delta(self, bits: int, i: int) -> float:
        """H(s^(i)) - H(s) without touching the full table."""
        if self.kind == "ising-graph":
            return ising_flip_delta(self.graph, self._adjacency, bits, i)
        table = self.energy_table()
        return float(table[bits ^ (1 << i)] - table[bits])

    # -- statistics --------------------------------------------------------

    def statistics(self, limit: int = ENUMERATION_LIMIT) -> LandscapeStats:
        if self._stats is None:
            self._stats = landscape_statistics(self, limit=limit)
        return self._stats

    @property
    def h_star(self) -> float:
        return self.statistics().h_star

    def __repr__(self) -> str:
        return f"EnergyModel(kind={self.kind!r}, n={self.n})"


def landscape_statistics(model: EnergyModel, limit: int = ENUMERATION_LIMIT) -> LandscapeStats:
    """Exact statistics by full enumeration of all 2**n states."""
    if model.n > limit:
        raise CapacityError(
            f"landscape statistics enumerate 2**{model.n} states, over the limit 2**{limit}; "
            "supply the ground level externally for large systems")
    energies = model.energy_table(limit=limit)
    tol = model.tie_tol
    h_star = float(energies.min())
    h_max = float(energies.max())

    above = energies[energies > h_star + tol]
    delta = float(above.min() - h_star) if above.size else None

    states = np.arange(energies.shape[0], dtype=np.int64)
    is_local_min = np.ones(energies.shape[0], dtype=bool)
    for i in range(model.n):
        is_local_min &= energies[states ^ (1 << i)] >= energies - tol
    local = states[is_local_min]
    min_uphill = np.inf
    for i in range(model.n):
        gaps = energies[local ^ (1 << i)] - energies[local]
        min_uphill = min(min_uphill, float(gaps.min()))
    if min_uphill <= tol:
        uphill: float | None = None  # tied neighbor at some local minimum
    else:
        uphill = min_uphill

    global_minima = tuple(int(s) for s in states[energies <= h_star + tol])
    return LandscapeStats(
        h_star=h_star,
        h_max=h_max,
        delta=delta,
        min_uphill=uphill,
        local_minima=tuple(int(s) for s in local),
        global_minima=global_minima,
        unique_global_min=len(global_minima) == 1,
    )


# ---------------------------------------------------------------------------
# model specification files
# ---------------------------------------------------------------------------

def model_to_dict(model: EnergyModel) -> dict:
    if model.kind == "table":
        return {"kind": "table", "energies": [float(x) for x in model.energy_table()]}
    if model.kind == "rem":
        return {"kind": "rem", "n": model.n, "seed": model.disorder.seed}
    g = model.graph
    return {
        "kind": "ising-graph",
        "n": g.n,
        "j": g.j,
        "h": g.h,
        "edges": [[v, w] for v, w in g.edges],
    }


def model_from_dict(spec: dict) -> EnergyModel:
    kind = spec.get("kind")
    if kind == "table":
        return EnergyModel.from_table(spec["energies"])
    if kind == "rem":
        return EnergyModel.from_rem(RemDisorder.from_seed(int(spec["n"]), int(spec["seed"])))
    if kind == "ising-graph":
        n = int(spec["n"])
        j = float(spec.get("j", 1.0))
        h = float(spec.get("h", 0.5))
        if "edges" in spec:
            edges = tuple((int(v), int(w)) for v, w in spec["edges"])
            return EnergyModel.from_ising(GraphSpec(n, edges, j, h))
        gen = spec.get("graph", {"type": "complete"})
        gtype = gen.get("type", "complete")
        if gtype == "complete":
            return EnergyModel.from_ising(GraphSpec.complete(n, j, h))
        if gtype == "regular":
            return EnergyModel.from_ising(random_regular_graph(n, int(gen["r"]), int(gen["seed"]), j, h))
        if gtype == "erdos-renyi":
            return EnergyModel.from_ising(erdos_renyi_graph(n, float(gen["p"]), int(gen["seed"]), j, h))
        raise ValueError(f"unknown graph generator {gtype!r}")
    raise ValueError(f"unknown model kind {kind!r}")


def save_model(model: EnergyModel, path: str | Path) -> None:
    Path(path).write_text(json.dumps(model_to_dict(model), indent=2) + "\n")


def load_model(path: str | Path) -> EnergyModel:
    return model_from_dict(json.loads(Path(path).read_text()))
