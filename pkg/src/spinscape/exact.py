"""Dense exact analysis of one continuized Metropolis chain.

The generator on the hypercube has off-diagonal entries

    L(a, b) = (1/n) * exp(-(Hmod(b) - Hmod(a))_+)   for |a ^ b| = 1,

zero elsewhere off the diagonal, and rows summing to zero.  Its
stationary law is pi ~ exp(-Hmod).  Reversibility makes
D^(1/2) (-L) D^(-1/2) symmetric (D = diag(pi)); its entries depend only
on |Hmod(b) - Hmod(a)|, so the symmetrized matrix is assembled directly
without forming the similarity transform.  All spectral quantities come
from one dense symmetric eigensolve.

Float64 resolves spectral gaps down to roughly 1e-12 of the top of the
spectrum; the torpid chains studied here push far below that, and the
``precise`` module carries the same computations in arbitrary precision.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg
from scipy.special import logsumexp

from .landscape import ModificationParams, modified_energy_table
from .models import CapacityError, DENSE_LIMIT, EnergyModel


@dataclass(frozen=True)
class ExactChain:
    """Generator, stationary law and spectral decomposition, all dense."""

    model: EnergyModel
    params: ModificationParams
    hf: np.ndarray
    generator: np.ndarray
    log_pi: np.ndarray
    pi: np.ndarray
    eigenvalues: np.ndarray   # of -L, ascending; eigenvalues[0] == 0
    _symvecs: np.ndarray      # orthonormal eigenvectors of the symmetrized -L

    @property
    def n(self) -> int:
        return self.model.n

    @property
    def size(self) -> int:
        return self.hf.shape[0]

    def spectral_gap(self) -> float:
        return float(max(self.eigenvalues[1], 0.0))

    def relaxation_time(self) -> float:
        gap = self.spectral_gap()
        return np.inf if gap == 0.0 else 1.0 / gap


def build_chain(model: EnergyModel, params: ModificationParams,
                limit: int = DENSE_LIMIT) -> ExactChain:
    """Assemble the dense chain for one (model, params) pair."""
    if model.n > limit:
        raise CapacityError(f"dense analysis handles n <= {limit}, got n = {model.n}")
    n = model.n
    hf = modified_energy_table(model, params)
    size = hf.shape[0]
    states = np.arange(size, dtype=np.int64)

    log_pi = -hf - logsumexp(-hf)
    pi = np.exp(log_pi)

    L = np.zeros((size, size))
    S = np.zeros((size, size))
    for i in range(n):
        nb = states ^ (1 << i)
        d = hf[nb] - hf[states]
        L[states, nb] = np.exp(-np.maximum(d, 0.0)) / n
        S[states, nb] = -np.exp(-np.abs(d) / 2.0) / n
    rowsum = L.sum(axis=1)
    L[states, states] = -rowsum
    S[states, states] = rowsum

    w, v = scipy.linalg.eigh(S)
    w[0] = 0.0  # exact by construction; eigh returns rounding noise
    return ExactChain(model=model, params=params, hf=hf, generator=L,
                      log_pi=log_pi, pi=pi, eigenvalues=w, _symvecs=v)


def spectral_gap(chain: ExactChain) -> float:
    """Second smallest eigenvalue of -L."""
    return chain.spectral_gap()


def gap_lower_bound(model: EnergyModel, params: ModificationParams,
                    m_modified: float | None = None) -> float:
    """(2/n^3) * exp(-m_modified); the refined spectral gap floor."""
    if m_modified is None:
        from .heights import modified_m
        m_modified = modified_m(model, params).m_modified
    return 2.0 / model.n ** 3 * float(np.exp(-m_modified))


def gibbs_distribution(model: EnergyModel, beta: float) -> np.ndarray:
    """The unmodified Gibbs law pi ~ exp(-beta * H) as a dense vector."""
    energies = model.energy_table()
    logw = -beta * (energies - energies.min())
    return np.exp(logw - logsumexp(logw))


# ---------------------------------------------------------------------------
# semigroup and mixing
# ---------------------------------------------------------------------------

def semigroup_row(chain: ExactChain, sigma: int, t: float) -> np.ndarray:
    """Row exp(tL)(sigma, .) via the spectral decomposition."""
    if t < 0:
        raise ValueError(f"time must be >= 0, got {t}")
    v = chain._symvecs
    weights = v[sigma] * np.exp(-chain.eigenvalues * t)
    row = v @ weights
    return row * np.exp((chain.log_pi - chain.log_pi[sigma]) / 2.0)


def semigroup_matrix(chain: ExactChain, t: float) -> np.ndarray:
    if t < 0:
        raise ValueError(f"time must be >= 0, got {t}")
    v = chain._symvecs
    half = np.exp(chain.log_pi / 2.0)
    core = (v * np.exp(-chain.eigenvalues * t)) @ v.T
    return core * (half[None, :] / half[:, None])


def tv_distance(mu, nu) -> float:
    """Total variation distance, half the l1 distance."""
    mu = np.asarray(mu, dtype=float)
    nu = np.asarray(nu, dtype=float)
    if mu.shape != nu.shape:
        raise ValueError(f"length mismatch: {mu.shape} vs {nu.shape}")
    return 0.5 * float(np.abs(mu - nu).sum())


def worst_tv(chain: ExactChain, target_pi: np.ndarray, t: float) -> float:
    """sup over starting states of TV(exp(tL)(s, .), target)."""
    P = semigroup_matrix(chain, t)
    return 0.5 * float(np.abs(P - target_pi[None, :]).sum(axis=1).max())


@dataclass(frozen=True)
class MixingResult:
    time: float
    infinite: bool
    floor: float      # lim of the sup-TV as t -> inf, TV(pi_chain, target)
    epsilon: float


def mixing_time(chain: ExactChain, target_pi: np.ndarray, eps: float,
                rel_tol: float = 1e-3) -> MixingResult:
    """Smallest t with sup-start TV(exp(tL)(s, .), target) <= eps, by bisection.

    The target need not be the chain's own stationary law (the modified
    chain is routinely measured against the unmodified Gibbs law).  When
    the large-time floor TV(pi, target) exceeds eps no finite time works
    and the result carries the infinite flag.
    """
    target_pi = np.asarray(target_pi, dtype=float)
    if target_pi.shape != (chain.size,):
        raise ValueError("target distribution has the wrong length")
    if eps <= 0:
        raise ValueError(f"eps must be positive, got {eps}")
    floor = tv_distance(chain.pi, target_pi)
    if eps >= 1.0:
        return MixingResult(0.0, False, floor, eps)
    if floor > eps:
        return MixingResult(np.inf, True, floor, eps)
    if worst_tv(chain, target_pi, 0.0) <= eps:
        return MixingResult(0.0, False, floor, eps)

    t_rel = chain.relaxation_time()
    hi = 200.0 * t_rel
    for _ in range(200):
        if worst_tv(chain, target_pi, hi) <= eps:
            break
        hi *= 2.0
    else:
        return MixingResult(np.inf, True, floor, eps)
    lo = 0.0
    while hi - lo > rel_tol * hi:
        mid = 0.5 * (lo + hi)
        if worst_tv(chain, target_pi, mid) <= eps:
            hi = mid
        else:
            lo = mid
    return MixingResult(hi, False, floor, eps)


# ---------------------------------------------------------------------------
# potential theory
# ---------------------------------------------------------------------------

def _as_state_set(states) -> list[int]:
    out = sorted({s.bits if hasattr(s, "bits") else int(s) for s in states})
    if not out:
        raise ValueError("state set must be nonempty")
    return out


def dirichlet_form(chain: ExactChain, g: np.ndarray) -> float:
    """<-L g, g>_pi as the edge sum (1/2) sum pi(a) L(a,b) (g(a)-g(b))^2."""
    states = np.arange(chain.size, dtype=np.int64)
    total = 0.0
    for i in range(chain.n):
        nb = states ^ (1 << i)
        total += 0.5 * float(np.sum(chain.pi * chain.generator[states, nb] * (g - g[nb]) ** 2))
    return total


@dataclass(frozen=True)
class CapacityResult:
    value: float
    potential: np.ndarray  # equilibrium potential h: 1 on A, 0 on B, harmonic between


def capacity(chain: ExactChain, A, B) -> CapacityResult:
    """Capacity of (A, B) with its equilibrium potential.

    h solves the discrete Dirichlet problem (harmonic off A and B) and
    cap = <-L h, h>_pi, evaluated as the Dirichlet form over edges.
    """
    A = _as_state_set(A)
    B = _as_state_set(B)
    if set(A) & set(B):
        raise ValueError("A and B must be disjoint")
    h = np.zeros(chain.size)
    h[A] = 1.0
    interior = np.array(sorted(set(range(chain.size)) - set(A) - set(B)), dtype=np.int64)
    if interior.size:
        L = chain.generator
        sub = L[np.ix_(interior, interior)]
        rhs = -L[np.ix_(interior, A)].sum(axis=1)
        try:
            h[interior] = np.linalg.solve(sub, rhs)
        except np.linalg.LinAlgError as exc:
            raise RuntimeError("singular Dirichlet system; generator rates vanished") from exc
    return CapacityResult(value=dirichlet_form(chain, h), potential=h)


def mean_hitting_time(chain: ExactChain, x, B, check_tol: float = 1e-8) -> float:
    """E_x of the hitting time of B, cross-checked through two routes.

    Route one solves (-L) u = 1 off B with u = 0 on B and reads u(x);
    route two evaluates the potential-theoretic identity
    E_x tau_B = (1/cap(x, B)) * sum_y pi(y) h_{x,B}(y).  Disagreement
    beyond ``check_tol`` relative raises, which flags float exhaustion on
    very metastable chains (use the precise module there).
    """
    x = x.bits if hasattr(x, "bits") else int(x)
    B = _as_state_set(B)
    if x in B:
        return 0.0
    # direct solve
    keep = np.array(sorted(set(range(chain.size)) - set(B)), dtype=np.int64)
    L = chain.generator
    try:
        u = np.linalg.solve(-L[np.ix_(keep, keep)], np.ones(keep.size))
    except np.linalg.LinAlgError as exc:
        raise RuntimeError("singular hitting-time system") from exc
    direct = float(u[list(keep).index(x)])
    # capacity formula
    cap = capacity(chain, [x], B)
    formula = float(np.dot(chain.pi, cap.potential)) / cap.value
    if not np.isclose(direct, formula, rtol=check_tol, atol=0.0):
        raise RuntimeError(
            f"hitting-time routes disagree: direct {direct:.12g} vs capacity {formula:.12g}; "
            "the chain is too metastable for float64, use spinscape.precise")
    return direct
