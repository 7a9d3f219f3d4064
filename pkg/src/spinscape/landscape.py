"""The landscape-modified Hamiltonian and tuning of its threshold.

The modification replaces an energy H(s) by the integral

    Hmod(s) = integral from h_star to H(s) of du / (alpha * f((u - c)_+) + 1/beta),

which reproduces beta * (H - h_star) below the threshold c and compresses
the landscape above it.  The transform is strictly increasing in H, so
minima, maxima and the whole ordering of states are preserved.

Closed forms are used where they exist:

* f = 0 or alpha = 0:        beta * (H - h_star)
* f(x) = x^2:                beta * (min(H, c) - h_star)
                               + sqrt(beta/alpha) * atan(sqrt(alpha*beta) * (H - c)_+)
* f(x) = x, alpha = 1:       beta * (min(H, c) - h_star) + log(1 + beta * (H - c)_+)

Everything else goes through adaptive quadrature split at the integrand
kink u = c.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .models import CapacityError, ENUMERATION_LIMIT, EnergyModel

F_KINDS = ("zero", "linear", "quadratic", "sqrt", "custom")

QUAD_REL_TOL = 1e-10
QUAD_MAX_DEPTH = 60


@dataclass(frozen=True)
class ModificationParams:
    """Parameters (f, alpha, c, beta) plus the ground-level reference.

    ``h_star`` is the lower limit of the defining integral.  It defaults
    to the exhaustively computed ground level; callers working above the
    enumeration limit may pass a lower-bound estimate instead, which
    shifts all modified energies by a constant and leaves the dynamics
    unchanged.
    """

    f_kind: str
    alpha: float = 0.0
    c: float = 0.0
    beta: float = 1.0
    h_star: float = 0.0
    f: Callable[[float], float] | None = None

    def __post_init__(self) -> None:
        if self.f_kind not in F_KINDS:
            raise ValueError(f"f kind must be one of {F_KINDS}, got {self.f_kind!r}")
        if self.alpha < 0:
            raise ValueError(f"alpha must be >= 0, got {self.alpha}")
        if not self.beta > 0:
            raise ValueError(f"beta must be > 0, got {self.beta}")
        if self.f_kind == "custom":
            if self.f is None:
                raise ValueError("custom f kind needs a callable f")
            if abs(self.f(0.0)) > 1e-15:
                raise ValueError("f must satisfy f(0) = 0")
            probe = [self.f(x) for x in (0.25, 0.5, 1.0, 2.0, 4.0)]
            if any(y < 0 for y in probe) or any(b < a - 1e-12 for a, b in zip(probe, probe[1:])):
                raise ValueError("f must be non-negative and non-decreasing")
        elif self.f is not None:
            raise ValueError("callable f is only accepted with the custom kind")

    def f_value(self, x: float) -> float:
        if x <= 0.0:
            return 0.0
        if self.f_kind == "zero":
            return 0.0
        if self.f_kind == "linear":
            return x
        if self.f_kind == "quadratic":
            return x * x
        if self.f_kind == "sqrt":
            return np.sqrt(x)
        return float(self.f(x))

    def validate_against(self, model: EnergyModel) -> None:
        """Check h_star <= c <= h_max against the model's exact statistics."""
        stats = model.statistics()
        if not stats.h_star <= self.c <= stats.h_max:
            raise ValueError(
                f"threshold c={self.c} outside [{stats.h_star}, {stats.h_max}]")


def zero_params(beta: float, h_star: float) -> ModificationParams:
    """The unmodified chain at inverse temperature beta (f identically 0)."""
    return ModificationParams(f_kind="zero", alpha=0.0, c=h_star, beta=beta, h_star=h_star)


def modified_energy(model: EnergyModel | None, params: ModificationParams,
                    sigma=None, *, value: float | None = None) -> float:
    """Modified energy of one state (or of a raw energy ``value``)."""
    if value is None:
        value = model.energy(sigma)
    h = float(value)
    if h < params.h_star:
        raise ValueError(
            f"energy {h} below the ground-level reference {params.h_star}; "
            "the reference must lower-bound every energy")
    beta, alpha, c = params.beta, params.alpha, params.c
    if params.f_kind == "zero" or alpha == 0.0:
        return beta * (h - params.h_star)
    if params.f_kind == "quadratic":
        linear = beta * (min(c, h) - params.h_star)
        return float(linear + np.sqrt(beta / alpha) * np.arctan(np.sqrt(alpha * beta) * max(h - c, 0.0)))
    if params.f_kind == "linear" and alpha == 1.0:
        linear = beta * (min(c, h) - params.h_star)
        return float(linear + np.log1p(beta * max(h - c, 0.0)))
    return _quad_modified(params, h)


def _integrand(params: ModificationParams, u: float) -> float:
    return 1.0 / (params.alpha * params.f_value(u - params.c) + 1.0 / params.beta)


def _adaptive_simpson(g, a: float, b: float, fa: float, fm: float, fb: float,
                      whole: float, depth: int) -> float:
    m = 0.5 * (a + b)
    lm, rm = 0.5 * (a + m), 0.5 * (m + b)
    flm, frm = g(lm), g(rm)
    left = (m - a) / 6.0 * (fa + 4.0 * flm + fm)
    right = (b - m) / 6.0 * (fm + 4.0 * frm + fb)
    err = left + right - whole
    if depth <= 0 or abs(err) <= 15.0 * QUAD_REL_TOL * abs(left + right):
        return left + right + err / 15.0
    return (_adaptive_simpson(g, a, m, fa, flm, fm, left, depth - 1)
            + _adaptive_simpson(g, m, b, fm, frm, fb, right, depth - 1))


def _simpson(g, a: float, b: float) -> float:
    if b <= a:
        return 0.0
    m = 0.5 * (a + b)
    fa, fm, fb = g(a), g(m), g(b)
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    return _adaptive_simpson(g, a, b, fa, fm, fb, whole, QUAD_MAX_DEPTH)


def _quad_modified(params: ModificationParams, h: float) -> float:
    # integrand is smooth on each side of the kink at u = c
    g = lambda u: _integrand(params, u)
    lo, hi = params.h_star, h
    if hi <= params.c:
        return _simpson(g, lo, hi)
    return _simpson(g, lo, max(lo, params.c)) + _simpson(g, max(lo, params.c), hi)


def modified_energy_table(model: EnergyModel, params: ModificationParams,
                          limit: int = ENUMERATION_LIMIT) -> np.ndarray:
    """Modified energies of all 2**n states, indexed by state bits.

    Closed-form kinds are evaluated with the same vectorized expressions
    as per-state calls, so the two agree exactly.
    """
    if model.n > limit:
        raise CapacityError(f"modified-energy table needs 2**{model.n} entries, limit is 2**{limit}")
    energies = model.energy_table(limit=limit)
    if float(energies.min()) < params.h_star:
        raise ValueError("ground-level reference exceeds the smallest energy")
    beta, alpha, c = params.beta, params.alpha, params.c
    if params.f_kind == "zero" or alpha == 0.0:
        return beta * (energies - params.h_star)
    if params.f_kind == "quadratic":
        linear = beta * (np.minimum(c, energies) - params.h_star)
        return linear + np.sqrt(beta / alpha) * np.arctan(np.sqrt(alpha * beta) * np.maximum(energies - c, 0.0))
    if params.f_kind == "linear" and alpha == 1.0:
        linear = beta * (np.minimum(c, energies) - params.h_star)
        return linear + np.log1p(beta * np.maximum(energies - c, 0.0))
    return np.array([_quad_modified(params, float(h)) for h in energies])


# ---------------------------------------------------------------------------
# threshold tuning
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TuneReport:
    """Threshold c = h_star + delta and whether the low-temperature theory applies.

    ``valid`` requires delta < min(gap to the cheapest non-global local
    minimum, smallest gap above the ground level, m/4).  The last
    conjunct needs the classical critical height m; when m is not
    supplied the check covers the computable conjuncts only and
    ``partial`` is set.
    """

    c: float
    delta: float
    nonglobal_lm_gap: float | None
    energy_gap: float | None
    m_quarter: float | None
    valid: bool
    partial: bool
    warnings: tuple[str, ...]


def tune_c(model: EnergyModel, delta: float, m: float | None = None) -> TuneReport:
    """Place the threshold delta above the ground level and report validity."""
    if not delta > 0:
        raise ValueError(f"offset delta must be > 0, got {delta}")
    stats = model.statistics()
    warnings: list[str] = []
    bounds: list[float] = []

    nonglobal = stats.nonglobal_local_minima
    lm_gap = None
    if nonglobal:
        energies = model.energy_table()
        lm_gap = float(min(energies[s] for s in nonglobal) - stats.h_star)
        bounds.append(lm_gap)
    else:
        warnings.append("no non-global local minimum; validity governed by the energy gap alone")

    if stats.delta is not None:
        bounds.append(stats.delta)
    else:
        warnings.append("flat landscape: gap above the ground level undefined")

    m_quarter = None
    partial = m is None
    if m is not None:
        m_quarter = m / 4.0
        bounds.append(m_quarter)
    else:
        warnings.append("critical height m not supplied; m/4 conjunct skipped")

    valid = bool(bounds) and all(delta < b for b in bounds)
    return TuneReport(
        c=stats.h_star + delta,
        delta=delta,
        nonglobal_lm_gap=lm_gap,
        energy_gap=stats.delta,
        m_quarter=m_quarter,
        valid=valid,
        partial=partial,
        warnings=tuple(warnings),
    )


def tuned_params(model: EnergyModel, beta: float, delta: float | None = None,
                 m: float | None = None, f_kind: str = "quadratic",
                 alpha: float | None = None) -> tuple[ModificationParams, TuneReport]:
    """Quadratic modification with alpha = beta and a tuned threshold.

    With ``delta`` omitted the offset is half the tightest validity bound,
    so the report always comes back valid on landscapes where the theory
    applies.
    """
    stats = model.statistics()
    if delta is None:
        candidates = []
        if stats.nonglobal_local_minima:
            energies = model.energy_table()
            candidates.append(float(min(energies[s] for s in stats.nonglobal_local_minima) - stats.h_star))
        if stats.delta is not None:
            candidates.append(stats.delta)
        if m is not None and m > 0:
            candidates.append(m / 4.0)
        if not candidates:
            raise ValueError("flat landscape: no usable threshold offset")
        delta = 0.5 * min(candidates)
    report = tune_c(model, delta, m=m)
    params = ModificationParams(
        f_kind=f_kind,
        alpha=beta if alpha is None else alpha,
        c=report.c,
        beta=beta,
        h_star=stats.h_star,
    )
    return params, report


def rem_preset_c(n: int) -> float:
    """Threshold preset for the random energy model: -n*sqrt(2 ln 2) + n^(1/4)/4."""
    return -n * np.sqrt(2.0 * np.log(2.0)) + n ** 0.25 / 4.0


def low_temperature_beta(n: int, eps: float, tuning_gap: float) -> float:
    """Smallest inverse temperature the fixed-temperature guarantees ask for.

    tuning_gap is min(c - h_star, energy gap, m/4); the requirement is
    beta >= (n ln 2 + ln(4/eps)) / tuning_gap.
    """
    if not tuning_gap > 0:
        raise ValueError("tuning gap must be positive")
    return (n * np.log(2.0) + np.log(4.0 / eps)) / tuning_gap
