"""Two-step minimisation of service effective energy over (psi, lambda_e).

Step 1 turns the delay budget into a per-cache-size critical edge
density: cache size fixes the fiber-miss term, and the cooperative
backhaul delay falls monotonically with density, so the tightest density
meeting the budget is a root of a monotone equation.  Step 2 scans the
resulting feasible pairs for the minimum areal system energy.  Interior
densities above the critical one also meet the budget but always cost
more energy, so only critical pairs need scoring.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from . import latency, multipath
from .energy import system_energy
from .multipath import MULTIPATH, SCHEMES, SINGLE_PATH
from .numerics import NumericsError, find_root_monotone
from .popularity import zipf

_SCHEMES = SCHEMES

_DENSITY_TOL = 1e-16


class NoFeasiblePairError(RuntimeError):
    """No cache size admits a density meeting the delay budget."""

    def __init__(self, budget):
        super().__init__(
            f"no feasible (psi, lambda_e) pair for reduced delay budget "
            f"{budget:.6g} s")
        self.budget = budget


class DensityBracketError(RuntimeError):
    """The critical-density equation has no root in the searched range."""

    def __init__(self, psi, lo, hi):
        super().__init__(
            f"no critical density for psi={psi} within "
            f"[{lo:.6g}, {hi:.6g}] per m^2")
        self.searched = (lo, hi)


@dataclass(frozen=True)
class FeasiblePair:
    """A cache size with the smallest density meeting the delay budget.

    ``residual`` is the absolute budget mismatch at the returned density;
    ``at_lower_bound`` marks pairs where the budget is slack across the
    whole search range and the density was clamped to its lower end.
    """

    psi: int
    lambda_e_crit: float
    residual: float
    at_lower_bound: bool = False


@dataclass(frozen=True)
class OptimizationOutcome:
    """Result of the two-step search."""

    best_pair: FeasiblePair
    e_sys_min: float
    feasible_set: tuple
    skipped_psi: tuple


def reduced_delay_budget(s, quad=None):
    """Delay budget left for backhaul + fiber after the fixed stages.

    The uplink, routing-delivery and access delays do not depend on the
    cache size or the edge density, so they are subtracted from the
    end-to-end budget once.  May be <= 0, in which case nothing is
    feasible downstream.
    """
    return (s.d_max
            - latency.uplink_request_delay(s, quad)
            - latency.deli_delay(s, quad)
            - latency.access_delay(s, quad))


def _backhaul_fn(s, scheme):
    if scheme not in _SCHEMES:
        raise ValueError(f"unknown scheme {scheme!r}")
    b = 1 if scheme == SINGLE_PATH else s.b_paths

    def fn(lam):
        return multipath.multipath_backhaul_delay(s, b=b, lambda_e=lam)

    return fn, b


def _density_bracket(s, b):
    # Farthest cooperative source must stay within r_max; below that
    # density the plan itself is infeasible regardless of delay.
    c_b = math.exp(math.lgamma(b + 0.5) - math.lgamma(b)) / math.sqrt(math.pi)
    lo = max(s.lambda_m, (c_b / s.r_max) ** 2 * (1.0 + 1e-12))
    return lo, s.lambda_s


def critical_edc_density(s, psi, budget, scheme=MULTIPATH, quad=None):
    """Smallest edge density meeting the reduced budget at cache size psi.

    Returns
    -------
    FeasiblePair or None
        ``None`` when the fiber-miss term alone exceeds the budget (no
        density can help).

    Raises
    ------
    DensityBracketError
        If even the densest allowed deployment misses the budget.
    """
    if not 1 <= psi <= s.k_total:
        raise ValueError(f"psi {psi} outside [1, {s.k_total}]")
    model = zipf(s.beta, s.k_total)
    fiber_term = latency.fiber_delay(s) * (1.0 - float(model.q[:psi].sum()))
    return _critical_density(s, psi, fiber_term, budget, scheme)


def _critical_density(s, psi, fiber_term, budget, scheme):
    if fiber_term > budget:
        return None
    bh, b = _backhaul_fn(s, scheme)
    lo, hi = _density_bracket(s, b)
    if lo >= hi:
        raise DensityBracketError(psi, lo, hi)

    def g(lam):
        return bh(lam) + fiber_term - budget

    g_lo = g(lo)
    if g_lo <= 0.0:
        # budget slack everywhere reachable: clamp to the lower bound
        return FeasiblePair(psi=psi, lambda_e_crit=lo, residual=0.0,
                            at_lower_bound=True)
    if g(hi) > 0.0:
        raise DensityBracketError(psi, lo, hi)
    try:
        root = find_root_monotone(g, lo, hi, tol=_DENSITY_TOL)
    except NumericsError as exc:
        raise DensityBracketError(psi, lo, hi) from exc
    return FeasiblePair(psi=psi, lambda_e_crit=root, residual=abs(g(root)))


def optimize_cache_density(s, em, scheme=MULTIPATH, quad=None, jobs=None):
    """Minimise areal system energy over feasible (psi, density) pairs.

    Scans every cache size, solves its critical density (skipping sizes
    whose fiber-miss term already busts the budget or that need a denser
    deployment than allowed), then returns the energy-minimising pair.
    Ties break towards the smaller cache size, then the smaller density.

    Parameters
    ----------
    s : NetworkScenario
    em : EnergyModel
    scheme : str
        ``"multipath"`` or ``"single-path"`` backhaul.
    jobs : int, optional
        Worker threads for the per-cache-size solves; the outcome is
        identical for any value.

    Raises
    ------
    NoFeasiblePairError
        If no cache size is feasible (carries the reduced budget).
    """
    budget = reduced_delay_budget(s, quad)
    model = zipf(s.beta, s.k_total)
    fiber = latency.fiber_delay(s)
    hit_cum = model.q.cumsum()

    def solve(psi):
        fiber_term = fiber * (1.0 - float(hit_cum[psi - 1]))
        try:
            return _critical_density(s, psi, fiber_term, budget, scheme)
        except DensityBracketError:
            return None

    sizes = range(1, s.k_total + 1)
    if budget <= 0.0:
        raise NoFeasiblePairError(budget)
    if jobs and jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            solved = list(pool.map(solve, sizes))
    else:
        solved = [solve(psi) for psi in sizes]

    feasible = tuple(pair for pair in solved if pair is not None)
    skipped = tuple(psi for psi, pair in zip(sizes, solved) if pair is None)
    if not feasible:
        raise NoFeasiblePairError(budget)

    def score(pair):
        e = system_energy(s, em, pair.psi, lambda_e=pair.lambda_e_crit).total
        return (e, pair.psi, pair.lambda_e_crit)

    scored = [(score(pair), pair) for pair in feasible]
    (e_min, _, _), best = min(scored, key=lambda item: item[0])
    return OptimizationOutcome(best_pair=best, e_sys_min=e_min,
                               feasible_set=feasible, skipped_psi=skipped)
