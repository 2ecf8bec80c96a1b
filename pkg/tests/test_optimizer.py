import pytest

from mcrnet import latency, multipath
from mcrnet.energy import load_energy_model, system_energy
from mcrnet.multipath import SINGLE_PATH
from mcrnet.optimizer import (DensityBracketError, NoFeasiblePairError,
                              critical_edc_density, optimize_cache_density,
                              reduced_delay_budget)
from mcrnet.popularity import hit_probability, zipf
from mcrnet.scenario import load_scenario

# frozen root for psi = 144 at the documented defaults
CRIT_DENSITY_PSI144 = 1.3727228646865123e-05


@pytest.fixture(scope="module")
def scenario():
    return load_scenario()


@pytest.fixture(scope="module")
def energy():
    return load_energy_model()


def test_budget_is_total_minus_fixed_stages(scenario):
    budget = reduced_delay_budget(scenario)
    fixed = (latency.uplink_request_delay(scenario)
             + latency.deli_delay(scenario)
             + latency.access_delay(scenario))
    assert budget == pytest.approx(scenario.d_max - fixed, rel=1e-12)
    assert 0.0 < budget < scenario.d_max


def test_budget_subtraction_example(scenario):
    s = scenario.with_params(d_max=0.02)
    shifted = s.with_params(d_max=0.026)
    assert reduced_delay_budget(shifted) - reduced_delay_budget(s) == \
        pytest.approx(0.006, rel=1e-12)


def test_critical_density_root_residual(scenario):
    budget = reduced_delay_budget(scenario)
    pair = critical_edc_density(scenario, 144, budget)
    assert pair.lambda_e_crit == pytest.approx(CRIT_DENSITY_PSI144, rel=1e-9)
    # recompute the constraint left-hand side at the root
    hit = hit_probability(zipf(scenario.beta, scenario.k_total), 144)
    lhs = (multipath.multipath_backhaul_delay(
        scenario, lambda_e=pair.lambda_e_crit)
        + latency.fiber_delay(scenario) * (1.0 - hit))
    assert abs(lhs - budget) <= 1e-9
    assert pair.residual <= 1e-9


def test_critical_density_against_plain_bisection(scenario):
    # independent root oracle: hand-rolled bisection on the same equation
    budget = reduced_delay_budget(scenario)
    hit = hit_probability(zipf(scenario.beta, scenario.k_total), 144)
    fiber_term = latency.fiber_delay(scenario) * (1.0 - hit)

    def g(lam):
        return (multipath.multipath_backhaul_delay(scenario, lambda_e=lam)
                + fiber_term - budget)

    lo, hi = scenario.lambda_m, scenario.lambda_s
    assert g(lo) > 0 > g(hi)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if g(mid) > 0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-12 * hi:
            break
    pair = critical_edc_density(scenario, 144, budget)
    assert pair.lambda_e_crit == pytest.approx(0.5 * (lo + hi), rel=1e-10)


def test_critical_density_infeasible_fiber_term(scenario):
    # a longer fiber makes the miss term alone exceed the budget for a
    # small cache
    s = scenario.with_params(l_fiber=3e6)
    budget = reduced_delay_budget(s)
    assert critical_edc_density(s, 1, budget) is None
    assert critical_edc_density(s, 400, budget) is not None


def test_critical_density_clamps_on_slack_budget(scenario):
    pair = critical_edc_density(scenario, 400, budget=10.0)
    assert pair.at_lower_bound
    assert pair.lambda_e_crit == pytest.approx(scenario.lambda_m, rel=1e-6)


def test_critical_density_bracket_exhaustion(scenario):
    # budget below the backhaul delay of the densest allowed deployment
    with pytest.raises(DensityBracketError) as err:
        critical_edc_density(scenario, 500, budget=2e-3)
    assert err.value.searched[1] == scenario.lambda_s


def test_critical_density_validates_psi(scenario):
    with pytest.raises(ValueError):
        critical_edc_density(scenario, 0, 0.01)


def test_optimum_matches_exhaustive_enumeration(scenario, energy):
    outcome = optimize_cache_density(scenario, energy)
    scored = [(system_energy(scenario, energy, p.psi,
                             lambda_e=p.lambda_e_crit).total,
               p.psi, p.lambda_e_crit)
              for p in outcome.feasible_set]
    best_e, best_psi, best_lam = min(scored)
    assert outcome.e_sys_min == best_e
    assert outcome.best_pair.psi == best_psi
    assert outcome.best_pair.lambda_e_crit == best_lam
    assert len(outcome.feasible_set) + len(outcome.skipped_psi) == \
        scenario.k_total


def test_optimizer_deterministic_across_jobs(scenario, energy):
    base = optimize_cache_density(scenario, energy)
    assert optimize_cache_density(scenario, energy) == base
    assert optimize_cache_density(scenario, energy, jobs=4) == base
    assert optimize_cache_density(scenario, energy, jobs=13) == base


def test_feasibility_monotone_in_cache_size(scenario, energy):
    outcome = optimize_cache_density(scenario, energy)
    pairs = {p.psi: p for p in outcome.feasible_set}
    for psi in range(1, scenario.k_total):
        if psi in pairs and psi + 1 in pairs:
            assert pairs[psi + 1].lambda_e_crit <= \
                pairs[psi].lambda_e_crit * (1.0 + 1e-12)


def test_multipath_beats_single_path(scenario, energy):
    multi = optimize_cache_density(scenario, energy)
    single = optimize_cache_density(scenario, energy, scheme=SINGLE_PATH)
    assert multi.e_sys_min < single.e_sys_min
    # single path needs a denser deployment at the same cache size
    multi_pairs = {p.psi: p for p in multi.feasible_set}
    single_pairs = {p.psi: p for p in single.feasible_set}
    for psi in (50, 144, 300, 500):
        if psi in multi_pairs and psi in single_pairs:
            assert single_pairs[psi].lambda_e_crit >= \
                multi_pairs[psi].lambda_e_crit


def test_infeasible_budget_raises_with_budget(scenario, energy):
    s = scenario.with_params(d_max=1e-3)  # below the fixed stages
    with pytest.raises(NoFeasiblePairError) as err:
        optimize_cache_density(s, energy)
    assert err.value.budget < 0.0


def test_empty_feasible_set_raises(scenario, energy):
    # positive budget but no density can meet it at any cache size
    s = scenario.with_params(d_max=4.5e-3)
    assert reduced_delay_budget(s) > 0.0
    with pytest.raises(NoFeasiblePairError):
        optimize_cache_density(s, energy)


def test_toy_model_brute_force(energy):
    # small library, costs strictly increasing in both coordinates:
    # the optimiser must match a plain loop over the feasible pairs
    s = load_scenario(overrides={"k_total": 40, "beta": 1.2})
    outcome = optimize_cache_density(s, energy)
    best = None
    budget = reduced_delay_budget(s)
    for psi in range(1, 41):
        pair = critical_edc_density(s, psi, budget)
        if pair is None:
            continue
        e = system_energy(s, energy, psi, lambda_e=pair.lambda_e_crit).total
        key = (e, psi, pair.lambda_e_crit)
        if best is None or key < best:
            best = key
    assert best is not None
    assert outcome.e_sys_min == best[0]
    assert outcome.best_pair.psi == best[1]
