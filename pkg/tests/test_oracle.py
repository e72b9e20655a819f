import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hemiot.domains import ConvexPolygonDomain, DiskDomain, constant_density
from hemiot.oracle import (DiscretePlan, agreement_ceiling,
                           brute_force_assignment, lp_transport,
                           monotonicity_certificate, normal_cone_check,
                           semidiscrete_agreement)
from hemiot.solver import solve
from hemiot.targets import chart_disk, discretize

SQUARE = ConvexPolygonDomain(np.array([[-0.5, -0.5], [0.5, -0.5],
                                       [0.5, 0.5], [-0.5, 0.5]]))


def _random_lp(seed, m, n):
    rng = np.random.default_rng(seed)
    xs = rng.normal(0.0, 1.0, size=(m, 2))
    ps = rng.normal(0.0, 1.0, size=(n, 2))
    mu = rng.uniform(0.5, 2.0, size=m)
    nu = rng.uniform(0.5, 2.0, size=n)
    nu *= mu.sum() / nu.sum()
    return (list(zip(xs, mu)), list(zip(ps, nu)))


def test_one_by_one():
    plan = lp_transport([(np.array([0.3, 0.1]), 2.0)],
                        [(np.array([1.0, -1.0]), 2.0)])
    assert len(plan.entries) == 1
    assert plan.entries[0][2] == pytest.approx(2.0)
    assert plan.cost == pytest.approx(-(0.3 - 0.1) * 2.0)


def test_two_by_two_monotone_matching():
    # cost -<x, p> rewards pairing x and p on the same side
    sources = [(np.array([-1.0, 0.0]), 1.0), (np.array([1.0, 0.0]), 1.0)]
    targets = [(np.array([-2.0, 0.0]), 1.0), (np.array([2.0, 0.0]), 1.0)]
    plan = lp_transport(sources, targets)
    support = {(j, i) for j, i, m in plan.entries if m > 1e-12}
    assert support == {(0, 0), (1, 1)}
    assert monotonicity_certificate(plan) >= -1e-10
    # an anti-monotone rearrangement certifies as such
    bad = DiscretePlan(entries=[(0, 1, 1.0), (1, 0, 1.0)],
                       sources=plan.sources, source_masses=plan.source_masses,
                       targets=plan.targets, target_masses=plan.target_masses,
                       duals_source=plan.duals_source,
                       duals_target=plan.duals_target, cost=0.0,
                       max_support_slack=0.0, min_reduced_cost=0.0)
    assert monotonicity_certificate(bad) < 0.0


def test_matches_brute_force_on_square_instances():
    for seed in range(6):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(3, 7))
        xs = rng.normal(0.0, 1.0, size=(n, 2))
        ps = rng.normal(0.0, 1.0, size=(n, 2))
        sources = [(x, 1.0) for x in xs]
        targets = [(p, 1.0) for p in ps]
        plan = lp_transport(sources, targets)
        ref_cost, perm = brute_force_assignment(sources, targets)
        assert plan.cost == pytest.approx(ref_cost, abs=1e-12)
        support = {(j, i) for j, i, m in plan.entries if m > 1e-9}
        assert support == {(j, perm[j]) for j in range(n)}


def test_marginals_and_duals():
    sources, targets = _random_lp(3, 12, 9)
    plan = lp_transport(sources, targets)
    mu = np.array([m for _, m in sources])
    nu = np.array([m for _, m in targets])
    assert np.abs(plan.row_marginals() - mu).max() <= 1e-12 * mu.max()
    assert np.abs(plan.col_marginals() - nu).max() <= 1e-12 * nu.max()
    # complementary slackness and dual feasibility of the recovered prices
    assert plan.max_support_slack <= 1e-10
    assert plan.min_reduced_cost >= -1e-10
    # strong duality: dual objective equals the primal cost
    dual = float(plan.duals_source @ mu + plan.duals_target @ nu)
    assert dual == pytest.approx(plan.cost, rel=1e-10, abs=1e-10)


def test_target_permutation_invariance():
    sources, targets = _random_lp(7, 8, 8)
    plan = lp_transport(sources, targets)
    perm = [3, 1, 7, 0, 5, 2, 6, 4]
    shuffled = [targets[i] for i in perm]
    plan2 = lp_transport(sources, shuffled)
    assert plan2.cost == pytest.approx(plan.cost, abs=1e-12)


def test_exact_and_float_pivoting_agree():
    sources, targets = _random_lp(11, 10, 10)
    a = lp_transport(sources, targets, exact=True)
    b = lp_transport(sources, targets, exact=False)
    assert a.cost == pytest.approx(b.cost, abs=1e-11)


def test_optimality_against_random_feasible_plans():
    rng = np.random.default_rng(19)
    n = 6
    xs = rng.normal(0.0, 1.0, size=(n, 2))
    ps = rng.normal(0.0, 1.0, size=(n, 2))
    C = -(xs @ ps.T)
    plan = lp_transport([(x, 1.0) for x in xs], [(p, 1.0) for p in ps])
    for _ in range(100):
        perm = rng.permutation(n)
        feas = float(sum(C[j, perm[j]] for j in range(n)))
        assert plan.cost <= feas + 1e-12


def test_input_guards():
    with pytest.raises(ValueError):
        lp_transport([(np.zeros(2), 0.0)], [(np.ones(2), 0.0)])
    with pytest.raises(ValueError):  # unbalanced beyond tolerance
        lp_transport([(np.zeros(2), 1.0)], [(np.ones(2), 2.0)])
    big = [(np.array([float(i), 0.0]), 1.0) for i in range(1001)]
    with pytest.raises(ValueError):
        lp_transport(big, big)
    with pytest.raises(ValueError):  # brute force wants equal masses
        brute_force_assignment([(np.zeros(2), 1.0), (np.ones(2), 2.0)],
                               [(np.zeros(2), 1.5), (np.ones(2), 1.5)])


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_optimal_plans_are_monotone(seed):
    sources, targets = _random_lp(seed, 7, 6)
    plan = lp_transport(sources, targets)
    assert monotonicity_certificate(plan) >= -1e-10


def test_normal_cone_check_certifies_supporting_planes():
    target = discretize(chart_disk(np.zeros(2), 0.8), 12, 1.0, seed=5)
    sol = solve(SQUARE, constant_density(1.0), target)
    rng = np.random.default_rng(1)
    for _ in range(5):
        x = rng.uniform(-0.45, 0.45, size=2)
        assert normal_cone_check(SQUARE, sol.sites, sol.psi, x, 300, seed=3)
    # the check certifies the max-affine structure, not optimal weights:
    # any psi yields supporting planes of its own upper envelope
    psi_corrupt = sol.psi + rng.normal(0.0, 0.2, size=len(sol.psi))
    assert normal_cone_check(SQUARE, sol.sites, psi_corrupt,
                             np.array([0.1, 0.1]), 300, seed=3)
    with pytest.raises(ValueError):
        normal_cone_check(SQUARE, sol.sites, sol.psi,
                          np.array([2.0, 0.0]), 10)


def test_semidiscrete_agreement_small_instance():
    domain = DiskDomain(np.zeros(2), 0.6)
    K = constant_density(1.0)
    target = discretize(chart_disk(np.zeros(2), 0.75), 6,
                        math.pi * 0.36, seed=0)
    frac, plan, sol = semidiscrete_agreement(domain, K, target, grid_m=8)
    assert 0.0 <= frac <= 1.0
    assert sol.report.converged
    assert monotonicity_certificate(plan) >= -1e-10
    ceil = agreement_ceiling(domain, K, target, grid_m=8)
    assert frac <= ceil + 1e-12
    # coarse atomizations still agree on the bulk of the mass
    assert frac >= 0.6


def test_agreement_grid_cap():
    domain = DiskDomain(np.zeros(2), 0.6)
    target = discretize(chart_disk(np.zeros(2), 0.75), 5, math.pi * 0.36)
    with pytest.raises(ValueError):
        semidiscrete_agreement(domain, constant_density(1.0), target, grid_m=40)
