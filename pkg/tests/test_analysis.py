import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from permutons import (
    AnalysisError, BracketingError, Budget, Perm, cs_chain, density_mc,
    find_b, find_nu, from_perm, identity_check, lemma_integrals, m_set,
    nu_mixture, prefix_bound_check, t_id3_segment, uniform,
    convergence_experiment,
)
from permutons.analysis import _bracket_and_bisect

F = Fraction
ID3 = Perm((1, 2, 3))
grid_perms = st.integers(2, 6).flatmap(
    lambda n: st.permutations(range(1, n + 1))).map(
        lambda v: from_perm(Perm(tuple(v))))


def test_budget_validation():
    with pytest.raises(AnalysisError):
        Budget(samples=0)
    with pytest.raises(AnalysisError):
        Budget(resolution=1)
    with pytest.raises(AnalysisError):
        Budget(mode="dream")


def test_uniform_integrals_exact():
    rep = lemma_integrals(uniform())
    assert rep.exact
    assert (rep.i1, rep.i2, rep.i3) == (F(1, 9), F(1, 9), F(1, 9))


def test_decreasing_pair_integrals_exact():
    rep = lemma_integrals(from_perm(Perm((2, 1))))
    assert (rep.i1, rep.i2, rep.i3) == (F(1, 36), F(5, 144), F(25, 288))


def test_mc_integrals_track_exact():
    mu = from_perm(Perm((3, 1, 2)))
    exact = lemma_integrals(mu)
    mc = lemma_integrals(mu, Budget(samples=300_000, seed=4, mode="mc"))
    assert not mc.exact
    for e, m, r in zip((exact.i1, exact.i2, exact.i3),
                       (mc.i1, mc.i2, mc.i3), mc.error_radius):
        assert abs(float(e) - m) < 4 * r


def test_segment_integrals_have_error_budget():
    rep = lemma_integrals(m_set(F(1, 2)), Budget(samples=200_000, seed=2))
    assert not rep.exact
    assert all(r > 0 for r in rep.error_radius)
    assert 0 < rep.i1 < 1 and 0 < rep.i3 < 1


@settings(max_examples=30, deadline=None)
@given(grid_perms)
def test_identity_exact_on_grids(mu):
    rep = identity_check(mu)
    assert rep.exact
    assert rep.lhs == rep.rhs
    assert rep.slack == 0


def test_identity_mc_on_segments():
    rep = identity_check(m_set(F(1, 3)), Budget(samples=400_000, seed=6))
    assert not rep.exact
    assert rep.passed


def test_chain_on_uniform_collapses():
    rep = cs_chain(uniform())
    assert all(s == 0 for s in rep.slacks.values())
    assert rep.quantities[0] == F(1, 81)
    assert rep.quantities[-1] == F(1, 81)


def test_chain_decreasing_pair_slacks():
    rep = cs_chain(from_perm(Perm((2, 1))))
    assert rep.slacks["cs1"] == F(1, 6912)
    assert rep.slacks["rewrite"] == F(7, 1728)
    assert rep.slacks["marginal"] == 0
    assert rep.slacks["cs2"] > 0
    assert rep.slacks["closing"] > 0
    assert rep.error_radius <= 1e-12


@settings(max_examples=25, deadline=None)
@given(grid_perms)
def test_universal_chain_steps_on_grids(mu):
    # cs1/cs2 are Cauchy-Schwarz, marginal vanishes for uniform marginals;
    # rewrite and closing carry no universal sign (see the id_2 case below)
    rep = cs_chain(mu)
    eps = rep.error_radius + 1e-12
    assert rep.slacks["cs1"] >= 0  # exact rational
    assert rep.slacks["marginal"] == 0
    assert rep.slacks["cs2"] >= -eps


def test_chain_signs_flip_for_increasing_pair():
    # i1 and i3 exceed 1/9 for mu_id2, so those two steps go negative
    rep = cs_chain(from_perm(Perm((1, 2))))
    assert rep.slacks["rewrite"] < 0
    assert rep.slacks["closing"] < 0
    assert rep.slacks["cs1"] >= 0
    assert rep.slacks["cs2"] >= -rep.error_radius - 1e-12


def test_chain_mc_error_propagation():
    mu = from_perm(Perm((2, 1)))
    exact = cs_chain(mu)
    mc = cs_chain(mu, Budget(samples=400_000, seed=12, mode="mc"))
    assert not mc.exact
    for a, b in zip(exact.quantities, mc.quantities):
        assert abs(float(a) - float(b)) < 5 * (mc.error_radius + 1e-9)


def test_id3_segment_exact_values():
    assert t_id3_segment(F(0)) == F(1, 4)
    assert t_id3_segment(F(1)) == F(1, 8)
    assert t_id3_segment(F(1, 2)) == F(21, 128)


def test_id3_mc_agrees_with_exact():
    a = F(2, 5)
    exact = float(t_id3_segment(a))
    est, ci = density_mc(ID3, m_set(a), 300_000, seed=3)
    assert abs(est - exact) < 4 * ci


def test_find_b_hits_tolerance():
    r = find_b(1e-5)
    assert r.value == F(3083, 6400)
    assert abs(r.t_value - F(1, 6)) <= 1e-5
    assert r.bracket[0] <= r.value <= r.bracket[1]
    assert find_b(1e-5).value == r.value  # deterministic


def test_find_nu_hits_tolerance():
    r = find_nu(1e-4)
    assert abs(r.t_value - F(1, 6)) <= 1e-4
    assert 0 < r.value < 1


def test_nu_mixture_endpoints():
    lo, _ = density_mc(ID3, nu_mixture(0), 200_000, seed=14)
    hi, _ = density_mc(ID3, nu_mixture(1), 200_000, seed=14)
    assert abs(lo - 1 / 8) < 0.01  # weight 0 leaves only the diamond part
    assert abs(hi - 1 / 4) < 0.01
    with pytest.raises(AnalysisError):
        nu_mixture(F(3, 2))


def test_bracketing_failure_is_distinguished():
    with pytest.raises(BracketingError):
        _bracket_and_bisect(lambda a: F(1, 4), 1e-6, "test target")


def test_convergence_experiment_rows():
    rows = convergence_experiment(m_set(F(1, 2)), 3, (30, 80), seed=21)
    assert [r.n for r in rows] == sorted(r.n for r in rows)
    by_n = {}
    for r in rows:
        assert len(r.pattern) == 3
        assert 0 <= r.density <= 1
        assert r.discrepancy <= r.bound + 1e-12
        by_n.setdefault(r.n, 0)
        by_n[r.n] += r.density
    for n, total in by_n.items():
        assert total == pytest.approx(1.0, abs=1e-9)
    with pytest.raises(AnalysisError):
        convergence_experiment(uniform(), 3, (50, 20))
    with pytest.raises(AnalysisError):
        convergence_experiment(uniform(), 3, (2,))


def test_prefix_bound_check_fixtures():
    for mu in (uniform(), from_perm(Perm((3, 1, 2))), m_set(F(0)),
               m_set(F(1, 2))):
        rep = prefix_bound_check(mu)
        assert rep.passed
        assert rep.d_lower <= 4 * rep.sup_dev + 1e-9
