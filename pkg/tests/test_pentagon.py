from __future__ import annotations

import csv
import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qpenta.cocycles import coboundary, cochain_for, heisenberg_cocycle, make_cocycle, random_cochain
from qpenta.groups import FiniteAffine, XPoint
from qpenta.pentagon import (FunctionalEquationViolation, brute_force_factorizations, check_functional_equation,
                             check_matched_pair, check_pentagon, check_theta_pentagonal, check_trivialization,
                             coboundary_gap, dual_cocycle_check, dual_mul, matched_pair_factorize,
                             reconstruct_u_from_trivializer, standard_map, swapped_map, theta_from_group_cocycle,
                             theta_from_table, trivializer_from_u, w_apply, w_weight, write_theta_table)
from qpenta.phases import ExactPhase
from qpenta.suites import continuity_value


def test_w_examples(f5, ra):
    assert w_apply(f5, XPoint(2, 1), XPoint(3, 2)) == (XPoint(1, 2), XPoint(2, 0))
    (a, c) = w_apply(ra, XPoint(2.0, 1.0), XPoint(3.0, 2.0))
    assert a.q == pytest.approx(6.0) and a.xi == pytest.approx(1 / 3)
    assert c.q == pytest.approx(2.0) and c.xi == pytest.approx(1.25)
    assert w_weight(ra, XPoint(2.0, 1.0), XPoint(3.0, 2.0)) == pytest.approx(0.25)
    assert w_weight(f5, XPoint(2, 1), XPoint(3, 2)) == 1.0


def test_pentagon_exhaustive_counts():
    rep = check_pentagon(standard_map(FiniteAffine(5)))
    assert (rep.n_checked, rep.n_skipped_defect, rep.n_failed) == (2840, 5160, 0)


def test_pentagon_negative_control(f5):
    bad = swapped_map(f5, XPoint(2, 1), XPoint(3, 2), XPoint(1, 0), XPoint(1, 0))
    rep = check_pentagon(bad)
    assert rep.n_failed > 0
    assert rep.failures and "triple" in rep.failures[0]


def test_real_pentagon_sampled(ra, rpa):
    for b in (ra, rpa):
        rep = check_pentagon(standard_map(b), count=3000, seed=5, tol=1e-9)
        assert rep.passed and rep.n_checked > 2900


def test_theta_example(f5x, du5x):
    theta = theta_from_group_cocycle(du5x)
    assert theta(XPoint(1, 2), XPoint(4, 2)) == ExactPhase(10, 20)


def test_theta_counts(du5x):
    rep = check_theta_pentagonal(theta_from_group_cocycle(du5x))
    assert (rep.n_checked, rep.n_skipped_defect, rep.n_failed) == (1624, 6376, 0)
    assert rep.max_error == 0.0


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 10_000))
def test_theta_pentagonal_for_random_coboundaries(seed):
    b = FiniteAffine(5, phase_mode="exact")
    om = coboundary(random_cochain(b, seed))
    assert check_theta_pentagonal(theta_from_group_cocycle(om), count=300, seed=seed).passed


def test_theta_table_round_trip_and_mutation(tmp_path, du5x):
    theta = theta_from_group_cocycle(du5x)
    path = tmp_path / "theta.csv"
    rows = write_theta_table(theta, path)
    assert rows == 172
    assert check_theta_pentagonal(theta_from_table(du5x.backend, path)).passed
    data = list(csv.reader(open(path)))
    data[5][4] = str((int(data[5][4]) + 1) % int(data[5][5]))
    bad = tmp_path / "bad.csv"
    with open(bad, "w", newline="") as fh:
        csv.writer(fh).writerows(data)
    rep = check_theta_pentagonal(theta_from_table(du5x.backend, bad))
    assert rep.n_failed > 0


def test_trivializer_regression(du5x):
    a = trivializer_from_u(cochain_for(du5x))
    assert a(XPoint(2, 1)) == ExactPhase(0, 20)
    rep = check_trivialization(theta_from_group_cocycle(du5x), a)
    assert rep.passed and rep.n_checked == 142
    assert check_functional_equation(a, du5x.backend).passed


def test_reconstruction_needs_the_continuity_value(du5x):
    b = du5x.backend
    u = cochain_for(du5x)
    a = trivializer_from_u(u)
    pairs = list(itertools.product(b.enumerate("Q"), repeat=2))
    assert coboundary_gap(u, reconstruct_u_from_trivializer(a, b), pairs) == pytest.approx(2.0)
    u2 = reconstruct_u_from_trivializer(a, b, k_at_zero=continuity_value(u))
    assert coboundary_gap(u, u2, pairs) == 0.0


def test_reconstruction_rejects_a_non_solution(f5x):
    bad = lambda x: f5x.root_of_unity(1, 4) if x == XPoint(2, 1) else f5x.root_of_unity(0, 1)
    with pytest.raises(FunctionalEquationViolation):
        reconstruct_u_from_trivializer(bad, f5x)


def test_real_reconstruction(ra):
    u = make_cocycle("coboundary:u=random:seed=7", ra).cochain
    u2 = reconstruct_u_from_trivializer(trivializer_from_u(u), ra, check_count=500)
    rng = np.random.default_rng(0)
    pairs = [(ra.random_point("Q", rng), ra.random_point("Q", rng)) for _ in range(2000)]
    assert coboundary_gap(u, u2, pairs) <= 1e-9


def test_dual_cocycle(f5x, du5x):
    rep = dual_cocycle_check(du5x)
    assert (rep.n_checked, rep.n_skipped_defect, rep.n_failed) == (64, 61, 0)
    assert dual_cocycle_check(make_cocycle("trivial", f5x)).passed


def test_dual_cocycle_negative_control(du5x):
    b = du5x.backend
    base = lambda s, t: du5x(b.phi_inv(b.xi_add(b.xi0, s)), b.phi_inv(b.xi_add(b.xi0, t)))
    bump = lambda s, t: base(s, t) * (b.root_of_unity(1, 4) if (s, t) == (1, 2) else b.root_of_unity(0, 1))
    assert not dual_cocycle_check(bump, b).passed


def test_dual_cocycle_heisenberg(fp3):
    assert dual_cocycle_check(heisenberg_cocycle(fp3)).passed


def test_matched_pair(f5x):
    rep = check_matched_pair(f5x)
    assert rep.passed and rep.n_checked == 2725
    for x in f5x.enumerate("X"):
        found = brute_force_factorizations(f5x, x)
        if found:
            p1, p2 = matched_pair_factorize(f5x, x)
            assert dual_mul(f5x, p1, p2) == x
