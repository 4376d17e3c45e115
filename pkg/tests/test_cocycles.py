from __future__ import annotations

import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qpenta.cocycles import (CocycleSpecError, antisym_pairing, check_cocycle_equation, coboundary, cochain_for,
                             heisenberg_cocycle, make_cocycle, named_cochain, random_cochain, table_cocycle,
                             write_cocycle_table)
from qpenta.groups import FiniteAffine, FiniteProductAffine
from qpenta.phases import ExactPhase, phase_error


def test_coboundary_example(du5x):
    # u = i^{L(q)^2} with L the discrete log base 2: L(2) = 1, L(4) = 2, so du(2,2) = i * i / i^4
    assert du5x(2, 2) == ExactPhase(1, 2)


def test_heisenberg_examples(fp5x):
    om = heisenberg_cocycle(fp5x)
    assert om((2, 3), (4, 2)) == ExactPhase(3, 4)
    assert antisym_pairing(om)((2, 1), (1, 2)) == ExactPhase(1, 2)


def test_heisenberg_skew_form_is_symmetric_when_zeta_is_minus_one():
    b = FiniteProductAffine(3, phase_mode="exact")
    skew = antisym_pairing(heisenberg_cocycle(b))
    values = {skew(x, y) for x, y in itertools.product(b.enumerate("Q"), repeat=2)}
    assert all(v.is_one() for v in values)
    half = antisym_pairing(heisenberg_cocycle(b, form="half"))
    assert not half((2, 1), (1, 2)).is_one()


@pytest.mark.parametrize("spec", ["trivial", "coboundary:u=dlog", "coboundary:u=dlogsq",
                                  "coboundary:u=random:seed=4"])
def test_cocycle_equation_exhaustive_p5(f5x, spec):
    rep = check_cocycle_equation(make_cocycle(spec, f5x))
    assert rep.passed and rep.n_checked == 64 + 8
    assert rep.max_error == 0.0


@pytest.mark.parametrize("spec", ["heisenberg", "heisenberg:form=half", "heisenberg:k=2"])
def test_heisenberg_cocycle_equation(fp5x, spec):
    assert check_cocycle_equation(make_cocycle(spec, fp5x)).passed


def test_real_cocycles_sampled(ra, rpa):
    for om in (make_cocycle("coboundary:u=dlogsq", ra), make_cocycle("coboundary:u=random:seed=2", ra),
               make_cocycle("heisenberg:theta=0.7", rpa)):
        rep = check_cocycle_equation(om, count=2000, seed=1, tol=1e-12)
        assert rep.passed, rep.failures[:1]


def test_non_cocycle_is_caught(f5):
    bad = make_cocycle("coboundary:u=dlogsq", f5)
    broken = type(bad)(f5, lambda a, c: bad(a, c) * (f5.root_of_unity(1, 4) if (a, c) == (2, 3) else
                                                      f5.root_of_unity(0, 1)), "custom")
    assert not check_cocycle_equation(broken).passed


def test_cochains_are_normalized(f5x, ra):
    for b in (f5x, ra):
        for name in ("dlog", "dlogsq", "random"):
            u = named_cochain(b, name, seed=3)
            assert phase_error(u(b.q_identity), b.root_of_unity(0, 1)) == 0.0


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10_000))
def test_coboundary_pairing_is_trivial(seed):
    b = FiniteProductAffine(5, phase_mode="exact")
    pair = antisym_pairing(coboundary(random_cochain(b, seed)))
    for x, y in itertools.product(b.enumerate("Q")[:6], repeat=2):
        assert pair(x, y).is_one()


def test_table_round_trip(tmp_path, fp5x):
    om = heisenberg_cocycle(fp5x)
    path = tmp_path / "omega.csv"
    write_cocycle_table(om, path)
    back = make_cocycle(f"table:{path}", fp5x)
    for x, y in itertools.product(fp5x.enumerate("Q"), repeat=2):
        assert back(x, y) == om(x, y)
    assert table_cocycle(fp5x, path).kind == "table"


def test_cochain_for(f5):
    assert cochain_for(make_cocycle("coboundary:u=dlog", f5)).name == "dlog"
    assert cochain_for(make_cocycle("trivial", f5)) is not None
    assert cochain_for(heisenberg_cocycle(FiniteProductAffine(3))) is None


@pytest.mark.parametrize("spec", ["bogus", "trivial:x=1", "coboundary", "coboundary:u=nope", "heisenberg:z=1",
                                  "coboundary:u"])
def test_bad_specs(f5, spec):
    with pytest.raises(CocycleSpecError):
        make_cocycle(spec, f5)


def test_heisenberg_needs_a_product_backend():
    with pytest.raises(CocycleSpecError):
        heisenberg_cocycle(FiniteAffine(5))
