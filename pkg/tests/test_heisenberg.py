"""The Heisenberg class: where the antisymmetric pairing separates it from coboundaries, and where it cannot."""

from __future__ import annotations

import itertools

from qpenta.cocycles import OneCochain, antisym_pairing, coboundary, heisenberg_cocycle, random_cochain
from qpenta.groups import FiniteProductAffine
from qpenta.suites import Context, SuiteConfig, suite_heisenberg_witness


def _pairs(b):
    return list(itertools.product(b.enumerate("Q"), repeat=2))


def test_skew_form_is_a_coboundary_at_p3():
    # zeta_{p-1} = -1, so the skew form equals du for u(a, eta) = (-1)^{L(a) L(eta)}
    b = FiniteProductAffine(3, phase_mode="exact")
    u = OneCochain(b, lambda q: b.root_of_unity(b.dlog(q[0]) * b.dlog(q[1]), 2), "sign")
    om_h, du = heisenberg_cocycle(b), coboundary(u)
    assert all(om_h(x, y) == du(x, y) for x, y in _pairs(b))


def test_witness_separates_the_classes_at_p5():
    b = FiniteProductAffine(5, phase_mode="exact")
    pair_h = antisym_pairing(heisenberg_cocycle(b))
    assert len({pair_h(x, y) for x, y in _pairs(b)}) > 1
    for seed in range(20):
        pair_u = antisym_pairing(coboundary(random_cochain(b, seed)))
        assert all(pair_u(x, y).is_one() for x, y in _pairs(b))


def test_half_form_is_nontrivial_at_p3():
    rep = suite_heisenberg_witness(Context(SuiteConfig("finite-product-affine:p=3:mode=exact",
                                                       "heisenberg:form=half")))
    assert rep.passed


def test_witness_suite_on_real_product_backend():
    rep = suite_heisenberg_witness(Context(SuiteConfig("real-product-affine", "heisenberg", samples=500)))
    assert rep.passed and rep.params["heisenberg_pairing_max_distance_from_1"] > 0.1
