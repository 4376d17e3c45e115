from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qpenta.groups import (BackendMismatch, DefectPoint, FiniteAffine, GElement, RealAffine, XPoint,
                           change_of_variables_quadrature, change_of_variables_sums, parse_backend,
                           smallest_primitive_root)
from qpenta.phases import ExactPhase


def test_group_law_examples(f5, ra):
    assert ra.g_compose(GElement(2.0, 1.0), GElement(3.0, 4.0)) == GElement(6.0, 9.0)
    assert f5.g_compose(GElement(2, 3), GElement(3, 1)) == GElement(1, 0)
    assert f5.g_compose(f5.g_identity, GElement(3, 2)) == GElement(3, 2)


def test_dual_action_and_pairing_examples(f5x):
    assert f5x.dual_act(2, 3) == 4
    assert f5x.pairing(2, 3) == ExactPhase(1, 5)
    assert f5x.xi0 == 1


def test_primitive_roots_and_dlog(f5):
    assert smallest_primitive_root(5) == 2
    assert smallest_primitive_root(7) == 3
    assert [f5.dlog(a) for a in (1, 2, 3, 4)] == [0, 1, 3, 2]


def test_phase_order_is_lcm():
    assert FiniteAffine(5).phase_order == 20
    assert FiniteAffine(7).phase_order == 42


@pytest.mark.parametrize("spec", ["finite-affine:p=5", "finite-affine:p=7", "finite-product-affine:p=3",
                                  "finite-product-affine:p=5"])
def test_orbit_map_is_a_bijection_onto_the_complement_of_the_defect(spec):
    b = parse_backend(spec)
    image = {b.phi(q) for q in b.enumerate("Q")}
    assert len(image) == len(b.enumerate("Q"))
    defect = [xi for xi in b.enumerate("Vhat") if b.is_defect(xi)]
    assert defect
    assert image == set(b.enumerate("Vhat")) - set(defect)
    for q in b.enumerate("Q"):
        assert b.phi_inv(b.phi(q)) == q
    with pytest.raises(DefectPoint):
        b.phi_inv(defect[0])


def test_real_defect_band(ra):
    assert ra.phi_inv(0.5) == 2.0
    with pytest.raises(DefectPoint):
        ra.phi_inv(1e-7)
    assert ra.phi_inv_unbanded(1e-7) == pytest.approx(1e7)


def test_haar_data_is_trivial_on_finite_backends(f5, fp3):
    for b in (f5, fp3):
        for q in b.enumerate("Q"):
            assert b.modulus(q) == 1.0
            assert b.delta_g(GElement(q, b.v_zero)) == 1.0


@given(st.floats(0.01, 100), st.booleans(), st.floats(0.01, 100), st.booleans())
def test_real_haar_data_is_multiplicative(a, sa, c, sc):
    b = RealAffine()
    x, y = (a if sa else -a), (c if sc else -c)
    assert math.isclose(b.modulus(x) * b.modulus(b.q_inv(x)), 1.0)
    assert math.isclose(b.modulus(b.q_mul(x, y)), b.modulus(x) * b.modulus(y))
    assert math.isclose(b.delta_g(GElement(x, 0.0)), 1.0 / abs(x))


@given(st.integers(1, 6), st.integers(0, 6), st.integers(1, 6), st.integers(0, 6))
def test_finite_group_axioms(q1, v1, q2, v2):
    b = FiniteAffine(7)
    g, h = GElement(q1, v1), GElement(q2, v2)
    assert b.g_compose(g, b.g_inverse(g)) == b.g_identity
    k = GElement(3, 5)
    assert b.g_compose(b.g_compose(g, h), k) == b.g_compose(g, b.g_compose(h, k))


@given(st.integers(1, 6), st.integers(0, 6), st.integers(0, 6))
def test_dual_action_is_the_transpose(q, xi, v):
    b = FiniteAffine(7, phase_mode="exact")
    assert b.pairing(b.dual_act(q, xi), v) == b.pairing(xi, b.v_act(b.q_inv(q), v))


def test_backend_mismatch(f5, fp3):
    with pytest.raises(BackendMismatch):
        f5.require_same(fp3)


def test_parse_backend_ids():
    assert parse_backend("finite-affine:p=5:mode=exact").id == "finite-affine:p=5:mode=exact"
    assert parse_backend("finite-product-affine").p == 3
    assert parse_backend("real-affine:margin=1e-6").defect_margin == 1e-6
    with pytest.raises(ValueError):
        parse_backend("padic:p=5")
    with pytest.raises(ValueError):
        parse_backend("finite-affine:q=5")


def test_enumeration_sizes(fp3):
    assert len(fp3.enumerate("Q")) == 4
    assert len(fp3.enumerate("G")) == 36
    assert len(fp3.enumerate("X")) == 36


def test_change_of_variables_finite(f5):
    rng = np.random.default_rng(1)
    vals = dict(zip(f5.enumerate("Vhat"), rng.normal(size=5)))
    lhs, rhs = change_of_variables_sums(f5, vals.__getitem__)
    assert abs(lhs - rhs) < 1e-12


def test_change_of_variables_quadrature(ra):
    lhs, rhs = change_of_variables_quadrature(ra, lambda x: np.exp(-x * x))
    assert abs(rhs - math.sqrt(math.pi)) < 1e-9
    assert abs(lhs - rhs) < 1e-5


@settings(max_examples=50)
@given(st.integers(0, 10_000))
def test_real_samples_avoid_the_defect_band(seed):
    b = RealAffine()
    for x in b.sample_points("X", 5, seed):
        assert isinstance(x, XPoint)
        assert abs(x.xi) > b.sample_margin
