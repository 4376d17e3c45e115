from __future__ import annotations

import cmath
import math
from fractions import Fraction

from hypothesis import given
from hypothesis import strategies as st

from qpenta.phases import (Cyclotomic, ExactPhase, FloatPhase, cyclotomic_polynomial, exact_adjoint, exact_matmul,
                           phase_error, to_exponent)


def test_exact_phase_value_and_reduction():
    assert complex(ExactPhase(5, 20)) == complex(ExactPhase(1, 4))
    assert ExactPhase(5, 20) == ExactPhase(1, 4)
    assert ExactPhase(20, 20).is_one()
    assert abs(complex(ExactPhase(1, 4)) - 1j) < 1e-15


def test_exact_phase_mixed_orders_combine_by_lcm():
    prod = ExactPhase(1, 4) * ExactPhase(1, 5)
    assert prod == ExactPhase(9, 20)


def test_phase_error_is_exact_zero_for_equal_exact_phases():
    assert phase_error(ExactPhase(3, 20), ExactPhase(3, 20)) == 0.0
    assert phase_error(ExactPhase(0, 2), ExactPhase(1, 2)) == 2.0


def test_to_exponent():
    assert to_exponent(ExactPhase(2, 4), 20) == 10
    assert to_exponent(ExactPhase(1, 2), 20) == 10


@given(st.integers(-50, 50), st.integers(-50, 50), st.sampled_from([4, 5, 20, 42]))
def test_exact_phase_group_law(a, b, n):
    x, y = ExactPhase(a, n), ExactPhase(b, n)
    assert x * y == ExactPhase(a + b, n)
    assert (x * x.conj()).is_one()
    assert x ** 3 == x * x * x


@given(st.lists(st.floats(-10, 10, allow_nan=False), min_size=1, max_size=200))
def test_float_phase_stays_on_the_circle(angles):
    z = FloatPhase(1)
    for t in angles:
        z = z * FloatPhase(cmath.exp(1j * t))
        assert abs(abs(complex(z)) - 1.0) <= 1e-12


def test_cyclotomic_polynomials():
    assert cyclotomic_polynomial(1) == (-1, 1)
    assert cyclotomic_polynomial(4) == (1, 0, 1)
    assert cyclotomic_polynomial(5) == (1, 1, 1, 1, 1)
    assert cyclotomic_polynomial(20) == (1, 0, -1, 0, 1, 0, -1, 0, 1)


@given(st.sampled_from([3, 4, 5, 12, 20]))
def test_roots_of_unity_sum_to_zero(n):
    total = Cyclotomic.zero(n)
    for k in range(n):
        total = total + Cyclotomic.root(n, k)
    assert total.is_zero()
    assert Cyclotomic.root(n, 1) * Cyclotomic.root(n, n - 1) == 1


small = st.fractions(min_value=-20, max_value=20, max_denominator=7)


@given(st.lists(small, min_size=0, max_size=8), st.lists(small, min_size=0, max_size=8))
def test_cyclotomic_arithmetic_matches_complex(a, b):
    x, y = Cyclotomic(20, a), Cyclotomic(20, b)
    zx, zy = complex(x), complex(y)
    assert abs(complex(x * y) - zx * zy) < 1e-9
    assert abs(complex(x + y) - (zx + zy)) < 1e-9
    assert abs(complex(x.conj()) - zx.conjugate()) < 1e-9


def test_exact_dft_is_unitary():
    n = 5
    f = [[Cyclotomic.root(n, -j * k) * Fraction(1, 1) for k in range(n)] for j in range(n)]
    prod = exact_matmul(exact_adjoint(f), f)
    for i in range(n):
        for j in range(n):
            assert prod[i][j] == (n if i == j else 0)
    assert math.isclose(complex(prod[0][0]).real, 5.0)
