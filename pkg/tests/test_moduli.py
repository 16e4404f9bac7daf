import cmath
import math
import random
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from dehnfill.core import ComplexVal, CuspShape, UnimodularMap
from dehnfill.moduli import (
    Boundary,
    DegenerateDenominator,
    NotStandard,
    ShapeClass,
    boundary_class,
    elliptic_class,
    is_standard,
    mobius_apply,
    reduce_to_fundamental,
)

OMEGA = complex(0.5, math.sqrt(3) / 2)


def in_domain(z, eps=1e-12):
    x, n = z.real, abs(z) ** 2
    return (-eps <= x <= 0.5 + eps and n >= 1 - eps) or (-0.5 < x < 0 and n > 1)


def test_mobius_apply_examples():
    assert mobius_apply(UnimodularMap.identity(), CuspShape.from_complex(0.2 + 3j)).z == 0.2 + 3j
    assert mobius_apply(UnimodularMap.S(), CuspShape.from_complex(1j)).z == pytest.approx(1j)
    assert mobius_apply(UnimodularMap.S(), CuspShape.from_complex(2j)).z == pytest.approx(0.5j)


def test_mobius_apply_degenerate():
    # a + b c1 = 0 needs c1 real; approach it from above
    c1 = CuspShape.from_complex(complex(-1.0, 1e-16))
    with pytest.raises(DegenerateDenominator):
        mobius_apply(UnimodularMap(1, 1, 0, 1), c1)


def test_mobius_apply_exact_propagation():
    c1 = CuspShape.from_exact(Fraction(1, 4), Fraction(41, 8))
    g = UnimodularMap(2, 5, 1, 3)
    img = mobius_apply(g, c1)
    direct = (1 + 3 * c1.z) / (2 + 5 * c1.z)
    assert img.is_exact
    assert abs(img.z - direct) < 1e-12
    assert float(img.re_exact) == pytest.approx(direct.real, abs=1e-12)
    assert float(img.norm_sq_exact) == pytest.approx(abs(direct) ** 2, rel=1e-12)


def test_reduce_examples():
    res = reduce_to_fundamental(CuspShape.from_complex(1j))
    assert res.standard_shape.z == 1j and res.word == UnimodularMap.identity() and res.steps == ()

    res = reduce_to_fundamental(CuspShape.from_complex((13 + 9j) / 4))
    assert res.standard_shape.z == pytest.approx((1 + 9j) / 4)
    assert res.word == UnimodularMap.T(-3)

    res = reduce_to_fundamental(CuspShape.from_complex(0.2 + 0.3j))
    assert res.steps == ("S", "T^2")
    assert res.standard_shape.z == pytest.approx(complex(2 - 0.2 / 0.13, 0.3 / 0.13))
    assert res.standard_shape.z == pytest.approx(0.46154 + 2.30769j, abs=1e-5)


def test_reduce_boundary_normalization():
    # Re = -1/2 goes to +1/2, the left unit arc goes to the right one
    res = reduce_to_fundamental(CuspShape.from_complex(complex(-0.5, 2.0)))
    assert res.standard_shape.z == pytest.approx(complex(0.5, 2.0))
    left_arc = cmath.exp(1j * 2.0)
    res = reduce_to_fundamental(CuspShape.from_complex(left_arc))
    assert res.standard_shape.z.real > 0
    assert abs(res.standard_shape.z) == pytest.approx(1)
    res = reduce_to_fundamental(CuspShape.from_exact(Fraction(-1, 2), Fraction(5, 4)))
    assert res.standard_shape.re_exact == Fraction(1, 2)
    res = reduce_to_fundamental(CuspShape.from_exact(Fraction(-1, 3), 1))
    assert res.standard_shape.re_exact == Fraction(1, 3) and res.steps == ("S",)


def test_reduce_exact_path():
    c = CuspShape.from_exact(Fraction(13, 4), Fraction(13**2 + 81, 16))
    res = reduce_to_fundamental(c)
    assert res.standard_shape.re_exact == Fraction(1, 4)
    assert res.standard_shape.norm_sq_exact == Fraction(82, 16)


upper = st.builds(
    complex,
    st.floats(-50, 50, allow_nan=False),
    st.floats(1e-3, 1e3, allow_nan=False),
)


@given(upper)
def test_reduce_properties(z):
    c = CuspShape.from_complex(z)
    res = reduce_to_fundamental(c)
    s = res.standard_shape
    assert in_domain(s.z)
    assert abs(mobius_apply(res.word, c).z - s.z) < 1e-12 * max(1.0, abs(s.z))
    again = reduce_to_fundamental(s)
    assert again.word == UnimodularMap.identity()
    assert again.standard_shape.z == s.z


def test_reduce_random_roundtrip():
    rng = random.Random(3)
    worst = 0.0
    for _ in range(10**4):
        z = complex(rng.uniform(-100, 100), 10 ** rng.uniform(-3, 3))
        c = CuspShape.from_complex(z)
        res = reduce_to_fundamental(c)
        assert in_domain(res.standard_shape.z)
        worst = max(worst, abs(mobius_apply(res.word, c).z - res.standard_shape.z))
    assert worst < 1e-12


def test_equivariance_of_leading_density():
    rng = random.Random(4)
    c1 = CuspShape.from_complex(0.31 + 1.7j)
    for _ in range(200):
        a, b = rng.randint(-9, 9), rng.randint(-9, 9)
        if math.gcd(a, b) != 1:
            continue
        # complete to a unimodular matrix
        d = pow(a, -1, abs(b)) if abs(b) > 1 else (0 if b else a)
        c = (a * d - 1) // b if b else 0
        g = UnimodularMap(a, b, c, d)
        gc = mobius_apply(g, c1).z
        p, q = rng.randint(-50, 50), rng.randint(1, 50)
        pt, qt = g.push_filling(p, q)
        lhs = gc.imag / abs(pt + gc * qt) ** 2
        rhs = c1.z.imag / abs(p + c1.z * q) ** 2
        assert lhs == pytest.approx(rhs, rel=1e-10)


def test_elliptic_class_examples():
    assert elliptic_class(CuspShape.from_complex(1j)) is ShapeClass.I
    assert elliptic_class(CuspShape.from_complex(OMEGA)) is ShapeClass.Omega
    assert elliptic_class(CuspShape.from_exact(0, 12)) is ShapeClass.Generic
    assert elliptic_class(CuspShape.from_exact(Fraction(1, 2), 1)) is ShapeClass.Omega
    with pytest.raises(NotStandard):
        elliptic_class(CuspShape.from_complex(0.2 + 0.3j))


def test_boundary_class_examples():
    assert boundary_class(CuspShape.from_complex(1j * math.sqrt(7))) == {Boundary.ReZero}
    assert boundary_class(CuspShape.from_complex(OMEGA)) == {Boundary.ReHalf, Boundary.UnitNorm}
    assert boundary_class(CuspShape.from_complex((1 + 9j) / 4)) == set()
    assert boundary_class(CuspShape.from_exact(0, 1)) == {Boundary.ReZero, Boundary.UnitNorm}


def test_is_standard_half_open():
    assert is_standard(CuspShape.from_exact(Fraction(1, 2), 3))
    assert not is_standard(CuspShape.from_exact(Fraction(-1, 2), 3))
    assert is_standard(CuspShape.from_exact(Fraction(1, 3), 1))
    assert not is_standard(CuspShape.from_exact(Fraction(-1, 3), 1))
    assert is_standard(CuspShape(ComplexVal(-0.2, 3.0)))
