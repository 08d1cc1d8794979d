import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from potkit.errors import (
    DegenerateSubstitutionError,
    InputError,
    PoleOnBoundaryError,
    ZeroRationalDivisionError,
)
from potkit.rational import (
    UNIT_DISC,
    BivariateRational,
    DiscRegion,
    Polynomial,
    UnivariateRational,
    parse_rational_expression,
    partial_fractions,
    rational_from_json,
    rational_to_json,
    residue_sum,
)

X = UnivariateRational.x()
ONE = UnivariateRational.constant(1.0)


def poly(*coef):
    return Polynomial(np.array(coef, dtype=complex))


def rat(num, den):
    return UnivariateRational(poly(*num), poly(*den))


# ---------------------------------------------------------------------------
# arithmetic
# ---------------------------------------------------------------------------


def test_sum_of_simple_poles():
    # 1/(z-1) + 1/(z+1) = 2z/(z^2-1), checked by recombination over a common
    # denominator and coefficient comparison
    r = ONE / (X - 1.0) + ONE / (X + 1.0)
    assert r.isclose(rat([0, 2], [-1, 0, 1]), 1e-12)


def test_derivative_of_inverse():
    assert (ONE / X).derivative().isclose(rat([-1], [0, 0, 1]), 1e-14)


def test_multiplicative_inverse_cancels():
    r = X * (ONE / X)
    assert r.num.degree == 0 and r.den.degree == 0
    assert r.isclose(ONE, 1e-14)


def test_division_by_zero_rational():
    with pytest.raises(ZeroRationalDivisionError):
        ONE / UnivariateRational.constant(0.0)


def test_denominator_monic_and_reduced():
    r = rat([2, 2], [4, 4, 4j])  # common root at -1 is NOT shared; just check monic
    assert abs(r.den.lead - 1.0) < 1e-14


def test_common_factor_removed():
    shared = poly(1.0, 1.0)  # z + 1
    r = UnivariateRational(shared * poly(2.0), shared * poly(0.0, 1.0))
    assert r.isclose(rat([2], [0, 1]), 1e-12)
    assert r.den.degree == 1


# ---------------------------------------------------------------------------
# substitution (meromorphic extension step)
# ---------------------------------------------------------------------------


def test_substitute_schwarz_zw():
    R = BivariateRational.z() * BivariateRational.w()
    assert R.substitute_w(ONE / X).isclose(ONE, 1e-14)


def test_substitute_schwarz_w_squared():
    R = BivariateRational.w() ** 2
    assert R.substitute_w(ONE / X).isclose(rat([1], [0, 0, 1]), 1e-14)


def test_substitute_pole_in_w():
    # 1/(w - 1/2) with w = 1/z gives 2z/(2-z), verified by recombination
    R = BivariateRational.constant(1.0) / (BivariateRational.w() - 0.5)
    expect = rat([0, 2], [2, -1])
    assert R.substitute_w(ONE / X).isclose(expect, 1e-12)


def test_degenerate_substitution():
    R = BivariateRational.constant(1.0) / (BivariateRational.z() * BivariateRational.w() - 1.0)
    with pytest.raises(DegenerateSubstitutionError):
        R.substitute_w(ONE / X)  # z * (1/z) - 1 == 0


def test_boundary_conjugate_on_circle():
    R = parse_rational_expression("z**2 + 1/(2+zbar)")
    z = np.exp(1j * np.linspace(0.1, 6.0, 13))
    assert np.allclose(
        R.boundary_conjugate_circle().eval_boundary(z), np.conj(R.eval_boundary(z)), atol=1e-13
    )


# ---------------------------------------------------------------------------
# partial fractions and residues
# ---------------------------------------------------------------------------


def test_partial_fractions_spec_example():
    pf = partial_fractions(ONE / (X * (X - 2.0)), region=UNIT_DISC)
    assert len(pf.inside) == 1
    part = pf.inside[0]
    assert abs(part.location) < 1e-12
    assert part.order == 1
    assert part.coef[0] == pytest.approx(-0.5)


def test_partial_fractions_double_pole():
    pf = partial_fractions(X / ((X - 1j) * (X - 1j)))
    (part,) = pf.inside
    assert part.location == pytest.approx(1j, abs=1e-7)
    assert part.coef[0] == pytest.approx(1.0, abs=1e-7)   # a_1
    assert part.coef[1] == pytest.approx(1j, abs=1e-7)    # a_2


def test_partial_fractions_outside_pole():
    pf = partial_fractions(ONE / (X - 2.0), region=UNIT_DISC)
    assert pf.inside == ()
    assert pf.polynomial.is_zero
    assert pf.remainder.isclose(ONE / (X - 2.0), 1e-12)


def test_pole_on_boundary_rejected():
    with pytest.raises(PoleOnBoundaryError):
        partial_fractions(ONE / (X - 1.0), region=UNIT_DISC)
    with pytest.raises(PoleOnBoundaryError):
        partial_fractions(ONE / (X - (1.0 + 5e-9)), region=UNIT_DISC)


def test_residue_examples():
    assert residue_sum(ONE / X) == pytest.approx(1.0)
    assert residue_sum(ONE / (X - 2.0)) == pytest.approx(0.0)
    assert residue_sum(ONE / (X * (X - 2.0))) == pytest.approx(-0.5)


def test_residue_in_shifted_region():
    assert residue_sum(ONE / (X - 2.0), region=DiscRegion(2.0, 0.5)) == pytest.approx(1.0)


# ---------------------------------------------------------------------------
# property tests
# ---------------------------------------------------------------------------


def _separated_roots(draw, max_roots=8, min_sep=0.1):
    n = draw(st.integers(min_value=1, max_value=max_roots))
    roots = []
    pool = draw(
        st.lists(
            st.complex_numbers(max_magnitude=2.0, allow_nan=False, allow_infinity=False),
            min_size=4 * max_roots,
            max_size=4 * max_roots,
        )
    )
    for cand in pool:
        if all(abs(cand - r) >= min_sep for r in roots):
            roots.append(cand)
        if len(roots) == n:
            break
    return roots


@st.composite
def simple_pole_rationals(draw):
    roots = _separated_roots(draw)
    num_coef = draw(
        st.lists(
            st.complex_numbers(min_magnitude=0.0, max_magnitude=2.0, allow_nan=False, allow_infinity=False),
            min_size=1,
            max_size=len(roots),
        )
    )
    num = Polynomial(np.array(num_coef) + 0.1)  # keep the numerator away from zero scale
    return UnivariateRational(num, Polynomial.from_roots(roots))


@settings(max_examples=30, deadline=None)
@given(simple_pole_rationals())
def test_reconstruction_property(r):
    # oracle: recombine the decomposition and compare as rationals
    pf = partial_fractions(r)
    assert pf.reconstruct().isclose(r, 1e-8)


@settings(max_examples=20, deadline=None)
@given(st.integers(min_value=0, max_value=10_000))
def test_residue_trapezoid_agreement(seed):
    # oracle: residue sum equals (1/2 pi i) oint r dz by the N=512 trapezoid
    # rule, for poles at distance >= 0.1 from the circle
    rng = np.random.default_rng(seed)
    k = int(rng.integers(1, 5))
    roots = []
    while len(roots) < k:
        rad = rng.uniform(0.1, 0.85) if rng.uniform() < 0.6 else rng.uniform(1.15, 2.5)
        cand = rad * np.exp(2j * np.pi * rng.uniform())
        if all(abs(cand - r) > 0.1 for r in roots):
            roots.append(complex(cand))
    num = Polynomial(rng.normal(size=k) + 1j * rng.normal(size=k))
    r = UnivariateRational(num, Polynomial.from_roots(roots))
    n = 512
    z = np.exp(2j * np.pi * np.arange(n) / n)
    trapz = np.sum(r(z) * 1j * z) * (2 * np.pi / n) / (2j * np.pi)
    assert abs(residue_sum(r) - trapz) < 1e-8


# ---------------------------------------------------------------------------
# JSON and expressions
# ---------------------------------------------------------------------------


def test_univariate_json_roundtrip():
    r = rat([1, 2j], [0, 0, 1])
    again = rational_from_json(rational_to_json(r))
    assert again.isclose(r, 1e-14)


def test_bivariate_json_roundtrip():
    R = parse_rational_expression("zbar**2 + 1/(2+z)")
    again = rational_from_json(rational_to_json(R))
    z = np.exp(1j * np.linspace(0.0, 6.0, 7))
    assert np.allclose(again.eval_boundary(z), R.eval_boundary(z), atol=1e-13)


def test_expression_rejects_unknown_names():
    with pytest.raises(InputError):
        parse_rational_expression("q + 1")
    with pytest.raises(InputError):
        parse_rational_expression("__import__('os')")


def test_expression_negative_power():
    R = parse_rational_expression("z**-1")
    assert R.eval(2.0, 0.0) == pytest.approx(0.5)
