import numpy as np
import pytest

from potkit.errors import EvaluationError, InputError, MathError, PoleOnBoundaryError
from potkit.exactdisc import (
    DiscModel,
    PolynomialImageModel,
    cauchy_adjoint_disc,
    cauchy_transform_disc,
    exact_dirichlet_disc,
    exact_szego_projection_disc,
    green_derivative_disc,
    kerzman_stein_apply_disc,
    residue_boundary_integral,
    schwarz_identity_report,
    verify_quadrature_identity,
)
from potkit.rational import (
    BivariateRational,
    Polynomial,
    UnivariateRational,
    parse_rational_expression,
)
from potkit.validate import random_corpus

Z = BivariateRational.z()
W = BivariateRational.w()  # stands for conj(z) on the circle
ONE = BivariateRational.constant(1.0)
X = UnivariateRational.x()


# ---------------------------------------------------------------------------
# Schwarz models
# ---------------------------------------------------------------------------


def test_disc_schwarz_values():
    assert DiscModel(0.0, 1.0).schwarz_eval(0.5) == pytest.approx(2.0)
    # disc center 1 radius 2: S(z) = 1 + 4/(z-1), so S(3) = 3 = conj(3)
    assert DiscModel(1.0, 2.0).schwarz_eval(3.0) == pytest.approx(3.0)


def test_disc_schwarz_pole_at_center():
    with pytest.raises(EvaluationError):
        DiscModel(0.0, 1.0).schwarz_eval(0.0)


def test_schwarz_rational_matches_eval():
    model = DiscModel(0.3 + 0.2j, 1.7)
    z = model.boundary_points(32) * 0.97 + 0.01
    assert np.allclose(model.schwarz_rational()(z), model.schwarz_eval(z), atol=1e-12)


def test_polynomial_image_boundary_identity():
    model = PolynomialImageModel(Polynomial(np.array([0.0, 1.0, 0.1], dtype=complex)))
    zeta = np.exp(1j * np.pi / 3)
    z = model.f(zeta)
    assert abs(model.schwarz_eval(z) - np.conj(z)) < 1e-10
    assert model.schwarz_boundary_residual() < 1e-9


def test_schwarz_identity_both_models():
    assert schwarz_identity_report(DiscModel(0.0, 1.0)) < 1e-9
    model = PolynomialImageModel(Polynomial(np.array([0.05, 1.0, 0.08, 0.02j], dtype=complex)))
    assert schwarz_identity_report(model) < 1e-9


def test_polynomial_image_interior_point():
    model = PolynomialImageModel(Polynomial(np.array([0.0, 1.0, 0.1], dtype=complex)))
    # S at an interior preimage should NOT equal conj(z) (only on the boundary)
    z = model.f(0.5)
    val = model.schwarz_eval(z)
    assert abs(val - model._fstar(2.0)) < 1e-10


# ---------------------------------------------------------------------------
# Green derivatives
# ---------------------------------------------------------------------------


def test_green_derivative_paper_value():
    g1 = green_derivative_disc(1, 0.0)
    assert g1.eval(0.5, 0.5) == pytest.approx(0.75)


def test_green_derivative_vanishes_on_boundary():
    g1 = green_derivative_disc(1, 0.3 - 0.2j)
    z = np.exp(1j * np.linspace(0.0, 6.2, 17))
    assert np.max(np.abs(g1.eval(z, np.conj(z)))) < 1e-13


def test_green_derivative_second_order_hand_formula():
    # m=2, w=0: (1 - z conj z)/2 * (1/z^2 + conj(z)/z)
    g2 = green_derivative_disc(2, 0.0)
    z = 0.4 + 0.1j
    expect = (1 - abs(z) ** 2) / 2 * (1 / z**2 + np.conj(z) / z)
    assert g2.eval(z, np.conj(z)) == pytest.approx(expect)


@pytest.mark.parametrize("m", [1, 2, 3])
def test_green_derivative_fd_oracle(m):
    # independent oracle: central differences in w of G^(m-1), with
    # G^(0)(z, w) = -ln|(z - w)/(1 - w conj z)| evaluated directly
    w0, z = 0.21 - 0.13j, 0.52 + 0.31j

    def gm(w, order):
        if order == 0:
            return -np.log(np.abs((z - w) / (1 - w * np.conj(z))))
        return green_derivative_disc(order, w).eval(z, np.conj(z))

    h = 1e-5
    fd = (
        gm(w0 + h, m - 1)
        - gm(w0 - h, m - 1)
        - 1j * (gm(w0 + 1j * h, m - 1) - gm(w0 - 1j * h, m - 1))
    ) / (4 * h)
    assert abs(green_derivative_disc(m, w0).eval(z, np.conj(z)) - fd) < 1e-7


def test_green_derivative_rejects_m0_and_exterior():
    with pytest.raises(InputError):
        green_derivative_disc(0, 0.0)
    with pytest.raises(InputError):
        green_derivative_disc(1, 1.5)


def test_green_derivative_principal_part():
    # principal part at z = w is ((m-1)!/2) (z-w)^{-m}
    w = 0.4j
    g3 = green_derivative_disc(3, w)
    eps = 1e-4
    z = w + eps
    lead = 2.0 / (2 * eps**3)  # (3-1)!/2 / eps^3
    assert abs(g3.eval(z, np.conj(z))) == pytest.approx(abs(lead), rel=1e-2)


# ---------------------------------------------------------------------------
# exact Dirichlet by pole subtraction
# ---------------------------------------------------------------------------


def test_exact_dirichlet_zbar():
    form = exact_dirichlet_disc(W)
    assert form.constants == ((0j, 1, (2 + 0j)),)
    z = 0.3 + 0.2j
    assert form.evaluate(z) == pytest.approx(np.conj(z))
    assert form.boundary_residual() < 1e-9
    assert form.subtraction_residual() < 1e-9


def test_exact_dirichlet_zzbar_is_one():
    form = exact_dirichlet_disc(Z * W)
    assert form.evaluate(0.3) == pytest.approx(1.0)


def test_exact_dirichlet_pole_outside():
    form = exact_dirichlet_disc(ONE / (W - 0.5))
    assert form.constants == ()
    z = 0.3 - 0.25j
    assert form.evaluate(z) == pytest.approx(2 * z / (2 - z))


def test_exact_dirichlet_harmonicity():
    form = exact_dirichlet_disc(parse_rational_expression("1/(2+z) + conj(1/(2+z))"))
    pts = np.array([0.3 + 0.2j, -0.4 + 0.1j, 0.5j])
    assert form.laplacian_residual(pts) < 1e-4
    assert form.boundary_residual() < 1e-9


def test_exact_dirichlet_boundary_pole_rejected():
    with pytest.raises(PoleOnBoundaryError):
        exact_dirichlet_disc(ONE / (W - 1.0))


def test_subtraction_completeness_random_corpus():
    for R in random_corpus(8, seed=5):
        form = exact_dirichlet_disc(R)
        assert form.subtraction_residual() < 1e-9
        assert form.boundary_residual() < 1e-8


# ---------------------------------------------------------------------------
# residue boundary integration
# ---------------------------------------------------------------------------


def test_integral_of_one():
    assert residue_boundary_integral(ONE) == pytest.approx(2 * np.pi)


def test_integral_of_zbar():
    assert residue_boundary_integral(W) == pytest.approx(0.0, abs=1e-12)


def test_integral_of_cauchy_data():
    assert residue_boundary_integral(ONE / (2.0 + Z)) == pytest.approx(np.pi)


def test_integral_matches_trapezoid_corpus():
    n = 512
    z = np.exp(2j * np.pi * np.arange(n) / n)
    for R in random_corpus(10, seed=11):
        trapz = np.sum(R.eval_boundary(z)) * (2 * np.pi / n)
        assert abs(residue_boundary_integral(R) - trapz) < 1e-8


# ---------------------------------------------------------------------------
# section-6 operators
# ---------------------------------------------------------------------------


def test_projection_examples():
    assert exact_szego_projection_disc(W).is_zero
    assert exact_szego_projection_disc(ONE).isclose(UnivariateRational.constant(1.0), 1e-12)
    assert exact_szego_projection_disc(Z + W).isclose(X, 1e-12)


def test_projection_idempotent_on_corpus():
    for R in random_corpus(20, seed=101):
        once = exact_szego_projection_disc(R)
        twice = exact_szego_projection_disc(BivariateRational.from_univariate(once))
        diff = once - twice
        scale = max(once.num.norm, 1.0)
        assert diff.num.norm <= 1e-10 * scale


def test_cauchy_examples():
    assert cauchy_transform_disc(W).is_zero
    v = cauchy_adjoint_disc(W)
    assert v.sup_on_circle() < 1e-13


def test_kerzman_stein_vanishes_on_small_cases():
    for R in (ONE, W, Z * W):
        assert kerzman_stein_apply_disc(R).sup_on_circle() < 1e-12


def test_kerzman_stein_vanishes_on_corpus():
    for R in random_corpus(20, seed=101):
        scale = max(1.0, R.sup_on_circle())
        assert kerzman_stein_apply_disc(R).sup_on_circle() <= 1e-9 * scale


# ---------------------------------------------------------------------------
# quadrature identities
# ---------------------------------------------------------------------------


def test_quadrature_identities_cubic():
    rep = verify_quadrature_identity(DiscModel(0.0, 1.0), X * X * X)
    assert rep.area_error < 1e-12 and rep.arc_error < 1e-12
    assert rep.area_expected == 0.0


def test_quadrature_identities_cauchy_data():
    g = UnivariateRational.constant(1.0) / (X - 2.0)
    rep = verify_quadrature_identity(DiscModel(0.0, 1.0), g)
    assert rep.area_integral == pytest.approx(np.pi * (-0.5))
    assert rep.arc_integral == pytest.approx(2 * np.pi * (-0.5))


def test_quadrature_identities_constant():
    rep = verify_quadrature_identity(DiscModel(0.0, 1.0), UnivariateRational.constant(1.0))
    assert rep.area_integral == pytest.approx(np.pi)
    assert rep.arc_integral == pytest.approx(2 * np.pi)


def test_quadrature_identity_shifted_disc():
    model = DiscModel(0.5, 2.0)
    g = UnivariateRational.constant(1.0) / (X - 4.0)
    rep = verify_quadrature_identity(model, g)
    assert rep.area_integral == pytest.approx(np.pi * 4.0 * g(0.5))
    assert rep.arc_integral == pytest.approx(2 * np.pi * 2.0 * g(0.5))


def test_quadrature_identity_rejects_interior_pole():
    with pytest.raises(MathError):
        verify_quadrature_identity(DiscModel(0.0, 1.0), ONE.restrict_circle() / X)
