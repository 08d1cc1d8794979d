import numpy as np
import pytest

from conftest import (
    annulus_garabedian_series,
    annulus_szego_series,
    disc_szego_exact,
)
from potkit.errors import BasePointError, NearBoundaryError
from potkit.geometry import Circle, FourierCurve, build_grid, make_domain, named_domain
from potkit.szego import (
    ahlfors_boundary,
    ahlfors_map,
    assemble_kerzman_stein,
    boundary_cauchy,
    boundary_derivative,
    build_szego_system,
    cauchy_integral,
    default_base_point,
    spectral_derivative,
    szego_projection,
)


def ellipse_domain():
    return make_domain(FourierCurve((0.1, 0.0, 1.0), min_index=-1))


# ---------------------------------------------------------------------------
# Kerzman-Stein matrix
# ---------------------------------------------------------------------------


def test_ks_vanishes_on_circle(disc_grid):
    A = assemble_kerzman_stein(disc_grid)
    assert np.max(np.abs(A)) < 1e-12


def test_ks_skew_hermitian(annulus_grid, cassini_grid):
    for grid in (annulus_grid, cassini_grid):
        A = assemble_kerzman_stein(grid)
        assert np.max(np.abs(A + A.conj().T)) < 1e-12


def test_ks_refinement():
    # kernels at common nodes agree under refinement (ellipse-like curve)
    dom = ellipse_domain()
    A1 = assemble_kerzman_stein(build_grid(dom, 128))
    A2 = assemble_kerzman_stein(build_grid(dom, 256))
    assert np.max(np.abs(A1 - A2[::2, ::2])) < 1e-8


# ---------------------------------------------------------------------------
# the kernel solve: disc closed forms and annulus series oracles
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("a", [0.0, 0.3, 0.5j])
def test_disc_szego_closed_form(disc_system, a):
    s = disc_system.with_base_point(complex(a))
    exact = disc_szego_exact(s.grid.z, complex(a))
    assert np.max(np.abs(s.szego_boundary - exact)) < 1e-10


def test_disc_szego_value_at_node():
    grid = build_grid(named_domain("unit-disc"), 64)
    s = build_szego_system(grid, a=0.3)
    assert s.szego_boundary[0] == pytest.approx(1 / (2 * np.pi * 0.7), abs=1e-12)


def test_scaled_disc_constant_kernel():
    grid = build_grid(make_domain(Circle(0.0, 2.0)), 64)
    s = build_szego_system(grid, a=0.0)
    assert np.max(np.abs(s.szego_boundary - 1.0 / (4 * np.pi))) < 1e-12


def test_disc_garabedian_closed_form(disc_system):
    grid = disc_system.grid
    assert np.max(np.abs(disc_system.garabedian_boundary - 1 / (2 * np.pi * grid.z))) < 1e-12


def test_annulus_szego_matches_series(annulus_system):
    grid = annulus_system.grid
    exact = annulus_szego_series(grid.z, 0.75, 0.5)
    assert np.max(np.abs(annulus_system.szego_boundary - exact)) < 1e-12


def test_annulus_garabedian_matches_series(annulus_system):
    grid = annulus_system.grid
    exact = annulus_garabedian_series(grid.z, 0.75, 0.5)
    assert np.max(np.abs(annulus_system.garabedian_boundary - exact)) < 1e-12


def test_garabedian_identity(disc_system, annulus_system, cassini_system):
    for system in (disc_system, annulus_system, cassini_system):
        assert system.garabedian_identity_residual() < 1e-12


def test_solve_residual(annulus_system):
    assert annulus_system.solve_residual() < 1e-10


def test_reproducing_property(disc_system, annulus_system, cassini_system):
    for system in (disc_system, annulus_system, cassini_system):
        assert system.reproducing_residual() < 1e-6


def test_condition_estimate(disc_system, annulus_system, cassini_system):
    for system in (disc_system, annulus_system, cassini_system):
        assert system.condition_estimate() < 100.0


def test_hermitian_symmetry_interior_pairs(annulus_system):
    # S(z, w) = conj(S(w, z)) with each side its own Kerzman-Stein solve
    pairs = [(0.7 + 0.05j, -0.6 - 0.1j), (0.62, 0.6j + 0.2)]
    for z, w in pairs:
        s_zw = annulus_system.with_base_point(w, find_zeros=False).szego_at(z)
        s_wz = annulus_system.with_base_point(z, find_zeros=False).szego_at(w)
        assert abs(s_zw - np.conj(s_wz)) < 1e-7


def test_convergence_under_refinement():
    dom = ellipse_domain()
    prev = None
    errors = []
    for n in (32, 64, 128):
        s = build_szego_system(build_grid(dom, n), a=0.1)
        if prev is not None:
            errors.append(np.max(np.abs(prev - s.szego_boundary[:: s.grid.n // (n // 2)])))
        prev = s.szego_boundary
    # spectral: each doubling shrinks the gap by far more than 10x (until floor)
    assert errors[1] < 0.1 * errors[0] or errors[1] < 1e-13


# ---------------------------------------------------------------------------
# interior evaluation
# ---------------------------------------------------------------------------


def test_cauchy_reproduces_polynomial(disc_grid):
    assert abs(cauchy_integral(disc_grid, disc_grid.z**2, 0.5) - 0.25) < 1e-10


def test_cauchy_reproduces_cauchy_data(disc_grid):
    table = 1.0 / (disc_grid.z - 2.0)
    assert abs(cauchy_integral(disc_grid, table, 0.0) + 0.5) < 1e-12


def test_cauchy_constant(disc_grid):
    assert abs(cauchy_integral(disc_grid, np.ones(disc_grid.total), 0.3 + 0.4j) - 1.0) < 1e-12


def test_cauchy_derivative(disc_grid):
    assert abs(cauchy_integral(disc_grid, disc_grid.z**3, 0.4, order=1) - 3 * 0.16) < 1e-10


def test_cauchy_near_boundary_refusal(disc_grid):
    with pytest.raises(NearBoundaryError):
        cauchy_integral(disc_grid, disc_grid.z, 0.999)


def test_cauchy_multiply_connected(annulus_grid):
    # full-boundary Cauchy integral reproduces holomorphic functions
    f = 1.0 / (annulus_grid.z - 3.0) + annulus_grid.z
    val = cauchy_integral(annulus_grid, f, 0.7)
    assert abs(val - (1 / (0.7 - 3.0) + 0.7)) < 1e-12


# ---------------------------------------------------------------------------
# boundary Cauchy transform and projection
# ---------------------------------------------------------------------------


def test_boundary_cauchy_fixes_holomorphic(annulus_system):
    grid = annulus_system.grid
    f = grid.z**2 + 1.0 / (grid.z - 3.0)
    assert np.max(np.abs(boundary_cauchy(annulus_system._disc, f) - f)) < 1e-12


def test_projection_disc_zbar(disc_system):
    out = szego_projection(disc_system, np.conj(disc_system.grid.z))
    assert np.max(np.abs(out)) < 1e-8


def test_projection_disc_constant(disc_system):
    out = szego_projection(disc_system, np.ones(disc_system.grid.total))
    assert np.max(np.abs(out - 1.0)) < 1e-12


def test_projection_fft_oracle(disc_system):
    # independent oracle on the disc: Hardy projection = keep modes n >= 0
    grid = disc_system.grid
    u = np.real(grid.z) + np.imag(grid.z) ** 2
    c = np.fft.fft(u) / grid.n
    c[grid.n // 2 :] = 0.0
    expected = np.fft.ifft(c * grid.n)
    assert np.max(np.abs(szego_projection(disc_system, u) - expected)) < 1e-10


def test_projection_identity_paper(disc_system, annulus_system):
    # P u = u - conj(P(conj(u T))) conj(T) on the boundary
    for system in (disc_system, annulus_system):
        grid = system.grid
        u = np.real(grid.z)
        lhs = szego_projection(system, u)
        rhs = u - np.conj(szego_projection(system, np.conj(u * grid.tangent))) * np.conj(
            grid.tangent
        )
        assert np.max(np.abs(lhs - rhs)) < 1e-7


def test_projection_annulus_zbar(annulus_system):
    # P zbar = r/z on the annulus (Laurent-orthogonality hand computation)
    grid = annulus_system.grid
    out = szego_projection(annulus_system, np.conj(grid.z))
    assert np.max(np.abs(out - 0.5 / grid.z)) < 1e-10


def test_spectral_derivative(annulus_grid):
    vals = np.exp(2j * annulus_grid.t) + 0.3 * np.exp(-1j * annulus_grid.t)
    expect = 2j * np.exp(2j * annulus_grid.t) - 0.3j * np.exp(-1j * annulus_grid.t)
    assert np.max(np.abs(spectral_derivative(annulus_grid, vals) - expect)) < 1e-12


def test_boundary_derivative(disc_grid):
    table = disc_grid.z**3
    assert np.max(np.abs(boundary_derivative(disc_grid, table) - 3 * disc_grid.z**2)) < 1e-11


# ---------------------------------------------------------------------------
# zeros of S_a
# ---------------------------------------------------------------------------


def test_disc_has_no_zeros(disc_system):
    assert disc_system.zeros == ()


def test_annulus_zero_location(annulus_system):
    # closed form: the zero of S(., a) on r < |z| < 1 sits at -r/a
    (zero,) = annulus_system.zeros
    assert zero == pytest.approx(-0.5 / 0.75, abs=1e-10)


def test_annulus_zero_simple(annulus_system):
    dval = annulus_system.szego_at(annulus_system.zeros[0], order=1)
    assert abs(dval) > 1e-8


def test_zero_count_three_connected():
    dom = make_domain(
        Circle(0.0, 1.0),
        holes=(Circle(-0.45, 0.18, orientation=-1), Circle(0.45, 0.18, orientation=-1)),
        base_points=(-0.45, 0.45),
    )
    system = build_szego_system(build_grid(dom, 128))
    assert len(system.zeros) == 2


def test_explicit_bad_base_point_raises():
    grid = build_grid(named_domain("annulus:0.5"), 64)
    with pytest.raises(BasePointError):
        build_szego_system(grid, a=2.0)  # outside


def test_default_base_point_inside(annulus_grid):
    a = default_base_point(annulus_grid)
    from potkit.geometry import winding_number

    assert abs(winding_number(annulus_grid, a) - 1.0) < 0.1


# ---------------------------------------------------------------------------
# Ahlfors map
# ---------------------------------------------------------------------------


def test_ahlfors_disc_is_identity(disc_system):
    assert abs(ahlfors_map(disc_system, 0.5) - 0.5) < 1e-8
    assert abs(ahlfors_map(disc_system, 0.0)) < 1e-8


def test_ahlfors_unimodular_on_boundary(annulus_system):
    assert np.max(np.abs(np.abs(ahlfors_boundary(annulus_system)) - 1.0)) < 1e-7


def test_ahlfors_interior_modulus_below_one(annulus_system):
    for z in (0.7, -0.6 + 0.1j, 0.66j):
        assert abs(ahlfors_map(annulus_system, z)) < 1.0


def test_ahlfors_vanishes_at_base_point(annulus_system):
    assert abs(ahlfors_map(annulus_system, annulus_system.a)) < 1e-8
