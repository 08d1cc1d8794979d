import json

import numpy as np
import pytest

from potkit.errors import GeometryError, InputError, NonImmersedCurveError
from potkit.geometry import (
    Circle,
    DomainSpec,
    FourierCurve,
    PolynomialImageCurve,
    build_grid,
    domain_from_json,
    domain_to_json,
    locate,
    make_domain,
    named_domain,
    signed_area,
    winding_number,
)

TWO_PI = 2 * np.pi


def test_unit_circle_perimeter_small_grid():
    grid = build_grid(named_domain("unit-disc"), 16)
    assert abs(np.sum(grid.ds) - TWO_PI) < 1e-12


def test_unit_circle_node_and_tangent():
    grid = build_grid(named_domain("unit-disc"), 16)
    assert grid.z[0] == pytest.approx(1.0)
    assert grid.tangent[0] == pytest.approx(1j)


def test_shifted_circle_perimeter():
    grid = build_grid(make_domain(Circle(1.0, 2.0)), 64)
    assert abs(np.sum(grid.ds) - 4 * np.pi) < 1e-10


def test_tangent_is_unimodular(annulus_grid):
    assert np.max(np.abs(np.abs(annulus_grid.tangent) - 1.0)) < 1e-12


def test_refinement_of_perimeter():
    # spectral trapezoid: doubling changes the perimeter below 1e-12
    dom = named_domain("cassini-like")
    p1 = np.sum(build_grid(dom, 64).ds)
    p2 = np.sum(build_grid(dom, 128).ds)
    assert abs(p1 - p2) < 1e-12


def test_locate_disc():
    grid = build_grid(named_domain("unit-disc"), 256)
    assert locate(grid, 0.0) == "inside"
    assert locate(grid, 2.0) == "outside"
    assert locate(grid, 1.0 + 1e-9j) == "near-boundary"


def test_locate_annulus(annulus_grid):
    assert locate(annulus_grid, 0.7) == "inside"
    assert locate(annulus_grid, 0.0) == "outside"  # the hole is not the domain
    assert locate(annulus_grid, 1.5) == "outside"


def test_interior_winding_is_one(annulus_grid, cassini_grid):
    assert winding_number(annulus_grid, 0.7) == pytest.approx(1.0, abs=1e-8)
    assert winding_number(cassini_grid, 0.1) == pytest.approx(1.0, abs=1e-8)


def test_orientation_flags():
    assert signed_area(Circle(0.0, 1.0)) > 0
    assert signed_area(Circle(0.0, 1.0, orientation=-1)) < 0


def test_make_domain_flips_hole_orientation():
    dom = make_domain(Circle(0.0, 1.0), holes=(Circle(0.0, 0.5),), base_points=(0.0,))
    assert signed_area(dom.holes[0]) < 0


def test_grid_rejects_bad_n():
    with pytest.raises(InputError):
        build_grid(named_domain("unit-disc"), 8)
    with pytest.raises(InputError):
        build_grid(named_domain("unit-disc"), 17)


def test_non_immersed_curve_rejected():
    # z(t) = e^{it} + 0.5 e^{2it} has z' = i e^{it}(1 + e^{it}) vanishing at t = pi
    with pytest.raises((NonImmersedCurveError, GeometryError)):
        make_domain(FourierCurve((1.0, 0.5), min_index=1))


def test_base_point_must_lie_in_hole():
    with pytest.raises(GeometryError):
        DomainSpec(
            Circle(0.0, 1.0),
            holes=(Circle(0.5, 0.2, orientation=-1),),
            base_points=(0.0,),
        )


def test_szego_point_must_lie_inside():
    with pytest.raises(GeometryError):
        make_domain(Circle(0.0, 1.0), szego_point=2.0)


def test_touching_curves_rejected():
    with pytest.raises(GeometryError):
        make_domain(
            Circle(0.0, 1.0),
            holes=(Circle(0.5, 0.5, orientation=-1),),
            base_points=(0.5,),
        )


def test_polynomial_image_injectivity_guard():
    with pytest.raises(GeometryError):
        PolynomialImageCurve((0.0, 1.0, 1.0))  # f' = 1 + 2 zeta vanishes inside


def test_domain_json_roundtrip():
    dom = named_domain("annulus:0.4")
    again = domain_from_json(json.loads(json.dumps(domain_to_json(dom))))
    grid1, grid2 = build_grid(dom, 32), build_grid(again, 32)
    assert np.allclose(grid1.z, grid2.z)
    assert again.base_points == dom.base_points


def test_named_domains():
    assert named_domain("unit-disc").connectivity == 1
    assert named_domain("annulus:0.5").connectivity == 2
    assert named_domain("cassini-like").connectivity == 1
    with pytest.raises(KeyError):
        named_domain("klein-bottle")
    with pytest.raises(InputError):
        named_domain("annulus:1.5")


def test_grid_arrays_are_readonly(disc_grid):
    with pytest.raises(ValueError):
        disc_grid.z[0] = 0.0
