"""Boundary geometry for multiply connected planar domains.

A domain is described by one positively oriented outer curve and any number
of negatively oriented hole curves, each a smooth 2*pi-periodic analytic
parametrization t -> z(t).  Grids are equispaced in the parameter, which
makes the trapezoid rule spectrally accurate for every kernel used downstream.

Conventions
-----------
The boundary is oriented so the domain lies on the left: outer curve
counterclockwise, holes clockwise.  The complex unit tangent is
T = z'(t)/|z'(t)| and the inward unit normal is i*T on every curve.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from typing import Union

import numpy as np

from .errors import GeometryError, InputError, NonImmersedCurveError

TWO_PI = 2.0 * np.pi

#: |z'(t)| below this rejects the curve as non-immersed.
IMMERSION_FLOOR = 1e-10

#: Refusal radius for interior evaluation, in units of local node spacing.
NEAR_BOUNDARY_FACTOR = 5.0

_VALIDATION_SAMPLES = 1024


# ---------------------------------------------------------------------------
# curve types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Circle:
    """Circle |z - center| = radius, traversed CCW for orientation +1."""

    center: complex
    radius: float
    orientation: int = 1

    def __post_init__(self):
        if self.radius <= 0:
            raise InputError(f"circle radius must be positive, got {self.radius}")
        if self.orientation not in (1, -1):
            raise InputError("orientation must be +1 or -1")

    def point(self, t):
        return self.center + self.radius * np.exp(1j * self.orientation * np.asarray(t))

    def velocity(self, t):
        return self.orientation * 1j * self.radius * np.exp(1j * self.orientation * np.asarray(t))


@dataclass(frozen=True)
class FourierCurve:
    """Trigonometric curve z(t) = sum_k c_k e^{ikt}, k = min_index .. min_index+len-1."""

    coef: tuple
    min_index: int = 0
    orientation: int = 1

    def __post_init__(self):
        object.__setattr__(self, "coef", tuple(complex(c) for c in self.coef))
        if not self.coef:
            raise InputError("fourier curve needs at least one coefficient")
        if self.orientation not in (1, -1):
            raise InputError("orientation must be +1 or -1")

    def _modes(self):
        k = np.arange(self.min_index, self.min_index + len(self.coef))
        return k, np.asarray(self.coef)

    def point(self, t):
        k, c = self._modes()
        tt = self.orientation * np.asarray(t, dtype=float)
        return np.exp(1j * np.multiply.outer(tt, k)) @ c

    def velocity(self, t):
        k, c = self._modes()
        tt = self.orientation * np.asarray(t, dtype=float)
        return self.orientation * (np.exp(1j * np.multiply.outer(tt, k)) @ (1j * k * c))


@dataclass(frozen=True)
class PolynomialImageCurve:
    """Image of the unit circle under the polynomial f(zeta) = sum_k coef[k] zeta^k.

    The parametrization inherits the circle's orientation; f must be injective
    on the closed disc, which is checked by sampling (|f'| bounded away from 0
    on the disc, pairwise distinct boundary images), not proven.
    """

    coef: tuple
    orientation: int = 1

    def __post_init__(self):
        object.__setattr__(self, "coef", tuple(complex(c) for c in self.coef))
        if len(self.coef) < 2:
            raise InputError("polynomial-image curve needs degree >= 1")
        if self.orientation not in (1, -1):
            raise InputError("orientation must be +1 or -1")
        self._check_injective()

    def _check_injective(self):
        c = np.asarray(self.coef)
        dc = c[1:] * np.arange(1, len(c))
        rad = np.linspace(0.0, 1.0, 9)[1:]
        ang = np.exp(1j * TWO_PI * np.arange(64) / 64)
        zeta = np.multiply.outer(rad, ang).ravel()
        fp = np.polynomial.polynomial.polyval(zeta, dc)
        if np.min(np.abs(fp)) < 1e-8:
            raise GeometryError("polynomial-image curve: f' vanishes inside the closed disc")
        m = 128
        img = np.polynomial.polynomial.polyval(np.exp(1j * TWO_PI * np.arange(m) / m), c)
        d = np.abs(img[:, None] - img[None, :])
        sep = (np.arange(m)[:, None] - np.arange(m)[None, :]) % m
        far = (sep > 2) & (sep < m - 2)
        if np.min(d[far]) < 1e-9:
            raise GeometryError("polynomial-image curve: sampled boundary self-intersects")

    def point(self, t):
        zeta = np.exp(1j * self.orientation * np.asarray(t, dtype=float))
        return np.polynomial.polynomial.polyval(zeta, np.asarray(self.coef))

    def velocity(self, t):
        c = np.asarray(self.coef)
        dc = c[1:] * np.arange(1, len(c))
        zeta = np.exp(1j * self.orientation * np.asarray(t, dtype=float))
        return np.polynomial.polynomial.polyval(zeta, dc) * 1j * self.orientation * zeta


Curve = Union[Circle, FourierCurve, PolynomialImageCurve]


def reverse_curve(curve: Curve) -> Curve:
    """Same point set, opposite orientation."""
    return replace(curve, orientation=-curve.orientation)


def signed_area(curve: Curve, n: int = _VALIDATION_SAMPLES) -> float:
    """(1/2i) \\oint conj(z) dz by the trapezoid rule; positive iff CCW."""
    t = TWO_PI * np.arange(n) / n
    z, dz = curve.point(t), curve.velocity(t)
    return float(np.real(np.sum(np.conj(z) * dz) * (TWO_PI / n) / 2j))


def _winding_sample(curves, w, n=_VALIDATION_SAMPLES):
    total = 0.0 + 0.0j
    for c in curves:
        t = TWO_PI * np.arange(n) / n
        z, dz = c.point(t), c.velocity(t)
        total += np.sum(dz / (z - w)) * (TWO_PI / n)
    return total / (2j * np.pi)


# ---------------------------------------------------------------------------
# domain
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DomainSpec:
    """A bounded n-connected domain with hole base points and a Szego base point.

    Invariants are checked on construction: every curve is immersed, the outer
    curve is positively oriented and each hole negatively, curves are mutually
    disjoint on a fine sample, each base point lies inside its hole, and the
    Szego point (when given) lies inside the domain.
    """

    outer: Curve
    holes: tuple = ()
    base_points: tuple = ()
    szego_point: complex | None = None

    def __post_init__(self):
        object.__setattr__(self, "holes", tuple(self.holes))
        object.__setattr__(self, "base_points", tuple(complex(b) for b in self.base_points))
        if self.szego_point is not None:
            object.__setattr__(self, "szego_point", complex(self.szego_point))
        if len(self.base_points) != len(self.holes):
            raise GeometryError(
                f"{len(self.holes)} holes need {len(self.holes)} base points, "
                f"got {len(self.base_points)}"
            )
        self._validate()

    @property
    def curves(self) -> tuple:
        return (self.outer, *self.holes)

    @property
    def connectivity(self) -> int:
        return 1 + len(self.holes)

    def _validate(self):
        t = TWO_PI * np.arange(_VALIDATION_SAMPLES) / _VALIDATION_SAMPLES
        samples = []
        for idx, c in enumerate(self.curves):
            speed = np.abs(c.velocity(t))
            if np.min(speed) < IMMERSION_FLOOR:
                raise NonImmersedCurveError(f"curve {idx}: |z'| drops to {np.min(speed):.3e}")
            samples.append(c.point(t))
        if signed_area(self.outer) <= 0:
            raise GeometryError("outer curve must be positively oriented (CCW)")
        for idx, h in enumerate(self.holes):
            if signed_area(h) >= 0:
                raise GeometryError(f"hole {idx} must be negatively oriented (CW)")
        for i in range(len(samples)):
            for j in range(i + 1, len(samples)):
                dmin = np.min(np.abs(samples[i][:, None] - samples[j][None, ::4]))
                if dmin <= 1e-9:
                    raise GeometryError(f"curves {i} and {j} touch (sampled distance {dmin:.2e})")
        for idx, (h, b) in enumerate(zip(self.holes, self.base_points)):
            w = _winding_sample([h], b)
            if abs(w - (-1.0)) > 0.1:
                raise GeometryError(f"base point {b} is not inside hole {idx}")
        if self.szego_point is not None and not self.contains(self.szego_point):
            raise GeometryError(f"szego point {self.szego_point} is not inside the domain")

    def contains(self, w: complex) -> bool:
        """Winding-number test on a construction-time sample (not the run grid)."""
        return abs(_winding_sample(self.curves, w) - 1.0) < 0.1


def make_domain(outer, holes=(), base_points=(), szego_point=None) -> DomainSpec:
    """Build a DomainSpec, flipping curve orientations to the required ones."""
    if signed_area(outer) < 0:
        outer = reverse_curve(outer)
    holes = tuple(reverse_curve(h) if signed_area(h) > 0 else h for h in holes)
    return DomainSpec(outer, holes, tuple(base_points), szego_point)


# ---------------------------------------------------------------------------
# grid
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BoundaryGrid:
    """Equispaced-parameter quadrature grid over all boundary curves.

    Arrays are concatenated curve blocks of equal length ``n``; ``dz`` holds
    z'(t) so that ``tangent = dz/|dz|`` and ``ds = |dz| * dt``.  ``sigma`` is
    +1 on the outer block and -1 on hole blocks.  All arrays are read-only;
    grids are safe to share across threads.
    """

    domain: DomainSpec
    n: int
    t: np.ndarray
    z: np.ndarray
    dz: np.ndarray
    tangent: np.ndarray
    ds: np.ndarray
    curve_index: np.ndarray
    sigma: np.ndarray

    @property
    def dt(self) -> float:
        return TWO_PI / self.n

    @property
    def total(self) -> int:
        return self.z.size

    @property
    def n_curves(self) -> int:
        return self.domain.connectivity

    def curve_slice(self, k: int) -> slice:
        return slice(k * self.n, (k + 1) * self.n)

    def nearest_node(self, w):
        """(distance, flat node index) of the node closest to w."""
        d = np.abs(self.z - w)
        i = int(np.argmin(d))
        return float(d[i]), i

    def is_near_boundary(self, w) -> bool:
        dist, i = self.nearest_node(w)
        return dist < NEAR_BOUNDARY_FACTOR * self.ds[i]

    def require_interior(self, w) -> None:
        from .errors import NearBoundaryError

        dist, i = self.nearest_node(w)
        if dist < NEAR_BOUNDARY_FACTOR * self.ds[i]:
            raise NearBoundaryError(
                f"point {w} is {dist:.3e} from the boundary; refusal radius "
                f"{NEAR_BOUNDARY_FACTOR * self.ds[i]:.3e} (raise n to evaluate closer)"
            )


def build_grid(domain: DomainSpec, n: int = 256) -> BoundaryGrid:
    """Equispaced trapezoidal grid with n nodes per curve.

    Requires n >= 16 and even.  Rejects curves whose sampled speed falls
    below the immersion floor.
    """
    if n < 16 or n % 2:
        raise InputError(f"n must be even and >= 16, got {n}")
    t = TWO_PI * np.arange(n) / n
    zs, dzs, idxs, sig = [], [], [], []
    for k, c in enumerate(domain.curves):
        z, dz = c.point(t), c.velocity(t)
        if np.min(np.abs(dz)) < IMMERSION_FLOOR:
            raise NonImmersedCurveError(f"curve {k}: |z'| below {IMMERSION_FLOOR}")
        zs.append(z)
        dzs.append(dz)
        idxs.append(np.full(n, k))
        sig.append(np.full(n, 1.0 if k == 0 else -1.0))
    z = np.concatenate(zs)
    dz = np.concatenate(dzs)
    grid = BoundaryGrid(
        domain=domain,
        n=n,
        t=np.tile(t, domain.connectivity),
        z=z,
        dz=dz,
        tangent=dz / np.abs(dz),
        ds=np.abs(dz) * (TWO_PI / n),
        curve_index=np.concatenate(idxs),
        sigma=np.concatenate(sig),
    )
    for arr in (grid.t, grid.z, grid.dz, grid.tangent, grid.ds, grid.curve_index, grid.sigma):
        arr.setflags(write=False)
    return grid


def winding_number(grid: BoundaryGrid, w) -> float:
    """Discretized Cauchy index of the full boundary about w."""
    return float(np.real(np.sum(grid.dz / (grid.z - w)) * grid.dt / (2j * np.pi)))


def locate(grid: BoundaryGrid, w) -> str:
    """Classify w as 'inside', 'outside', or 'near-boundary'."""
    if grid.is_near_boundary(w):
        return "near-boundary"
    return "inside" if abs(winding_number(grid, w) - 1.0) < 0.5 else "outside"


# ---------------------------------------------------------------------------
# JSON and named domains
# ---------------------------------------------------------------------------


def _pair(z) -> list:
    z = complex(z)
    return [z.real, z.imag]


def _cplx(p) -> complex:
    if isinstance(p, (int, float)):
        return complex(p)
    if isinstance(p, (list, tuple)) and len(p) == 2:
        return complex(p[0], p[1])
    raise InputError(f"expected [re, im], got {p!r}")


def curve_to_json(curve: Curve) -> dict:
    if isinstance(curve, Circle):
        d = {"kind": "circle", "center": _pair(curve.center), "radius": curve.radius}
    elif isinstance(curve, FourierCurve):
        d = {
            "kind": "fourier",
            "coefficients": [_pair(c) for c in curve.coef],
            "min_index": curve.min_index,
        }
    elif isinstance(curve, PolynomialImageCurve):
        d = {"kind": "polynomial-image", "coefficients": [_pair(c) for c in curve.coef]}
    else:
        raise InputError(f"unknown curve type {type(curve)}")
    if curve.orientation != 1:
        d["orientation"] = curve.orientation
    return d


def curve_from_json(obj: dict) -> Curve:
    try:
        kind = obj["kind"]
    except (TypeError, KeyError):
        raise InputError(f"curve object needs a 'kind' field: {obj!r}") from None
    orientation = int(obj.get("orientation", 1))
    if kind == "circle":
        return Circle(_cplx(obj["center"]), float(obj["radius"]), orientation)
    if kind == "fourier":
        return FourierCurve(
            tuple(_cplx(c) for c in obj["coefficients"]),
            int(obj.get("min_index", 0)),
            orientation,
        )
    if kind == "polynomial-image":
        return PolynomialImageCurve(tuple(_cplx(c) for c in obj["coefficients"]), orientation)
    raise InputError(f"unknown curve kind {kind!r}")


def domain_to_json(domain: DomainSpec) -> dict:
    out = {
        "outer": curve_to_json(domain.outer),
        "holes": [curve_to_json(h) for h in domain.holes],
        "base_points": [_pair(b) for b in domain.base_points],
    }
    if domain.szego_point is not None:
        out["szego_point"] = _pair(domain.szego_point)
    return out


def domain_from_json(obj: dict) -> DomainSpec:
    """Parse the domain spec file format; hole orientations are normalized."""
    try:
        outer = curve_from_json(obj["outer"])
    except (TypeError, KeyError):
        raise InputError("domain object needs an 'outer' curve") from None
    holes = tuple(curve_from_json(h) for h in obj.get("holes", []))
    base_points = tuple(_cplx(b) for b in obj.get("base_points", []))
    szego = obj.get("szego_point")
    return make_domain(outer, holes, base_points, _cplx(szego) if szego is not None else None)


def load_domain(path_or_name: str) -> DomainSpec:
    """Resolve a named built-in domain or read a domain JSON file."""
    try:
        return named_domain(path_or_name)
    except KeyError:
        pass
    try:
        with open(path_or_name) as fh:
            obj = json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read domain {path_or_name!r}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"malformed JSON in {path_or_name}: {exc}") from exc
    return domain_from_json(obj)


def named_domain(name: str) -> DomainSpec:
    """Built-in domains: 'unit-disc', 'annulus:r', 'cassini-like'."""
    if name == "unit-disc":
        return make_domain(Circle(0.0, 1.0))
    if name.startswith("annulus"):
        r = 0.5
        if ":" in name:
            try:
                r = float(name.split(":", 1)[1])
            except ValueError:
                raise InputError(f"bad annulus radius in {name!r}") from None
        if not 0.0 < r < 1.0:
            raise InputError(f"annulus radius must lie in (0,1), got {r}")
        return make_domain(
            Circle(0.0, 1.0),
            holes=(Circle(0.0, r, orientation=-1),),
            base_points=(0.0,),
            szego_point=(1.0 + r) / 2.0,
        )
    if name == "cassini-like":
        # wobbly analytic perturbation of the circle; simple by construction
        return make_domain(FourierCurve((0.05, 0.0, 1.0, 0.0, 0.08), min_index=-1))
    raise KeyError(name)
