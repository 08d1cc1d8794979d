"""Exact layer: Schwarz models, pole-subtraction Dirichlet solutions on the
disc, residue boundary integration, and closed-form boundary operators.

Everything here stays inside rational arithmetic.  Boundary data enters as a
bivariate rational R(z, w) with w standing for conj(z); substituting the
Schwarz function S(z) = 1/z of the unit disc extends the data meromorphically,
and the disc Green derivative

    G^(m)(z, w) = ((m-1)!/2) [ (z - w)^{-m} - conj(z)^m (1 - w conj(z))^{-m} ]

removes the interior poles.  G^(m) vanishes identically for |z| = 1 and its
principal part at z = w is ((m-1)!/2)(z - w)^{-m}, so the subtraction
constants are c_k = 2 a_k / (k-1)! for principal-part coefficients a_k.
The constant was confirmed against finite differences of the Green's function
before being relied on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import EvaluationError, InputError, MathError
from .rational import (
    UNIT_DISC,
    BivariateRational,
    DiscRegion,
    PolePrincipalPart,
    Polynomial,
    UnivariateRational,
    partial_fractions,
    residue_sum,
)

TWO_PI = 2.0 * math.pi


# ---------------------------------------------------------------------------
# Schwarz models
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DiscModel:
    """Disc |z - center| < radius: S(z) = conj(center) + radius^2/(z - center)."""

    center: complex = 0.0
    radius: float = 1.0

    def __post_init__(self):
        if self.radius <= 0:
            raise InputError("disc radius must be positive")

    @property
    def region(self) -> DiscRegion:
        return DiscRegion(self.center, self.radius)

    def schwarz_rational(self) -> UnivariateRational:
        c, r = complex(self.center), self.radius
        return UnivariateRational(
            Polynomial(np.array([np.conj(c) * (-c) + r * r, np.conj(c)], dtype=complex)),
            Polynomial(np.array([-c, 1.0], dtype=complex)),
        )

    def schwarz_eval(self, z):
        z = np.asarray(z, dtype=complex)
        d = z - self.center
        if np.any(np.abs(d) < 1e-14):
            raise EvaluationError("Schwarz function pole at the disc center")
        return np.conj(self.center) + self.radius**2 / d

    def boundary_points(self, m: int = 256) -> np.ndarray:
        return self.center + self.radius * np.exp(1j * TWO_PI * np.arange(m) / m)

    def schwarz_boundary_residual(self, m: int = 256) -> float:
        z = self.boundary_points(m)
        return float(np.max(np.abs(self.schwarz_eval(z) - np.conj(z))))


@dataclass(frozen=True)
class PolynomialImageModel:
    """Image of the unit disc under an injective polynomial f.

    S(f(zeta)) = f*(1/zeta) with f* the coefficient-conjugated polynomial;
    evaluation solves f(zeta) = z for the unique preimage in the closed disc
    (companion-matrix roots, Newton polish).
    """

    f: Polynomial

    def __post_init__(self):
        if not isinstance(self.f, Polynomial):
            object.__setattr__(self, "f", Polynomial(np.asarray(self.f, dtype=complex)))
        if self.f.degree < 1:
            raise InputError("polynomial-image model needs degree >= 1")
        zeta = np.exp(1j * TWO_PI * np.arange(64) / 64) * np.linspace(0.05, 1.0, 8)[:, None]
        if np.min(np.abs(self.f.derivative()(zeta.ravel()))) < 1e-8:
            raise InputError("f' vanishes on the closed disc; f is not injective")

    @cached_property
    def _fstar(self) -> Polynomial:
        return self.f.conjugate()

    def preimage(self, z: complex) -> complex:
        shifted = self.f - Polynomial.constant(z)
        roots = shifted.roots()
        inside = roots[np.abs(roots) <= 1.0 + 1e-9]
        if inside.size == 0:
            raise EvaluationError(f"no preimage of {z} inside the closed disc")
        zeta = complex(inside[np.argmin(np.abs(inside))] if inside.size > 1 else inside[0])
        fp = self.f.derivative()
        for _ in range(3):
            d = fp(zeta)
            if abs(d) < 1e-14:
                raise EvaluationError("preimage Newton hit a critical point")
            zeta = zeta - (self.f(zeta) - z) / d
        if abs(self.f(zeta) - z) > 1e-9 * (1.0 + abs(z)):
            raise EvaluationError(f"preimage Newton did not converge at {z}")
        return zeta

    def schwarz_eval(self, z):
        zs = np.atleast_1d(np.asarray(z, dtype=complex))
        out = np.empty_like(zs)
        for i, zi in enumerate(zs):
            zeta = self.preimage(zi)
            if abs(zeta) < 1e-12:
                raise EvaluationError("Schwarz function pole: preimage at the origin")
            out[i] = self._fstar(1.0 / zeta)
        return out if np.ndim(z) else complex(out[0])

    def boundary_points(self, m: int = 256) -> np.ndarray:
        return self.f(np.exp(1j * TWO_PI * np.arange(m) / m))

    def schwarz_boundary_residual(self, m: int = 256) -> float:
        zeta = np.exp(1j * TWO_PI * np.arange(m) / m)
        z = self.f(zeta)
        return float(np.max(np.abs(self._fstar(1.0 / zeta) - np.conj(z))))


def schwarz_eval(model, z):
    """Evaluate the model's Schwarz function; S(z) = conj(z) on the boundary."""
    return model.schwarz_eval(z)


# ---------------------------------------------------------------------------
# disc Green derivatives and pole subtraction
# ---------------------------------------------------------------------------


def green_derivative_disc(m: int, w: complex) -> BivariateRational:
    """G^(m)(z, w) on the unit disc as a bivariate rational in (z, conj z).

    Requires m >= 1 (the m = 0 Green's function has a log and is not
    rational) and |w| < 1.
    """
    if m < 1:
        raise InputError("m must be >= 1; the Green's function itself is not rational")
    w = complex(w)
    if abs(w) >= 1.0:
        raise InputError(f"source point must be interior, got |w| = {abs(w):.6g}")
    z = BivariateRational.z()
    zbar = BivariateRational.w()
    one = BivariateRational.constant(1.0)
    lead = math.factorial(m - 1) / 2.0
    pole = one / ((z - w) ** m)
    mirror = (zbar**m) / ((one - w * zbar) ** m)
    return lead * (pole - mirror)


@dataclass(frozen=True)
class HarmonicRationalForm:
    """Pole-subtracted Dirichlet solution u = r(z) - sum c_jk G^(k)(z, w_j).

    ``extension`` is r(z) = R(z, 1/z); ``subtractions`` pairs each constant
    c_jk with its Green derivative term.  Evaluation is term by term, which
    stays stable away from the removable points; ``combined`` assembles the
    single bivariate rational when the closed form itself is wanted.
    """

    data: BivariateRational
    extension: UnivariateRational
    poles: tuple            # PolePrincipalPart at each interior pole of the extension
    constants: tuple        # ((w_j, k, c_jk), ...)
    green_terms: tuple      # BivariateRational per constant, same order

    def evaluate(self, points):
        pts = np.atleast_1d(np.asarray(points, dtype=complex))
        vals = self.extension(pts).astype(complex)
        for (_, _, c), g in zip(self.constants, self.green_terms):
            vals = vals - c * g.eval(pts, np.conj(pts))
        return vals if np.ndim(points) else complex(vals[0])

    @cached_property
    def combined(self) -> BivariateRational:
        out = BivariateRational.from_univariate(self.extension)
        for (_, _, c), g in zip(self.constants, self.green_terms):
            out = out - BivariateRational.constant(c) * g
        return out

    def boundary_residual(self, samples: int = 64) -> float:
        """max |u - R(z, conj z)| over boundary sample points."""
        z = np.exp(1j * TWO_PI * (np.arange(samples) + 0.21) / samples)
        return float(np.max(np.abs(self.evaluate(z) - self.data.eval_boundary(z))))

    def laplacian_residual(self, points, h: float = 1e-3) -> float:
        """max |five-point Laplacian| of u at interior probe points."""
        worst = 0.0
        for z in np.atleast_1d(np.asarray(points, dtype=complex)):
            stencil = self.evaluate(np.array([z + h, z - h, z + 1j * h, z - 1j * h, z]))
            lap = (np.sum(stencil[:4]) - 4.0 * stencil[4]) / h**2
            worst = max(worst, abs(lap))
        return float(worst)

    def subtraction_residual(self) -> float:
        """Largest leftover principal-part coefficient inside the disc.

        Evaluates F = extension - sum of the subtracted meromorphic parts
        pointwise on a small contour around each interior pole and extracts
        the surviving principal-part coefficients by trapezoid contour
        integrals (a_k = (1/2 pi i) \\oint F (z-w)^{k-1} dz).  Pointwise
        evaluation keeps the near-cancellation well conditioned; forming the
        difference in coefficient arithmetic would not.
        """

        def leftover(z):
            vals = self.extension(z)
            for (w, k, c) in self.constants:
                vals = vals - (c * math.factorial(k - 1) / 2.0) / (z - w) ** k
            return vals

        locations = [p.location for p in self.poles]
        worst = 0.0
        msamples = 64
        theta = np.exp(2j * np.pi * np.arange(msamples) / msamples)
        for part in self.poles:
            w = part.location
            others = [abs(w - v) for v in locations if v != w]
            rho = min(0.08, 0.45 * (1.0 - abs(w)), *(0.45 * d for d in others)) if others else min(
                0.08, 0.45 * (1.0 - abs(w))
            )
            ring = w + rho * theta
            vals = leftover(ring)
            for k in range(1, part.order + 1):
                # (1/2 pi i) oint F (z-w)^{k-1} dz reduces to mean(F (rho theta)^k)
                coef = np.mean(vals * (rho * theta) ** k)
                worst = max(worst, abs(coef))
        return float(worst)


def exact_dirichlet_disc(R: BivariateRational) -> HarmonicRationalForm:
    """Dirichlet solution on the unit disc for rational boundary data R(z, conj z).

    The data is extended meromorphically as r(z) = R(z, 1/z); principal parts
    at poles inside the disc are cancelled by Green derivatives, leaving a
    harmonic function with the same boundary values.  Data with poles on the
    unit circle is rejected.
    """
    r = R.restrict_circle()
    pf = partial_fractions(r, region=UNIT_DISC)
    constants, green_terms = [], []
    for part in pf.inside:
        for k, a in enumerate(part.coef, start=1):
            if a == 0:
                continue
            c = 2.0 * a / math.factorial(k - 1)
            constants.append((part.location, k, c))
            green_terms.append(green_derivative_disc(k, part.location))
    form = HarmonicRationalForm(
        data=R,
        extension=r,
        poles=pf.inside,
        constants=tuple(constants),
        green_terms=tuple(green_terms),
    )
    leftover = form.subtraction_residual()
    if leftover > 1e-8:
        raise MathError(
            f"pole subtraction left principal parts of size {leftover:.3e} inside the disc"
        )
    return form


# ---------------------------------------------------------------------------
# residue boundary integration and the section-6 operators on the disc
# ---------------------------------------------------------------------------


def residue_boundary_integral(R: BivariateRational) -> complex:
    """\\int_{|z|=1} R(z, conj z) ds by residues.

    ds = dz/(i z) on the circle, so the integral is 2 pi times the residue sum
    of R(z, 1/z)/z over the open disc.  Poles on the circle are rejected.
    """
    r = R.restrict_circle()
    integrand = r / UnivariateRational.x()
    return TWO_PI * residue_sum(integrand, region=UNIT_DISC)


def cauchy_transform_disc(R: BivariateRational) -> UnivariateRational:
    """C R: the part of the extension r(z) = R(z, 1/z) holomorphic on the disc.

    The Cauchy integral of rational boundary data keeps the polynomial part
    and the principal parts at poles outside the closed disc; interior
    principal parts drop.  On the disc C coincides with the Szego projection.
    The result is reassembled from the decomposition (well-separated poles)
    rather than by subtracting the inside parts from r, which would stack
    repeated denominator roots and lose the cancellation numerically.
    """
    r = R.restrict_circle()
    pf = partial_fractions(r, region=UNIT_DISC)
    return UnivariateRational.from_polynomial(pf.polynomial) + pf.remainder


def exact_szego_projection_disc(R: BivariateRational) -> UnivariateRational:
    """Szego projection of rational boundary data; rational and pole free inside."""
    return cauchy_transform_disc(R)


def cauchy_adjoint_disc(R: BivariateRational) -> BivariateRational:
    """C* R = R - conj(C(conj(R T)) T) on the unit circle, T(z) = i z."""
    iz = BivariateRational.constant(1j) * BivariateRational.z()
    inner = (R * iz).boundary_conjugate_circle()
    v = cauchy_transform_disc(inner)
    back = (BivariateRational.from_univariate(v) * iz).boundary_conjugate_circle()
    return R - back


def kerzman_stein_apply_disc(R: BivariateRational) -> BivariateRational:
    """A R = C R - C* R; the zero rational on the disc for admissible data."""
    CR = BivariateRational.from_univariate(cauchy_transform_disc(R))
    return CR - cauchy_adjoint_disc(R)


# ---------------------------------------------------------------------------
# quadrature identities
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class QuadratureReport:
    """One-point quadrature identities plus the Schwarz boundary residual."""

    area_integral: complex
    area_expected: complex
    arc_integral: complex
    arc_expected: complex
    schwarz_residual: float

    @property
    def area_error(self) -> float:
        return abs(self.area_integral - self.area_expected)

    @property
    def arc_error(self) -> float:
        return abs(self.arc_integral - self.arc_expected)

    def passed(self, tol: float = 1e-8, schwarz_tol: float = 1e-9) -> bool:
        return (
            self.area_error <= tol
            and self.arc_error <= tol
            and self.schwarz_residual <= schwarz_tol
        )


def verify_quadrature_identity(model, g: UnivariateRational) -> QuadratureReport:
    """Check the one-point area and arc-length identities of a disc model.

    For the disc D(c, rho): int_D g dA = pi rho^2 g(c) (via Stokes,
    (1/2i) \\oint g(z) S(z) dz, computed by residues) and
    \\oint g ds = 2 pi rho g(c).  g must be pole free on the closed disc.
    The Schwarz boundary identity residual is reported for any model.
    """
    if isinstance(model, PolynomialImageModel):
        raise MathError(
            "one-point identities hold on disc models only; "
            "polynomial-image models support the Schwarz identity check"
        )
    region = model.region
    for w in g.poles():
        if abs(w - model.center) <= model.radius + 1e-8:
            raise MathError(f"g has a pole at {w} inside the closed disc")
    s = model.schwarz_rational()
    area = math.pi * residue_sum(g * s, region=region)
    shifted_den = Polynomial(np.array([-model.center, 1.0], dtype=complex))
    arc_integrand = g * UnivariateRational(Polynomial.constant(model.radius), shifted_den)
    arc = TWO_PI * residue_sum(arc_integrand, region=region)
    g_center = complex(g(model.center))
    return QuadratureReport(
        area_integral=complex(area * 1.0),
        area_expected=math.pi * model.radius**2 * g_center,
        arc_integral=complex(arc),
        arc_expected=TWO_PI * model.radius * g_center,
        schwarz_residual=model.schwarz_boundary_residual(),
    )


def schwarz_identity_report(model, samples: int = 256) -> float:
    """max |S(z) - conj(z)| over sampled boundary points of any model."""
    return model.schwarz_boundary_residual(samples)
