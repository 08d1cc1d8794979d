"""Pydantic request/response models for the potkit service.

Complex numbers travel as [re, im] pairs; boundary-data rationals travel
either as coefficient literals {"num": ..., "den": ...} (pair lists for
univariate, pair matrices indexed [z-power][w-power] for bivariate), as an
expression string {"R": "zbar**2 + 1/(2+z)"}, as nodal samples, or as a
per-component indicator.
"""

from __future__ import annotations

from typing import Annotated, List, Literal, Optional, Union

import numpy as np
from pydantic import BaseModel, Field, model_validator

from ..errors import InputError
from ..geometry import DomainSpec, domain_from_json, named_domain
from ..rational import (
    BivariateRational,
    Polynomial,
    UnivariateRational,
    parse_rational_expression,
    rational_from_json,
)

CPair = Annotated[List[float], Field(min_length=2, max_length=2)]


def pair(z) -> list:
    z = complex(z)
    return [float(z.real), float(z.imag)]


def unpair(p) -> complex:
    return complex(p[0], p[1])


class CircleCurve(BaseModel):
    kind: Literal["circle"]
    center: CPair
    radius: float = Field(gt=0)
    orientation: Literal[1, -1] = 1


class FourierCurveModel(BaseModel):
    kind: Literal["fourier"]
    coefficients: List[CPair]
    min_index: int = 0
    orientation: Literal[1, -1] = 1


class PolynomialImageCurveModel(BaseModel):
    kind: Literal["polynomial-image"]
    coefficients: List[CPair]
    orientation: Literal[1, -1] = 1


CurveModel = Annotated[
    Union[CircleCurve, FourierCurveModel, PolynomialImageCurveModel],
    Field(discriminator="kind"),
]


class DomainModel(BaseModel):
    outer: CurveModel
    holes: List[CurveModel] = []
    base_points: List[CPair] = []
    szego_point: Optional[CPair] = None


DomainRef = Union[str, DomainModel]


def resolve_domain(ref: DomainRef) -> DomainSpec:
    if isinstance(ref, str):
        try:
            return named_domain(ref)
        except KeyError:
            raise InputError(
                f"unknown named domain {ref!r}; use unit-disc, annulus:r, cassini-like, "
                "or pass an inline domain object"
            ) from None
    return domain_from_json(ref.model_dump())


class DataModel(BaseModel):
    """Boundary data: exactly one of expression, literal, nodal, indicator."""

    R: Optional[str] = None
    num: Optional[list] = None
    den: Optional[list] = None
    nodal: Optional[List[CPair]] = None
    indicator: Optional[int] = None

    @model_validator(mode="after")
    def _one_of(self):
        literal = self.num is not None or self.den is not None
        if literal and (self.num is None or self.den is None):
            raise ValueError("rational literal needs both num and den")
        given = sum(bool(x) for x in (self.R is not None, literal, self.nodal is not None, self.indicator is not None))
        if given != 1:
            raise ValueError("give exactly one of R, num/den, nodal, indicator")
        return self

    def as_bivariate(self) -> Optional[BivariateRational]:
        if self.R is not None:
            return parse_rational_expression(self.R)
        if self.num is not None:
            r = rational_from_json({"num": self.num, "den": self.den})
            if isinstance(r, UnivariateRational):
                return BivariateRational.from_univariate(r)
            return r
        return None

    def as_univariate(self) -> UnivariateRational:
        R = self.as_bivariate()
        if R is None:
            raise InputError("this operation needs rational data, not samples")
        if R.num.shape[1] > 1 or R.den.shape[1] > 1:
            raise InputError("this operation needs a function of z only (no zbar)")
        return UnivariateRational(Polynomial(R.num[:, 0]), Polynomial(R.den[:, 0]))

    def nodal_values(self, grid) -> np.ndarray:
        if self.nodal is not None:
            vals = np.array([unpair(p) for p in self.nodal])
            if vals.shape != (grid.total,):
                raise InputError(f"nodal data must have one value per node ({grid.total})")
            return vals
        if self.indicator is not None:
            k = self.indicator
            if not 0 <= k < grid.n_curves:
                raise InputError(f"indicator component {k} out of range")
            vals = np.zeros(grid.total, dtype=complex)
            vals[grid.curve_slice(k)] = 1.0
            return vals
        return self.as_bivariate().eval_boundary(grid.z)


class SchwarzModelSpec(BaseModel):
    kind: Literal["disc", "polynomial-image"]
    center: CPair = Field(default_factory=lambda: [0.0, 0.0])
    radius: float = 1.0
    coefficients: Optional[List[CPair]] = None


# ---------------------------------------------------------------------------
# requests
# ---------------------------------------------------------------------------


class GridRequest(BaseModel):
    domain: DomainRef = "unit-disc"
    n: int = 256


class SzegoRequest(BaseModel):
    domain: DomainRef = "unit-disc"
    n: int = 256
    a: Optional[CPair] = None


class ProjectRequest(BaseModel):
    domain: DomainRef = "unit-disc"
    n: int = 256
    a: Optional[CPair] = None
    data: DataModel
    tol: float = 1e-7


class DirichletRequest(BaseModel):
    domain: DomainRef
    n: int = 256
    a: Optional[CPair] = None
    data: DataModel
    probes: List[CPair] = []


class GreenRequest(BaseModel):
    domain: DomainRef
    n: int = 256
    z: CPair
    w: CPair
    m: int = 0  # 0: G itself; m >= 1: d^m/dw^m


class PoissonRequest(BaseModel):
    domain: DomainRef
    n: int = 256
    z: CPair


class MeasureRequest(BaseModel):
    domain: DomainRef
    n: int = 256
    k: int = 0
    probes: List[CPair] = []


class ExactDirichletRequest(BaseModel):
    data: DataModel
    probes: List[CPair] = []


class IntegrateRequest(BaseModel):
    data: DataModel
    n: int = 512  # trapezoid cross-check resolution


class QdCheckRequest(BaseModel):
    model: SchwarzModelSpec
    g: Optional[DataModel] = None
    tol: float = 1e-8


class ValidateRequest(BaseModel):
    suite: Literal["disc", "annulus", "all"] = "disc"
    n: Optional[int] = None
    tol: Optional[float] = None


class CrossValidateRequest(BaseModel):
    data: DataModel
    n: int = 256
    tol: float = 1e-7


# ---------------------------------------------------------------------------
# responses
# ---------------------------------------------------------------------------


class TableModel(BaseModel):
    columns: List[str]
    rows: List[List[float]]


class CheckModel(BaseModel):
    name: str
    residual: float
    tolerance: float
    passed: bool


class ReportModel(BaseModel):
    command: str
    domain: str
    tolerance: float
    passed: bool
    checks: List[CheckModel]
    timings_s: dict


class GridResponse(BaseModel):
    n: int
    curves: int
    perimeters: List[float]
    interior_winding: float
    table: TableModel


class SzegoResponse(BaseModel):
    a: CPair
    zeros: List[CPair]
    condition_estimate: float
    residuals: dict
    table: TableModel


class ProjectResponse(BaseModel):
    table: TableModel
    identity_residual: float
    exact: Optional[dict] = None
    exact_vs_numeric: Optional[float] = None


class DirichletResponse(BaseModel):
    constants: List[CPair]
    boundary_residual: float
    numerator_zero_residual: float
    max_imag_at_probes: float
    probes: List[CPair]
    values: List[CPair]


class GreenResponse(BaseModel):
    value: CPair
    symmetric_value: Optional[CPair] = None


class PoissonResponse(BaseModel):
    mass_residual: float
    min_value: float
    table: TableModel


class MeasureResponse(BaseModel):
    k: int
    probes: List[CPair]
    values: List[float]
    gradient: Optional[List[CPair]] = None


class ExactDirichletResponse(BaseModel):
    extension: dict
    extension_factored: str
    constants: List[dict]
    boundary_residual: float
    subtraction_residual: float
    laplacian_residual: float
    probes: List[CPair]
    values: List[CPair]


class IntegrateResponse(BaseModel):
    value: CPair
    trapezoid_delta: float


class QdCheckResponse(BaseModel):
    schwarz_residual: float
    area: Optional[dict] = None
    arc: Optional[dict] = None
    passed: bool
