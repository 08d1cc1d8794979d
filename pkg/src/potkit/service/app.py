"""FastAPI service wrapping the potkit core.

Szego systems are cached per (domain, n, a) so a long-running service amortizes
the dense factorizations across requests.  Errors map to JSON bodies: malformed
input is 400 (pydantic validation is 422), mathematically refused operations
are 409 with the core error text.
"""

from __future__ import annotations

import threading
from collections import OrderedDict

import numpy as np
from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import __version__
from ..dirichlet import (
    dirichlet_solve,
    green_evaluator,
    harmonic_measure,
    harmonic_measure_gradient,
    nonharmonic_measure,
)
from ..errors import InputError, MathError, PotkitError
from ..exactdisc import (
    DiscModel,
    PolynomialImageModel,
    exact_dirichlet_disc,
    exact_szego_projection_disc,
    residue_boundary_integral,
    verify_quadrature_identity,
)
from ..geometry import build_grid, domain_to_json, locate, winding_number
from ..rational import Polynomial, rational_to_json, format_factored
from ..szego import build_szego_system, szego_projection
from ..validate import cross_validate, run_suite
from . import models as m

_CACHE_MAX = 8


class _SystemCache:
    def __init__(self):
        self._lock = threading.Lock()
        self._items: OrderedDict = OrderedDict()

    def get(self, domain_ref, n: int, a):
        domain = m.resolve_domain(domain_ref)
        key = (repr(domain_to_json(domain)), n, None if a is None else complex(a[0], a[1]))
        with self._lock:
            if key in self._items:
                self._items.move_to_end(key)
                return self._items[key]
        grid = build_grid(domain, n)
        system = build_szego_system(grid, a=None if a is None else complex(a[0], a[1]))
        with self._lock:
            self._items[key] = system
            while len(self._items) > _CACHE_MAX:
                self._items.popitem(last=False)
        return system


def _boundary_table(grid, extra: dict) -> m.TableModel:
    columns = ["curve", "t", "re_z", "im_z"]
    data = [grid.curve_index.astype(float), grid.t, grid.z.real, grid.z.imag]
    for name, values in extra.items():
        values = np.asarray(values)
        if np.iscomplexobj(values):
            columns += [f"re_{name}", f"im_{name}"]
            data += [values.real, values.imag]
        else:
            columns.append(name)
            data.append(values.astype(float))
    rows = np.column_stack(data)
    return m.TableModel(columns=columns, rows=[[float(v) for v in row] for row in rows])


def create_app() -> FastAPI:
    app = FastAPI(title="potkit", version=__version__)
    cache = _SystemCache()

    @app.exception_handler(PotkitError)
    async def _potkit_error(request: Request, exc: PotkitError):
        kind = "input" if isinstance(exc, InputError) else "math"
        status = 400 if isinstance(exc, InputError) else 409
        return JSONResponse(
            status_code=status,
            content={"error": {"kind": kind, "type": type(exc).__name__, "message": str(exc)}},
        )

    @app.get("/healthz")
    def healthz():
        return {"status": "ok", "version": __version__}

    @app.post("/api/grid", response_model=m.GridResponse)
    def grid_endpoint(req: m.GridRequest):
        domain = m.resolve_domain(req.domain)
        grid = build_grid(domain, req.n)
        perims = [float(np.sum(grid.ds[grid.curve_slice(k)])) for k in range(grid.n_curves)]
        from ..szego import default_base_point

        probe = default_base_point(grid)
        table = _boundary_table(grid, {"T": grid.tangent, "ds": grid.ds})
        return m.GridResponse(
            n=req.n,
            curves=grid.n_curves,
            perimeters=perims,
            interior_winding=winding_number(grid, probe),
            table=table,
        )

    @app.post("/api/szego", response_model=m.SzegoResponse)
    def szego_endpoint(req: m.SzegoRequest):
        system = cache.get(req.domain, req.n, req.a)
        table = _boundary_table(
            system.grid, {"S": system.szego_boundary, "L": system.garabedian_boundary}
        )
        return m.SzegoResponse(
            a=m.pair(system.a),
            zeros=[m.pair(z) for z in system.zeros],
            condition_estimate=system.condition_estimate(),
            residuals={
                "solve": system.solve_residual(),
                "garabedian_identity": system.garabedian_identity_residual(),
                "reproducing": system.reproducing_residual(),
            },
            table=table,
        )

    @app.post("/api/project", response_model=m.ProjectResponse)
    def project_endpoint(req: m.ProjectRequest):
        system = cache.get(req.domain, req.n, req.a)
        grid = system.grid
        values = req.data.nodal_values(grid)
        proj = szego_projection(system, values)
        ident = values - np.conj(szego_projection(system, np.conj(values * grid.tangent))) * np.conj(
            grid.tangent
        )
        resp = m.ProjectResponse(
            table=_boundary_table(grid, {"u": values, "Pu": proj}),
            identity_residual=float(np.max(np.abs(proj - ident))),
        )
        R = req.data.as_bivariate()
        if R is not None and grid.n_curves == 1 and isinstance(req.domain, str) and req.domain == "unit-disc":
            exact = exact_szego_projection_disc(R)
            resp.exact = rational_to_json(exact)
            resp.exact_vs_numeric = float(np.max(np.abs(exact(grid.z) - proj)))
        return resp

    @app.post("/api/dirichlet", response_model=m.DirichletResponse)
    def dirichlet_endpoint(req: m.DirichletRequest):
        system = cache.get(req.domain, req.n, req.a)
        values = req.data.nodal_values(system.grid)
        sol = dirichlet_solve(system, values)
        probes = np.array([m.unpair(p) for p in req.probes], dtype=complex)
        vals = sol.evaluate(probes) if probes.size else np.array([], dtype=complex)
        numer_res = sol.numerator_zero_residual()
        return m.DirichletResponse(
            constants=[m.pair(c) for c in sol.constants],
            boundary_residual=sol.boundary_residual,
            numerator_zero_residual=numer_res,
            max_imag_at_probes=float(np.max(np.abs(vals.imag))) if vals.size else 0.0,
            probes=req.probes,
            values=[m.pair(v) for v in vals],
        )

    @app.post("/api/green", response_model=m.GreenResponse)
    def green_endpoint(req: m.GreenRequest):
        system = cache.get(req.domain, req.n, None)
        ev = green_evaluator(system)
        z, w = m.unpair(req.z), m.unpair(req.w)
        if req.m == 0:
            return m.GreenResponse(
                value=m.pair(ev.green(z, w)), symmetric_value=m.pair(ev.green(w, z))
            )
        return m.GreenResponse(value=m.pair(ev.w_derivative(z, w, req.m)))

    @app.post("/api/poisson", response_model=m.PoissonResponse)
    def poisson_endpoint(req: m.PoissonRequest):
        system = cache.get(req.domain, req.n, None)
        ev = green_evaluator(system)
        p = ev.poisson_table(m.unpair(req.z))
        grid = system.grid
        return m.PoissonResponse(
            mass_residual=float(abs(np.sum(p * grid.ds) - 1.0)),
            min_value=float(np.min(p)),
            table=_boundary_table(grid, {"p": p}),
        )

    @app.post("/api/hmeasure", response_model=m.MeasureResponse)
    def hmeasure_endpoint(req: m.MeasureRequest):
        system = cache.get(req.domain, req.n, None)
        sol = harmonic_measure(system, req.k)
        probes = [m.unpair(p) for p in req.probes]
        values = [float(np.real(sol.evaluate(p))) for p in probes]
        grads = [m.pair(harmonic_measure_gradient(sol, p)) for p in probes]
        return m.MeasureResponse(k=req.k, probes=req.probes, values=values, gradient=grads)

    @app.post("/api/lambda", response_model=m.MeasureResponse)
    def lambda_endpoint(req: m.MeasureRequest):
        system = cache.get(req.domain, req.n, None)
        probes = [m.unpair(p) for p in req.probes]
        values = [nonharmonic_measure(system, req.k, p) for p in probes]
        return m.MeasureResponse(k=req.k, probes=req.probes, values=values)

    @app.post("/api/exact-dirichlet", response_model=m.ExactDirichletResponse)
    def exact_dirichlet_endpoint(req: m.ExactDirichletRequest):
        R = req.data.as_bivariate()
        if R is None:
            raise InputError("exact-dirichlet needs rational data (R or num/den)")
        form = exact_dirichlet_disc(R)
        probes = np.array([m.unpair(p) for p in req.probes], dtype=complex)
        vals = form.evaluate(probes) if probes.size else np.array([], dtype=complex)
        return m.ExactDirichletResponse(
            extension=rational_to_json(form.extension),
            extension_factored=format_factored(form.extension),
            constants=[
                {"pole": m.pair(w), "order": k, "c": m.pair(c)} for (w, k, c) in form.constants
            ],
            boundary_residual=form.boundary_residual(),
            subtraction_residual=form.subtraction_residual(),
            laplacian_residual=form.laplacian_residual(
                [p for p in probes if abs(p) < 0.9] or [0.31 + 0.17j]
            ),
            probes=req.probes,
            values=[m.pair(v) for v in vals],
        )

    @app.post("/api/integrate", response_model=m.IntegrateResponse)
    def integrate_endpoint(req: m.IntegrateRequest):
        R = req.data.as_bivariate()
        if R is None:
            raise InputError("integrate needs rational data (R or num/den)")
        value = residue_boundary_integral(R)
        t = 2.0 * np.pi * np.arange(req.n) / req.n
        zb = np.exp(1j * t)
        trapz = np.sum(R.eval_boundary(zb)) * (2.0 * np.pi / req.n)
        return m.IntegrateResponse(value=m.pair(value), trapezoid_delta=float(abs(value - trapz)))

    @app.post("/api/qd-check", response_model=m.QdCheckResponse)
    def qd_check_endpoint(req: m.QdCheckRequest):
        if req.model.kind == "disc":
            model = DiscModel(m.unpair(req.model.center), req.model.radius)
        else:
            if not req.model.coefficients:
                raise InputError("polynomial-image model needs coefficients")
            model = PolynomialImageModel(
                Polynomial(np.array([m.unpair(c) for c in req.model.coefficients]))
            )
        schwarz_res = model.schwarz_boundary_residual()
        if req.g is None or isinstance(model, PolynomialImageModel):
            return m.QdCheckResponse(
                schwarz_residual=schwarz_res, passed=schwarz_res <= 1e-9
            )
        g = req.g.as_univariate()
        rep = verify_quadrature_identity(model, g)
        return m.QdCheckResponse(
            schwarz_residual=schwarz_res,
            area={
                "integral": m.pair(rep.area_integral),
                "expected": m.pair(rep.area_expected),
                "error": rep.area_error,
            },
            arc={
                "integral": m.pair(rep.arc_integral),
                "expected": m.pair(rep.arc_expected),
                "error": rep.arc_error,
            },
            passed=rep.passed(req.tol),
        )

    @app.post("/api/validate", response_model=m.ReportModel)
    def validate_endpoint(req: m.ValidateRequest):
        report = run_suite(req.suite, req.n, req.tol)
        return m.ReportModel(**report.to_json())

    @app.post("/api/cross-validate", response_model=m.ReportModel)
    def cross_validate_endpoint(req: m.CrossValidateRequest):
        R = req.data.as_bivariate()
        if R is None:
            raise InputError("cross-validate needs rational data")
        report = cross_validate(R, n=req.n, tol=req.tol)
        return m.ReportModel(**report.to_json())

    return app


app = create_app()
