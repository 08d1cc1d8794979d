"""Dirichlet machinery: solver, Green's function, Poisson kernel, measures.

The solver realizes the Szego-projection method on an n-connected domain.
With base points b_j inside the holes and log terms L_j = ln|z - b_j|, the
Poisson extension of nodal data psi is

    u = h + conj(H) + sum_j c_j L_j,
    h = P(S_a phi)/S_a,   H = P(L_a conj(phi))/L_a,   phi = psi - sum_j c_j L_j,

with the complex constants c_j fixed by the (n-1) x (n-1) linear system that
makes the numerator P(S_a phi) vanish at the n-1 simple zeros of S_a, so h is
pole free.  Complex data is admitted by linearity (the Green derivative needs
it); for real data the imaginary part of u is a free accuracy diagnostic.

Interior values use the Cauchy integral of the h and H boundary tables, both
of which are boundary values of holomorphic functions, so no special handling
is needed at the removable points.
"""

from __future__ import annotations

import threading
import weakref
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import DecompositionError, InputError, SingularSystemError
from .geometry import TWO_PI, BoundaryGrid
from .szego import (
    SzegoSystem,
    boundary_derivative,
    cauchy_integral,
    szego_projection,
)

_SZEGO_BOUNDARY_FLOOR = 1e-12


def _log_tables(grid: BoundaryGrid, base_points) -> list:
    return [np.log(np.abs(grid.z - b)) for b in base_points]


@dataclass(frozen=True)
class DirichletSolution:
    """Solution u = h + conj(H) + sum_j c_j ln|z - b_j| with boundary tables."""

    system: SzegoSystem
    data: np.ndarray
    base_points: tuple
    constants: np.ndarray
    h_boundary: np.ndarray
    H_boundary: np.ndarray
    numerator_boundary: np.ndarray

    @property
    def grid(self) -> BoundaryGrid:
        return self.system.grid

    @cached_property
    def boundary_residual(self) -> float:
        u = self.h_boundary + np.conj(self.H_boundary) + self.log_term(self.grid.z)
        return float(np.max(np.abs(u - self.data)))

    def log_term(self, points):
        pts = np.asarray(points, dtype=complex)
        out = np.zeros(pts.shape, dtype=complex)
        for c, b in zip(self.constants, self.base_points):
            out = out + c * np.log(np.abs(pts - b))
        return out

    def evaluate(self, points):
        """u at interior points (complex; real data gives real values up to noise)."""
        pts = np.atleast_1d(np.asarray(points, dtype=complex))
        h = cauchy_integral(self.grid, self.h_boundary, pts)
        H = cauchy_integral(self.grid, self.H_boundary, pts)
        vals = h + np.conj(H) + self.log_term(pts)
        return vals if np.ndim(points) else complex(vals[0])

    def dz_boundary(self) -> np.ndarray:
        """Nodal table of du/dz = h'(z) + sum_j c_j / (2 (z - b_j)).

        conj(H) contributes nothing to the z-Wirtinger derivative; h' comes
        from spectral differentiation of the h table.
        """
        grid = self.grid
        out = boundary_derivative(grid, self.h_boundary).astype(complex)
        for c, b in zip(self.constants, self.base_points):
            out = out + c / (2.0 * (grid.z - b))
        return out

    def dz_at(self, z) -> complex:
        """du/dz at an interior point, via the Cauchy integral of the h' table."""
        hp = boundary_derivative(self.grid, self.h_boundary)
        val = cauchy_integral(self.grid, hp, z)
        for c, b in zip(self.constants, self.base_points):
            val = val + c / (2.0 * (complex(z) - b))
        return complex(val)

    def numerator_at_zeros(self) -> np.ndarray:
        """P(S_a phi) at the zeros of S_a; vanishes when the c_j are right."""
        if not self.system.zeros:
            return np.array([], dtype=complex)
        return np.atleast_1d(
            cauchy_integral(
                self.grid, self.numerator_boundary, np.array(self.system.zeros), check=False
            )
        )

    def numerator_zero_residual(self) -> float:
        """max |P(S_a phi)(z_k)| relative to the pre-subtraction numerator scale.

        Normalizing by ||P(S_a psi)|| keeps the check meaningful for data whose
        holomorphic part is identically zero (then P(S_a phi) is all roundoff).
        """
        vals = self.numerator_at_zeros()
        if not vals.size:
            return 0.0
        p_s_psi = szego_projection(self.system, self.system.szego_boundary * self.data)
        scale = max(float(np.max(np.abs(p_s_psi))), 1e-300)
        return float(np.max(np.abs(vals)) / scale)


def dirichlet_solve(system: SzegoSystem, data, base_points=None) -> DirichletSolution:
    """Solve the Dirichlet problem for nodal boundary data.

    ``data`` is an array over all grid nodes (real or complex).  Base points
    default to the domain's; one per hole is required.  Raises
    :class:`SingularSystemError` when the constant system degenerates
    (re-pick the base point a) or when |S_a| collapses on the boundary.
    """
    grid = system.grid
    psi = np.asarray(data, dtype=complex)
    if psi.shape != (grid.total,):
        raise InputError(f"data must have one value per node ({grid.total})")
    if base_points is None:
        base_points = grid.domain.base_points
    base_points = tuple(complex(b) for b in base_points)
    nholes = grid.n_curves - 1
    if len(base_points) != nholes:
        raise InputError(f"need {nholes} base points, got {len(base_points)}")
    if len(system.zeros) != nholes:
        raise SingularSystemError(
            f"system has {len(system.zeros)} Szego zeros, expected {nholes}"
        )
    if float(np.min(np.abs(system.szego_boundary))) < _SZEGO_BOUNDARY_FLOOR:
        raise SingularSystemError("S_a nearly vanishes on the boundary; inconsistent zero set")

    logs = _log_tables(grid, base_points)
    p_s_psi = szego_projection(system, system.szego_boundary * psi)
    p_s_logs = [szego_projection(system, system.szego_boundary * lj) for lj in logs]

    if nholes:
        zeros = np.array(system.zeros)
        mat = np.empty((nholes, nholes), dtype=complex)
        for j, tbl in enumerate(p_s_logs):
            mat[:, j] = cauchy_integral(grid, tbl, zeros, check=False)
        rhs = np.atleast_1d(cauchy_integral(grid, p_s_psi, zeros, check=False))
        cond = np.linalg.cond(mat)
        if not np.isfinite(cond) or cond > 1e12:
            raise SingularSystemError(
                f"constant system is singular (cond {cond:.2e}); re-pick the base point"
            )
        constants = np.linalg.solve(mat, rhs)
    else:
        constants = np.zeros(0, dtype=complex)

    numerator = p_s_psi - sum(c * t for c, t in zip(constants, p_s_logs))
    h = numerator / system.szego_boundary

    conj_phi = np.conj(psi) - sum(np.conj(c) * lj for c, lj in zip(constants, logs))
    H = szego_projection(system, system.garabedian_boundary * conj_phi) / system.garabedian_boundary

    for arr in (psi, constants, h, H, numerator):
        arr.setflags(write=False)
    return DirichletSolution(
        system=system,
        data=psi,
        base_points=base_points,
        constants=constants,
        h_boundary=h,
        H_boundary=H,
        numerator_boundary=numerator,
    )


# ---------------------------------------------------------------------------
# boundary decomposition u = f + conj(F)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BoundaryDecomposition:
    """u = f + conj(F) with f = P(S_a u)/S_a and F = P(L_a conj u)/L_a."""

    system: SzegoSystem
    f_boundary: np.ndarray
    F_boundary: np.ndarray
    residual: float

    def f_at(self, z):
        return cauchy_integral(self.system.grid, self.f_boundary, z)

    def F_at(self, z):
        return cauchy_integral(self.system.grid, self.F_boundary, z)


def decompose_boundary(system: SzegoSystem, values, tol: float = 1e-7) -> BoundaryDecomposition:
    """Split nodal data into holomorphic + conj(holomorphic) boundary values.

    On multiply connected domains f may acquire poles at the zeros of S_a for
    general data; the reconstruction residual is checked a posteriori and a
    :class:`DecompositionError` raised when it exceeds ``tol``.
    """
    u = np.asarray(values, dtype=complex)
    f = szego_projection(system, system.szego_boundary * u) / system.szego_boundary
    F = szego_projection(system, system.garabedian_boundary * np.conj(u)) / system.garabedian_boundary
    residual = float(np.max(np.abs(f + np.conj(F) - u)))
    if residual > tol:
        raise DecompositionError(
            f"f + conj(F) misses the data by {residual:.3e} (tol {tol:.0e})"
        )
    return BoundaryDecomposition(system, f, F, residual)


# ---------------------------------------------------------------------------
# Green's function, derivatives, Poisson kernel
# ---------------------------------------------------------------------------


class GreenEvaluator:
    """Green's function of the domain with per-source caching.

    G(z, w) = -ln|z - w| + u_w(z) where u_w solves the Dirichlet problem with
    data ln|zeta - w|.  Sources are cached; the cache is guarded by a lock so
    one evaluator may serve concurrent readers.
    """

    def __init__(self, system: SzegoSystem):
        self.system = system
        self._cache: dict = {}
        self._lock = threading.Lock()

    def _solution_for(self, w: complex, kind: str) -> DirichletSolution:
        key = (kind, complex(w))
        with self._lock:
            sol = self._cache.get(key)
        if sol is not None:
            return sol
        grid = self.system.grid
        if kind == "log":
            data = np.log(np.abs(grid.z - w)).astype(complex)
        else:  # simple pole data for the w-derivative
            data = 0.5 / (grid.z - w)
        sol = dirichlet_solve(self.system, data)
        with self._lock:
            self._cache.setdefault(key, sol)
        return sol

    def green(self, z, w) -> float:
        """G(z, w); symmetric, positive inside, zero on the boundary."""
        z, w = complex(z), complex(w)
        if z == w:
            raise InputError("Green's function has a logarithmic singularity at z = w")
        self.system.grid.require_interior(z)
        self.system.grid.require_interior(w)
        sol = self._solution_for(w, "log")
        val = -np.log(abs(z - w)) + sol.evaluate(z)
        return float(np.real(val))

    def w_derivative(self, z, w, m: int = 1) -> complex:
        """G^(m)(z, w) = (d/dw)^m G(z, w); holomorphic in w away from z.

        m = 1 is built as (1/2)(z-w)^{-1} minus the Dirichlet extension of the
        same boundary data; higher m by Richardson finite differences in w.
        """
        z, w = complex(z), complex(w)
        if m < 1:
            raise InputError("use green() for the m = 0 case; it is not rational")
        if m == 1:
            self.system.grid.require_interior(z)
            self.system.grid.require_interior(w)
            sol = self._solution_for(w, "pole")
            return 0.5 / (z - w) - complex(sol.evaluate(z))
        h = 1e-4

        def d1(step):
            return (self.w_derivative(z, w + step, m - 1) - self.w_derivative(z, w - step, m - 1)) / (
                2.0 * step
            )

        return (4.0 * d1(h / 2) - d1(h)) / 3.0

    def boundary_w_derivative_table(self, z) -> np.ndarray:
        """dG/dw(z, w) for w at every boundary node, by symmetry in the source.

        G(z, .) = -ln|. - z| + u_z with u_z = h + conj(H) + sum c_j L_j, so on
        the boundary dG/dw = -1/(2(w - z)) + h'(w) + sum_j c_j/(2(w - b_j))
        with h' by spectral differentiation: no finite differences through the
        solver are needed.
        """
        grid = self.system.grid
        sol = self._solution_for(complex(z), "log")
        return -0.5 / (grid.z - complex(z)) + sol.dz_boundary()

    def poisson_table(self, z) -> np.ndarray:
        """Poisson kernel p(z, w_i) at every node: inward normal derivative / 2 pi.

        The inward unit normal is i T; for real G the normal derivative is
        2 Re(nu dG/dw).  p is real, positive, and has unit mass sum p ds = 1.
        """
        grid = self.system.grid
        grid.require_interior(z)
        dG = self.boundary_w_derivative_table(z)
        nu = 1j * grid.tangent
        return 2.0 * np.real(nu * dG) / TWO_PI

    def poisson_at(self, z, node_index: int) -> float:
        return float(self.poisson_table(z)[node_index])


_evaluators: "weakref.WeakValueDictionary" = weakref.WeakValueDictionary()
_evaluators_lock = threading.Lock()


def green_evaluator(system: SzegoSystem) -> GreenEvaluator:
    """Shared evaluator per system (keyed by identity) with its source cache."""
    key = id(system)
    with _evaluators_lock:
        ev = _evaluators.get(key)
        if ev is None:
            ev = GreenEvaluator(system)
            _evaluators[key] = ev
    return ev


def greens_function(system: SzegoSystem, z, w) -> float:
    return green_evaluator(system).green(z, w)


def green_w_derivative(system: SzegoSystem, z, w, m: int = 1) -> complex:
    return green_evaluator(system).w_derivative(z, w, m)


def poisson_kernel(system: SzegoSystem, z, node_index: int | None = None):
    ev = green_evaluator(system)
    if node_index is None:
        return ev.poisson_table(z)
    return ev.poisson_at(z, node_index)


# ---------------------------------------------------------------------------
# harmonic and non-harmonic measures
# ---------------------------------------------------------------------------


def harmonic_measure(system: SzegoSystem, k: int) -> DirichletSolution:
    """omega_k: boundary data 1 on component k, 0 on the others."""
    grid = system.grid
    if not 0 <= k < grid.n_curves:
        raise InputError(f"component index {k} out of range [0, {grid.n_curves})")
    data = np.zeros(grid.total, dtype=complex)
    data[grid.curve_slice(k)] = 1.0
    return dirichlet_solve(system, data)


def harmonic_measure_gradient(solution: DirichletSolution, z) -> complex:
    """F_k'(z) = 2 (d/dz) omega_k(z): twice the analytic Wirtinger derivative."""
    return 2.0 * solution.dz_at(z)


def nonharmonic_measure(system: SzegoSystem, k: int, z) -> float:
    """lambda_k(z) = (1/S(z,z)) int_{gamma_k} |S(z, w)|^2 ds(w).

    The row S(., z) comes from one Kerzman-Stein solve with base point z; the
    normalizer S(z, z) is its reproducing-property mass over all nodes, so the
    lambda_k sum to 1 by construction (the independent S(z, z) check lives on
    the system invariant).
    """
    grid = system.grid
    if not 0 <= k < grid.n_curves:
        raise InputError(f"component index {k} out of range [0, {grid.n_curves})")
    grid.require_interior(z)
    row = system.kernel_row(complex(z))
    weights = np.abs(row) ** 2 * grid.ds
    return float(np.sum(weights[grid.curve_slice(k)]) / np.sum(weights))


@dataclass(frozen=True)
class MeasureSet:
    """All harmonic measures of a system plus lambda and gradient evaluators."""

    system: SzegoSystem
    omegas: tuple

    def omega_values(self, z) -> np.ndarray:
        return np.array([np.real(w.evaluate(z)) for w in self.omegas])

    def lambda_values(self, z) -> np.ndarray:
        grid = self.system.grid
        grid.require_interior(z)
        row = self.system.kernel_row(complex(z))
        weights = np.abs(row) ** 2 * grid.ds
        total = np.sum(weights)
        return np.array(
            [np.sum(weights[grid.curve_slice(k)]) / total for k in range(grid.n_curves)]
        )

    def gradient(self, k: int, z) -> complex:
        return harmonic_measure_gradient(self.omegas[k], z)


def measure_set(system: SzegoSystem) -> MeasureSet:
    omegas = tuple(harmonic_measure(system, k) for k in range(system.grid.n_curves))
    return MeasureSet(system, omegas)
