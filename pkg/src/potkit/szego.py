"""Numerical Szego machinery on smooth multiply connected domains.

The boundary Szego kernel S_a = S(., a) is computed from the Kerzman-Stein
second-kind integral equation discretized by the Nystrom/trapezoid method on
the equispaced grid.  With the Cauchy transform C and its L^2(ds) adjoint C*,
the Kerzman-Stein operator is A = C - C* (smooth, skew-Hermitian) and

    (I - A) S_a = c_a,        c_a(z) = (1/2 pi i) conj(T(z)) / (conj(a) - conj(z)),

which follows from C S_a = S_a and C* S_a = c_a.  The Szego projection is
recovered from the identity P (I + A) = C, so P u = C (I + A)^{-1} u; boundary
values of C are evaluated with spectral accuracy by singularity subtraction.

Both dense factorizations are built once per grid and shared by all base
points, so re-picking ``a`` or projecting many right-hand sides costs O(N^2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.linalg import lu_factor, lu_solve

from .errors import BasePointError, NearBoundaryError, SingularSystemError, ZeroCountError
from .geometry import TWO_PI, BoundaryGrid, winding_number


def _strictly_inside(grid: BoundaryGrid, w) -> bool:
    """Interiority by winding number; tolerates points inside the evaluation
    refusal band (that rule guards Cauchy-integral accuracy, not membership)."""
    dist, i = grid.nearest_node(w)
    if dist < 0.5 * grid.ds[i]:
        return False
    return abs(winding_number(grid, w) - 1.0) < 0.5

_ZERO_SIMPLE_FLOOR = 1e-8
_REPICK_RADIUS = 0.1
_REPICK_ATTEMPTS = 5


# ---------------------------------------------------------------------------
# spectral differentiation and boundary Cauchy transform
# ---------------------------------------------------------------------------


def spectral_derivative(grid: BoundaryGrid, values: np.ndarray) -> np.ndarray:
    """d/dt of per-curve periodic nodal data by FFT (Nyquist mode zeroed)."""
    values = np.asarray(values, dtype=complex)
    out = np.empty_like(values)
    n = grid.n
    k = np.fft.fftfreq(n, d=1.0 / n)
    if n % 2 == 0:
        k = k.copy()
        k[n // 2] = 0.0
    for c in range(grid.n_curves):
        sl = grid.curve_slice(c)
        out[sl] = np.fft.ifft(1j * k * np.fft.fft(values[sl]))
    return out


def boundary_derivative(grid: BoundaryGrid, values: np.ndarray) -> np.ndarray:
    """f'(z) at the nodes from nodal boundary values of holomorphic f."""
    return spectral_derivative(grid, values) / grid.dz


class _Discretization:
    """Grid-level dense operators shared by every base point.

    Holds the Kerzman-Stein matrix A (kernel of C - C*), LU factorizations of
    I -/+ A diag(ds), and the pieces of the spectrally accurate boundary
    Cauchy transform.  Read-only after construction.
    """

    def __init__(self, grid: BoundaryGrid):
        self.grid = grid
        self.ks = assemble_kerzman_stein(grid)
        n = grid.total
        ksd = self.ks * grid.ds[None, :]
        try:
            self.lu_minus = lu_factor(np.eye(n) - ksd)
            self.lu_plus = lu_factor(np.eye(n) + ksd)
        except np.linalg.LinAlgError as exc:  # pragma: no cover - defensive
            raise SingularSystemError(f"Kerzman-Stein system is singular: {exc}") from exc
        # Cauchy weights W_ij = z'_j dt / (z_j - z_i), zero diagonal
        diff = grid.z[None, :] - grid.z[:, None]
        np.fill_diagonal(diff, 1.0)
        self.cauchy_w = grid.dz[None, :] * grid.dt / diff
        np.fill_diagonal(self.cauchy_w, 0.0)
        own = grid.curve_index[:, None] == grid.curve_index[None, :]
        self.cauchy_own_rowsum = np.sum(np.where(own, self.cauchy_w, 0.0), axis=1)
        self.plemelj = 0.5 * (1.0 + grid.sigma)

    @cached_property
    def condition_estimate(self) -> float:
        ksd = self.ks * self.grid.ds[None, :]
        return float(np.linalg.cond(np.eye(self.grid.total) - ksd))


def assemble_kerzman_stein(grid: BoundaryGrid) -> np.ndarray:
    """Kerzman-Stein matrix A_ij ~ A(z_i, z_j) for A = C - C*.

    Off-diagonal entries follow the kernel
    A(z, w) = (1/2 pi i) [ T(w)/(w - z) - conj(T(z)) / (conj w - conj z) ],
    which vanishes identically on circles and is skew-Hermitian by symmetry.
    The diagonal is the smooth limit along the curve, obtained by Richardson
    extrapolation of the symmetric neighbor averages (three levels); symmetric
    averaging cancels the odd orders, so the result is O(h^6) accurate.  The
    limit is purely imaginary (skew-Hermitian symmetry at the diagonal), and
    the extrapolated value is projected onto that constraint.
    """
    z, T = grid.z, grid.tangent
    diff = z[None, :] - z[:, None]
    np.fill_diagonal(diff, 1.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        A = (T[None, :] / diff - np.conj(T)[:, None] / np.conj(diff)) / (2j * np.pi)
    n = grid.n
    for c in range(grid.n_curves):
        base = c * n
        idx = np.arange(n)
        g = [
            0.5 * (A[base + idx, base + (idx + k) % n] + A[base + idx, base + (idx - k) % n])
            for k in (1, 2, 3)
        ]
        limit = 1.5 * g[0] - 0.6 * g[1] + 0.1 * g[2]
        A[base + idx, base + idx] = 1j * limit.imag
    A.setflags(write=False)
    return A


def boundary_cauchy(disc: _Discretization, values: np.ndarray) -> np.ndarray:
    """Boundary values (from inside) of the Cauchy integral of nodal data.

    Uses the Plemelj jump plus a principal value computed by singularity
    subtraction: the subtracted integrand is smooth, and its diagonal limit is
    the spectral parameter derivative of the data, so the trapezoid rule keeps
    spectral accuracy.
    """
    grid = disc.grid
    u = np.asarray(values, dtype=complex)
    du = spectral_derivative(grid, u)
    main = disc.cauchy_w @ u - disc.cauchy_own_rowsum * u + du * grid.dt
    return main / (2j * np.pi) + disc.plemelj * u


def cauchy_integral(grid: BoundaryGrid, table: np.ndarray, points, order: int = 0, check: bool = True):
    """Interior values (or z-derivatives) of a holomorphic boundary table.

    (1/2 pi i) \\oint f(w) (w-z)^{-1-order} order! dw by the grid trapezoid
    rule.  Points closer to the boundary than the refusal radius are rejected
    unless ``check=False``.
    """
    pts = np.atleast_1d(np.asarray(points, dtype=complex))
    if check:
        for p in pts:
            grid.require_interior(p)
    table = np.asarray(table, dtype=complex)
    weights = table * grid.dz * grid.dt / (2j * np.pi)
    denom = grid.z[None, :] - pts[:, None]
    vals = (weights[None, :] / denom ** (order + 1)).sum(axis=1) * math.factorial(order)
    return vals if np.ndim(points) else complex(vals[0])


# ---------------------------------------------------------------------------
# the Szego system
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SzegoSystem:
    """Boundary tables of S(., a) and L(., a) on a grid, plus shared operators.

    Immutable after construction; one system may serve many concurrent solves.
    ``with_base_point`` re-solves for a new ``a`` while sharing the dense
    factorizations.
    """

    grid: BoundaryGrid
    a: complex
    szego_boundary: np.ndarray
    garabedian_boundary: np.ndarray
    zeros: tuple
    _disc: _Discretization

    @property
    def kerzman_stein(self) -> np.ndarray:
        return self._disc.ks

    def condition_estimate(self) -> float:
        return self._disc.condition_estimate

    def solve_residual(self) -> float:
        grid = self.grid
        rhs = _cauchy_kernel_rhs(grid, self.a)
        lhs = self.szego_boundary - (self._disc.ks * grid.ds[None, :]) @ self.szego_boundary
        return float(np.max(np.abs(lhs - rhs)))

    def with_base_point(self, a: complex, find_zeros: bool = True) -> "SzegoSystem":
        return _solve_system(self._disc, complex(a), find_zeros=find_zeros)

    # -- kernel evaluations ------------------------------------------------

    def szego_at(self, z, order: int = 0):
        """S(z, a) (or its z-derivative) at interior points."""
        return cauchy_integral(self.grid, self.szego_boundary, z, order=order)

    def garabedian_at(self, z):
        """L(z, a) at interior points; the simple pole at a is added back."""
        grid = self.grid
        smooth = self.garabedian_boundary - 1.0 / (TWO_PI * (grid.z - self.a))
        pts = np.atleast_1d(np.asarray(z, dtype=complex))
        vals = cauchy_integral(grid, smooth, pts) + 1.0 / (TWO_PI * (pts - self.a))
        return vals if np.ndim(z) else complex(vals[0])

    def kernel_row(self, z) -> np.ndarray:
        """Boundary table of S(w_j, z) for an interior parameter z."""
        return _solve_table(self._disc, complex(z))

    def szego_diag(self, z) -> float:
        """S(z, z) > 0 via the reproducing property of the solved row."""
        row = self.kernel_row(z)
        return float(np.sum(np.abs(row) ** 2 * self.grid.ds))

    def reproducing_residual(self) -> float:
        """Relative gap between sum |S_a|^2 ds and S(a, a) by interior evaluation."""
        mass = np.sum(np.abs(self.szego_boundary) ** 2 * self.grid.ds)
        saa = self.szego_at(self.a)
        return float(abs(mass - saa) / abs(saa))

    def garabedian_identity_residual(self) -> float:
        """max |conj(S_a) - (1/i) L_a T| over the nodes."""
        lhs = np.conj(self.szego_boundary)
        rhs = self.garabedian_boundary * self.grid.tangent / 1j
        return float(np.max(np.abs(lhs - rhs)))


def _cauchy_kernel_rhs(grid: BoundaryGrid, a: complex) -> np.ndarray:
    return np.conj(grid.tangent) / (np.conj(a) - np.conj(grid.z)) / (2j * np.pi)


def _solve_table(disc: _Discretization, a: complex) -> np.ndarray:
    rhs = _cauchy_kernel_rhs(disc.grid, a)
    return lu_solve(disc.lu_minus, rhs)


def szego_projection(system: SzegoSystem, values: np.ndarray) -> np.ndarray:
    """Szego projection of nodal boundary data: P u = C (I + A ds)^{-1} u."""
    v = lu_solve(system._disc.lu_plus, np.asarray(values, dtype=complex))
    return boundary_cauchy(system._disc, v)


def _power_sums(grid: BoundaryGrid, table: np.ndarray, max_power: int) -> np.ndarray:
    """mu_p = (1/2 pi i) \\oint z^p d(log S_a) for p = 0..max_power."""
    dlog = spectral_derivative(grid, table) / table
    out = np.empty(max_power + 1, dtype=complex)
    for p in range(max_power + 1):
        out[p] = np.sum(grid.z**p * dlog) * grid.dt / (2j * np.pi)
    return out


def _zeros_from_power_sums(mu: np.ndarray, m: int) -> np.ndarray:
    # Newton's identities: elementary symmetric functions from power sums
    e = np.zeros(m + 1, dtype=complex)
    e[0] = 1.0
    for k in range(1, m + 1):
        acc = 0.0 + 0.0j
        for j in range(1, k + 1):
            acc += (-1) ** (j - 1) * e[k - j] * mu[j]
        e[k] = acc / k
    coef = np.array([(-1) ** (m - i) * e[m - i] for i in range(m + 1)])
    return np.polynomial.polynomial.polyroots(coef)


def _find_szego_zeros(disc: _Discretization, table: np.ndarray) -> tuple:
    """Zeros of S_a in the domain: argument-principle count, moment seeds, Newton."""
    grid = disc.grid
    expected = grid.n_curves - 1
    if expected == 0:
        return ()
    mu = _power_sums(grid, table, expected)
    count = mu[0]
    if abs(count - expected) > 0.01:
        raise ZeroCountError(
            f"argument principle counts {count:.3f} zeros of S_a, expected {expected}"
        )
    seeds = _zeros_from_power_sums(mu, expected)
    zeros = []
    for z0 in seeds:
        z = complex(z0)
        for _ in range(30):
            val = cauchy_integral(grid, table, z, check=False)
            dval = cauchy_integral(grid, table, z, order=1, check=False)
            if dval == 0 or not np.isfinite(dval):
                raise BasePointError(f"Newton stalled on a Szego zero seed near {z}")
            step = val / dval
            z -= step
            if abs(step) < 1e-14:
                break
        val = cauchy_integral(grid, table, z, check=False)
        dval = cauchy_integral(grid, table, z, order=1, check=False)
        if not _strictly_inside(grid, z):
            raise BasePointError(f"Szego zero iterate {z} left the domain")
        if abs(dval) <= _ZERO_SIMPLE_FLOOR:
            raise BasePointError(f"Szego zero at {z} is not simple (|S_a'| = {abs(dval):.2e})")
        if abs(val) > 1e-8 * max(1.0, float(np.max(np.abs(table)))):
            raise BasePointError(f"Szego zero candidate did not converge (|S_a| = {abs(val):.2e})")
        zeros.append(z)
    for i in range(len(zeros)):
        for j in range(i + 1, len(zeros)):
            if abs(zeros[i] - zeros[j]) < 1e-6:
                raise BasePointError("clustered Szego zeros; choose a different base point")
    return tuple(sorted(zeros, key=lambda w: (w.real, w.imag)))


def _solve_system(disc: _Discretization, a: complex, find_zeros: bool = True) -> SzegoSystem:
    grid = disc.grid
    if not _strictly_inside(grid, a):
        raise BasePointError(f"base point {a} is not strictly inside the domain")
    table = _solve_table(disc, a)
    garabedian = 1j * np.conj(table) / grid.tangent
    zeros = _find_szego_zeros(disc, table) if find_zeros else ()
    for arr in (table, garabedian):
        arr.setflags(write=False)
    return SzegoSystem(
        grid=grid,
        a=a,
        szego_boundary=table,
        garabedian_boundary=garabedian,
        zeros=zeros,
        _disc=disc,
    )


def default_base_point(grid: BoundaryGrid) -> complex:
    """Deterministic interior point: the domain point maximizing node clearance.

    The node centroid is used when it lies inside; otherwise candidates on a
    coarse lattice over the bounding box are scored by distance to the nodes.
    """
    if grid.domain.szego_point is not None:
        return grid.domain.szego_point
    centroid = complex(np.mean(grid.z))
    if _strictly_inside(grid, centroid):
        return centroid
    xs = np.linspace(np.min(grid.z.real), np.max(grid.z.real), 41)
    ys = np.linspace(np.min(grid.z.imag), np.max(grid.z.imag), 41)
    best, best_clear = None, -1.0
    for x in xs:
        for y in ys:
            w = complex(x, y)
            if not _strictly_inside(grid, w):
                continue
            clear = np.min(np.abs(grid.z - w))
            if clear > best_clear:
                best, best_clear = w, clear
    if best is None:
        raise BasePointError("could not find an interior base point")
    return best


def build_szego_system(
    grid: BoundaryGrid,
    a: complex | None = None,
    attempts: int = _REPICK_ATTEMPTS,
    seed: int = 1729,
) -> SzegoSystem:
    """Assemble the dense operators and solve the Kerzman-Stein equation.

    When ``a`` is omitted, a default interior point is chosen; if the zeros of
    S_a come out degenerate the point is re-picked at random inside a disc of
    radius 0.1 around the default, at most ``attempts`` times.  An explicit
    ``a`` is never re-picked: degeneracy raises :class:`BasePointError`.
    """
    disc = _Discretization(grid)
    if a is not None:
        return _solve_system(disc, complex(a))
    a0 = default_base_point(grid)
    rng = np.random.default_rng(seed)
    last: Exception | None = None
    for attempt in range(attempts):
        if attempt == 0:
            cand = a0
        else:
            rho, th = _REPICK_RADIUS * np.sqrt(rng.uniform()), TWO_PI * rng.uniform()
            cand = a0 + rho * np.exp(1j * th)
            if not _strictly_inside(grid, cand):
                continue
        try:
            return _solve_system(disc, cand)
        except (BasePointError, ZeroCountError) as exc:
            last = exc
    raise BasePointError(f"no usable base point after {attempts} attempts: {last}")


def ahlfors_map(system: SzegoSystem, z):
    """Ahlfors map f = S(., a)/L(., a) at interior points; f(a) = 0.

    The Garabedian pole is handled in closed form:
    f = 2 pi (z - a) S / (2 pi (z - a) Lambda + 1) with Lambda the smooth part.
    """
    grid = system.grid
    pts = np.atleast_1d(np.asarray(z, dtype=complex))
    smooth_table = system.garabedian_boundary - 1.0 / (TWO_PI * (grid.z - system.a))
    s_vals = cauchy_integral(grid, system.szego_boundary, pts)
    lam_vals = cauchy_integral(grid, smooth_table, pts)
    d = pts - system.a
    out = TWO_PI * d * s_vals / (TWO_PI * d * lam_vals + 1.0)
    return out if np.ndim(z) else complex(out[0])


def ahlfors_boundary(system: SzegoSystem) -> np.ndarray:
    """Boundary table S_a/L_a; unimodular on every curve."""
    return system.szego_boundary / system.garabedian_boundary
