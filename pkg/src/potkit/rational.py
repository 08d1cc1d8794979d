"""Complex rational-function arithmetic, partial fractions, and residues.

Coefficients are complex floating point: the layer is exact in structure
(closed-form polynomials and principal parts), not in precision.  Univariate
rationals are kept in lowest terms by root matching, denominators monic.
Bivariate rationals R(z, w) carry coefficient matrices indexed
[z-power][w-power]; on the unit circle the second slot stands for conj(z),
and substituting a Schwarz function for w performs the meromorphic extension.
"""

from __future__ import annotations

import ast
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.signal import convolve2d

from .errors import (
    DegenerateSubstitutionError,
    InputError,
    MathError,
    PoleOnBoundaryError,
    ZeroRationalDivisionError,
)

_P = np.polynomial.polynomial

_TRIM_REL = 1e-13
_CANCEL_TOL = 1e-12        # root-matching tolerance for common factors
_CLUSTER_TOL = 1e-7        # closer denominator roots merge into one pole
_BOUNDARY_POLE_TOL = 1e-8
_ROOT_RESIDUAL_TOL = 1e-10
_MAX_ROOT_DEGREE = 64


def _trim(coef: np.ndarray) -> np.ndarray:
    coef = np.atleast_1d(np.asarray(coef, dtype=complex))
    scale = np.max(np.abs(coef)) if coef.size else 0.0
    if scale == 0.0:
        return np.zeros(1, dtype=complex)
    keep = np.nonzero(np.abs(coef) > _TRIM_REL * scale)[0]
    return coef[: keep[-1] + 1].copy()


# ---------------------------------------------------------------------------
# polynomials
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Polynomial:
    """Complex polynomial, coefficients low -> high, canonically trimmed."""

    coef: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "coef", _trim(self.coef))
        self.coef.setflags(write=False)

    @classmethod
    def constant(cls, c) -> "Polynomial":
        return cls(np.array([complex(c)]))

    @classmethod
    def x(cls) -> "Polynomial":
        return cls(np.array([0.0, 1.0], dtype=complex))

    @classmethod
    def from_roots(cls, roots: Sequence[complex], lead: complex = 1.0) -> "Polynomial":
        if len(roots) == 0:
            return cls.constant(lead)
        return cls(_P.polyfromroots(np.asarray(roots, dtype=complex)) * complex(lead))

    @property
    def degree(self) -> int:
        return -1 if self.is_zero else self.coef.size - 1

    @property
    def is_zero(self) -> bool:
        return self.coef.size == 1 and self.coef[0] == 0.0

    @property
    def lead(self) -> complex:
        return complex(self.coef[-1])

    @property
    def norm(self) -> float:
        return float(np.max(np.abs(self.coef)))

    def __call__(self, z):
        return _P.polyval(z, self.coef)

    def __add__(self, other: "Polynomial") -> "Polynomial":
        return Polynomial(_P.polyadd(self.coef, other.coef))

    def __sub__(self, other: "Polynomial") -> "Polynomial":
        return Polynomial(_P.polysub(self.coef, other.coef))

    def __mul__(self, other) -> "Polynomial":
        if isinstance(other, Polynomial):
            return Polynomial(_P.polymul(self.coef, other.coef))
        return Polynomial(self.coef * complex(other))

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "Polynomial":
        out = Polynomial.constant(1.0)
        for _ in range(int(k)):
            out = out * self
        return out

    def divmod(self, other: "Polynomial"):
        q, r = _P.polydiv(self.coef, other.coef)
        return Polynomial(q), Polynomial(r)

    def derivative(self) -> "Polynomial":
        if self.degree < 1:
            return Polynomial.constant(0.0)
        return Polynomial(_P.polyder(self.coef))

    def shift(self, a: complex) -> "Polynomial":
        """Coefficients of p(z + a)."""
        comp = np.polynomial.Polynomial(self.coef)(np.polynomial.Polynomial([a, 1.0]))
        return Polynomial(comp.coef)

    def conjugate(self) -> "Polynomial":
        """p*(z) = conj(p(conj z)): coefficient conjugation."""
        return Polynomial(np.conj(self.coef))

    def monic(self) -> "Polynomial":
        return Polynomial(self.coef / self.lead)

    def deflate(self, root: complex, times: int = 1) -> "Polynomial":
        """Synthetic division by (z - root)^times, remainder discarded."""
        c = self.coef
        for _ in range(times):
            c = _synthetic_divide(c, root)
        return Polynomial(c)

    def roots(self, polish: bool = True) -> np.ndarray:
        """Companion-matrix roots with one Newton polish step."""
        if self.degree < 1:
            return np.array([], dtype=complex)
        if self.degree > _MAX_ROOT_DEGREE:
            raise MathError(f"root finding limited to degree {_MAX_ROOT_DEGREE}")
        r = _P.polyroots(self.coef)
        if polish:
            dp = _P.polyder(self.coef)
            val, dval = _P.polyval(r, self.coef), _P.polyval(r, dp)
            ok = np.abs(dval) > 1e-14 * max(self.norm, 1.0)
            step = np.zeros_like(r)
            step[ok] = val[ok] / dval[ok]
            r = r - step
        return r

    def __repr__(self):
        return f"Polynomial({np.array2string(self.coef, precision=6)})"


def _synthetic_divide(coef: np.ndarray, root: complex) -> np.ndarray:
    # coef low->high; returns quotient coefficients of division by (z - root)
    n = coef.size
    if n == 1:
        return np.zeros(1, dtype=complex)
    out = np.empty(n - 1, dtype=complex)
    acc = coef[-1]
    for k in range(n - 2, -1, -1):
        out[k] = acc
        acc = coef[k] + root * acc
    return out


# ---------------------------------------------------------------------------
# univariate rationals
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class UnivariateRational:
    """num/den in lowest terms (root matching), denominator monic."""

    num: Polynomial
    den: Polynomial

    def __post_init__(self):
        num, den = self.num, self.den
        if not isinstance(num, Polynomial):
            num = Polynomial(np.asarray(num, dtype=complex))
        if not isinstance(den, Polynomial):
            den = Polynomial(np.asarray(den, dtype=complex))
        if den.is_zero:
            raise ZeroRationalDivisionError("denominator is the zero polynomial")
        if num.is_zero:
            num, den = Polynomial.constant(0.0), Polynomial.constant(1.0)
        else:
            num, den = _cancel_common_roots(num, den)
            lead = den.lead
            num, den = num * (1.0 / lead), den.monic()
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "den", den)

    @classmethod
    def constant(cls, c) -> "UnivariateRational":
        return cls(Polynomial.constant(c), Polynomial.constant(1.0))

    @classmethod
    def from_polynomial(cls, p: Polynomial) -> "UnivariateRational":
        return cls(p, Polynomial.constant(1.0))

    @classmethod
    def x(cls) -> "UnivariateRational":
        return cls(Polynomial.x(), Polynomial.constant(1.0))

    @property
    def is_zero(self) -> bool:
        return self.num.is_zero

    def __call__(self, z):
        return self.num(z) / self.den(z)

    def __add__(self, other) -> "UnivariateRational":
        other = _as_rational(other)
        return UnivariateRational(
            self.num * other.den + other.num * self.den, self.den * other.den
        )

    def __sub__(self, other) -> "UnivariateRational":
        other = _as_rational(other)
        return UnivariateRational(
            self.num * other.den - other.num * self.den, self.den * other.den
        )

    def __mul__(self, other) -> "UnivariateRational":
        other = _as_rational(other)
        return UnivariateRational(self.num * other.num, self.den * other.den)

    def __truediv__(self, other) -> "UnivariateRational":
        other = _as_rational(other)
        if other.is_zero:
            raise ZeroRationalDivisionError("division by the zero rational")
        return UnivariateRational(self.num * other.den, self.den * other.num)

    def __neg__(self) -> "UnivariateRational":
        return UnivariateRational(self.num * (-1.0), self.den)

    __radd__ = __add__
    __rmul__ = __mul__

    def derivative(self) -> "UnivariateRational":
        return UnivariateRational(
            self.num.derivative() * self.den - self.num * self.den.derivative(),
            self.den * self.den,
        )

    def conjugate_reflection(self) -> "UnivariateRational":
        """r*(z) = conj(r(conj z)): conjugate all coefficients."""
        return UnivariateRational(self.num.conjugate(), self.den.conjugate())

    def poles(self) -> np.ndarray:
        return self.den.roots()

    def isclose(self, other, tol: float = 1e-9) -> bool:
        other = _as_rational(other)
        lhs, rhs = self.num * other.den, other.num * self.den
        diff = lhs - rhs
        scale = max(lhs.norm, rhs.norm, 1.0)
        return diff.norm <= tol * scale

    def __repr__(self):
        return f"({_poly_str(self.num)}) / ({_poly_str(self.den)})"


def _as_rational(x) -> UnivariateRational:
    if isinstance(x, UnivariateRational):
        return x
    if isinstance(x, Polynomial):
        return UnivariateRational.from_polynomial(x)
    return UnivariateRational.constant(complex(x))


def _cancel_common_roots(num: Polynomial, den: Polynomial):
    if num.degree < 1 or den.degree < 1:
        return num, den
    if num.degree > _MAX_ROOT_DEGREE or den.degree > _MAX_ROOT_DEGREE:
        return num, den
    rn, rd = list(num.roots()), list(den.roots())
    kept_n = []
    matched = False
    for r in rn:
        hit = None
        for i, s in enumerate(rd):
            if abs(r - s) <= _CANCEL_TOL * (1.0 + abs(s)):
                hit = i
                break
        if hit is None:
            kept_n.append(r)
        else:
            rd.pop(hit)
            matched = True
    if not matched:
        return num, den
    return (
        Polynomial.from_roots(kept_n, lead=num.lead),
        Polynomial.from_roots(rd, lead=den.lead),
    )


def _poly_str(p: Polynomial) -> str:
    terms = []
    for k, c in enumerate(p.coef):
        if c == 0 and p.coef.size > 1:
            continue
        cs = f"{c.real:.6g}" if c.imag == 0 else f"({c:.6g})"
        terms.append(cs if k == 0 else (f"{cs}*z" if k == 1 else f"{cs}*z^{k}"))
    return " + ".join(terms) if terms else "0"


def format_factored(r: UnivariateRational) -> str:
    """Human-readable factored form lead * prod(z - root) / prod(z - root)."""

    def side(p: Polynomial) -> str:
        if p.degree < 1:
            return f"{p.lead:.6g}"
        roots = p.roots() + 0.0  # +0.0 clears negative zero
        factors = "".join(
            f"(z - ({w.real:.6g}{w.imag:+.6g}j))" if w.imag else f"(z - {w.real:.6g})"
            for w in roots
        )
        return (f"{p.lead:.6g}*" if abs(p.lead - 1.0) > 1e-12 else "") + factors

    return f"{side(r.num)} / {side(r.den)}" if r.den.degree >= 1 else side(r.num)


# ---------------------------------------------------------------------------
# regions, principal parts, partial fractions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DiscRegion:
    """Open disc |z - center| < radius used to classify poles."""

    center: complex = 0.0
    radius: float = 1.0

    def contains(self, w) -> bool:
        return abs(complex(w) - self.center) < self.radius

    def boundary_margin(self, w) -> float:
        return abs(abs(complex(w) - self.center) - self.radius)


UNIT_DISC = DiscRegion(0.0, 1.0)


class GridRegion:
    """Region view of a boundary grid: winding-number membership."""

    def __init__(self, grid):
        self.grid = grid

    def contains(self, w) -> bool:
        from .geometry import winding_number

        return abs(winding_number(self.grid, w) - 1.0) < 0.5

    def boundary_margin(self, w) -> float:
        return self.grid.nearest_node(w)[0]


@dataclass(frozen=True)
class PolePrincipalPart:
    """Principal part sum_k coef[k-1] / (z - location)^k, orders 1..order."""

    location: complex
    order: int
    coef: tuple

    def __post_init__(self):
        object.__setattr__(self, "coef", tuple(complex(c) for c in self.coef))
        if self.order != len(self.coef) or self.order < 1:
            raise InputError("principal part order must equal len(coef) >= 1")

    @property
    def residue(self) -> complex:
        return self.coef[0]

    def as_rational(self) -> UnivariateRational:
        # built in one shot as (sum_k a_k (z-w)^{m-k}) / (z-w)^m; chaining
        # additions would stack (z-w) powers and defeat root matching
        base = Polynomial.from_roots([self.location])
        num = Polynomial.constant(0.0)
        for k, a in enumerate(self.coef, start=1):
            num = num + Polynomial.constant(a) * base ** (self.order - k)
        return UnivariateRational(num, base**self.order)

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        d = z - self.location
        return sum(a / d**k for k, a in enumerate(self.coef, start=1))


@dataclass(frozen=True)
class PartialFractions:
    """Decomposition r = polynomial + sum(inside) + sum(outside).

    With a region, ``inside`` holds the principal parts at poles inside it;
    without one, every pole is ``inside``.  ``remainder`` is the reassembled
    sum of the outside parts (the term left over after removing the inside
    principal parts); it is built from the separated poles rather than by
    subtracting near-equal rationals, which keeps it well conditioned.
    """

    inside: tuple
    outside: tuple
    polynomial: Polynomial
    remainder: UnivariateRational

    def reconstruct(self) -> UnivariateRational:
        out = UnivariateRational.from_polynomial(self.polynomial)
        for part in self.inside + self.outside:
            out = out + part.as_rational()
        return out


def _cluster_roots(roots: np.ndarray, tol: float):
    order = np.lexsort((roots.imag, roots.real))
    roots = roots[order]
    used = np.zeros(roots.size, dtype=bool)
    clusters = []
    for i in range(roots.size):
        if used[i]:
            continue
        members = [roots[i]]
        used[i] = True
        center = roots[i]
        changed = True
        while changed:
            changed = False
            for j in range(roots.size):
                if not used[j] and abs(roots[j] - center) <= tol * (1.0 + abs(center)):
                    members.append(roots[j])
                    used[j] = True
                    center = np.mean(members)
                    changed = True
        clusters.append((complex(np.mean(members)), len(members)))
    return clusters


def _polish_clusters(den: Polynomial, clusters):
    # an order-m cluster center is a simple root of q^(m-1); Newton there
    # recovers the merged pole far beyond the eigenvalue splitting ~eps^(1/m)
    polished = []
    for w, mult in clusters:
        if mult > 1:
            dq = den
            for _ in range(mult - 1):
                dq = dq.derivative()
            ddq = dq.derivative()
            for _ in range(4):
                dval = ddq(w)
                if abs(dval) < 1e-14 * max(dq.norm, 1.0):
                    break
                w = w - dq(w) / dval
        polished.append((complex(w), mult))
    return polished


def _extract_parts(num: Polynomial, den: Polynomial, clusters):
    parts = []
    for w, m in clusters:
        qt = den.deflate(w, m)
        gnum = num.shift(w).coef
        gden = qt.shift(w).coef
        g = np.zeros(m, dtype=complex)
        for k in range(m):
            acc = gnum[k] if k < gnum.size else 0.0
            for j in range(1, k + 1):
                qj = gden[j] if j < gden.size else 0.0
                acc -= qj * g[k - j]
            g[k] = acc / gden[0]
        coef = tuple(g[m - j] for j in range(1, m + 1))
        parts.append(PolePrincipalPart(w, m, coef))
    parts.sort(key=lambda p: (p.location.real, p.location.imag))
    return parts


def _clustering_error(den: Polynomial, clusters) -> float:
    """Relative coefficient error of rebuilding den from the clustered roots.

    Sharp discriminator: forcing raw eigenvalues of a true m-fold root into a
    wrong split moves roots by the cluster spread and perturbs the rebuilt
    coefficients at that scale, while the correct merge (center polished on
    q^(m-1)) reproduces den to near roundoff.
    """
    roots = []
    for w, m in clusters:
        roots.extend([w] * m)
    rebuilt = Polynomial.from_roots(roots, lead=den.lead)
    return (rebuilt - den).norm / max(den.norm, 1e-300)


def partial_fractions(
    r: UnivariateRational,
    region=None,
    cluster_tol: float = _CLUSTER_TOL,
    boundary_tol: float = _BOUNDARY_POLE_TOL,
) -> PartialFractions:
    """Principal-part table of r, split by the region when one is given.

    Denominator roots come from the companion matrix with one Newton polish;
    roots closer than ``cluster_tol`` merge into a single higher-order pole.
    Clustering is self-validating: if the recombined decomposition misses r
    pointwise (companion eigenvalues of multiple roots can split beyond the
    base tolerance), the merge tolerance escalates and the split recomputes.
    A pole within ``boundary_tol`` of the region boundary is rejected.
    """
    num, den = r.num, r.den
    if den.degree < 1:
        return PartialFractions((), (), num * (1.0 / den.lead), UnivariateRational.constant(0.0))
    if num.degree >= den.degree:
        poly_part, _ = num.divmod(den)
    else:
        poly_part = Polynomial.constant(0.0)

    roots = den.roots()
    resid = np.abs(den(roots))
    if np.max(resid) > _ROOT_RESIDUAL_TOL * max(den.norm, 1.0):
        raise MathError(
            f"denominator root residual {np.max(resid):.2e} exceeds "
            f"{_ROOT_RESIDUAL_TOL:.0e} * |q|"
        )

    best = None
    tol = cluster_tol
    for _ in range(6):
        clusters = _polish_clusters(den, _cluster_roots(roots, tol))
        err = _clustering_error(den, clusters)
        if best is None or err < best[0]:
            best = (err, clusters)
        if err <= 1e-10:
            break
        tol *= 10.0
    _, clusters = best
    parts = _extract_parts(num, den, clusters)

    if region is not None:
        for w, _ in clusters:
            if region.boundary_margin(w) < boundary_tol:
                raise PoleOnBoundaryError(f"pole at {w} lies on the region boundary")

    if region is None:
        inside, outside = tuple(parts), ()
    else:
        inside = tuple(p for p in parts if region.contains(p.location))
        outside = tuple(p for p in parts if not region.contains(p.location))

    remainder = UnivariateRational.constant(0.0)
    for p in outside:
        remainder = remainder + p.as_rational()
    return PartialFractions(inside, outside, poly_part, remainder)


def residue_sum(r: UnivariateRational, region=UNIT_DISC) -> complex:
    """Sum of residues of r at poles strictly inside the region."""
    pf = partial_fractions(r, region=region)
    return complex(sum(p.residue for p in pf.inside))


# ---------------------------------------------------------------------------
# bivariate rationals
# ---------------------------------------------------------------------------


def _trim2(c: np.ndarray) -> np.ndarray:
    c = np.atleast_2d(np.asarray(c, dtype=complex))
    scale = np.max(np.abs(c)) if c.size else 0.0
    if scale == 0.0:
        return np.zeros((1, 1), dtype=complex)
    rows = np.nonzero(np.any(np.abs(c) > _TRIM_REL * scale, axis=1))[0]
    cols = np.nonzero(np.any(np.abs(c) > _TRIM_REL * scale, axis=0))[0]
    return c[: rows[-1] + 1, : cols[-1] + 1].copy()


def _mul2(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return convolve2d(a, b)


@dataclass(frozen=True)
class BivariateRational:
    """R(z, w) = num/den with coefficient matrices indexed [z-power][w-power]."""

    num: np.ndarray
    den: np.ndarray

    def __post_init__(self):
        num, den = _trim2(self.num), _trim2(self.den)
        if np.all(den == 0):
            raise InputError("bivariate denominator is identically zero")
        scale = np.max(np.abs(den))
        object.__setattr__(self, "num", num / scale)
        object.__setattr__(self, "den", den / scale)
        self.num.setflags(write=False)
        self.den.setflags(write=False)

    @classmethod
    def constant(cls, c) -> "BivariateRational":
        return cls(np.array([[complex(c)]]), np.array([[1.0 + 0j]]))

    @classmethod
    def z(cls) -> "BivariateRational":
        return cls(np.array([[0.0], [1.0]], dtype=complex), np.array([[1.0 + 0j]]))

    @classmethod
    def w(cls) -> "BivariateRational":
        return cls(np.array([[0.0, 1.0]], dtype=complex), np.array([[1.0 + 0j]]))

    @classmethod
    def from_univariate(cls, r: UnivariateRational, variable: str = "z") -> "BivariateRational":
        if variable == "z":
            return cls(r.num.coef[:, None], r.den.coef[:, None])
        return cls(r.num.coef[None, :], r.den.coef[None, :])

    @property
    def zdeg(self) -> int:
        return max(self.num.shape[0], self.den.shape[0]) - 1

    @property
    def wdeg(self) -> int:
        return max(self.num.shape[1], self.den.shape[1]) - 1

    def eval(self, z, w):
        return _P.polyval2d(z, w, self.num) / _P.polyval2d(z, w, self.den)

    def eval_boundary(self, z):
        """R(z, conj z) -- the boundary data the rational represents."""
        z = np.asarray(z, dtype=complex)
        return self.eval(z, np.conj(z))

    def __add__(self, other) -> "BivariateRational":
        other = _as_bivariate(other)
        num = _P2_add(_mul2(self.num, other.den), _mul2(other.num, self.den))
        return BivariateRational(num, _mul2(self.den, other.den))

    def __sub__(self, other) -> "BivariateRational":
        other = _as_bivariate(other)
        num = _P2_add(_mul2(self.num, other.den), -_mul2(other.num, self.den))
        return BivariateRational(num, _mul2(self.den, other.den))

    def __mul__(self, other) -> "BivariateRational":
        other = _as_bivariate(other)
        return BivariateRational(_mul2(self.num, other.num), _mul2(self.den, other.den))

    def __truediv__(self, other) -> "BivariateRational":
        other = _as_bivariate(other)
        if np.all(other.num == 0):
            raise ZeroRationalDivisionError("division by the zero bivariate rational")
        return BivariateRational(_mul2(self.num, other.den), _mul2(self.den, other.num))

    def __neg__(self) -> "BivariateRational":
        return BivariateRational(-self.num, self.den)

    def __pow__(self, k: int) -> "BivariateRational":
        out = BivariateRational.constant(1.0)
        for _ in range(int(k)):
            out = out * self
        return out

    __radd__ = __add__
    __rmul__ = __mul__

    def __rsub__(self, other) -> "BivariateRational":
        return _as_bivariate(other) - self

    def boundary_conjugate_circle(self) -> "BivariateRational":
        """conj(R(z, conj z)) on |z| = 1, i.e. conjugate coefficients and swap slots."""
        return BivariateRational(np.conj(self.num).T, np.conj(self.den).T)

    def restrict_circle(self) -> UnivariateRational:
        """R(z, 1/z): the meromorphic function matching R(z, conj z) on |z|=1."""
        return self.substitute_w(UnivariateRational(Polynomial.constant(1.0), Polynomial.x()))

    def substitute_w(self, s: UnivariateRational) -> UnivariateRational:
        """R(z, s(z)) in lowest terms; denominators of s are cleared symbolically."""
        wmax = max(self.num.shape[1], self.den.shape[1]) - 1
        p_pows = [Polynomial.constant(1.0)]
        q_pows = [Polynomial.constant(1.0)]
        for _ in range(wmax):
            p_pows.append(p_pows[-1] * s.num)
            q_pows.append(q_pows[-1] * s.den)

        def collapse(mat: np.ndarray) -> Polynomial:
            out = Polynomial.constant(0.0)
            for b in range(mat.shape[1]):
                col = Polynomial(mat[:, b])
                if col.is_zero:
                    continue
                out = out + col * p_pows[b] * q_pows[wmax - b]
            return out

        num, den = collapse(self.num), collapse(self.den)
        if den.is_zero:
            raise DegenerateSubstitutionError("substitution produced a zero denominator")
        return UnivariateRational(num, den)

    def sup_on_circle(self, samples: int = 128) -> float:
        """max |R(z, conj z)| over equispaced points of the unit circle."""
        z = np.exp(2j * np.pi * np.arange(samples) / samples)
        return float(np.max(np.abs(self.eval_boundary(z))))

    def __repr__(self):
        return f"BivariateRational(zdeg={self.zdeg}, wdeg={self.wdeg})"


def _P2_add(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    rows, cols = max(a.shape[0], b.shape[0]), max(a.shape[1], b.shape[1])
    out = np.zeros((rows, cols), dtype=complex)
    out[: a.shape[0], : a.shape[1]] += a
    out[: b.shape[0], : b.shape[1]] += b
    return out


def _as_bivariate(x) -> BivariateRational:
    if isinstance(x, BivariateRational):
        return x
    if isinstance(x, UnivariateRational):
        return BivariateRational.from_univariate(x)
    if isinstance(x, Polynomial):
        return BivariateRational.from_univariate(UnivariateRational.from_polynomial(x))
    return BivariateRational.constant(complex(x))


# ---------------------------------------------------------------------------
# JSON forms and the small expression grammar
# ---------------------------------------------------------------------------


def _pairs_to_coef(rows) -> np.ndarray:
    return np.array([complex(p[0], p[1]) for p in rows], dtype=complex)


def rational_from_json(obj: dict):
    """Parse {"num": ..., "den": ...}: pair lists (univariate) or matrices (bivariate)."""
    try:
        num, den = obj["num"], obj["den"]
    except (TypeError, KeyError):
        raise InputError("rational literal needs 'num' and 'den'") from None
    try:
        if num and isinstance(num[0][0], (list, tuple)):
            tomat = lambda rows: np.array(
                [[complex(p[0], p[1]) for p in row] for row in rows], dtype=complex
            )
            return BivariateRational(tomat(num), tomat(den))
        return UnivariateRational(Polynomial(_pairs_to_coef(num)), Polynomial(_pairs_to_coef(den)))
    except (TypeError, IndexError, ValueError) as exc:
        raise InputError(f"malformed rational literal: {exc}") from exc


def rational_to_json(r) -> dict:
    if isinstance(r, UnivariateRational):
        pairs = lambda p: [[float(c.real), float(c.imag)] for c in p.coef]
        return {"num": pairs(r.num), "den": pairs(r.den)}
    if isinstance(r, BivariateRational):
        mat = lambda m: [[[float(c.real), float(c.imag)] for c in row] for row in m]
        return {"num": mat(r.num), "den": mat(r.den)}
    raise InputError(f"not a rational: {type(r)}")


_ALLOWED_NAMES = {"z", "zbar", "w"}


def parse_rational_expression(src: str) -> BivariateRational:
    """Parse expressions like ``zbar**2 + 1/(2+z)`` into a BivariateRational.

    Names: ``z`` and ``zbar`` (alias ``w``) for the boundary variable and its
    conjugate; ``conj(...)`` takes the boundary conjugate on the unit circle.
    Numeric literals may be complex (``0.5j``).
    """
    try:
        tree = ast.parse(src, mode="eval")
    except SyntaxError as exc:
        raise InputError(f"bad rational expression {src!r}: {exc}") from exc

    def ev(node) -> BivariateRational:
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float, complex)):
            return BivariateRational.constant(node.value)
        if isinstance(node, ast.Name):
            if node.id == "z":
                return BivariateRational.z()
            if node.id in ("zbar", "w"):
                return BivariateRational.w()
            raise InputError(f"unknown name {node.id!r}; allowed: {sorted(_ALLOWED_NAMES)}")
        if isinstance(node, ast.UnaryOp):
            v = ev(node.operand)
            if isinstance(node.op, ast.USub):
                return -v
            if isinstance(node.op, ast.UAdd):
                return v
        if isinstance(node, ast.BinOp):
            if isinstance(node.op, ast.Pow):
                exp = node.right
                sign = 1
                if isinstance(exp, ast.UnaryOp) and isinstance(exp.op, ast.USub):
                    sign, exp = -1, exp.operand
                if not (isinstance(exp, ast.Constant) and isinstance(exp.value, int)):
                    raise InputError("exponent must be an integer literal")
                k, base = sign * exp.value, ev(node.left)
                out = BivariateRational.constant(1.0)
                for _ in range(abs(k)):
                    out = out * base
                return out if k >= 0 else BivariateRational.constant(1.0) / out
            lhs, rhs = ev(node.left), ev(node.right)
            if isinstance(node.op, ast.Add):
                return lhs + rhs
            if isinstance(node.op, ast.Sub):
                return lhs - rhs
            if isinstance(node.op, ast.Mult):
                return lhs * rhs
            if isinstance(node.op, ast.Div):
                return lhs / rhs
        if isinstance(node, ast.Call) and isinstance(node.func, ast.Name) and node.func.id == "conj":
            if len(node.args) != 1 or node.keywords:
                raise InputError("conj() takes exactly one argument")
            return ev(node.args[0]).boundary_conjugate_circle()
        raise InputError(f"unsupported syntax in rational expression: {ast.dump(node)}")

    return ev(tree)
