"""Exact symbolic polynomials, piecewise compositions, and their integrals.

Coefficients live in the plain monomial basis of the original variable
(index j holds the coefficient of x**j), so printed programs show the same
numbers the objects carry.  Everything here is immutable and pure; definite
integration is closed-form via the antiderivative.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import ContractError, InvalidIntervalError

#: tolerance on the total mass of a flagged density
DENSITY_MASS_TOL = 1e-9
#: a flagged density may not dip below -DENSITY_NEG_TOL anywhere
DENSITY_NEG_TOL = 1e-12
#: grid resolution per piece used to screen non-negativity at construction
NEG_CHECK_GRID = 257


def _trim(coeffs: Iterable[float]) -> tuple[float, ...]:
    cs = [float(c) for c in coeffs]
    if not cs:
        raise ContractError("a polynomial needs at least one coefficient")
    while len(cs) > 1 and cs[-1] == 0.0:
        cs.pop()
    return tuple(cs)


@dataclass(frozen=True)
class Polynomial:
    """Univariate polynomial sum_j coefficients[j] * x**j."""

    coefficients: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "coefficients", _trim(self.coefficients))

    @property
    def order(self) -> int:
        return len(self.coefficients) - 1

    @property
    def is_zero(self) -> bool:
        return self.coefficients == (0.0,)

    def __call__(self, x: float) -> float:
        acc = 0.0
        for c in reversed(self.coefficients):
            acc = acc * x + c
        return acc

    def values(self, xs: np.ndarray) -> np.ndarray:
        return np.polynomial.polynomial.polyval(xs, self.coefficients)

    def __add__(self, other: "Polynomial") -> "Polynomial":
        a, b = self.coefficients, other.coefficients
        if len(a) < len(b):
            a, b = b, a
        out = list(a)
        for j, c in enumerate(b):
            out[j] += c
        return Polynomial(tuple(out))

    def __neg__(self) -> "Polynomial":
        return Polynomial(tuple(-c for c in self.coefficients))

    def __sub__(self, other: "Polynomial") -> "Polynomial":
        return self + (-other)

    def __mul__(self, other: "Polynomial | float") -> "Polynomial":
        if isinstance(other, (int, float)):
            return Polynomial(tuple(c * other for c in self.coefficients))
        out = [0.0] * (len(self.coefficients) + len(other.coefficients) - 1)
        for i, a in enumerate(self.coefficients):
            for j, b in enumerate(other.coefficients):
                out[i + j] += a * b
        return Polynomial(tuple(out))

    __rmul__ = __mul__

    def antiderivative(self) -> "Polynomial":
        return Polynomial((0.0,) + tuple(c / (j + 1) for j, c in enumerate(self.coefficients)))

    def integrate(self, a: float, b: float) -> float:
        """Definite integral over [a, b] via the closed-form antiderivative."""
        if a > b:
            raise InvalidIntervalError(f"integration bounds out of order: [{a}, {b}]")
        if a == b:
            return 0.0
        F = self.antiderivative()
        return F(b) - F(a)

    def compose_affine(self, alpha: float, beta: float) -> "Polynomial":
        """Return q with q(u) = p(alpha*u + beta), by exact coefficient arithmetic."""
        inner = Polynomial((beta, alpha))
        acc = Polynomial((self.coefficients[-1],))
        for c in reversed(self.coefficients[:-1]):
            acc = acc * inner + Polynomial((c,))
        return acc


def poly_arith(p: Polynomial, q: Polynomial, op: str) -> Polynomial:
    """Dispatch helper for the three ring operations."""
    if op == "add":
        return p + q
    if op == "sub":
        return p - q
    if op == "mul":
        return p * q
    raise ContractError(f"unknown polynomial operation {op!r}")


@dataclass(frozen=True)
class PiecewisePolynomial:
    """Polynomial pieces on consecutive cutpoint intervals, zero outside.

    Piece i is defined on [cutpoints[i], cutpoints[i+1]].  With
    ``is_density`` set, construction verifies total mass 1 (within
    ``DENSITY_MASS_TOL``) and screens non-negativity on a per-piece grid.
    """

    cutpoints: tuple[float, ...]
    pieces: tuple[Polynomial, ...]
    is_density: bool = False

    def __post_init__(self):
        object.__setattr__(self, "cutpoints", tuple(float(c) for c in self.cutpoints))
        object.__setattr__(self, "pieces", tuple(self.pieces))
        if len(self.cutpoints) < 2:
            raise ContractError("a piecewise polynomial needs at least two cutpoints")
        for lo, hi in zip(self.cutpoints, self.cutpoints[1:]):
            if not lo < hi:
                raise ContractError(f"cutpoints must be strictly increasing, got {lo} >= {hi}")
        if len(self.pieces) != len(self.cutpoints) - 1:
            raise ContractError(
                f"{len(self.cutpoints)} cutpoints require {len(self.cutpoints) - 1} pieces, "
                f"got {len(self.pieces)}"
            )
        if self.is_density:
            mass = self.mass_extended()
            if abs(mass - 1.0) > DENSITY_MASS_TOL:
                raise ContractError(f"flagged density integrates to {mass!r}, not 1")
            if self.min_on_grid(NEG_CHECK_GRID * len(self.pieces)) < -DENSITY_NEG_TOL:
                raise ContractError("flagged density is negative inside its support")

    @property
    def support(self) -> tuple[float, float]:
        return self.cutpoints[0], self.cutpoints[-1]

    def piece_interval(self, i: int) -> tuple[float, float]:
        return self.cutpoints[i], self.cutpoints[i + 1]

    def __call__(self, x: float) -> float:
        lo, hi = self.support
        if x < lo or x > hi:
            return 0.0
        i = min(bisect_right(self.cutpoints, x) - 1, len(self.pieces) - 1)
        return self.pieces[max(i, 0)](x)

    def values(self, xs: np.ndarray) -> np.ndarray:
        xs = np.asarray(xs, dtype=float)
        out = np.zeros_like(xs)
        cps = np.asarray(self.cutpoints)
        idx = np.clip(np.searchsorted(cps, xs, side="right") - 1, 0, len(self.pieces) - 1)
        inside = (xs >= cps[0]) & (xs <= cps[-1])
        for i, piece in enumerate(self.pieces):
            mask = inside & (idx == i)
            if mask.any():
                out[mask] = piece.values(xs[mask])
        return out

    def min_on_grid(self, npoints: int) -> float:
        xs = np.linspace(self.cutpoints[0], self.cutpoints[-1], npoints)
        return float(self.values(xs).min())

    def total_mass(self) -> float:
        return self.integrate(-math.inf, math.inf)

    def mass_extended(self) -> float:
        """Total mass measured in extended precision; the plain monomial
        basis anchored at absolute x cancels heavily for wide supports, so
        the density-flag check uses this tighter measurement."""
        total = np.longdouble(0.0)
        for i, piece in enumerate(self.pieces):
            a, b = (np.longdouble(c) for c in self.piece_interval(i))
            cs = np.array(piece.coefficients, dtype=np.longdouble)
            f_a = f_b = np.longdouble(0.0)
            for j in range(len(cs) - 1, -1, -1):
                c = cs[j] / np.longdouble(j + 1)
                f_a = f_a * a + c
                f_b = f_b * b + c
            total += f_b * b - f_a * a
        return float(total)

    def integrate(self, a: float, b: float) -> float:
        """Integral over [a, b] ∩ support; infinite bounds clamp at the support."""
        if math.isnan(a) or math.isnan(b):
            raise InvalidIntervalError("integration bound is NaN")
        if a > b:
            raise InvalidIntervalError(f"integration bounds out of order: [{a}, {b}]")
        lo, hi = self.support
        a, b = max(a, lo), min(b, hi)
        if a >= b:
            return 0.0
        total = 0.0
        for i, piece in enumerate(self.pieces):
            plo, phi = self.piece_interval(i)
            seg_lo, seg_hi = max(a, plo), min(b, phi)
            if seg_lo < seg_hi:
                total += piece.integrate(seg_lo, seg_hi)
        return total

    def complement(self, a: float, b: float) -> float:
        """P(x not in [a,b]) = 1 - P(x in [a,b]); requires a valid density."""
        if not self.is_density:
            raise ContractError("complement probability is defined for densities only")
        return min(1.0, max(0.0, 1.0 - self.integrate(a, b)))


# --- multivariate -----------------------------------------------------------


@dataclass(frozen=True)
class HyperCube:
    """Axis-aligned box: bounds[j] = (low_j, high_j)."""

    bounds: tuple[tuple[float, float], ...]

    def __post_init__(self):
        object.__setattr__(
            self, "bounds", tuple((float(a), float(b)) for a, b in self.bounds)
        )
        for a, b in self.bounds:
            if math.isnan(a) or math.isnan(b) or a > b:
                raise InvalidIntervalError(f"bad box bounds ({a}, {b})")

    @property
    def dimension(self) -> int:
        return len(self.bounds)

    def intersect(self, other: "HyperCube") -> "HyperCube | None":
        out = []
        for (a1, b1), (a2, b2) in zip(self.bounds, other.bounds):
            lo, hi = max(a1, a2), min(b1, b2)
            if lo > hi:
                return None
            out.append((lo, hi))
        return HyperCube(tuple(out))

    def volume(self) -> float:
        v = 1.0
        for a, b in self.bounds:
            v *= b - a
        return v


@dataclass(frozen=True)
class MultivariatePolynomial:
    """Sparse map from exponent tuples to coefficients, over nvars variables."""

    nvars: int
    terms: Mapping[tuple[int, ...], float]

    def __post_init__(self):
        clean = {}
        for exps, c in self.terms.items():
            exps = tuple(int(e) for e in exps)
            if len(exps) != self.nvars:
                raise ContractError(f"term {exps} does not have {self.nvars} exponents")
            if any(e < 0 for e in exps):
                raise ContractError("negative exponents are not polynomial terms")
            if c != 0.0:
                clean[exps] = clean.get(exps, 0.0) + float(c)
        if not clean:
            clean = {(0,) * self.nvars: 0.0}
        object.__setattr__(self, "terms", dict(clean))

    @classmethod
    def constant(cls, nvars: int, value: float) -> "MultivariatePolynomial":
        return cls(nvars, {(0,) * nvars: value})

    @classmethod
    def variable(cls, nvars: int, index: int) -> "MultivariatePolynomial":
        exps = [0] * nvars
        exps[index] = 1
        return cls(nvars, {tuple(exps): 1.0})

    def __call__(self, point: Sequence[float]) -> float:
        total = 0.0
        for exps, c in self.terms.items():
            term = c
            for x, e in zip(point, exps):
                term *= x**e
            total += term
        return total

    def _combine(self, other, f) -> "MultivariatePolynomial":
        if self.nvars != other.nvars:
            raise ContractError("operands range over different variable counts")
        out = dict(self.terms)
        for exps, c in other.terms.items():
            out[exps] = f(out.get(exps, 0.0), c)
        return MultivariatePolynomial(self.nvars, out)

    def __add__(self, other):
        return self._combine(other, lambda a, b: a + b)

    def __sub__(self, other):
        return self._combine(other, lambda a, b: a - b)

    def __mul__(self, other: "MultivariatePolynomial | float"):
        if isinstance(other, (int, float)):
            return MultivariatePolynomial(
                self.nvars, {e: c * other for e, c in self.terms.items()}
            )
        if self.nvars != other.nvars:
            raise ContractError("operands range over different variable counts")
        out: dict[tuple[int, ...], float] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                key = tuple(a + b for a, b in zip(e1, e2))
                out[key] = out.get(key, 0.0) + c1 * c2
        return MultivariatePolynomial(self.nvars, out)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "MultivariatePolynomial":
        if n < 0:
            raise ContractError("negative powers are not polynomial")
        acc = MultivariatePolynomial.constant(self.nvars, 1.0)
        for _ in range(n):
            acc = acc * self
        return acc

    def integrate_box(self, box: HyperCube) -> float:
        """Exact integral over the box: each monomial integrates per dimension."""
        if box.dimension != self.nvars:
            raise ContractError(
                f"box has dimension {box.dimension}, polynomial has {self.nvars}"
            )
        total = 0.0
        for exps, c in self.terms.items():
            term = c
            for (a, b), e in zip(box.bounds, exps):
                term *= (b ** (e + 1) - a ** (e + 1)) / (e + 1)
            total += term
        return total

    def to_univariate(self) -> Polynomial:
        if self.nvars != 1:
            raise ContractError("only 1-variable polynomials convert to Polynomial")
        order = max(e[0] for e in self.terms)
        coeffs = [0.0] * (order + 1)
        for (e,), c in self.terms.items():
            coeffs[e] = c
        return Polynomial(tuple(coeffs))

    @classmethod
    def from_univariate(cls, p: Polynomial) -> "MultivariatePolynomial":
        return cls(1, {(j,): c for j, c in enumerate(p.coefficients)})


@dataclass(frozen=True)
class MultivariatePP:
    """Multivariate piecewise polynomial: one polynomial per hyper-cube,
    zero outside the union of cubes.  Cubes must be interior-disjoint."""

    dimension: int
    pieces: tuple[tuple[HyperCube, MultivariatePolynomial], ...]
    is_density: bool = False

    def __post_init__(self):
        object.__setattr__(self, "pieces", tuple(self.pieces))
        for cube, poly in self.pieces:
            if cube.dimension != self.dimension or poly.nvars != self.dimension:
                raise ContractError("piece dimension differs from the function dimension")
        for i, (c1, _) in enumerate(self.pieces):
            for c2, _ in self.pieces[i + 1 :]:
                overlap = c1.intersect(c2)
                if overlap is not None and overlap.volume() > 0.0:
                    raise ContractError("piece hyper-cubes overlap with positive volume")
        if self.is_density:
            mass = self.total_mass()
            if abs(mass - 1.0) > DENSITY_MASS_TOL:
                raise ContractError(f"flagged density integrates to {mass!r}, not 1")

    def total_mass(self) -> float:
        return sum(poly.integrate_box(cube) for cube, poly in self.pieces)

    def integrate_box(self, box: HyperCube) -> float:
        """Integral over box ∩ support, summed over the pieces it meets."""
        if box.dimension != self.dimension:
            raise ContractError(
                f"box has dimension {box.dimension}, function has {self.dimension}"
            )
        total = 0.0
        for cube, poly in self.pieces:
            cell = cube.intersect(box)
            if cell is not None and cell.volume() > 0.0:
                total += poly.integrate_box(cell)
        return total

    def __call__(self, point: Sequence[float]) -> float:
        for cube, poly in self.pieces:
            if all(a <= x <= b for x, (a, b) in zip(point, cube.bounds)):
                return poly(point)
        return 0.0
