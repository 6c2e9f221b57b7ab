"""Nonparametric density fitting: B-spline mixtures scored by BIC.

A basis of clamped B-splines is built over a discretization, converted to
exact monomial-basis piecewise polynomials, and normalised so each basis
function is itself a density.  Maximum-likelihood mixing weights on the
probability simplex are found by EM multiplicative updates, which makes the
fitted function a valid density by construction (non-negative, unit mass).
A grid search over bin count, binning method and polynomial degree picks
the configuration with the best BIC.

Fitting happens on data affinely mapped to [0, 1] to keep the monomial
representation well conditioned; returned models carry original units.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .discretize import Discretization, Method, equal_frequency, equal_width, entropy_distance
from .errors import ContractError, DegenerateInputError
from .polynomials import (
    DENSITY_MASS_TOL,
    DENSITY_NEG_TOL,
    NEG_CHECK_GRID,
    PiecewisePolynomial,
    Polynomial,
)

MAX_DEGREE = 10
EM_MAX_ITERS = 500
EM_TOL = 1e-9


@dataclass(frozen=True)
class SplineBasis:
    """Basis functions over a discretization, in monomial piece form.

    Each function is non-negative with unit partition: sum_i B_i(x) = 1 on
    the support.  ``masses[i]`` is the exact integral of ``functions[i]``.
    """

    discretization: Discretization
    degree: int
    functions: tuple[PiecewisePolynomial, ...]
    masses: tuple[float, ...]

    @property
    def size(self) -> int:
        return len(self.functions)

    def design_matrix(self, xs: np.ndarray) -> np.ndarray:
        """Matrix of B_i(x_j), vectorised span by span."""
        xs = np.asarray(xs, dtype=float)
        cps = np.asarray(self.discretization.cutpoints)
        mat = np.zeros((len(xs), self.size))
        spans = np.clip(np.searchsorted(cps, xs, side="right") - 1, 0, len(cps) - 2)
        for j in range(len(cps) - 1):
            mask = spans == j
            if not mask.any():
                continue
            seg = xs[mask]
            for i, fn in enumerate(self.functions):
                piece = fn.pieces[j]
                if not piece.is_zero:
                    mat[mask, i] = piece.values(seg)
        return mat


@dataclass(frozen=True)
class DensityModel:
    """A fitted piecewise-polynomial density with its selection scores.

    ``coefficients[i]`` scales the i-th basis density (c_i = w_i / M_i), so
    sum_i c_i * M_i = 1; ``weights`` are the simplex mixing weights w.
    """

    discretization: Discretization
    degree: int
    coefficients: tuple[float, ...]
    weights: tuple[float, ...]
    density: PiecewisePolynomial
    log_likelihood: float
    bic: float
    n: int
    #: fraction of structure-search grid cells where equal-frequency beat
    #: equal-width (populated by build_pp_structure only)
    pct_ef: float | None = None


def _bic(log_likelihood: float, n_coefficients: int, n: int) -> float:
    if n < 1:
        raise ContractError("BIC needs at least one observation")
    return log_likelihood - 0.5 * (n_coefficients - 1) * math.log(n)


def bic_score(model: DensityModel) -> float:
    """Penalised log-likelihood, larger is better; the p-1 free simplex
    parameters pay the ln(n) penalty."""
    return _bic(model.log_likelihood, len(model.coefficients), model.n)


# --- basis construction ------------------------------------------------------


def _cox_de_boor(t: Sequence[float], k: int, i: int, x: float) -> float:
    if k == 0:
        return 1.0 if t[i] <= x < t[i + 1] else 0.0
    acc = 0.0
    if t[i + k] != t[i]:
        acc += (x - t[i]) / (t[i + k] - t[i]) * _cox_de_boor(t, k - 1, i, x)
    if t[i + k + 1] != t[i + 1]:
        acc += (t[i + k + 1] - x) / (t[i + k + 1] - t[i + 1]) * _cox_de_boor(t, k - 1, i + 1, x)
    return acc


def build_basis(discretization: Discretization, degree: int) -> SplineBasis:
    """Clamped B-spline basis of the given degree over the cutpoints.

    Yields l + degree functions.  Each is converted to monomial pieces by
    evaluating at degree+1 Chebyshev nodes per span and interpolating,
    which is exact because the spline is a polynomial on every span.
    """
    if not 1 <= degree <= MAX_DEGREE:
        raise ContractError(f"spline degree must be in [1, {MAX_DEGREE}], got {degree}")
    cps = discretization.cutpoints
    l = discretization.bins
    knots = (cps[0],) * (degree + 1) + cps[1:-1] + (cps[-1],) * (degree + 1)
    size = l + degree

    functions = []
    masses = []
    for i in range(size):
        pieces = []
        for j in range(l):
            lo, hi = cps[j], cps[j + 1]
            if knots[i] >= hi or knots[i + degree + 1] <= lo:
                pieces.append(Polynomial((0.0,)))
                continue
            mid, half = (lo + hi) / 2.0, (hi - lo) / 2.0
            nodes = np.array(
                [mid + half * math.cos(math.pi * (2 * m + 1) / (2 * (degree + 1)))
                 for m in range(degree + 1)]
            )
            vals = np.array([_cox_de_boor(knots, degree, i, x) for x in nodes])
            vander = np.vander(nodes, degree + 1, increasing=True)
            try:
                coeffs = np.linalg.solve(vander, vals)
            except np.linalg.LinAlgError:
                raise ContractError(
                    f"span [{lo}, {hi}] is too narrow to interpolate at degree {degree}"
                ) from None
            pieces.append(Polynomial(tuple(coeffs)))
        fn = PiecewisePolynomial(cps, tuple(pieces))
        functions.append(fn)
        masses.append(fn.integrate(cps[0], cps[-1]))
    return SplineBasis(discretization, degree, tuple(functions), tuple(masses))


def constant_basis(discretization: Discretization) -> SplineBasis:
    """Single constant basis function; fitting it forces the uniform density."""
    cps = discretization.cutpoints
    one = Polynomial((1.0,))
    fn = PiecewisePolynomial(cps, tuple(one for _ in range(discretization.bins)))
    return SplineBasis(discretization, 0, (fn,), (cps[-1] - cps[0],))


# --- weight fitting ----------------------------------------------------------


def fit_coefficients(basis: SplineBasis, data: Sequence[float]) -> DensityModel:
    """Maximum-likelihood simplex weights for the normalised basis mixture.

    EM multiplicative updates: w_i <- (1/n) sum_j w_i Bt_i(x_j) / f(x_j)
    with Bt_i = B_i / M_i; stops when the log-likelihood improves by less
    than EM_TOL or after EM_MAX_ITERS rounds.  Monotonicity of the
    log-likelihood is asserted every round.
    """
    xs = np.asarray(data, dtype=float)
    if xs.size < 1:
        raise ContractError("need at least one observation")
    lo, hi = basis.discretization.cutpoints[0], basis.discretization.cutpoints[-1]
    if np.any(np.isnan(xs)) or xs.min() < lo or xs.max() > hi:
        raise ContractError(f"data must lie within the support [{lo}, {hi}]")

    masses = np.asarray(basis.masses)
    normed = basis.design_matrix(xs) / masses  # each column a unit-mass density
    n, p = normed.shape

    w = np.full(p, 1.0 / p)
    mix = np.maximum(normed @ w, 1e-300)
    log_l = float(np.log(mix).sum())
    for _ in range(EM_MAX_ITERS):
        w = w * ((1.0 / mix) @ normed) / n
        w /= w.sum()
        mix = np.maximum(normed @ w, 1e-300)
        new_log_l = float(np.log(mix).sum())
        if not new_log_l >= log_l - 1e-9:
            raise AssertionError("EM log-likelihood decreased")
        improved = new_log_l - log_l
        log_l = new_log_l
        if improved < EM_TOL:
            break

    coeffs = w / masses
    cps = basis.discretization.cutpoints
    pieces = []
    for j in range(len(cps) - 1):
        acc = Polynomial((0.0,))
        for c, fn in zip(coeffs, basis.functions):
            if not fn.pieces[j].is_zero:
                acc = acc + fn.pieces[j] * float(c)
        pieces.append(acc)
    density = _as_density(cps, pieces)
    return DensityModel(
        discretization=basis.discretization,
        degree=basis.degree,
        coefficients=tuple(float(c) for c in coeffs),
        weights=tuple(float(v) for v in w),
        density=density,
        log_likelihood=log_l,
        bic=_bic(log_l, p, n),
        n=n,
    )


def _as_density(cutpoints, pieces) -> PiecewisePolynomial:
    # rescale by the symbolically computed mass so the flagged invariant
    # holds exactly despite representation round-off
    raw = PiecewisePolynomial(cutpoints, tuple(pieces))
    mass = raw.mass_extended()
    if not 0.5 < mass < 2.0:
        raise ContractError(f"fitted function has mass {mass!r}; not close to a density")
    work = [p * (1.0 / mass) for p in raw.pieces]
    # where the mixture is essentially zero, monomial round-off can push the
    # stored pieces slightly below zero although the exact convex combination
    # cannot be negative: evaluation noise scales with the largest coefficient
    # magnitude, so raise such pieces to that noise floor (a genuinely
    # negative fit stays an error)
    eps = float(np.finfo(np.float64).eps)
    for i, piece in enumerate(work):
        grid = np.linspace(cutpoints[i], cutpoints[i + 1], 4 * NEG_CHECK_GRID)
        low = float(piece.values(grid).min())
        floor = 16.0 * eps * max(abs(c) for c in piece.coefficients) + DENSITY_NEG_TOL
        if -1e-7 < low < floor:
            cs = list(piece.coefficients)
            cs[0] += floor - low
            work[i] = Polynomial(tuple(cs))
    resid = 1.0 - PiecewisePolynomial(cutpoints, tuple(work)).mass_extended()
    if abs(resid) > 0.25 * DENSITY_MASS_TOL:
        # narrow spans amplify coefficient round-off beyond the mass
        # tolerance; absorb the residual into a constant term, which moves
        # the mass exactly linearly (by resid/width at the value level,
        # negligible against the density scale).  The piece with the
        # smallest constant coefficient gives the finest adjustment
        # resolution: elsewhere the correction can vanish in its ulp.
        j = min(range(len(work)), key=lambda i: abs(work[i].coefficients[0]))
        width = cutpoints[j + 1] - cutpoints[j]
        for _ in range(6):
            if abs(resid) <= 0.25 * DENSITY_MASS_TOL:
                break
            cs = list(work[j].coefficients)
            cs[0] += resid / width
            work[j] = Polynomial(tuple(cs))
            resid = 1.0 - PiecewisePolynomial(cutpoints, tuple(work)).mass_extended()
    return PiecewisePolynomial(cutpoints, tuple(work), is_density=True)


# --- structure search --------------------------------------------------------


def _normalize(disc: Discretization, xs: np.ndarray) -> tuple[Discretization, np.ndarray, float]:
    lo, hi = disc.cutpoints[0], disc.cutpoints[-1]
    scale = hi - lo
    cps = tuple((c - lo) / scale for c in disc.cutpoints)
    norm_disc = Discretization(disc.method, cps, disc.auto_stopped)
    return norm_disc, (xs - lo) / scale, scale


def _affine_image(p: Polynomial, lo: float, scale: float) -> Polynomial:
    """q(u) = p((u - lo) / scale) / scale, composed in extended precision so
    the wide-support monomial coefficients round only once at the end."""
    cs = np.array(p.coefficients, dtype=np.longdouble)
    alpha = np.longdouble(1.0) / np.longdouble(scale)
    beta = -np.longdouble(lo) / np.longdouble(scale)
    acc = cs[-1:].copy()
    for c in cs[-2::-1]:
        nxt = np.zeros(len(acc) + 1, dtype=np.longdouble)
        nxt[1:] += acc * alpha
        nxt[:-1] += acc * beta
        nxt[0] += c
        acc = nxt
    acc /= np.longdouble(scale)
    return Polynomial(tuple(float(v) for v in acc))


def _denormalize(model: DensityModel, disc: Discretization, scale: float) -> DensityModel:
    """Map a model fitted on [0,1] back to the original attribute units."""
    lo = disc.cutpoints[0]
    pieces = [_affine_image(p, lo, scale) for p in model.density.pieces]
    density = _as_density(disc.cutpoints, pieces)
    shift = model.n * math.log(scale)
    return DensityModel(
        discretization=disc,
        degree=model.degree,
        coefficients=tuple(c / scale for c in model.coefficients),
        weights=model.weights,
        density=density,
        log_likelihood=model.log_likelihood - shift,
        bic=model.bic - shift,
        n=model.n,
    )


def _fit_config(disc: Discretization, degree: int, xs: np.ndarray) -> DensityModel:
    norm_disc, norm_xs, scale = _normalize(disc, xs)
    model = fit_coefficients(build_basis(norm_disc, degree), norm_xs)
    return _denormalize(model, disc, scale)


def build_pp_structure(
    data: Sequence[float], max_size: int = 40, max_order: int = 8
) -> DensityModel:
    """Grid search over bins (2..max_size), binning method and degree
    (1..max_order), returning the model with the best BIC.

    Ties keep the first configuration in loop order (bins outer, method
    middle, degree inner).  The returned model's ``pct_ef`` records, over
    grid cells where both methods were feasible, how often equal-frequency
    beat equal-width.
    """
    xs = np.sort(np.asarray(data, dtype=float))
    if xs.size < 2 or np.any(np.isnan(xs)):
        raise DegenerateInputError("need at least two numeric observations")
    if xs[0] == xs[-1]:
        raise DegenerateInputError("all observations are equal")

    best: DensityModel | None = None
    cache: dict[tuple, DensityModel] = {}
    ef_wins = 0
    ef_cells = 0
    for l in range(2, max_size + 1):
        for method in (Method.EQUAL_WIDTH, Method.EQUAL_FREQUENCY):
            try:
                if method is Method.EQUAL_WIDTH:
                    disc = equal_width(xs, l)
                else:
                    disc = equal_frequency(xs, l)
            except DegenerateInputError:
                continue
            for degree in range(1, max_order + 1):
                key = (disc.cutpoints, degree)
                model = cache.get(key)
                if model is None:
                    try:
                        model = _fit_config(disc, degree, xs)
                    except ContractError:
                        # the configuration's monomial representation cannot
                        # honour the density tolerances; drop it from the grid
                        continue
                    cache[key] = model
                elif model.discretization.method is not method:
                    model = dataclasses.replace(
                        model,
                        discretization=Discretization(method, disc.cutpoints),
                    )
                if method is Method.EQUAL_FREQUENCY:
                    ew = cache.get((equal_width(xs, l).cutpoints, degree))
                    if ew is not None:
                        ef_cells += 1
                        if model.bic > ew.bic:
                            ef_wins += 1
                if best is None or model.bic > best.bic:
                    best = model
    if best is None:
        raise DegenerateInputError("no feasible configuration in the search grid")
    pct_ef = ef_wins / ef_cells if ef_cells else None
    return dataclasses.replace(best, pct_ef=pct_ef)


def fit_supervised(
    data: Sequence[tuple[float, object]], l: int, max_order: int = 8
) -> DensityModel:
    """Weight fitting over supervised entropy-distance cutpoints; BIC picks
    the degree only.  Falls back to the uniform density when the splitter
    finds a single bin (no class boundaries to exploit)."""
    pairs = sorted(((float(v), lab) for v, lab in data), key=lambda p: p[0])
    disc = entropy_distance(pairs, l)
    xs = np.asarray([v for v, _ in pairs])
    if disc.bins == 1:
        return fit_coefficients(constant_basis(disc), xs)
    best: DensityModel | None = None
    for degree in range(1, max_order + 1):
        try:
            model = _fit_config(disc, degree, xs)
        except ContractError:
            continue
        if best is None or model.bic > best.bic:
            best = model
    if best is None:
        raise DegenerateInputError("no representable degree for the supervised cutpoints")
    return best
