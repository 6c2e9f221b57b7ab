"""Shared test oracles: quadrature, symbolic spline recursion, analytic
mixtures, random piecewise-linear densities, and a vectorised Monte-Carlo
evaluator that checks the engine by sampling values and coins."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from pplp.polynomials import PiecewisePolynomial, Polynomial
from pplp.program import parse


def quad_poly(coeffs, a, b, **kw):
    """Adaptive-quadrature integral of a monomial-basis polynomial."""
    val, _ = quad(np.polynomial.polynomial.Polynomial(coeffs), a, b, **kw)
    return val


def quad_piecewise(pp: PiecewisePolynomial, a, b) -> float:
    lo, hi = pp.support
    a, b = max(a, lo), min(b, hi)
    if a >= b:
        return 0.0
    total = 0.0
    for i, piece in enumerate(pp.pieces):
        plo, phi = pp.piece_interval(i)
        s, e = max(a, plo), min(b, phi)
        if s < e:
            total += quad_poly(piece.coefficients, s, e)
    return total


# --- symbolic Cox-de Boor recursion (independent of the package's
# Chebyshev-interpolation construction) ---------------------------------------


def symbolic_bspline_pieces(cutpoints, degree):
    """Per-basis, per-span monomial polynomials built by running the
    B-spline recursion on exact polynomial arithmetic."""
    cps = list(cutpoints)
    knots = [cps[0]] * (degree + 1) + cps[1:-1] + [cps[-1]] * (degree + 1)
    spans = list(zip(cps, cps[1:]))

    def zero_layer():
        return [[Polynomial((0.0,)) for _ in spans] for _ in range(len(knots) - 1)]

    layer = zero_layer()
    for i in range(len(knots) - 1):
        for j, (lo, hi) in enumerate(spans):
            if knots[i] <= lo and hi <= knots[i + 1]:
                layer[i][j] = Polynomial((1.0,))
    for k in range(1, degree + 1):
        nxt = [[Polynomial((0.0,)) for _ in spans] for _ in range(len(knots) - k - 1)]
        for i in range(len(knots) - k - 1):
            for j in range(len(spans)):
                acc = Polynomial((0.0,))
                if knots[i + k] != knots[i]:
                    d = knots[i + k] - knots[i]
                    acc = acc + Polynomial((-knots[i] / d, 1.0 / d)) * layer[i][j]
                if knots[i + k + 1] != knots[i + 1]:
                    d = knots[i + k + 1] - knots[i + 1]
                    acc = acc + Polynomial((knots[i + k + 1] / d, -1.0 / d)) * layer[i + 1][j]
                nxt[i][j] = acc
        layer = nxt
    return layer  # layer[i][j]: basis i restricted to span j


# --- analytic mixtures --------------------------------------------------------


@dataclass(frozen=True)
class GaussianMixture:
    weights: tuple[float, ...]
    means: tuple[float, ...]
    sigmas: tuple[float, ...]

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        total = np.zeros_like(x)
        for w, mu, sd in zip(self.weights, self.means, self.sigmas):
            total += w * np.exp(-0.5 * ((x - mu) / sd) ** 2) / (sd * math.sqrt(2 * math.pi))
        return total

    def sample(self, n, rng):
        comps = rng.choice(len(self.weights), size=n, p=self.weights)
        return rng.normal(np.asarray(self.means)[comps], np.asarray(self.sigmas)[comps])


def integrated_squared_error(pp: PiecewisePolynomial, pdf) -> float:
    """ISE of a fitted density against an analytic pdf, by adaptive
    quadrature per piece plus the pdf's mass outside the support."""
    lo, hi = pp.support
    total = 0.0
    for i, piece in enumerate(pp.pieces):
        a, b = pp.piece_interval(i)
        poly = np.polynomial.polynomial.Polynomial(piece.coefficients)
        total += quad(lambda x: (poly(x) - pdf(x)) ** 2, a, b, limit=200)[0]
    total += quad(lambda x: pdf(x) ** 2, -np.inf, lo, limit=200)[0]
    total += quad(lambda x: pdf(x) ** 2, hi, np.inf, limit=200)[0]
    return total


# --- random piecewise-linear densities (hand-built, no package machinery) ----


@dataclass(frozen=True)
class LinearDensity:
    cutpoints: tuple[float, ...]
    values: tuple[float, ...]  # density values at the cutpoints

    @property
    def peak(self) -> float:
        return max(self.values)

    def piece_coeffs(self, i) -> tuple[float, float]:
        x0, x1 = self.cutpoints[i], self.cutpoints[i + 1]
        y0, y1 = self.values[i], self.values[i + 1]
        slope = (y1 - y0) / (x1 - x0)
        return y0 - slope * x0, slope

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        for i in range(len(self.cutpoints) - 1):
            b0, b1 = self.piece_coeffs(i)
            lo, hi = self.cutpoints[i], self.cutpoints[i + 1]
            mask = (x >= lo) & (x <= hi)
            out[mask] = b0 + b1 * x[mask]
        return out

    def sample(self, n, rng):
        lo, hi = self.cutpoints[0], self.cutpoints[-1]
        out = np.empty(0)
        while out.size < n:
            xs = rng.uniform(lo, hi, 4 * n)
            us = rng.uniform(0.0, self.peak, 4 * n)
            out = np.concatenate([out, xs[us <= self.pdf(xs)]])
        return out[:n]

    def weight_text(self, i, var="V") -> str:
        b0, b1 = self.piece_coeffs(i)
        sign = "- " if b1 < 0 else "+ "
        return f"{b0!r} {sign}{abs(b1)!r}*{var}"


def random_linear_density(rng, max_pieces=3, lo=-2.0, hi=3.0) -> LinearDensity:
    n_pieces = int(rng.integers(1, max_pieces + 1))
    cps = np.sort(rng.uniform(lo, hi, n_pieces + 1))
    while np.diff(cps).min() < 0.05:
        cps = np.sort(rng.uniform(lo, hi, n_pieces + 1))
    vals = rng.uniform(0.1, 1.0, n_pieces + 1)
    mass = sum(
        (vals[i] + vals[i + 1]) / 2.0 * (cps[i + 1] - cps[i]) for i in range(n_pieces)
    )
    return LinearDensity(tuple(float(c) for c in cps), tuple(float(v / mass) for v in vals))


# --- random hybrid programs with a Monte-Carlo evaluator ----------------------


@dataclass
class RandomProgram:
    facts: list  # (name, probability)
    attributes: dict  # name -> LinearDensity
    clauses: list  # (head, [literal]); literal: ("fact"|"derived", name, neg)
    #                                         or ("interval", attr, lo, hi, neg)
    query: str
    #: the one comparison interval per attribute reused by interval literals
    pooled: dict | None = None

    def text(self) -> str:
        lines = [f"{p!r} :: {name}." for name, p in self.facts]
        for attr, dens in self.attributes.items():
            for i in range(len(dens.cutpoints) - 1):
                lo, hi = dens.cutpoints[i], dens.cutpoints[i + 1]
                lines.append(f"{dens.weight_text(i)} :: {attr}_p{i + 1}(V).")
                lines.append(
                    f"{attr}_p{i + 1}(V) :- {attr}(V), ininterval(V, {lo!r}, {hi!r})."
                )
        for head, body in self.clauses:
            parts = []
            used_attrs = []
            for lit in body:
                if lit[0] == "interval":
                    _, attr, lo, hi, neg = lit
                    if attr not in used_attrs:
                        used_attrs.append(attr)
                        parts.append(f"{attr}(V_{attr})")
                    parts.append(("\\+ " if neg else "") + f"ininterval(V_{attr}, {lo!r}, {hi!r})")
                else:
                    _, name, neg = lit
                    parts.append(("\\+ " if neg else "") + name)
            lines.append(f"{head} :- {', '.join(parts)}.")
        lines.append(f"query({self.query}).")
        return "\n".join(lines) + "\n"

    def parse(self):
        return parse(self.text())

    def mc_truth(self, n_samples: int, rng) -> dict:
        """Sample coins and attribute values, then evaluate the derived
        predicates numerically in definition order."""
        truth = {}
        for name, p in self.facts:
            truth[name] = rng.random(n_samples) < p
        values = {a: d.sample(n_samples, rng) for a, d in self.attributes.items()}
        for head, body in self.clauses:
            conj = np.ones(n_samples, dtype=bool)
            for lit in body:
                if lit[0] == "interval":
                    _, attr, lo, hi, neg = lit
                    col = (values[attr] >= lo) & (values[attr] <= hi)
                else:
                    col = truth[lit[1]]
                conj &= ~col if lit[-1] else col
            truth[head] = truth.get(head, np.zeros(n_samples, dtype=bool)) | conj
        return truth

    def mc_estimate(self, query: str, n_samples: int, rng) -> float:
        return float(self.mc_truth(n_samples, rng)[query].mean())


def random_program(rng, max_facts=6, max_attrs=2, max_pieces=2) -> RandomProgram:
    """Random stratified program whose attributes keep at most four cells:
    densities of one or two linear pieces, and one distinct comparison
    interval per attribute reused by every literal that mentions it."""
    n_facts = int(rng.integers(1, max_facts + 1))
    facts = [(f"f{i}", float(rng.uniform(0.1, 0.9))) for i in range(n_facts)]
    n_attrs = int(rng.integers(1, max_attrs + 1))
    attributes = {
        f"att{i}": random_linear_density(rng, max_pieces=max_pieces)
        for i in range(n_attrs)
    }
    pooled = {}
    for attr, dens in attributes.items():
        lo, hi = dens.cutpoints[0], dens.cutpoints[-1]
        a, b = np.sort(rng.uniform(lo - 0.2, hi + 0.2, 2))
        pooled[attr] = (float(a), float(b))

    clauses = []
    derived = []
    for d in range(int(rng.integers(1, 4))):
        head = f"d{d}"
        n_rules = int(rng.integers(1, 3))
        for _ in range(n_rules):
            body = []
            for _ in range(int(rng.integers(1, 4))):
                kind = rng.random()
                neg = bool(rng.random() < 0.3)
                if kind < 0.4 or not derived:
                    name, _ = facts[int(rng.integers(0, len(facts)))]
                    body.append(("fact", name, neg))
                elif kind < 0.65:
                    body.append(("derived", derived[int(rng.integers(0, len(derived)))], neg))
                else:
                    attr = f"att{int(rng.integers(0, n_attrs))}"
                    lo, hi = pooled[attr]
                    body.append(("interval", attr, lo, hi, neg))
            clauses.append((head, body))
        derived.append(head)
    return RandomProgram(facts, attributes, clauses, derived[-1], pooled)


def mc_tolerance(p_exact: float, n_samples: int, k: float = 3.0) -> float:
    se = math.sqrt(max(p_exact * (1.0 - p_exact), 0.0) / n_samples)
    return k * max(se, 1.0 / n_samples)
