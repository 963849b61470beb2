"""Exact reconstruction of tau(i, j) as a polynomial in b, c and g.

The ansatz is ``sum q[eb, ec, eg] * b**eb * c**ec * g**eg`` with
``eb <= deg_b_bound``, ``ec <= deg_c_bound`` and ``0 <= eg <= deg_g_bound + 1``:
a ``g**0`` slice and one guard slice above the expected g-degree are always
included, so that their vanishing is measured rather than assumed.

Sample points are grouped into classes of constant ``g``.  With ``d = gcd(i, j)``,
``(i', j') = (i/d, j/d)`` and primes ``p, q`` larger than ``max(i, j)``, every point
``(b, c) = (gamma*p, gamma*q)`` with ``p != q`` (or ``p = 1`` / ``q = 1``) has
``g = gamma``.  Inside a class the points form a tensor grid, so the linear
system factors into small Vandermonde solves: first in b, then in c, then in
g across classes.  Extra nodes, one extra class and an independent holdout
block on small (b, c) check the result.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Mapping

from .engine import TauTable, g_factor
from .ring import Poly3, SolveError, poly_eval, solve_exact

Point = tuple[int, int]


class MissingDataError(KeyError):
    pass


class UnvalidatedFit(ValueError):
    pass


@dataclass
class FitSpec:
    i: int
    j: int
    deg_b_bound: int
    deg_c_bound: int
    deg_g_bound: int
    grid: list[Point]
    holdout: list[Point]
    g: dict[Point, int] = field(default_factory=dict)
    # g value -> (b nodes, c nodes); the first `slices` classes determine the fit
    classes: dict[int, tuple[list[int], list[int]]] = field(default_factory=dict)

    @property
    def slices(self) -> int:
        return self.deg_g_bound + 2

    @property
    def n_coefficients(self) -> int:
        return (self.deg_b_bound + 1) * (self.deg_c_bound + 1) * self.slices

    @property
    def degree(self) -> int:
        return self.i + self.j


@dataclass
class FitResult:
    i: int
    j: int
    poly: Poly3
    validated: bool
    achieved_degrees: tuple[int, int, int]
    samples_used: int
    notes: str = ""

    def g_slice(self, k: int) -> Poly3:
        return tau_g_coeff(self, k)


def _primes_above(n: int, count: int) -> list[int]:
    out = []
    k = n + 1
    while len(out) < count:
        if k > 1 and all(k % p for p in range(2, math.isqrt(k) + 1)):
            out.append(k)
        k += 1
    return out


def node_sequences(prime_floor: int, length: int) -> tuple[list[int], list[int]]:
    """Two disjoint multiplier sequences ``[1, p1, p3, ...]`` and ``[1, p2, p4, ...]``."""
    primes = _primes_above(prime_floor, 2 * length)
    return [1] + primes[0::2][: length - 1], [1] + primes[1::2][: length - 1]


def design_grid(
    i: int,
    j: int,
    bounds: tuple[int, int, int] | None = None,
    *,
    prime_floor: int | None = None,
    extra_nodes: int = 1,
    extra_classes: int = 1,
    holdout_box: int = 6,
    holdout: int = 10,
    rectangle: tuple[int, int, int, int] | None = None,
) -> FitSpec:
    """Sample design for the ansatz of tau(i, j).

    By default the grid is the tensor design described in the module
    docstring and the holdout is every pair of ``[1, holdout_box]**2`` not in
    the grid (enlarged until it has ``holdout`` pairs).  With
    ``rectangle=(bmin, bmax, cmin, cmax)`` the grid is that block instead and
    the holdout is the next ``holdout`` pairs along the diagonal beyond it.
    """
    if i < 1 or j < 1:
        raise ValueError("fits are for interior entries i, j >= 1")
    db, dc, dg = bounds if bounds is not None else (j - 1, i - 1, math.gcd(i, j))
    spec = FitSpec(i, j, db, dc, dg, [], [])
    if rectangle is not None:
        bmin, bmax, cmin, cmax = rectangle
        if not (1 <= bmin <= bmax and 1 <= cmin <= cmax):
            raise ValueError(f"bad grid block {rectangle}")
        spec.grid = [(b, c) for b in range(bmin, bmax + 1) for c in range(cmin, cmax + 1)]
        taken = set(spec.grid)
        k = 1
        while len(spec.holdout) < holdout:
            for pt in ((bmax + k, cmax + k), (bmax + k, cmin), (bmin, cmax + k)):
                if pt not in taken and len(spec.holdout) < holdout:
                    spec.holdout.append(pt)
                    taken.add(pt)
            k += 1
    else:
        floor = max(i, j) if prime_floor is None else max(prime_floor, i, j)
        nb, nc = db + 1 + extra_nodes, dc + 1 + extra_nodes
        P, Q = node_sequences(floor, max(nb, nc))
        gamma = 0
        # extra classes validate the g-interpolation; keep at least 1.5 samples per unknown
        while gamma < spec.slices + extra_classes or 2 * len(spec.grid) < 3 * spec.n_coefficients:
            gamma += 1
            bs = [gamma * p for p in P[:nb]]
            cs = [gamma * q for q in Q[:nc]]
            spec.classes[gamma] = (bs, cs)
            spec.grid.extend((b, c) for b in bs for c in cs)
        taken = set(spec.grid)
        box = holdout_box
        while True:
            spec.holdout = [(b, c) for b in range(1, box + 1) for c in range(1, box + 1) if (b, c) not in taken]
            if len(spec.holdout) >= holdout:
                break
            box += 1
    for pt in spec.grid + spec.holdout:
        spec.g[pt] = g_factor(i, j, *pt)
    for gamma, (bs, cs) in spec.classes.items():
        for b in bs:
            for c in cs:
                if spec.g[(b, c)] != gamma:
                    raise AssertionError(f"grid point ({b},{c}) has g={spec.g[(b, c)]}, expected {gamma}")
    if len(spec.grid) < spec.n_coefficients:
        raise ValueError(f"grid of {len(spec.grid)} pairs is smaller than the {spec.n_coefficients}-term ansatz")
    return spec


@lru_cache(maxsize=512)
def _vandermonde_inverse(nodes: tuple[int, ...]) -> tuple[tuple[Fraction, ...], ...]:
    n = len(nodes)
    V = [[Fraction(x) ** k for k in range(n)] for x in nodes]
    cols = [solve_exact(V, [1 if r == s else 0 for r in range(n)]) for s in range(n)]
    return tuple(tuple(Fraction(cols[s][r]) for s in range(n)) for r in range(n))


def interpolate(nodes: list[int], values: list) -> list[Fraction]:
    """Monomial coefficients of the degree < len(nodes) interpolant."""
    inv = _vandermonde_inverse(tuple(nodes))
    return [sum((row[s] * values[s] for s in range(len(nodes)) if values[s]), Fraction(0)) for row in inv]


def _value(tables: Mapping[Point, TauTable], spec: FitSpec, pt: Point):
    table = tables.get(pt)
    if table is None:
        raise MissingDataError(f"no table for (b,c)={pt}")
    if table.D < spec.degree:
        raise MissingDataError(f"table for (b,c)={pt} stops at degree {table.D} < {spec.degree}")
    return table[spec.i, spec.j]


def _monomials(spec: FitSpec) -> list[tuple[int, int, int]]:
    return [
        (eb, ec, eg)
        for eg in range(spec.slices)
        for eb in range(spec.deg_b_bound + 1)
        for ec in range(spec.deg_c_bound + 1)
    ]


def _solve_dense(spec: FitSpec, tables: Mapping[Point, TauTable]) -> Poly3:
    monomials = _monomials(spec)
    A, y = [], []
    for b, c in spec.grid:
        g = spec.g[(b, c)]
        A.append([b**eb * c**ec * g**eg for eb, ec, eg in monomials])
        y.append(_value(tables, spec, (b, c)))
    return Poly3(dict(zip(monomials, solve_exact(A, y))))


def _solve_structured(spec: FitSpec, tables: Mapping[Point, TauTable]) -> Poly3:
    db, dc = spec.deg_b_bound, spec.deg_c_bound
    gammas = sorted(spec.classes)[: spec.slices]
    per_class: list[dict[tuple[int, int], Fraction]] = []
    for gamma in gammas:
        bs, cs = spec.classes[gamma]
        bs, cs = bs[: db + 1], cs[: dc + 1]
        # coefficients in b for every c node, then interpolate each in c
        rows = [interpolate(bs, [_value(tables, spec, (b, c)) for b in bs]) for c in cs]
        q: dict[tuple[int, int], Fraction] = {}
        for eb in range(db + 1):
            for ec, v in enumerate(interpolate(cs, [rows[k][eb] for k in range(len(cs))])):
                if v:
                    q[(eb, ec)] = v
        per_class.append(q)
    terms: dict[tuple[int, int, int], Fraction] = {}
    keys = set().union(*per_class) if per_class else set()
    for eb, ec in keys:
        vals = [q.get((eb, ec), 0) for q in per_class]
        for eg, v in enumerate(interpolate(gammas, vals)):
            if v:
                terms[(eb, ec, eg)] = v
    return Poly3(terms)


def _mismatches(spec: FitSpec, poly: Poly3, tables: Mapping[Point, TauTable]) -> list[tuple[Point, object, object]]:
    bad = []
    for pt in spec.grid + spec.holdout:
        want = _value(tables, spec, pt)
        got = poly_eval(poly, pt[0], pt[1], spec.g[pt])
        if got != want:
            bad.append((pt, want, got))
    return bad


def fit_tau_poly(spec: FitSpec, tables: Mapping[Point, TauTable]) -> FitResult:
    """Solve the ansatz on the grid and validate it on grid and holdout.

    A singular or inconsistent dense system gives an unvalidated result
    whose notes carry the solver's diagnosis.
    """
    notes = f"bounds b<={spec.deg_b_bound} c<={spec.deg_c_bound} g<={spec.deg_g_bound}+1"
    samples = len(spec.grid) + len(spec.holdout)
    try:
        poly = _solve_structured(spec, tables) if spec.classes else _solve_dense(spec, tables)
    except SolveError as exc:
        return FitResult(spec.i, spec.j, Poly3(), False, (-1, -1, -1), samples, f"{notes}; {exc}")
    bad = _mismatches(spec, poly, tables)
    degs = (poly.degree("b"), poly.degree("c"), poly.degree("g"))
    if bad:
        pt, want, got = bad[0]
        notes += f"; {len(bad)} samples disagree, first at (b,c)={pt}: engine {want}, fit {got}"
    return FitResult(spec.i, spec.j, poly, not bad, degs, samples, notes)


def _attempt(spec: FitSpec, store, degree: int | None) -> FitResult:
    D = max(spec.degree, degree or 0)
    points = spec.grid + spec.holdout
    store.prefetch(points, D)
    return fit_tau_poly(spec, {pt: store.get(pt[0], pt[1], D) for pt in points})


def fit_tau(
    i: int,
    j: int,
    store,
    bounds: tuple[int, int, int] | None = None,
    *,
    degree: int | None = None,
    **grid_kw,
) -> FitResult:
    """Design, fetch tables from ``store`` and fit.

    Retry policy: a rectangular grid that fails is doubled in each direction
    and retried; if that also fails (or the tensor design fails) the
    degree bounds are raised by one each and the fit runs one final time.
    ``degree`` asks the store for tables at least that deep so that fits of
    different size share engine runs.
    """
    spec = design_grid(i, j, bounds, **grid_kw)
    result = _attempt(spec, store, degree)
    if result.validated:
        return result
    history = [result.notes]
    rect = grid_kw.get("rectangle")
    if rect is not None:
        bmin, bmax, cmin, cmax = rect
        wider = dict(grid_kw, rectangle=(bmin, 2 * bmax, cmin, 2 * cmax))
        result = _attempt(design_grid(i, j, bounds, **wider), store, degree)
        if result.validated:
            result.notes = f"enlarged grid after: {history[0]}; {result.notes}"
            return result
        history.append(result.notes)
        grid_kw = wider
    raised = (spec.deg_b_bound + 1, spec.deg_c_bound + 1, spec.deg_g_bound + 1)
    try:
        spec2 = design_grid(i, j, raised, **grid_kw)
    except ValueError as exc:
        result.notes = "; ".join(history + [f"raised bounds impossible: {exc}"])
        return result
    result = _attempt(spec2, store, degree)
    result.notes = "failed: " + " | ".join(history) + f" | raised bounds: {result.notes}"
    return result


def fit_from_samples(
    i: int, j: int, samples: Mapping[Point, object], bounds: tuple[int, int, int] | None = None
) -> Poly3:
    """Unstructured route: one dense exact solve over arbitrary samples."""
    db, dc, dg = bounds if bounds is not None else (j - 1, i - 1, math.gcd(i, j))
    monomials = _monomials(FitSpec(i, j, db, dc, dg, [], []))
    pts = sorted(samples)
    A = []
    for b, c in pts:
        g = g_factor(i, j, b, c)
        A.append([b**eb * c**ec * g**eg for eb, ec, eg in monomials])
    x = solve_exact(A, [samples[p] for p in pts])
    return Poly3(dict(zip(monomials, x)))


def tau_g_coeff(result: FitResult, k: int) -> Poly3:
    """Coefficient of ``g**k`` as a polynomial in b and c."""
    if not result.validated:
        raise UnvalidatedFit(f"fit for tau({result.i},{result.j}) is not validated")
    return Poly3({(eb, ec, 0): v for (eb, ec, eg), v in result.poly.terms.items() if eg == k})


__all__ = [
    "FitSpec",
    "FitResult",
    "MissingDataError",
    "SolveError",
    "UnvalidatedFit",
    "design_grid",
    "fit_tau_poly",
    "fit_tau",
    "fit_from_samples",
    "tau_g_coeff",
]
