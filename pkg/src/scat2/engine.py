"""Degree-by-degree construction of the rank-2 cluster scattering diagram.

Tables use the convention of the published coefficient tables, where the
initial walls act on ``zeta1, zeta2`` by

    zeta2 -> zeta2 * (1 + zeta1)**(-s*c),   zeta1 -> zeta1 * (1 + zeta2)**(s*b)

for crossing sign ``s``.  In lattice terms: ``zeta1 = z2**b``, ``zeta2 = z1**(-c)``
and the sublattice ``N°`` is spanned by ``sb*e1`` and ``sc*e2`` with
``(sb, sc) = (c, b)``.  Reading the exchange matrix ``[[0, c], [-b, 0]]`` the
other way round produces the transposed tables.

A wall normal to the primitive vector ``(i, j)`` carries
``f = 1 + sum_k a_k u**k`` with ``u = zeta1**i * zeta2**j``.  Crossing it with
sign ``s`` sends

    z1 -> z1 * f**(s*t*i/sb),   z2 -> z2 * f**(s*t*j/sc),

where ``t = t_factor(i, j, sb, sc)`` rescales ``(i, j)`` into ``N°``.  On the
zeta side a monomial ``zeta1**p zeta2**q`` picks up ``f**(s*t*(j*p - i*q))``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cmp_to_key

from .ring import Scalar, exact_div
from .series import LoopTransport, Trunc2Series, subst_scale, unit_pow, univariate_pow

log = logging.getLogger(__name__)

Direction = tuple[int, int]

RAY_SIGN = -1


class InconsistencyError(RuntimeError):
    """The consistency equations could not be satisfied at some degree."""


class CrossDefectMismatch(InconsistencyError):
    """The z1- and z2-derived values of a coefficient disagree."""


def g_factor(i: int, j: int, b: int, c: int) -> int:
    return math.gcd(i * b, j * c) // math.gcd(i, j)


def t_factor(i: int, j: int, b: int, c: int) -> int:
    """Least ``t >= 1`` with ``b | t*i`` and ``c | t*j``."""
    if math.gcd(i, j) != 1:
        raise ValueError(f"direction ({i},{j}) is not primitive")
    return math.lcm(b // math.gcd(i, b), c // math.gcd(j, c))


def _slope_cmp(x: Direction, y: Direction) -> int:
    # strictly decreasing i/j
    d = x[0] * y[1] - y[0] * x[1]
    return -1 if d > 0 else (1 if d < 0 else 0)


def interior_directions(D: int) -> list[Direction]:
    dirs = [(i, s - i) for s in range(2, D + 1) for i in range(1, s) if math.gcd(i, s - i) == 1]
    return sorted(dirs, key=cmp_to_key(_slope_cmp))


def crossing_schedule(D: int) -> list[tuple[Direction, int]]:
    """Counterclockwise loop from 45 degrees in the (f1, f2)-plane.

    Sign +1 means the travel direction disagrees with the wall normal.
    """
    s = -RAY_SIGN
    head = [((1, 0), s), ((0, 1), s), ((1, 0), -s)]
    return head + [(d, -s) for d in interior_directions(D)] + [((0, 1), -s)]


@dataclass
class Wall:
    dir: Direction
    fn: list = field(default_factory=list)  # fn[k-1] multiplies u**k

    def coefficients(self, K: int) -> list[Scalar]:
        """``[1, a_1, ..., a_K]`` padded with zeros."""
        out = [1] + self.fn[:K]
        return out + [0] * (K + 1 - len(out))

    def is_trivial(self) -> bool:
        return not any(self.fn)


@dataclass
class Diagram:
    b: int
    c: int
    D: int
    walls: dict[Direction, Wall] = field(default_factory=dict)

    @property
    def scales(self) -> tuple[int, int]:
        """Multiples of e1, e2 spanning the sublattice (see module docstring)."""
        return self.c, self.b

    @classmethod
    def initial(cls, b: int, c: int, D: int) -> Diagram:
        return cls(b, c, D, {(1, 0): Wall((1, 0), [1]), (0, 1): Wall((0, 1), [1])})

    def set_coefficient(self, p: int, q: int, value: Scalar) -> None:
        if p < 1 or q < 1:
            raise ValueError("initial walls are fixed")
        k = math.gcd(p, q)
        d = (p // k, q // k)
        wall = self.walls.setdefault(d, Wall(d))
        if len(wall.fn) < k:
            wall.fn.extend([0] * (k - len(wall.fn)))
        wall.fn[k - 1] = value

    def coefficient(self, p: int, q: int) -> Scalar:
        k = math.gcd(p, q)
        wall = self.walls.get((p // k, q // k))
        if wall is None or len(wall.fn) < k:
            return 0
        return wall.fn[k - 1]


@dataclass
class TauTable:
    b: int
    c: int
    D: int
    values: dict[tuple[int, int], Scalar] = field(default_factory=dict)
    cross_checks: int = 0  # number of (p, q) where the z1/z2 values were compared

    @classmethod
    def axes(cls, b: int, c: int, D: int) -> TauTable:
        # tau(k, 0) = tau(0, k) = 0 for k >= 2; only nonzero entries are stored
        vals: dict[tuple[int, int], Scalar] = {(0, 0): 1}
        if D >= 1:
            vals[(1, 0)] = vals[(0, 1)] = 1
        return cls(b, c, D, vals)

    def __getitem__(self, key: tuple[int, int]) -> Scalar:
        i, j = key
        if i < 0 or j < 0 or i + j > self.D:
            raise KeyError(f"tau({i},{j}) is outside the table (D={self.D})")
        return self.values.get((i, j), 0)

    def entries(self) -> list[tuple[int, int, Scalar]]:
        """Nonzero entries sorted by (i + j, i)."""
        return [(i, j, v) for (i, j), v in sorted(self.values.items(), key=lambda kv: (sum(kv[0]), kv[0][0]))]

    def __eq__(self, other) -> bool:
        if not isinstance(other, TauTable):
            return NotImplemented
        return (self.b, self.c, self.D, self.values) == (other.b, other.c, other.D, other.values)


@dataclass
class DefectReport:
    degree: int
    eps1: dict[tuple[int, int], Scalar]
    eps2: dict[tuple[int, int], Scalar]

    def is_clean(self) -> bool:
        return not self.eps1 and not self.eps2


# -- transport -----------------------------------------------------------

def _cross(terms: dict, D: int, i: int, j: int, f: list, sigma: int, t: int, alpha: int, cache: dict) -> dict:
    """Multiply each ``zeta^(p,q)`` term by ``f**(sigma*t*(j*p - i*q) + alpha)``."""
    step = i + j
    out: dict = {}
    get = out.get
    for (p, q), v in terms.items():
        K = (D - p - q) // step
        if K == 0:
            out[(p, q)] = get((p, q), 0) + v
            continue
        E = sigma * t * (j * p - i * q) + alpha
        pw = cache.get(E)
        if pw is None or len(pw) <= K:
            pw = cache[E] = univariate_pow(f, E, len(f) - 1)
        pp, qq = p, q
        for k in range(K + 1):
            w = pw[k]
            if w:
                key = (pp, qq)
                out[key] = get(key, 0) + v * w
            pp += i
            qq += j
    return {k: v for k, v in out.items() if v}


def transport(diagram: Diagram, cutoff: int | None = None) -> LoopTransport:
    """Path-ordered product around the origin, as generator multipliers."""
    D = diagram.D if cutoff is None else cutoff
    sb, sc = diagram.scales
    A: dict = {(0, 0): 1}
    Bm: dict = {(0, 0): 1}
    for (i, j), sigma in crossing_schedule(D):
        wall = diagram.walls.get((i, j))
        if wall is None or wall.is_trivial():
            continue
        K = D // (i + j)
        if K == 0:
            continue
        f = wall.coefficients(K)
        if not any(f[1:]):
            continue
        t = t_factor(i, j, sb, sc)
        cache: dict = {}
        A = _cross(A, D, i, j, f, sigma, t, sigma * t * i // sb, cache)
        Bm = _cross(Bm, D, i, j, f, sigma, t, sigma * t * j // sc, cache)
    return LoopTransport(Trunc2Series(D, A), Trunc2Series(D, Bm))


def transport_reference(diagram: Diagram, cutoff: int | None = None) -> LoopTransport:
    """Same product built only from generic series operations (slow; for tests)."""
    D = diagram.D if cutoff is None else cutoff
    sb, sc = diagram.scales
    A = Trunc2Series.one(D)
    Bm = Trunc2Series.one(D)
    for (i, j), sigma in crossing_schedule(D):
        wall = diagram.walls.get((i, j))
        if wall is None:
            continue
        F = Trunc2Series(D, {(k * i, k * j): v for k, v in enumerate(wall.coefficients(D // (i + j)))})
        t = t_factor(i, j, sb, sc)
        U = unit_pow(F, sigma * t * j)
        V = unit_pow(F, -sigma * t * i)
        A = subst_scale(A, U, V) * unit_pow(F, sigma * t * i // sb)
        Bm = subst_scale(Bm, U, V) * unit_pow(F, sigma * t * j // sc)
    return LoopTransport(A, Bm)


def _defects(T: LoopTransport, lo: int, hi: int) -> list[DefectReport]:
    reports = {d: DefectReport(d, {}, {}) for d in range(lo, hi + 1)}
    for series, slot in ((T.A, "eps1"), (T.B, "eps2")):
        for (p, q), v in series.terms.items():
            d = p + q
            if lo <= d <= hi:
                getattr(reports[d], slot)[(p, q)] = v
    return [reports[d] for d in range(lo, hi + 1)]


def verify_consistency(diagram: Diagram, cutoff: int | None = None) -> list[DefectReport]:
    """Defect of the loop product for every degree ``1..cutoff``."""
    D = diagram.D if cutoff is None else cutoff
    return _defects(transport(diagram, D), 1, D)


# -- solver --------------------------------------------------------------

def solve_degree(diagram: Diagram, d: int, table: TauTable, recheck: bool = True) -> tuple[Diagram, TauTable]:
    """Fix every ``tau(p, q)`` with ``p + q == d`` from the degree-d defect.

    The loop crosses each interior ray with sign -1, so a new coefficient
    ``x`` at ``(p, q)`` enters the z1 multiplier as ``-x*t*i/sb`` and the z2
    multiplier as ``-x*t*j/sc``.  Both readings must agree.
    """
    b, c = diagram.b, diagram.c
    sb, sc = diagram.scales
    T = transport(diagram, d)
    reports = _defects(T, 1, d)
    for rep in reports[:-1]:
        if not rep.is_clean():
            raise InconsistencyError(f"b={b} c={c}: nonzero defect at degree {rep.degree} < {d}")
    eps1, eps2 = reports[-1].eps1, reports[-1].eps2
    for axis in ((d, 0), (0, d)):
        if eps1.get(axis) or eps2.get(axis):
            raise InconsistencyError(f"b={b} c={c}: axis defect at {axis}")
    for p in range(1, d):
        q = d - p
        k = math.gcd(p, q)
        i, j = p // k, q // k
        t = t_factor(i, j, sb, sc)
        from_z1 = exact_div(-RAY_SIGN * eps1.get((p, q), 0) * sb, t * i)
        from_z2 = exact_div(-RAY_SIGN * eps2.get((p, q), 0) * sc, t * j)
        if from_z1 != from_z2:
            raise CrossDefectMismatch(
                f"b={b} c={c}: tau({p},{q}) is {from_z1} from z1 but {from_z2} from z2"
            )
        table.cross_checks += 1
        if isinstance(from_z1, Fraction):
            log.warning("non-integer coefficient tau^{%d,%d}(%d,%d) = %s", b, c, p, q, from_z1)
        if from_z1:
            diagram.set_coefficient(p, q, from_z1)
            table.values[(p, q)] = from_z1
        else:
            table.values.pop((p, q), None)
    if recheck:
        residue = _defects(transport(diagram, d), 1, d)
        bad = [r.degree for r in residue if not r.is_clean()]
        if bad:
            raise InconsistencyError(f"b={b} c={c}: defect remains at degrees {bad}")
    return diagram, table


def build_diagram(b: int, c: int, D: int) -> tuple[Diagram, TauTable]:
    for name, v in (("b", b), ("c", c), ("D", D)):
        if not isinstance(v, int) or v < 1:
            raise ValueError(f"{name} must be a positive integer, got {v!r}")
    diagram = Diagram.initial(b, c, D)
    table = TauTable.axes(b, c, D)
    # each degree's transport also re-verifies every lower degree
    for d in range(2, D + 1):
        solve_degree(diagram, d, table, recheck=(d == D))
    return diagram, table


def compute_csd(b: int, c: int, D: int) -> TauTable:
    return build_diagram(b, c, D)[1]


def diagram_from_table(table: TauTable) -> Diagram:
    diagram = Diagram.initial(table.b, table.c, table.D)
    for (p, q), v in table.values.items():
        if p >= 1 and q >= 1 and v:
            diagram.set_coefficient(p, q, v)
    return diagram
