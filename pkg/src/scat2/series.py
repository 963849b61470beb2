"""Sparse bivariate power series in (zeta1, zeta2), truncated at total degree D."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

from .ring import Scalar, normalize


class CutoffMismatch(ValueError):
    pass


class NonUnitSeries(ValueError):
    pass


class Trunc2Series:
    """``sum c[p,q] zeta1^p zeta2^q`` over ``p + q <= cutoff``.

    Coefficients are ``int`` or ``Fraction``; zeros are never stored.
    """

    __slots__ = ("cutoff", "_terms")

    def __init__(self, cutoff: int, terms: Mapping[tuple[int, int], Scalar] | None = None):
        if cutoff < 0:
            raise ValueError("cutoff must be nonnegative")
        self.cutoff = cutoff
        clean = {}
        for (p, q), v in (terms or {}).items():
            if p < 0 or q < 0:
                raise ValueError("negative exponent")
            if p + q <= cutoff and v:
                clean[(p, q)] = normalize(v)
        self._terms: dict[tuple[int, int], Scalar] = clean

    @classmethod
    def one(cls, cutoff: int) -> Trunc2Series:
        return cls(cutoff, {(0, 0): 1})

    @classmethod
    def _wrap(cls, cutoff: int, terms: dict) -> Trunc2Series:
        s = cls.__new__(cls)
        s.cutoff = cutoff
        s._terms = terms
        return s

    @property
    def terms(self) -> dict[tuple[int, int], Scalar]:
        return dict(self._terms)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Trunc2Series):
            return NotImplemented
        return self.cutoff == other.cutoff and self._terms == other._terms

    def __repr__(self) -> str:
        body = " + ".join(f"{v}*z1^{p}*z2^{q}" for (p, q), v in sorted(self._terms.items()))
        return f"Trunc2Series(D={self.cutoff}, {body or '0'})"

    def _check(self, other: Trunc2Series) -> None:
        if self.cutoff != other.cutoff:
            raise CutoffMismatch(f"cutoffs differ: {self.cutoff} vs {other.cutoff}")

    def __add__(self, other: Trunc2Series) -> Trunc2Series:
        self._check(other)
        out = dict(self._terms)
        for k, v in other._terms.items():
            s = out.get(k, 0) + v
            if s:
                out[k] = s
            else:
                out.pop(k, None)
        return Trunc2Series._wrap(self.cutoff, out)

    def __sub__(self, other: Trunc2Series) -> Trunc2Series:
        return self + other.scale(-1)

    def scale(self, x: Scalar) -> Trunc2Series:
        if not x:
            return Trunc2Series(self.cutoff)
        return Trunc2Series._wrap(self.cutoff, {k: normalize(v * x) for k, v in self._terms.items()})

    def __mul__(self, other: Trunc2Series) -> Trunc2Series:
        return series_mul(self, other)

    def constant(self) -> Scalar:
        return self._terms.get((0, 0), 0)

    def degree_part(self, d: int) -> dict[tuple[int, int], Scalar]:
        return {k: v for k, v in self._terms.items() if k[0] + k[1] == d}


def series_mul(S: Trunc2Series, T: Trunc2Series) -> Trunc2Series:
    S._check(T)
    D = S.cutoff
    out: dict[tuple[int, int], Scalar] = {}
    for (p1, q1), v1 in S._terms.items():
        room = D - p1 - q1
        for (p2, q2), v2 in T._terms.items():
            if p2 + q2 <= room:
                k = (p1 + p2, q1 + q2)
                out[k] = out.get(k, 0) + v1 * v2
    return Trunc2Series._wrap(D, {k: normalize(v) for k, v in out.items() if v})


def _inverse(S: Trunc2Series) -> Trunc2Series:
    # 1/(1 + X) = 1 - X + X^2 - ...; X has no constant term so X^(D+1) = 0
    X = S - Trunc2Series.one(S.cutoff)
    out = Trunc2Series.one(S.cutoff)
    power = Trunc2Series.one(S.cutoff)
    for n in range(1, S.cutoff + 1):
        power = series_mul(power, X)
        if not power._terms:
            break
        out = out + (power if n % 2 == 0 else power.scale(-1))
    return out


def unit_pow(S: Trunc2Series, e: int) -> Trunc2Series:
    """``S**e`` for a series with constant term 1 and any integer ``e``."""
    if S.constant() != 1:
        raise NonUnitSeries("unit_pow needs constant term 1")
    base = _inverse(S) if e < 0 else S
    n = abs(e)
    result = Trunc2Series.one(S.cutoff)
    while n:
        if n & 1:
            result = series_mul(result, base)
        n >>= 1
        if n:
            base = series_mul(base, base)
    return result


def subst_scale(S: Trunc2Series, U: Trunc2Series, V: Trunc2Series) -> Trunc2Series:
    """``S(zeta1 * U, zeta2 * V)`` truncated at the common cutoff."""
    S._check(U)
    S._check(V)
    if U.constant() != 1 or V.constant() != 1:
        raise NonUnitSeries("subst_scale needs unit multipliers")
    D = S.cutoff
    upow = [Trunc2Series.one(D)]
    vpow = [Trunc2Series.one(D)]
    out = Trunc2Series(D)
    for (p, q), v in S._terms.items():
        while len(upow) <= p:
            upow.append(series_mul(upow[-1], U))
        while len(vpow) <= q:
            vpow.append(series_mul(vpow[-1], V))
        factor = series_mul(upow[p], vpow[q])
        shifted = {(p + a, q + b): w * v for (a, b), w in factor._terms.items()}
        out = out + Trunc2Series(D, shifted)
    return out


def series_coeff(S: Trunc2Series, p: int, q: int) -> Scalar:
    if p < 0 or q < 0:
        raise ValueError("negative exponent")
    if p + q > S.cutoff:
        raise ValueError(f"({p},{q}) lies beyond the truncation degree {S.cutoff}")
    return S._terms.get((p, q), 0)


@dataclass(frozen=True)
class LoopTransport:
    """Composite automorphism as multipliers: z1 -> z1*A, z2 -> z2*B."""

    A: Trunc2Series
    B: Trunc2Series

    def __post_init__(self):
        if self.A.constant() != 1 or self.B.constant() != 1:
            raise NonUnitSeries("transport multipliers must have constant term 1")

    def defect(self, d: int) -> tuple[dict, dict]:
        return self.A.degree_part(d), self.B.degree_part(d)

    def is_identity(self) -> bool:
        return self.A._terms == {(0, 0): 1} and self.B._terms == {(0, 0): 1}


def univariate_pow(f: list[Scalar], e: int, n: int) -> list[Scalar]:
    """First ``n + 1`` coefficients of ``f**e`` where ``f[0] == 1``.

    Uses the J.C.P. Miller recurrence, which stays exact over the rationals
    and needs no inversion for negative ``e``.
    """
    out: list[Scalar] = [1]
    if e == 0 or n == 0:
        return out + [0] * n
    top = min(n, len(f) - 1)
    nz = [k for k in range(1, top + 1) if f[k]]
    for m in range(1, n + 1):
        s = 0
        for k in nz:
            if k > m:
                break
            w = out[m - k]
            if w:
                s += ((e + 1) * k - m) * f[k] * w
        if isinstance(s, int):
            q, r = divmod(s, m)
            out.append(q if r == 0 else Fraction(s, m))
        else:
            out.append(normalize(s / m))
    return out
