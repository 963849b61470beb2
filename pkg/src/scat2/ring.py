"""Exact arithmetic: rationals, sparse polynomials in (b, c, g), linear solving.

Everything here is immutable and exact.  Scalars are ``int`` or
``fractions.Fraction``; polynomials carry ``Fraction`` coefficients.
"""

from __future__ import annotations

import math
import re
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

Scalar = int | Fraction

# exponent triple layout used as dict key
Exp = tuple[int, int, int]  # (e_b, e_c, e_g)


def normalize(x: Scalar) -> Scalar:
    """Collapse integral fractions to ``int``."""
    if isinstance(x, Fraction) and x.denominator == 1:
        return int(x.numerator)
    return x


def exact_div(num: Scalar, den: int) -> Scalar:
    """``num / den`` staying in ``int`` when the division is exact."""
    if isinstance(num, int):
        q, r = divmod(num, den)
        if r == 0:
            return q
        return Fraction(num, den)
    return normalize(num / den)


def format_rational(x: Scalar) -> str:
    x = Fraction(x)
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


def parse_rational(text: str) -> Scalar:
    if not re.fullmatch(r"-?\d+(/\d+)?", text):
        raise ValueError(f"not a rational: {text!r}")
    if re.search(r"/0+$", text):
        raise ValueError(f"zero denominator: {text!r}")
    value = Fraction(text)
    return normalize(value)


def _order_key(e: Exp) -> tuple[int, int, int]:
    # canonical order: descending e_g, then e_b, then e_c
    return (e[2], e[0], e[1])


class Poly3:
    """Sparse polynomial in b, c, g with rational coefficients."""

    __slots__ = ("_terms", "_hash")

    def __init__(self, terms: Mapping[Exp, Scalar] | None = None):
        clean = {}
        if terms:
            for e, v in terms.items():
                if v:
                    clean[tuple(e)] = Fraction(v)
        self._terms: dict[Exp, Fraction] = clean
        self._hash = None

    # constructors
    @classmethod
    def const(cls, value: Scalar) -> Poly3:
        return cls({(0, 0, 0): value})

    @classmethod
    def var(cls, name: str) -> Poly3:
        return cls({{"b": (1, 0, 0), "c": (0, 1, 0), "g": (0, 0, 1)}[name]: 1})

    @classmethod
    def _wrap(cls, terms: dict[Exp, Fraction]) -> Poly3:
        p = cls.__new__(cls)
        p._terms = terms
        p._hash = None
        return p

    @property
    def terms(self) -> dict[Exp, Fraction]:
        return dict(self._terms)

    def items(self) -> list[tuple[Exp, Fraction]]:
        """Terms in canonical order."""
        return sorted(self._terms.items(), key=lambda kv: _order_key(kv[0]), reverse=True)

    def is_zero(self) -> bool:
        return not self._terms

    def __bool__(self) -> bool:
        return bool(self._terms)

    def coeff(self, eb: int, ec: int, eg: int) -> Fraction:
        return self._terms.get((eb, ec, eg), Fraction(0))

    def degree(self, var: str) -> int:
        """Degree in one indeterminate; -1 for the zero polynomial."""
        idx = "bcg".index(var)
        return max((e[idx] for e in self._terms), default=-1)

    def leading(self) -> tuple[Exp, Fraction]:
        return self.items()[0]

    # arithmetic
    def _coerce(self, other) -> Poly3:
        if isinstance(other, Poly3):
            return other
        if isinstance(other, (int, Fraction)):
            return Poly3.const(other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out = dict(self._terms)
        for e, v in other._terms.items():
            s = out.get(e, 0) + v
            if s:
                out[e] = s
            else:
                out.pop(e, None)
        return Poly3._wrap(out)

    __radd__ = __add__

    def __neg__(self) -> Poly3:
        return Poly3._wrap({e: -v for e, v in self._terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            if not other:
                return Poly3()
            return Poly3._wrap({e: v * other for e, v in self._terms.items()})
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out: dict[Exp, Fraction] = {}
        for e1, v1 in self._terms.items():
            for e2, v2 in other._terms.items():
                e = (e1[0] + e2[0], e1[1] + e2[1], e1[2] + e2[2])
                out[e] = out.get(e, 0) + v1 * v2
        return Poly3._wrap({e: v for e, v in out.items() if v})

    __rmul__ = __mul__

    def __truediv__(self, other: Scalar) -> Poly3:
        if not isinstance(other, (int, Fraction)):
            return NotImplemented
        return self * (1 / Fraction(other))

    def __pow__(self, n: int) -> Poly3:
        if n < 0:
            raise ValueError("negative power of a polynomial")
        result = Poly3.const(1)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            other = Poly3.const(other)
        if not isinstance(other, Poly3):
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset(self._terms.items()))
        return self._hash

    def __repr__(self) -> str:
        return f"Poly3({to_text(self)!r})"

    def __str__(self) -> str:
        return to_text(self)

    def subs(self, b=None, c=None, g=None) -> Poly3:
        """Substitute polynomials (or scalars) for any subset of b, c, g."""
        sub = []
        for name, val in (("b", b), ("c", c), ("g", g)):
            if val is None:
                sub.append(None)
            else:
                sub.append(val if isinstance(val, Poly3) else Poly3.const(val))
        out = Poly3()
        cache: dict[tuple[int, int], Poly3] = {}

        def power(idx, k):
            key = (idx, k)
            if key not in cache:
                cache[key] = sub[idx] ** k
            return cache[key]

        for e, v in self._terms.items():
            keep = [0, 0, 0]
            term = Poly3.const(v)
            for idx in range(3):
                if sub[idx] is None:
                    keep[idx] = e[idx]
                elif e[idx]:
                    term = term * power(idx, e[idx])
            if any(keep):
                term = term * Poly3({tuple(keep): 1})
            out = out + term
        return out

    def content(self) -> Fraction:
        """Positive rational content: gcd of numerators / lcm of denominators."""
        if not self._terms:
            return Fraction(0)
        num = 0
        den = 1
        for v in self._terms.values():
            num = math.gcd(num, v.numerator)
            den = den * v.denominator // math.gcd(den, v.denominator)
        return Fraction(num, den)

    def primitive(self) -> Poly3:
        """Content-1 multiple with positive leading coefficient (canonical order)."""
        if not self._terms:
            return self
        p = self / self.content()
        if p.leading()[1] < 0:
            p = -p
        return p


def poly_eval(P: Poly3, b: Scalar, c: Scalar, g: Scalar) -> Scalar:
    if not all(isinstance(x, int) for x in (b, c, g)):
        total = Fraction(0)
        for (eb, ec, eg), v in P._terms.items():
            total += v * Fraction(b) ** eb * Fraction(c) ** ec * Fraction(g) ** eg
        return normalize(total)
    # integer point: clear denominators once and stay in int arithmetic
    den = 1
    for v in P._terms.values():
        den = den * v.denominator // math.gcd(den, v.denominator)
    pb: dict[int, int] = {}
    pc: dict[int, int] = {}
    pg: dict[int, int] = {}
    total = 0
    for (eb, ec, eg), v in P._terms.items():
        xb = pb.get(eb)
        if xb is None:
            xb = pb[eb] = b**eb
        xc = pc.get(ec)
        if xc is None:
            xc = pc[ec] = c**ec
        xg = pg.get(eg)
        if xg is None:
            xg = pg[eg] = g**eg
        total += (v.numerator * (den // v.denominator)) * xb * xc * xg
    return exact_div(total, den)


B = Poly3.var("b")
C = Poly3.var("c")
G = Poly3.var("g")


def binomial_poly(P: Poly3, k: int) -> Poly3:
    """``P (P-1) ... (P-k+1) / k!`` expanded."""
    if k < 0:
        raise ValueError("k must be nonnegative")
    out = Poly3.const(1)
    for m in range(k):
        out = out * (P - m)
    return out / math.factorial(k)


# -- text form -----------------------------------------------------------

def to_text(P: Poly3) -> str:
    """Canonical text form, e.g. ``1/2*g^2 + 1/2*g*b*c - g*b``."""
    if P.is_zero():
        return "0"
    parts = []
    for (eb, ec, eg), v in P.items():
        factors = []
        for name, k in (("g", eg), ("b", eb), ("c", ec)):
            if k == 1:
                factors.append(name)
            elif k > 1:
                factors.append(f"{name}^{k}")
        mag = abs(v)
        if factors and mag == 1:
            body = "*".join(factors)
        else:
            body = "*".join([format_rational(mag)] + factors)
        parts.append(("-" if v < 0 else "+", body))
    sign, body = parts[0]
    text = ("-" if sign == "-" else "") + body
    for sign, body in parts[1:]:
        text += f" {sign} {body}"
    return text


_FACTOR = re.compile(r"([gbc])(?:\^(\d+))?")


def _parse_term(body: str) -> tuple[Exp, Fraction]:
    pieces = body.split("*")
    coef = Fraction(1)
    if re.fullmatch(r"\d+(/\d+)?", pieces[0]):
        coef = parse_rational(pieces.pop(0))
        if coef == 0:
            raise ValueError(f"zero coefficient in term {body!r}")
    exps = [0, 0, 0]
    for piece in pieces:
        m = _FACTOR.fullmatch(piece)
        if not m or (m.group(2) is not None and int(m.group(2)) < 2):
            raise ValueError(f"malformed factor {piece!r} in term {body!r}")
        idx = "bcg".index(m.group(1))
        if exps[idx]:
            raise ValueError(f"repeated factor in term {body!r}")
        exps[idx] = int(m.group(2) or 1)
    return (exps[0], exps[1], exps[2]), coef


def from_text(text: str) -> Poly3:
    """Inverse of :func:`to_text`."""
    if text == "0":
        return Poly3()
    tokens = text.split(" ")
    if len(tokens) % 2 == 0:
        raise ValueError(f"malformed polynomial: {text!r}")
    first = tokens[0]
    signs = ["-" if first.startswith("-") else "+"] + tokens[1::2]
    bodies = [first[1:] if first.startswith("-") else first] + tokens[2::2]
    terms: dict[Exp, Fraction] = {}
    for sign, body in zip(signs, bodies):
        if sign not in ("+", "-") or not body:
            raise ValueError(f"malformed polynomial: {text!r}")
        e, coef = _parse_term(body)
        if e in terms:
            raise ValueError(f"repeated monomial in {text!r}")
        terms[e] = -coef if sign == "-" else coef
    return Poly3(terms)


# -- division and gcd ----------------------------------------------------

def poly_divmod(P: Poly3, Q: Poly3) -> tuple[Poly3, Poly3]:
    """Multivariate division by a single divisor in the canonical order.

    The remainder is zero exactly when Q divides P.
    """
    if Q.is_zero():
        raise ZeroDivisionError("division by the zero polynomial")
    lt_e, lt_v = Q.leading()
    quot: dict[Exp, Fraction] = {}
    rem: dict[Exp, Fraction] = {}
    work = dict(P._terms)
    while work:
        e = max(work, key=_order_key)
        v = work[e]
        if all(e[k] >= lt_e[k] for k in range(3)):
            s = (e[0] - lt_e[0], e[1] - lt_e[1], e[2] - lt_e[2])
            f = v / lt_v
            quot[s] = quot.get(s, 0) + f
            for qe, qv in Q._terms.items():
                te = (qe[0] + s[0], qe[1] + s[1], qe[2] + s[2])
                nv = work.get(te, 0) - f * qv
                if nv:
                    work[te] = nv
                else:
                    work.pop(te, None)
        else:
            rem[e] = v
            del work[e]
    return Poly3(quot), Poly3(rem)


def divides(Q: Poly3, P: Poly3) -> bool:
    return poly_divmod(P, Q)[1].is_zero()


def exact_quotient(P: Poly3, Q: Poly3) -> Poly3:
    q, r = poly_divmod(P, Q)
    if not r.is_zero():
        raise ArithmeticError("polynomial division is not exact")
    return q


def _to_sympy(P: Poly3):
    import sympy

    b, c, g = sympy.symbols("b c g")
    return sympy.Poly(
        {(eg, eb, ec): sympy.Rational(v.numerator, v.denominator) for (eb, ec, eg), v in P._terms.items()},
        g, b, c, domain="QQ",
    )


def _from_sympy(sp) -> Poly3:
    terms = {}
    for (eg, eb, ec), v in sp.terms():
        terms[(eb, ec, eg)] = Fraction(int(v.p), int(v.q))
    return Poly3(terms)


def poly_gcd(P: Poly3, Q: Poly3) -> Poly3:
    """Greatest common divisor over Q, content 1, positive leading coefficient.

    The candidate is verified by exact trial division of both inputs.
    """
    if P.is_zero() and Q.is_zero():
        raise ValueError("gcd(0, 0) is undefined")
    if P.is_zero():
        return Q.primitive()
    if Q.is_zero():
        return P.primitive()
    d = _from_sympy(_to_sympy(P).gcd(_to_sympy(Q))).primitive()
    if not (divides(d, P) and divides(d, Q)):
        raise ArithmeticError("gcd candidate failed trial division")
    return d


# -- linear algebra ------------------------------------------------------

class SolveError(ArithmeticError):
    """The system has no unique solution."""

    def __init__(self, message: str, rank: int, inconsistent_row: int | None = None):
        super().__init__(message)
        self.rank = rank
        self.inconsistent_row = inconsistent_row


def solve_exact(A: Sequence[Sequence[Scalar]], y: Sequence[Scalar]) -> list[Scalar]:
    """Unique exact solution of ``A x = y`` by rational Gaussian elimination.

    Raises :class:`SolveError` when the system is inconsistent or when
    ``A`` does not have full column rank.
    """
    rows = len(A)
    cols = len(A[0]) if rows else 0
    if rows < cols:
        raise ValueError("need at least as many rows as columns")
    M = [[Fraction(v) for v in A[r]] + [Fraction(y[r])] for r in range(rows)]
    origin = list(range(rows))
    rank = 0
    pivots = []
    for col in range(cols):
        piv = next((r for r in range(rank, rows) if M[r][col]), None)
        if piv is None:
            continue
        M[rank], M[piv] = M[piv], M[rank]
        origin[rank], origin[piv] = origin[piv], origin[rank]
        pr = M[rank]
        inv = 1 / pr[col]
        for k in range(col, cols + 1):
            pr[k] *= inv
        for r in range(rows):
            if r != rank and M[r][col]:
                f = M[r][col]
                row = M[r]
                for k in range(col, cols + 1):
                    if pr[k]:
                        row[k] -= f * pr[k]
        pivots.append(col)
        rank += 1
    for r in range(rank, rows):
        if M[r][cols]:
            raise SolveError(f"inconsistent system at row {origin[r]}", rank, origin[r])
    if rank < cols:
        raise SolveError(f"rank {rank} < {cols} unknowns", rank)
    x = [Fraction(0)] * cols
    for r, col in enumerate(pivots):
        x[col] = M[r][cols]
    return [normalize(v) for v in x]


# -- univariate ----------------------------------------------------------

class UniPoly:
    """Dense univariate polynomial; ``coeffs[k]`` multiplies ``x**k``."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable[Scalar] = ()):
        cs = [Fraction(v) for v in coeffs]
        while cs and not cs[-1]:
            cs.pop()
        self.coeffs: tuple[Fraction, ...] = tuple(cs)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __call__(self, x: Scalar) -> Scalar:
        acc = Fraction(0)
        for v in reversed(self.coeffs):
            acc = acc * x + v
        return normalize(acc)

    def __eq__(self, other) -> bool:
        return isinstance(other, UniPoly) and self.coeffs == other.coeffs

    def __repr__(self) -> str:
        return f"UniPoly({[format_rational(v) for v in self.coeffs]})"

    @classmethod
    def from_poly3(cls, P: Poly3, var: str = "b") -> UniPoly:
        idx = "bcg".index(var)
        coeffs: dict[int, Fraction] = {}
        for e, v in P.terms.items():
            if any(e[k] for k in range(3) if k != idx):
                raise ValueError(f"polynomial is not univariate in {var}")
            coeffs[e[idx]] = v
        top = max(coeffs, default=-1)
        return cls(coeffs.get(k, 0) for k in range(top + 1))


def binom_basis_expand(P: UniPoly) -> list[Scalar]:
    """Coefficients ``a_k`` with ``P(x) = sum a_k * C(x, k)`` (forward differences at 0)."""
    n = P.degree
    if n < 0:
        return []
    vals = [P(x) for x in range(n + 1)]
    out = []
    for _ in range(n + 1):
        out.append(normalize(Fraction(vals[0])))
        vals = [vals[k + 1] - vals[k] for k in range(len(vals) - 1)]
    return out


def binom_basis_eval(a: Sequence[Scalar], x: Scalar) -> Scalar:
    total = Fraction(0)
    term = Fraction(1)  # C(x, k)
    for k, ak in enumerate(a):
        if k:
            term = term * (Fraction(x) - (k - 1)) / k
        total += ak * term
    return normalize(total)
