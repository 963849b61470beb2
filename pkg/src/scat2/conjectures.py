"""Mechanical checks of the eighteen conjectures on tau over finite ranges.

Every check returns a :class:`ConjectureReport`.  Missing data (an index
beyond the table degree, a fit that does not validate when the check needs
its polynomial) makes a report inconclusive; it never raises.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Callable, Iterable

from . import cache
from .engine import InconsistencyError, TauTable, g_factor
from .fit import FitResult, MissingDataError, UnvalidatedFit, fit_tau, interpolate, tau_g_coeff
from .ring import (
    B,
    C,
    G,
    Poly3,
    UniPoly,
    binom_basis_expand,
    exact_quotient,
    format_rational,
    normalize,
    poly_gcd,
    to_text,
)
from .store import TableStore

log = logging.getLogger(__name__)

VERIFIED = "verified-in-range"
FALSIFIED = "falsified"
INCONCLUSIVE = "inconclusive"

ALL_IDS = tuple(range(1, 19))
CLOSED_FORM_RULES = ("C5", "C6", "C7", "C8", "C9", "C10", "C13")


class NonPolynomialForm(ArithmeticError):
    """A closed form whose displayed division does not cancel."""


@dataclass
class ConjectureReport:
    id: int
    status: str
    range: str
    witnesses: list[str] = field(default_factory=list)
    notes: str = ""

    @property
    def ok(self) -> bool:
        return self.status == VERIFIED

    def to_line(self, max_witnesses: int = 3) -> str:
        w = "; ".join(self.witnesses[:max_witnesses]) or None
        return cache.encode_report_line(self.id, self.status, self.range, w)


@dataclass(frozen=True)
class RangeSpec:
    """Tested ranges.  ``None`` index bounds take a per-conjecture default:
    8 for the fitted conjectures, 6 for C13 and 3 for the base index of the
    g-slice conjectures 15-18.  ``summax`` bounds i + j for C11 and C12."""

    imax: int | None = None
    jmax: int | None = None
    bmax: int = 6
    cmax: int = 6
    kmax: int = 4
    degree: int = 20
    summax: int = 10

    def resolve(self, conj_id: int) -> RangeSpec:
        default = 3 if conj_id >= 15 else 6 if conj_id == 13 else 8
        return replace(
            self,
            imax=default if self.imax is None else self.imax,
            jmax=default if self.jmax is None else self.jmax,
        )

    def token(self, conj_id: int) -> str:
        r = self.resolve(conj_id)
        if conj_id in (11, 12):
            return f"i+j<={r.summax},b=c,D={r.degree}"
        if conj_id == 13:
            return f"j<={r.jmax},b=1,c=5,D={r.degree}"
        parts = []
        if conj_id not in (5, 10):
            parts.append(f"i<={r.imax}")
        if conj_id not in (6, 7, 8, 9):
            parts.append(f"j<={r.jmax}")
        if conj_id >= 15:
            parts.append(f"k<={r.kmax}")
        if 5 <= conj_id <= 10:
            parts.append(f"b<={r.bmax},c<={r.cmax}")
        parts.append(f"D={r.degree}")
        return ",".join(parts)


# -- closed forms --------------------------------------------------------

@dataclass(frozen=True)
class ClosedForm:
    rule: str
    i: int | None = None
    j: int | None = None

    def __post_init__(self):
        if self.rule not in CLOSED_FORM_RULES:
            raise ValueError(f"unknown rule {self.rule!r}")
        need = {"C5": "j", "C6": "i", "C7": "i", "C8": "i", "C9": "i", "C10": "j", "C13": "j"}[self.rule]
        value = getattr(self, need)
        if value is None or value < 1:
            raise ValueError(f"rule {self.rule} needs a positive {need}")

    def indices(self) -> tuple[int, int]:
        """The tau entry the rule predicts."""
        return {
            "C5": lambda: (1, self.j),
            "C6": lambda: (self.i, 1),
            "C7": lambda: (self.i, self.i),
            "C8": lambda: (self.i, self.i),
            "C9": lambda: (self.i, self.i - 1),
            "C10": lambda: (self.j - 1, self.j),
            "C13": lambda: (2 * self.j, self.j),
        }[self.rule]()


def _binom(x, k: int):
    out = 1
    for m in range(k):
        out = (x - m) * out
    if isinstance(out, int):
        return Fraction(out, math.factorial(k))
    return out / math.factorial(k)


def _div(num, den):
    if isinstance(num, Poly3) and isinstance(den, Poly3):
        if den.degree("b") <= 0 and den.degree("c") <= 0 and den.degree("g") <= 0:
            return num / den.coeff(0, 0, 0)
        try:
            return exact_quotient(num, den)
        except ArithmeticError:
            raise NonPolynomialForm(f"{to_text(den)} does not divide {to_text(num)}") from None
    return num / den


def _formula(rule: ClosedForm, b, c, g):
    i, j = rule.i, rule.j
    if rule.rule == "C5":
        return _div(g * _binom(b, j), b)
    if rule.rule == "C6":
        return _div(g * _binom(c, i), c)
    if rule.rule == "C7":
        X = (b - 1) * (c - 1) * i + g
        return _div(g * _binom(X, i), X)
    if rule.rule == "C8":
        top = i * (b * c - b - c) + g - 1
        return sum((g * math.comb(i - 1, l) * _binom(top, l) / (l + 1) for l in range(i)), g * 0)
    if rule.rule == "C9":
        Y = i * b - i + 1
        return _div(g * _binom(Y * (c - 1), i - 1), Y * i)
    if rule.rule == "C10":
        Z = j * c - j + 1
        return _div(g * _binom(Z * (b - 1), j - 1), Z * j)
    raise AssertionError(rule)


def c13_value(j: int) -> Fraction | int:
    total = sum(math.comb(l, j - l + 1) * math.comb(j + l - 1, l) for l in range(j + 2))
    return normalize(Fraction(total, j))


def closed_form(rule: ClosedForm) -> Poly3 | Fraction | int:
    """Expanded polynomial of a displayed formula (a number for C13).

    Raises :class:`NonPolynomialForm` when a displayed division does not
    cancel, e.g. C9 at i = 1, which is g/b.
    """
    if rule.rule == "C13":
        return c13_value(rule.j)
    out = _formula(rule, B, C, G)
    return out if isinstance(out, Poly3) else Poly3.const(out)


def closed_form_value(rule: ClosedForm, b: int, c: int, g: int | None = None):
    """Numeric value of the displayed formula at one (b, c), exact.

    ``g`` defaults to ``g_factor`` of the predicted entry; for the axis
    entries reached by C9 at i = 1 and C10 at j = 1 that is b (resp. c).
    """
    if rule.rule == "C13":
        return c13_value(rule.j)
    if g is None:
        i, j = rule.indices()
        g = g_factor(i, j, b, c)
    return normalize(Fraction(_formula(rule, Fraction(b), Fraction(c), Fraction(g))))


# -- shared data ---------------------------------------------------------

class Workbench:
    """Tables and fits shared by all checks of one run.

    All engine tables are taken at the same ``degree`` and all fits share
    one ``prime_floor`` so that their sample grids overlap.
    """

    def __init__(self, store: TableStore | None = None, degree: int = 20, prime_floor: int = 12, jobs: int = 1):
        self.store = store if store is not None else TableStore(jobs=jobs)
        self.degree = degree
        self.prime_floor = prime_floor
        self._fits: dict[tuple[int, int], FitResult] = {}
        self._bb: dict[tuple[int, int], tuple[UniPoly, bool, str]] = {}

    def table(self, b: int, c: int) -> TauTable:
        return self.store.get(b, c, self.degree)

    def entry(self, i: int, j: int, b: int, c: int):
        if i + j > self.degree:
            raise MissingDataError(f"tau({i},{j}) lies beyond degree {self.degree}")
        return self.table(b, c)[i, j]

    def fit(self, i: int, j: int) -> FitResult:
        key = (i, j)
        if key not in self._fits:
            if i + j > self.degree:
                raise MissingDataError(f"tau({i},{j}) lies beyond degree {self.degree}")
            floor = max(self.prime_floor, i, j)
            self._fits[key] = fit_tau(i, j, self.store, degree=self.degree, prime_floor=floor)
        return self._fits[key]

    def fitted_poly(self, i: int, j: int) -> Poly3:
        r = self.fit(i, j)
        if not r.validated:
            raise UnvalidatedFit(f"tau({i},{j}) has no validated fit: {r.notes}")
        return r.poly

    def slice(self, i: int, j: int, k: int) -> Poly3:
        return tau_g_coeff(self.fit(i, j), k)

    def bb_poly(self, i: int, j: int) -> tuple[UniPoly, bool, str]:
        """tau at b = c as a polynomial in b, from engine runs on the diagonal.

        The ansatz allows degree i + j + 1; three further diagonal points
        validate it.
        """
        key = (i, j)
        if key not in self._bb:
            if i + j > self.degree:
                raise MissingDataError(f"tau({i},{j}) lies beyond degree {self.degree}")
            n = i + j + 2
            nodes = list(range(1, n + 1))
            extra = list(range(n + 1, n + 4))
            self.store.prefetch([(b, b) for b in nodes + extra], self.degree)
            values = [self.entry(i, j, b, b) for b in nodes]
            P = UniPoly(interpolate(nodes, values))
            bad = [(b, self.entry(i, j, b, b), P(b)) for b in extra if P(b) != self.entry(i, j, b, b)]
            notes = "" if not bad else f"diagonal fit disagrees at b=c={bad[0][0]}: engine {bad[0][1]}, fit {bad[0][2]}"
            self._bb[key] = (P, not bad, notes)
        return self._bb[key]


# -- report assembly -----------------------------------------------------

class _Tally:
    def __init__(self):
        self.failures: list[str] = []
        self.confirmations: list[str] = []
        self.missing: list[str] = []
        self.notes: list[str] = []

    def expect(self, ok: bool, confirm: str, fail: str) -> bool:
        (self.confirmations if ok else self.failures).append(confirm if ok else fail)
        return ok

    def guard(self, what: str, fn: Callable[[], object]):
        """Run fn; missing data or an unvalidated fit is logged as missing."""
        try:
            return fn()
        except (MissingDataError, UnvalidatedFit, KeyError) as exc:
            self.missing.append(f"{what}: {exc}")
        except InconsistencyError as exc:
            self.missing.append(f"{what}: engine inconsistency: {exc}")
        return None

    def report(self, conj_id: int, rng: str) -> ConjectureReport:
        if self.failures:
            status, wit = FALSIFIED, self.failures
        elif self.missing:
            status, wit = INCONCLUSIVE, self.missing
        else:
            status, wit = VERIFIED, self.confirmations
        notes = list(self.notes)
        notes.append(f"{len(self.confirmations)} confirmed, {len(self.failures)} failed, {len(self.missing)} missing")
        if status == FALSIFIED and self.missing:
            notes.append("missing: " + "; ".join(self.missing[:3]))
        return ConjectureReport(conj_id, status, rng, list(wit), "; ".join(notes))


def _pairs(r: RangeSpec) -> Iterable[tuple[int, int]]:
    for i in range(1, r.imax + 1):
        for j in range(1, r.jmax + 1):
            yield i, j


def _grid(r: RangeSpec) -> Iterable[tuple[int, int]]:
    for b in range(1, r.bmax + 1):
        for c in range(1, r.cmax + 1):
            yield b, c


def _fit_or_fail(wb: Workbench, t: _Tally, i: int, j: int) -> FitResult | None:
    r = t.guard(f"tau({i},{j})", lambda: wb.fit(i, j))
    if r is not None and not r.validated:
        t.missing.append(f"tau({i},{j}) has no validated fit")
        return None
    return r


# -- individual checks ---------------------------------------------------

def _check_1(wb, r, t):
    for i, j in _pairs(r):
        res = t.guard(f"tau({i},{j})", lambda: wb.fit(i, j))
        if res is None:
            continue
        t.expect(
            res.validated,
            f"tau({i},{j}) is a polynomial of degrees (b,c,g)={res.achieved_degrees}",
            f"tau({i},{j}): no polynomial fits ({res.notes})",
        )


def _check_2(wb, r, t):
    for i, j in _pairs(r):
        res = _fit_or_fail(wb, t, i, j)
        if res is None:
            continue
        d = math.gcd(i, j)
        g0 = tau_g_coeff(res, 0)
        t.expect(g0.is_zero(), f"g divides tau({i},{j})", f"tau({i},{j}) has g^0 part {to_text(g0)}")
        dg = res.achieved_degrees[2]
        t.expect(dg == d, f"deg_g tau({i},{j}) = {d}", f"deg_g tau({i},{j}) = {dg}, gcd = {d}")


def _check_3(wb, r, t):
    for i, j in _pairs(r):
        res = _fit_or_fail(wb, t, i, j)
        if res is None:
            continue
        db, dc, _ = res.achieved_degrees
        t.expect(
            (db, dc) == (j - 1, i - 1),
            f"tau({i},{j}) has deg_b={db}, deg_c={dc}",
            f"tau({i},{j}) has deg_b={db} (expected {j - 1}), deg_c={dc} (expected {i - 1})",
        )


def _check_4(wb, r, t):
    for i, j in _pairs(r):
        res = _fit_or_fail(wb, t, i, j)
        if res is None:
            continue
        m = math.factorial(max(i, j))
        bad = [v for v in res.poly.terms.values() if (v * m).denominator != 1]
        t.expect(
            not bad,
            f"{max(i, j)}!*tau({i},{j}) is integral",
            f"{max(i, j)}!*tau({i},{j}) has coefficient {format_rational(bad[0] * m) if bad else ''}",
        )


def _closed_form_family(wb, r, t, rules: list[ClosedForm], numeric_extra: list[ClosedForm] = ()):
    """Polynomial identity against the fit plus numeric identity on the (b,c) grid."""
    for rule in rules:
        i, j = rule.indices()
        try:
            cf = closed_form(rule)
        except NonPolynomialForm as exc:
            t.failures.append(f"{rule.rule} at ({i},{j}) is not a polynomial: {exc}")
            continue
        fitted = t.guard(f"tau({i},{j})", lambda: wb.fitted_poly(i, j))
        if fitted is not None:
            t.expect(
                to_text(cf) == to_text(fitted),
                f"tau({i},{j}) = {to_text(cf)}",
                f"tau({i},{j}): closed form {to_text(cf)} vs fitted {to_text(fitted)}",
            )
    for rule in list(rules) + list(numeric_extra):
        i, j = rule.indices()
        if i + j > wb.degree:
            t.missing.append(f"tau({i},{j}) lies beyond degree {wb.degree}")
            continue
        bad = None
        for b, c in _grid(r):
            engine = t.guard(f"tau^({b},{c})({i},{j})", lambda: wb.entry(i, j, b, c))
            if engine is None:
                bad = False
                break
            want = closed_form_value(rule, b, c)
            if want != engine:
                bad = (b, c, want, engine)
                break
        if bad is None:
            t.confirmations.append(f"{rule.rule} at ({i},{j}) matches the engine on b<={r.bmax}, c<={r.cmax}")
        elif bad:
            b, c, want, engine = bad
            t.failures.append(
                f"{rule.rule} at ({i},{j}), b={b}, c={c}, g={g_factor(i, j, b, c)}: "
                f"formula {format_rational(want)}, engine {format_rational(engine)}"
            )


def _check_5(wb, r, t):
    _closed_form_family(wb, r, t, [ClosedForm("C5", j=j) for j in range(1, r.jmax + 1)])


def _check_6(wb, r, t):
    _closed_form_family(wb, r, t, [ClosedForm("C6", i=i) for i in range(1, r.imax + 1)])


def _check_7(wb, r, t):
    _closed_form_family(wb, r, t, [ClosedForm("C7", i=i) for i in range(1, r.imax + 1)])


def _check_8(wb, r, t):
    for i in range(1, r.imax + 1):
        c7, c8 = closed_form(ClosedForm("C7", i=i)), closed_form(ClosedForm("C8", i=i))
        t.expect(c7 == c8, f"C8 = C7 at i={i}", f"C8 at i={i}: {to_text(c8)} differs from C7 {to_text(c7)}")
    _closed_form_family(wb, r, t, [ClosedForm("C8", i=i) for i in range(1, r.imax + 1)])


def _check_9(wb, r, t):
    # i = 1 predicts the axis entry tau(1,0) = 1 and is only checked numerically
    _closed_form_family(
        wb, r, t, [ClosedForm("C9", i=i) for i in range(2, r.imax + 1)], [ClosedForm("C9", i=1)]
    )


def _check_10(wb, r, t):
    _closed_form_family(
        wb, r, t, [ClosedForm("C10", j=j) for j in range(2, r.jmax + 1)], [ClosedForm("C10", j=1)]
    )


def _bb_pairs(r: RangeSpec) -> Iterable[tuple[int, int]]:
    for s in range(2, r.summax + 1):
        for i in range(1, s):
            yield i, s - i


def _bb(wb, t, i, j) -> UniPoly | None:
    got = t.guard(f"tau^(b,b)({i},{j})", lambda: wb.bb_poly(i, j))
    if got is None:
        return None
    P, ok, notes = got
    if not ok:
        t.failures.append(f"tau^(b,b)({i},{j}) is not a polynomial of degree <= {i + j + 1}: {notes}")
        return None
    return P


def _uni_text(P: UniPoly) -> str:
    return "[" + ", ".join(format_rational(v) for v in P.coeffs) + "]"


def _check_11(wb, r, t):
    for i, j in _bb_pairs(r):
        P = _bb(wb, t, i, j)
        if P is None:
            continue
        t.expect(
            P.degree == i + j - 1,
            f"deg tau^(b,b)({i},{j}) = {i + j - 1}",
            f"tau^(b,b)({i},{j}) = {_uni_text(P)} has degree {P.degree}, expected {i + j - 1}",
        )
        a = binom_basis_expand(P)
        t.expect(
            all(v >= 0 for v in a),
            f"tau^(b,b)({i},{j}) binomial basis {[format_rational(v) for v in a]}",
            f"tau^(b,b)({i},{j}) has binomial-basis coefficients {[format_rational(v) for v in a]}",
        )


def is_unimodal(seq: list) -> bool:
    k = 0
    n = len(seq)
    while k + 1 < n and seq[k + 1] >= seq[k]:
        k += 1
    while k + 1 < n and seq[k + 1] <= seq[k]:
        k += 1
    return k >= n - 1


def is_log_concave(seq: list) -> bool:
    return all(seq[k] ** 2 >= seq[k - 1] * seq[k + 1] for k in range(1, len(seq) - 1))


def coefficient_profile(P: UniPoly) -> dict[str, object]:
    """Shape data of the monomial and binomial-basis coefficient sequences."""
    coeffs = list(P.coeffs)
    lo = next((k for k, v in enumerate(coeffs) if v), len(coeffs))
    body = coeffs[lo:]
    alternating = all(v != 0 for v in body) and all(body[k] * body[k + 1] < 0 for k in range(len(body) - 1))
    mags = [abs(v) for v in body]
    a = binom_basis_expand(P)
    blo = next((k for k, v in enumerate(a) if v), len(a))
    bbody = list(a[blo:])
    return {
        "monomial": body,
        "alternating": alternating,
        "unimodal": is_unimodal(mags),
        "log_concave": is_log_concave(mags),
        "binomial": bbody,
        "binomial_unimodal": is_unimodal(bbody),
        "binomial_log_concave": is_log_concave(bbody),
    }


def _check_12(wb, r, t):
    binomial_bad = []
    for i, j in _bb_pairs(r):
        P = _bb(wb, t, i, j)
        if P is None:
            continue
        prof = coefficient_profile(P)
        seq = [format_rational(v) for v in prof["monomial"]]
        ok = prof["alternating"] and prof["unimodal"] and prof["log_concave"]
        t.expect(
            ok,
            f"tau^(b,b)({i},{j}) monomial coefficients {seq}",
            f"tau^(b,b)({i},{j}) monomial coefficients {seq}: alternating={prof['alternating']}, "
            f"unimodal={prof['unimodal']}, log-concave={prof['log_concave']}",
        )
        if not (prof["binomial_unimodal"] and prof["binomial_log_concave"]):
            binomial_bad.append(f"({i},{j})")
    t.notes.append(
        "asserted: signs alternate and absolute values are unimodal and log-concave; "
        + ("binomial basis also unimodal and log-concave" if not binomial_bad
           else "binomial basis fails at " + " ".join(binomial_bad))
    )


def _check_13(wb, r, t):
    for j in range(1, r.jmax + 1):
        want = c13_value(j)
        engine = t.guard(f"tau^(1,5)({2 * j},{j})", lambda: wb.entry(2 * j, j, 1, 5))
        if engine is None:
            continue
        t.expect(
            engine == want,
            f"tau^(1,5)({2 * j},{j}) = {format_rational(want)}",
            f"j={j}: formula {format_rational(want)}, engine tau^(1,5)({2 * j},{j}) = {format_rational(engine)}",
        )


def _check_14(wb, r, t):
    for i, j in _pairs(r):
        res = _fit_or_fail(wb, t, i, j)
        if res is None:
            continue
        for k in range(1, math.gcd(i, j) + 1):
            s = tau_g_coeff(res, k)
            db, dc = s.degree("b"), s.degree("c")
            lead = s.coeff(j - k, i - k, 0)
            t.expect(
                (db, dc) == (j - k, i - k) and lead != 0,
                f"tau({i},{j};{k}) has degrees ({db},{dc}) and b^{j - k}c^{i - k} coefficient {format_rational(lead)}",
                f"tau({i},{j};{k}) = {to_text(s)}: degrees ({db},{dc}), expected ({j - k},{i - k}), "
                f"b^{j - k}c^{i - k} coefficient {format_rational(lead)}",
            )


def _primitive_bases(r: RangeSpec) -> Iterable[tuple[int, int]]:
    return ((i, j) for i, j in _pairs(r) if math.gcd(i, j) == 1)


def _check_15(wb, r, t):
    for i, j in _primitive_bases(r):
        base = t.guard(f"tau({i},{j};1)", lambda: wb.slice(i, j, 1))
        if base is None:
            continue
        for k in range(1, r.kmax + 1):
            top = t.guard(f"tau({i * k},{j * k};{k})", lambda: wb.slice(i * k, j * k, k))
            if top is None:
                continue
            want = base**k / math.factorial(k)
            t.expect(
                top == want,
                f"tau({i * k},{j * k};{k}) = tau({i},{j};1)^{k}/{k}! = {to_text(top)}",
                f"tau({i * k},{j * k};{k}) = {to_text(top)} but tau({i},{j};1)^{k}/{k}! = {to_text(want)}",
            )


def _saturation(wb, r, t, bases: list[int], index: Callable[[int, int], tuple[int, int]], label: str):
    for m in bases:
        bi, bj = index(1, m)
        base = t.guard(f"tau({bi},{bj};1)", lambda: wb.slice(bi, bj, 1))
        if base is None:
            continue
        if base.is_zero():
            t.failures.append(f"tau({bi},{bj};1) is zero")
            continue
        ratios: dict[int, Poly3] = {}
        for k in range(2, r.kmax + 1):
            pi, pj = index(k, m)
            s = t.guard(f"tau({pi},{pj};{k - 1})", lambda: wb.slice(pi, pj, k - 1))
            if s is None:
                continue
            try:
                ratios[k] = exact_quotient(s * math.factorial(k - 2), base ** (k - 1))
            except ArithmeticError:
                t.failures.append(
                    f"{label}={m}, k={k}: tau({bi},{bj};1)^{k - 1} does not divide "
                    f"{k - 2}!*tau({pi},{pj};{k - 1}) = {to_text(s * math.factorial(k - 2))}"
                )
        if not ratios:
            continue
        first_k = min(ratios)
        p = ratios[first_k]
        for k, q in sorted(ratios.items()):
            t.expect(
                q == p,
                f"{label}={m}, k={k}: ratio = {to_text(q)}",
                f"{label}={m}: ratio at k={k} is {to_text(q)}, at k={first_k} it is {to_text(p)}",
            )
        t.notes.append(f"p_{m} = {to_text(p)} (primitive {to_text(p.primitive())})")


def _check_16(wb, r, t):
    _saturation(wb, r, t, list(range(1, r.jmax + 1)), lambda k, j: (k, j * k), "j")


def _check_17(wb, r, t):
    _saturation(wb, r, t, list(range(1, r.imax + 1)), lambda k, i: (i * k, k), "i")


def _is_constant(P: Poly3) -> bool:
    return all(e == (0, 0, 0) for e in P.terms)


@dataclass
class FactorPattern:
    """Bookkeeping of tau(ki, kj; k-1) against the factors of tau(i, j; 1)."""

    i: int
    j: int
    base_factors: list[Poly3]
    exponents: dict[int, list[int]]
    p: Poly3
    consistent: bool
    residues: dict[int, Poly3]

    def describe(self) -> str:
        fs = ", ".join(
            f"({to_text(f)}): " + ",".join(str(self.exponents[k][n]) for k in sorted(self.exponents))
            for n, f in enumerate(self.base_factors)
        )
        return f"(i,j)=({self.i},{self.j}) p_ij = {to_text(self.p)}; exponents over k={sorted(self.exponents)}: {fs}"


def _split_against(base: list[Poly3], R: Poly3) -> list[Poly3]:
    changed = True
    while changed:
        changed = False
        out = []
        for e in base:
            h = poly_gcd(e, R)
            if not _is_constant(h) and h != e:
                out.extend([h, exact_quotient(e, h).primitive()])
                changed = True
            else:
                out.append(e)
        base = out
    return base


def _multiplicity(P: Poly3, f: Poly3) -> tuple[int, Poly3]:
    n = 0
    while True:
        try:
            q = exact_quotient(P, f)
        except ArithmeticError:
            return n, P
        P, n = q, n + 1


def factor_pattern(F: Poly3, slices: dict[int, Poly3], i: int = 0, j: int = 0) -> FactorPattern:
    """Split every q_k into factors shared with F and a remainder, and
    compare the remainders across k.

    F is tau(i,j;1); ``slices[k]`` is tau(ki,kj;k-1).
    """
    F = F.primitive()
    stripped: dict[int, Poly3] = {}
    removed: dict[int, Poly3] = {}
    for k, q in slices.items():
        s = q.primitive()
        while True:
            h = poly_gcd(s, F)
            if _is_constant(h):
                break
            s = exact_quotient(s, h)
        stripped[k] = s.primitive()
        removed[k] = exact_quotient(q.primitive(), stripped[k]).primitive()
    base = [] if _is_constant(F) else [F]
    for k in sorted(removed):
        base = _split_against(base, removed[k])
    p = Poly3.const(0)
    for k in sorted(stripped):
        p = poly_gcd(p, stripped[k]) if not p.is_zero() else stripped[k]
    exponents: dict[int, list[int]] = {}
    residues: dict[int, Poly3] = {}
    consistent = True
    for k, q in sorted(slices.items()):
        rest = exact_quotient(q, p)
        ex = []
        for f in base:
            n, rest = _multiplicity(rest, f)
            ex.append(n)
        exponents[k] = ex
        residues[k] = rest
        consistent &= _is_constant(rest)
    return FactorPattern(i, j, base, exponents, p, consistent, residues)


def _check_18(wb, r, t):
    for i, j in _primitive_bases(r):
        F = t.guard(f"tau({i},{j};1)", lambda: wb.slice(i, j, 1))
        if F is None:
            continue
        slices = {}
        for k in range(2, r.kmax + 1):
            s = t.guard(f"tau({k * i},{k * j};{k - 1})", lambda: wb.slice(k * i, k * j, k - 1))
            if s is not None:
                if s.is_zero():
                    t.failures.append(f"tau({k * i},{k * j};{k - 1}) is zero")
                else:
                    slices[k] = s
        if not slices:
            continue
        pat = factor_pattern(F, slices, i, j)
        bad = {k: v for k, v in pat.residues.items() if not _is_constant(v)}
        t.expect(
            pat.consistent,
            pat.describe(),
            pat.describe() + "; leftover factors "
            + ", ".join(f"k={k}: {to_text(v)}" for k, v in sorted(bad.items())),
        )
    t.notes.append("multiplicities are reported, not asserted")


_CHECKS = {
    1: _check_1, 2: _check_2, 3: _check_3, 4: _check_4, 5: _check_5, 6: _check_6,
    7: _check_7, 8: _check_8, 9: _check_9, 10: _check_10, 11: _check_11, 12: _check_12,
    13: _check_13, 14: _check_14, 15: _check_15, 16: _check_16, 17: _check_17, 18: _check_18,
}


def check(conj_id: int, workbench: Workbench | None = None, ranges: RangeSpec | None = None) -> ConjectureReport:
    if conj_id not in _CHECKS:
        raise ValueError(f"conjecture id must be 1..18, got {conj_id}")
    ranges = ranges or RangeSpec()
    wb = workbench or Workbench(degree=ranges.degree)
    t = _Tally()
    _CHECKS[conj_id](wb, ranges.resolve(conj_id), t)
    return t.report(conj_id, ranges.token(conj_id))


def check_all(ids: Iterable[int] = ALL_IDS, workbench: Workbench | None = None, ranges: RangeSpec | None = None):
    ranges = ranges or RangeSpec()
    wb = workbench or Workbench(degree=ranges.degree)
    return [check(n, wb, ranges) for n in ids]
