import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import GOLDEN_B3C2
from scat2.engine import (
    CrossDefectMismatch, Diagram, InconsistencyError, TauTable, Wall, build_diagram, compute_csd, crossing_schedule,
    diagram_from_table, g_factor, interior_directions, solve_degree, t_factor, transport,
    transport_reference, verify_consistency,
)


def test_g_factor_examples():
    assert g_factor(2, 3, 3, 2) == 6
    assert g_factor(1, 1, 1, 1) == 1
    assert g_factor(2, 2, 3, 2) == 1


def test_t_factor_examples():
    assert t_factor(1, 1, 3, 2) == 6
    assert t_factor(2, 3, 3, 2) == 6
    assert t_factor(1, 0, 7, 5) == 7
    with pytest.raises(ValueError):
        t_factor(2, 4, 3, 2)


@given(st.integers(1, 9), st.integers(1, 9), st.integers(1, 12), st.integers(1, 12))
def test_t_factor_is_least(i, j, b, c):
    if math.gcd(i, j) != 1:
        return
    t = t_factor(i, j, b, c)
    assert (t * i) % b == 0 and (t * j) % c == 0
    assert all((s * i) % b or (s * j) % c for s in range(1, t))


def test_crossing_schedule():
    assert crossing_schedule(2) == [((1, 0), 1), ((0, 1), 1), ((1, 0), -1), ((1, 1), -1), ((0, 1), -1)]
    assert interior_directions(3) == [(2, 1), (1, 1), (1, 2)]
    dirs = interior_directions(12)
    assert len(set(Fraction(i, j) for i, j in dirs)) == len(dirs)
    assert all(Fraction(*dirs[k]) > Fraction(*dirs[k + 1]) for k in range(len(dirs) - 1))


def test_golden_example_table():
    table = compute_csd(3, 2, 14)
    assert {k: table[k] for k in GOLDEN_B3C2} == GOLDEN_B3C2


def test_solve_degree_examples():
    for b, c in [(1, 1), (3, 2), (4, 6), (5, 5)]:
        d, t = Diagram.initial(b, c, 2), TauTable.axes(b, c, 2)
        solve_degree(d, 2, t)
        assert t[1, 1] == g_factor(1, 1, b, c)
    table = compute_csd(3, 2, 5)
    assert (table[2, 1], table[1, 2], table[2, 3], table[4, 1]) == (1, 1, 14, 0)


def test_pentagon_case():
    table = compute_csd(1, 1, 10)
    interior = {(i, j): v for (i, j), v in table.values.items() if i and j}
    assert interior == {(1, 1): 1}


def test_diagonal_at_two_two():
    table = compute_csd(2, 2, 8)
    assert [table[k, k] for k in range(1, 5)] == [2, 3, 4, 5]


def test_initial_lines_defect():
    D = 2
    d = Diagram.initial(1, 1, D)
    rep = verify_consistency(d)[1]
    assert rep.eps1.get((1, 1)) and rep.eps2.get((1, 1))
    d = Diagram.initial(3, 2, 4)
    reps = verify_consistency(d)
    first = next(r for r in reps if not r.is_clean())
    assert first.degree == 2
    sb, sc = d.scales
    assert first.eps1[(1, 1)] * sb / t_factor(1, 1, sb, sc) == g_factor(1, 1, 3, 2)


def test_inverse_crossings_cancel():
    d = Diagram(3, 2, 6, {(1, 0): Wall((1, 0), [1])})
    assert transport(d).is_identity()
    d = Diagram(3, 2, 6, {(0, 1): Wall((0, 1), [1])})
    assert transport(d).is_identity()


def test_complete_diagram_is_consistent():
    for b, c in [(1, 1), (2, 3), (3, 2), (4, 4)]:
        diagram, table = build_diagram(b, c, 10)
        assert transport(diagram).is_identity()
        assert all(r.is_clean() for r in verify_consistency(diagram))


def test_perturbation_breaks_consistency_at_that_degree():
    table = compute_csd(3, 2, 8)
    d = diagram_from_table(table)
    d.set_coefficient(1, 1, table[1, 1] + 1)
    reps = verify_consistency(d)
    assert not reps[1].is_clean() and reps[0].is_clean()
    d = diagram_from_table(table)
    d.set_coefficient(2, 3, table[2, 3] + 1)
    dirty = [r.degree for r in verify_consistency(d) if not r.is_clean()]
    assert dirty[0] == 5


def test_cross_checks_are_counted():
    table = compute_csd(3, 2, 10)
    assert table.cross_checks == sum(d - 1 for d in range(2, 11))


def test_cross_defect_mismatch_is_detected(monkeypatch):
    import scat2.engine as engine
    from scat2.series import LoopTransport, Trunc2Series

    def lopsided(diagram, cutoff=None):
        A = Trunc2Series(2, {(0, 0): 1, (1, 1): -1})
        B = Trunc2Series(2, {(0, 0): 1, (1, 1): -5})
        return LoopTransport(A, B)

    monkeypatch.setattr(engine, "transport", lopsided)
    with pytest.raises(CrossDefectMismatch):
        solve_degree(Diagram.initial(3, 2, 2), 2, TauTable.axes(3, 2, 2))


def test_lower_degree_defect_is_fatal():
    d, t = Diagram.initial(3, 2, 5), TauTable.axes(3, 2, 5)
    for deg in (2, 3):
        solve_degree(d, deg, t)
    d.set_coefficient(1, 1, 7)
    with pytest.raises(InconsistencyError):
        solve_degree(d, 4, t)


def test_bad_inputs():
    for args in [(0, 2, 5), (2, 0, 5), (2, 2, 0), (2.0, 2, 5)]:
        with pytest.raises(ValueError):
            compute_csd(*args)


def test_determinism():
    assert compute_csd(4, 3, 12) == compute_csd(4, 3, 12)


@pytest.mark.parametrize("b,c", [(1, 1), (1, 2), (3, 2), (2, 5), (4, 3), (6, 6)])
def test_exchange_symmetry(b, c):
    D = 12
    t, s = compute_csd(b, c, D), compute_csd(c, b, D)
    assert all(t[i, j] == s[j, i] for i in range(D + 1) for j in range(D + 1 - i))


def weyl_pairs(table):
    b, c, D = table.b, table.c, table.D
    for i in range(1, D):
        for j in range(1, D - i + 1):
            if 0 <= b * i - j and i + b * i - j <= D:
                yield (i, j), (i, b * i - j)
            if 0 <= c * j - i and c * j - i + j <= D:
                yield (i, j), (c * j - i, j)


@pytest.mark.parametrize("b,c", [(3, 2), (2, 3), (2, 2), (1, 4), (4, 3), (5, 2)])
def test_weyl_reflections(b, c):
    table = compute_csd(b, c, 16)
    pairs = list(weyl_pairs(table))
    assert pairs
    for x, y in pairs:
        assert table[x] == table[y], (x, y)


def test_weyl_examples_from_table():
    t = compute_csd(3, 2, 12)
    assert t[2, 3] == t[4, 3] == 14
    assert t[4, 5] == t[4, 7] == 33


def test_other_weyl_form_fails_somewhere():
    # the reflections with b and c exchanged do not hold on the table
    t = compute_csd(3, 2, 12)
    assert t[2, 3] != t[2, 2 * 2 - 3] or t[2, 3] != t[3 * 3 - 2, 3]


def test_integrality_and_positivity_observed():
    for b, c in [(3, 2), (4, 5), (2, 7)]:
        assert all(isinstance(v, int) and v > 0 for v in compute_csd(b, c, 12).values.values())


# -- fast kernel vs generic series operations ------------------------------

@st.composite
def random_diagram(draw):
    b, c = draw(st.integers(1, 4)), draw(st.integers(1, 4))
    D = draw(st.integers(2, 6))
    d = Diagram.initial(b, c, D)
    dirs = interior_directions(D)
    for _ in range(draw(st.integers(0, 4))):
        i, j = draw(st.sampled_from(dirs))
        k = draw(st.integers(1, D // (i + j)))
        d.set_coefficient(k * i, k * j, draw(st.fractions(-3, 3, max_denominator=3)))
    return d


@settings(max_examples=20, deadline=None)
@given(random_diagram())
def test_fast_transport_matches_reference(d):
    assert transport(d) == transport_reference(d)


# -- independent oracle: exact point maps for finite-type diagrams ----------

def _point_loop(table, point):
    """Compose the crossings as rational maps of (z1, z2) and evaluate exactly."""
    b, c = table.b, table.c
    sb, sc = c, b
    walls = {}
    for (p, q), v in table.values.items():
        if p and q:
            k = math.gcd(p, q)
            walls.setdefault((p // k, q // k), {})[k] = v
    walls[(1, 0)] = {1: 1}
    walls[(0, 1)] = {1: 1}
    maps = []
    for (i, j), sigma in crossing_schedule(table.D):
        if (i, j) not in walls:
            continue
        t = t_factor(i, j, sb, sc)
        maps.append((i, j, sigma, t, walls[(i, j)]))
    x1, x2 = point
    # theta_n o ... o theta_1 pulled back to points: apply the last crossing first
    for i, j, sigma, t, coeffs in reversed(maps):
        u = Fraction(x2) ** (b * i) * Fraction(x1) ** (-c * j)
        f = 1 + sum(v * u**k for k, v in coeffs.items())
        x1, x2 = x1 * f ** (sigma * t * i // sb), x2 * f ** (sigma * t * j // sc)
    return x1, x2


@pytest.mark.parametrize("b,c", [(1, 1), (1, 2), (2, 1), (1, 3), (3, 1)])
def test_finite_type_loop_is_identity_on_points(b, c):
    table = compute_csd(b, c, 14)
    assert all(i + j <= 6 for (i, j) in table.values)
    rng = random.Random(b * 10 + c)
    for _ in range(5):
        pt = (Fraction(rng.randint(1, 9), rng.randint(1, 9)), Fraction(rng.randint(1, 9), rng.randint(1, 9)))
        assert _point_loop(table, pt) == pt
    broken = TauTable(b, c, table.D, dict(table.values))
    broken.values[(1, 1)] += 1
    assert _point_loop(broken, (Fraction(2), Fraction(3))) != (2, 3)
