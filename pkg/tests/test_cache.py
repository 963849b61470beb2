import os
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from scat2 import cache
from scat2.engine import TauTable, compute_csd
from scat2.ring import B, C, G, Poly3


def test_table_round_trip_is_bit_exact():
    table = compute_csd(3, 2, 14)
    data = cache.encode_table(table)
    back = cache.decode_table(data)
    assert back == table
    assert cache.encode_table(back) == data
    assert b"\ntau 2 3 14\n" in data
    assert data.startswith(b"scat2 v1 numeric b=3 c=2 D=14\n")


def test_created_stamp_is_the_only_variable_part():
    table = compute_csd(2, 2, 6)
    a = cache.encode_table(table, created="2026-01-01T00:00:00Z")
    b = cache.encode_table(table)
    assert a.split(b"\n", 1)[1] == b.split(b"\n", 1)[1]
    header, back = cache.decode(a)
    assert header.created == "2026-01-01T00:00:00Z" and back == table


def test_empty_table_is_header_only():
    assert cache.encode_table(TauTable(3, 2, 4, {})) == b"scat2 v1 numeric b=3 c=2 D=4\n"


def test_symbolic_round_trip():
    polys = {(1, 1): G, (2, 2): G * (2 * B * C - 2 * B - 2 * C + 1 + G) / 2, (1, 2): G * (B - 1) / 2}
    data = cache.encode_polys(polys)
    assert b"tau 1 1 poly: g\n" in data
    assert cache.decode_polys(data) == polys
    assert cache.encode_polys(cache.decode_polys(data)) == data


def test_header_parse():
    h = cache.parse_header("scat2 v1 numeric b=3 c=2 D=14")
    assert (h.kind, h.b, h.c, h.D) == ("numeric", 3, 2, 14)
    assert cache.parse_header("scat2 v1 symbolic b=sym c=sym D=8").b is None


@pytest.mark.parametrize(
    "text,line",
    [
        ("scat2 v1 numeric b=3 c=2 D=5\ntau 2 3 fourteen\n", 2),
        ("scat2 v2 numeric b=3 c=2 D=5\n", 1),
        ("scat2 v1 numeric b=3 c=2 D=5\ntau 1 1 1\ntau 1 1 1\n", 3),
        ("scat2 v1 numeric b=3 c=2 D=5\ntau 2 1 1\ntau 1 1 1\n", 3),
        ("scat2 v1 numeric b=3 c=2 D=5\ntau 4 4 1\n", 2),
        ("scat2 v1 numeric b=3 c=2 D=5\ntau 1 1\n", 2),
        ("scat2 v1 numeric b=3 c=2 D=5\ntau\t1 1 1\n", 2),
        ("scat2 v1 numeric b=3 c=2 D=5\ntau 1 1 1", 2),
        ("scat2 v1 numeric b=sym c=2 D=5\n", 1),
        ("scat2 v1 symbolic b=sym c=sym D=5\ntau 1 1 g\n", 2),
        ("scat2 v1 symbolic b=sym c=sym D=5\ntau 1 1 poly: g +\n", 2),
        ("scat2 v1 numeric b=3 c=2 D=5\ntau 1 1 1/0\n", 2),
    ],
)
def test_malformed_lines_are_located(text, line):
    with pytest.raises(cache.CacheFormatError) as err:
        cache.decode(text.encode())
    assert err.value.line == line
    assert f"line {line}:" in str(err.value)


def test_version_error_names_version():
    with pytest.raises(cache.CacheFormatError, match="v2"):
        cache.decode(b"scat2 v2 numeric b=3 c=2 D=5\n")


@given(st.integers(1, 9), st.integers(1, 9), st.integers(0, 6),
       st.dictionaries(st.tuples(st.integers(0, 6), st.integers(0, 6)),
                       st.fractions(max_denominator=50).filter(bool), max_size=12))
def test_random_tables_round_trip(b, c, D, values):
    values = {k: v for k, v in values.items() if sum(k) <= D}
    t = TauTable(b, c, D, {k: (int(v) if v.denominator == 1 else v) for k, v in values.items()})
    data = cache.encode_table(t)
    assert cache.decode_table(data) == t
    assert cache.encode_table(cache.decode_table(data)) == data


def test_atomic_write_leaves_no_partial_file(tmp_path, monkeypatch):
    target = tmp_path / "t.tau"
    cache.atomic_write(target, b"old\n")

    def boom(src, dst):
        raise OSError("disk gone")

    monkeypatch.setattr(cache.os, "replace", boom)
    with pytest.raises(OSError):
        cache.atomic_write(target, b"new\n")
    assert target.read_bytes() == b"old\n"
    assert os.listdir(tmp_path) == ["t.tau"]


def test_report_lines():
    line = cache.encode_report_line(7, "verified-in-range", "i<=6,D=20", "tau(3,3) = 5")
    assert line == "conj 7 verified i<=6,D=20 witness: tau(3,3) = 5"
    assert cache.decode_report_line(line) == (7, "verified", "i<=6,D=20", "tau(3,3) = 5")
    assert cache.decode_report_line("conj 2 inconclusive x") == (2, "inconclusive", "x", None)
    with pytest.raises(ValueError):
        cache.encode_report_line(1, "maybe", "x")
    with pytest.raises(ValueError):
        cache.decode_report_line("conj x verified y")
