"""Memoized engine runs keyed by (b, c), with an optional on-disk cache."""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Iterable

from . import cache
from .engine import TauTable, compute_csd

log = logging.getLogger(__name__)


def _run(args: tuple[int, int, int]) -> TauTable:
    return compute_csd(*args)


class TableStore:
    """Hands out ``TauTable`` objects, computing each (b, c) at most once per degree."""

    def __init__(self, cache_dir: str | Path | None = None, jobs: int = 1):
        self.cache_dir = Path(cache_dir) if cache_dir else None
        self.jobs = max(1, jobs)
        self._tables: dict[tuple[int, int], TauTable] = {}
        self.computed = 0

    def _path(self, b: int, c: int) -> Path:
        assert self.cache_dir is not None
        return self.cache_dir / f"b{b}c{c}.tau"

    def _lookup(self, b: int, c: int, D: int) -> TauTable | None:
        t = self._tables.get((b, c))
        if t is not None and t.D >= D:
            return t
        if self.cache_dir is not None:
            path = self._path(b, c)
            if path.exists():
                try:
                    t = cache.decode_table(path.read_bytes())
                except cache.CacheFormatError as exc:
                    log.warning("ignoring unreadable cache %s: %s", path, exc)
                    return None
                self._tables[(b, c)] = t
                if t.D >= D:
                    return t
        return None

    def _keep(self, table: TauTable) -> None:
        self._tables[(table.b, table.c)] = table
        self.computed += 1
        if self.cache_dir is not None:
            cache.atomic_write(self._path(table.b, table.c), cache.encode_table(table))

    def get(self, b: int, c: int, D: int) -> TauTable:
        t = self._lookup(b, c, D)
        if t is None:
            t = compute_csd(b, c, D)
            self._keep(t)
        return t

    def prefetch(self, points: Iterable[tuple[int, int]], D: int) -> None:
        todo = sorted({p for p in points if self._lookup(p[0], p[1], D) is None})
        if not todo:
            return
        if self.jobs > 1 and len(todo) > 1:
            with ProcessPoolExecutor(self.jobs) as pool:
                for table in pool.map(_run, [(b, c, D) for b, c in todo], chunksize=8):
                    self._keep(table)
        else:
            for b, c in todo:
                self._keep(compute_csd(b, c, D))

    def __contains__(self, point: tuple[int, int]) -> bool:
        return point in self._tables
