"""Exact rational homology and the spectral sequence of the complexity filtration.

Ranks come from column reduction over :class:`fractions.Fraction`.  Reducing
the boundary matrix with columns ordered by filtration (highest complexity
first) yields the persistence pairing of the filtered complex, and every page
of the spectral sequence is read off from it: a pair whose ends sit ``g``
filtration steps apart survives to page ``g`` and is killed by ``d_g``.

Complexity only grows along boundaries, so the subcomplexes are
``G_p = {cx >= p}`` and ``d_r`` maps filtration degree ``p'`` to ``p' + r``.
Index convention: ``p'`` is the complexity and ``q' = dim + p'``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import DomainError


class SparseMatrix:
    """Column-major sparse rational matrix; entries are exact."""

    def __init__(self, nrows: int, ncols: int, columns=None):
        self.nrows = nrows
        self.ncols = ncols
        self.columns = [dict() for _ in range(ncols)] if columns is None else columns

    @classmethod
    def from_scipy(cls, mat) -> "SparseMatrix":
        mat = mat.tocsc()
        cols = []
        for j in range(mat.shape[1]):
            lo, hi = mat.indptr[j], mat.indptr[j + 1]
            cols.append({int(r): Fraction(int(v)) for r, v in zip(mat.indices[lo:hi], mat.data[lo:hi]) if v})
        return cls(mat.shape[0], mat.shape[1], cols)

    def __getitem__(self, rc):
        r, c = rc
        return self.columns[c].get(r, Fraction(0))

    def __setitem__(self, rc, value):
        r, c = rc
        if value:
            self.columns[c][r] = Fraction(value)
        else:
            self.columns[c].pop(r, None)

    def nnz(self) -> int:
        return sum(len(c) for c in self.columns)

    def rank(self) -> int:
        return len(reduce_columns(self.columns)[0])


def reduce_columns(columns, order=None):
    """Left-to-right column reduction by lowest nonzero row.

    Returns ``(pivots, reduced)`` where ``pivots[row] = col`` for each column
    that kept a pivot.  ``order`` gives the row rank (larger = later); rows are
    compared through it, so the pairing follows the filtration.
    """
    rank_of = (lambda r: r) if order is None else order.__getitem__
    pivots = {}
    pivcols = {}
    reduced = []
    for j, col in enumerate(columns):
        col = dict(col)
        while col:
            low = max(col, key=rank_of)
            k = pivots.get(low)
            if k is None:
                pivots[low] = j
                pivcols[low] = col
                break
            other = pivcols[low]
            f = col[low] / other[low]
            for r, v in other.items():
                nv = col.get(r, 0) - f * v
                if nv:
                    col[r] = nv
                else:
                    col.pop(r, None)
        reduced.append(col)
    return pivots, reduced


def homology_ranks(complex, degrees=None) -> list:
    """Ranks of rational homology ``[(degree, rank), ...]``."""
    dims = complex.dims
    if degrees is None:
        degrees = range(int(dims.min()), int(dims.max()) + 1) if len(dims) else range(0)
    mat = SparseMatrix.from_scipy(complex.matrix)
    # boundary rank per source dimension
    rank_by_dim = {}
    for k in sorted(set(int(d) for d in dims)):
        cols = [mat.columns[j] for j in np.flatnonzero(dims == k)]
        rank_by_dim[k] = len(reduce_columns(cols)[0])
    out = []
    for k in degrees:
        n = int(np.count_nonzero(dims == k))
        out.append((k, n - rank_by_dim.get(k, 0) - rank_by_dim.get(k + 1, 0)))
    return out


# -- spectral sequence --------------------------------------------------------------

@dataclass
class SpectralPage:
    r: object  # int, or "inf"
    m: int
    entries: dict = field(default_factory=dict)
    differentials: dict = field(default_factory=dict)
    reindexed: bool = False

    def rank(self, p, q) -> int:
        return self.entries.get((p, q), 0)

    def total_by_degree(self) -> dict:
        """Sum of ranks per total degree ``q' - p'`` (unreindexed pages only)."""
        if self.reindexed:
            raise DomainError("total degree is read on unreindexed pages")
        out = {}
        for (p, q), v in self.entries.items():
            out[q - p] = out.get(q - p, 0) + v
        return out

    def to_dict(self) -> dict:
        return {"r": self.r,
                "entries": [[p, q, v] for (p, q), v in sorted(self.entries.items())],
                "differentials": [[s[0], s[1], t[0], t[1], v]
                                  for (s, t), v in sorted(self.differentials.items())]}


@dataclass
class FilteredPairing:
    """Persistence data of a filtered complex, enough to rebuild every page."""

    m: int
    level: np.ndarray          # complexity of each cell
    dims: np.ndarray
    pairs: list                # (killed cell, killer cell)
    essential: list
    reduced: list = field(default=None, repr=False)

    def gap(self, pair) -> int:
        a, b = pair
        return int(self.level[a] - self.level[b])


def filtered_pairing(complex, levels) -> FilteredPairing:
    """Reduce the boundary with cells ordered by descending level, then dimension."""
    levels = np.asarray(levels, dtype=np.int64)
    dims = complex.dims
    order = np.lexsort((np.arange(len(dims)), dims, -levels))
    rank = np.empty(len(order), np.int64)
    rank[order] = np.arange(len(order))
    mat = SparseMatrix.from_scipy(complex.matrix)
    cols = [mat.columns[j] for j in order]
    pivots, reduced = reduce_columns(cols, order=rank)
    pairs = [(int(row), int(order[col])) for row, col in pivots.items()]
    paired = {a for a, _ in pairs} | {b for _, b in pairs}
    essential = [int(i) for i in range(len(dims)) if i not in paired]
    for a, b in pairs:
        if levels[a] < levels[b]:
            raise AssertionError("boundary decreases complexity")
    red = [None] * len(order)
    for k, col in enumerate(reduced):
        red[order[k]] = col
    return FilteredPairing(complex.m, levels, dims, pairs, essential, red)


def _pos(level, dim):
    return int(level), int(dim + level)


def pages_from_pairing(fp: FilteredPairing, max_page: int) -> list:
    base = {}
    for i in range(len(fp.dims)):
        key = _pos(fp.level[i], fp.dims[i])
        base[key] = base.get(key, 0) + 1
    pages = []
    for r in range(max_page + 1):
        entries = {}
        for i in fp.essential:
            key = _pos(fp.level[i], fp.dims[i])
            entries[key] = entries.get(key, 0) + 1
        diffs = {}
        for a, b in fp.pairs:
            g = fp.gap((a, b))
            if g >= r:
                for c in (a, b):
                    key = _pos(fp.level[c], fp.dims[c])
                    entries[key] = entries.get(key, 0) + 1
            if g == r:
                src = _pos(fp.level[b], fp.dims[b])
                tgt = _pos(fp.level[a], fp.dims[a])
                diffs[(src, tgt)] = diffs.get((src, tgt), 0) + 1
        pages.append(SpectralPage(r, fp.m, {k: v for k, v in entries.items() if v}, diffs))
    return pages


def infinity_page(fp: FilteredPairing) -> SpectralPage:
    entries = {}
    for i in fp.essential:
        key = _pos(fp.level[i], fp.dims[i])
        entries[key] = entries.get(key, 0) + 1
    return SpectralPage("inf", fp.m, entries, {})


def spectral_sequence(m: int, max_page: int, complex=None, levels=None) -> list:
    """Pages ``0..max_page`` of the spectral sequence of the blowup, plus ``E^inf``.

    The last element is the ``E^inf`` page (``r == "inf"``); it equals page
    ``r`` for every ``r`` beyond the largest complexity gap.
    """
    from .complex import build_blowup
    from .filtration import blowup_levels
    if max_page < 0:
        raise DomainError("max_page must be nonnegative")
    if complex is None:
        complex = build_blowup(m)
    if levels is None:
        levels = blowup_levels(complex)
    fp = filtered_pairing(complex, levels)
    return pages_from_pairing(fp, max_page) + [infinity_page(fp)]


def reindex_point(m: int, p_, q_) -> tuple:
    return -p_, (3 * m - 4) - q_ + 2 * p_


def unreindex_point(m: int, p, q) -> tuple:
    p_ = -p
    return p_, (3 * m - 4) - q + 2 * p_


def reindex_cohomological(page: SpectralPage) -> SpectralPage:
    """Relocate entries by ``p = -p'``, ``q = (3m-4) - q' + 2p'``."""
    if page.reindexed:
        raise DomainError("page is already reindexed")
    f = lambda k: reindex_point(page.m, *k)
    return SpectralPage(page.r, page.m, {f(k): v for k, v in page.entries.items()},
                        {(f(s), f(t)): v for (s, t), v in page.differentials.items()}, True)


def unreindex(page: SpectralPage) -> SpectralPage:
    if not page.reindexed:
        raise DomainError("page is not reindexed")
    f = lambda k: unreindex_point(page.m, *k)
    return SpectralPage(page.r, page.m, {f(k): v for k, v in page.entries.items()},
                        {(f(s), f(t)): v for (s, t), v in page.differentials.items()}, False)


def ss_json(m: int, pages, reindexed: bool) -> str:
    out = []
    for pg in pages:
        pg = reindex_cohomological(pg) if reindexed else pg
        out.append(pg.to_dict())
    return json.dumps({"m": m, "pages": out, "reindexed": reindexed}, separators=(",", ":"),
                      sort_keys=True)
