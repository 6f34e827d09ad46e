"""Complexity of singular cells, isotopy classes and knot components.

Complexity is computed level by level in descending dimension.  Simple cells
take their double-point count.  Other cells take the largest complexity among
their singular codimension-one cofaces; a top cell of S_m that is not simple
gets 1, and a cell without any singular coface falls back to the number of
connected components of its self-intersection set.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from .combinatorics import CellName, osp_table
from .complex import dims_array, singular_flags, summaries
from .errors import DomainError
from .geometry import TRANSVERSE, branches_through, representative, pipes_of, singularity_report
from .kernels import coface_max, split_table

SIMPLE_BASE = "simple-base"
COFACE = "coface-recursion"
ORPHAN = "orphan-fallback"
FLAGS = (SIMPLE_BASE, COFACE, ORPHAN)


def is_simple(name: CellName) -> tuple:
    """``(simple, double_point_count)`` for a singular cell."""
    rep = singularity_report(name)
    if not rep:
        raise DomainError(f"{name} is not singular")
    if any(k != TRANSVERSE for k in rep.kinds):
        return False, 0
    pipes = pipes_of(representative(name))
    pts = [it.locus[0] for it in rep.intersections]
    # locus coordinates are in representative units already
    if len(set(pts)) != len(pts):
        return False, 0
    for pt in pts:
        if sum(len(b) for b in branches_through(pipes, pt)) != 2:
            return False, 0
    return True, len(pts)


@dataclass
class ComplexityTable:
    """Complexity and provenance for every singular cell of P_m.

    ``cx`` and ``flag`` are indexed by OSP-table cell id; nonsingular cells
    hold ``0`` and ``-1``.
    """

    m: int
    cx: np.ndarray
    flag: np.ndarray

    def __contains__(self, name: CellName) -> bool:
        return bool(self.flag[osp_table(self.m).id_of(name)] >= 0)

    def value(self, cid: int) -> int:
        if self.flag[cid] < 0:
            raise DomainError(f"cell {cid} is not singular")
        return int(self.cx[cid])

    def provenance(self, cid: int) -> str:
        return FLAGS[int(self.flag[cid])]

    def lookup(self, name: CellName) -> tuple:
        cid = osp_table(self.m).id_of(name)
        return self.value(cid), self.provenance(cid)

    @property
    def singular_ids(self) -> np.ndarray:
        return np.flatnonzero(self.flag >= 0)

    def orphans(self) -> np.ndarray:
        return np.flatnonzero(self.flag == FLAGS.index(ORPHAN))

    def max(self) -> int:
        return int(self.cx[self.singular_ids].max())

    def to_json(self, complex=None) -> str:
        """``{"m", "cx": [[cellId, p, flag], ...]}`` with ids of the S complex."""
        if complex is None:
            from .complex import build_complex
            complex = build_complex(self.m, "S")
        rows = [[i, int(self.cx[k]), FLAGS[int(self.flag[k])]] for i, k in enumerate(complex.keys)]
        return json.dumps({"m": self.m, "cx": rows}, separators=(",", ":"))


@lru_cache(maxsize=None)
def complexity_table(m: int) -> ComplexityTable:
    table = osp_table(m)
    hits, trans, clean = summaries(m)
    sing = hits > 0
    simple = sing & (hits == trans) & clean
    dims = dims_array(m)
    cx = np.zeros(len(sing), np.int64)
    flag = np.full(len(sing), -1, np.int64)
    cx[simple] = trans[simple]
    flag[simple] = 0
    top = sing & ~simple & (dims == 3 * m - 4)
    cx[top] = 1
    flag[top] = 0
    splits = split_table(table)
    # coface values: knot cells and not-yet-computed cells read as -1
    values = np.full(len(sing), -1, np.int64)
    values[flag >= 0] = cx[flag >= 0]
    for d in range(3 * m - 5, 2, -1):
        ids = np.flatnonzero(sing & ~simple & (dims == d))
        if not len(ids):
            continue
        best = coface_max(ids, values, splits, table.N)
        rec = best > 0
        cx[ids[rec]] = best[rec]
        flag[ids[rec]] = 1
        for cid in ids[~rec].tolist():
            cx[cid] = singularity_report(table.name(cid)).components
            flag[cid] = 2
        values[ids] = cx[ids]
    return ComplexityTable(m, cx, flag)


def complexity(name: CellName, table: ComplexityTable = None) -> int:
    if table is None:
        table = complexity_table(name.m)
    return table.lookup(name)[0]


class FiltrationLevel:
    """Cells of S_m with complexity at most ``p``, and their blowup lifts."""

    def __init__(self, m: int, p: int, table: ComplexityTable):
        self.m, self.p, self.table = m, p, table

    def contains(self, cell) -> bool:
        from .complex import BlowupCellName
        name = cell.base if isinstance(cell, BlowupCellName) else cell
        cid = osp_table(self.m).id_of(name)
        return bool(self.table.flag[cid] >= 0 and self.table.cx[cid] <= self.p)

    __contains__ = contains

    def ids(self) -> np.ndarray:
        t = self.table
        return np.flatnonzero((t.flag >= 0) & (t.cx <= self.p))

    def __iter__(self):
        table = osp_table(self.m)
        return (table.name(int(c)) for c in self.ids())

    def __len__(self) -> int:
        return len(self.ids())


def filtration_level(m: int, p: int, table: ComplexityTable = None) -> FiltrationLevel:
    """Selector for ``{cx <= p}``.

    Faces never have smaller complexity than their cofaces, so the
    subcomplexes are the complements ``{cx >= p}``; the spectral sequence uses
    those.
    """
    return FiltrationLevel(m, p, complexity_table(m) if table is None else table)


def blowup_levels(complex) -> np.ndarray:
    """Complexity of the base of each blowup cell."""
    t = complexity_table(complex.m)
    return np.array([t.cx[b] for b, _ in complex.keys], np.int64)


def base_levels(complex) -> np.ndarray:
    t = complexity_table(complex.m)
    return t.cx[np.asarray(complex.keys, np.int64)]


def _components(n: int, a, b):
    g = sp.coo_matrix((np.ones(len(a), np.int8), (a, b)), shape=(n, n))
    return connected_components(g, directed=False)


def _face_pairs(m: int, ids: np.ndarray):
    from .complex import _base_face_coo
    rows, cols, _ = _base_face_coo(osp_table(m), ids)
    return rows, cols


def isotopy_classes(m: int, p: int, table: ComplexityTable = None) -> list:
    """Cells of complexity exactly ``p`` grouped by shared complexity-``p`` faces.

    Returns a sorted list of sorted lists of OSP-table cell ids.
    """
    t = complexity_table(m) if table is None else table
    ids = np.flatnonzero((t.flag >= 0) & (t.cx == p))
    if not len(ids):
        return []
    rows, cols = _face_pairs(m, ids)
    keep = (t.flag[rows] >= 0) & (t.cx[rows] == p)
    local = np.full(len(t.cx), -1, np.int64)
    local[ids] = np.arange(len(ids))
    _, lab = _components(len(ids), local[rows[keep]], local[cols[keep]])
    groups = {}
    for cid, l in zip(ids.tolist(), lab.tolist()):
        groups.setdefault(l, []).append(cid)
    return sorted(groups.values())


@dataclass
class KnotComponents:
    m: int
    ids: np.ndarray      # knot cell ids (OSP table)
    labels: np.ndarray   # component label per entry of ids
    count: int

    def label_of(self, cid: int) -> int:
        k = np.searchsorted(self.ids, cid)
        if k >= len(self.ids) or self.ids[k] != cid:
            raise DomainError(f"cell {cid} is not a knot cell")
        return int(self.labels[k])

    def sizes(self) -> list:
        return np.bincount(self.labels, minlength=self.count).tolist()


@lru_cache(maxsize=None)
def knot_components(m: int) -> KnotComponents:
    """Connected components of the knot cells of P_m (adjacent through knot faces)."""
    sing = singular_flags(m)
    ids = np.flatnonzero(~sing)
    rows, cols = _face_pairs(m, ids)
    keep = ~sing[rows]
    local = np.full(len(sing), -1, np.int64)
    local[ids] = np.arange(len(ids))
    count, lab = _components(len(ids), local[rows[keep]], local[cols[keep]])
    # relabel in order of first appearance for determinism
    _, first = np.unique(lab, return_index=True)
    order = np.argsort(first)
    remap = np.empty(count, np.int64)
    remap[order] = np.arange(count)
    return KnotComponents(m, ids, remap[lab], int(count))
