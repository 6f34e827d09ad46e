"""Cell complexes of P_m, the discriminant S_m and its blowup.

Base cells are addressed by the integer ids of :class:`OSPTable`; blowup cells
by pairs ``(base_id, rho_mask)`` where bit ``b`` of ``rho_mask`` is the
transposition ``table.transposition(b)``.  A built :class:`CellComplex`
renumbers its cells ``0..n-1`` in lexicographic order of their names and keeps
the boundary as a sparse matrix (rows are faces, columns are cells).

Chains are Borel-Moore: faces leaving the open cube never occur because all
vertex coordinates stay strictly between 0 and 1 on every cell.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np
import scipy.sparse as sp

from .combinatorics import (CellName, DecoratedTransposition, canonicalize,
                            name_to_dict, name_from_dict, osp_table)
from .errors import CapacityError, DomainError
from .kernels import table_summaries

DEFAULT_MAX_CELLS = 5_000_000


# -- chains -------------------------------------------------------------------------

class Chain:
    """Sparse rational combination of cells; zero coefficients are dropped."""

    __slots__ = ("terms", "grade")

    def __init__(self, terms=None, grade=None):
        self.terms = {}
        self.grade = grade
        if terms:
            for k, v in (terms.items() if isinstance(terms, dict) else terms):
                self.add(k, v)

    def add(self, key, coef) -> None:
        v = self.terms.get(key, 0) + coef
        if v:
            self.terms[key] = v
        else:
            self.terms.pop(key, None)

    def __iter__(self):
        return iter(self.terms.items())

    def __len__(self) -> int:
        return len(self.terms)

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __getitem__(self, key):
        return self.terms.get(key, 0)

    def __eq__(self, other) -> bool:
        return isinstance(other, Chain) and self.terms == other.terms

    def __add__(self, other: "Chain") -> "Chain":
        out = Chain(self.terms, self.grade)
        for k, v in other.terms.items():
            out.add(k, v)
        return out

    def __neg__(self) -> "Chain":
        return Chain({k: -v for k, v in self.terms.items()}, self.grade)

    def __sub__(self, other: "Chain") -> "Chain":
        return self + (-other)

    def scale(self, c) -> "Chain":
        return Chain({k: c * v for k, v in self.terms.items()}, self.grade)

    def __repr__(self) -> str:
        return f"Chain({len(self.terms)} terms, grade={self.grade})"


# -- blowup cell names --------------------------------------------------------------

@dataclass(frozen=True)
class BlowupCellName:
    """A base cell together with a set of transpositions inside its classes."""

    base: CellName
    rho: frozenset = frozenset()

    def __post_init__(self):
        base = canonicalize(self.base)
        object.__setattr__(self, "base", base)
        object.__setattr__(self, "rho", frozenset(self.rho))
        for t in self.rho:
            if not any(c.direction == t.direction and t.pair <= c.indices
                       for c in base.partition.classes):
                raise DomainError(f"{t} is not supported on a class of {base}")
        if not self.rho and not base.is_top:
            raise DomainError("empty rho only names top cells")

    @property
    def m(self) -> int:
        return self.base.m

    @property
    def dim(self) -> int:
        if not self.rho:
            return self.base.dim
        return self.base.dim + len(self.rho) - 1

    def sorted_rho(self) -> list:
        return sorted(self.rho)

    def key(self) -> tuple:
        return self.base.key() + (tuple((t.dir_index, t.a, t.b) for t in self.sorted_rho()),)

    def __lt__(self, other: "BlowupCellName") -> bool:
        return self.key() < other.key()

    def __str__(self) -> str:
        inner = ", ".join(map(str, self.sorted_rho()))
        return f"~{self.base}[{inner}]"


def blowup_name_to_dict(cell: BlowupCellName) -> dict:
    d = name_to_dict(cell.base)
    d["rho"] = [{"dir": t.direction, "pair": [t.a, t.b]} for t in cell.sorted_rho()]
    return d


def blowup_name_from_dict(data: dict) -> BlowupCellName:
    rho = frozenset(DecoratedTransposition.of(r["pair"][0], r["pair"][1], r["dir"])
                    for r in data.get("rho", ()))
    return BlowupCellName(name_from_dict(data), rho)


def encode_blowup(cell: BlowupCellName) -> tuple:
    table = osp_table(cell.m)
    mask = 0
    for t in cell.rho:
        mask |= 1 << table.bit_of(t)
    return table.id_of(cell.base), mask


def decode_blowup(m: int, cid: int, mask: int) -> BlowupCellName:
    table = osp_table(m)
    rho = frozenset(table.transposition(b) for b in iter_bits(mask))
    return BlowupCellName(table.name(cid), rho)


def project(cell: BlowupCellName) -> CellName:
    """Forget the simplex coordinate."""
    return cell.base


def iter_bits(mask: int):
    b = 0
    while mask:
        if mask & 1:
            yield b
        mask >>= 1
        b += 1


def popcount(mask: int) -> int:
    return bin(mask).count("1")


# -- per-m cached data --------------------------------------------------------------

@lru_cache(maxsize=None)
def summaries(m: int):
    """Kernel summaries ``(hits, transverse, clean)`` over all cells of P_m."""
    table = osp_table(m)
    return table_summaries(table)


def singular_flags(m: int) -> np.ndarray:
    return summaries(m)[0] > 0


def dims_array(m: int) -> np.ndarray:
    t = osp_table(m)
    nb = t.nblocks
    return (nb[:, None, None] + nb[None, :, None] + nb[None, None, :]).ravel()


def sign_of_perm(seq) -> int:
    seq = list(seq)
    s = 1
    for i in range(len(seq)):
        for j in range(i + 1, len(seq)):
            if seq[i] > seq[j]:
                s = -s
    return s


def ambient_sign(m: int, cid: int) -> int:
    """Orientation of a top cell relative to the standard orientation of the cube."""
    table = osp_table(m)
    s = 1
    for i in table.split_id(cid):
        s *= sign_of_perm(sum(table.osps[i], ()))
    return s


def blowup_faces(table, cid: int, mask: int) -> list:
    """Signed faces ``(coef, (base, mask))`` of the blowup cell ``(cid, mask)``."""
    out = [(s, (f, mask)) for s, f in table.faces(cid)]
    if mask & (mask - 1):
        base = -1 if table.dim(cid) % 2 else 1
        for j, b in enumerate(iter_bits(mask)):
            out.append((base * (-1) ** j, (cid, mask & ~(1 << b))))
    return out


def blowup_dim(table, cid: int, mask: int) -> int:
    return table.dim(cid) + popcount(mask) - 1


# -- complexes ----------------------------------------------------------------------

def _check_m(m: int) -> None:
    if not isinstance(m, (int, np.integer)) or m < 3:
        raise DomainError(f"m must be an integer >= 3, got {m!r}")


def _name_key(table, cid: int) -> tuple:
    ix, iy, iz = table.split_id(cid)
    o = table.osps
    seqs = tuple(sum(o[i], ()) for i in (ix, iy, iz))
    classes = tuple((d, b) for d, i in enumerate((ix, iy, iz)) for b in sorted(o[i]) if len(b) > 1)
    return seqs + (tuple(sorted(classes)),)


class CellComplex:
    """A finite complex with cells numbered in lexicographic name order.

    ``keys[i]`` is the table id (space P or S) or ``(base_id, mask)`` (space B)
    of cell ``i``.  ``matrix[f, c]`` is the incidence of face ``f`` in ``c``.
    """

    def __init__(self, m: int, space: str, keys: list, dims: np.ndarray, matrix):
        self.m = m
        self.space = space
        self.keys = keys
        self.dims = np.asarray(dims, dtype=np.int64)
        self.matrix = matrix.tocsc()
        self.index = {k: i for i, k in enumerate(keys)}
        self.table = osp_table(m)

    def __len__(self) -> int:
        return len(self.keys)

    @property
    def is_blowup(self) -> bool:
        return self.space == "B"

    def cells_of_dim(self, k: int) -> np.ndarray:
        return np.flatnonzero(self.dims == k)

    def name(self, i: int):
        key = self.keys[i]
        if self.is_blowup:
            return decode_blowup(self.m, *key)
        return self.table.name(key)

    def id_of(self, cell) -> int:
        if isinstance(cell, BlowupCellName):
            if not self.is_blowup:
                raise KeyError(f"{cell} is a blowup cell but the complex is {self.space}")
            key = encode_blowup(cell)
        else:
            if self.is_blowup:
                raise KeyError(f"{cell} is not a blowup cell")
            key = self.table.id_of(cell)
        if key not in self.index:
            raise KeyError(f"{cell} is not a cell of this complex")
        return self.index[key]

    def boundary_ids(self, i: int) -> list:
        col = self.matrix.getcol(i)
        return sorted(zip(col.indices.tolist(), col.data.tolist()))

    def boundary(self, cell) -> Chain:
        i = self.id_of(cell)
        return Chain({self.name(f): c for f, c in self.boundary_ids(i)}, int(self.dims[i]) - 1)

    def boundary_matrix(self, k: int):
        """Sparse matrix of the boundary from dimension ``k`` to ``k - 1``."""
        cols = self.cells_of_dim(k)
        rows = self.cells_of_dim(k - 1)
        return self.matrix[rows][:, cols]

    def d2_defects(self) -> int:
        """Number of nonzero entries of the composite boundary."""
        sq = (self.matrix @ self.matrix).tocoo()
        return int(np.count_nonzero(sq.data))

    def counts_by_dim(self) -> dict:
        vals, cnt = np.unique(self.dims, return_counts=True)
        return {int(v): int(c) for v, c in zip(vals, cnt)}

    def write_jsonl(self, fh) -> None:
        mat = self.matrix
        for i in range(len(self)):
            name = self.name(i)
            nd = blowup_name_to_dict(name) if self.is_blowup else name_to_dict(name)
            lo, hi = mat.indptr[i], mat.indptr[i + 1]
            bd = sorted(zip(mat.indices[lo:hi].tolist(), mat.data[lo:hi].tolist()))
            fh.write(json.dumps({"id": i, "dim": int(self.dims[i]), "name": nd,
                                 "boundary": [[int(f), int(c)] for f, c in bd]},
                                separators=(",", ":")) + "\n")


def _base_face_coo(table, ids: np.ndarray):
    """Vectorized (face_id, cell_id, sign) triples for base cells ``ids``."""
    N = table.N
    ix, rest = np.divmod(ids, N * N)
    iy, iz = np.divmod(rest, N)
    maxm = max(len(x) for x in table.merges)
    tgt = np.full((N, max(maxm, 1)), -1, np.int64)
    sgn = np.zeros((N, max(maxm, 1)), np.int64)
    for i, lst in enumerate(table.merges):
        for j, (s, t) in enumerate(lst):
            tgt[i, j], sgn[i, j] = t, s
    nb = table.nblocks
    rows, cols, vals = [], [], []
    parts = ((ix, np.zeros_like(ix)), (iy, nb[ix]), (iz, nb[ix] + nb[iy]))
    for d, (own, prefix) in enumerate(parts):
        for j in range(tgt.shape[1]):
            t = tgt[own, j]
            ok = t >= 0
            new = [ix[ok], iy[ok], iz[ok]]
            new[d] = t[ok]
            rows.append((new[0] * N + new[1]) * N + new[2])
            cols.append(ids[ok])
            vals.append(sgn[own[ok], j] * np.where(prefix[ok] % 2, -1, 1))
    return np.concatenate(rows), np.concatenate(cols), np.concatenate(vals)


def _order_base(table, ids: np.ndarray) -> np.ndarray:
    keys = [_name_key(table, int(c)) for c in ids]
    order = sorted(range(len(ids)), key=keys.__getitem__)
    return ids[np.array(order, dtype=np.int64)]


def build_complex(m: int, space: str = "P", max_cells: int = DEFAULT_MAX_CELLS) -> CellComplex:
    """Cell complex of P_m (``space="P"``) or of the discriminant S_m (``"S"``)."""
    _check_m(m)
    if space not in ("P", "S"):
        raise DomainError(f"space must be P or S, got {space!r}")
    table_size = osp_table(m).N ** 3 if m <= 6 else None
    if table_size is None or table_size > max_cells and space == "P":
        from .combinatorics import fubini
        raise CapacityError(f"P_{m}", fubini(m - 1) ** 3, max_cells)
    table = osp_table(m)
    ids = np.arange(table.N ** 3, dtype=np.int64)
    if space == "S":
        ids = ids[singular_flags(m)]
    if len(ids) > max_cells:
        raise CapacityError(f"{space}_{m}", len(ids), max_cells)
    ids = _order_base(table, ids)
    pos = np.full(table.N ** 3, -1, np.int64)
    pos[ids] = np.arange(len(ids))
    rows, cols, vals = _base_face_coo(table, ids)
    if np.any(pos[rows] < 0):
        raise AssertionError("a face of a singular cell is not singular")
    n = len(ids)
    mat = sp.csc_matrix((vals, (pos[rows], pos[cols])), shape=(n, n), dtype=np.int64)
    return CellComplex(m, space, ids.tolist(), dims_array(m)[ids], mat)


def blowup_size(m: int) -> int:
    """Number of cells of the blowup complex, without building it."""
    table = osp_table(m)
    p = table.npairs
    tm = table.tmask
    pc = np.array([popcount(int(x)) for x in tm], np.int64)
    tot = (pc[:, None, None] + pc[None, :, None] + pc[None, None, :]).ravel()
    return int(((2 ** tot - 1) * singular_flags(m)).sum()) if p else 0


def build_blowup(m: int, max_cells: int = DEFAULT_MAX_CELLS) -> CellComplex:
    """Cell complex of the blowup: one cell per singular base and nonempty rho."""
    _check_m(m)
    if m > 6:
        raise CapacityError(f"blowup of S_{m}", -1, max_cells)
    size = blowup_size(m)
    if size > max_cells:
        raise CapacityError(f"blowup of S_{m}", size, max_cells)
    table = osp_table(m)
    sing = np.flatnonzero(singular_flags(m))
    sing = _order_base(table, sing)
    keys = []
    for cid in sing.tolist():
        full = table.full_tmask(cid)
        subs = []
        sub = full
        while sub:
            subs.append(sub)
            sub = (sub - 1) & full
        subs.sort(key=lambda s: [b for b in iter_bits(s)])
        keys.extend((cid, s) for s in subs)
    index = {k: i for i, k in enumerate(keys)}
    rows, cols, vals, dims = [], [], [], []
    for i, (cid, mask) in enumerate(keys):
        dims.append(blowup_dim(table, cid, mask))
        for s, f in blowup_faces(table, cid, mask):
            rows.append(index[f])
            cols.append(i)
            vals.append(s)
    n = len(keys)
    mat = sp.csc_matrix((np.array(vals, np.int64), (np.array(rows), np.array(cols))),
                        shape=(n, n), dtype=np.int64)
    return CellComplex(m, "B", keys, np.array(dims), mat)


def boundary(cell, complex: CellComplex) -> Chain:
    """Signed codimension-one faces of ``cell`` inside ``complex``."""
    return complex.boundary(cell)


def boundary_of(cell) -> Chain:
    """Boundary computed directly from the cell, without a built complex."""
    if isinstance(cell, BlowupCellName):
        table = osp_table(cell.m)
        cid, mask = encode_blowup(cell)
        return Chain({decode_blowup(cell.m, f, msk): s for s, (f, msk) in blowup_faces(table, cid, mask)},
                     cell.dim - 1)
    table = osp_table(cell.m)
    cid = table.id_of(cell)
    return Chain({table.name(f): s for s, f in table.faces(cid)}, cell.dim - 1)


def star_d2_defects(m: int, cells) -> int:
    """Count nonzero entries of d(d(c)) for blowup cells ``(base, mask)``."""
    table = osp_table(m)
    sing = singular_flags(m)
    bad = 0
    for cid, mask in cells:
        acc = {}
        for s, f in blowup_faces(table, cid, mask):
            if not sing[f[0]]:
                bad += 1
            for s2, g in blowup_faces(table, *f):
                acc[g] = acc.get(g, 0) + s * s2
        bad += sum(1 for v in acc.values() if v)
    return bad


def base_star_d2_defects(m: int, ids, singular_only: bool = False) -> int:
    table = osp_table(m)
    sing = singular_flags(m)
    bad = 0
    for cid in ids:
        acc = {}
        for s, f in table.faces(int(cid)):
            if singular_only and not sing[f]:
                bad += 1
            for s2, g in table.faces(f):
                acc[g] = acc.get(g, 0) + s * s2
        bad += sum(1 for v in acc.values() if v)
    return bad


def fraction_str(q) -> str:
    q = Fraction(q)
    return f"{q.numerator}/{q.denominator}"
