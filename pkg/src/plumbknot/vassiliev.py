"""Coboundaries, Vassiliev derivatives and Taylor chains on the blowup.

A blowup cell ``(e, rho)`` of dimension ``3m - 4`` has a nonzero total
coboundary exactly when, for every class ``C`` of ``e``, the transpositions of
``rho`` inside ``C`` form a Hamiltonian path on ``C``.  Each class is then
resolved by reading its vertices along the path in one of two directions; the
"+" direction is the one giving the lexicographically smaller permutation,
i.e. the one starting at the smaller endpoint.  Coefficients are ``1`` for "+"
and ``-(-1)**|C|`` for "-".

The sign ``(-1)**o`` of a Taylor chain term is fixed on walls so that the chain
projects to the Alexander dual of the invariant, and is carried to deeper
cells by requiring the internal faces of the lift of each knot chamber's
boundary to cancel.  :class:`OrientationSigns` records every disagreement
between the possible propagation routes.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .combinatorics import AdmissibleSet, CellName, DIRECTIONS, osp_table
from .complex import (BlowupCellName, Chain, ambient_sign, blowup_faces, decode_blowup,
                      encode_blowup, iter_bits, popcount, singular_flags, fraction_str)
from .errors import CycleCheckError, DomainError
from .geometry import TRANSVERSE, pipes_of, representative, singularity_report


# -- paths on classes ---------------------------------------------------------------

def hamiltonian_order(block: tuple, edges: list):
    """Vertices of ``block`` along the path formed by ``edges``, starting at the
    smaller endpoint; ``None`` if the edges are not a Hamiltonian path."""
    if len(edges) != len(block) - 1:
        return None
    adj = {v: [] for v in block}
    for a, b in edges:
        adj[a].append(b)
        adj[b].append(a)
    ends = [v for v in block if len(adj[v]) == 1]
    if any(len(x) > 2 for x in adj.values()) or len(ends) != 2:
        return None
    order, prev, cur = [min(ends)], None, min(ends)
    while len(order) < len(block):
        nxt = [v for v in adj[cur] if v != prev][0]
        order.append(nxt)
        prev, cur = cur, nxt
    return tuple(order)


def minus_coefficient(size: int) -> int:
    return -((-1) ** size)


@dataclass(frozen=True)
class ClassInfo:
    dir: int
    pos: int            # block position in that direction
    block: tuple        # sorted vertices
    order: tuple        # "+" path order, or None if not Hamiltonian
    bits: tuple         # mask bits of rho inside the class, increasing


def class_infos(table, cid: int, mask: int) -> list:
    """Classes of base ``cid`` with the restriction of ``rho`` to each."""
    out = []
    p = table.npairs
    for d, i in enumerate(table.split_id(cid)):
        for j, b in enumerate(table.osps[i]):
            if len(b) < 2:
                continue
            bits, edges = [], []
            for a, c in _pairs(b):
                bit = d * p + table.pair_index[(a, c)]
                if mask >> bit & 1:
                    bits.append(bit)
                    edges.append((a, c))
            out.append(ClassInfo(d, j, b, hamiltonian_order(b, edges), tuple(bits)))
    return out


def _pairs(b):
    return [(b[i], b[k]) for i in range(len(b)) for k in range(i + 1, len(b))]


def _resolve(table, cid: int, infos: list, signs: tuple) -> int:
    """Top cell reached by ordering each class along its path (+1) or reversed (-1)."""
    osps = [list(table.osps[i]) for i in table.split_id(cid)]
    # process classes right to left inside a direction so positions stay valid
    for info, s in sorted(zip(infos, signs), key=lambda t: (t[0].dir, -t[0].pos)):
        order = info.order if s > 0 else info.order[::-1]
        osps[info.dir][info.pos:info.pos + 1] = [(v,) for v in order]
    return table.cell_id(*(table.index[tuple(o)] for o in osps))


def resolutions(table, cid: int, mask: int) -> list:
    """``[(coef, top_id, signs), ...]`` of the total coboundary, or ``[]``."""
    infos = class_infos(table, cid, mask)
    if not infos or any(i.order is None for i in infos):
        return []
    if sum(len(i.bits) for i in infos) != popcount(mask):
        return []
    out = []
    n = len(infos)
    for code in range(2 ** n):
        signs = tuple(-1 if code >> (n - 1 - k) & 1 else 1 for k in range(n))
        coef = 1
        for info, s in zip(infos, signs):
            if s < 0:
                coef *= minus_coefficient(len(info.block))
        out.append((coef, _resolve(table, cid, infos, signs), signs))
    return out


# -- public coboundary API ----------------------------------------------------------

def _class_position(cell: BlowupCellName, C: AdmissibleSet):
    table = osp_table(cell.m)
    cid, mask = encode_blowup(cell)
    for info in class_infos(table, cid, mask):
        if DIRECTIONS[info.dir] == C.direction and set(info.block) == set(C.indices):
            return table, cid, mask, info
    raise DomainError(f"{C} is not a class of {cell.base}")


def class_coboundary(cell: BlowupCellName, C: AdmissibleSet) -> Chain:
    """Resolve one class of ``cell``: ``e[+] - (-1)^|C| e[-]`` with ``rho(C)`` removed.

    Zero if ``rho(C)`` is not a Hamiltonian path on ``C``.  A resolved cell
    whose remaining ``rho`` is empty while classes remain is not a cell of the
    blowup and contributes nothing.
    """
    table, cid, mask, info = _class_position(cell, C)
    out = Chain(grade=cell.dim)
    if info.order is None:
        return out
    rest = mask
    for b in info.bits:
        rest &= ~(1 << b)
    for s in (1, -1):
        new = _resolve(table, cid, [info], (s,))
        coef = 1 if s > 0 else minus_coefficient(len(info.block))
        name = table.name(new)
        if rest == 0 and not name.is_top:
            continue
        out.add(decode_blowup(cell.m, new, rest), coef)
    return out


def total_coboundary(cell: BlowupCellName) -> Chain:
    """Signed combination of the ``2^n`` knot top cells obtained by resolving all classes."""
    m = cell.m
    if cell.dim != 3 * m - 4:
        raise DomainError(f"total coboundary needs dimension {3 * m - 4}, got {cell.dim}")
    table = osp_table(m)
    cid, mask = encode_blowup(cell)
    out = Chain(grade=3 * m - 3)
    for coef, top, _ in resolutions(table, cid, mask):
        out.add(table.name(top), coef)
    return out


def compose_coboundaries(cell: BlowupCellName, classes) -> Chain:
    """Apply :func:`class_coboundary` for ``classes`` in the given order."""
    chain = Chain({cell: 1})
    for C in classes:
        nxt = Chain()
        for c, coef in chain:
            if c.rho or not c.base.is_top:
                nxt = nxt + class_coboundary(c, C).scale(coef)
        chain = nxt
    return Chain({c.base: v for c, v in chain})


def vassiliev_derivative(invariant, cell: BlowupCellName) -> Fraction:
    """The invariant evaluated on the total coboundary of ``cell``."""
    total = Fraction(0)
    for top, coef in total_coboundary(cell):
        total += coef * invariant.evaluate(top)
    return total


# -- orientation signs --------------------------------------------------------------

def _merge_incidence(table, coface: int, d: int, j: int) -> int:
    """Incidence of the face merging blocks ``j, j+1`` (direction ``d``) of ``coface``."""
    idx = table.split_id(coface)
    prefix = sum(int(table.nblocks[idx[k]]) for k in range(d))
    return (-1) ** (j + 1) * (-1) ** prefix


class OrientationSigns:
    """Memoized signs ``(-1)**o`` on Hamiltonian cells of dimension ``3m - 4``."""

    def __init__(self, m: int):
        self.m = m
        self.table = osp_table(m)
        self.sing = singular_flags(m)
        self.memo = {}
        self.undetermined = set()

    def _coef(self, infos, top_orders) -> int:
        c = 1
        for info in infos:
            if top_orders[info] != info.order:
                c *= minus_coefficient(len(info.block))
        return c

    def candidates(self, cid: int, mask: int, first_only: bool = False) -> list:
        """Every sign value the propagation rule yields for ``(cid, mask)``.

        Entries are ``(top_id, bit, sign)``; walls yield one entry per side.
        """
        table = self.table
        infos = class_infos(table, cid, mask)
        if not infos or any(i.order is None for i in infos):
            raise DomainError("orientation signs live on cells with Hamiltonian rho")
        out = []
        dim_e = table.dim(cid)
        bits_all = list(iter_bits(mask))
        for coef_t, top, signs in resolutions(table, cid, mask):
            orders = {info: (info.order if s > 0 else info.order[::-1]) for info, s in zip(infos, signs)}
            if len(infos) == 1 and len(infos[0].block) == 2:
                info = infos[0]
                inc = _merge_incidence(table, top, info.dir, info.pos)
                out.append((top, None, ambient_sign(self.m, top) * inc * coef_t))
                if first_only:
                    return out
                continue
            for info in infos:
                order = orders[info]
                for k in range(len(order) - 1):
                    a, b = sorted((order[k], order[k + 1]))
                    bit = info.dir * table.npairs + table.pair_index[(a, b)]
                    A, B = tuple(sorted(order[:k + 1])), tuple(sorted(order[k + 1:]))
                    idx = list(table.split_id(cid))
                    o = table.osps[idx[info.dir]]
                    idx[info.dir] = table.index[o[:info.pos] + (A, B) + o[info.pos + 1:]]
                    split = table.cell_id(*idx)
                    if not self.sing[split]:
                        continue
                    rest = mask & ~(1 << bit)
                    s_split = self.sign(split, rest)
                    sub = class_infos(table, split, rest)
                    sub_orders = {}
                    for si in sub:
                        pos_in = {v: n for n, v in enumerate(orders_lookup(orders, si))}
                        sub_orders[si] = tuple(sorted(si.block, key=pos_in.__getitem__))
                    c_split = s_split * self._coef(sub, sub_orders)
                    inc_ext = _merge_incidence(table, split, info.dir, info.pos)
                    inc_int = (-1) ** dim_e * (-1) ** bits_all.index(bit)
                    c_here = -c_split * inc_ext * inc_int
                    out.append((top, bit, c_here * coef_t))
                    if first_only:
                        return out
        return out

    def sign(self, cid: int, mask: int) -> int:
        key = (cid, mask)
        if key not in self.memo:
            cands = self.candidates(cid, mask, first_only=True)
            if cands:
                self.memo[key] = cands[0][2]
            else:
                self.undetermined.add(key)
                self.memo[key] = 1
        return self.memo[key]

    def inconsistencies(self, cells) -> list:
        """Cells whose propagation routes disagree, as ``(cid, mask, values)``."""
        bad = []
        for cid, mask in cells:
            vals = {c[2] for c in self.candidates(cid, mask)}
            if len(vals) > 1:
                bad.append((cid, mask, sorted(vals)))
        return bad


def orders_lookup(orders: dict, sub) -> tuple:
    """The top-cell order restricted to the vertices of ``sub``."""
    for info, order in orders.items():
        if info.dir == sub.dir and set(sub.block) <= set(info.block):
            return tuple(v for v in order if v in sub.block)
    raise KeyError(sub)


@lru_cache(maxsize=None)
def orientation_signs(m: int) -> OrientationSigns:
    return OrientationSigns(m)


def orientation_sign(cell: BlowupCellName) -> int:
    return orientation_signs(cell.m).sign(*encode_blowup(cell))


# -- enumerating derivative cells ---------------------------------------------------

@lru_cache(maxsize=None)
def _direction_resolutions(m: int):
    """Per OSP row: list of ``(mask_bits, [(coef, perm_row), ...])`` over Hamiltonian choices."""
    table = osp_table(m)
    out = []
    for o in table.osps:
        classes = [(j, b) for j, b in enumerate(o) if len(b) > 1]
        per_class = []
        for j, b in classes:
            opts = []
            for order in _paths(b):
                bits = 0
                for u, v in zip(order, order[1:]):
                    bits |= 1 << table.pair_index[tuple(sorted((u, v)))]
                opts.append((bits, order))
            per_class.append(opts)
        choices = [(0, [(1, table.index[o])])] if not classes else []
        if classes:
            for combo in _product(per_class):
                bits = 0
                for bb, _ in combo:
                    bits |= bb
                res = []
                n = len(combo)
                for code in range(2 ** n):
                    coef, blocks = 1, list(o)
                    for k in range(n - 1, -1, -1):
                        j, b = classes[k]
                        order = combo[k][1]
                        if code >> (n - 1 - k) & 1:
                            order = order[::-1]
                            coef *= minus_coefficient(len(b))
                        blocks[j:j + 1] = [(v,) for v in order]
                    res.append((coef, table.index[tuple(blocks)]))
                choices.append((bits, res))
        out.append(choices)
    return out


def _paths(block):
    """Hamiltonian paths on ``block`` as "+"-oriented vertex orders."""
    from itertools import permutations
    seen = []
    for perm in permutations(block):
        if perm[0] < perm[-1]:
            seen.append(perm)
    return seen


def _product(lists):
    from itertools import product
    return product(*lists)


def derivative_table(m: int, values: np.ndarray, cells=None) -> dict:
    """Nonzero Vassiliev derivatives ``{(cid, mask): value}`` of a top-cell function.

    ``values`` is indexed by OSP-table cell id (only top cells are read).  By
    default every singular base is scanned; ``cells`` restricts to given bases.
    """
    table = osp_table(m)
    N, p = table.N, table.npairs
    dres = _direction_resolutions(m)
    sing = singular_flags(m)
    bases = np.flatnonzero(sing) if cells is None else np.asarray(cells, np.int64)
    out = {}
    vals = values.reshape(N, N, N)
    for cid in bases.tolist():
        ix, iy, iz = table.split_id(cid)
        for mx, rx in dres[ix]:
            for my, ry in dres[iy]:
                for mz, rz in dres[iz]:
                    tot = 0
                    for ca, a in rx:
                        for cb, b in ry:
                            for cc, c in rz:
                                v = vals[a, b, c]
                                if v:
                                    tot += ca * cb * cc * v
                    if tot:
                        out[(cid, mx | (my << p) | (mz << (2 * p)))] = tot
    return out


def derivative_table_fast(m: int, values: np.ndarray) -> dict:
    """Same as :func:`derivative_table` using dense tensor contractions per base."""
    table = osp_table(m)
    N, p = table.N, table.npairs
    dres = _direction_resolutions(m)
    sing = singular_flags(m).reshape(N, N, N)
    vals = np.asarray(values).reshape(N, N, N)
    dtype = object if vals.dtype == object else np.int64
    mats = []
    for choices in dres:
        M = np.zeros((len(choices), N), dtype=dtype)
        for r, (_, res) in enumerate(choices):
            for c, t in res:
                M[r, t] += c
        mats.append((np.array([b for b, _ in choices], np.int64), M))
    out = {}
    for ix in range(N):
        if not sing[ix].any():
            continue
        bx, Mx = mats[ix]
        A1 = np.tensordot(Mx, vals, axes=(1, 0))          # (rx, N, N)
        for iy in range(N):
            if not sing[ix, iy].any():
                continue
            by, My = mats[iy]
            A2 = np.tensordot(A1, My, axes=(1, 1))        # (rx, N, ry)
            for iz in np.flatnonzero(sing[ix, iy]).tolist():
                bz, Mz = mats[iz]
                D = np.tensordot(A2, Mz, axes=(1, 1))     # (rx, ry, rz)
                nz = np.argwhere(D != 0)
                if not len(nz):
                    continue
                cid = (ix * N + iy) * N + iz
                for a, b, c in nz.tolist():
                    out[(cid, int(bx[a]) | (int(by[b]) << p) | (int(bz[c]) << (2 * p)))] = D[a, b, c]
    return out


# -- Taylor chains ------------------------------------------------------------------

@dataclass
class TaylorChain:
    invariant: str
    m: int
    terms: dict                  # (cid, mask) -> Fraction
    verified_cycle: object = None
    defect: dict = field(default_factory=dict)

    def chain(self) -> Chain:
        return Chain({decode_blowup(self.m, *k): v for k, v in self.terms.items()}, 3 * self.m - 4)

    def to_json(self, complex=None) -> str:
        if complex is not None:
            rows = sorted([complex.index[k], fraction_str(v)] for k, v in self.terms.items())
        else:
            rows = sorted([[k[0], k[1]], fraction_str(v)] for k, v in self.terms.items())
        return json.dumps({"invariant": self.invariant, "m": self.m, "terms": rows,
                           "verified_cycle": self.verified_cycle}, separators=(",", ":"))


def chain_boundary(m: int, terms: dict) -> dict:
    """Boundary of a blowup chain given as ``{(cid, mask): coef}``."""
    table = osp_table(m)
    acc = {}
    for key, v in terms.items():
        for s, f in blowup_faces(table, *key):
            nv = acc.get(f, 0) + s * v
            if nv:
                acc[f] = nv
            else:
                acc.pop(f, None)
    return acc


def taylor_terms(m: int, values: np.ndarray, signs: OrientationSigns = None) -> dict:
    """Taylor chain coefficients ``sign * derivative`` for a top-cell function."""
    if signs is None:
        signs = orientation_signs(m)
    der = derivative_table_fast(m, values)
    return {k: Fraction(v) * signs.sign(*k) for k, v in sorted(der.items())}


def taylor_series(invariant, m: int, verify: bool = True, raise_on_failure: bool = True) -> TaylorChain:
    """Taylor chain of ``invariant`` at ``m``; checks ``d = 0`` when ``verify``."""
    from .invariants import top_values
    values = top_values(invariant, m)
    terms = taylor_terms(m, values)
    tc = TaylorChain(invariant.id, m, terms)
    if verify:
        defect = chain_boundary(m, terms)
        tc.verified_cycle = not defect
        tc.defect = defect
        if defect and raise_on_failure:
            face = min(defect)
            raise CycleCheckError(
                f"Taylor chain of {invariant.id} at m={m} is not a cycle "
                f"({len(defect)} faces, e.g. {decode_blowup(m, *face)})",
                face=decode_blowup(m, *face), coefficient=defect[face])
    return tc


# -- stable cells and chord diagrams ------------------------------------------------

@dataclass(frozen=True)
class ChordDiagram:
    """Chords on an oriented interval; endpoints are ranks ``0..2k-1``."""

    chords: tuple

    def __len__(self) -> int:
        return len(self.chords)

    def to_dict(self) -> dict:
        return {"chords": [list(c) for c in self.chords]}


def _parameter(pipe, pt) -> Fraction:
    a = pipe.axis
    lo, hi = pipe.start[a], pipe.end[a]
    frac = Fraction(0) if hi == lo else (pt[a] - lo) / (hi - lo)
    return pipe.index - 1 + frac


def singular_points(name: CellName) -> list:
    """``[(point, sorted pipe indices through it), ...]`` or ``None`` if not stable."""
    rep = singularity_report(name)
    if not rep:
        return None
    if any(not it.is_point for it in rep.intersections):
        return None
    pipes = pipes_of(representative(name))
    pts = {}
    for it in rep.intersections:
        pts.setdefault(it.locus[0], set()).update(it.pipes)
    out = []
    for pt, idx in pts.items():
        through = sorted(p.index for p in pipes
                         if all(l <= c <= h for l, c, h in zip(*p.box(), pt)))
        out.append((pt, through))
    return out


def stability(name: CellName):
    """``(double, triple, points)`` if ``name`` is stable, else ``None``."""
    pts = singular_points(name)
    if pts is None:
        return None
    rep = singularity_report(name)
    double = triple = 0
    moves_seen = set()
    for pt, through in pts:
        pairs = [it for it in rep.intersections if it.locus[0] == pt]
        if any(it.kind != TRANSVERSE for it in pairs):
            return None
        if len(through) == 2 and len(pairs) == 1:
            double += 1
        elif len(through) == 3 and len(pairs) == 3 and len({(i - 1) % 3 for i in through}) == 3:
            triple += 1
        else:
            return None
        moves = {(i - 1) // 3 for i in through}
        if moves & moves_seen:
            return None
        moves_seen |= moves
    classes = name.partition.classes
    if any(len(c) != 2 for c in classes) or len(classes) != double + 3 * triple:
        return None
    return double, triple, pts


@lru_cache(maxsize=None)
def stable_cells(m: int) -> dict:
    """``{cell id: (double, triple)}`` for every stable cell of S_m.

    Stable cells have only two-element classes and only transverse
    intersections, which the kernel summaries screen for cheaply.
    """
    from .complex import summaries
    table = osp_table(m)
    hits, trans, _ = summaries(m)
    pairs_only = np.array([all(len(b) <= 2 for b in o) for o in table.osps])
    nclass = np.array([sum(len(b) == 2 for b in o) for o in table.osps])
    ok = pairs_only[:, None, None] & pairs_only[None, :, None] & pairs_only[None, None, :]
    # one class per intersecting pair: double points and triple points alike
    count = nclass[:, None, None] + nclass[None, :, None] + nclass[None, None, :]
    cand = np.flatnonzero(ok.ravel() & (hits > 0) & (hits == trans) & (count.ravel() == hits))
    out = {}
    for cid in cand.tolist():
        st = stability(table.name(cid))
        if st is not None:
            out[cid] = st[:2]
    return out


def is_stable(name: CellName) -> bool:
    return stability(name) is not None


def chord_diagram_of(name: CellName) -> ChordDiagram:
    """Chords joining the preimages of each double point (three per triple point)."""
    st = stability(name)
    if st is None:
        raise DomainError(f"{name} is not stable")
    pipes = {p.index: p for p in pipes_of(representative(name))}
    ends = []  # (parameter, tiebreak, chord id)
    chord = 0
    for pt, through in st[2]:
        params = {i: _parameter(pipes[i], pt) for i in through}
        for a in range(len(through)):
            for b in range(a + 1, len(through)):
                i, j = through[a], through[b]
                ends.append((params[i], j, chord))
                ends.append((params[j], i, chord))
                chord += 1
    ends.sort()
    pos = {}
    for r, (_, _, c) in enumerate(ends):
        pos.setdefault(c, []).append(r)
    return ChordDiagram(tuple(sorted(tuple(v) for v in pos.values())))


# -- minimal cycles -----------------------------------------------------------------

def minimal_cycle(cell: BlowupCellName, complex=None, levels=None) -> Chain:
    """The cycle of the complexity-``n`` graded piece grown from ``cell``.

    Cells of dimension ``3m - 4`` and complexity ``n`` are joined through shared
    faces of complexity ``n``; the coefficients solve ``d_0 = 0`` with the
    coefficient of ``cell`` equal to 1.
    """
    from .complex import build_blowup
    from .filtration import blowup_levels
    m = cell.m
    if not is_stable(cell.base):
        raise DomainError(f"{cell.base} is not stable")
    if cell.dim != 3 * m - 4:
        raise DomainError("minimal cycles live in dimension 3m-4")
    if complex is None:
        complex = build_blowup(m)
    if levels is None:
        levels = blowup_levels(complex)
    start = complex.index[encode_blowup(cell)]
    n = levels[start]
    mat = complex.matrix.tocsc()
    tmat = mat.T.tocsc()
    comp, frontier = {start}, [start]
    while frontier:
        c = frontier.pop()
        lo, hi = mat.indptr[c], mat.indptr[c + 1]
        for f in mat.indices[lo:hi].tolist():
            if levels[f] != n:
                continue
            flo, fhi = tmat.indptr[f], tmat.indptr[f + 1]
            for g in tmat.indices[flo:fhi].tolist():
                if g not in comp and levels[g] == n and complex.dims[g] == 3 * m - 4:
                    comp.add(g)
                    frontier.append(g)
    cells = sorted(comp)
    # solve D x = 0 with x[start] = 1 by reducing [D_others | D_start]
    cols = []
    for c in cells:
        lo, hi = mat.indptr[c], mat.indptr[c + 1]
        cols.append({int(f): Fraction(int(v)) for f, v in zip(mat.indices[lo:hi], mat.data[lo:hi])
                     if levels[f] == n})
    sol = _nullspace_with(cols, cells.index(start))
    if sol is None:
        raise DomainError("no cycle of the graded piece contains this cell")
    return Chain({decode_blowup(m, *complex.keys[c]): v for c, v in zip(cells, sol) if v}, 3 * m - 4)


def _nullspace_with(cols: list, k: int):
    """A vector x with sum x_j cols_j = 0 and x_k = 1, or ``None``.

    Sparse column reduction that tracks each reduced column as a combination
    of the originals; column ``k`` is reduced last against all the others.
    """
    n = len(cols)
    order = [j for j in range(n) if j != k] + [k]
    pivots = {}  # row -> (reduced column, combination)
    for j in order:
        col = dict(cols[j])
        comb = {j: Fraction(1)}
        while col:
            low = max(col)
            if low not in pivots:
                break
            pcol, pcomb = pivots[low]
            f = col[low] / pcol[low]
            for r, v in pcol.items():
                nv = col.get(r, 0) - f * v
                if nv:
                    col[r] = nv
                else:
                    col.pop(r, None)
            for c, v in pcomb.items():
                nv = comb.get(c, 0) - f * v
                if nv:
                    comb[c] = nv
                else:
                    comb.pop(c, None)
        if col:
            if j == k:
                return None
            pivots[max(col)] = (col, comb)
            continue
        if j == k:
            x = [Fraction(0)] * n
            for c, v in comb.items():
                x[c] = v / comb[k]
            return x
    return None


def internal_hamiltonian_cofaces(m: int, cid: int, mask: int) -> list:
    """Masks ``mask | bit`` whose rho restricts to a Hamiltonian path on every class."""
    table = osp_table(m)
    full = table.full_tmask(cid)
    out = []
    for b in iter_bits(full & ~mask):
        new = mask | (1 << b)
        infos = class_infos(table, cid, new)
        if all(i.order is not None for i in infos):
            out.append(new)
    return out
