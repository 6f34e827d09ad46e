"""Permutation triples, coincidence partitions and cell names.

A cell of the plumbers' curve space records, for each coordinate direction,
the order in which the ``m - 1`` vertices appear along that axis together with
the ties between them.  Equivalently it is a triple of ordered set partitions
of ``{1, ..., m-1}``; the blocks of size at least two are the coincidence
classes.  Most of the code works with the block form, and :class:`CellName`
converts to and from the permutation-plus-partition form.

Orientation convention: a direction with ``k`` blocks is the open simplex
``0 < a_1 < ... < a_k < 1`` of block coordinates; merging blocks ``j`` and
``j + 1`` (1-based) is a face with sign ``(-1)**j``.  A cell is the product of
its three direction factors in the order x, y, z with Koszul signs.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from functools import cached_property
from math import comb

import numpy as np

from .errors import DomainError

DIRECTIONS = ("x", "y", "z")
DIR_INDEX = {"x": 0, "y": 1, "z": 2}

Blocks = tuple  # tuple[tuple[int, ...], ...]


def _check_direction(d: str) -> str:
    if d not in DIR_INDEX:
        raise DomainError(f"unknown direction {d!r}")
    return d


@dataclass(frozen=True)
class TriplePerm:
    """Vertex orders along x, y and z, e.g. ``(3,1,4,2)`` for ``3142_x``."""

    x: tuple
    y: tuple
    z: tuple

    def __post_init__(self):
        seqs = [tuple(int(v) for v in s) for s in (self.x, self.y, self.z)]
        n = len(seqs[0])
        if n < 2:
            raise DomainError("a permutation triple needs at least two vertices (m >= 3)")
        for d, s in zip(DIRECTIONS, seqs):
            if sorted(s) != list(range(1, n + 1)):
                raise DomainError(f"sigma_{d}={s} is not a permutation of 1..{n}")
        object.__setattr__(self, "x", seqs[0])
        object.__setattr__(self, "y", seqs[1])
        object.__setattr__(self, "z", seqs[2])

    @property
    def m(self) -> int:
        return len(self.x) + 1

    @property
    def n(self) -> int:
        return len(self.x)

    def seq(self, d: str) -> tuple:
        return (self.x, self.y, self.z)[DIR_INDEX[_check_direction(d)]]

    def replace(self, d: str, seq) -> "TriplePerm":
        seqs = [self.x, self.y, self.z]
        seqs[DIR_INDEX[d]] = tuple(seq)
        return TriplePerm(*seqs)

    @classmethod
    def parse(cls, sx: str, sy: str, sz: str) -> "TriplePerm":
        """Build from digit strings such as ``"3142"`` (vertices 1-9 only)."""
        return cls(*(tuple(int(c) for c in s) for s in (sx, sy, sz)))

    def key(self) -> tuple:
        return (self.x, self.y, self.z)

    def __str__(self) -> str:
        return ", ".join("".join(map(str, s)) + "_" + d for d, s in zip(DIRECTIONS, self.key()))


@dataclass(frozen=True)
class AdmissibleSet:
    """Indices whose ``direction`` coordinates coincide."""

    direction: str
    indices: frozenset

    def __post_init__(self):
        _check_direction(self.direction)
        object.__setattr__(self, "indices", frozenset(int(i) for i in self.indices))
        if len(self.indices) < 2:
            raise DomainError("an admissible set needs at least two indices")

    @classmethod
    def of(cls, direction: str, *indices) -> "AdmissibleSet":
        return cls(direction, frozenset(indices))

    def key(self) -> tuple:
        return (DIR_INDEX[self.direction], tuple(sorted(self.indices)))

    def __len__(self) -> int:
        return len(self.indices)

    def __str__(self) -> str:
        return "{" + ",".join(map(str, sorted(self.indices))) + "}_" + self.direction


@dataclass(frozen=True, order=True)
class DecoratedTransposition:
    """The coordinate equality ``(a b)_d``; stored with ``a < b``.

    The dataclass ordering (direction index, a, b) is the lexicographic order
    used to orient blowup simplices.
    """

    dir_index: int
    a: int
    b: int

    def __post_init__(self):
        if self.a == self.b:
            raise DomainError("transposition needs two distinct indices")
        if self.a > self.b:
            a, b = self.b, self.a
            object.__setattr__(self, "a", a)
            object.__setattr__(self, "b", b)

    @classmethod
    def of(cls, a: int, b: int, direction: str) -> "DecoratedTransposition":
        return cls(DIR_INDEX[_check_direction(direction)], a, b)

    @property
    def direction(self) -> str:
        return DIRECTIONS[self.dir_index]

    @property
    def pair(self) -> frozenset:
        return frozenset((self.a, self.b))

    def __str__(self) -> str:
        return f"({self.a} {self.b})_{self.direction}"


@dataclass(frozen=True)
class SingularityPartition:
    """Non-singleton coincidence classes; singletons are implicit."""

    classes: tuple = ()

    def __post_init__(self):
        classes = tuple(sorted(self.classes, key=AdmissibleSet.key))
        seen = set()
        for c in classes:
            for i in c.indices:
                if (i, c.direction) in seen:
                    raise DomainError(f"({i}, {c.direction}) lies in two classes")
                seen.add((i, c.direction))
        object.__setattr__(self, "classes", classes)

    def in_direction(self, d: str) -> list:
        return [c for c in self.classes if c.direction == d]

    def key(self) -> tuple:
        return tuple(c.key() for c in self.classes)

    def __len__(self) -> int:
        return len(self.classes)

    def __iter__(self):
        return iter(self.classes)


@dataclass(frozen=True)
class CellName:
    """A cell ``e(sigma; C)``.  Names are not unique until canonicalized."""

    perm: TriplePerm
    partition: SingularityPartition = SingularityPartition()

    def __post_init__(self):
        n = self.perm.n
        for c in self.partition.classes:
            if not c.indices <= set(range(1, n + 1)):
                raise DomainError(f"class {c} has an index outside 1..{n}")
            if not is_admissible(c, self.perm):
                raise DomainError(f"class {c} is not admissible for {self.perm}")

    @property
    def m(self) -> int:
        return self.perm.m

    @property
    def codim(self) -> int:
        return sum(len(c) - 1 for c in self.partition.classes)

    @property
    def dim(self) -> int:
        return 3 * (self.m - 1) - self.codim

    @cached_property
    def blocks(self) -> tuple:
        """Per direction, the ordered blocks in permutation order."""
        return tuple(_blocks_in_order(self.perm.seq(d), self.partition.in_direction(d))
                     for d in DIRECTIONS)

    @property
    def canonical(self) -> bool:
        return all(all(list(b) == sorted(b) for b in bl) for bl in self.blocks)

    @property
    def is_top(self) -> bool:
        return len(self.partition) == 0

    def key(self) -> tuple:
        return self.perm.key() + (self.partition.key(),)

    def __lt__(self, other: "CellName") -> bool:
        return self.key() < other.key()

    def __str__(self) -> str:
        if not self.partition.classes:
            return f"e({self.perm})"
        return f"e({self.perm}; " + ", ".join(map(str, self.partition.classes)) + ")"

    def transpositions(self) -> list:
        """All decorated transpositions supported inside the classes, sorted."""
        out = []
        for c in self.partition.classes:
            for a, b in itertools.combinations(sorted(c.indices), 2):
                out.append(DecoratedTransposition.of(a, b, c.direction))
        return sorted(out)


def _blocks_in_order(seq, classes) -> tuple:
    owner = {}
    for ci, c in enumerate(classes):
        for i in c.indices:
            owner[i] = ci
    blocks, pos = [], 0
    while pos < len(seq):
        v = seq[pos]
        if v in owner:
            size = len(classes[owner[v]])
            blocks.append(tuple(seq[pos:pos + size]))
            pos += size
        else:
            blocks.append((v,))
            pos += 1
    return tuple(blocks)


def cell_from_blocks(bx, by, bz) -> CellName:
    """Canonical :class:`CellName` from three ordered set partitions."""
    seqs, classes = [], []
    for d, bl in zip(DIRECTIONS, (bx, by, bz)):
        s = []
        for b in bl:
            b = tuple(sorted(b))
            s.extend(b)
            if len(b) > 1:
                classes.append(AdmissibleSet(d, frozenset(b)))
        seqs.append(tuple(s))
    return CellName(TriplePerm(*seqs), SingularityPartition(tuple(classes)))


def is_admissible(C: AdmissibleSet, perm: TriplePerm) -> bool:
    """True iff the indices of ``C`` are consecutive in ``perm``'s order for ``C.direction``."""
    seq = perm.seq(C.direction)
    bad = [i for i in C.indices if not 1 <= i <= len(seq)]
    if bad:
        raise DomainError(f"indices {sorted(bad)} out of range 1..{len(seq)}")
    pos = sorted(seq.index(i) for i in C.indices)
    return pos[-1] - pos[0] == len(pos) - 1


def tau_of(C: AdmissibleSet, perm: TriplePerm) -> list:
    """Adjacent-pair transpositions of the block of ``C``, in block order."""
    if not is_admissible(C, perm):
        raise DomainError(f"{C} is not admissible for {perm}")
    seq = perm.seq(C.direction)
    block = [v for v in seq if v in C.indices]
    return [DecoratedTransposition.of(a, b, C.direction) for a, b in zip(block, block[1:])]


def canonicalize(name: CellName) -> CellName:
    """Representative of the renaming orbit with every class block sorted."""
    if name.canonical:
        return name
    return cell_from_blocks(*name.blocks)


def renamings(name: CellName) -> list:
    """Every name ``e(rho sigma; C)`` of the same cell (the full orbit)."""
    per_dir = []
    for bl in name.blocks:
        options = [list(itertools.permutations(b)) for b in bl]
        per_dir.append([tuple(itertools.chain.from_iterable(ch)) for ch in itertools.product(*options)])
    return [CellName(TriplePerm(sx, sy, sz), name.partition)
            for sx, sy, sz in itertools.product(*per_dir)]


# -- block-level face/coface moves -------------------------------------------------

def merge_blocks(blocks: tuple, j: int) -> tuple:
    """Merge 0-based blocks ``j`` and ``j + 1``."""
    merged = tuple(sorted(blocks[j] + blocks[j + 1]))
    return blocks[:j] + (merged,) + blocks[j + 2:]


def ordered_splits(block: tuple):
    """Yield ``(first, second)`` for all ordered splits into nonempty parts."""
    block = tuple(sorted(block))
    k = len(block)
    for r in range(1, k):
        for first in itertools.combinations(block, r):
            second = tuple(v for v in block if v not in first)
            yield first, second


def signed_faces(name: CellName) -> list:
    """Codimension-one faces with incidence signs, as ``(sign, CellName)``."""
    bl = canonicalize(name).blocks
    out, prefix = [], 0
    for di in range(3):
        k = len(bl[di])
        for j in range(k - 1):
            sign = (-1) ** (prefix + j + 1)
            new = list(bl)
            new[di] = merge_blocks(bl[di], j)
            out.append((sign, cell_from_blocks(*new)))
        prefix += k
    return out


def signed_cofaces(name: CellName) -> list:
    """Cells having ``name`` as a codimension-one face, with incidence signs."""
    bl = canonicalize(name).blocks
    out, prefix = [], 0
    for di in range(3):
        k = len(bl[di])
        for j, b in enumerate(bl[di]):
            if len(b) < 2:
                continue
            for first, second in ordered_splits(b):
                new = list(bl)
                new[di] = bl[di][:j] + (first, second) + bl[di][j + 1:]
                out.append(((-1) ** (prefix + j + 1), cell_from_blocks(*new)))
        prefix += k
    return out


def coarsenings(name: CellName) -> list:
    """All codimension-one faces: merges of two adjacent blocks in one direction."""
    return sorted({f for _, f in signed_faces(name)})


def refinement_cofaces(name: CellName) -> list:
    """All cells one dimension up that have ``name`` as a face."""
    return sorted({f for _, f in signed_cofaces(name)})


# -- ordered set partitions ---------------------------------------------------------

def ordered_set_partitions(n: int) -> list:
    """All ordered set partitions of ``1..n`` with sorted blocks."""
    out = []

    def rec(rest, acc):
        if not rest:
            out.append(tuple(acc))
            return
        for r in range(1, len(rest) + 1):
            for first in itertools.combinations(rest, r):
                rec(tuple(v for v in rest if v not in first), acc + [first])

    rec(tuple(range(1, n + 1)), [])
    return out


def fubini(n: int) -> int:
    """Number of ordered set partitions of an ``n``-set."""
    a = [1]
    for k in range(1, n + 1):
        a.append(sum(comb(k, i) * a[k - i] for i in range(1, k + 1)))
    return a[n]


def osp_key(osp: tuple) -> tuple:
    seq = tuple(itertools.chain.from_iterable(osp))
    return (seq, tuple(b for b in sorted(osp) if len(b) > 1))


class OSPTable:
    """Integer tables over the ordered set partitions of ``1..n``.

    Cells of ``P_m`` are triples ``(ix, iy, iz)`` of row indices and are
    interned as ``(ix * N + iy) * N + iz`` with ``N = len(self)``.
    Transpositions are numbered ``d * npairs + pair_index[(a, b)]`` so that bit
    order agrees with the lexicographic order of :class:`DecoratedTransposition`.
    """

    def __init__(self, n: int):
        if n < 2:
            raise DomainError("need at least two vertices")
        self.n = n
        self.osps = sorted(ordered_set_partitions(n), key=osp_key)
        self.index = {o: i for i, o in enumerate(self.osps)}
        N = len(self.osps)
        self.N = N
        self.nblocks = np.array([len(o) for o in self.osps], dtype=np.int64)
        self.ranks = np.zeros((N, n), dtype=np.int64)
        for i, o in enumerate(self.osps):
            for j, b in enumerate(o):
                for v in b:
                    self.ranks[i, v - 1] = j + 1
        self.pairs = list(itertools.combinations(range(1, n + 1), 2))
        self.pair_index = {p: i for i, p in enumerate(self.pairs)}
        self.npairs = len(self.pairs)
        self.tmask = np.zeros(N, dtype=np.int64)
        # merges[i] = [(sign_without_prefix, target)], splits[i] likewise (incidence of coface on i)
        self.merges = []
        self.splits = []
        for i, o in enumerate(self.osps):
            mask = 0
            for b in o:
                for p in itertools.combinations(b, 2):
                    mask |= 1 << self.pair_index[p]
            self.tmask[i] = mask
            self.merges.append([((-1) ** (j + 1), self.index[merge_blocks(o, j)])
                                for j in range(len(o) - 1)])
            sp = []
            for j, b in enumerate(o):
                if len(b) > 1:
                    for first, second in ordered_splits(b):
                        sp.append(((-1) ** (j + 1), self.index[o[:j] + (first, second) + o[j + 1:]]))
            self.splits.append(sp)

    def __len__(self) -> int:
        return self.N

    @property
    def ntrans(self) -> int:
        return 3 * self.npairs

    def cell_id(self, ix: int, iy: int, iz: int) -> int:
        return (ix * self.N + iy) * self.N + iz

    def split_id(self, cid: int) -> tuple:
        ix, rest = divmod(cid, self.N * self.N)
        iy, iz = divmod(rest, self.N)
        return ix, iy, iz

    def name(self, cid: int) -> CellName:
        return cell_from_blocks(*(self.osps[i] for i in self.split_id(cid)))

    def id_of(self, name: CellName) -> int:
        bl = canonicalize(name).blocks
        return self.cell_id(*(self.index[b] for b in bl))

    def dim(self, cid: int) -> int:
        return int(sum(self.nblocks[i] for i in self.split_id(cid)))

    def full_tmask(self, cid: int) -> int:
        ix, iy, iz = self.split_id(cid)
        p = self.npairs
        return int(self.tmask[ix]) | (int(self.tmask[iy]) << p) | (int(self.tmask[iz]) << (2 * p))

    def faces(self, cid: int) -> list:
        """Signed codimension-one faces of a cell id."""
        idx = self.split_id(cid)
        out, prefix = [], 0
        for di in range(3):
            for s, t in self.merges[idx[di]]:
                new = list(idx)
                new[di] = t
                out.append((s * (-1) ** prefix, self.cell_id(*new)))
            prefix += int(self.nblocks[idx[di]])
        return out

    def cofaces(self, cid: int) -> list:
        """Signed codimension-one cofaces ``(incidence, coface id)``."""
        idx = self.split_id(cid)
        out, prefix = [], 0
        for di in range(3):
            for s, t in self.splits[idx[di]]:
                new = list(idx)
                new[di] = t
                out.append((s * (-1) ** prefix, self.cell_id(*new)))
            prefix += int(self.nblocks[idx[di]])
        return out

    def transposition(self, bit: int) -> DecoratedTransposition:
        d, p = divmod(bit, self.npairs)
        a, b = self.pairs[p]
        return DecoratedTransposition(d, a, b)

    def bit_of(self, t: DecoratedTransposition) -> int:
        return t.dir_index * self.npairs + self.pair_index[(t.a, t.b)]


_TABLES: dict = {}


def osp_table(m: int) -> OSPTable:
    """Cached :class:`OSPTable` for ``m`` moves."""
    if m not in _TABLES:
        _TABLES[m] = OSPTable(m - 1)
    return _TABLES[m]


# -- JSON ---------------------------------------------------------------------------

def name_to_dict(name: CellName) -> dict:
    return {
        "m": name.m,
        "perm": {d: list(name.perm.seq(d)) for d in DIRECTIONS},
        "classes": [{"dir": c.direction, "idx": sorted(c.indices)} for c in name.partition.classes],
    }


def name_from_dict(data: dict) -> CellName:
    perm = TriplePerm(*(tuple(data["perm"][d]) for d in DIRECTIONS))
    if "m" in data and data["m"] != perm.m:
        raise DomainError(f"m={data['m']} does not match permutations of length {perm.n}")
    classes = tuple(AdmissibleSet(c["dir"], frozenset(c["idx"])) for c in data.get("classes", ()))
    return CellName(perm, SingularityPartition(classes))


def name_to_json(name: CellName) -> str:
    return json.dumps(name_to_dict(name), separators=(",", ":"))


def name_from_json(text: str) -> CellName:
    return name_from_dict(json.loads(text))
