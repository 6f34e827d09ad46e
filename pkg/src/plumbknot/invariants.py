"""Invariants of plumbers' knots and the registry used by the CLI.

An invariant maps knot top cells to rationals.  Built-ins:

* ``const:<q>`` - the constant ``q``;
* ``v2`` - the degree-two finite-type invariant, from a Gauss diagram of the
  long knot (normalized so the trefoil gives 1 and the figure-eight -1);
* ``indicator:<cellId>`` - 1 on one top cell of P_m, 0 elsewhere (not an
  invariant; useful as a negative control);
* ``component:<k>`` - 1 on knot component ``k``, 0 elsewhere.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable

import numpy as np

from .combinatorics import CellName, osp_table
from .complex import build_complex, singular_flags
from .errors import DomainError, InvariantError
from .filtration import knot_components
from .geometry import GaussDiagram, PlumbersCurve, generic_gauss_diagram, representative


def v2_from_diagram(gd: GaussDiagram) -> int:
    """Sum of sign products over interleaved arrow pairs ``a1 < b1 < a2 < b2``
    where the first passage of ``a`` is an under-passage and the first passage
    of ``b`` is an over-passage."""
    chords = []
    for ar in gd.arrows:
        lo, hi = sorted((ar.over, ar.under))
        chords.append((lo, hi, ar.under == lo, ar.sign))
    chords.sort()
    total = 0
    for i, (a1, a2, a_under, sa) in enumerate(chords):
        for b1, b2, b_under, sb in chords[i + 1:]:
            if b1 > a2:
                break
            if a1 < b1 < a2 < b2 and a_under and not b_under:
                total += sa * sb
    return total


def v2_of_curve(curve: PlumbersCurve, direction=None, check: bool = True) -> int:
    if direction is None:
        return v2_from_diagram(generic_gauss_diagram(curve, check=check))
    return v2_from_diagram(generic_gauss_diagram(curve, direction, check=check))


@dataclass
class Invariant:
    """A rational function on knot top cells of P_m."""

    id: str
    m: int
    evaluator: Callable
    degree: object = None
    per_component: bool = False
    _memo: dict = field(default_factory=dict, repr=False)

    def evaluate(self, cell: CellName) -> Fraction:
        if cell.m != self.m:
            raise DomainError(f"{self.id} is defined for m={self.m}, got a cell with m={cell.m}")
        if not cell.is_top:
            raise DomainError(f"{cell} is not a top cell")
        table = osp_table(self.m)
        cid = table.id_of(cell)
        if singular_flags(self.m)[cid]:
            raise InvariantError(f"{cell} is not a knot cell", cell=cell)
        return self.value(cid)

    def value(self, cid: int) -> Fraction:
        key = cid
        if self.per_component:
            key = ("component", knot_components(self.m).label_of(cid))
        if key not in self._memo:
            self._memo[key] = Fraction(self.evaluator(cid))
        return self._memo[key]


def evaluate(invariant: Invariant, cell: CellName) -> Fraction:
    return invariant.evaluate(cell)


def top_ids(m: int) -> np.ndarray:
    table = osp_table(m)
    tops = np.flatnonzero(table.nblocks == m - 1)
    N = table.N
    ix, iy, iz = np.meshgrid(tops, tops, tops, indexing="ij")
    return np.sort(((ix * N + iy) * N + iz).ravel())


def top_values(invariant: Invariant, m: int, per_cell: bool = True) -> np.ndarray:
    """Array over all cell ids with the invariant on top cells and 0 elsewhere.

    Integer-valued invariants give an ``int64`` array, others an object array
    of fractions.  With ``per_cell=False`` component-memoized invariants are
    read once per component.
    """
    table = osp_table(m)
    ids = top_ids(m)
    vals = [invariant.value(int(c)) for c in ids]
    integral = all(v.denominator == 1 for v in vals)
    out = np.zeros(table.N ** 3, dtype=np.int64 if integral else object)
    if not integral:
        out[:] = Fraction(0)
    for c, v in zip(ids.tolist(), vals):
        out[c] = int(v) if integral else v
    return out


def _v2_evaluator(m: int):
    table = osp_table(m)
    # evaluator domain is knot cells, so the singularity test is redundant
    return lambda cid: v2_of_curve(representative(table.name(cid)), check=False)


@lru_cache(maxsize=None)
def _p_order(m: int) -> list:
    return build_complex(m, "P").keys


def get_invariant(spec: str, m: int) -> Invariant:
    """Look up an invariant by registry id."""
    if spec.startswith("const:"):
        q = Fraction(spec.split(":", 1)[1])
        return Invariant(spec, m, lambda cid: q, degree=0)
    if spec == "v2":
        return Invariant(spec, m, _v2_evaluator(m), degree=2, per_component=True)
    if spec.startswith("indicator:"):
        k = int(spec.split(":", 1)[1])
        keys = _p_order(m)
        if not 0 <= k < len(keys):
            raise DomainError(f"cell id {k} out of range for P_{m}")
        target = keys[k]
        if osp_table(m).dim(target) != 3 * m - 3:
            raise DomainError(f"cell {k} is not a top cell")
        return Invariant(spec, m, lambda cid: int(cid == target))
    if spec.startswith("component:"):
        k = int(spec.split(":", 1)[1])
        comps = knot_components(m)
        if not 0 <= k < comps.count:
            raise DomainError(f"component {k} out of range (0..{comps.count - 1})")
        return Invariant(spec, m, lambda cid: int(comps.label_of(cid) == k), degree=0,
                         per_component=True)
    raise DomainError(f"unknown invariant id {spec!r}")


def check_invariance(invariant: Invariant, m: int):
    """``(True, None)`` if constant on knot components, else ``(False, (cell_a, cell_b))``.

    Evaluates every knot top cell directly (bypassing component memoization)
    and compares the two top cells on either side of each knot wall, so a
    witness pair is always adjacent.
    """
    from .filtration import _face_pairs
    table = osp_table(m)
    sing = singular_flags(m)
    ids = top_ids(m)
    vals = {c: Fraction(invariant.evaluator(c)) for c in ids.tolist()}
    rows, cols = _face_pairs(m, ids)
    walls = {}
    for f, c in zip(rows.tolist(), cols.tolist()):
        if not sing[f]:
            walls.setdefault(f, []).append(c)
    for f in sorted(walls):
        a, *rest = sorted(walls[f])
        for b in rest:
            if vals[a] != vals[b]:
                return False, (table.name(a), table.name(b))
    return True, None
