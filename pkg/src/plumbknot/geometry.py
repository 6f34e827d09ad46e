"""Exact geometry of plumbers' curves.

Coordinates are :class:`fractions.Fraction` (plain ints are accepted too).
Intersection predicates only compare coordinates, so a cell's singularity
pattern can be computed on any representative; :func:`singularity_report`
uses the integer block ranks of the cell and rescales the loci afterwards.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations

import numpy as np

from .combinatorics import (DIRECTIONS, CellName, canonicalize,
                            cell_from_blocks)
from .errors import DomainError, NonGenericProjection

DEFAULT_PROJECTION = (Fraction(1), Fraction(5, 7), Fraction(-17, 31))
PERTURB = Fraction(102, 101)

TRANSVERSE = "transverse-point"
CORNER = "corner-touch"
OVERLAP = "overlap-segment"


def _frac(v) -> Fraction:
    if isinstance(v, Fraction):
        return v
    if isinstance(v, str):
        return Fraction(v)
    if isinstance(v, int):
        return Fraction(v)
    raise DomainError(f"coordinate {v!r} is not an exact rational")


@dataclass(frozen=True)
class PlumbersCurve:
    """``m - 1`` interior vertices; the curve runs from the origin to (1,1,1)."""

    vertices: tuple

    def __post_init__(self):
        verts = tuple(tuple(_frac(c) for c in v) for v in self.vertices)
        if len(verts) < 2:
            raise DomainError("a plumbers' curve needs m >= 3 (two interior vertices)")
        for v in verts:
            if len(v) != 3:
                raise DomainError("vertices need three coordinates")
            if not all(0 < c < 1 for c in v):
                raise DomainError(f"vertex {tuple(map(str, v))} is not inside the open unit cube")
        object.__setattr__(self, "vertices", verts)

    @property
    def m(self) -> int:
        return len(self.vertices) + 1

    def points(self) -> list:
        """Vertices including the fixed start and end points."""
        zero, one = (Fraction(0),) * 3, (Fraction(1),) * 3
        return [zero, *self.vertices, one]

    def to_dict(self) -> dict:
        return {"m": self.m, "vertices": [[str(c) for c in v] for v in self.vertices]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), separators=(",", ":"))

    @classmethod
    def from_dict(cls, data: dict) -> "PlumbersCurve":
        curve = cls(tuple(tuple(Fraction(c) for c in v) for v in data["vertices"]))
        if "m" in data and data["m"] != curve.m:
            raise DomainError(f"m={data['m']} but {len(curve.vertices)} vertices given")
        return curve

    @classmethod
    def from_json(cls, text: str) -> "PlumbersCurve":
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class Pipe:
    index: int
    direction: str
    start: tuple
    end: tuple

    @property
    def axis(self) -> int:
        return (self.index - 1) % 3

    @property
    def fixed(self) -> tuple:
        return tuple(c for k, c in enumerate(self.start) if k != self.axis)

    @property
    def span(self) -> tuple:
        a, b = self.start[self.axis], self.end[self.axis]
        return (min(a, b), max(a, b))

    @property
    def degenerate(self) -> bool:
        return self.start == self.end

    def box(self) -> tuple:
        lo = tuple(min(a, b) for a, b in zip(self.start, self.end))
        hi = tuple(max(a, b) for a, b in zip(self.start, self.end))
        return lo, hi


def _pipes_from_points(pts) -> list:
    pipes = []
    for i in range(1, len(pts)):
        (x0, y0, z0), (x1, y1, z1) = pts[i - 1], pts[i]
        b = 3 * (i - 1)
        pipes.append(Pipe(b + 1, "x", (x0, y0, z0), (x1, y0, z0)))
        pipes.append(Pipe(b + 2, "y", (x1, y0, z0), (x1, y1, z0)))
        pipes.append(Pipe(b + 3, "z", (x1, y1, z0), (x1, y1, z1)))
    return pipes


def pipes_of(curve: PlumbersCurve) -> list:
    """The ``3m`` pipes; pipe ``3(i-1)+k`` is the k-th segment of move ``i``."""
    return _pipes_from_points(curve.points())


def cell_of(curve: PlumbersCurve) -> CellName:
    """The cell containing ``curve``: per-axis vertex order with exact ties."""
    blocks = []
    for d in range(3):
        values = sorted({v[d] for v in curve.vertices})
        bl = [tuple(i + 1 for i, v in enumerate(curve.vertices) if v[d] == val) for val in values]
        blocks.append(tuple(bl))
    return cell_from_blocks(*blocks)


def _rank_coords(name: CellName) -> tuple:
    """Integer block ranks per vertex and the per-axis scale ``k + 1``."""
    bl = canonicalize(name).blocks
    n = name.perm.n
    coords = [[0, 0, 0] for _ in range(n)]
    scale = []
    for d in range(3):
        for j, b in enumerate(bl[d]):
            for v in b:
                coords[v - 1][d] = j + 1
        scale.append(len(bl[d]) + 1)
    return [tuple(c) for c in coords], tuple(scale)


def representative(name: CellName) -> PlumbersCurve:
    """Evenly spaced generic point of the open cell ``name``."""
    coords, scale = _rank_coords(name)
    return PlumbersCurve(tuple(tuple(Fraction(c[d], scale[d]) for d in range(3)) for c in coords))


# -- intersections ------------------------------------------------------------------

@dataclass(frozen=True)
class Intersection:
    pipes: tuple
    kind: str
    locus: tuple  # (lo, hi) corner points; lo == hi for point loci

    @property
    def is_point(self) -> bool:
        return self.locus[0] == self.locus[1]


@dataclass(frozen=True)
class SingularityReport:
    intersections: tuple = ()
    components: int = 0
    max_branches: int = 0
    component_of: tuple = field(default=(), compare=False)

    def __bool__(self) -> bool:
        return bool(self.intersections)

    @property
    def kinds(self) -> list:
        return [it.kind for it in self.intersections]

    def to_dict(self) -> dict:
        return {
            "intersections": [
                {"pipes": list(it.pipes), "kind": it.kind,
                 "locus": [[str(c) for c in it.locus[0]], [str(c) for c in it.locus[1]]]}
                for it in self.intersections],
            "components": self.components,
        }


def _classify_pair(p: Pipe, q: Pipe):
    (alo, ahi), (blo, bhi) = p.box(), q.box()
    lo = tuple(max(a, b) for a, b in zip(alo, blo))
    hi = tuple(min(a, b) for a, b in zip(ahi, bhi))
    if any(l > h for l, h in zip(lo, hi)):
        return None
    if lo != hi:
        return Intersection((p.index, q.index), OVERLAP, (lo, hi))
    pt = lo
    transverse = (not p.degenerate and not q.degenerate and p.axis != q.axis
                  and p.span[0] < pt[p.axis] < p.span[1]
                  and q.span[0] < pt[q.axis] < q.span[1])
    return Intersection((p.index, q.index), TRANSVERSE if transverse else CORNER, (pt, pt))


def _boxes_meet(a, b) -> bool:
    return all(max(x, y) <= min(u, v) for x, y, u, v in zip(a[0], b[0], a[1], b[1]))


def _contains(pipe: Pipe, pt) -> bool:
    lo, hi = pipe.box()
    return all(l <= c <= h for l, c, h in zip(lo, pt, hi))


def branches_through(pipes, pt) -> list:
    """Pipes through ``pt`` grouped into branches (runs of nearby pipe indices)."""
    idx = [p.index for p in pipes if _contains(p, pt)]
    groups = []
    for i in idx:
        if groups and i - groups[-1][-1] <= 3:
            groups[-1].append(i)
        else:
            groups.append([i])
    return groups


def report_for_pipes(pipes) -> SingularityReport:
    """Intersections of distant pipes and the components of their union."""
    found = []
    for p, q in combinations(pipes, 2):
        if q.index - p.index < 4:
            continue
        it = _classify_pair(p, q)
        if it is not None:
            found.append(it)
    if not found:
        return SingularityReport()
    parent = list(range(len(found)))

    def root(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for a, b in combinations(range(len(found)), 2):
        if _boxes_meet(found[a].locus, found[b].locus):
            parent[root(a)] = root(b)
    roots = sorted({root(a) for a in range(len(found))})
    comp = tuple(roots.index(root(a)) for a in range(len(found)))
    segs = {comp[a] for a, it in enumerate(found) if not it.is_point}
    max_br = 0
    for a, it in enumerate(found):
        if comp[a] in segs:
            continue
        nb = len(branches_through(pipes, it.locus[0]))
        if nb > 3:
            raise AssertionError(f"isolated point {it.locus[0]} has {nb} branches")
        max_br = max(max_br, nb)
    return SingularityReport(tuple(found), len(roots), max_br, comp)


def curve_report(curve: PlumbersCurve) -> SingularityReport:
    return report_for_pipes(pipes_of(curve))


def singularity_report(name: CellName) -> SingularityReport:
    """Intersection pattern of the open cell ``name`` (exact)."""
    coords, scale = _rank_coords(name)
    end = tuple(scale)
    rep = report_for_pipes(_pipes_from_points([(0, 0, 0), *coords, end]))
    if not rep.intersections:
        return rep
    rescaled = []
    for it in rep.intersections:
        lo, hi = (tuple(Fraction(c, scale[d]) for d, c in enumerate(pt)) for pt in it.locus)
        rescaled.append(Intersection(it.pipes, it.kind, (lo, hi)))
    return SingularityReport(tuple(rescaled), rep.components, rep.max_branches, rep.component_of)


def is_knot(name: CellName) -> bool:
    return not singularity_report(name)


def curve_is_knot(curve: PlumbersCurve) -> bool:
    return not curve_report(curve)


# -- Gauss diagrams -----------------------------------------------------------------

@dataclass(frozen=True)
class Arrow:
    """A crossing: curve parameters of the over and under passages."""

    over: Fraction
    under: Fraction
    sign: int


@dataclass(frozen=True)
class GaussDiagram:
    arrows: tuple = ()

    def __len__(self) -> int:
        return len(self.arrows)

    def writhe(self) -> int:
        return sum(a.sign for a in self.arrows)

    def to_dict(self) -> dict:
        return {"arrows": [[str(a.over), str(a.under), a.sign] for a in self.arrows]}


def _dot(a, b):
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]


def _sub(a, b):
    return (a[0] - b[0], a[1] - b[1], a[2] - b[2])


def _det3(a, b, c):
    return (a[0] * (b[1] * c[2] - b[2] * c[1]) - a[1] * (b[0] * c[2] - b[2] * c[0])
            + a[2] * (b[0] * c[1] - b[1] * c[0]))


def _solve3(cols, rhs):
    """Cramer's rule for ``sum(x_k * cols[k]) = rhs``."""
    det = _det3(*cols)
    if det == 0:
        return None
    out = []
    for k in range(3):
        c = list(cols)
        c[k] = rhs
        out.append(_det3(*c) / det)
    return out


def _flatten(p, u, uu):
    t = _dot(p, u) / uu
    return (p[0] - t * u[0], p[1] - t * u[1], p[2] - t * u[2])


def _long_segments(curve: PlumbersCurve, u) -> list:
    """Non-degenerate pipes plus the two closing rays, as (start, end) pairs."""
    diag = (Fraction(1),) * 3
    uu = _dot(u, u)
    flat = _flatten(diag, u, uu)
    ff = _dot(flat, flat)
    L = Fraction(2)
    while L * L * ff <= 4:
        L *= 2
    pts = curve.points()
    segs = [((-L, -L, -L), pts[0])]
    for p in pipes_of(curve):
        if not p.degenerate:
            segs.append((p.start, p.end))
    one = pts[-1]
    segs.append((one, (one[0] + L, one[1] + L, one[2] + L)))
    return segs


def _candidate_pairs(segs, u) -> list:
    """Segment pairs whose projected bounding boxes meet (float prefilter, padded)."""
    uf = np.array([float(c) for c in u])
    uf /= np.linalg.norm(uf)
    e1 = np.cross(uf, np.eye(3)[int(np.argmin(np.abs(uf)))])
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(uf, e1)
    pts = np.array([[[float(c) for c in p] for p in seg] for seg in segs])  # (n, 2, 3)
    flat = np.stack([pts @ e1, pts @ e2], axis=-1)                          # (n, 2, 2)
    lo, hi = flat.min(axis=1) - 1e-9, flat.max(axis=1) + 1e-9
    meet = np.all((lo[:, None] <= hi[None, :]) & (lo[None, :] <= hi[:, None]), axis=2)
    a, b = np.nonzero(np.triu(meet, k=2))
    return list(zip(a.tolist(), b.tolist()))


def gauss_diagram(curve: PlumbersCurve, direction=DEFAULT_PROJECTION,
                  check: bool = True) -> GaussDiagram:
    """Gauss diagram of the long knot seen from ``+direction``.

    The knot is closed up by rays from the origin along ``-(1,1,1)`` and from
    ``(1,1,1)`` along ``+(1,1,1)``.  Raises :class:`NonGenericProjection` on a
    degenerate view and :class:`DomainError` if the curve is singular.  Pass
    ``check=False`` to skip the singularity test when the curve is known to be
    a knot.
    """
    u = tuple(_frac(c) for c in direction)
    if u == (0, 0, 0):
        raise DomainError("projection direction must be nonzero")
    if check and curve_report(curve):
        raise DomainError("Gauss diagrams are defined for knots only")
    uu = _dot(u, u)
    segs = _long_segments(curve, u)
    nseg = len(segs)
    arrows, seen = [], set()
    for a, b in _candidate_pairs(segs, u):
        (a0, a1), (b0, b1) = segs[a], segs[b]
        da, db = _sub(a1, a0), _sub(b1, b0)
        rhs = _sub(b0, a0)
        sol = _solve3([da, (-db[0], -db[1], -db[2]), (-u[0], -u[1], -u[2])], rhs)
        if sol is None:
            fa0, fa1, fb0, fb1 = (_flatten(p, u, uu) for p in (a0, a1, b0, b1))
            if _collinear_overlap(fa0, fa1, fb0, fb1):
                raise NonGenericProjection(f"segments {a} and {b} overlap in projection")
            continue
        s, t, lam = sol
        if not (0 <= s <= 1 and 0 <= t <= 1):
            continue
        if s in (0, 1) or t in (0, 1):
            raise NonGenericProjection(f"crossing of segments {a} and {b} at an endpoint")
        if lam == 0:
            raise DomainError("curve meets itself")
        key = _flatten(tuple(a0[k] + s * da[k] for k in range(3)), u, uu)
        if key in seen:
            raise NonGenericProjection("projected triple point")
        seen.add(key)
        pa = (a + s) / nseg
        pb = (b + t) / nseg
        # a + s da = b + t db + lam u: lam > 0 puts segment a nearer the viewer
        if lam > 0:
            over, under, ov, ud = pa, pb, da, db
        else:
            over, under, ov, ud = pb, pa, db, da
        sign = 1 if _det3(ov, ud, u) > 0 else -1
        arrows.append(Arrow(over, under, sign))
    arrows.sort(key=lambda ar: min(ar.over, ar.under))
    return GaussDiagram(tuple(arrows))


def _collinear_overlap(p0, p1, q0, q1) -> bool:
    d = _sub(p1, p0)
    for q in (q0, q1):
        w = _sub(q, p0)
        cr = (d[1] * w[2] - d[2] * w[1], d[2] * w[0] - d[0] * w[2], d[0] * w[1] - d[1] * w[0])
        if cr != (0, 0, 0):
            return False
    dd = _dot(d, d)
    if dd == 0:
        return False
    t0, t1 = _dot(_sub(q0, p0), d) / dd, _dot(_sub(q1, p0), d) / dd
    return max(min(t0, t1), 0) <= min(max(t0, t1), 1)


def generic_gauss_diagram(curve: PlumbersCurve, direction=DEFAULT_PROJECTION, tries: int = 30,
                          check: bool = True):
    """:func:`gauss_diagram`, re-perturbing the view direction on degeneracy.

    Retry ``k`` scales coordinate ``2 - k % 3`` by ``102/101`` (or sets it to
    ``1/101`` if it is zero): the last coordinate first, then the others,
    because scaling a single coordinate cannot separate pipes parallel to that
    axis.
    """
    u = [_frac(c) for c in direction]
    for k in range(tries):
        try:
            return gauss_diagram(curve, tuple(u), check)
        except NonGenericProjection:
            i = 2 - k % 3
            u[i] = u[i] * PERTURB if u[i] else Fraction(1, 101)
    raise NonGenericProjection(f"no generic projection found after {tries} perturbations")


__all__ = [
    "PlumbersCurve", "Pipe", "Intersection", "SingularityReport", "Arrow", "GaussDiagram",
    "pipes_of", "cell_of", "representative", "singularity_report", "curve_report", "is_knot",
    "curve_is_knot", "gauss_diagram", "generic_gauss_diagram", "branches_through",
    "TRANSVERSE", "CORNER", "OVERLAP", "DEFAULT_PROJECTION", "DIRECTIONS",
]
