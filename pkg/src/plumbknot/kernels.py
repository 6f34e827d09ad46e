"""Bulk per-cell singularity summaries.

Cells are triples of ordered-set-partition rows of an :class:`OSPTable`.  The
curve of a cell uses integer block ranks as coordinates (0 for the start,
``k + 1`` for the end), which realizes every order/equality predicate of the
open cell.  For each cell we return

* ``hits``: number of intersecting distant pipe pairs,
* ``transverse``: how many of those are transverse points,
* ``clean``: every transverse point lies on exactly two pipes.

A cell is singular iff ``hits > 0`` and simple iff additionally
``hits == transverse`` and ``clean``.  Both the numba kernel and the numpy
fallback compute the same three arrays.
"""
from __future__ import annotations

import numpy as np

from . import _accel
from ._accel import njit


def _pipe_boxes(ranks_x, ranks_y, ranks_z, kx, ky, kz):
    """Vectorized pipe boxes, shape (ncell, 3m, 3) for ``lo`` and ``hi``."""
    nc, n = ranks_x.shape
    m = n + 1
    vx = np.concatenate([np.zeros((nc, 1), np.int64), ranks_x, (kx + 1)[:, None]], axis=1)
    vy = np.concatenate([np.zeros((nc, 1), np.int64), ranks_y, (ky + 1)[:, None]], axis=1)
    vz = np.concatenate([np.zeros((nc, 1), np.int64), ranks_z, (kz + 1)[:, None]], axis=1)
    lo = np.empty((nc, 3 * m, 3), np.int64)
    hi = np.empty((nc, 3 * m, 3), np.int64)
    x0, x1 = vx[:, :-1], vx[:, 1:]
    y0, y1 = vy[:, :-1], vy[:, 1:]
    z0, z1 = vz[:, :-1], vz[:, 1:]
    lo[:, 0::3, 0], hi[:, 0::3, 0] = np.minimum(x0, x1), np.maximum(x0, x1)
    lo[:, 0::3, 1] = hi[:, 0::3, 1] = y0
    lo[:, 0::3, 2] = hi[:, 0::3, 2] = z0
    lo[:, 1::3, 0] = hi[:, 1::3, 0] = x1
    lo[:, 1::3, 1], hi[:, 1::3, 1] = np.minimum(y0, y1), np.maximum(y0, y1)
    lo[:, 1::3, 2] = hi[:, 1::3, 2] = z0
    lo[:, 2::3, 0] = hi[:, 2::3, 0] = x1
    lo[:, 2::3, 1] = hi[:, 2::3, 1] = y1
    lo[:, 2::3, 2], hi[:, 2::3, 2] = np.minimum(z0, z1), np.maximum(z0, z1)
    return lo, hi


def _summaries_numpy(R, K, ix, iy, iz, chunk=20000):
    nc = len(ix)
    hits = np.zeros(nc, np.int64)
    trans = np.zeros(nc, np.int64)
    clean = np.ones(nc, np.bool_)
    n = R.shape[1]
    npipe = 3 * (n + 1)
    pairs = np.array([(i, j) for i in range(npipe) for j in range(i + 4, npipe)], np.int64)
    pi, pj = pairs[:, 0], pairs[:, 1]
    axis = np.arange(npipe) % 3
    for s in range(0, nc, chunk):
        sl = slice(s, s + chunk)
        lo, hi = _pipe_boxes(R[ix[sl]], R[iy[sl]], R[iz[sl]], K[ix[sl]], K[iy[sl]], K[iz[sl]])
        ilo = np.maximum(lo[:, pi], lo[:, pj])  # (c, pairs, 3)
        ihi = np.minimum(hi[:, pi], hi[:, pj])
        meet = np.all(ilo <= ihi, axis=2)
        point = np.all(ilo == ihi, axis=2)
        ar = np.arange(len(pairs))
        ai, aj = axis[pi], axis[pj]
        # interior along own axis, which also excludes degenerate pipes
        in_i = (lo[:, pi, ai] < ilo[:, ar, ai]) & (ilo[:, ar, ai] < hi[:, pi, ai])
        in_j = (lo[:, pj, aj] < ilo[:, ar, aj]) & (ilo[:, ar, aj] < hi[:, pj, aj])
        tr = meet & point & in_i & in_j & (ai != aj)[None, :]
        hits[sl] = meet.sum(axis=1)
        trans[sl] = tr.sum(axis=1)
        # pipes through each transverse point
        through = np.all((lo[:, None, :, :] <= ilo[:, :, None, :])
                         & (ilo[:, :, None, :] <= hi[:, None, :, :]), axis=3).sum(axis=2)
        clean[sl] = ~np.any(tr & (through != 2), axis=1)
    return hits, trans, clean


@njit(cache=True)
def _summaries_numba(R, K, ix, iy, iz):  # pragma: no cover - compiled
    nc = ix.shape[0]
    n = R.shape[1]
    m = n + 1
    npipe = 3 * m
    hits = np.zeros(nc, np.int64)
    trans = np.zeros(nc, np.int64)
    clean = np.ones(nc, np.bool_)
    lo = np.zeros((npipe, 3), np.int64)
    hi = np.zeros((npipe, 3), np.int64)
    v = np.zeros((m + 1, 3), np.int64)
    pt = np.zeros(3, np.int64)
    for c in range(nc):
        a, b, d = ix[c], iy[c], iz[c]
        for k in range(3):
            v[0, k] = 0
        for i in range(n):
            v[i + 1, 0] = R[a, i]
            v[i + 1, 1] = R[b, i]
            v[i + 1, 2] = R[d, i]
        v[m, 0] = K[a] + 1
        v[m, 1] = K[b] + 1
        v[m, 2] = K[d] + 1
        for i in range(1, m + 1):
            p = 3 * (i - 1)
            x0, y0, z0 = v[i - 1, 0], v[i - 1, 1], v[i - 1, 2]
            x1, y1, z1 = v[i, 0], v[i, 1], v[i, 2]
            lo[p, 0] = min(x0, x1); hi[p, 0] = max(x0, x1)
            lo[p, 1] = y0; hi[p, 1] = y0
            lo[p, 2] = z0; hi[p, 2] = z0
            lo[p + 1, 0] = x1; hi[p + 1, 0] = x1
            lo[p + 1, 1] = min(y0, y1); hi[p + 1, 1] = max(y0, y1)
            lo[p + 1, 2] = z0; hi[p + 1, 2] = z0
            lo[p + 2, 0] = x1; hi[p + 2, 0] = x1
            lo[p + 2, 1] = y1; hi[p + 2, 1] = y1
            lo[p + 2, 2] = min(z0, z1); hi[p + 2, 2] = max(z0, z1)
        h = 0
        t = 0
        ok = True
        for i in range(npipe):
            for j in range(i + 4, npipe):
                meet = True
                point = True
                for k in range(3):
                    l = max(lo[i, k], lo[j, k])
                    u = min(hi[i, k], hi[j, k])
                    if l > u:
                        meet = False
                        break
                    if l != u:
                        point = False
                    pt[k] = l
                if not meet:
                    continue
                h += 1
                ai = i % 3
                aj = j % 3
                if (point and ai != aj and lo[i, ai] < pt[ai] < hi[i, ai]
                        and lo[j, aj] < pt[aj] < hi[j, aj]):
                    t += 1
                    cnt = 0
                    for q in range(npipe):
                        inside = True
                        for k in range(3):
                            if pt[k] < lo[q, k] or pt[k] > hi[q, k]:
                                inside = False
                                break
                        if inside:
                            cnt += 1
                    if cnt != 2:
                        ok = False
        hits[c] = h
        trans[c] = t
        clean[c] = ok
    return hits, trans, clean


def cell_summaries(R, K, ix, iy, iz, use_numba=None):
    """Per-cell ``(hits, transverse, clean)`` arrays for the given OSP index triples."""
    R = np.ascontiguousarray(R, dtype=np.int64)
    K = np.ascontiguousarray(K, dtype=np.int64)
    ix, iy, iz = (np.ascontiguousarray(a, dtype=np.int64) for a in (ix, iy, iz))
    if use_numba is None:
        use_numba = _accel.USE_NUMBA
    if use_numba:
        return _summaries_numba(R, K, ix, iy, iz)
    return _summaries_numpy(R, K, ix, iy, iz)


def table_summaries(table, ids=None, use_numba=None):
    """:func:`cell_summaries` over cell ids of an OSP table (all cells by default)."""
    N = table.N
    if ids is None:
        ids = np.arange(N ** 3, dtype=np.int64)
    ids = np.asarray(ids, dtype=np.int64)
    ix, rest = np.divmod(ids, N * N)
    iy, iz = np.divmod(rest, N)
    return cell_summaries(table.ranks, table.nblocks, ix, iy, iz, use_numba=use_numba)


def split_table(table) -> np.ndarray:
    """Padded array of split targets per OSP row (``-1`` marks padding)."""
    width = max(1, max(len(s) for s in table.splits))
    out = np.full((table.N, width), -1, np.int64)
    for i, lst in enumerate(table.splits):
        for j, (_, t) in enumerate(lst):
            out[i, j] = t
    return out


@njit(cache=True)
def _coface_max_numba(ids, values, splits, N):  # pragma: no cover - compiled
    out = np.full(ids.shape[0], -1, np.int64)
    for c in range(ids.shape[0]):
        cid = ids[c]
        ix = cid // (N * N)
        iy = (cid // N) % N
        iz = cid % N
        best = -1
        for j in range(splits.shape[1]):
            t = splits[ix, j]
            if t >= 0:
                v = values[(t * N + iy) * N + iz]
                if v > best:
                    best = v
            t = splits[iy, j]
            if t >= 0:
                v = values[(ix * N + t) * N + iz]
                if v > best:
                    best = v
            t = splits[iz, j]
            if t >= 0:
                v = values[(ix * N + iy) * N + t]
                if v > best:
                    best = v
        out[c] = best
    return out


def _coface_max_numpy(ids, values, splits, N):
    ix, rest = np.divmod(ids, N * N)
    iy, iz = np.divmod(rest, N)
    best = np.full(len(ids), -1, np.int64)
    for j in range(splits.shape[1]):
        for d in range(3):
            own = (ix, iy, iz)[d]
            t = splits[own, j]
            ok = t >= 0
            new = [ix, iy, iz]
            new[d] = np.where(ok, t, 0)
            v = values[(new[0] * N + new[1]) * N + new[2]]
            best = np.where(ok, np.maximum(best, v), best)
    return best


def coface_max(ids, values, splits, N, use_numba=None):
    """For each cell id, the max of ``values`` over its codimension-one cofaces (-1 if none)."""
    ids = np.ascontiguousarray(ids, dtype=np.int64)
    values = np.ascontiguousarray(values, dtype=np.int64)
    if use_numba is None:
        use_numba = _accel.USE_NUMBA
    if use_numba:
        return _coface_max_numba(ids, values, splits, N)
    return _coface_max_numpy(ids, values, splits, N)
