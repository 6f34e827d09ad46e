import io
import itertools
import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from plumbknot.combinatorics import AdmissibleSet, DecoratedTransposition, fubini, osp_table
from plumbknot.complex import (
    BlowupCellName, Chain, blowup_faces, blowup_name_from_dict, blowup_name_to_dict,
    blowup_size, boundary, boundary_of, build_blowup, build_complex, decode_blowup,
    encode_blowup, project, singular_flags, star_d2_defects,
)
from plumbknot.errors import CapacityError, DomainError
from plumbknot.geometry import singularity_report
from plumbknot.vassiliev import stability


@pytest.fixture(scope="module")
def b4():
    return build_blowup(4)


@pytest.mark.parametrize("m", [3, 4])
@pytest.mark.parametrize("space", ["P", "S"])
def test_base_complex_d_squared(m, space):
    cx = build_complex(m, space)
    assert cx.d2_defects() == 0


@pytest.mark.parametrize("m", [3, 4])
def test_blowup_d_squared(m):
    assert build_blowup(m).d2_defects() == 0


def test_sizes():
    for m in (3, 4):
        P = build_complex(m, "P")
        assert len(P) == fubini(m - 1) ** 3
        assert len(build_blowup(m)) == blowup_size(m)
    assert blowup_size(3) == 14
    assert blowup_size(4) == 10368
    assert blowup_size(5) == 12677690


def test_s4_counts_and_top_dimension():
    S = build_complex(4, "S")
    assert S.counts_by_dim() == {3: 1, 4: 18, 5: 107, 6: 254, 7: 252, 8: 88}
    assert int(S.dims.max()) <= 3 * 4 - 4


def test_s_complex_is_the_singular_cells():
    S = build_complex(4, "S")
    table = osp_table(4)
    ids = set(S.keys)
    for cid in range(table.N ** 3):
        assert (cid in ids) == bool(singularity_report(table.name(cid)))


def test_lexicographic_numbering():
    P = build_complex(3, "P")
    names = [P.name(i) for i in range(len(P))]
    seqs = [tuple(n.perm.seq(d) for d in "xyz") for n in names]
    assert seqs == sorted(seqs)


def test_boundary_api_agrees(b4):
    S = build_complex(4, "S")
    for i in range(0, len(S), 17):
        name = S.name(i)
        assert boundary(name, S) == boundary_of(name)
    for i in range(0, len(b4), 97):
        name = b4.name(i)
        assert boundary(name, b4) == boundary_of(name)


def size3_fiber():
    table = osp_table(4)
    sing = singular_flags(4)
    for cid in range(table.N ** 3):
        name = table.name(cid)
        cls = name.partition.classes
        if sing[cid] and len(cls) == 1 and len(cls[0]) == 3:
            return table, cid
    raise AssertionError("no base cell with a single size-3 class")


def test_fiber_over_size3_class_is_a_triangle(b4):
    table, cid = size3_fiber()
    full = table.full_tmask(cid)
    assert bin(full).count("1") == 3
    fiber = [k for k in b4.keys if k[0] == cid]
    assert len(fiber) == 7
    dims = sorted(b4.dims[b4.index[k]] - table.dim(cid) for k in fiber)
    assert dims == [0, 0, 0, 1, 1, 1, 2]
    # internal boundary of the fiber is the simplicial boundary
    for _, mask in fiber:
        internal = [(s, f) for s, f in blowup_faces(table, cid, mask) if f[0] == cid]
        k = bin(mask).count("1")
        assert len(internal) == (k if k > 1 else 0)
        for s, (_, fm) in internal:
            assert fm & ~mask == 0 and bin(fm).count("1") == k - 1


def test_stable_cells_lift_to_products_with_simplices(b4):
    table = osp_table(5)
    sing = singular_flags(5)
    rng = np.random.default_rng(2)
    seen = set()
    for cid in rng.permutation(np.flatnonzero(sing))[:20000].tolist():
        st_ = stability(table.name(cid))
        if st_ is None or st_[1]:
            continue
        n = st_[0]
        full = table.full_tmask(cid)
        assert bin(full).count("1") == n
        top = decode_blowup(5, cid, full)
        assert top.dim == table.dim(cid) + n - 1 == 3 * 5 - 4
        # no blowup coface: every refinement loses a transposition
        for _, co in table.cofaces(cid):
            assert full & ~table.full_tmask(co)
        seen.add(n)
        if seen >= {1, 2}:
            break
    assert seen >= {1, 2}


def test_blowup_name_validation():
    table = osp_table(4)
    _, cid = size3_fiber()
    base = table.name(cid)
    cls = base.partition.classes[0]
    a, b = sorted(cls.indices)[:2]
    good = BlowupCellName(base, {DecoratedTransposition.of(a, b, cls.direction)})
    assert project(good) == base
    assert decode_blowup(4, *encode_blowup(good)) == good
    assert blowup_name_from_dict(json.loads(json.dumps(blowup_name_to_dict(good)))) == good
    other = next(d for d in "xyz" if d != cls.direction)
    with pytest.raises(DomainError):
        BlowupCellName(base, {DecoratedTransposition.of(a, b, other)})
    with pytest.raises(DomainError):
        BlowupCellName(base, frozenset())


@settings(max_examples=50, deadline=None)
@given(st.data())
def test_blowup_dimension_formula(data):
    table = osp_table(4)
    sing = np.flatnonzero(singular_flags(4))
    cid = int(data.draw(st.sampled_from(sing.tolist())))
    full = table.full_tmask(cid)
    bits = [b for b in range(3 * table.npairs) if full >> b & 1]
    sub = data.draw(st.lists(st.sampled_from(bits), min_size=1, unique=True))
    mask = sum(1 << b for b in sub)
    cell = decode_blowup(4, cid, mask)
    assert cell.dim == table.dim(cid) + len(sub) - 1
    assert all(t.pair <= c.indices for t in cell.rho for c in cell.base.partition.classes
               if c.direction == t.direction and t.pair & c.indices)


def test_sampled_stars_m5():
    table = osp_table(5)
    sing = np.flatnonzero(singular_flags(5))
    rng = np.random.default_rng(9)
    cells = []
    for cid in rng.choice(sing, 300, replace=False).tolist():
        full = table.full_tmask(cid)
        bits = [b for b in range(3 * table.npairs) if full >> b & 1]
        for r in range(1, min(len(bits), 3) + 1):
            for sub in itertools.islice(itertools.combinations(bits, r), 4):
                cells.append((cid, sum(1 << b for b in sub)))
    assert star_d2_defects(5, cells) == 0


def test_capacity_errors():
    with pytest.raises(CapacityError):
        build_blowup(5, max_cells=1000)
    with pytest.raises(CapacityError):
        build_complex(4, "P", max_cells=10)
    with pytest.raises(DomainError):
        build_complex(2, "P")
    with pytest.raises(DomainError):
        build_complex(4, "Q")


def test_jsonl_export_is_deterministic():
    a, b = io.StringIO(), io.StringIO()
    build_complex(3, "S").write_jsonl(a)
    build_complex(3, "S").write_jsonl(b)
    assert a.getvalue() == b.getvalue()
    rows = [json.loads(line) for line in a.getvalue().splitlines()]
    assert [r["id"] for r in rows] == list(range(len(rows)))
    for r in rows:
        assert all(f < len(rows) for f, _ in r["boundary"])


def test_chain_arithmetic():
    c = Chain({"a": 1, "b": 2})
    d = Chain({"a": -1, "c": 3})
    s = c + d
    assert dict(s) == {"b": 2, "c": 3}
    assert (c - c).terms == {}
    assert dict(c.scale(3)) == {"a": 3, "b": 6}
    assert s["a"] == 0 and len(s) == 2


def test_class_transpositions_match_rho_bits():
    table = osp_table(4)
    for cid in np.flatnonzero(singular_flags(4))[:200].tolist():
        name = table.name(cid)
        full = table.full_tmask(cid)
        assert {table.transposition(b) for b in range(3 * table.npairs) if full >> b & 1} == set(
            name.transpositions())
        for c in name.partition.classes:
            assert isinstance(c, AdmissibleSet)
