import pytest
from hypothesis import given
from hypothesis import strategies as st

from torusglue.lattice import (
    CohomologyLattice,
    LatticeError,
    LatticeMap,
    TamingClass,
    TopologicalData,
    apply_map,
    as_vector,
    expected_dimension,
    level,
    pair,
)

ints = st.integers(-50, 50)


@st.composite
def symmetric_lattice(draw, max_rank=4):
    rank = draw(st.integers(1, max_rank))
    q = [[0] * rank for _ in range(rank)]
    for i in range(rank):
        for j in range(i, rank):
            q[i][j] = q[j][i] = draw(ints)
    return CohomologyLattice(rank, q)


def vec(rank):
    return st.lists(ints, min_size=rank, max_size=rank)


def test_pair_examples():
    assert pair(CohomologyLattice(1, [[0]]), [3], [5]) == 0
    hyp = CohomologyLattice(2, [[0, 1], [1, 0]])
    assert pair(hyp, [1, 0], [0, 1]) == 1
    assert pair(hyp, [0, 0], [4, -7]) == 0


def test_pair_rejects_wrong_length():
    with pytest.raises(LatticeError):
        pair(CohomologyLattice.standard(2), [1], [1, 2])


def test_asymmetric_pairing_rejected():
    with pytest.raises(LatticeError):
        CohomologyLattice(2, [[0, 1], [2, 0]])


def test_non_integer_coordinates_rejected():
    with pytest.raises(LatticeError):
        as_vector([1.5])
    with pytest.raises(LatticeError):
        as_vector([True])


def test_level_examples():
    lat1 = CohomologyLattice.standard(1)
    assert level(TamingClass(lat1, [1]), [7]) == 7
    assert level(TamingClass(lat1, [1]), [-1]) == -1
    assert level(TamingClass(CohomologyLattice.standard(2), [2, 3]), [1, 1]) == 5
    with pytest.raises(LatticeError):
        level(TamingClass(lat1, [1]), [1, 2])


def test_apply_map_examples():
    one, two = CohomologyLattice.standard(1), CohomologyLattice.standard(2)
    assert apply_map(LatticeMap.identity(one), [4]) == (4,)
    assert apply_map(LatticeMap(one, one, [[2]]), [1]) == (2,)
    assert apply_map(LatticeMap(one, two, [[1], [1]]), [3]) == (3, 3)
    with pytest.raises(LatticeError):
        apply_map(LatticeMap(one, two, [[1], [1]]), [1, 1])
    with pytest.raises(LatticeError):
        LatticeMap(one, two, [[1]])


def test_expected_dimension_examples():
    assert expected_dimension(TopologicalData(1, 0, 0, 0)) == 0
    assert expected_dimension(TopologicalData(0, 3, -16, 0)) == 0
    assert expected_dimension(TopologicalData(2, 1, -8, 4)) == 3


def test_expected_dimension_rejects_non_integral_index():
    with pytest.raises(LatticeError, match="divisible by 4"):
        expected_dimension(TopologicalData(0, 1, 0, 2))
    with pytest.raises(LatticeError):
        TopologicalData(0, -1, 0, 0)


@given(symmetric_lattice(), st.data())
def test_pair_symmetric_and_bilinear(lat, data):
    z, zp, w = (data.draw(vec(lat.rank)) for _ in range(3))
    assert pair(lat, z, zp) == pair(lat, zp, z)
    zw = [a + b for a, b in zip(z, w)]
    assert pair(lat, zw, zp) == pair(lat, z, zp) + pair(lat, w, zp)


@given(st.integers(1, 4).flatmap(lambda r: st.tuples(vec(r), vec(r), vec(r))))
def test_level_is_additive(triple):
    w, z, zp = triple
    varpi = TamingClass(CohomologyLattice.standard(len(w)), w)
    assert level(varpi, [a + b for a, b in zip(z, zp)]) == level(varpi, z) + level(varpi, zp)


@given(st.integers(1, 3), st.integers(1, 3), st.data())
def test_apply_map_is_additive(rs, rt, data):
    src, tgt = CohomologyLattice.standard(rs), CohomologyLattice.standard(rt)
    mat = [data.draw(vec(rs)) for _ in range(rt)]
    m = LatticeMap(src, tgt, mat)
    z, zp = data.draw(vec(rs)), data.draw(vec(rs))
    lhs = apply_map(m, [a + b for a, b in zip(z, zp)])
    assert lhs == tuple(a + b for a, b in zip(apply_map(m, z), apply_map(m, zp)))
    # the pulled-back covector computes the same level
    cov = data.draw(vec(rt))
    direct = sum(c * x for c, x in zip(cov, apply_map(m, z)))
    assert direct == sum(c * x for c, x in zip(m.transpose_apply(cov), z))


@given(ints, st.integers(0, 5), ints, st.integers(-10, 10), st.integers(-5, 5))
def test_dimension_shifts_with_c_squared(b1, b2p, sig, c4, k):
    csq = sig + 4 * c4
    base = TopologicalData(b1, b2p, sig, csq)
    shifted = TopologicalData(b1, b2p, sig, csq + 4 * k)
    assert expected_dimension(shifted) == expected_dimension(base) + k
