"""Integer lattice model of relative second cohomology.

Only the free part is modelled: a lattice is ``Z**rank`` together with a
symmetric integer pairing matrix.  Vectors are plain tuples of Python ints so
that arithmetic stays exact for arbitrarily large entries.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

IntVector = tuple[int, ...]


class LatticeError(ValueError):
    """Raised on dimension mismatches and inconsistent lattice data."""


def as_vector(z: Sequence[int], rank: int | None = None) -> IntVector:
    """Coerce ``z`` to a tuple of ints, checking its length against ``rank``."""
    out = []
    for x in z:
        if isinstance(x, bool) or int(x) != x:
            raise LatticeError(f"non-integer lattice coordinate {x!r}")
        out.append(int(x))
    if rank is not None and len(out) != rank:
        raise LatticeError(f"expected a vector of length {rank}, got {len(out)}")
    return tuple(out)


def _as_matrix(rows: Sequence[Sequence[int]], nrows: int, ncols: int) -> tuple[IntVector, ...]:
    if len(rows) != nrows:
        raise LatticeError(f"expected {nrows} rows, got {len(rows)}")
    return tuple(as_vector(row, ncols) for row in rows)


@dataclass(frozen=True)
class CohomologyLattice:
    rank: int
    pairing: tuple[IntVector, ...]
    basis_labels: tuple[str, ...] = field(default=(), compare=False)

    def __post_init__(self):
        if self.rank < 0:
            raise LatticeError("rank must be non-negative")
        q = _as_matrix(self.pairing, self.rank, self.rank)
        for i in range(self.rank):
            for j in range(i + 1, self.rank):
                if q[i][j] != q[j][i]:
                    raise LatticeError(f"pairing is not symmetric at ({i}, {j})")
        object.__setattr__(self, "pairing", q)
        object.__setattr__(self, "basis_labels", tuple(self.basis_labels))

    @classmethod
    def standard(cls, rank: int = 1) -> "CohomologyLattice":
        """Lattice with the zero pairing, e.g. the span of a torus class."""
        return cls(rank, tuple((0,) * rank for _ in range(rank)))

    def zero(self) -> IntVector:
        return (0,) * self.rank

    def basis(self, i: int) -> IntVector:
        return tuple(1 if k == i else 0 for k in range(self.rank))


def pair(lattice: CohomologyLattice, z: Sequence[int], zp: Sequence[int]) -> int:
    """Cup-product pairing ``z^T Q z'``."""
    z = as_vector(z, lattice.rank)
    zp = as_vector(zp, lattice.rank)
    q = lattice.pairing
    return sum(z[i] * q[i][j] * zp[j] for i in range(lattice.rank) for j in range(lattice.rank))


@dataclass(frozen=True)
class TamingClass:
    """Integer covector whose values filter series by level.

    A rational class is represented after clearing denominators; only the
    ordering of levels matters.
    """

    lattice: CohomologyLattice
    weights: IntVector

    def __post_init__(self):
        object.__setattr__(self, "weights", as_vector(self.weights, self.lattice.rank))


def level(varpi: TamingClass, z: Sequence[int]) -> int:
    z = as_vector(z, varpi.lattice.rank)
    return sum(w * x for w, x in zip(varpi.weights, z))


@dataclass(frozen=True)
class LatticeMap:
    source: CohomologyLattice
    target: CohomologyLattice
    matrix: tuple[IntVector, ...]

    def __post_init__(self):
        object.__setattr__(
            self, "matrix", _as_matrix(self.matrix, self.target.rank, self.source.rank)
        )

    @classmethod
    def identity(cls, lattice: CohomologyLattice) -> "LatticeMap":
        return cls(lattice, lattice, tuple(lattice.basis(i) for i in range(lattice.rank)))

    def transpose_apply(self, covector: Sequence[int]) -> IntVector:
        """Pull a covector on the target back to the source."""
        c = as_vector(covector, self.target.rank)
        return tuple(
            sum(c[i] * self.matrix[i][j] for i in range(self.target.rank))
            for j in range(self.source.rank)
        )


def apply_map(m: LatticeMap, z: Sequence[int]) -> IntVector:
    z = as_vector(z, m.source.rank)
    return tuple(sum(a * b for a, b in zip(row, z)) for row in m.matrix)


@dataclass(frozen=True)
class TopologicalData:
    b1_rel: int
    b2_plus: int
    signature: int
    c_dot_c: int

    def __post_init__(self):
        for name in ("b1_rel", "b2_plus", "signature", "c_dot_c"):
            value = getattr(self, name)
            if isinstance(value, bool) or int(value) != value:
                raise LatticeError(f"{name} must be an integer, got {value!r}")
            object.__setattr__(self, name, int(value))
        if self.b2_plus < 0:
            raise LatticeError("b2_plus must be non-negative")


def expected_dimension(t: TopologicalData) -> int:
    """Formal dimension ``b1 - 1 - b2+ + (c.c - signature)/4``.

    Raises LatticeError when ``c.c - signature`` is not divisible by 4, which
    signals characteristic data that cannot come from a Spin^c structure.
    """
    excess = t.c_dot_c - t.signature
    if excess % 4:
        raise LatticeError(
            f"c.c - signature = {excess} is not divisible by 4; index would be non-integral"
        )
    return t.b1_rel - 1 - t.b2_plus + excess // 4
