"""Exact arithmetic in the (semi-infinite) group ring of a cohomology lattice.

A series is stored truncated-exact: a finite map ``z -> a(z)`` plus a validity
window ``[min_level, trunc_level]`` measured by a taming class.  Coefficients
below ``min_level`` are known to vanish, coefficients above ``trunc_level`` are
unknown.  ``trunc_level=None`` marks a finite Laurent polynomial that is exact
at every level.

The group law of ``H^2`` is written additively on exponent vectors, so the
monomial ``z`` times ``w`` is the monomial ``z + w``.
"""
from __future__ import annotations

from collections import defaultdict
from fractions import Fraction
from math import ceil, floor
from typing import Iterable, Iterator, Mapping, Sequence

from .lattice import (
    CohomologyLattice,
    IntVector,
    LatticeError,
    LatticeMap,
    TamingClass,
    apply_map,
    as_vector,
    level,
)


class SeriesError(ValueError):
    """Raised on incompatible operands or queries outside a validity window."""


def _min_bound(a: int | None, b: int | None) -> int | None:
    if a is None:
        return b
    if b is None:
        return a
    return min(a, b)


def _add_bound(a: int | None, b: int) -> int | None:
    return None if a is None else a + b


def _within(lvl: int, bound: int | None) -> bool:
    return bound is None or lvl <= bound


class SWSeries:
    """Immutable truncated-exact element of ``Z H^2(X, dX; Z)``."""

    __slots__ = ("_lattice", "_varpi", "_min_level", "_trunc_level", "_terms")

    def __init__(
        self,
        varpi: TamingClass,
        terms: Mapping[Sequence[int], int] | Iterable[tuple[Sequence[int], int]] = (),
        min_level: int | None = None,
        trunc_level: int | None = None,
        *,
        clip: bool = False,
    ):
        items = terms.items() if isinstance(terms, Mapping) else terms
        rank = varpi.lattice.rank
        acc: dict[IntVector, int] = defaultdict(int)
        for z, c in items:
            if isinstance(c, bool) or int(c) != c:
                raise SeriesError(f"coefficient {c!r} is not an integer")
            acc[as_vector(z, rank)] += int(c)
        stored = {z: c for z, c in acc.items() if c != 0}

        levels = {z: level(varpi, z) for z in stored}
        if min_level is None:
            min_level = min(levels.values(), default=0)
        if trunc_level is not None and trunc_level < min_level:
            raise SeriesError(f"empty validity window [{min_level}, {trunc_level}]")
        for z, lvl in levels.items():
            if lvl < min_level:
                raise SeriesError(f"term {z} at level {lvl} lies below min_level {min_level}")
            if not _within(lvl, trunc_level):
                if clip:
                    del stored[z]
                else:
                    raise SeriesError(
                        f"term {z} at level {lvl} lies above trunc_level {trunc_level}"
                    )

        self._lattice = varpi.lattice
        self._varpi = varpi
        self._min_level = int(min_level)
        self._trunc_level = None if trunc_level is None else int(trunc_level)
        self._terms = stored

    # construction helpers

    @classmethod
    def zero(cls, varpi: TamingClass, trunc_level: int | None = None, min_level: int = 0):
        return cls(varpi, {}, min_level=min_level, trunc_level=trunc_level)

    @classmethod
    def one(cls, varpi: TamingClass) -> "SWSeries":
        return cls(varpi, {varpi.lattice.zero(): 1})

    @classmethod
    def monomial(cls, varpi: TamingClass, z: Sequence[int], c: int = 1) -> "SWSeries":
        return cls(varpi, {tuple(z): c})

    @classmethod
    def laurent(
        cls, varpi: TamingClass, coeffs: Mapping[int, int], trunc_level: int | None = None
    ) -> "SWSeries":
        """Rank-1 convenience: ``{exponent: coefficient}`` in the generator ``t``."""
        if varpi.lattice.rank != 1:
            raise SeriesError("laurent() needs a rank-1 lattice")
        return cls(varpi, {(k,): c for k, c in coeffs.items()}, trunc_level=trunc_level)

    # accessors

    @property
    def lattice(self) -> CohomologyLattice:
        return self._lattice

    @property
    def varpi(self) -> TamingClass:
        return self._varpi

    @property
    def min_level(self) -> int:
        return self._min_level

    @property
    def trunc_level(self) -> int | None:
        return self._trunc_level

    @property
    def is_exact(self) -> bool:
        return self._trunc_level is None

    @property
    def terms(self) -> dict[IntVector, int]:
        return dict(self._terms)

    def coefficient(self, z: Sequence[int]) -> int:
        z = as_vector(z, self._lattice.rank)
        lvl = level(self._varpi, z)
        if not _within(lvl, self._trunc_level):
            raise SeriesError(f"level {lvl} exceeds trunc_level {self._trunc_level}")
        return self._terms.get(z, 0)

    def items_by_level(self) -> list[tuple[int, IntVector, int]]:
        return sorted((level(self._varpi, z), z, c) for z, c in self._terms.items())

    def __iter__(self) -> Iterator[tuple[IntVector, int]]:
        return iter(sorted(self._terms.items(), key=lambda zc: (level(self._varpi, zc[0]), zc[0])))

    def __len__(self) -> int:
        return len(self._terms)

    def __bool__(self) -> bool:
        return bool(self._terms)

    def _key(self):
        return (self._varpi, self._min_level, self._trunc_level, frozenset(self._terms.items()))

    def __eq__(self, other):
        if not isinstance(other, SWSeries):
            return NotImplemented
        return self._key() == other._key()

    def __hash__(self):
        return hash(self._key())

    def __neg__(self) -> "SWSeries":
        return self.scale(-1)

    def __add__(self, other: "SWSeries") -> "SWSeries":
        return add(self, other)

    def __sub__(self, other: "SWSeries") -> "SWSeries":
        return add(self, -other)

    def __mul__(self, other):
        if isinstance(other, int) and not isinstance(other, bool):
            return self.scale(other)
        return mul(self, other)

    __rmul__ = __mul__

    def scale(self, k: int) -> "SWSeries":
        return SWSeries(
            self._varpi,
            {z: k * c for z, c in self._terms.items()},
            min_level=self._min_level,
            trunc_level=self._trunc_level,
        )

    def truncate(self, trunc_level: int) -> "SWSeries":
        """Forget everything above ``trunc_level`` (never widens the window)."""
        new = _min_bound(self._trunc_level, trunc_level)
        return SWSeries(
            self._varpi, self._terms, min_level=self._min_level, trunc_level=new, clip=True
        )

    def __repr__(self) -> str:
        if self._lattice.rank == 1:
            body = _format_laurent(self)
        else:
            body = " + ".join(f"{c}*{list(z)}" for z, c in self) or "0"
        tail = "" if self._trunc_level is None else f" + O(level > {self._trunc_level})"
        return f"SWSeries({body}{tail})"


def _format_laurent(s: SWSeries) -> str:
    parts = []
    for (k,), c in s:
        mono = "1" if k == 0 else ("t" if k == 1 else f"t^{k}")
        if mono == "1":
            parts.append(str(c))
        elif c == 1:
            parts.append(mono)
        elif c == -1:
            parts.append("-" + mono)
        else:
            parts.append(f"{c}{mono}")
    return " + ".join(parts).replace("+ -", "- ") or "0"


def _check_compatible(s1: SWSeries, s2: SWSeries) -> None:
    if s1.lattice != s2.lattice:
        raise SeriesError("series live on different lattices")
    if s1.varpi != s2.varpi:
        raise SeriesError("series are filtered by different taming classes")


def add(s1: SWSeries, s2: SWSeries) -> SWSeries:
    _check_compatible(s1, s2)
    trunc = _min_bound(s1.trunc_level, s2.trunc_level)
    acc: dict[IntVector, int] = defaultdict(int)
    for s in (s1, s2):
        for z, c in s._terms.items():
            acc[z] += c
    return SWSeries(
        s1.varpi,
        acc,
        min_level=min(s1.min_level, s2.min_level),
        trunc_level=trunc,
        clip=True,
    )


def mul(s1: SWSeries, s2: SWSeries) -> SWSeries:
    """Convolution product; exact through ``min(m1 + l2, m2 + l1)``."""
    _check_compatible(s1, s2)
    trunc = _min_bound(
        _add_bound(s1.trunc_level, s2.min_level), _add_bound(s2.trunc_level, s1.min_level)
    )
    a = s1.items_by_level()
    b = s2.items_by_level()
    acc: dict[IntVector, int] = defaultdict(int)
    for la, za, ca in a:
        for lb, zb, cb in b:
            if trunc is not None and la + lb > trunc:
                break
            acc[tuple(x + y for x, y in zip(za, zb))] += ca * cb
    return SWSeries(
        s1.varpi, acc, min_level=s1.min_level + s2.min_level, trunc_level=trunc, clip=True
    )


def power(s: SWSeries, k: int) -> SWSeries:
    if k < 0:
        raise SeriesError("negative powers are not available in the group ring")
    out = SWSeries.one(s.varpi)
    for _ in range(k):
        out = mul(out, s)
    return out


def _level_ratio(m: LatticeMap, source_varpi: TamingClass, target_varpi: TamingClass):
    """Return alpha with ``target_level(j z) == alpha * source_level(z)``, else None."""
    pulled = m.transpose_apply(target_varpi.weights)
    w = source_varpi.weights
    ww = sum(x * x for x in w)
    if ww == 0:
        return Fraction(0) if not any(pulled) else None
    alpha = Fraction(sum(p * x for p, x in zip(pulled, w)), ww)
    if all(p == alpha * x for p, x in zip(pulled, w)):
        return alpha
    return None


def pushforward(s: SWSeries, m: LatticeMap, target_varpi: TamingClass) -> SWSeries:
    """Z-linear extension of ``m`` to series.

    The validity window transfers when the target taming class pulls back to a
    positive multiple of the source one.  Otherwise only finite Laurent
    polynomials can be pushed forward, since the unknown part of a truncated
    series could land at any target level.
    """
    if s.lattice != m.source:
        raise SeriesError("series lattice does not match the map's source")
    if target_varpi.lattice != m.target:
        raise SeriesError("target taming class lives on a different lattice")

    acc: dict[IntVector, int] = defaultdict(int)
    for z, c in s._terms.items():
        acc[apply_map(m, z)] += c
    image_levels = [level(target_varpi, z) for z in acc]

    alpha = _level_ratio(m, s.varpi, target_varpi)
    if alpha is not None and alpha > 0:
        min_level = ceil(alpha * s.min_level)
        trunc = None if s.trunc_level is None else floor(alpha * s.trunc_level)
    elif s.is_exact:
        min_level = min(image_levels, default=0)
        trunc = None
    else:
        raise SeriesError(
            "cannot bound the validity window: target taming class does not pull back "
            "to a positive multiple of the source one"
        )
    if image_levels:
        min_level = min(min_level, min(image_levels))
    return SWSeries(target_varpi, acc, min_level=min_level, trunc_level=trunc, clip=True)


def expand_geometric(
    varpi: TamingClass, period: int, leading: Sequence[int], trunc: int
) -> SWSeries:
    """``leading * (1 + t^k + t^2k + ...)`` on a rank-1 lattice, kept through ``trunc``."""
    if varpi.lattice.rank != 1:
        raise SeriesError("geometric blocks live on rank-1 lattices")
    if varpi.weights[0] <= 0:
        raise SeriesError("geometric expansion needs a positive taming weight")
    if period <= 0:
        raise SeriesError("period must be positive")
    lead = as_vector(leading, 1)
    start = level(varpi, lead)
    if trunc < start:
        raise SeriesError(f"truncation level {trunc} lies below the leading level {start}")
    terms = {}
    k = lead[0]
    while level(varpi, (k,)) <= trunc:
        terms[(k,)] = 1
        k += period
    return SWSeries(varpi, terms, min_level=start, trunc_level=trunc)


def _restricted(s: SWSeries, lvl: int) -> dict[IntVector, int]:
    if not _within(lvl, s.trunc_level):
        raise SeriesError(f"level {lvl} exceeds trunc_level {s.trunc_level}")
    return {z: c for z, c in s._terms.items() if level(s.varpi, z) <= lvl}


def equal_up_to_level(s1: SWSeries, s2: SWSeries, lvl: int) -> bool:
    _check_compatible(s1, s2)
    return _restricted(s1, lvl) == _restricted(s2, lvl)


def equal_up_to_sign(s1: SWSeries, s2: SWSeries, lvl: int) -> bool:
    _check_compatible(s1, s2)
    a = _restricted(s1, lvl)
    b = _restricted(s2, lvl)
    return a == b or a == {z: -c for z, c in b.items()}


def common_level(*series: SWSeries) -> int | None:
    """Largest level at which every operand is exact (None when all are exact)."""
    out = None
    for s in series:
        out = _min_bound(out, s.trunc_level)
    return out


# JSON fragments


def series_to_json(s: SWSeries) -> dict:
    return {
        "terms": [{"z": list(z), "c": c} for z, c in s],
        "min_level": s.min_level,
        "trunc_level": s.trunc_level,
    }


def series_from_json(obj: Mapping, varpi: TamingClass, truncate: int | None = None) -> SWSeries:
    """Parse a series fragment; geometric generators need ``truncate``."""
    if obj.get("kind") == "geometric":
        if truncate is None:
            raise SeriesError("a geometric series needs a truncation level")
        return expand_geometric(varpi, int(obj["period"]), obj["leading"], truncate)
    if "terms" not in obj:
        raise SeriesError("series fragment has neither 'terms' nor kind='geometric'")
    try:
        terms = [(t["z"], t["c"]) for t in obj["terms"]]
    except (KeyError, TypeError) as exc:
        raise SeriesError(f"malformed term list: {exc}") from exc
    out = SWSeries(
        varpi, terms, min_level=obj.get("min_level"), trunc_level=obj.get("trunc_level")
    )
    if truncate is not None:
        out = out.truncate(truncate)
    return out


__all__ = [
    "LatticeError",
    "SWSeries",
    "SeriesError",
    "add",
    "common_level",
    "equal_up_to_level",
    "equal_up_to_sign",
    "expand_geometric",
    "mul",
    "power",
    "pushforward",
    "series_from_json",
    "series_to_json",
]
