"""Product formula for gluing along 3-tori, plus the catalog of standard blocks.

A piece's effective invariant is ``orientation_sign * sw``; the sign records
the orientation chosen for the piece's homology orientation line and is
multiplied through on gluing.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping, Sequence

from .lattice import CohomologyLattice, LatticeMap, TamingClass, level
from .series import (
    SWSeries,
    SeriesError,
    expand_geometric,
    mul,
    power,
    pushforward,
    series_from_json,
    series_to_json,
)


class GluingError(ValueError):
    pass


@dataclass(frozen=True)
class ManifoldPiece:
    name: str
    lattice: CohomologyLattice
    varpi: TamingClass
    sw: SWSeries
    orientation_sign: int = 1
    notes: str = field(default="", compare=False)

    def __post_init__(self):
        if self.orientation_sign not in (1, -1):
            raise GluingError("orientation_sign must be +1 or -1")
        if self.sw.lattice != self.lattice or self.sw.varpi != self.varpi:
            raise GluingError(f"piece {self.name!r}: series is not over the piece's lattice")

    @property
    def invariant(self) -> SWSeries:
        """The signed series ``orientation_sign * sw``."""
        return self.sw.scale(self.orientation_sign)


@dataclass(frozen=True)
class GluingDescriptor:
    mode: str
    pieces: tuple[ManifoldPiece, ...]
    maps: tuple[LatticeMap, ...]
    target_lattice: CohomologyLattice
    target_varpi: TamingClass

    def __post_init__(self):
        object.__setattr__(self, "pieces", tuple(self.pieces))
        object.__setattr__(self, "maps", tuple(self.maps))
        expected = {"separating": 2, "nonseparating": 1}.get(self.mode)
        if expected is None:
            raise GluingError(f"unknown gluing mode {self.mode!r}")
        if len(self.pieces) != expected or len(self.maps) != expected:
            raise GluingError(
                f"{self.mode} gluing takes exactly {expected} piece(s) and map(s)"
            )
        for piece, m in zip(self.pieces, self.maps):
            if m.source != piece.lattice:
                raise GluingError(f"map for piece {piece.name!r} has the wrong source lattice")
            if m.target != self.target_lattice:
                raise GluingError(f"map for piece {piece.name!r} has the wrong target lattice")
        if self.target_varpi.lattice != self.target_lattice:
            raise GluingError("target taming class is not on the target lattice")

    @property
    def sign(self) -> int:
        out = 1
        for piece in self.pieces:
            out *= piece.orientation_sign
        return out


def _glued_unsigned(g: GluingDescriptor) -> SWSeries:
    try:
        factors = [pushforward(p.sw, m, g.target_varpi) for p, m in zip(g.pieces, g.maps)]
        out = factors[0]
        for f in factors[1:]:
            out = mul(out, f)
    except SeriesError as exc:
        # mul/pushforward reject empty windows; re-raise as a gluing failure
        raise GluingError(str(exc)) from exc
    return out


def glue(g: GluingDescriptor) -> SWSeries:
    """Signed invariant of the glued manifold."""
    return _glued_unsigned(g).scale(g.sign)


def glue_piece(g: GluingDescriptor, name: str = "glued") -> ManifoldPiece:
    """Glue and keep the result as a piece (unsigned series plus sign)."""
    return ManifoldPiece(
        name=name,
        lattice=g.target_lattice,
        varpi=g.target_varpi,
        sw=_glued_unsigned(g),
        orientation_sign=g.sign,
    )


# catalog

_T_LATTICE = CohomologyLattice(1, ((0,),), ("t",))
_T_VARPI = TamingClass(_T_LATTICE, (1,))

CATALOG = {
    "disk_times_torus": "D^2 x T^2: t(1 - t^2)^-1 = t + t^3 + t^5 + ...",
    "elliptic_fiber_complement": "E(n) minus a fiber neighbourhood: (t - t^-1)^(n-1); param n >= 1",
    "cylinder_R_x_T3": "[0,1] x T^3: the unit 1",
}


def torus_lattice() -> tuple[CohomologyLattice, TamingClass]:
    """Rank-1 lattice spanned by ``t`` with taming weight 1."""
    return _T_LATTICE, _T_VARPI


def catalog(name: str, params: Mapping[str, Any] | None = None, trunc: int = 41) -> ManifoldPiece:
    params = dict(params or {})
    if trunc < 1:
        raise GluingError("catalog truncation must be at least 1")
    lat, varpi = torus_lattice()
    if name == "disk_times_torus":
        sw = expand_geometric(varpi, 2, (1,), trunc)
        label = "D2xT2"
    elif name == "elliptic_fiber_complement":
        n = int(params.get("n", 1))
        if n < 1:
            raise GluingError("elliptic_fiber_complement needs n >= 1")
        sw = power(SWSeries.laurent(varpi, {1: 1, -1: -1}), n - 1)
        label = f"E({n})_fiber_complement"
    elif name == "cylinder_R_x_T3":
        sw = SWSeries.one(varpi)
        label = "RxT3"
    else:
        raise GluingError(f"unknown catalog block {name!r}; known: {sorted(CATALOG)}")
    return ManifoldPiece(label, lat, varpi, sw)


def fiber_sum(p1: ManifoldPiece, p2: ManifoldPiece, name: str | None = None) -> ManifoldPiece:
    if p1.lattice.rank != 1 or p2.lattice.rank != 1:
        raise GluingError("fiber_sum is defined for rank-1 blocks")
    if p1.varpi != p2.varpi:
        raise GluingError("fiber_sum needs matching taming classes")
    try:
        sw = mul(p1.sw, p2.sw)
    except SeriesError as exc:
        raise GluingError(str(exc)) from exc
    return ManifoldPiece(
        name or f"{p1.name}#{p2.name}",
        p1.lattice,
        p1.varpi,
        sw,
        p1.orientation_sign * p2.orientation_sign,
    )


def finiteness_report(s: SWSeries, lvl: int) -> int:
    if s.trunc_level is not None and lvl > s.trunc_level:
        raise SeriesError(f"level {lvl} exceeds trunc_level {s.trunc_level}")
    return sum(1 for z in s.terms if level(s.varpi, z) <= lvl)


# file formats


def lattice_from_json(obj: Mapping) -> CohomologyLattice:
    rank = int(obj["rank"])
    pairing = obj.get("pairing") or [[0] * rank for _ in range(rank)]
    return CohomologyLattice(rank, pairing, tuple(obj.get("basis_labels", ())))


def lattice_to_json(lat: CohomologyLattice) -> dict:
    out = {"rank": lat.rank, "pairing": [list(r) for r in lat.pairing]}
    if lat.basis_labels:
        out["basis_labels"] = list(lat.basis_labels)
    return out


def _varpi_from(obj: Mapping, lat: CohomologyLattice) -> TamingClass:
    weights = obj.get("varpi")
    if weights is None:
        weights = obj.get("lattice", {}).get("varpi")
    if weights is None:
        raise GluingError("piece file is missing 'varpi'")
    return TamingClass(lat, weights)


def piece_from_json(obj: Mapping, truncate: int | None = None) -> ManifoldPiece:
    if "catalog" in obj:
        return catalog(obj["catalog"], obj.get("params"), truncate if truncate else 41)
    lat = lattice_from_json(obj["lattice"])
    varpi = _varpi_from(obj, lat)
    sw = series_from_json(obj["series"], varpi, truncate)
    return ManifoldPiece(
        name=str(obj.get("name", "piece")),
        lattice=lat,
        varpi=varpi,
        sw=sw,
        orientation_sign=int(obj.get("orientation_sign", 1)),
        notes=str(obj.get("notes", "")),
    )


def piece_to_json(p: ManifoldPiece) -> dict:
    out = {
        "name": p.name,
        "lattice": lattice_to_json(p.lattice),
        "varpi": list(p.varpi.weights),
        "orientation_sign": p.orientation_sign,
        "series": series_to_json(p.sw),
    }
    if p.notes:
        out["notes"] = p.notes
    return out


def load_piece(path: str | Path, truncate: int | None = None) -> ManifoldPiece:
    with open(path, encoding="utf-8") as fh:
        return piece_from_json(json.load(fh), truncate)


def descriptor_from_json(
    obj: Mapping, base_dir: str | Path = ".", truncate: int | None = None
) -> GluingDescriptor:
    """Build a descriptor from a gluing file.

    Entries of ``pieces`` are paths (relative to ``base_dir``) to piece files or
    inline objects, including ``{"catalog": name, "params": {...}}``.
    """
    if truncate is None:
        truncate = obj.get("truncate")
    target = lattice_from_json(obj["target_lattice"])
    target_varpi = TamingClass(target, obj["target_varpi"])
    pieces = []
    for entry in obj["pieces"]:
        if isinstance(entry, str):
            pieces.append(load_piece(Path(base_dir) / entry, truncate))
        else:
            pieces.append(piece_from_json(entry, truncate))
    matrices: Sequence = obj["maps"]
    if len(matrices) != len(pieces):
        raise GluingError("number of maps does not match number of pieces")
    maps = tuple(LatticeMap(p.lattice, target, mat) for p, mat in zip(pieces, matrices))
    return GluingDescriptor(obj["mode"], tuple(pieces), maps, target, target_varpi)
