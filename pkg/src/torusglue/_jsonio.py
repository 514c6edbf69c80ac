"""Deterministic JSON output and the on-disk formats of the CLI."""
from __future__ import annotations

import json
import math
import re
from typing import Any

import numpy as np

from .vortex import CylinderGrid, VortexData, VortexError, VortexSolution

_COMPLEX = re.compile(r"^[0-9eE.+\-ij]+$")


def parse_complex(text: str) -> complex:
    """Parse ``a+bi`` (also ``a``, ``bi``, ``-i``); no spaces allowed."""
    s = str(text).strip()
    if not s or not _COMPLEX.match(s) or s.count("i") + s.count("j") > 1:
        raise ValueError(f"not a complex number of the form a+bi: {text!r}")
    try:
        return complex(s.replace("i", "j"))
    except ValueError:
        raise ValueError(f"not a complex number of the form a+bi: {text!r}") from None


def format_complex(z: complex) -> str:
    z = complex(z)
    return f"{_fmt_float(z.real)}{'+' if math.copysign(1.0, z.imag) > 0 else '-'}{_fmt_float(abs(z.imag))}i"


def _fmt_float(x: float) -> str:
    if x == 0:
        return "0"
    return format(float(x), ".17g")


def _encode(obj: Any) -> str:
    if obj is None or obj is True or obj is False:
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)) and not isinstance(obj, bool):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not math.isfinite(x):
            return "null"
        out = format(x, ".17g")
        # keep floats recognisably floats
        return out if any(c in out for c in ".en") else out + ".0"
    if isinstance(obj, (complex, np.complexfloating)):
        return json.dumps(format_complex(complex(obj)))
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {_encode(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, np.ndarray):
        return _encode(obj.tolist())
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(_encode(v) for v in obj) + "]"
    raise TypeError(f"cannot encode {type(obj).__name__}")


def dumps(obj: Any) -> str:
    """Byte-stable JSON: field order as given, floats with 17 significant digits."""
    return _encode(obj) + "\n"


def solution_to_json(s: VortexSolution) -> dict:
    g = s.grid
    return {
        "data": {"y": [format_complex(c) for c in s.data.y], "r": s.data.r},
        "grid": {"T": g.T, "n_t": g.n_t, "n_theta": g.n_theta},
        "u": [float(x) for x in s.u.ravel()],
        "residual_norm": s.residual_norm,
        "iterations": s.iterations,
        "zeros": [[t, th] for t, th in s.zeros],
    }


def solution_from_json(obj: dict) -> VortexSolution:
    try:
        d = obj["data"]
        data = VortexData(tuple(parse_complex(c) for c in d["y"]), float(d["r"]))
        gg = obj["grid"]
        grid = CylinderGrid(float(gg["T"]), int(gg["n_t"]), int(gg["n_theta"]))
        u = np.asarray(obj["u"], dtype=float)
        if u.size != grid.n_t * grid.n_theta:
            raise VortexError("u has the wrong number of entries for the grid")
        return VortexSolution(
            data,
            grid,
            u.reshape(grid.n_t, grid.n_theta),
            float(obj["residual_norm"]),
            int(obj.get("iterations", 0)),
        )
    except (KeyError, TypeError) as exc:
        raise VortexError(f"malformed solution file: {exc}") from exc
