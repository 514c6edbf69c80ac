"""Command-line entry point: ``torusglue <group> <command> [options]``.

Exit codes: 0 success, 1 invalid input, 2 numerical non-convergence.
Standard output carries only the JSON payload (when ``--out`` is absent);
logs go to standard error.
"""
from __future__ import annotations

import os

_threads = os.environ.get("TORUSGLUE_THREADS")
if _threads:
    # must happen before numpy loads its BLAS
    for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        os.environ.setdefault(_var, _threads)

import argparse  # noqa: E402
import json  # noqa: E402
import logging  # noqa: E402
import math  # noqa: E402
import sys  # noqa: E402
from dataclasses import dataclass  # noqa: E402
from pathlib import Path  # noqa: E402

from . import gluing, lattice, series, spectral, vortex  # noqa: E402
from ._jsonio import dumps, parse_complex, solution_from_json, solution_to_json  # noqa: E402
from ._numerics import ConvergenceError  # noqa: E402

log = logging.getLogger("torusglue")


@dataclass(frozen=True)
class CommandResult:
    exit_code: int
    report_path: str | None = None

    def __post_init__(self):
        if self.exit_code not in (0, 1, 2):
            raise ValueError("exit_code must be 0, 1 or 2")


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(f"{self.format_usage()}{self.prog}: error: {message}")


def _emit(payload, out: str | None) -> str | None:
    text = dumps(payload)
    if out:
        Path(out).write_text(text, encoding="utf-8")
        log.info("wrote %s", out)
        return out
    sys.stdout.write(text)
    sys.stdout.flush()
    return None


def _read_json(path: str):
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


# sw


def _sw_glue(args) -> str | None:
    layout_path = Path(args.spec)
    desc = gluing.descriptor_from_json(_read_json(layout_path), layout_path.parent, args.truncate)
    piece = gluing.glue_piece(desc, name=layout_path.stem)
    log.info("glued %s: %s (sign %+d)", piece.name, piece.sw, piece.orientation_sign)
    return _emit(gluing.piece_to_json(piece), args.out)


def _sw_blocks_list(args) -> str | None:
    return _emit([{"name": k, "description": v} for k, v in sorted(gluing.CATALOG.items())], args.out)


def _sw_series_mul(args) -> str | None:
    a = gluing.load_piece(args.a, args.truncate)
    b = gluing.load_piece(args.b, args.truncate)
    if a.varpi != b.varpi:
        raise gluing.GluingError("series live over different lattices or taming classes")
    prod = series.mul(a.sw, b.sw)
    if args.truncate is not None:
        prod = prod.truncate(args.truncate)
    piece = gluing.ManifoldPiece(
        f"{a.name}*{b.name}", a.lattice, a.varpi, prod, a.orientation_sign * b.orientation_sign
    )
    return _emit(gluing.piece_to_json(piece), args.out)


def _sw_dim(args) -> str | None:
    t = lattice.TopologicalData(args.b1, args.b2plus, args.sig, args.csq)
    return _emit(lattice.expected_dimension(t), None)


# vortex


def _parse_y(text: str) -> tuple[complex, ...]:
    if text.strip() == "":
        return ()
    return tuple(parse_complex(part) for part in text.split(","))


def _vortex_solve(args) -> str | None:
    d = vortex.VortexData(_parse_y(args.y), args.r)
    g = vortex.CylinderGrid(args.T, args.nt, args.ntheta)
    s = vortex.solve_vortex(d, g, tol=args.tol)
    log.info("converged in %d Newton steps, |F| = %.3e", s.iterations, s.residual_norm)
    return _emit(solution_to_json(s), args.out)


_CHECKS = ("number", "decay", "lowerbound")


def _vortex_verify(args) -> str | None:
    s = solution_from_json(_read_json(args.path))
    checks = [c for c in args.checks.split(",") if c]
    unknown = sorted(set(checks) - set(_CHECKS))
    if unknown:
        raise ValueError(f"unknown checks {unknown}; choose from {list(_CHECKS)}")
    report: dict = {"n": s.n, "r": s.r}
    if "number" in checks:
        num = vortex.vortex_number(s)
        target = 2 * math.pi * s.n
        report["vortex_number"] = {
            "value": num,
            "target": target,
            "relative_error": abs(num - target) / target if target else abs(num),
        }
    if s.n and ("decay" in checks or "lowerbound" in checks):
        rep = vortex.decay_report(s)
        if "decay" in checks:
            report["decay"] = {
                "fitted_rate": rep.fitted_rate,
                "target_rate": rep.target_rate,
                "relative_error": rep.relative_error,
                "prefactor": rep.prefactor,
                "window": list(rep.window),
            }
        if "lowerbound" in checks:
            report["lower_bound_ratio"] = rep.lower_bound_ratio
    if args.csv:
        t, prof = vortex.decay_profile(s)
        lines = ["t,max_theta_one_minus_abs_tau_sq"]
        lines += [f"{a + 0.0:.17g},{b + 0.0:.17g}" for a, b in zip(t, prof)]
        Path(args.csv).write_text("\n".join(lines) + "\n", encoding="utf-8")
        report["csv"] = args.csv
    return _emit(report, args.out)


# spectrum


def _theta_report(bg: vortex.VortexSolution, threshold: float) -> tuple[dict, spectral.KernelSpectrum]:
    op = spectral.ThetaOperator(bg)
    ks = spectral.kernel_spectrum(op, threshold)
    g = bg.grid
    return {
        "grid": {"T": g.T, "n_t": g.n_t, "n_theta": g.n_theta},
        "eigenvalues": [float(x) for x in ks.eigenvalues],
        "reference_gap": ks.reference,
        "threshold": ks.threshold,
        "gap": ks.gap,
        "zero_mode_eigenvectors": [],
        "kernel_count": ks.count,
        "cokernel_gap": spectral.cokernel_gap(op),
    }, ks


def _spectrum_theta(args) -> str | None:
    bg = solution_from_json(_read_json(args.sol))
    report, ks = _theta_report(bg, args.threshold)
    if args.refine:
        fine = vortex.solve_vortex(bg.data, bg.grid.refined())
        report["refined"], _ = _theta_report(fine, args.threshold)
    if args.csv:
        Path(args.csv).write_text(spectral.kernel_decay_csv(ks, bg.grid), encoding="utf-8")
        report["csv"] = args.csv
    return _emit(report, args.out)


def _spectrum_model(args) -> str | None:
    periods = tuple(float(x) for x in args.periods.split(","))
    m = spectral.ModelOperatorO(args.r, args.cutoff, periods)
    rep = spectral.model_spectrum(m)
    return _emit(
        {
            "r": m.r,
            "cutoff": m.fourier_cutoff,
            "torus_periods": list(m.torus_periods),
            "eigenvalues": [float(x) for x in rep.eigenvalues],
            "gap": rep.gap,
            "gap_modes": [list(k) for k in rep.gap_modes],
            "gap_multiplicity": rep.gap_multiplicity,
            "zero_mode_eigenvectors": [[complex(c) for c in v] for v in rep.zero_mode_eigenvectors],
            "kernel_count": rep.kernel_count,
            "cokernel_gap": rep.cokernel_gap,
        },
        args.out,
    )


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="torusglue", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    groups = p.add_subparsers(dest="group", required=True, parser_class=_Parser)

    sw = groups.add_parser("sw", help="Seiberg-Witten series and gluing")
    swc = sw.add_subparsers(dest="command", required=True, parser_class=_Parser)
    c = swc.add_parser("glue", help="glue pieces described by a gluing file")
    c.add_argument("--spec", required=True)
    c.add_argument("--truncate", type=int)
    c.add_argument("--out")
    c.set_defaults(func=_sw_glue)
    blocks = swc.add_parser("blocks", help="catalog of standard blocks")
    bc = blocks.add_subparsers(dest="action", required=True, parser_class=_Parser)
    c = bc.add_parser("list")
    c.add_argument("--out")
    c.set_defaults(func=_sw_blocks_list)
    ser = swc.add_parser("series", help="series arithmetic")
    sc = ser.add_subparsers(dest="action", required=True, parser_class=_Parser)
    c = sc.add_parser("mul", help="multiply the series of two piece files")
    c.add_argument("--a", required=True)
    c.add_argument("--b", required=True)
    c.add_argument("--truncate", type=int)
    c.add_argument("--out")
    c.set_defaults(func=_sw_series_mul)
    c = swc.add_parser("dim", help="expected dimension")
    c.add_argument("--b1", type=int, required=True)
    c.add_argument("--b2plus", type=int, required=True)
    c.add_argument("--sig", type=int, required=True)
    c.add_argument("--csq", type=int, required=True)
    c.set_defaults(func=_sw_dim)

    vx = groups.add_parser("vortex", help="vortices on the cylinder")
    vc = vx.add_subparsers(dest="command", required=True, parser_class=_Parser)
    c = vc.add_parser("solve")
    c.add_argument("--y", required=True, help="comma-separated complex coefficients, e.g. 2,1 or 0.5+1i")
    c.add_argument("--r", type=float, default=1.0)
    c.add_argument("--T", type=float, default=12.0)
    c.add_argument("--nt", type=int, default=481)
    c.add_argument("--ntheta", type=int, default=64)
    c.add_argument("--tol", type=float, default=1e-11)
    c.add_argument("--out")
    c.set_defaults(func=_vortex_solve)
    c = vc.add_parser("verify")
    c.add_argument("path")
    c.add_argument("--checks", default=",".join(_CHECKS))
    c.add_argument("--csv")
    c.add_argument("--out")
    c.set_defaults(func=_vortex_verify)

    spc = groups.add_parser("spectrum", help="linearized and model spectra")
    ss = spc.add_subparsers(dest="command", required=True, parser_class=_Parser)
    c = ss.add_parser("theta")
    c.add_argument("--sol", required=True)
    c.add_argument("--refine", action="store_true")
    c.add_argument("--threshold", type=float, default=0.25)
    c.add_argument("--csv")
    c.add_argument("--out")
    c.set_defaults(func=_spectrum_theta)
    c = ss.add_parser("model")
    c.add_argument("--r", type=float, required=True)
    c.add_argument("--cutoff", type=int, required=True)
    c.add_argument("--periods", default="1,1,1")
    c.add_argument("--out")
    c.set_defaults(func=_spectrum_model)
    return p


def run(argv: list[str] | None = None) -> CommandResult:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = build_parser().parse_args(argv)
    except _UsageError as exc:
        sys.stderr.write(f"{exc}\n")
        return CommandResult(1)
    except SystemExit as exc:  # --help
        return CommandResult(0 if not exc.code else 1)
    if args.verbose:
        # rebind on every call: sys.stderr may have been swapped since the last run
        for old in list(log.handlers):
            log.removeHandler(old)
        handler = logging.StreamHandler(sys.stderr)
        handler.setFormatter(logging.Formatter("%(levelname)s %(name)s: %(message)s"))
        log.addHandler(handler)
        log.setLevel(logging.INFO)
    try:
        return CommandResult(0, args.func(args))
    except ConvergenceError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return CommandResult(2)
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        # every domain error class derives from ValueError
        sys.stderr.write(f"error: {exc}\n")
        return CommandResult(1)


def main() -> None:
    sys.exit(run().exit_code)


if __name__ == "__main__":
    main()
