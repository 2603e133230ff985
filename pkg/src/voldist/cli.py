"""Command-line front end.

    voldist classify --matrix "2 0; 0 3" --mode area
    voldist eval --matrix m.json --n 10,100
    voldist witness --matrix "2 0; 0 2" --scales 4,8,16
    voldist measure --matrix "2 0; 0 2" --scales 4,8,16
    voldist oracle --cycle cycle.json

Exit codes: 0 ok, 2 invalid input, 3 ambiguous spectrum, 4 oracle failure
(a partial report is still printed).
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass, field
from typing import Optional

from . import __version__
from .chains import (
    Chain,
    GridComplexSpec,
    SlabComplexSpec,
    build_grid_complex,
    build_slab_complex,
    word_to_cycle,
)
from .classify import AREA, VOLUME, ClassifyRequest, classify, complexity_bound
from .errors import AmbiguousSpectrum, InvalidInput, OracleError
from .fclass import DistortionVerdict, evaluate, render
from .filling import DEFAULT_BUDGET, min_filling
from .intmat import IntMatrix
from .spectrum import DEFAULT_PRECISION, SpectralProfile, spectral_profile
from .witness import (
    MeasurementError,
    WitnessFamily,
    block_witness,
    diag_witness,
    jordan2_witness,
    measure_distortion,
)

EXIT_OK, EXIT_INVALID, EXIT_AMBIGUOUS, EXIT_ORACLE = 0, 2, 3, 4
COMMANDS = ("classify", "eval", "witness", "measure", "oracle")


@dataclass
class RunConfig:
    command: str
    matrix: Optional[str] = None
    k: Optional[int] = None
    mode: str = AREA
    precision_bits: int = DEFAULT_PRECISION
    grid_radius: int = 6
    height_cap: int = 8
    scales: list = field(default_factory=lambda: [4, 8, 16])
    format: str = "json"
    tol: float = 1e-12
    n_values: list = field(default_factory=lambda: [math.e])
    family: str = "auto"
    cycle: Optional[str] = None
    budget: int = DEFAULT_BUDGET

    def validate(self) -> None:
        if self.command not in COMMANDS:
            raise InvalidInput(f"unknown command {self.command!r}")
        if self.grid_radius < 1 or self.height_cap < 1 or self.budget < 1:
            raise InvalidInput("caps must be positive")
        if self.precision_bits < 32:
            raise InvalidInput("precision must be at least 32 bits")
        if self.k is not None and self.k < 2:
            raise InvalidInput("k must be at least 2")
        if self.format not in ("json", "text"):
            raise InvalidInput("format must be json or text")


# -- input parsing --------------------------------------------------------------

def _as_int(x) -> int:
    if isinstance(x, bool) or not isinstance(x, int):
        if isinstance(x, str) and x.strip().lstrip("+-").isdigit():
            return int(x)
        raise InvalidInput(f"matrix entry {x!r} is not an integer")
    return x


def parse_matrix(text: str) -> IntMatrix:
    """JSON ``{"matrix": [[...]]}`` (or a bare JSON list) or whitespace rows; ';' also ends a row."""
    text = text.strip()
    if not text:
        raise InvalidInput("empty matrix input")
    if text[0] in "{[":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise InvalidInput(f"malformed JSON matrix: {exc}") from None
        rows = data.get("matrix") if isinstance(data, dict) else data
        if not isinstance(rows, list) or not all(isinstance(r, list) for r in rows):
            raise InvalidInput("JSON matrix must be a list of rows")
        rows = [[_as_int(x) for x in r] for r in rows]
    else:
        rows = []
        for line in text.replace(";", "\n").splitlines():
            if line.strip():
                try:
                    rows.append([int(tok) for tok in line.split()])
                except ValueError:
                    raise InvalidInput(f"non-integer entry in row {line.strip()!r}") from None
    if not rows or not rows[0]:
        raise InvalidInput("empty matrix input")
    if any(len(r) != len(rows) for r in rows):
        raise InvalidInput("matrix is not square")
    return IntMatrix.from_rows(rows)


def render_matrix(M: IntMatrix) -> str:
    return "\n".join(" ".join(str(x) for x in row) for row in M.to_list())


def _read_source(src: str) -> str:
    if os.path.isfile(src):
        with open(src, encoding="utf-8") as fh:
            return fh.read()
    return src


def _parse_numbers(text: str, kind=float) -> list:
    out = []
    for tok in text.replace(";", ",").split(","):
        tok = tok.strip()
        if not tok:
            continue
        if tok == "e":
            out.append(math.e)
            continue
        try:
            v = float(tok)
        except ValueError:
            raise InvalidInput(f"not a number: {tok!r}") from None
        out.append(int(v) if kind is int or v.is_integer() else v)
    if not out:
        raise InvalidInput("empty number list")
    return out


# -- report pieces --------------------------------------------------------------

def profile_summary(p: SpectralProfile) -> dict:
    return {
        "dim": p.dim,
        "d_abs": p.d_abs,
        "char_poly": str(p.char_poly),
        "moduli": [
            {
                "lo": str(e.interval.lo),
                "hi": str(e.interval.hi),
                "approx": float(f"{float(e.interval.mid):.15g}"),
                "multiplicity": e.multiplicity,
                "side": e.side,
            }
            for e in p.moduli
        ],
        "n_off_circle": p.n_off_circle,
        "finite_order": p.finite_order,
        "diagonalizable": p.diagonalizable,
        "unipotent_block_sizes": list(p.unipotent_block_sizes) if p.unipotent_block_sizes is not None else None,
        "cyclotomic_part": str(p.cyclotomic_part),
        "offcircle_jordan": p.offcircle_jordan,
    }


def _verdict_for(cfg: RunConfig, M: IntMatrix) -> tuple[ClassifyRequest, DistortionVerdict]:
    if cfg.mode == VOLUME:
        req = ClassifyRequest(M, cfg.k if cfg.k is not None else M.dim, VOLUME)
    else:
        req = ClassifyRequest(M, cfg.k if cfg.k is not None else 2, AREA)
    return req, classify(req, cfg.precision_bits)


def _is_diagonal(M: IntMatrix) -> bool:
    return all(M[i, j] == 0 for i in range(M.dim) for j in range(M.dim) if i != j)


def choose_family(M: IntMatrix, profile: SpectralProfile, cfg: RunConfig) -> tuple[WitnessFamily, list[str]]:
    notes = []
    kind = cfg.family
    if kind == "auto":
        if profile.finite_order is None and profile.n_off_circle == 0:
            kind = "block"
        elif profile.dim == 2 and profile.offcircle_jordan:
            kind = "jordan2"
        elif profile.diagonalizable:
            kind = "diag"
        else:
            raise InvalidInput("no witness family applies to this matrix")
    if kind == "diag":
        k = cfg.k if cfg.k is not None else M.dim
        if k != M.dim:
            raise InvalidInput("diagonal witnesses are top-dimensional, k = m")
        if _is_diagonal(M):
            moduli = [abs(M[i, i]) for i in range(M.dim)]
            matrix = IntMatrix.diagonal(moduli) if M.dim == 2 else None
        else:
            moduli = [float(x.mid) for x in profile.all_moduli()]
            matrix = None
            notes.append("M is not diagonal: ambient volumes are closed-form predictions")
        return diag_witness(moduli, profile.d_abs, k, matrix=matrix), notes
    if kind == "block":
        if profile.unipotent_block_sizes is None:
            raise InvalidInput("block witnesses need every eigenvalue on the unit circle")
        k = cfg.k if cfg.k is not None else 2
        notes.append("measured on the unipotent Jordan form of M")
        return block_witness(profile.unipotent_block_sizes, k), notes
    if kind == "jordan2":
        if profile.dim != 2 or not profile.offcircle_jordan:
            raise InvalidInput("jordan2 witnesses need a 2x2 Jordan block off the unit circle")
        lam = float(profile.moduli[0].interval.mid)
        notes.append("measured on the Jordan form [[lambda, 1], [0, lambda]]")
        return jordan2_witness(lam), notes
    raise InvalidInput(f"unknown witness family {kind!r}")


def _load_cycle(path: str) -> tuple:
    try:
        data = json.loads(_read_source(path))
    except json.JSONDecodeError as exc:
        raise InvalidInput(f"malformed cycle JSON: {exc}") from None
    cx = data.get("complex", {})
    kind = cx.get("kind", "grid")
    if kind == "grid":
        m = int(cx["m"])
        spec = GridComplexSpec(
            m,
            R=int(cx.get("R", 1)),
            K=cx.get("K"),
            lo=tuple(cx["lo"]) if "lo" in cx else None,
            hi=tuple(cx["hi"]) if "hi" in cx else None,
        )
        X = build_grid_complex(spec)
    elif kind == "slab":
        M = parse_matrix(json.dumps(cx["matrix"]))
        spec = SlabComplexSpec(
            M,
            R=int(cx.get("R", 1)),
            h=int(cx.get("h", 1)),
            base_lo=tuple(cx["base_lo"]) if "base_lo" in cx else None,
            base_hi=tuple(cx["base_hi"]) if "base_hi" in cx else None,
        )
        X = build_slab_complex(spec)
    else:
        raise InvalidInput(f"unknown complex kind {kind!r}")
    cyc = data.get("cycle", {})
    if "word" in cyc:
        z = word_to_cycle(cyc["word"], X, cyc.get("basepoint"))
    elif "cells" in cyc:
        dim = int(cyc["dim"])
        items: dict = {}
        for desc, coeff in cyc["cells"]:
            key = _tuple(desc)
            items[key] = items.get(key, 0) + int(coeff)
        z = X.chain(dim, items)
    else:
        raise InvalidInput("cycle needs a 'word' or a 'cells' list")
    return X, z


def _tuple(x):
    return tuple(_tuple(y) for y in x) if isinstance(x, list) else x


# -- orchestration ---------------------------------------------------------------

def run(cfg: RunConfig) -> tuple[dict, int]:
    report: dict = {"version": __version__, "command": cfg.command}
    try:
        cfg.validate()
        if cfg.command == "oracle":
            if cfg.cycle is None:
                raise InvalidInput("oracle needs --cycle")
            X, z = _load_cycle(cfg.cycle)
            report["input"] = {"complex": X.kind, "meta": X.meta, "cycle_volume": z.volume}
            res = min_filling(X, z, cfg.budget)
            report["filling"] = res.to_dict()
            report["exit_status"] = EXIT_OK
            return report, EXIT_OK
        if cfg.matrix is None:
            raise InvalidInput("a matrix is required (--matrix)")
        M = parse_matrix(_read_source(cfg.matrix))
        report["input"] = {
            "matrix": M.to_list(),
            "k": cfg.k,
            "mode": cfg.mode,
            "precision_bits": cfg.precision_bits,
        }
        profile = spectral_profile(M, cfg.precision_bits)
        report["profile"] = profile_summary(profile)
        if cfg.command in ("classify", "eval"):
            req, verdict = _verdict_for(cfg, M)
            report["input"]["k"] = req.k
            report["verdict"] = verdict.to_dict()
            if cfg.command == "eval":
                report["evaluations"] = [
                    {
                        "n": float(f"{n:.15g}"),
                        "lower": float(f"{evaluate(verdict.lower, n, cfg.tol):.15g}"),
                        "upper": float(f"{evaluate(verdict.upper, n, cfg.tol):.15g}"),
                    }
                    for n in cfg.n_values
                ]
            elif abs(profile.d_abs) == 1 and M.dim >= 2 and req.k == 2:
                m_cx, cls = complexity_bound(M)
                report["complexity"] = {"m": m_cx, "bound": render(cls), "method": "explicit grid filling"}
            report["notes"] = list(verdict.notes)
        else:
            fam, notes = choose_family(M, profile, cfg)
            report["witness"] = fam.to_dict()
            report["notes"] = notes
            if cfg.command == "witness":
                report["instances"] = [_instance_dict(fam.instance(s)) for s in cfg.scales]
            else:
                try:
                    mrep = measure_distortion(
                        fam, cfg.scales, grid_radius=cfg.grid_radius, height_cap=cfg.height_cap, budget=cfg.budget
                    )
                except MeasurementError as exc:
                    report["measurement"] = exc.report.to_dict()
                    raise
                report["measurement"] = mrep.to_dict()
        report["exit_status"] = EXIT_OK
        return report, EXIT_OK
    except InvalidInput as exc:
        return _fail(report, exc, EXIT_INVALID)
    except AmbiguousSpectrum as exc:
        return _fail(report, exc, EXIT_AMBIGUOUS)
    except OracleError as exc:
        return _fail(report, exc, EXIT_ORACLE)


def _instance_dict(inst) -> dict:
    d = inst.to_dict()
    for key in ("height", "predicted_ambient", "predicted_subgroup"):
        d[key] = float(f"{d[key]:.12g}")
    return d


def _fail(report: dict, exc: Exception, code: int) -> tuple[dict, int]:
    report["error"] = str(exc)
    report["exit_status"] = code
    return report, code


def to_json(report: dict) -> str:
    return json.dumps(report, indent=2, ensure_ascii=False)


def to_text(report: dict, indent: int = 0) -> str:
    lines = []
    pad = "  " * indent
    for key, val in report.items():
        if isinstance(val, dict):
            lines.append(f"{pad}{key}:")
            lines.append(to_text(val, indent + 1))
        elif isinstance(val, list) and val and isinstance(val[0], dict):
            lines.append(f"{pad}{key}:")
            for item in val:
                lines.append(to_text(item, indent + 1))
                lines.append(f"{pad}  --")
        else:
            lines.append(f"{pad}{key}: {val}")
    return "\n".join(lines)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="voldist", description="Volume distortion of Z^m in Gamma_M.")
    ap.add_argument("--version", action="version", version=f"voldist {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("matrix_pos", nargs="?", metavar="MATRIX", help="matrix file or inline text")
        p.add_argument("--matrix", help="matrix file or inline text (JSON or whitespace rows)")
        p.add_argument("--k", type=int, default=None, help="volume dimension")
        p.add_argument("--mode", choices=(AREA, VOLUME), default=AREA)
        p.add_argument("--precision-bits", type=int, default=DEFAULT_PRECISION)
        p.add_argument("--grid-radius", type=int, default=6)
        p.add_argument("--height-cap", type=int, default=8)
        p.add_argument("--scales", default="4,8,16")
        p.add_argument("--format", choices=("json", "text"), default="json")
        p.add_argument("--tol", type=float, default=1e-12)
        p.add_argument("--budget", type=int, default=DEFAULT_BUDGET, help="branch-and-bound node cap")

    for name in ("classify", "eval", "witness", "measure"):
        p = sub.add_parser(name)
        common(p)
        if name == "eval":
            p.add_argument("--n", default="e", help="comma-separated evaluation points")
        if name in ("witness", "measure"):
            p.add_argument("--family", choices=("auto", "diag", "block", "jordan2"), default="auto")
    p = sub.add_parser("oracle")
    p.add_argument("--cycle", required=True, help="cycle JSON file")
    p.add_argument("--format", choices=("json", "text"), default="json")
    p.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    return ap


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    if ns.command == "oracle":
        return RunConfig("oracle", cycle=ns.cycle, format=ns.format, budget=ns.budget)
    cfg = RunConfig(
        ns.command,
        matrix=ns.matrix if ns.matrix is not None else ns.matrix_pos,
        k=ns.k,
        mode=ns.mode,
        precision_bits=ns.precision_bits,
        grid_radius=ns.grid_radius,
        height_cap=ns.height_cap,
        scales=_parse_numbers(ns.scales),
        format=ns.format,
        tol=ns.tol,
        budget=ns.budget,
    )
    if ns.command == "eval":
        cfg.n_values = _parse_numbers(ns.n)
    if ns.command in ("witness", "measure"):
        cfg.family = ns.family
    return cfg


def main(argv=None) -> int:
    ap = build_parser()
    ns = ap.parse_args(argv)
    try:
        cfg = config_from_args(ns)
    except InvalidInput as exc:
        report, code = _fail({"version": __version__, "command": ns.command}, exc, EXIT_INVALID)
    else:
        report, code = run(cfg)
    fmt = getattr(ns, "format", "json")
    out = to_json(report) if fmt == "json" else to_text(report)
    print(out)
    if code != EXIT_OK and "error" in report:
        print(f"voldist: {report['error']}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
