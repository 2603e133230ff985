"""Hard-cycle families, their predicted filling volumes, and oracle measurements.

A family maps a scale (n, or the height h for block families) to a cycle
in the subgroup Z^m together with closed-form predictions for its filling
volume in Z^m and in Gamma_M.  ``measure_distortion`` fills each cycle
with the exact oracle: in the grid complex of Z^m for the subgroup, and
in a slab of the Gamma_M complex (m = 2) for the ambient upper bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .chains import (
    GridComplexSpec,
    SlabComplexSpec,
    box_cycle,
    build_grid_complex,
    build_slab_complex,
    image_word,
    inverse_word,
    word_bbox,
    word_to_cycle,
)
from .classify import blockdist_exponent, block_gap, min_gap_distribution
from .errors import CapExceeded, InvalidInput, OracleError
from .fclass import lambert_w
from .filling import DEFAULT_BUDGET, min_filling
from .intmat import IntMatrix, jordan_unipotent

DIAG, BLOCK, JORDAN2 = "diag", "block", "jordan2"


def cylinder_volume(p: float, V_base: float, h: float) -> float:
    """Volume of a face of base volume V_base flowed to height h, shrinking like p^-t."""
    if h < 0:
        raise InvalidInput("height must be nonnegative")
    if p <= 0:
        raise InvalidInput("p must be positive")
    if h == 0:
        return 0.0
    lp = math.log(p)
    if abs(lp * h) < 1e-12:
        return h * V_base
    return V_base * (-math.expm1(-lp * h)) / lp


def _round_side(x: float) -> int:
    return max(1, int(round(x)))


def staircase_word(v: Sequence[int]) -> list[int]:
    out = []
    for l, a in enumerate(v):
        out.extend([(l + 1) if a > 0 else -(l + 1)] * abs(a))
    return out


def parallelogram_word(u: Sequence[int], w: Sequence[int]) -> list[int]:
    """S(u) S(w) S(u)^-1 S(w)^-1 with S the axis-ordered staircase.

    The signed area is always u x w.  Its l1 filling volume is exactly
    |u x w| when some coordinate of u or w vanishes, and can be larger
    otherwise because the staircases wind in opposite directions.
    """
    su, sw = staircase_word(u), staircase_word(w)
    return su + sw + inverse_word(su) + inverse_word(sw)


@dataclass(frozen=True)
class WitnessInstance:
    scale: float
    sides: tuple[int, ...]
    height: float
    predicted_ambient: float
    predicted_subgroup: float
    word: Optional[tuple[int, ...]] = None  # closed path in Z^m when k = 2
    flags: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "scale": self.scale,
            "sides": list(self.sides),
            "height": self.height,
            "predicted_ambient": self.predicted_ambient,
            "predicted_subgroup": self.predicted_subgroup,
            "flags": list(self.flags),
        }


@dataclass(frozen=True)
class WitnessFamily:
    kind: str
    k: int
    params: dict
    predicted_exponent: float
    matrix: Optional[IntMatrix] = None
    flags: tuple[str, ...] = ()

    def instance(self, scale) -> WitnessInstance:
        if self.kind == DIAG:
            return _diag_instance(self, scale)
        if self.kind == BLOCK:
            return _block_instance(self, scale)
        if self.kind == JORDAN2:
            return _jordan2_instance(self, scale)
        raise InvalidInput(f"unknown witness kind {self.kind!r}")

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "k": self.k,
            "params": self.params,
            "predicted_exponent": self.predicted_exponent,
            "matrix": self.matrix.to_list() if self.matrix is not None else None,
            "flags": list(self.flags),
        }


# -- diagonal families -------------------------------------------------------

def diag_witness(moduli: Sequence[float], d: int, k: int, n=None, matrix: Optional[IntMatrix] = None) -> WitnessFamily:
    """Boxes whose projections have matched filling volumes along each eigen-direction.

    ``n`` is accepted for symmetry with the other constructors; families
    are evaluated at any scale through ``instance``.
    """
    moduli = [float(x) for x in moduli]
    if len(moduli) != k:
        raise InvalidInput("need one modulus per box direction")
    if d < 1:
        raise InvalidInput("d must be a positive integer")
    n_off = sum(1 for x in moduli if abs(x - 1) > 1e-12)
    alpha = math.prod(max(x, d) for x in moduli) / d
    flags: tuple[str, ...] = ()
    if n_off == 0 or d == 1:
        exponent = 1.0
        flags = ("degenerate",)
    elif n_off == 1:
        exponent = k / (k - 1)
    else:
        exponent = 1 + math.log(d) / math.log(alpha)
    if matrix is None and k == 2 and all(float(x).is_integer() for x in moduli):
        matrix = IntMatrix.diagonal([int(x) for x in moduli])
    params = {"moduli": moduli, "d": d, "alpha": alpha, "n_off_circle": n_off}
    return WitnessFamily(DIAG, k, params, exponent, matrix, flags)


def _diag_instance(fam: WitnessFamily, n) -> WitnessInstance:
    n = float(n)
    if n < 2:
        raise InvalidInput("diagonal witnesses need n >= 2")
    k = fam.k
    moduli, d, alpha = fam.params["moduli"], fam.params["d"], fam.params["alpha"]
    if "degenerate" in fam.flags:
        # undistorted: an n-cube has the same volume in both spaces
        side = _round_side(n)
        sides = (side,) * k
        vol = float(side**k)
        return WitnessInstance(n, sides, 0.0, vol, vol, _box_word(sides), ("degenerate",))
    if fam.params["n_off_circle"] == 1:
        h = lambert_w(n)
    else:
        h = math.log(n) / math.log(alpha)
    ps = [d / lam for lam in moduli]
    V = []
    for p in ps:
        if abs(p - 1) < 1e-12:
            V.append(n / h)
        elif p > 1:
            V.append(n)
        else:
            V.append(n * p**h)
    total = math.prod(V) ** (1.0 / (k - 1))
    sides = tuple(_round_side(total / v) for v in V)
    vol_box = math.prod(sides)
    ambient = vol_box * float(d) ** (-h)
    for i, p in enumerate(ps):
        face = vol_box // sides[i]
        ambient += 2 * cylinder_volume(p, face, h)
    return WitnessInstance(n, sides, h, ambient, float(vol_box), _box_word(sides))


def _box_word(sides) -> Optional[tuple[int, ...]]:
    if len(sides) != 2:
        return None
    a, b = sides
    return tuple([1] * a + [2] * b + [-1] * a + [-2] * b)


# -- unipotent block families ------------------------------------------------------

def _block_vectors(blocks: Sequence[int], k: int):
    """Chosen basis vectors (global indices) and their side exponents, as powers of h."""
    blocks = tuple(sorted(blocks, reverse=True))
    starts = [sum(blocks[:i]) for i in range(len(blocks))]
    c = len(blocks)
    out = []
    if k <= c:
        chosen = list(range(k))
        for j in chosen:
            alpha_j = sum(blocks[i] - 1 for i in chosen if i != j)
            out.append((starts[j] + blocks[j] - 1, alpha_j + 1))
        return out
    ks = min_gap_distribution(blocks, k)
    a_sum = sum(b - 1 for b, ki in zip(blocks, ks) if ki == 1)
    gap = block_gap(blocks, ks)
    for j, (b, ki) in enumerate(zip(blocks, ks)):
        if ki == 1:
            alpha_j = a_sum - (b - 1) + gap + 1
            out.append((starts[j] + b - 1, alpha_j + 1))
            continue
        for r in range(b - ki, b):
            q = 1 if r == b - 1 else 2
            out.append((starts[j] + r, a_sum + gap + q))
    return out


def block_witness(block_sizes: Sequence[int], k: int, h=None) -> WitnessFamily:
    """Boxes on the fastest-growing Jordan vectors, pushed down by M^h."""
    blocks = tuple(sorted((int(b) for b in block_sizes), reverse=True))
    m = sum(blocks)
    f, choice = blockdist_exponent(blocks, m, k)
    params = {
        "blocks": list(blocks),
        "alpha": str(choice.alpha),
        "beta": str(choice.beta),
        "vectors": [[v, p] for v, p in _block_vectors(blocks, k)],
    }
    return WitnessFamily(BLOCK, k, params, float(choice.exponent), jordan_unipotent(blocks), ("lower-bound evidence",))


def _block_instance(fam: WitnessFamily, h) -> WitnessInstance:
    h = int(h)
    if h < 2:
        raise InvalidInput("block witnesses need h >= 2")
    alpha, beta = Fraction(fam.params["alpha"]), Fraction(fam.params["beta"])
    vecs = fam.params["vectors"]
    sides = tuple(h**p for _, p in vecs)
    word = None
    if fam.k == 2:
        Mh = fam.matrix ** h
        edges = []
        for (v, _), side in zip(vecs, sides):
            col = Mh.column(v)
            edges.append(tuple(side * c for c in col))
        word = tuple(parallelogram_word(edges[0], edges[1]))
    return WitnessInstance(float(h), sides, float(h), float(h) ** float(alpha), float(h) ** float(beta), word)


# -- Jordan block off the circle ------------------------------------------------------

def jordan2_witness(lam: float, n=None) -> WitnessFamily:
    if lam <= 1:
        raise InvalidInput("jordan2 witnesses need lambda > 1")
    matrix = None
    if float(lam).is_integer():
        L = int(lam)
        matrix = IntMatrix.from_rows([[L, 1], [0, L]])
    return WitnessFamily(JORDAN2, 2, {"lambda": float(lam)}, 2.0, matrix)


def jordan2_heights(lam: float, n: float) -> tuple[int, int]:
    """(h, side) with h = round(log n / log lambda) and side = max(1, round(n lambda^-h))."""
    if n <= 1:
        return 0, 1
    h = int(round(math.log(n) / math.log(lam)))
    return h, _round_side(n * lam ** (-h))


def _jordan2_instance(fam: WitnessFamily, n) -> WitnessInstance:
    n = float(n)
    lam = fam.params["lambda"]
    h, s = jordan2_heights(lam, n)
    if n <= 1:
        return WitnessInstance(n, (1, 1), 0.0, 4.0, 1.0, _box_word((1, 1)), ("degenerate",))
    word = None
    if fam.matrix is not None:
        Mh = fam.matrix ** h
        u = tuple(s * c for c in Mh.column(0))
        w = tuple(s * c for c in Mh.column(1))
        word = tuple(parallelogram_word(u, w))
    subgroup = float(lam ** (2 * h) * s * s)
    # five parallelograms of area linear in n
    ambient = 5.0 * n
    return WitnessInstance(n, (s, s), float(h), ambient, subgroup, word)


# -- measurement ---------------------------------------------------------------------

@dataclass
class Sample:
    scale: float
    fv_ambient_upper: int | float
    fv_subgroup: int
    ambient_source: str
    predicted_ambient: float
    predicted_subgroup: float
    optimal: bool = True

    def to_dict(self) -> dict:
        return {
            "scale": self.scale,
            "fv_ambient_upper": self.fv_ambient_upper,
            "fv_subgroup": self.fv_subgroup,
            "ambient_source": self.ambient_source,
            "predicted_ambient": _r(self.predicted_ambient),
            "predicted_subgroup": _r(self.predicted_subgroup),
            "optimal": self.optimal,
        }


def _r(x: float) -> float:
    return float(f"{x:.12g}")


@dataclass
class MeasurementReport:
    family: WitnessFamily
    samples: list[Sample] = field(default_factory=list)
    fitted_slope: Optional[float] = None
    residual: Optional[float] = None
    notes: list[str] = field(default_factory=list)
    partial: bool = False

    @property
    def predicted_exponent(self) -> float:
        return self.family.predicted_exponent

    def fit(self) -> None:
        self.samples.sort(key=lambda s: s.scale)
        xs = np.log([float(s.fv_ambient_upper) for s in self.samples])
        ys = np.log([float(s.fv_subgroup) for s in self.samples])
        if len(xs) < 2 or np.ptp(xs) == 0:
            self.fitted_slope, self.residual = None, None
            return
        slope, icept = np.polyfit(xs, ys, 1)
        res = ys - (slope * xs + icept)
        self.fitted_slope = float(slope)
        self.residual = float(np.sqrt(np.mean(res**2)))

    def to_dict(self) -> dict:
        return {
            "family": self.family.to_dict(),
            "scales": [s.scale for s in self.samples],
            "volumes": {
                "ambient_upper": [s.fv_ambient_upper for s in self.samples],
                "subgroup": [s.fv_subgroup for s in self.samples],
            },
            "samples": [s.to_dict() for s in self.samples],
            "slope": None if self.fitted_slope is None else _r(self.fitted_slope),
            "predicted": _r(self.predicted_exponent),
            "residual": None if self.residual is None else _r(self.residual),
            "notes": list(self.notes),
            "partial": self.partial,
        }


class MeasurementError(OracleError):
    def __init__(self, msg: str, report: MeasurementReport):
        super().__init__(msg)
        self.report = report


def subgroup_filling(fam: WitnessFamily, inst: WitnessInstance, cap: int, budget: int):
    m = fam.matrix.dim if fam.matrix is not None else fam.k
    if inst.word is not None:
        lo, hi = word_bbox(inst.word, m)
        hi = tuple(h if h > l else h + 1 for l, h in zip(lo, hi))
        X = build_grid_complex(GridComplexSpec(m, lo=lo, hi=hi, K=2, cap=cap))
        z = word_to_cycle(inst.word, X)
    else:
        k = len(inst.sides)
        X = build_grid_complex(GridComplexSpec(k, lo=(0,) * k, hi=tuple(inst.sides), K=k, cap=cap))
        z = box_cycle(X, (0,) * k, inst.sides)
    return min_filling(X, z, budget)


def ambient_filling(fam: WitnessFamily, inst: WitnessInstance, grid_radius: int, height_cap: int, cap: int, budget: int):
    """Slab filling of the witness placed in the top layer; None when no slab applies."""
    M = fam.matrix
    if M is None or M.dim != 2 or fam.k != 2 or inst.word is None:
        return None
    H = max(1, min(height_cap, int(math.ceil(inst.height)) + 1))
    lo, hi = word_bbox(inst.word, 2)
    # base box: preimage of the cycle's bounding box under M^H, rounded outward
    adj, det = (M ** H).adjugate(), (M ** H).det()
    pts = []
    for c in ((lo[0], lo[1]), (lo[0], hi[1]), (hi[0], lo[1]), (hi[0], hi[1])):
        v = adj.apply(c)
        pts.append(tuple(Fraction(x, det) for x in v))
    blo = tuple(math.floor(min(p[i] for p in pts)) for i in range(2))
    bhi = tuple(math.ceil(max(p[i] for p in pts)) for i in range(2))
    if max(max(abs(x) for x in blo), max(abs(x) for x in bhi)) > grid_radius:
        return None
    spec = SlabComplexSpec(M, h=H, base_lo=blo, base_hi=bhi, top_lo=lo, top_hi=hi, cap=cap)
    try:
        S = build_slab_complex(spec)
    except CapExceeded:
        return None
    z = word_to_cycle(inst.word, S, (H, (0, 0)))
    return min_filling(S, z, budget)


def measure_distortion(
    family: WitnessFamily,
    scales: Sequence,
    oracle=None,
    grid_radius: int = 6,
    height_cap: int = 8,
    cap: int = 10**6,
    budget: int = DEFAULT_BUDGET,
) -> MeasurementReport:
    """Fill each witness exactly and fit log FV_subgroup against log FV_ambient_upper."""
    if oracle is not None and oracle is not min_filling:
        raise InvalidInput("only the built-in filling oracle is supported")
    report = MeasurementReport(family)
    report.notes.append("ambient fillings are measured in one tree line of the slab, so they are upper bounds")
    report.notes.append("the slope uses upper bounds on the abscissa, so it estimates the exponent from below")
    for scale in sorted(scales):
        inst = family.instance(scale)
        try:
            sub = subgroup_filling(family, inst, cap, budget)
            amb = ambient_filling(family, inst, grid_radius, height_cap, cap, budget)
        except (OracleError, CapExceeded) as exc:
            report.partial = True
            report.fit()
            raise MeasurementError(f"scale {scale}: {exc}", report) from exc
        if amb is None:
            fv_amb, source, opt = _r(inst.predicted_ambient), "closed-form", sub.optimal
        else:
            fv_amb, source, opt = amb.volume, "slab", sub.optimal and amb.optimal
            if amb.volume > inst.predicted_ambient and inst.word is not None:
                report.notes.append(f"scale {scale}: slab filling exceeds the closed-form prediction")
        report.samples.append(
            Sample(float(scale), fv_amb, sub.volume, source, inst.predicted_ambient, inst.predicted_subgroup, opt)
        )
    report.fit()
    return report
