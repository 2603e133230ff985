"""Cubical and slab chain complexes with exact integer boundary maps.

Grid cells are pairs ``(point, dirs)``: the unit cube at ``point`` spanned
by the sorted coordinate directions ``dirs``.  Slab cells (m = 2 only) are
tagged tuples:

    ("p", s, q)        vertex q in layer s
    ("h", s, q, i)     horizontal edge q -> q + e_i
    ("v", s, q)        vertical edge (s, q) -> (s + 1, M q)
    ("sq", s, q)       horizontal unit square
    ("vc", s, q, i)    vertical 2-cell with boundary word t x_i t^-1 phi(x_i)^-1

In words the letter ``t`` runs down a vertical edge, from (s + 1, M q)
to (s, q); letters +-1..+-m are the generators x_i, and +-(m + 1) is t.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np
import scipy.sparse as sp

from .errors import CapExceeded, InvalidInput, OracleError, SingularMatrixError
from .intmat import IntMatrix

DEFAULT_CELL_CAP = 10**6


@dataclass
class Chain:
    dim: int
    coeffs: dict = field(default_factory=dict)

    def __post_init__(self):
        self.coeffs = {int(k): int(v) for k, v in self.coeffs.items() if v != 0}

    @property
    def volume(self) -> int:
        return sum(abs(v) for v in self.coeffs.values())

    def is_zero(self) -> bool:
        return not self.coeffs

    def __add__(self, other: "Chain") -> "Chain":
        if other.dim != self.dim:
            raise InvalidInput("cannot add chains of different dimensions")
        out = dict(self.coeffs)
        for k, v in other.coeffs.items():
            out[k] = out.get(k, 0) + v
        return Chain(self.dim, out)

    def __neg__(self) -> "Chain":
        return Chain(self.dim, {k: -v for k, v in self.coeffs.items()})

    def __sub__(self, other: "Chain") -> "Chain":
        return self + (-other)

    def __eq__(self, other) -> bool:
        return isinstance(other, Chain) and self.dim == other.dim and self.coeffs == other.coeffs

    def to_vector(self, n: int) -> np.ndarray:
        v = np.zeros(n, dtype=np.int64)
        for k, c in self.coeffs.items():
            v[k] = c
        return v

    @classmethod
    def from_vector(cls, dim: int, v) -> "Chain":
        return cls(dim, {i: int(c) for i, c in enumerate(v) if c != 0})

    def to_dict(self) -> dict:
        return {"dim": self.dim, "coeffs": [[k, self.coeffs[k]] for k in sorted(self.coeffs)]}

    @classmethod
    def from_dict(cls, d: dict) -> "Chain":
        return cls(int(d["dim"]), {int(k): int(v) for k, v in d["coeffs"]})


def _listify(x):
    if isinstance(x, tuple):
        return [_listify(y) for y in x]
    return x


def _tuplify(x):
    if isinstance(x, list):
        return tuple(_tuplify(y) for y in x)
    return x


class ChainComplex:
    """Finite cell complex; ``boundary_matrix(j)`` maps j-chains to (j-1)-chains."""

    def __init__(self, cells: list[list], boundaries: dict, kind: str, meta: Optional[dict] = None, check: bool = True):
        self.cells = [list(c) for c in cells]
        self.index = [{c: i for i, c in enumerate(layer)} for layer in self.cells]
        self._bd = dict(boundaries)
        self.kind = kind
        self.meta = dict(meta or {})
        if check:
            self.check_dd()

    @property
    def top_dim(self) -> int:
        return len(self.cells) - 1

    def n_cells(self, j: int) -> int:
        return len(self.cells[j]) if 0 <= j < len(self.cells) else 0

    def cell_id(self, j: int, desc) -> int:
        try:
            return self.index[j][desc]
        except (KeyError, IndexError):
            raise InvalidInput(f"cell {desc!r} of dimension {j} is not in the complex") from None

    def has_cell(self, j: int, desc) -> bool:
        return 0 <= j < len(self.index) and desc in self.index[j]

    def boundary_matrix(self, j: int) -> sp.csc_matrix:
        if j < 1 or j > self.top_dim:
            raise InvalidInput(f"no boundary map in dimension {j}")
        return self._bd[j]

    def check_dd(self) -> None:
        for j in range(2, self.top_dim + 1):
            prod = (self._bd[j - 1] @ self._bd[j]).tocoo()
            if np.any(prod.data != 0):
                raise OracleError(f"boundary of boundary is nonzero in dimension {j}")

    def max_faces(self) -> int:
        """Largest number of faces of any cell (the uniform face bound)."""
        out = 0
        for j in range(1, self.top_dim + 1):
            b = self._bd[j]
            if b.shape[1]:
                out = max(out, int(np.max(np.diff(b.indptr))))
        return out

    def chain(self, dim: int, items: dict) -> Chain:
        """Chain from a {descriptor: coefficient} map."""
        out: dict = {}
        for desc, c in items.items():
            i = self.cell_id(dim, desc)
            out[i] = out.get(i, 0) + c
        return Chain(dim, out)

    def describe(self, c: Chain) -> dict:
        return {self.cells[c.dim][k]: v for k, v in c.coeffs.items()}

    def to_dict(self) -> dict:
        bds = {}
        for j in range(1, self.top_dim + 1):
            coo = self._bd[j].tocoo()
            trip = sorted(zip(coo.row.tolist(), coo.col.tolist(), coo.data.tolist()), key=lambda t: (t[1], t[0]))
            bds[str(j)] = [[r, c, v] for r, c, v in trip if v != 0]
        return {
            "kind": self.kind,
            "meta": self.meta,
            "cells": [[_listify(c) for c in layer] for layer in self.cells],
            "boundaries": bds,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ChainComplex":
        cells = [[_tuplify(c) for c in layer] for layer in d["cells"]]
        bds = {}
        for j in range(1, len(cells)):
            trip = d["boundaries"].get(str(j), [])
            rows = [t[0] for t in trip]
            cols = [t[1] for t in trip]
            vals = [t[2] for t in trip]
            bds[j] = sp.csc_matrix((vals, (rows, cols)), shape=(len(cells[j - 1]), len(cells[j])), dtype=np.int64)
        return cls(cells, bds, d["kind"], d.get("meta"))


def _assemble(cells: list[list], face_fn, kind: str, meta: dict) -> ChainComplex:
    index = [{c: i for i, c in enumerate(layer)} for layer in cells]
    bds = {}
    for j in range(1, len(cells)):
        rows, cols, vals = [], [], []
        for col, c in enumerate(cells[j]):
            for face, sign in face_fn(j, c):
                try:
                    rows.append(index[j - 1][face])
                except KeyError:
                    raise OracleError(f"face {face!r} of {c!r} missing from the complex") from None
                cols.append(col)
                vals.append(sign)
        bds[j] = sp.csc_matrix((vals, (rows, cols)), shape=(len(cells[j - 1]), len(cells[j])), dtype=np.int64)
        bds[j].sum_duplicates()
        bds[j].eliminate_zeros()
    return ChainComplex(cells, bds, kind, meta)


# -- cubical grid ------------------------------------------------------------

@dataclass(frozen=True)
class GridComplexSpec:
    m: int
    R: int = 1
    K: Optional[int] = None
    lo: Optional[tuple[int, ...]] = None
    hi: Optional[tuple[int, ...]] = None
    cap: int = DEFAULT_CELL_CAP

    def box(self) -> tuple[tuple[int, ...], tuple[int, ...]]:
        lo = tuple(self.lo) if self.lo is not None else (-self.R,) * self.m
        hi = tuple(self.hi) if self.hi is not None else (self.R,) * self.m
        return lo, hi

    @property
    def top(self) -> int:
        return self.m if self.K is None else self.K


def grid_cell_counts(lo: Sequence[int], hi: Sequence[int], K: int) -> list[int]:
    m = len(lo)
    widths = [h - l for l, h in zip(lo, hi)]
    out = []
    for j in range(K + 1):
        total = 0
        for dirs in itertools.combinations(range(m), j):
            prod = 1
            for i in range(m):
                prod *= widths[i] if i in dirs else widths[i] + 1
            total += prod
        out.append(total)
    return out


def _grid_faces(j, cell):
    p, dirs = cell
    out = []
    for r, i in enumerate(dirs):
        rest = dirs[:r] + dirs[r + 1:]
        sign = -1 if r % 2 else 1
        shifted = p[:i] + (p[i] + 1,) + p[i + 1:]
        out.append(((shifted, rest), sign))
        out.append(((p, rest), -sign))
    return out


def build_grid_complex(spec: GridComplexSpec) -> ChainComplex:
    m, K = spec.m, spec.top
    if m < 1:
        raise InvalidInput("grid dimension must be positive")
    if not 0 <= K <= m:
        raise InvalidInput("top cell dimension must lie in 0..m")
    lo, hi = spec.box()
    if len(lo) != m or len(hi) != m or any(h < l for l, h in zip(lo, hi)):
        raise InvalidInput("invalid grid box")
    if spec.lo is None and spec.R < 1:
        raise InvalidInput("grid radius must be at least 1")
    counts = grid_cell_counts(lo, hi, K)
    if sum(counts) > spec.cap:
        raise CapExceeded(f"grid complex needs {sum(counts)} cells, cap is {spec.cap}")
    cells = []
    for j in range(K + 1):
        layer = []
        for dirs in itertools.combinations(range(m), j):
            ranges = [range(lo[i], hi[i] if i in dirs else hi[i] + 1) for i in range(m)]
            layer.extend((p, dirs) for p in itertools.product(*ranges))
        cells.append(layer)
    meta = {"m": m, "lo": list(lo), "hi": list(hi), "K": K}
    return _assemble(cells, _grid_faces, "grid", meta)


# -- slab of Gamma_M (m = 2) --------------------------------------------------

@dataclass(frozen=True)
class SlabComplexSpec:
    M: IntMatrix
    R: int = 1
    h: int = 1
    base_lo: Optional[tuple[int, int]] = None
    base_hi: Optional[tuple[int, int]] = None
    top_lo: Optional[tuple[int, int]] = None
    top_hi: Optional[tuple[int, int]] = None
    cap: int = DEFAULT_CELL_CAP


def _staircase(M: IntMatrix, i: int) -> list[tuple[int, int]]:
    """Offsets of the vertices of the staircase path for phi(x_i), axis 0 first."""
    a = M.column(i)
    pts = [(0, 0)]
    x, y = 0, 0
    step = 1 if a[0] >= 0 else -1
    for _ in range(abs(a[0])):
        x += step
        pts.append((x, y))
    step = 1 if a[1] >= 0 else -1
    for _ in range(abs(a[1])):
        y += step
        pts.append((x, y))
    return pts


def _step_edge(s, a, b):
    """Signed horizontal edge between adjacent lattice points a -> b in layer s."""
    axis = 0 if a[0] != b[0] else 1
    if b[axis] > a[axis]:
        return ("h", s, a, axis), 1
    return ("h", s, b, axis), -1


def slab_layer_boxes(spec: SlabComplexSpec) -> list[tuple[tuple[int, int], tuple[int, int]]]:
    M = spec.M
    lo = tuple(spec.base_lo) if spec.base_lo is not None else (-spec.R, -spec.R)
    hi = tuple(spec.base_hi) if spec.base_hi is not None else (spec.R, spec.R)
    boxes = [(lo, hi)]
    stairs = [_staircase(M, i) for i in range(2)]
    for _ in range(spec.h):
        pts = [M.apply(c) for c in itertools.product((lo[0], hi[0]), (lo[1], hi[1]))]
        for i, st in enumerate(stairs):
            # staircases start at M q for q with q + e_i still in the box
            if hi[i] == lo[i]:
                continue
            top = (hi[0] - 1, hi[1]) if i == 0 else (hi[0], hi[1] - 1)
            for c in itertools.product((lo[0], top[0]), (lo[1], top[1])):
                mc = M.apply(c)
                pts.extend((mc[0] + dx, mc[1] + dy) for dx, dy in st)
        lo = (min(p[0] for p in pts), min(p[1] for p in pts))
        hi = (max(p[0] for p in pts), max(p[1] for p in pts))
        boxes.append((lo, hi))
    if spec.top_lo is not None:
        lo, hi = boxes[-1]
        boxes[-1] = (
            (min(lo[0], spec.top_lo[0]), min(lo[1], spec.top_lo[1])),
            (max(hi[0], spec.top_hi[0]), max(hi[1], spec.top_hi[1])),
        )
    return boxes


def build_slab_complex(spec: SlabComplexSpec) -> ChainComplex:
    M = spec.M
    if M.dim != 2:
        raise InvalidInput("slab complexes are implemented for m = 2 only")
    if M.det() == 0:
        raise SingularMatrixError()
    if spec.h < 0:
        raise InvalidInput("height must be nonnegative")
    boxes = slab_layer_boxes(spec)
    total = 0
    for s, (lo, hi) in enumerate(boxes):
        total += sum(grid_cell_counts(lo, hi, 2))
        if s < spec.h:
            w0, w1 = hi[0] - lo[0], hi[1] - lo[1]
            total += (w0 + 1) * (w1 + 1) + w0 * (w1 + 1) + (w0 + 1) * w1
    if total > spec.cap:
        raise CapExceeded(f"slab complex needs {total} cells, cap is {spec.cap}")

    verts, edges, faces = [], [], []
    for s, (lo, hi) in enumerate(boxes):
        xs, ys = range(lo[0], hi[0] + 1), range(lo[1], hi[1] + 1)
        verts.extend(("p", s, q) for q in itertools.product(xs, ys))
        edges.extend(("h", s, q, 0) for q in itertools.product(range(lo[0], hi[0]), ys))
        edges.extend(("h", s, q, 1) for q in itertools.product(xs, range(lo[1], hi[1])))
        faces.extend(("sq", s, q) for q in itertools.product(range(lo[0], hi[0]), range(lo[1], hi[1])))
    for s in range(spec.h):
        lo, hi = boxes[s]
        xs, ys = range(lo[0], hi[0] + 1), range(lo[1], hi[1] + 1)
        edges.extend(("v", s, q) for q in itertools.product(xs, ys))
        faces.extend(("vc", s, q, 0) for q in itertools.product(range(lo[0], hi[0]), ys))
        faces.extend(("vc", s, q, 1) for q in itertools.product(xs, range(lo[1], hi[1])))

    stairs = [_staircase(M, i) for i in range(2)]

    def faces_of(j, c):
        tag = c[0]
        if tag == "h":
            _, s, q, i = c
            nq = (q[0] + 1, q[1]) if i == 0 else (q[0], q[1] + 1)
            return [(("p", s, nq), 1), (("p", s, q), -1)]
        if tag == "v":
            _, s, q = c
            return [(("p", s + 1, M.apply(q)), 1), (("p", s, q), -1)]
        if tag == "sq":
            _, s, q = c
            x, y = q
            return [
                (("h", s, (x, y), 0), 1),
                (("h", s, (x + 1, y), 1), 1),
                (("h", s, (x, y + 1), 0), -1),
                (("h", s, (x, y), 1), -1),
            ]
        _, s, q, i = c
        nq = (q[0] + 1, q[1]) if i == 0 else (q[0], q[1] + 1)
        out = [(("v", s, q), -1), (("h", s, q, i), 1), (("v", s, nq), 1)]
        base = M.apply(q)
        pts = [(base[0] + dx, base[1] + dy) for dx, dy in stairs[i]]
        for a, b in zip(pts, pts[1:]):
            e, sign = _step_edge(s + 1, a, b)
            out.append((e, -sign))
        return out

    meta = {
        "M": M.to_list(),
        "h": spec.h,
        "layers": [[list(lo), list(hi)] for lo, hi in boxes],
    }
    return _assemble([verts, edges, faces], faces_of, "slab", meta)


# -- chain operations ------------------------------------------------------------

def boundary(c: Chain, X: ChainComplex) -> Chain:
    if c.dim < 1 or c.dim > X.top_dim:
        raise InvalidInput(f"boundary undefined for a {c.dim}-chain in a {X.top_dim}-complex")
    B = X.boundary_matrix(c.dim)
    if not c.coeffs:
        return Chain(c.dim - 1, {})
    cols = list(c.coeffs)
    sub = B[:, cols].tocoo()
    out: dict = {}
    for r, k, v in zip(sub.row.tolist(), sub.col.tolist(), sub.data.tolist()):
        out[r] = out.get(r, 0) + v * c.coeffs[cols[k]]
    return Chain(c.dim - 1, out)


def is_cycle(c: Chain, X: ChainComplex) -> bool:
    return c.dim == 0 or boundary(c, X).is_zero()


def parse_word(text: str, m: int) -> list[int]:
    """Parse letters like ``x1 x2 X1 t T`` or ``1 2 -1 3`` into signed integers.

    Lower-case ``x``/``y``/``z`` and ``x<i>`` are generators; upper case is
    the inverse; ``t``/``T`` is the stable letter (index m + 1).
    """
    out = []
    named = {"x": 1, "y": 2, "z": 3}
    for tok in text.replace(",", " ").split():
        if tok.lstrip("+-").isdigit():
            out.append(int(tok))
            continue
        base, inv = tok[0].lower(), tok[0].isupper()
        if tok.endswith("^-1"):
            tok, inv = tok[:-3], not inv
        rest = tok[1:]
        if base == "t" and not rest:
            idx = m + 1
        elif base == "x" and rest.isdigit():
            idx = int(rest)
        elif base in named and not rest:
            idx = named[base]
        else:
            raise InvalidInput(f"cannot parse letter {tok!r}")
        out.append(-idx if inv else idx)
    return out


def word_to_cycle(word: Sequence[int], X: ChainComplex, basepoint=None) -> Chain:
    """The 1-chain traced by a closed edge path; raises if it leaves X or fails to close."""
    if X.kind == "grid":
        m = X.meta["m"]
        p = tuple(basepoint) if basepoint is not None else (0,) * m
        start = p
        out: dict = {}
        for letter in word:
            i = abs(letter) - 1
            if letter == 0 or i >= m:
                raise InvalidInput(f"letter {letter} is not a generator of Z^{m}")
            q = p[:i] + (p[i] + (1 if letter > 0 else -1),) + p[i + 1:]
            desc, sign = ((p, (i,)), 1) if letter > 0 else ((q, (i,)), -1)
            if not X.has_cell(1, desc):
                raise InvalidInput(f"word leaves the complex at {q}")
            k = X.index[1][desc]
            out[k] = out.get(k, 0) + sign
            p = q
        if p != start:
            raise InvalidInput("word does not close up")
        return Chain(1, out)
    if X.kind == "slab":
        M = IntMatrix.from_rows(X.meta["M"])
        adj, det = M.adjugate(), M.det()
        if basepoint is None:
            s, p = X.meta["h"], (0, 0)
        else:
            s, p = int(basepoint[0]), tuple(basepoint[1])
        start = (s, p)
        out = {}
        for letter in word:
            if abs(letter) in (1, 2):
                i = abs(letter) - 1
                q = p[:i] + (p[i] + (1 if letter > 0 else -1),) + p[i + 1:]
                desc, sign = (("h", s, p, i), 1) if letter > 0 else (("h", s, q, i), -1)
                ns = s
            elif abs(letter) == 3:
                if letter > 0:
                    # down from (s, p) with p = M q
                    v = adj.apply(p)
                    if any(c % det for c in v) or s == 0:
                        raise InvalidInput(f"no vertical edge below layer {s} point {p}")
                    q = tuple(c // det for c in v)
                    desc, sign, ns = ("v", s - 1, q), -1, s - 1
                else:
                    q = M.apply(p)
                    desc, sign, ns = ("v", s, p), 1, s + 1
            else:
                raise InvalidInput(f"letter {letter} is not a generator of Gamma_M")
            if not X.has_cell(1, desc):
                raise InvalidInput(f"word leaves the complex at layer {ns} point {q}")
            k = X.index[1][desc]
            out[k] = out.get(k, 0) + sign
            s, p = ns, q
        if (s, p) != start:
            raise InvalidInput("word does not close up")
        return Chain(1, out)
    raise InvalidInput(f"words are not supported on {X.kind} complexes")


def word_bbox(word: Sequence[int], m: int, basepoint=None) -> tuple[tuple[int, ...], tuple[int, ...]]:
    p = list(basepoint) if basepoint is not None else [0] * m
    lo, hi = list(p), list(p)
    for letter in word:
        i = abs(letter) - 1
        p[i] += 1 if letter > 0 else -1
        lo[i] = min(lo[i], p[i])
        hi[i] = max(hi[i], p[i])
    return tuple(lo), tuple(hi)


def image_word(M: IntMatrix, i: int) -> list[int]:
    """phi(x_i) = x_1^{a_1} ... x_m^{a_m} with a = column i of M."""
    out = []
    for l, a in enumerate(M.column(i)):
        out.extend([(l + 1) if a > 0 else -(l + 1)] * abs(a))
    return out


def inverse_word(word: Sequence[int]) -> list[int]:
    return [-l for l in reversed(word)]


def commutator_image_cycle(M: IntMatrix, i: int, j: int) -> tuple[ChainComplex, Chain]:
    """Grid complex around the loop phi(x_i) phi(x_j) phi(x_i)^-1 phi(x_j)^-1 and its cycle."""
    wi, wj = image_word(M, i), image_word(M, j)
    word = wi + wj + inverse_word(wi) + inverse_word(wj)
    lo, hi = word_bbox(word, M.dim)
    # a degenerate box still needs room for 2-cells
    hi = tuple(h if h > l else h + 1 for l, h in zip(lo, hi))
    X = build_grid_complex(GridComplexSpec(M.dim, lo=lo, hi=hi, K=2))
    return X, word_to_cycle(word, X)


def box_cycle(X: ChainComplex, corner: Sequence[int], sides: Sequence[int], axes: Optional[Sequence[int]] = None) -> Chain:
    """Boundary of the box corner + prod [0, sides_i] e_{axes_i}, a (k-1)-cycle for k = len(sides)."""
    m = X.meta["m"]
    axes = tuple(range(len(sides))) if axes is None else tuple(sorted(axes))
    k = len(sides)
    if len(axes) != k or k > X.top_dim:
        raise InvalidInput("box dimension exceeds the complex")
    side_of = dict(zip(axes, sides))
    ranges = [range(corner[i], corner[i] + side_of[i]) if i in side_of else (corner[i],) for i in range(m)]
    top = {(p, axes): 1 for p in itertools.product(*ranges)}
    return boundary(X.chain(k, top), X)


def explicit_filling(X: ChainComplex, z: Chain) -> Chain:
    """A 2-chain u with boundary z for a 1-cycle z in a grid complex, by coning to the low corner.

    Each vertex p is joined to the corner b by the path that fixes
    coordinates in increasing order; each edge then sweeps a strip of
    unit squares.  For m = 2 the result is the winding-number chain, which
    is the unique (hence minimal) filling.
    """
    if X.kind != "grid" or z.dim != 1 or X.top_dim < 2:
        raise InvalidInput("explicit fillings are built for 1-cycles in grid complexes with 2-cells")
    if not is_cycle(z, X):
        raise InvalidInput("input chain is not a cycle")
    m = X.meta["m"]
    b = tuple(X.meta["lo"])
    out: dict = {}
    for eid, c in z.coeffs.items():
        p, (i,) = X.cells[1][eid]
        for j in range(i + 1, m):
            if p[j] == b[j]:
                continue
            sgn = -1 if p[j] > b[j] else 1
            lo_j, hi_j = (b[j], p[j]) if p[j] > b[j] else (p[j], b[j])
            for t in range(lo_j, hi_j):
                q = tuple(p[l] if l < j else (t if l == j else b[l]) for l in range(m))
                key = X.cell_id(2, (q, (i, j)))
                out[key] = out.get(key, 0) + sgn * c
    u = Chain(2, out)
    if boundary(u, X) != z:
        raise OracleError("explicit filling failed its boundary check")
    return u
