"""Minimal l1 integer fillings: min sum |u_j| subject to boundary(u) = z.

The relaxation is solved as a linear program in split variables
u = u+ - u- with HiGHS.  Every candidate filling is re-checked in exact
integer arithmetic, and the LP dual gives a rational lower bound: for y
with |B^T y| <= 1 componentwise, z . y <= V(u) for every filling u.
Fractional relaxations are resolved by best-first branch-and-bound on
the split variables.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np
import scipy.sparse as sp
from scipy.optimize import linprog

from .chains import Chain, ChainComplex, boundary
from .errors import BudgetExhausted, FillingInfeasible, InvalidInput

DEFAULT_BUDGET = 2000
_INT_TOL = 1e-6
_DUAL_DEN = 1 << 20


@dataclass
class FillingResult:
    volume: int
    chain: Chain
    optimal: bool
    lower_bound: Fraction
    nodes: int

    def __iter__(self):
        # unpacks as (volume, chain)
        yield self.volume
        yield self.chain

    @property
    def certified(self) -> bool:
        """The LP dual bound alone proves optimality."""
        return self.volume == math.ceil(self.lower_bound)

    def to_dict(self) -> dict:
        return {
            "volume": self.volume,
            "optimal": self.optimal,
            "certified": self.certified,
            "lower_bound": str(self.lower_bound),
            "nodes": self.nodes,
            "chain": self.chain.to_dict(),
        }


def _solve(B, zvec, bounds):
    n = B.shape[1]
    A = sp.hstack([B, -B], format="csc")
    res = linprog(
        np.ones(2 * n),
        A_eq=A,
        b_eq=zvec,
        bounds=bounds,
        method="highs-ds",
    )
    return res


def _dual_bound(B, zvec: np.ndarray, y: Optional[np.ndarray]) -> Fraction:
    if y is None:
        return Fraction(0)
    yi = np.rint(np.asarray(y) * _DUAL_DEN).astype(np.int64)
    bty = B.T.tocsr() @ yi
    scale = max(_DUAL_DEN, int(np.max(np.abs(bty))) if bty.size else 0)
    val = int(np.dot(zvec.astype(np.int64), yi))
    return max(Fraction(0), Fraction(val, scale))


def _integral_chain(B, x: np.ndarray, n: int, zvec: np.ndarray, dim: int) -> Optional[Chain]:
    u = np.rint(x[:n] - x[n:]).astype(np.int64)
    if np.max(np.abs(x[:n] - x[n:] - u), initial=0.0) > _INT_TOL:
        return None
    if not np.array_equal(B @ u, zvec):
        return None
    return Chain.from_vector(dim, u)


def _restrict(bnds, changes):
    out = list(bnds)
    for idx, lo, hi in changes:
        a, b = out[idx]
        a = a if lo is None else max(a, lo)
        b = b if hi is None else (hi if b is None else min(b, hi))
        if b is not None and a > b:
            return None
        out[idx] = (a, b)
    return out


def _branch(bnds, j, n, v):
    """Children for u_j <= floor(v) and u_j >= ceil(v) on the difference u = u+ - u-.

    Optimal integral fillings never use u+_j and u-_j together, so each
    branch may pin the opposite split variable to zero.
    """
    f, c = math.floor(v), math.ceil(v)
    down = [(j, None, f)] if f >= 0 else [(j, None, 0), (n + j, -f, None)]
    up = [(n + j, None, -c)] if c <= 0 else [(n + j, None, 0), (j, c, None)]
    return [b for b in (_restrict(bnds, down), _restrict(bnds, up)) if b is not None]


def min_filling(X: ChainComplex, z: Chain, budget: int = DEFAULT_BUDGET) -> FillingResult:
    """Exact minimal-volume integral filling of the cycle z inside X."""
    dim = z.dim + 1
    if dim > X.top_dim or z.dim < 0:
        raise InvalidInput(f"the complex has no {dim}-cells to fill a {z.dim}-cycle")
    if z.dim >= 1 and not boundary(z, X).is_zero():
        raise InvalidInput("input chain is not a cycle")
    if z.is_zero():
        return FillingResult(0, Chain(dim, {}), True, Fraction(0), 0)
    B = X.boundary_matrix(dim).astype(np.int64)
    n = B.shape[1]
    zvec = z.to_vector(X.n_cells(z.dim))

    root_bounds = [(0, None)] * (2 * n)
    res = _solve(B, zvec, root_bounds)
    if res.status == 2:
        raise FillingInfeasible("no filling exists inside this complex; enlarge it")
    if res.status != 0:
        raise FillingInfeasible(f"LP solver failed: {res.message}")
    y = getattr(getattr(res, "eqlin", None), "marginals", None)
    lower = _dual_bound(B, zvec, y)

    best: Optional[Chain] = None
    best_vol = None
    counter = 0
    heap = [(res.fun, counter, root_bounds, res.x)]
    nodes = 0
    while heap:
        bound, _, bnds, x = heapq.heappop(heap)
        if best_vol is not None and math.ceil(bound - _INT_TOL) >= best_vol:
            continue
        nodes += 1
        cand = _integral_chain(B, x, n, zvec, dim)
        if cand is not None:
            if best_vol is None or cand.volume < best_vol:
                best, best_vol = cand, cand.volume
            continue
        if nodes >= budget:
            counter += 1
            heapq.heappush(heap, (bound, counter, bnds, x))
            break
        diff = x[:n] - x[n:]
        j = int(np.argmax(np.abs(diff - np.rint(diff))))
        for child in _branch(bnds, j, n, float(diff[j])):
            r = _solve(B, zvec, child)
            if r.status != 0:
                continue
            if best_vol is not None and math.ceil(r.fun - _INT_TOL) >= best_vol:
                continue
            counter += 1
            heapq.heappush(heap, (r.fun, counter, child, r.x))
    if best is None and not heap:
        raise FillingInfeasible("the cycle has a rational filling but no integral one in this complex")
    if best is None:
        raise BudgetExhausted(f"no integral filling found within {budget} nodes")
    optimal = not heap or all(math.ceil(b - _INT_TOL) >= best_vol for b, *_ in heap)
    if best_vol == math.ceil(lower):
        optimal = True
    if boundary(best, X) != z:
        raise FillingInfeasible("returned filling failed the exact boundary check")
    return FillingResult(best_vol, best, optimal, lower, nodes)
