"""Exact integer matrices and polynomials.

Everything here works over Python ints / Fractions; no floating point.
Matrices follow the column convention of Gamma_M: column ``i`` of ``M``
holds the exponents of ``phi(x_i)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence

from .errors import InvalidInput, SingularMatrixError


@dataclass(frozen=True)
class IntMatrix:
    rows: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        rows = tuple(tuple(int(v) for v in r) for r in self.rows)
        if not rows:
            raise InvalidInput("empty matrix")
        m = len(rows)
        if any(len(r) != m for r in rows):
            raise InvalidInput("matrix is not square")
        object.__setattr__(self, "rows", rows)

    @classmethod
    def from_rows(cls, rows: Iterable[Iterable[int]]) -> "IntMatrix":
        out = []
        for r in rows:
            row = []
            for v in r:
                if isinstance(v, bool) or not isinstance(v, int):
                    if isinstance(v, Fraction) and v.denominator == 1:
                        v = v.numerator
                    else:
                        raise InvalidInput(f"non-integer entry {v!r}")
                row.append(v)
            out.append(tuple(row))
        return cls(tuple(out))

    @classmethod
    def identity(cls, m: int) -> "IntMatrix":
        return cls(tuple(tuple(int(i == j) for j in range(m)) for i in range(m)))

    @classmethod
    def diagonal(cls, entries: Sequence[int]) -> "IntMatrix":
        m = len(entries)
        return cls(tuple(tuple(entries[i] if i == j else 0 for j in range(m)) for i in range(m)))

    @property
    def dim(self) -> int:
        return len(self.rows)

    def __getitem__(self, ij):
        i, j = ij
        return self.rows[i][j]

    def column(self, j: int) -> tuple[int, ...]:
        return tuple(r[j] for r in self.rows)

    def to_list(self) -> list[list[int]]:
        return [list(r) for r in self.rows]

    def transpose(self) -> "IntMatrix":
        return IntMatrix(tuple(zip(*self.rows)))

    def __matmul__(self, other: "IntMatrix") -> "IntMatrix":
        cols = list(zip(*other.rows))
        return IntMatrix(tuple(tuple(sum(a * b for a, b in zip(r, c)) for c in cols) for r in self.rows))

    def __add__(self, other: "IntMatrix") -> "IntMatrix":
        return IntMatrix(tuple(tuple(a + b for a, b in zip(r, s)) for r, s in zip(self.rows, other.rows)))

    def __sub__(self, other: "IntMatrix") -> "IntMatrix":
        return IntMatrix(tuple(tuple(a - b for a, b in zip(r, s)) for r, s in zip(self.rows, other.rows)))

    def scale(self, c: int) -> "IntMatrix":
        return IntMatrix(tuple(tuple(c * a for a in r) for r in self.rows))

    def apply(self, v: Sequence[int]) -> tuple[int, ...]:
        return tuple(sum(a * b for a, b in zip(r, v)) for r in self.rows)

    def __pow__(self, n: int) -> "IntMatrix":
        if n < 0:
            return self.inverse_unimodular() ** (-n)
        result = IntMatrix.identity(self.dim)
        base = self
        while n:
            if n & 1:
                result = result @ base
            base = base @ base
            n >>= 1
        return result

    def is_identity(self) -> bool:
        return all(v == int(i == j) for i, r in enumerate(self.rows) for j, v in enumerate(r))

    def trace(self) -> int:
        return sum(self.rows[i][i] for i in range(self.dim))

    def det(self) -> int:
        return bareiss_det([list(r) for r in self.rows])

    def adjugate(self) -> "IntMatrix":
        m = self.dim
        if m == 1:
            return IntMatrix(((1,),))
        cof = []
        for i in range(m):
            row = []
            for j in range(m):
                minor = [r[:j] + r[j + 1:] for k, r in enumerate(self.rows) if k != i]
                row.append((-1) ** (i + j) * bareiss_det([list(r) for r in minor]))
            cof.append(row)
        return IntMatrix(tuple(zip(*cof)))

    def inverse_unimodular(self) -> "IntMatrix":
        d = self.det()
        if abs(d) != 1:
            raise InvalidInput(f"matrix is not invertible over Z (det = {d})")
        return self.adjugate().scale(d)


def bareiss_det(a: list[list[int]]) -> int:
    """Fraction-free Gaussian elimination; ``a`` is consumed."""
    n = len(a)
    if n == 0:
        return 1
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for r in range(k + 1, n):
                if a[r][k] != 0:
                    a[k], a[r] = a[r], a[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


def rank(rows: Sequence[Sequence[int | Fraction]]) -> int:
    """Rank over the rationals."""
    a = [[Fraction(v) for v in r] for r in rows]
    if not a:
        return 0
    nrows, ncols = len(a), len(a[0])
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, nrows) if a[i][c] != 0), None)
        if piv is None:
            continue
        a[r], a[piv] = a[piv], a[r]
        for i in range(r + 1, nrows):
            if a[i][c] != 0:
                f = a[i][c] / a[r][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[r])]
        r += 1
        if r == nrows:
            break
    return r


# ---------------------------------------------------------------------------
# polynomials


@dataclass(frozen=True)
class IntPolynomial:
    """Integer polynomial, coefficients in ascending degree."""

    coeffs: tuple[int, ...]

    def __post_init__(self):
        c = [int(v) for v in self.coeffs]
        while c and c[-1] == 0:
            c.pop()
        object.__setattr__(self, "coeffs", tuple(c))

    @classmethod
    def from_roots(cls, roots: Iterable[int]) -> "IntPolynomial":
        p = cls((1,))
        for r in roots:
            p = p * cls((-r, 1))
        return p

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def leading(self) -> int:
        return self.coeffs[-1] if self.coeffs else 0

    def is_monic(self) -> bool:
        return self.leading == 1

    def __call__(self, x):
        acc = 0
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def eval_matrix(self, m: IntMatrix) -> IntMatrix:
        n = m.dim
        acc = IntMatrix(tuple((0,) * n for _ in range(n)))
        eye = IntMatrix.identity(n)
        for c in reversed(self.coeffs):
            acc = acc @ m + eye.scale(c)
        return acc

    def __add__(self, other):
        a, b = self.coeffs, other.coeffs
        n = max(len(a), len(b))
        return IntPolynomial(tuple((a[i] if i < len(a) else 0) + (b[i] if i < len(b) else 0) for i in range(n)))

    def __neg__(self):
        return IntPolynomial(tuple(-c for c in self.coeffs))

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if not self.coeffs or not other.coeffs:
            return IntPolynomial(())
        out = [0] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a:
                for j, b in enumerate(other.coeffs):
                    out[i + j] += a * b
        return IntPolynomial(tuple(out))

    def __pow__(self, n: int):
        out = IntPolynomial((1,))
        for _ in range(n):
            out = out * self
        return out

    def divmod_monic(self, d: "IntPolynomial") -> tuple["IntPolynomial", "IntPolynomial"]:
        if not d.is_monic():
            raise InvalidInput("divisor must be monic")
        r = list(self.coeffs)
        dd = d.degree
        if len(r) - 1 < dd:
            return IntPolynomial(()), self
        q = [0] * (len(r) - dd)
        for i in range(len(r) - 1, dd - 1, -1):
            c = r[i]
            if c:
                q[i - dd] = c
                for j, dc in enumerate(d.coeffs):
                    r[i - dd + j] -= c * dc
        return IntPolynomial(tuple(q)), IntPolynomial(tuple(r[:dd]))

    def derivative(self) -> "IntPolynomial":
        return IntPolynomial(tuple(i * c for i, c in enumerate(self.coeffs) if i))

    def __str__(self):
        if not self.coeffs:
            return "0"
        terms = []
        for i in range(len(self.coeffs) - 1, -1, -1):
            c = self.coeffs[i]
            if not c:
                continue
            mono = "" if i == 0 else ("x" if i == 1 else f"x^{i}")
            if mono and abs(c) == 1:
                body = mono
            else:
                body = f"{abs(c)}{'*' if mono else ''}{mono}"
            terms.append(("-" if c < 0 else "+", body))
        s = ("-" if terms[0][0] == "-" else "") + terms[0][1]
        for sgn, body in terms[1:]:
            s += f" {sgn} {body}"
        return s


# rational polynomial helpers (lists of Fractions, ascending)

def _qtrim(p):
    p = list(p)
    while p and p[-1] == 0:
        p.pop()
    return p


def _qdivmod(a, b):
    a = _qtrim([Fraction(x) for x in a])
    b = _qtrim([Fraction(x) for x in b])
    if not b:
        raise ZeroDivisionError("polynomial division by zero")
    q = [Fraction(0)] * max(len(a) - len(b) + 1, 1)
    while len(a) >= len(b) and a:
        c = a[-1] / b[-1]
        s = len(a) - len(b)
        q[s] = c
        for j, bc in enumerate(b):
            a[s + j] -= c * bc
        a = _qtrim(a)
    return _qtrim(q), a


def _qmonic(p):
    p = _qtrim(p)
    return [c / p[-1] for c in p] if p else p


def qgcd(a, b):
    """Monic gcd over Q."""
    a = _qtrim([Fraction(x) for x in a])
    b = _qtrim([Fraction(x) for x in b])
    while b:
        _, r = _qdivmod(a, b)
        a, b = b, r
    return _qmonic(a)


def _to_int_poly(p) -> IntPolynomial:
    if any(Fraction(c).denominator != 1 for c in p):
        raise ValueError("polynomial has non-integral coefficients")
    return IntPolynomial(tuple(int(c) for c in p))


def poly_gcd(p: IntPolynomial, q: IntPolynomial) -> IntPolynomial:
    """Monic gcd of two monic integer polynomials (integral by Gauss's lemma)."""
    return _to_int_poly(qgcd(p.coeffs, q.coeffs))


def is_squarefree(p: IntPolynomial) -> bool:
    if p.degree <= 0:
        return True
    return len(qgcd(p.coeffs, p.derivative().coeffs)) == 1


def squarefree_decomposition(p: IntPolynomial) -> list[tuple[IntPolynomial, int]]:
    """Yun's algorithm for a monic p: returns [(f_i, i)] with p = prod f_i^i, f_i squarefree."""
    if not p.is_monic():
        raise InvalidInput("squarefree decomposition expects a monic polynomial")
    if p.degree <= 0:
        return []
    f = [Fraction(c) for c in p.coeffs]
    fp = [Fraction(c) for c in p.derivative().coeffs]
    a = qgcd(f, fp)
    b, _ = _qdivmod(f, a)
    c, _ = _qdivmod(fp, a)
    out = []
    i = 1
    while len(_qtrim(b)) > 1:
        bp = [k * x for k, x in enumerate(b)][1:]
        d = [x - y for x, y in _zip_pad(c, bp)]
        g = qgcd(b, d)
        if len(g) > 1:
            out.append((_to_int_poly(g), i))
        b, _ = _qdivmod(b, g)
        c, _ = _qdivmod(d, g)
        i += 1
    return out


def _zip_pad(a, b):
    n = max(len(a), len(b))
    a = list(a) + [Fraction(0)] * (n - len(a))
    b = list(b) + [Fraction(0)] * (n - len(b))
    return zip(a, b)


# ---------------------------------------------------------------------------
# characteristic and minimal polynomials


def char_poly(m: IntMatrix) -> IntPolynomial:
    """det(xI - M) via Faddeev-LeVerrier; all divisions are exact."""
    n = m.dim
    coeffs = [0] * (n + 1)
    coeffs[n] = 1
    zero = IntMatrix(tuple((0,) * n for _ in range(n)))
    eye = IntMatrix.identity(n)
    mk = zero
    for k in range(1, n + 1):
        mk = m @ mk + eye.scale(coeffs[n - k + 1])
        t = (m @ mk).trace()
        q, r = divmod(-t, k)
        assert r == 0, "Faddeev-LeVerrier division must be exact"
        coeffs[n - k] = q
    return IntPolynomial(tuple(coeffs))


def min_poly(m: IntMatrix) -> IntPolynomial:
    """Minimal polynomial from the first linear dependency among I, M, M^2, ..."""
    n = m.dim
    basis: list[tuple[list[Fraction], list[Fraction], int]] = []  # (reduced vec, combo, pivot)
    power = IntMatrix.identity(n)
    for j in range(n + 1):
        vec = [Fraction(v) for r in power.rows for v in r]
        combo = [Fraction(0)] * (n + 1)
        combo[j] = Fraction(1)
        for bvec, bcombo, piv in basis:
            if vec[piv] != 0:
                f = vec[piv] / bvec[piv]
                vec = [x - f * y for x, y in zip(vec, bvec)]
                combo = [x - f * y for x, y in zip(combo, bcombo)]
        piv = next((i for i, x in enumerate(vec) if x != 0), None)
        if piv is None:
            return _to_int_poly(_qmonic(combo[: j + 1]))
        basis.append((vec, combo, piv))
        power = power @ m
    raise AssertionError("Cayley-Hamilton guarantees a dependency by degree n")


def is_diagonalizable(m: IntMatrix) -> bool:
    """True iff the minimal polynomial is squarefree (diagonalizable over C)."""
    return is_squarefree(min_poly(m))


# ---------------------------------------------------------------------------
# cyclotomic polynomials


def euler_phi(n: int) -> int:
    result = n
    p = 2
    k = n
    while p * p <= k:
        if k % p == 0:
            while k % p == 0:
                k //= p
            result -= result // p
        p += 1
    if k > 1:
        result -= result // k
    return result


@lru_cache(maxsize=None)
def cyclotomic(n: int) -> IntPolynomial:
    p = IntPolynomial((-1,) + (0,) * (n - 1) + (1,))
    for d in range(1, n):
        if n % d == 0:
            p, r = p.divmod_monic(cyclotomic(d))
            assert r.is_zero()
    return p


def cyclotomic_indices_up_to_degree(deg: int) -> list[int]:
    """All n with phi(n) <= deg; phi(n) >= sqrt(n/2) bounds the search."""
    return [n for n in range(1, 2 * deg * deg + 3) if euler_phi(n) <= deg]


def strip_cyclotomic(p: IntPolynomial) -> tuple[list[tuple[int, int]], IntPolynomial]:
    """Split off every cyclotomic factor of a monic p.

    Returns ``([(n, multiplicity), ...], remainder)`` with
    ``prod Phi_n^mult * remainder == p``.
    """
    if not p.is_monic():
        raise InvalidInput("strip_cyclotomic expects a monic polynomial")
    if p.coeffs[0] == 0:
        raise InvalidInput("zero constant term (det M = 0)")
    factors = []
    rem = p
    for n in cyclotomic_indices_up_to_degree(p.degree):
        phi = cyclotomic(n)
        if phi.degree > rem.degree:
            continue
        mult = 0
        while rem.degree >= phi.degree:
            q, r = rem.divmod_monic(phi)
            if not r.is_zero():
                break
            rem = q
            mult += 1
        if mult:
            factors.append((n, mult))
    return factors, rem


def cyclotomic_product(factors: Sequence[tuple[int, int]]) -> IntPolynomial:
    out = IntPolynomial((1,))
    for n, mult in factors:
        out = out * cyclotomic(n) ** mult
    return out


def _lcm(values: Iterable[int]) -> int:
    out = 1
    for v in values:
        out = out * v // math.gcd(out, v)
    return out


def is_finite_order(m: IntMatrix) -> int | None:
    """Exact multiplicative order of M, or None if M has infinite order."""
    if m.det() == 0:
        raise SingularMatrixError()
    factors, rem = strip_cyclotomic(char_poly(m))
    if rem.degree > 0:
        return None
    if not is_squarefree(min_poly(m)):
        return None
    big = _lcm(n for n, _ in factors)
    if not (m ** big).is_identity():
        raise AssertionError("semisimple matrix with root-of-unity spectrum must satisfy M^N = I")
    for d in sorted(d for d in range(1, big + 1) if big % d == 0):
        if (m ** d).is_identity():
            return d
    return big


def _nullity(a: IntMatrix) -> int:
    return a.dim - rank(a.rows)


def unit_circle_block_sizes(m: IntMatrix) -> list[int]:
    """Jordan block sizes belonging to root-of-unity eigenvalues of M.

    With N the lcm of the cyclotomic indices of char_poly(M), these are the
    block sizes of eigenvalue 1 in M^N, read off from the kernel dimensions
    of (M^N - I)^j.
    """
    factors, _ = strip_cyclotomic(char_poly(m))
    if not factors:
        return []
    big = _lcm(n for n, _ in factors)
    a = (m ** big) - IntMatrix.identity(m.dim)
    nulls = [0]
    power = IntMatrix.identity(m.dim)
    for _ in range(m.dim):
        power = power @ a
        nulls.append(_nullity(power))
        if nulls[-1] == nulls[-2]:
            break
    # at_least[j] = number of blocks of size >= j
    at_least = [nulls[j] - nulls[j - 1] for j in range(1, len(nulls))]
    sizes = []
    for j, cnt in enumerate(at_least, start=1):
        nxt = at_least[j] if j < len(at_least) else 0
        sizes.extend([j] * (cnt - nxt))
    return sorted(sizes, reverse=True)


def unipotent_block_sizes(m: IntMatrix) -> list[int]:
    """Block sizes of the absolute Jordan form when every eigenvalue lies on the unit circle."""
    if m.det() == 0:
        raise SingularMatrixError()
    _, rem = strip_cyclotomic(char_poly(m))
    if rem.degree > 0:
        raise InvalidInput("unipotent_block_sizes requires all eigenvalues on the unit circle")
    sizes = unit_circle_block_sizes(m)
    assert sum(sizes) == m.dim
    return sizes


def jordan_unipotent(block_sizes: Sequence[int]) -> IntMatrix:
    """Block-diagonal matrix of unipotent Jordan blocks (ones on diagonal and superdiagonal)."""
    m = sum(block_sizes)
    rows = [[0] * m for _ in range(m)]
    start = 0
    for b in block_sizes:
        for i in range(b):
            rows[start + i][start + i] = 1
            if i + 1 < b:
                rows[start + i][start + i + 1] = 1
        start += b
    return IntMatrix.from_rows(rows)


def companion(p: IntPolynomial) -> IntMatrix:
    """Companion matrix of a monic polynomial (char_poly(companion(p)) == p)."""
    if not p.is_monic() or p.degree < 1:
        raise InvalidInput("companion matrix needs a monic polynomial of degree >= 1")
    n = p.degree
    rows = [[0] * n for _ in range(n)]
    for i in range(1, n):
        rows[i][i - 1] = 1
    for i in range(n):
        rows[i][n - 1] = -p.coeffs[i]
    return IntMatrix.from_rows(rows)
