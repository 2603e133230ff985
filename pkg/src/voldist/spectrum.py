"""Certified eigenvalue moduli and the spectral profile of M.

Cyclotomic factors are detected exactly (Kronecker: a monic integer
polynomial with every root on the unit circle is a product of cyclotomics).
The remaining roots are approximated with mpmath and enclosed in discs
whose radii come from the Weierstrass correction bound

    |root - z_i| <= n * |p(z_i) / prod_{j != i} (z_i - z_j)|,

evaluated in exact Gaussian-rational arithmetic.  When the discs are
pairwise disjoint each holds exactly one root.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import mpmath

from .errors import AmbiguousSpectrum, InvalidInput, SingularMatrixError
from .interval import RatInterval, sqrt_bounds
from .intmat import (
    IntMatrix,
    IntPolynomial,
    char_poly,
    cyclotomic_product,
    euler_phi,
    is_finite_order,
    is_squarefree,
    min_poly,
    squarefree_decomposition,
    strip_cyclotomic,
    unit_circle_block_sizes,
)

BELOW, EQUAL, ABOVE = "below", "equal", "above"

DEFAULT_PRECISION = 256
_START_PRECISION = 64


@dataclass(frozen=True)
class ModulusEntry:
    interval: RatInterval
    multiplicity: int
    side: str  # position relative to the unit circle

    @property
    def off_circle(self) -> bool:
        return self.side != EQUAL


@dataclass(frozen=True)
class SpectralProfile:
    dim: int
    d_abs: int
    moduli: tuple[ModulusEntry, ...]
    n_off_circle: int
    finite_order: Optional[int]
    diagonalizable: bool
    unipotent_block_sizes: Optional[tuple[int, ...]]
    cyclotomic_part: IntPolynomial
    cyclotomic_factors: tuple[tuple[int, int], ...]
    char_poly: IntPolynomial
    min_poly: IntPolynomial
    offcircle_jordan: bool = False
    unit_block_sizes: tuple[int, ...] = field(default=())

    def off_circle_moduli(self) -> list[RatInterval]:
        """Off-circle moduli repeated by multiplicity."""
        out = []
        for e in self.moduli:
            if e.off_circle:
                out.extend([e.interval] * e.multiplicity)
        return out

    def all_moduli(self) -> list[RatInterval]:
        out = []
        for e in self.moduli:
            out.extend([e.interval] * e.multiplicity)
        return out


# -- Gaussian rationals as (re, im) pairs of Fractions --------------------

def _gmul(a, b):
    return (a[0] * b[0] - a[1] * b[1], a[0] * b[1] + a[1] * b[0])


def _gsub(a, b):
    return (a[0] - b[0], a[1] - b[1])


def _gabs2(a):
    return a[0] * a[0] + a[1] * a[1]


def _geval(p: IntPolynomial, z):
    acc = (Fraction(0), Fraction(0))
    for c in reversed(p.coeffs):
        acc = _gmul(acc, z)
        acc = (acc[0] + c, acc[1])
    return acc


def _round_bits(x, bits: int) -> Fraction:
    return Fraction(int(mpmath.nint(x * mpmath.mpf(2) ** bits)), 1 << bits)


def _approx_roots(p: IntPolynomial, bits: int) -> list[tuple[Fraction, Fraction]]:
    """Root approximations rounded to Gaussian rationals, conjugate-symmetric."""
    coeffs = [int(c) for c in reversed(p.coeffs)]
    with mpmath.workprec(bits + 32):
        roots = mpmath.polyroots(coeffs, maxsteps=400, extraprec=2 * bits + 64)
        tol = mpmath.mpf(2) ** (-(bits // 2))
        reals, uppers = [], []
        for r in roots:
            r = mpmath.mpc(r)
            if abs(r.imag) <= tol * max(1, abs(r)):
                reals.append(r.real)
            elif r.imag > 0:
                uppers.append(r)
        out = [(_round_bits(x, bits), Fraction(0)) for x in reals]
        for r in uppers:
            re, im = _round_bits(r.real, bits), _round_bits(r.imag, bits)
            out += [(re, im), (re, -im)]
    if len(out) != p.degree:
        raise AmbiguousSpectrum("root approximations are not conjugate-symmetric at this precision")
    return out


def _isolate(p: IntPolynomial, bits: int):
    """Disjoint certified discs for a squarefree monic p, or None if not separated."""
    n = p.degree
    zs = _approx_roots(p, bits)
    radii_hi = []
    for i, z in enumerate(zs):
        num = _gabs2(_geval(p, z))
        den = Fraction(1)
        for j, w in enumerate(zs):
            if j != i:
                den *= _gabs2(_gsub(z, w))
        if den == 0:
            return None
        r2 = n * n * num / den
        radii_hi.append(sqrt_bounds(r2, bits + 16)[1])
    for i in range(n):
        for j in range(i + 1, n):
            dist_lo = sqrt_bounds(_gabs2(_gsub(zs[i], zs[j])), bits + 16)[0]
            if dist_lo <= radii_hi[i] + radii_hi[j]:
                return None
    discs = []
    for z, r in zip(zs, radii_hi):
        mlo, mhi = sqrt_bounds(_gabs2(z), bits + 16)
        iv_ = RatInterval(max(Fraction(0), mlo - r), mhi + r)
        discs.append((z, r, iv_))
    return discs


def _side(interval: RatInterval) -> Optional[str]:
    c = interval.cmp_scalar(1)
    return {-1: BELOW, 1: ABOVE, 0: EQUAL}.get(c)


def _rational_roots(p: IntPolynomial, bits: int) -> list[int]:
    """Integer roots of a monic p (rational roots of monic integer polys are integers)."""
    coeffs = [int(c) for c in reversed(p.coeffs)]
    found = []
    with mpmath.workprec(bits):
        try:
            approx = mpmath.polyroots(coeffs, maxsteps=400, extraprec=bits)
        except mpmath.libmp.NoConvergence:
            approx = []
    for r in approx:
        c = int(mpmath.nint(mpmath.re(r)))
        if c not in found and c != 0 and p(c) == 0:
            found.append(c)
    return found


def eigenvalue_moduli(p: IntPolynomial, precision: int = DEFAULT_PRECISION) -> list[ModulusEntry]:
    """Certified moduli of the roots of a monic p, with multiplicities.

    Cyclotomic roots are reported exactly as modulus 1.  Other roots get a
    rational interval refined by doubling the working precision up to
    ``precision`` bits; if an interval still straddles 1 the spectrum is
    declared ambiguous.
    """
    if precision < 32:
        raise InvalidInput("precision must be at least 32 bits")
    if not p.is_monic():
        raise InvalidInput("eigenvalue_moduli expects a monic polynomial")
    cyclo, rem = strip_cyclotomic(p)
    entries: list[ModulusEntry] = []
    unit_mult = sum(euler_phi(n) * k for n, k in cyclo)
    if unit_mult:
        entries.append(ModulusEntry(RatInterval.point(1), unit_mult, EQUAL))

    for factor, mult in squarefree_decomposition(rem):
        g = factor
        for c in _rational_roots(g, max(precision, 64)):
            g, r = g.divmod_monic(IntPolynomial((-c, 1)))
            assert r.is_zero()
            ivl = RatInterval.point(abs(c))
            entries.append(ModulusEntry(ivl, mult, _side(ivl)))
        if g.degree <= 0:
            continue
        bits = min(_START_PRECISION, precision)
        while True:
            discs = None
            try:
                discs = _isolate(g, bits)
            except (mpmath.libmp.NoConvergence, AmbiguousSpectrum, ZeroDivisionError):
                discs = None
            if discs is not None and all(_side(d[2]) is not None for d in discs):
                break
            if bits >= precision:
                raise AmbiguousSpectrum(
                    f"could not separate the roots of {g} from the unit circle at {precision} bits"
                )
            bits = min(2 * bits, precision)
        seen = set()
        for idx, (z, r, ivl) in enumerate(discs):
            if idx in seen:
                continue
            multiplicity = mult
            if z[1] != 0:
                # the conjugate disc holds the conjugate root: identical modulus
                partner = next(j for j, (w, _, _) in enumerate(discs) if w == (z[0], -z[1]) and j != idx)
                seen.add(partner)
                multiplicity = 2 * mult
                other = discs[partner][2]
                ivl = RatInterval(max(ivl.lo, other.lo), min(ivl.hi, other.hi))
            entries.append(ModulusEntry(ivl, multiplicity, _side(ivl)))
    entries.sort(key=lambda e: (e.interval.mid, e.multiplicity))
    return entries


def spectral_profile(m: IntMatrix, precision: int = DEFAULT_PRECISION) -> SpectralProfile:
    det = m.det()
    if det == 0:
        raise SingularMatrixError()
    cp = char_poly(m)
    mp = min_poly(m)
    cyclo, rem = strip_cyclotomic(cp)
    moduli = eigenvalue_moduli(cp, precision)
    n_off = sum(e.multiplicity for e in moduli if e.off_circle)
    _, mp_rem = strip_cyclotomic(mp)
    unit_blocks = tuple(unit_circle_block_sizes(m))
    return SpectralProfile(
        dim=m.dim,
        d_abs=abs(det),
        moduli=tuple(moduli),
        n_off_circle=n_off,
        finite_order=is_finite_order(m),
        diagonalizable=is_squarefree(mp),
        unipotent_block_sizes=unit_blocks if rem.degree == 0 else None,
        cyclotomic_part=cyclotomic_product(cyclo),
        cyclotomic_factors=tuple(cyclo),
        char_poly=cp,
        min_poly=mp,
        offcircle_jordan=not is_squarefree(mp_rem),
        unit_block_sizes=unit_blocks,
    )
