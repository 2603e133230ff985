"""Distortion verdicts for Z^m inside Gamma_M computed from the spectrum of M."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Optional, Sequence

from .errors import InvalidInput, NotAnAutomorphism
from .fclass import (
    CONJECTURAL,
    LINEAR,
    PROVED,
    DistortionVerdict,
    FnClass,
    Power,
    PowerOverW,
    Relation,
    Unknown,
    compare,
    compose,
    dehn_class_zk,
    lin_times_exp,
    render,
)
from .interval import RatInterval, log_ratio
from .intmat import IntMatrix
from .spectrum import DEFAULT_PRECISION, SpectralProfile, spectral_profile

AREA, VOLUME = "area", "volume"

MAX_FORM_NOTE = (
    "alpha = prod_i max(|lambda_i|, d) / d; the max form is adopted because it equals "
    "d^(k-1) / prod_i min(d/|lambda_i|, 1), whereas a min form would not"
)
ONE_TREE_LINE_NOTE = "ambient fillings are measured in one tree line of the slab, so they are upper bounds"


@dataclass(frozen=True)
class BlockChoice:
    chosen: tuple[tuple[int, int], ...]  # (block size b_i, vectors taken k_i)
    alpha: Fraction
    beta: Fraction

    @property
    def k(self) -> int:
        return sum(ki for _, ki in self.chosen)

    @property
    def exponent(self) -> Fraction:
        return self.beta / self.alpha

    def to_dict(self) -> dict:
        return {
            "chosen": [list(c) for c in self.chosen],
            "alpha": str(self.alpha),
            "beta": str(self.beta),
        }


@dataclass(frozen=True)
class ClassifyRequest:
    M: IntMatrix
    k: int = 2
    mode: str = AREA

    def __post_init__(self):
        m = self.M.dim
        if self.mode not in (AREA, VOLUME):
            raise InvalidInput(f"mode must be {AREA!r} or {VOLUME!r}")
        if not 2 <= self.k <= m:
            raise InvalidInput(f"need 2 <= k <= m (got k={self.k}, m={m})")
        if self.mode == AREA and self.k != 2:
            raise InvalidInput("area mode means k = 2")
        if self.mode == VOLUME and self.k != m:
            raise InvalidInput("volume mode means top volume, k = m")


# -- exponent formulas -----------------------------------------------------

def _exact_log_ratio(num: Fraction, den: Fraction) -> Optional[Fraction]:
    """log(num)/log(den) when it is rational with a small denominator."""
    approx = math.log(num) / math.log(den)
    cand = Fraction(approx).limit_denominator(10_000)
    if cand <= 0:
        return None
    # num = den^(a/b)  <=>  num^b = den^a
    if num ** cand.denominator == den ** cand.numerator:
        return cand
    return None


def diag_exponent(moduli: Sequence[RatInterval], d: int, precision: int = DEFAULT_PRECISION) -> Power:
    """Power(1 + log d / log alpha) with alpha = prod max(lambda_i, d) / d."""
    if d == 1:
        return LINEAR
    alpha = RatInterval.point(1)
    for lam in moduli:
        alpha = alpha * RatInterval(max(lam.lo, d), max(lam.hi, d))
    alpha = alpha / d
    if alpha.is_exact:
        q = _exact_log_ratio(Fraction(d), alpha.lo)
        if q is not None:
            return Power(1 + q)
    return Power(log_ratio(RatInterval.point(d), alpha, precision) + 1)


def gammamdist_exponent(profile: SpectralProfile, k: int, precision: int = DEFAULT_PRECISION) -> FnClass:
    if not profile.diagonalizable:
        raise InvalidInput("the diagonal formula needs a diagonalizable matrix")
    if k != profile.dim:
        raise InvalidInput("the diagonal formula is for top volume, k = m")
    if profile.n_off_circle == 0:
        return LINEAR
    if profile.n_off_circle == 1:
        return PowerOverW(k)
    return diag_exponent(profile.all_moduli(), profile.d_abs, precision)


def _validate_blocks(block_sizes: Sequence[int], m: int, k: int) -> tuple[int, ...]:
    blocks = tuple(sorted((int(b) for b in block_sizes), reverse=True))
    if not blocks or any(b < 1 for b in blocks):
        raise InvalidInput("block sizes must be positive and nonempty")
    if sum(blocks) != m:
        raise InvalidInput(f"block sizes sum to {sum(blocks)}, expected m = {m}")
    if not 2 <= k <= m:
        raise InvalidInput(f"need 2 <= k <= m (got k={k}, m={m})")
    return blocks


def block_gap(blocks: Sequence[int], ks: Sequence[int]) -> int:
    """Sum of b_i - k_i over the blocks contributing at least two vectors."""
    return sum(b - ki for b, ki in zip(blocks, ks) if ki >= 2)


def min_gap_distribution(blocks: tuple[int, ...], k: int) -> tuple[int, ...]:
    """k_i with 1 <= k_i <= b_i and sum k, minimizing block_gap; ties go to the lexicographically largest."""

    @lru_cache(maxsize=None)
    def best(i: int, left: int):
        n_rest = len(blocks) - i
        if n_rest == 0:
            return (0, ()) if left == 0 else None
        out = None
        b = blocks[i]
        for ki in range(min(b, left - (n_rest - 1)), 0, -1):
            sub = best(i + 1, left - ki)
            if sub is None:
                continue
            cost = sub[0] + (b - ki if ki >= 2 else 0)
            if out is None or cost < out[0]:
                out = (cost, (ki,) + sub[1])
        return out

    res = best(0, k)
    if res is None:
        raise InvalidInput("no distribution of k vectors over the blocks")
    return res[1]


def blockdist_exponent(block_sizes: Sequence[int], m: int, k: int) -> tuple[Power, BlockChoice]:
    """Lower-bound exponent beta/alpha for a unipotent matrix with the given Jordan blocks."""
    blocks = _validate_blocks(block_sizes, m, k)
    c = len(blocks)
    if k <= c:
        chosen = tuple((b, 1) for b in blocks[:k])
        s = sum(b - 1 for b, _ in chosen)
        alpha = Fraction((k - 1) * s + k)
        beta = Fraction(k * s + k)
    else:
        ks = min_gap_distribution(blocks, k)
        chosen = tuple(zip(blocks, ks))
        gap = block_gap(blocks, ks)
        alpha = Fraction((k - 1) * (m - k) + 2 * k - c + gap)
        beta = Fraction(k * (m - k) + 2 * k - c + gap)
    return Power(beta / alpha), BlockChoice(chosen, alpha, beta)


# -- verdicts --------------------------------------------------------------

def _higher(f: FnClass, g: FnClass) -> FnClass:
    return f if compare(f, g) in (Relation.DOMINATES, Relation.EQUIVALENT) else g


def _unit_block_lower(profile: SpectralProfile, k: int) -> tuple[FnClass, list[str]]:
    f, choice = blockdist_exponent(profile.unit_block_sizes, profile.dim, k)
    return f, [f"unipotent blocks {list(profile.unit_block_sizes)}: alpha={choice.alpha}, beta={choice.beta}"]


def classify_area_profile(profile: SpectralProfile, precision: int = DEFAULT_PRECISION) -> DistortionVerdict:
    m = profile.dim
    quad = Power(2)
    if profile.finite_order is not None:
        return DistortionVerdict.exact(LINEAR, [f"M has finite order {profile.finite_order}"])
    if m == 2 and profile.d_abs == 1:
        return DistortionVerdict.exact(LINEAR, ["m = 2 and |det M| = 1"])
    if profile.n_off_circle == 0:
        lower, notes = _unit_block_lower(profile, 2)
        return DistortionVerdict(lower, quad, False, PROVED, tuple(notes + ["all eigenvalues on the unit circle, infinite order"]))
    if profile.offcircle_jordan:
        return DistortionVerdict.exact(quad, ["Jordan block of size >= 2 at an eigenvalue off the unit circle"])
    if profile.n_off_circle >= 3:
        return DistortionVerdict.exact(quad, ["three or more eigenvalues off the unit circle: two lie on the same side"])
    if profile.n_off_circle == 2:
        f = diag_exponent(profile.off_circle_moduli(), profile.d_abs, precision)
        notes = ["two eigenvalues off the unit circle", MAX_FORM_NOTE]
        if m == 2:
            return DistortionVerdict.exact(f, notes)
        # a unit eigenvalue pairs with an off-circle one in a projected plane
        lower = _higher(f, PowerOverW(2))
        notes.append("remaining eigenvalues on the unit circle contribute an n^2/W(n) lower bound")
        sharp = compare(lower, quad) is Relation.EQUIVALENT
        return DistortionVerdict(lower, quad, sharp, PROVED, tuple(notes))
    return DistortionVerdict(
        PowerOverW(2),
        quad,
        False,
        PROVED,
        ("exactly one eigenvalue off the unit circle; large unit-circle blocks may push the true class higher",),
    )


def classify_area(M: IntMatrix, precision: int = DEFAULT_PRECISION) -> DistortionVerdict:
    if M.dim < 2:
        raise InvalidInput("area distortion needs m >= 2")
    return classify_area_profile(spectral_profile(M, precision), precision)


def classify_top_volume_profile(profile: SpectralProfile, precision: int = DEFAULT_PRECISION) -> DistortionVerdict:
    k = profile.dim
    if k == 2:
        return classify_area_profile(profile, precision)
    upper = dehn_class_zk(k)
    if profile.diagonalizable:
        f = gammamdist_exponent(profile, k, precision)
        notes = []
        if profile.n_off_circle >= 2 and profile.d_abs > 1:
            notes.append(MAX_FORM_NOTE)
        if profile.n_off_circle == 1:
            notes.append("exactly one eigenvalue off the unit circle")
        return DistortionVerdict.exact(f, notes)
    if profile.n_off_circle == 0:
        lower, notes = _unit_block_lower(profile, k)
        return DistortionVerdict(lower, upper, False, PROVED, tuple(notes))
    conj = diag_exponent(profile.all_moduli(), profile.d_abs, precision)
    if profile.n_off_circle == 1:
        conj = PowerOverW(k)
    notes = (
        "non-diagonalizable with eigenvalues off the unit circle: lower bound is conjectural",
        f"proved envelope: lower n, upper {render(upper)}",
        MAX_FORM_NOTE,
    )
    return DistortionVerdict(conj, upper, False, CONJECTURAL, notes)


def classify_top_volume(req: ClassifyRequest, precision: int = DEFAULT_PRECISION) -> DistortionVerdict:
    if req.k != req.M.dim:
        raise InvalidInput("top volume means k = m")
    return classify_top_volume_profile(spectral_profile(req.M, precision), precision)


def classify(req: ClassifyRequest, precision: int = DEFAULT_PRECISION) -> DistortionVerdict:
    if req.mode == AREA:
        return classify_area(req.M, precision)
    return classify_top_volume(req, precision)


# -- complexity and general bounds ----------------------------------------

def commutator_image_areas(M: IntMatrix, oracle: Optional[Callable] = None) -> list[int]:
    """Filling area of phi(x_i) phi(x_j) phi(x_i)^-1 phi(x_j)^-1 for every i < j."""
    from .chains import commutator_image_cycle, explicit_filling

    out = []
    for i in range(M.dim):
        for j in range(i + 1, M.dim):
            X, z = commutator_image_cycle(M, i, j)
            if oracle is not None:
                vol, _ = oracle(X, z)
            else:
                vol = explicit_filling(X, z).volume
            out.append(vol)
    return out


def complexity_bound(M: IntMatrix, oracle: Optional[Callable] = None) -> tuple[int, FnClass]:
    """Complexity m = max(c_2(phi), c_2(phi^-1)) and the upper bound class n*m^n."""
    if abs(M.det()) != 1:
        raise NotAnAutomorphism("complexity needs |det M| = 1 (phi must be an automorphism of Z^m)")
    if M.dim < 2:
        return 1, LINEAR
    c_fwd = max(commutator_image_areas(M, oracle))
    c_bwd = max(commutator_image_areas(M.inverse_unimodular(), oracle))
    m_cx = max(c_fwd, c_bwd, 1)
    return m_cx, lin_times_exp(m_cx)


def dehn_bounds(k: int, ambient_dehn: Optional[FnClass] = None, notes: Optional[list] = None):
    """(upper, lower) for k-volume distortion of Z^k from Dehn functions alone."""
    upper = dehn_class_zk(k)
    if not isinstance(ambient_dehn, Power):
        return upper, None
    qh = upper.interval()
    lower = Power(qh / ambient_dehn.interval())
    if compare(lower, LINEAR) is not Relation.DOMINATES:
        if notes is not None and lower != LINEAR:
            notes.append("lower bound below linear clamped to n")
        lower = LINEAR
    return upper, lower


def compose_verdicts(outer: DistortionVerdict, inner: DistortionVerdict) -> DistortionVerdict:
    """Chain K < H < G: outer is the (G, H) verdict, inner the (H, K) verdict."""
    rigor = PROVED if outer.rigor == PROVED and inner.rigor == PROVED else CONJECTURAL
    if outer.sharp and outer.upper == LINEAR:
        return DistortionVerdict(inner.lower, inner.upper, inner.sharp, rigor, inner.notes + ("outer inclusion undistorted",))
    upper = compose(inner.upper, outer.upper)
    lower = inner.lower
    sharp = False
    if not isinstance(upper, Unknown) and not isinstance(lower, Unknown):
        sharp = compare(lower, upper) is Relation.EQUIVALENT
    return DistortionVerdict(lower, upper, sharp, rigor, ())
