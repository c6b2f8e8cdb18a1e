"""Finite operators from an l2 truncation into a stage, and their compactness defects.

An operator ``T: l2^K -> stage n`` is a ``d_n x K`` matrix.  Composed with the
extension ``i_{n,N}`` it maps into ``l_inf^{d_N}``, where the operator norm from
``l2`` is the largest Euclidean row norm (Cauchy-Schwarz, attained at the normalized
row).  Everything below reduces to that row formula: the defect
``||T (I - P_k)||`` uses only the columns after ``k``, and a block witness for a
window ``(k, s]`` is the restricted maximizing row.

Squared quantities are kept alongside the float values; in exact mode they are
``Fraction`` and all threshold comparisons are made on them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .core import StageLedger, embed_coords
from .errors import DomainError, InvalidInputError, StageError

__all__ = [
    "COMPACT_THRESHOLD",
    "FiniteOperator",
    "NormBracket",
    "DefectProfile",
    "WitnessBlock",
    "default_extension_stage",
    "extended_matrix",
    "op_norm",
    "defect_profile",
    "find_block_witness",
    "demo_contradiction",
]

COMPACT_THRESHOLD = 1e-8


@dataclass(frozen=True, eq=False)
class FiniteOperator:
    """``matrix[:, k]`` is the image of ``e_{k+1}`` in stage-``target_stage`` coordinates."""

    matrix: np.ndarray
    target_stage: int

    @property
    def source_dim(self) -> int:
        return self.matrix.shape[1]

    def check(self, ledger: StageLedger):
        if self.matrix.ndim != 2:
            raise InvalidInputError(f"operator matrix must be 2-d, got shape {self.matrix.shape}")
        d_n = ledger.dim(self.target_stage)
        if self.matrix.shape[0] != d_n:
            raise InvalidInputError(
                f"stage {self.target_stage} has dimension {d_n}, matrix has {self.matrix.shape[0]} rows"
            )

    def scaled(self, c) -> "FiniteOperator":
        return FiniteOperator(self.matrix * c, self.target_stage)


def default_extension_stage(ledger: StageLedger, T: FiniteOperator) -> int:
    """Two stages past the target, capped at the ledger's top."""
    return min(T.target_stage + 2, ledger.top)


def _resolve_stage(ledger, T, N):
    T.check(ledger)
    N = default_extension_stage(ledger, T) if N is None else N
    if not T.target_stage <= N <= ledger.top:
        raise StageError(f"extension stage {N} must lie in {T.target_stage}..{ledger.top}")
    return N


def extended_matrix(T: FiniteOperator, ledger: StageLedger, N: int | None = None) -> np.ndarray:
    """``i_{n,N} o T`` as a ``d_N x K`` matrix."""
    N = _resolve_stage(ledger, T, N)
    cols = embed_coords(ledger, T.target_stage, N, ledger.coerce(T.matrix).T)
    return cols.T


def _row_sq(M: np.ndarray) -> np.ndarray:
    return (M * M).sum(axis=1)


@dataclass(frozen=True)
class NormBracket:
    """``lower <= ||i_n o T|| <= upper``; ``lower`` is exact for the stage-``N`` truncation."""

    lower: float
    upper: float
    lower_sq: object
    upper_sq: object
    extension_stage: int

    def to_dict(self) -> dict:
        return {
            "lower": self.lower,
            "upper": self.upper,
            "lower_sq": self.lower_sq,
            "upper_sq": self.upper_sq,
            "extension_stage": self.extension_stage,
        }


def op_norm(T: FiniteOperator, ledger: StageLedger, N: int | None = None) -> NormBracket:
    """Norm bracket of ``i_n o T`` from ``l2^K``.

    ``lower`` is the largest row norm of the stage-``N`` extension; ``upper`` is
    ``lambda`` times the largest row norm at the target stage, valid because
    ``||i_n|| <= lambda``.
    """
    N = _resolve_stage(ledger, T, N)
    lam = ledger.params.lam
    base = ledger.coerce(T.matrix)
    if T.source_dim == 0:
        zero = Fraction(0) if ledger.exact else 0.0
        return NormBracket(0.0, 0.0, zero, zero, N)
    lower_sq = _tail_sq(extended_matrix(T, ledger, N))[0].max()
    upper_sq = lam * lam * _row_sq(base).max()
    return NormBracket(math.sqrt(lower_sq), math.sqrt(upper_sq), lower_sq, upper_sq, N)


@dataclass(frozen=True)
class DefectProfile:
    """``values[k] = ||(i_{n,N} o T)(I - P_k)||`` for ``k = 0..K``."""

    values: tuple[float, ...]
    values_sq: tuple
    extension_stage: int

    @property
    def source_dim(self) -> int:
        return len(self.values) - 1

    def numerically_compact(self, threshold: float = COMPACT_THRESHOLD, k: int | None = None) -> bool:
        """Whether the defect at ``k`` (default ``K // 2``) is at most ``threshold``."""
        k = self.source_dim // 2 if k is None else k
        return self.values[k] <= threshold

    def to_dict(self) -> dict:
        return {
            "extension_stage": self.extension_stage,
            "k": list(range(len(self.values))),
            "delta": list(self.values),
            "numerically_compact": self.numerically_compact(),
        }


def _tail_sq(E: np.ndarray) -> np.ndarray:
    """``out[k, r] = sum_{c >= k} E[r, c]**2`` for ``k = 0..K`` (0-based columns)."""
    sq = (E * E).T  # K x d_N
    rev = np.cumsum(sq[::-1], axis=0)[::-1]
    zero = np.zeros((1, E.shape[0]), dtype=sq.dtype)
    if sq.dtype == object:
        zero.fill(Fraction(0))
    return np.concatenate([rev, zero], axis=0)


def defect_profile(T: FiniteOperator, ledger: StageLedger, N: int | None = None) -> DefectProfile:
    """The defects ``delta_0 >= delta_1 >= ... >= delta_K = 0`` at extension stage ``N``."""
    N = _resolve_stage(ledger, T, N)
    E = extended_matrix(T, ledger, N)
    if T.source_dim == 0:
        zero = Fraction(0) if ledger.exact else 0.0
        return DefectProfile((0.0,), (zero,), N)
    tails = _tail_sq(E).max(axis=1)
    values_sq = tuple(tails.tolist())
    values = tuple(math.sqrt(v) for v in values_sq)
    return DefectProfile(values, values_sq, N)


@dataclass(frozen=True, eq=False)
class WitnessBlock:
    """A block ``y`` supported in the window ``(start, stop]`` with ``||T y|| > delta ||y||``.

    ``start``/``stop`` follow the projection convention: ``y = P_stop z - P_start z``.
    """

    vector: np.ndarray
    start: int
    stop: int
    row: int
    achieved: float
    achieved_sq: object

    def to_dict(self) -> dict:
        return {
            "start": self.start,
            "stop": self.stop,
            "row": self.row + 1,
            "achieved": self.achieved,
            "vector": self.vector.tolist(),
        }


def find_block_witness(T: FiniteOperator, ledger: StageLedger, N: int | None, delta,
                       after: int = 0) -> WitnessBlock | None:
    """A short window ``(k, s]`` with ``k >= after`` carrying a block ``y`` with
    ``||(i_{n,N} o T) y|| > delta ||y||``.

    The best block supported in a window is the restricted row of largest norm.  The
    right end ``s`` is the first one for which ``(after, s]`` works; the left end is then
    moved right as far as possible.  Returns ``None`` when even ``(after, K]`` fails,
    i.e. exactly when the defect at ``after`` is at most ``delta``.
    """
    if not delta > 0:
        raise DomainError(f"delta must be positive, got {delta!r}")
    N = _resolve_stage(ledger, T, N)
    K = T.source_dim
    if not 0 <= after <= K:
        raise InvalidInputError(f"after={after} must lie in 0..{K}")
    if after == K:
        return None
    E = extended_matrix(T, ledger, N)
    delta_sq = Fraction(delta) ** 2 if ledger.exact else float(delta) ** 2
    window = E[:, after:]
    running = np.cumsum(window * window, axis=1)  # d_N x (K - after)
    best = running.max(axis=0)
    hits = [w for w, v in enumerate(best.tolist()) if v > delta_sq]
    if not hits:
        return None
    stop = after + hits[0] + 1
    # tighten the left end: latest start whose window (start, stop] still works
    tails = np.cumsum((window * window)[:, : stop - after][:, ::-1], axis=1)[:, ::-1]
    col_best = tails.max(axis=0).tolist()
    start = after + max(w for w, v in enumerate(col_best) if v > delta_sq)
    seg = tails[:, start - after]
    row = max(range(E.shape[0]), key=lambda r: (seg[r], -r)) if ledger.exact else int(np.argmax(seg))
    y = np.array([Fraction(0)] * K, dtype=object) if ledger.exact else np.zeros(K)
    y[start:stop] = E[row, start:stop]
    image = E @ y
    sup_sq = max(v * v for v in image.tolist())
    y_sq = sum(v * v for v in y.tolist())
    achieved_sq = sup_sq / y_sq
    return WitnessBlock(y, start, stop, row, math.sqrt(achieved_sq), achieved_sq)


def demo_contradiction(norm_T, C1, C2, alpha) -> int:
    """Largest ``n >= 0`` with ``C1 * n**alpha <= norm_T * C2 * n**(1/2)``.

    Equivalently ``n <= (norm_T * C2 / C1) ** (1 / (alpha - 1/2))``: past this ``n`` a lower
    growth bound of order ``n**alpha`` and the ``l2`` upper bound of order ``sqrt(n)``
    cannot both hold.  Rational inputs with an integral exponent are handled exactly; a
    relative slack of 1e-12 absorbs rounding in the float path (so ``alpha=2/3`` given as a
    float still yields ``2**6 = 64`` for ``norm_T=2``).
    """
    for name, v in (("norm_T", norm_T), ("C1", C1), ("C2", C2), ("alpha", alpha)):
        if not v > 0:
            raise InvalidInputError(f"{name} must be positive, got {v!r}")
    if not alpha > Fraction(1, 2):
        raise DomainError(f"alpha={alpha!r} <= 1/2: the two growth bounds never conflict")

    if all(isinstance(v, (int, Fraction)) for v in (norm_T, C1, C2, alpha)):
        ratio = Fraction(norm_T) * Fraction(C2) / Fraction(C1)
        expo = 1 / (Fraction(alpha) - Fraction(1, 2))
        if expo.denominator == 1:
            bound = ratio ** int(expo)
            return int(bound.numerator // bound.denominator)

    ratio = float(norm_T) * float(C2) / float(C1)
    t = float(alpha) - 0.5
    slack = ratio * (1 + 1e-12)

    def holds(n):
        return n ** t <= slack

    if not holds(1):
        return 0
    guess = ratio ** (1 / t)
    if not math.isfinite(guess):
        raise OverflowError(f"bound {ratio}**{1 / t} overflows")
    n = max(1, int(guess))
    while not holds(n):
        n -= 1
    while holds(n + 1):
        n += 1
    return n
