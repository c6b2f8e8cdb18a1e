"""Block sequences, partial-sum norms and log-log growth fits.

Two ambient spaces are supported: ``l2`` (dense coordinate vectors of equal length)
and ``bd`` (stage vectors, compared in the sup norm after extension to a common top
stage).  Growth fits are exploratory; nothing here certifies weak nullity or the
existence of a lower constant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .core import StageLedger, StageVector, embed_coords, sup_norm
from .errors import DomainError, InsufficientDataError, InvalidInputError, StageError
from .params import solve_alpha

__all__ = [
    "BlockSequence",
    "GrowthFit",
    "GrowthExperiment",
    "CANDIDATES",
    "make_l2_blocks",
    "rational_unit_vector",
    "support",
    "partial_sum_norms",
    "growth_exponent",
    "bd_candidate",
    "bd_growth_experiment",
    "greedy_subsequence",
]

CANDIDATES = ("new-coordinates", "stage-blocks")


def support(coords) -> tuple[int, ...]:
    """0-based indices of the nonzero coordinates."""
    return tuple(int(k) for k in np.flatnonzero(np.asarray(coords) != 0))


@dataclass(frozen=True, eq=False)
class BlockSequence:
    """Nonzero blocks with strictly increasing, pairwise disjoint supports.

    ``space`` is ``"l2"`` (``blocks`` are equal-length arrays) or ``"bd"`` (``blocks`` are
    :class:`StageVector` instances, possibly at different stages; supports are compared
    as global coordinate indices, which prefix consistency makes meaningful).
    """

    space: str
    blocks: tuple
    bound: object = field(init=False)

    def __post_init__(self):
        if self.space not in ("l2", "bd"):
            raise InvalidInputError(f"unknown space {self.space!r}")
        blocks = tuple(self.blocks)
        object.__setattr__(self, "blocks", blocks)
        last = -1
        for k, blk in enumerate(blocks):
            supp = support(self._coords(blk))
            if not supp:
                raise InvalidInputError(f"block {k} is zero")
            if supp[0] <= last:
                raise InvalidInputError(f"block {k} support starts at {supp[0]}, previous block ends at {last}")
            last = supp[-1]
        object.__setattr__(self, "bound", max((self.block_norm(blk) for blk in blocks), default=0))

    @staticmethod
    def _coords(blk):
        return blk.coords if isinstance(blk, StageVector) else blk

    def block_norm(self, blk):
        c = self._coords(blk)
        if self.space == "l2":
            return math.sqrt(sum(v * v for v in c))
        return sup_norm(c)

    def __len__(self):
        return len(self.blocks)


def rational_unit_vector(t) -> list[Fraction]:
    """Exact unit vector in ``len(t) + 1`` dimensions by inverse stereographic projection."""
    t = [Fraction(v) for v in t]
    s = sum(v * v for v in t)
    return [2 * v / (s + 1) for v in t] + [(s - 1) / (s + 1)]


def make_l2_blocks(count: int, widths=1, seed: int = 0, exact: bool = False) -> BlockSequence:
    """``count`` unit-norm blocks on consecutive windows of the given widths.

    Width-1 blocks are standard basis vectors.  Wider blocks are seeded random unit
    vectors: normalized Gaussians in float mode, rational points of the sphere in exact
    mode (so their squared norms are exactly 1).
    """
    if count < 0:
        raise InvalidInputError(f"count must be nonnegative, got {count}")
    if isinstance(widths, int):
        widths = [widths] * count
    widths = [int(w) for w in widths]
    if len(widths) != count:
        raise InvalidInputError(f"got {len(widths)} widths for {count} blocks")
    if any(w <= 0 for w in widths):
        raise InvalidInputError("widths must be positive")
    rng = np.random.default_rng(seed)
    dim = sum(widths)
    blocks = []
    start = 0
    for w in widths:
        if exact:
            vec = np.empty(dim, dtype=object)
            vec.fill(Fraction(0))
            if w == 1:
                vals = [Fraction(1)]
            else:
                while True:
                    t = [Fraction(int(rng.integers(-20, 21)), int(rng.integers(1, 21))) for _ in range(w - 1)]
                    vals = rational_unit_vector(t)
                    # a zero entry would shrink the support below the window
                    if all(v != 0 for v in vals):
                        break
            vec[start:start + w] = vals
        else:
            vec = np.zeros(dim)
            if w == 1:
                vals = np.ones(1)
            else:
                vals = rng.standard_normal(w)
                vals /= np.linalg.norm(vals)
            vec[start:start + w] = vals
        blocks.append(vec)
        start += w
    return BlockSequence("l2", blocks)


def _lift_bd(seq: BlockSequence, ledger: StageLedger, stage: int) -> np.ndarray:
    """All blocks as rows at a common stage."""
    rows = []
    for blk in seq.blocks:
        if blk.stage > stage:
            raise StageError(f"block at stage {blk.stage} cannot be lifted to stage {stage}")
        rows.append(embed_coords(ledger, blk.stage, stage, blk.coords))
    return np.array(rows, dtype=ledger.dtype).reshape(len(rows), ledger.dim(stage))


def _sup_after_extend(ledger: StageLedger, base: np.ndarray, base_stage: int, N: int, chunk: int):
    out = []
    for start in range(0, len(base), chunk):
        ext = embed_coords(ledger, base_stage, N, base[start:start + chunk])
        out.extend(sup_norm(ext).tolist())
    return out


def partial_sum_norms(seq: BlockSequence, norm: str = "l2", ledger: StageLedger | None = None,
                      N: int | None = None, squared: bool = False, chunk: int = 32) -> list:
    """``||x_1 + ... + x_n||`` for ``n = 1..len(seq)``.

    ``norm="l2"`` uses the Euclidean norm; with ``squared=True`` the squared norms are
    returned, exact for rational blocks.  ``norm="sup"`` extends each partial sum to
    stage ``N`` (default: the ledger's top stage) and takes its sup norm.
    """
    if not len(seq):
        return []
    if norm == "l2":
        if seq.space != "l2":
            raise InvalidInputError("l2 norm needs an l2 block sequence")
        sums = np.cumsum(np.array(seq.blocks), axis=0)
        sq = (sums * sums).sum(axis=1).tolist()
        if squared:
            return sq
        return [math.sqrt(v) for v in sq]
    if norm == "sup":
        if seq.space != "bd":
            raise InvalidInputError("sup-after-extend norm needs a bd block sequence")
        if ledger is None:
            raise InvalidInputError("sup-after-extend norm needs a ledger")
        N = ledger.top if N is None else N
        base_stage = max(blk.stage for blk in seq.blocks)
        if not base_stage <= N <= ledger.top:
            raise StageError(f"cannot extend stage-{base_stage} blocks to stage {N}")
        sums = np.cumsum(_lift_bd(seq, ledger, base_stage), axis=0)
        return _sup_after_extend(ledger, sums, base_stage, N, chunk)
    raise InvalidInputError(f"unknown norm {norm!r}")


@dataclass(frozen=True)
class GrowthFit:
    """Least-squares fit ``log ||S_n|| ~ exponent * log n + log constant`` over ``n >= start``."""

    norms: tuple
    exponent: float
    constant: float
    start: int = 2
    label: str = "full"

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "norms": list(self.norms),
            "exponent": self.exponent,
            "constant": self.constant,
            "fit_start": self.start,
        }


def growth_exponent(norms, start: int = 2, label: str = "full") -> GrowthFit:
    """Unweighted log-log least squares over the points ``n >= start`` (1-based)."""
    norms = list(norms)
    if len(norms) < 3:
        raise InsufficientDataError(f"need at least 3 norms for a fit, got {len(norms)}", norms)
    values = [float(v) for v in norms]
    if any(not v > 0 for v in values):
        raise DomainError("growth fit needs positive norms")
    n = np.arange(start, len(values) + 1, dtype=np.float64)
    if len(n) < 2:
        raise InsufficientDataError(f"fewer than 2 points with n >= {start}", norms)
    y = np.log(np.asarray(values[start - 1:]))
    slope, intercept = np.polyfit(np.log(n), y, 1)
    return GrowthFit(tuple(norms), float(slope), float(math.exp(intercept)), start, label)


@dataclass(frozen=True)
class GrowthExperiment:
    """Full-sequence fit, greedy subsequence fit and the theoretical ``alpha`` side by side."""

    candidate: str
    count: int
    top_stage: int
    full: GrowthFit
    subsequence: GrowthFit | None
    subsequence_indices: tuple[int, ...]
    alpha: float | None
    note: str = "exploratory: weak nullity and the lower constant are not certified at finite scale"

    def to_dict(self) -> dict:
        return {
            "candidate": self.candidate,
            "count": self.count,
            "top_stage": self.top_stage,
            "full": self.full.to_dict(),
            "subsequence": None if self.subsequence is None else self.subsequence.to_dict(),
            "subsequence_indices": list(self.subsequence_indices),
            "alpha": self.alpha,
            "note": self.note,
        }


def bd_candidate(ledger: StageLedger, candidate: str, count: int, base_top: int | None = None,
                 seed: int = 0) -> BlockSequence:
    """Disjointly supported stage vectors, unnormalized.

    ``new-coordinates``: ``e_k`` at the stage where coordinate ``k`` is appended, for
    ``k = 2, 3, ...``.  ``stage-blocks``: one block per stage, seeded random signs on the
    coordinates appended at that stage.  Only stages ``<= base_top`` are used.
    """
    base_top = ledger.top - 1 if base_top is None else base_top
    base_top = max(1, min(base_top, ledger.top))
    blocks = []
    rng = np.random.default_rng(seed)
    for n in range(2, base_top + 1):
        lo, hi = ledger.dims[n - 2], ledger.dims[n - 1]
        if hi == lo:
            continue
        if candidate == "new-coordinates":
            for k in range(lo + 1, hi + 1):
                if len(blocks) == count:
                    break
                blocks.append(ledger.basis_vector(n, k))
        elif candidate == "stage-blocks":
            if len(blocks) == count:
                break
            x = ledger.zeros(n)
            signs = rng.choice([-1, 1], size=hi - lo)
            x[lo:hi] = ledger.coerce(signs)
            blocks.append(StageVector(n, x))
        else:
            raise InvalidInputError(f"unknown candidate {candidate!r}; choose from {CANDIDATES}")
        if len(blocks) == count:
            break
    if len(blocks) < count:
        raise StageError(
            f"candidate {candidate!r} has only {len(blocks)} blocks in stages <= {base_top}; "
            f"{count} requested (build more stages)"
        )
    return BlockSequence("bd", blocks)


def _normalize_bd(seq: BlockSequence, ledger: StageLedger, N: int, chunk: int) -> BlockSequence:
    out = []
    for blk in seq.blocks:
        ext = embed_coords(ledger, blk.stage, N, blk.coords)
        out.append(StageVector(blk.stage, blk.coords / sup_norm(ext)))
    return BlockSequence("bd", out)


def greedy_subsequence(seq: BlockSequence, ledger: StageLedger, N: int, chunk: int = 32):
    """Increasing subsequence chosen greedily to keep the fitted exponent from dropping.

    The first three blocks are always taken; afterwards block ``k`` is kept iff adding it
    does not decrease the fitted exponent.  Returns ``(indices, norms)``.
    """
    base_stage = max(blk.stage for blk in seq.blocks)
    lifted = _lift_bd(seq, ledger, base_stage)
    indices, norms = [], []
    current = None
    exponent = -math.inf
    for k in range(len(seq)):
        trial = lifted[k] if current is None else current + lifted[k]
        value = sup_norm(embed_coords(ledger, base_stage, N, trial))
        if len(norms) < 3:
            accept = True
            new_exp = growth_exponent(norms + [value]).exponent if len(norms) == 2 else -math.inf
        else:
            new_exp = growth_exponent(norms + [value]).exponent
            accept = new_exp >= exponent
        if accept:
            indices.append(k)
            norms.append(value)
            current = trial
            exponent = new_exp
    return tuple(indices), norms


def bd_growth_experiment(ledger: StageLedger, candidate: str = "new-coordinates", count: int = 64,
                         N: int | None = None, seed: int = 0, subsequence: bool = True,
                         chunk: int = 32) -> GrowthExperiment:
    """Normalize a candidate family to unit sup norm at stage ``N``, track partial sums, fit.

    Blocks are drawn from stages below ``N`` so that each one is genuinely extended.
    Raises :class:`InsufficientDataError` (carrying the computed norms) when ``count < 3``.
    """
    N = ledger.top if N is None else N
    ledger.check_stage(N)
    if count < 1:
        raise InvalidInputError(f"count must be positive, got {count}")
    raw = bd_candidate(ledger, candidate, count, base_top=max(1, N - 1), seed=seed)
    seq = _normalize_bd(raw, ledger, N, chunk)
    norms = partial_sum_norms(seq, "sup", ledger=ledger, N=N, chunk=chunk)
    if count < 3:
        raise InsufficientDataError(
            f"fit refused: {count} block(s) give too few points (need 3)", norms
        )
    full = growth_exponent(norms, label="full")
    sub_fit, sub_idx = None, ()
    if subsequence:
        sub_idx, sub_norms = greedy_subsequence(seq, ledger, N, chunk)
        sub_fit = growth_exponent(sub_norms, label="greedy-subsequence")
    try:
        alpha = solve_alpha(ledger.params.a, ledger.params.b).alpha
    except DomainError:
        alpha = None
    return GrowthExperiment(candidate, count, N, full, sub_fit, sub_idx, alpha)
