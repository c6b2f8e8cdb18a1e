"""Finite stages of the Bourgain-Delbaen construction.

Stage ``n`` is the coordinate space ``span{e_1, ..., e_{d_n}}``.  The step map
``i_{n,n+1}`` keeps ``x`` and appends one coordinate per gamma tuple
``(m, i, j, eps1, eps2)`` with ``m < n``::

    c_gamma(x) = eps1 * a * x_i + eps2 * b * (x - i_{m,n}(pi_m x))_j

where ``pi_m`` keeps the first ``d_m`` coordinates.  Gamma tuples are ordered
lexicographically by ``(m, i, j, eps1, eps2)`` with ``+1`` before ``-1``.

Vectors are numpy arrays whose last axis holds the coordinates, so every array-level
function also accepts a batch of shape ``(k, d_n)``.  Exact mode uses object arrays of
``Fraction``; float mode uses ``float64``.  Step matrices are never formed: new
coordinates are computed from the residuals directly.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

import numpy as np

from .errors import ResourceLimitError, StageError
from .params import Convention, Params, as_rational

__all__ = [
    "DEFAULT_DIM_CAP",
    "GammaIndex",
    "StageLedger",
    "StageVector",
    "ExtendedVector",
    "projected_dims",
    "build_ledger",
    "enumerate_gammas",
    "gamma_table",
    "eval_functional",
    "embed_step",
    "embed",
    "embed_coords",
    "project",
    "extend",
    "sup_norm",
    "to_exact_array",
]

DEFAULT_DIM_CAP = 10**7

_GAMMA_COLUMNS = ("m", "i", "j", "eps1", "eps2")


@dataclass(frozen=True, order=True)
class GammaIndex:
    """A tuple ``gamma = (m, i, j, eps1, eps2)`` belonging to the extension set of stage ``n``."""

    n: int
    m: int
    i: int
    j: int
    eps1: int
    eps2: int


@dataclass(frozen=True, eq=False)
class StageVector:
    stage: int
    coords: np.ndarray

    def __len__(self):
        return self.coords.shape[-1]


@dataclass(frozen=True, eq=False)
class ExtendedVector:
    """Truncation of ``i_n(x)`` to the first ``d_N`` coordinates (``N = top_stage``)."""

    base_stage: int
    top_stage: int
    coords: np.ndarray

    def __len__(self):
        return self.coords.shape[-1]


Vector = Union[StageVector, ExtendedVector]


def to_exact_array(values) -> np.ndarray:
    """Object array of ``Fraction`` with the shape of ``values``."""
    arr = np.array(values, dtype=object)
    out = np.empty(arr.shape, dtype=object)
    for idx, v in np.ndenumerate(arr):
        out[idx] = as_rational(v)
    return out


def _i_range(convention: Convention, d_m: int) -> int:
    return d_m if convention is Convention.INCLUSIVE else d_m - 1


def projected_dims(convention: Convention, N: int) -> list[int]:
    """``d_1, ..., d_N`` from the counting recursion alone (no tuples are built)."""
    convention = Convention(convention)
    dims = [1]
    for n in range(1, N):
        card = 4 * dims[n - 1] * sum(_i_range(convention, dims[m - 1]) for m in range(1, n))
        dims.append(dims[n - 1] + card)
    return dims[:N]


def _map(workers: int, fn, items):
    items = list(items)
    if workers > 1 and len(items) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, items))
    return [fn(it) for it in items]


@dataclass(frozen=True, eq=False)
class StageLedger:
    """Dimensions ``d_1..d_N`` and, for each stage ``n < N``, its ordered gamma table.

    ``gamma_tables[n - 1]`` is a read-only ``(card F_n, 5)`` integer array with columns
    ``m, i, j, eps1, eps2`` (1-based indices).  ``workers`` only sets how many threads
    the step maps use; results do not depend on it.
    """

    params: Params
    dims: tuple[int, ...]
    gamma_tables: tuple[np.ndarray, ...]
    workers: int = 1

    @property
    def top(self) -> int:
        return len(self.dims)

    @property
    def exact(self) -> bool:
        return self.params.exact

    @property
    def dtype(self):
        return object if self.exact else np.float64

    def dim(self, n: int) -> int:
        self.check_stage(n)
        return self.dims[n - 1]

    def card(self, n: int) -> int:
        if not 1 <= n < self.top:
            raise StageError(f"no gamma table for stage {n}; recorded stages are 1..{self.top - 1}")
        return len(self.gamma_tables[n - 1])

    def i_range(self, m: int) -> int:
        return _i_range(self.params.convention, self.dims[m - 1])

    def check_stage(self, n: int):
        if not 1 <= n <= self.top:
            raise StageError(f"stage {n} out of range 1..{self.top}")

    def coerce(self, coords) -> np.ndarray:
        """Convert coordinates to this ledger's arithmetic (Fraction objects or float64)."""
        if self.exact:
            arr = np.asarray(coords, dtype=object)
            if all(type(v) is Fraction for v in arr.flat):
                return arr
            return to_exact_array(coords)
        return np.asarray(coords, dtype=np.float64)

    def vector(self, n: int, coords) -> StageVector:
        arr = self.coerce(coords)
        if arr.shape[-1:] != (self.dim(n),):
            raise StageError(f"stage {n} has dimension {self.dim(n)}, got coordinates of shape {arr.shape}")
        return StageVector(n, arr)

    def zeros(self, n: int, batch=()) -> np.ndarray:
        shape = tuple(batch) + (self.dim(n),)
        if self.exact:
            out = np.empty(shape, dtype=object)
            out.fill(Fraction(0))
            return out
        return np.zeros(shape)

    def basis_vector(self, n: int, k: int) -> StageVector:
        """``e_k`` (1-based) at stage ``n``."""
        x = self.zeros(n)
        x[k - 1] = Fraction(1) if self.exact else 1.0
        return StageVector(n, x)


def _gamma_block(convention, dims, n, m) -> np.ndarray:
    d_n = dims[n - 1]
    n_i = _i_range(convention, dims[m - 1])
    if n_i <= 0:
        return np.empty((0, 5), dtype=np.int64)
    ii, jj, s1, s2 = np.indices((n_i, d_n, 2, 2)).reshape(4, -1)
    signs = np.array([1, -1])
    block = np.empty((ii.size, 5), dtype=np.int64)
    block[:, 0] = m
    block[:, 1] = ii + 1
    block[:, 2] = jj + 1
    block[:, 3] = signs[s1]
    block[:, 4] = signs[s2]
    return block


def build_ledger(params: Params, N: int, *, dim_cap: int = DEFAULT_DIM_CAP, workers: int = 1) -> StageLedger:
    """Build stages ``1..N``.

    Raises :class:`ResourceLimitError` naming the first stage whose projected dimension
    exceeds ``dim_cap``.
    """
    if N < 1:
        raise StageError(f"need at least one stage, got N={N}")
    convention = params.convention
    proj = projected_dims(convention, N)
    for n, d in enumerate(proj, start=1):
        if d > dim_cap:
            raise ResourceLimitError(
                f"stage {n} would have dimension {d} > cap {dim_cap}", stage=n, projected_dim=d
            )
    dims = [1]
    tables = []
    for n in range(1, N):
        blocks = _map(workers, lambda m: _gamma_block(convention, dims, n, m), range(1, n))
        table = np.concatenate(blocks) if blocks else np.empty((0, 5), dtype=np.int64)
        table.setflags(write=False)
        tables.append(table)
        dims.append(dims[-1] + len(table))
    if dims != proj:  # pragma: no cover - guards the two counting paths against drift
        raise AssertionError(f"tuple count {dims} disagrees with recursion {proj}")
    return StageLedger(params=params, dims=tuple(dims), gamma_tables=tuple(tables), workers=max(1, int(workers)))


def gamma_table(ledger: StageLedger, n: int) -> np.ndarray:
    ledger.card(n)
    return ledger.gamma_tables[n - 1]


def enumerate_gammas(ledger: StageLedger, n: int) -> list[GammaIndex]:
    """The gamma tuples of stage ``n`` in canonical order."""
    table = gamma_table(ledger, n)
    return [GammaIndex(n, *map(int, row)) for row in table]


def _step_coords(ledger: StageLedger, n: int, x: np.ndarray) -> np.ndarray:
    a, b = ledger.params.a, ledger.params.b

    def block(m):
        n_i = ledger.i_range(m)
        if n_i <= 0:
            return None
        d_m = ledger.dims[m - 1]
        r = x - _embed_coords(ledger, m, n, x[..., :d_m])
        head = a * x[..., :n_i]
        tail = b * r
        plus = head[..., :, None] + tail[..., None, :]
        minus = head[..., :, None] - tail[..., None, :]
        # (eps1, eps2) in order (+,+), (+,-), (-,+), (-,-)
        vals = np.stack([plus, minus, -minus, -plus], axis=-1)
        return vals.reshape(x.shape[:-1] + (-1,))

    blocks = [blk for blk in _map(ledger.workers, block, range(1, n)) if blk is not None]
    return np.concatenate([x, *blocks], axis=-1)


def _embed_coords(ledger: StageLedger, m: int, l: int, x: np.ndarray) -> np.ndarray:
    for k in range(m, l):
        x = _step_coords(ledger, k, x)
    return x


def embed_coords(ledger: StageLedger, m: int, l: int, coords) -> np.ndarray:
    """Array-level ``i_{m,l}``; accepts a batch ``(k, d_m)``.  ``m == l`` is the identity."""
    ledger.check_stage(m)
    ledger.check_stage(l)
    if m > l:
        raise StageError(f"cannot embed stage {m} into earlier stage {l}")
    x = ledger.coerce(coords)
    if x.shape[-1] != ledger.dims[m - 1]:
        raise StageError(f"stage {m} has dimension {ledger.dims[m - 1]}, got {x.shape[-1]}")
    return _embed_coords(ledger, m, l, x)


def eval_functional(ledger: StageLedger, gamma: GammaIndex, x: StageVector):
    """Evaluate ``c_gamma(x)`` for ``x`` at stage ``gamma.n``."""
    if x.stage != gamma.n:
        raise StageError(f"gamma belongs to stage {gamma.n}, vector is at stage {x.stage}")
    if not 1 <= gamma.m < gamma.n:
        raise StageError(f"gamma.m={gamma.m} must satisfy 1 <= m < n={gamma.n}")
    if not (1 <= gamma.i <= ledger.i_range(gamma.m) and 1 <= gamma.j <= ledger.dim(gamma.n)):
        raise StageError(f"{gamma} is not an admissible tuple")
    p = ledger.params
    coords = x.coords
    d_m = ledger.dims[gamma.m - 1]
    residual = coords - _embed_coords(ledger, gamma.m, gamma.n, coords[..., :d_m])
    return gamma.eps1 * p.a * coords[..., gamma.i - 1] + gamma.eps2 * p.b * residual[..., gamma.j - 1]


def embed_step(ledger: StageLedger, x: StageVector) -> StageVector:
    """``i_{n,n+1}(x)``: the coordinates of ``x`` followed by ``c_gamma(x)`` in gamma order."""
    n = x.stage
    if not 1 <= n < ledger.top:
        raise StageError(f"stage {n + 1} is not recorded (top stage {ledger.top})")
    return StageVector(n + 1, _step_coords(ledger, n, ledger.coerce(x.coords)))


def embed(ledger: StageLedger, m: int, l: int, x: StageVector) -> StageVector:
    """``i_{m,l}(x) = i_{l-1,l} o ... o i_{m,m+1}(x)`` for ``m < l``."""
    if x.stage != m:
        raise StageError(f"vector is at stage {x.stage}, expected {m}")
    if m >= l:
        raise StageError(f"embed needs m < l, got m={m}, l={l}")
    return StageVector(l, embed_coords(ledger, m, l, x.coords))


def project(ledger: StageLedger, m: int, x: Vector) -> StageVector:
    """``pi_m``: the first ``d_m`` coordinates."""
    stage = x.top_stage if isinstance(x, ExtendedVector) else x.stage
    if not 1 <= m <= stage:
        raise StageError(f"cannot project a stage-{stage} vector to stage {m}")
    return StageVector(m, x.coords[..., : ledger.dim(m)])


def extend(ledger: StageLedger, x: StageVector, N: int | None = None) -> ExtendedVector:
    """``i_{n,N}(x)``, the first ``d_N`` coordinates of ``i_n(x)`` in ``l_infinity``."""
    N = ledger.top if N is None else N
    if not x.stage <= N <= ledger.top:
        raise StageError(f"need {x.stage} <= N <= {ledger.top}, got N={N}")
    return ExtendedVector(x.stage, N, embed_coords(ledger, x.stage, N, x.coords))


def sup_norm(x):
    """Max absolute coordinate (along the last axis for batches)."""
    coords = x.coords if isinstance(x, (StageVector, ExtendedVector)) else np.asarray(x)
    return np.max(np.abs(coords), axis=-1)
