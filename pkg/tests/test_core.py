import itertools
import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bdspace import Params, build_ledger, default_params
from bdspace.core import (
    ExtendedVector,
    GammaIndex,
    StageVector,
    embed,
    embed_coords,
    embed_step,
    enumerate_gammas,
    eval_functional,
    extend,
    gamma_table,
    project,
    projected_dims,
    sup_norm,
)
from bdspace.errors import ResourceLimitError, StageError
from conftest import random_rationals

DIMS6 = (1, 1, 5, 45, 1305, 272745)


def recursion_dims(N):
    d = [1]
    for n in range(1, N):
        d.append(d[-1] + 4 * d[-1] * sum(d[: n - 1]))
    return tuple(d)


def brute_force_tuples(dims, n, strict=False):
    out = []
    for m in range(1, n):
        i_hi = dims[m - 1] - 1 if strict else dims[m - 1]
        for i, j, e1, e2 in itertools.product(range(1, i_hi + 1), range(1, dims[n - 1] + 1), (1, -1), (1, -1)):
            out.append((m, i, j, e1, e2))
    return out


class NaiveBD:
    """Direct transcription of the definitions on Python lists; no vectorization."""

    def __init__(self, a, b, dims, tables):
        self.a, self.b, self.dims, self.tables = a, b, dims, tables

    def step(self, n, x):
        out = list(x)
        for m, i, j, e1, e2 in self.tables[n]:
            y = self.embed(m, n, x[: self.dims[m - 1]])
            r = [xk - yk for xk, yk in zip(x, y)]
            out.append(e1 * self.a * x[i - 1] + e2 * self.b * r[j - 1])
        return out

    def embed(self, m, n, x):
        for k in range(m, n):
            x = self.step(k, x)
        return list(x)


def test_dims_inclusive(float_ledger):
    assert float_ledger.dims == DIMS6
    assert recursion_dims(6) == DIMS6
    assert tuple(projected_dims("inclusive", 6)) == DIMS6


def test_dims_single_stage():
    ledger = build_ledger(default_params(), 1)
    assert ledger.dims == (1,)
    assert ledger.gamma_tables == ()


def test_dims_paper_strict_degenerate():
    ledger = build_ledger(default_params(convention="paper-strict"), 6)
    assert ledger.dims == (1,) * 6
    assert all(len(t) == 0 for t in ledger.gamma_tables)
    x = ledger.vector(1, [2.5])
    assert embed_coords(ledger, 1, 6, x.coords).tolist() == [2.5]


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_gamma_tables_match_brute_force(float_ledger, n):
    got = [(g.m, g.i, g.j, g.eps1, g.eps2) for g in enumerate_gammas(float_ledger, n)]
    expected = brute_force_tuples(float_ledger.dims, n)
    assert got == expected
    assert len(set(got)) == len(got)
    # canonical order: lexicographic with +1 before -1
    assert got == sorted(got, key=lambda t: (t[0], t[1], t[2], -t[3], -t[4]))


def test_gamma_counts(float_ledger):
    assert enumerate_gammas(float_ledger, 1) == []
    g2 = enumerate_gammas(float_ledger, 2)
    assert [(g.m, g.i, g.j, g.eps1, g.eps2) for g in g2] == [(1, 1, 1, 1, 1), (1, 1, 1, 1, -1), (1, 1, 1, -1, 1), (1, 1, 1, -1, -1)]
    assert len(enumerate_gammas(float_ledger, 3)) == 40
    for n in range(1, 6):
        expected = 4 * sum(float_ledger.dims[m - 1] for m in range(1, n)) * float_ledger.dims[n - 1]
        assert len(gamma_table(float_ledger, n)) == expected


def test_gamma_out_of_range(float_ledger):
    with pytest.raises(StageError):
        enumerate_gammas(float_ledger, 6)
    with pytest.raises(StageError):
        enumerate_gammas(float_ledger, 0)


def test_ledger_is_read_only(float_ledger):
    with pytest.raises(ValueError):
        float_ledger.gamma_tables[2][0, 0] = 7


def test_memory_cap():
    with pytest.raises(ResourceLimitError) as info:
        build_ledger(default_params(), 7)
    assert info.value.stage == 7
    with pytest.raises(ResourceLimitError) as info:
        build_ledger(default_params(), 5, dim_cap=1000)
    assert info.value.stage == 5


def test_eval_functional_examples(exact_ledger):
    p = exact_ledger.params
    zero = exact_ledger.vector(3, [0] * 5)
    for g in enumerate_gammas(exact_ledger, 3)[:10]:
        assert eval_functional(exact_ledger, g, zero) == 0
    e3 = exact_ledger.basis_vector(3, 3)
    assert eval_functional(exact_ledger, GammaIndex(3, 2, 1, 3, 1, 1), e3) == p.b


def test_eval_functional_on_embedded_vectors(exact_ledger):
    # x = i_{m,n}(y): residual vanishes, value is eps1 * a * y_i
    rng = random.Random(3)
    for m, n in [(2, 3), (2, 4), (3, 4), (1, 4)]:
        y = random_rationals(rng, (exact_ledger.dims[m - 1],))
        x = StageVector(n, embed_coords(exact_ledger, m, n, y))
        for g in enumerate_gammas(exact_ledger, n):
            if g.m != m:
                continue
            assert eval_functional(exact_ledger, g, x) == g.eps1 * exact_ledger.params.a * y[g.i - 1]


def test_eval_functional_stage_mismatch(exact_ledger):
    with pytest.raises(StageError):
        eval_functional(exact_ledger, GammaIndex(3, 2, 1, 3, 1, 1), exact_ledger.basis_vector(4, 1))


def test_embed_step_matches_functionals(exact_ledger):
    rng = random.Random(11)
    for n in (2, 3, 4):
        x = StageVector(n, random_rationals(rng, (exact_ledger.dims[n - 1],)))
        y = embed_step(exact_ledger, x)
        d_n = exact_ledger.dims[n - 1]
        assert y.stage == n + 1 and len(y) == exact_ledger.dims[n]
        assert list(y.coords[:d_n]) == list(x.coords)
        expected = [eval_functional(exact_ledger, g, x) for g in enumerate_gammas(exact_ledger, n)]
        assert list(y.coords[d_n:]) == expected


def test_embed_matches_naive_reference(exact_ledger):
    tables = {n: [tuple(map(int, r)) for r in gamma_table(exact_ledger, n)] for n in range(1, 5)}
    naive = NaiveBD(exact_ledger.params.a, exact_ledger.params.b, exact_ledger.dims, tables)
    rng = random.Random(5)
    for m in (1, 2, 3):
        x = list(random_rationals(rng, (exact_ledger.dims[m - 1],)))
        assert list(embed_coords(exact_ledger, m, 4, x)) == naive.embed(m, 4, x)
    x = list(random_rationals(rng, (45,)))
    assert list(embed_coords(exact_ledger, 4, 5, x)) == naive.embed(4, 5, x)


def test_embed_step_stage2_example():
    ledger = build_ledger(default_params(mode="exact"), 3)
    a = ledger.params.a
    t = Fraction(7, 3)
    y = embed_step(ledger, ledger.vector(2, [t]))
    assert list(y.coords) == [t, a * t, a * t, -a * t, -a * t]
    assert sup_norm(y) == abs(t)
    assert list(embed_step(ledger, ledger.vector(2, [0])).coords) == [0] * 5


def test_embed_composition_examples(exact_ledger):
    x = exact_ledger.vector(2, [1])
    assert list(embed(exact_ledger, 2, 3, x).coords) == list(embed_step(exact_ledger, x).coords)
    y = embed(exact_ledger, 2, 4, x)
    assert list(y.coords[:5]) == list(embed(exact_ledger, 2, 3, x).coords)
    assert list(project(exact_ledger, 2, y).coords) == [1]


def test_embed_errors(exact_ledger):
    x = exact_ledger.vector(3, [0] * 5)
    with pytest.raises(StageError):
        embed(exact_ledger, 3, 3, x)
    with pytest.raises(StageError):
        embed(exact_ledger, 2, 4, x)
    with pytest.raises(StageError):
        embed_step(exact_ledger, exact_ledger.vector(5, [0] * 1305))
    with pytest.raises(StageError):
        exact_ledger.vector(3, [0] * 4)


def test_project_examples(exact_ledger):
    a = exact_ledger.params.a
    x = exact_ledger.vector(3, [1, a, a, -a, -a])
    assert list(project(exact_ledger, 3, x).coords) == list(x.coords)
    assert list(project(exact_ledger, 1, x).coords) == [1]
    with pytest.raises(StageError):
        project(exact_ledger, 4, x)


def test_compatibility_identities_exact(exact_ledger):
    rng = random.Random(0)
    for m, n in itertools.combinations(range(1, 6), 2):
        X = random_rationals(rng, (5, exact_ledger.dims[m - 1]))
        Y = embed_coords(exact_ledger, m, n, X)
        assert (Y[:, : exact_ledger.dims[m - 1]] == X).all()
    for m, l, n in itertools.combinations(range(1, 6), 3):
        X = random_rationals(rng, (3, exact_ledger.dims[m - 1]))
        lhs = embed_coords(exact_ledger, l, n, embed_coords(exact_ledger, m, l, X))
        assert (lhs == embed_coords(exact_ledger, m, n, X)).all()


def test_linearity_exact(exact_ledger):
    rng = random.Random(1)
    s, t = Fraction(3, 7), Fraction(-5, 2)
    for m, n in [(1, 5), (2, 5), (3, 5), (4, 5), (3, 4)]:
        x, y = random_rationals(rng, (2, exact_ledger.dims[m - 1]))
        lhs = embed_coords(exact_ledger, m, n, s * x + t * y)
        rhs = s * embed_coords(exact_ledger, m, n, x) + t * embed_coords(exact_ledger, m, n, y)
        assert (lhs == rhs).all()
    g = enumerate_gammas(exact_ledger, 4)[777]
    x, y = (StageVector(4, v) for v in random_rationals(rng, (2, 45)))
    combo = StageVector(4, s * x.coords + t * y.coords)
    assert eval_functional(exact_ledger, g, combo) == s * eval_functional(exact_ledger, g, x) + t * eval_functional(exact_ledger, g, y)


def test_residual_support(exact_ledger):
    rng = random.Random(2)
    for m, n in [(1, 4), (2, 4), (3, 4), (3, 5), (4, 5)]:
        x = random_rationals(rng, (exact_ledger.dims[n - 1],))
        d_m = exact_ledger.dims[m - 1]
        r = x - embed_coords(exact_ledger, m, n, x[:d_m])
        assert all(v == 0 for v in r[:d_m])


def test_extend(float_ledger):
    a = float_ledger.params.a
    x = float_ledger.vector(2, [1.0])
    e = extend(float_ledger, x, 3)
    assert isinstance(e, ExtendedVector) and e.base_stage == 2 and e.top_stage == 3
    np.testing.assert_array_equal(e.coords, [1, a, a, -a, -a])
    assert extend(float_ledger, x, 2).coords.tolist() == [1.0]
    rng = np.random.default_rng(0)
    x = float_ledger.vector(3, rng.choice([-1.0, 1.0], size=5))
    norms = [sup_norm(extend(float_ledger, x, N)) for N in range(3, 7)]
    assert norms == sorted(norms)
    for N in range(3, 7):
        ext = extend(float_ledger, x, N)
        for k in range(3, N + 1):
            np.testing.assert_array_equal(ext.coords[: float_ledger.dims[k - 1]], extend(float_ledger, x, k).coords)
    with pytest.raises(StageError):
        extend(float_ledger, x, 2)


def test_sup_norm():
    assert sup_norm(np.zeros(4)) == 0
    assert sup_norm(np.array([1, 0.97, 0.97, -0.97, -0.97])) == 1
    assert sup_norm(np.array([Fraction(-3, 2), Fraction(1)], dtype=object)) == Fraction(3, 2)


def test_norm_bound_random_sign_vectors(float_ledger):
    lam = float_ledger.params.lam
    rng = np.random.default_rng(7)
    for n in range(1, 6):
        X = rng.choice([-1.0, 1.0], size=(40, float_ledger.dims[n - 1]))
        ext = embed_coords(float_ledger, n, 6, X)
        assert (sup_norm(ext) <= lam * sup_norm(X) * (1 + 1e-12)).all()


@settings(max_examples=40, deadline=None)
@given(st.lists(st.fractions(min_value=-5, max_value=5, max_denominator=20), min_size=5, max_size=5))
def test_norm_bound_exact_hypothesis(coords):
    ledger = _exact_stage4()
    x = np.array(coords, dtype=object)
    ext = embed_coords(ledger, 3, 4, x)
    assert sup_norm(ext) <= ledger.params.lam * sup_norm(x)
    assert (ext[:5] == x).all()


_CACHE = {}


def _exact_stage4():
    if "l" not in _CACHE:
        _CACHE["l"] = build_ledger(Params("97/100", "443648/1000000", "861/100", mode="exact"), 4)
    return _CACHE["l"]


def test_determinism_across_workers():
    p = default_params()
    l1 = build_ledger(p, 6, workers=1)
    l4 = build_ledger(p, 6, workers=4)
    assert l1.dims == l4.dims
    for t1, t4 in zip(l1.gamma_tables, l4.gamma_tables):
        assert np.array_equal(t1, t4)
    rng = np.random.default_rng(3)
    X = rng.standard_normal((3, 1305))
    y1 = embed_coords(l1, 5, 6, X)
    y4 = embed_coords(l4, 5, 6, X)
    assert y1.tobytes() == y4.tobytes()
