"""Building stages and checking the compatibility identities and the norm bound."""
from fractions import Fraction

import numpy as np

from bdspace import Params, build_ledger, default_params, embed_coords, enumerate_gammas, sup_norm

# %% dimensions grow super-exponentially
ledger = build_ledger(default_params(), 6)
print("dims:", ledger.dims)
print("first gamma tuples of stage 3:", enumerate_gammas(ledger, 3)[:4])

# %% the strict index range leaves all extension sets empty
print("paper-strict dims:", build_ledger(default_params(convention="paper-strict"), 6).dims)

# %% exact arithmetic: pi_m o i_{m,n} = id and i_{l,n} o i_{m,l} = i_{m,n}
exact = build_ledger(Params("97/100", "443648/1000000", "861/100", mode="exact"), 5)
x = np.array([Fraction(1, 3), Fraction(-2, 7), Fraction(5, 4), Fraction(0), Fraction(1)], dtype=object)
y = embed_coords(exact, 3, 5, x)
print("prefix preserved:", (y[:5] == x).all())
print("composition law:", (embed_coords(exact, 4, 5, embed_coords(exact, 3, 4, x)) == y).all())

# %% ||i_{n,6}(x)|| <= lambda ||x|| on random sign vectors
rng = np.random.default_rng(0)
for n in range(1, 6):
    X = rng.choice([-1.0, 1.0], size=(20, ledger.dims[n - 1]))
    ratio = (sup_norm(embed_coords(ledger, n, 6, X)) / sup_norm(X)).max()
    print(f"stage {n}: worst ratio {ratio:.4f} (lambda = {ledger.params.lam})")
