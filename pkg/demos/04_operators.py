"""Finite operators l2^K -> stage n: norms, compactness defects, witnesses, contradiction bound."""
import numpy as np

from bdspace import FiniteOperator, build_ledger, default_params, defect_profile, demo_contradiction, find_block_witness, op_norm
from bdspace.params import solve_alpha

ledger = build_ledger(default_params(), 5)

# %% a single geometric row: the defect at k is ~ 2^-k * 2/sqrt(3)
T = FiniteOperator(np.array([[2.0**-i for i in range(12)]]), 1)
prof = defect_profile(T, ledger)
print("defects:", [round(v, 6) for v in prof.values[:6]], "...")
print("numerically compact at scale:", prof.numerically_compact())

# %% a random operator into stage 3; its norm bracket and a gliding-hump block
rng = np.random.default_rng(3)
T = FiniteOperator(rng.standard_normal((5, 8)), 3)
b = op_norm(T, ledger)
print(f"norm bracket at stage {b.extension_stage}: [{b.lower:.4f}, {b.upper:.4f}]")
prof = defect_profile(T, ledger)
w = find_block_witness(T, ledger, None, prof.values[4] / 2, after=4)
print(f"witness window ({w.start}, {w.stop}], ratio {w.achieved:.4f} > {prof.values[4] / 2:.4f}")

# %% n^alpha lower growth vs sqrt(n) upper growth: they collide past this n
alpha = solve_alpha(ledger.params.a, ledger.params.b).alpha
print("contradiction bound with ||T|| = 2:", demo_contradiction(2.0, 1.0, 1.0, alpha))
