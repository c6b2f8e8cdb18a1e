"""Partial-sum growth: l2 blocks grow like sqrt(n); BD candidates are explored, not certified."""
from bdspace import bd_growth_experiment, build_ledger, default_params, growth_exponent, make_l2_blocks, partial_sum_norms

# %% l2: disjoint unit blocks give ||S_n|| = sqrt(n)
seq = make_l2_blocks(64, 3, seed=1)
print("l2 exponent:", growth_exponent(partial_sum_norms(seq, "l2")).exponent)

# %% BD stages: new-coordinate indicators, normalized after extension to the top stage
ledger = build_ledger(default_params(), 6)
exp = bd_growth_experiment(ledger, "new-coordinates", 200)
print("full-sequence exponent:", exp.full.exponent)
print("greedy subsequence exponent:", exp.subsequence.exponent, "using", len(exp.subsequence_indices), "blocks")
print("alpha for comparison:", exp.alpha)
print(exp.note)
