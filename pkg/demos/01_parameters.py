"""Feasible parameters and the growth exponent alpha.

Conditions (1) 0<b<a<1, (2) a+2b*lambda<=lambda and (3) a+b>1 force b < 1/2.
Adding a**3 + b**3 = 1 then forces a > (7/8)**(1/3) ~ 0.95647.
"""
from fractions import Fraction

from bdspace import min_lambda, solve_alpha, validate
from bdspace.params import cubic_residual

# %% the default triple
a = 0.97
b = (1 - a**3) ** (1 / 3)
print("b =", b, " min lambda =", min_lambda(a, b))
report = validate(a, b, 8.61)
for c in report.conditions:
    print(f"  ({c.name}) {c.statement:<28} {'holds' if c.holds else 'FAILS'}")
print("alpha =", solve_alpha(a, b).alpha)

# %% a**2 + b**2 = 1 gives alpha = 1/2
print("alpha(0.8, 0.6) =", solve_alpha(0.8, 0.6).alpha)
print("  condition (2) at lambda=100:", validate(0.8, 0.6, 100).condition("2").holds)

# %% exact rationals never satisfy a**3 + b**3 = 1; the residual is reported instead
print("exact residual:", float(cubic_residual(Fraction("0.97"), Fraction("0.443648"))))

# %% the lower edge of the feasible envelope
print("(7/8)^(1/3) =", (7 / 8) ** (1 / 3))
