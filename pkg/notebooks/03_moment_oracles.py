"""
Exact moments next to their bounds
==================================

Each moment bound used in the analysis has an exact counterpart that can be
computed by convolution or enumeration. Comparing them shows how much slack
the bounds carry.
"""

# %%
import math

from collision.defaults import load_defaults
from collision.moments import (
    AuxFunctionParams,
    aux_g,
    aux_g_argmax,
    aux_g_sup_bound,
    even_multinomial_sum,
    lambert_w,
    moment_table_rows,
    rademacher_moment_exact,
)

# %%
# Symmetrized binomial moments E(S - S')^d against their bound with C = 1.
print("n   p     d   exact        bound        ratio")
for n, p, d, exact, bound, ratio in moment_table_rows([5, 50], [0.05, 0.5], [2, 6, 12], 1, 1, kind="symm"):
    print(f"{n:<3d} {p:<5g} {d:<3d} {exact:<12.4g} {bound:<12.4g} {ratio:.3g}")

# %%
# Moments of one bin contribution S^2 - S with the fitted constants.
d = load_defaults()
rows = moment_table_rows([20, 100], [0.01, 0.3], [2, 8], d.bin_moment_C1, d.bin_moment_C2)
print("\nbin contributions, C1 = C2 =", round(d.bin_moment_C1, 4))
for n, p, dd, exact, bound, ratio in rows:
    print(f"n={n:<4d} p={p:<5g} d={dd:<3d} ratio={ratio:.3g}")

# %%
# The even-part multinomial sum undercounts the Rademacher moment:
# tuples that use fewer than l distinct indices are missing.
for l, dd in [(2, 4), (3, 6), (4, 8)]:
    print(f"l={l} d={dd}: multinomial {even_multinomial_sum(l, dd)}, Rademacher {rademacher_moment_exact(l, dd)}")

# %%
# g(l) = a^l l^(b-l) peaks at b / W(b e / a).
p = AuxFunctionParams(0.2, 3.0)
star = aux_g_argmax(p)
print(f"\nW(1) = {lambert_w(1):.12f}")
print(f"argmax = {star:.4f}, g(argmax) = {aux_g(star, p):.5f}, sup bound on [1, b] = {aux_g_sup_bound(p)}")
print(f"g(1) = {aux_g(1.0, p)}, g(b) = {aux_g(3.0, p):.5f}, e-check W(e) = {lambert_w(math.e)}")
