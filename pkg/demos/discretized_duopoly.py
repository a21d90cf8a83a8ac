"""
Discretized duopoly, certified state by state
=============================================

The same duopoly on a finite quantity grid with binned Gaussian prices.
Both groups infer the demand intercept from data; the direct scan finds
every self-confirming state at the two extreme population shares and
certifies each one with the generic verifier.
"""

import numpy as np

from zeitgeist.catalog import (CournotSpec, build_cournot_discrete,
                               cournot_closed_form, cournot_discrete_ez)

spec = CournotSpec(beta=10.0, c=2.0, r=1.0, r_hat=0.5)
form = cournot_closed_form(spec)
grid = np.linspace(0.0, 8.0, 101)
env, model_a, model_b = build_cournot_discrete(spec, grid, price_bins=200,
                                               noise_sd=2.0)
print(f"grid: {len(grid)} quantities, step {grid[1] - grid[0]:g}; "
      f"{model_a.n_params} intercept parameters per group")

for shares, who in (((1.0, 0.0), "A"), ((0.0, 1.0), "B")):
    states = cournot_discrete_ez(env, model_a, model_b, shares)
    print(f"\nshares {shares}: group {who} is the whole population; "
          f"{len(states)} certified state(s)")
    quads = sorted({tuple(round(float(grid[a]), 4) for a in z.outcomes[0].quadruple)
                    for z in states})
    print("  (a_AA, a_AB, a_BA, a_BB):")
    for quad in quads:
        print(f"    {quad}")

print(f"\nclosed-form references: a_AA = {form.a_AA:.4f}, "
      f"a_BA = {form.a_BA:.4f}")
print("in the resident world the grid lands within one step of both: the")
print("residents produce about 8/3 and the entrant commits to the leader")
print("quantity 4.  In the entrant world the entrants' own data drags the")
print("inferred intercept down and they settle lower.")
