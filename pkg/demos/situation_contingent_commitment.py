"""
When does an illusion of control pay off?
=========================================

A three-strategy game played in two situations.  An entrant whose model
ignores the opponent's strategy treats each situation's commitment
payoff as achievable; whether correct residents can resist depends on
how the situations are weighted.  The separating-weights check finds
the weights that protect the equilibrium payoffs, and the classifier
shows the correct model is fragile at equal weights.
"""

import numpy as np

from zeitgeist.catalog import build_two_situation_game
from zeitgeist.games import stackelberg, symmetric_nash
from zeitgeist.models import (check_identifiability, illusion_of_control_model,
                              minimal_correct_model)
from zeitgeist.stability import classify_stability, singleton_fragility_check

env = build_two_situation_game()
print("situation   symmetric optimum   commitment play (leader value)")
for G in env.situations:
    nash = symmetric_nash(env, G)
    stack = stackelberg(env, G)
    print(f"{G:>9}   {nash.best[0]} at {nash.value:.2f}          "
          f"{stack.strategy} at {stack.value:.2f}")

ident = check_identifiability(env)
print(f"\nsituations distinguishable from any profile: {ident.situation_id}")
print(f"commitment data reveals the situation:        {ident.stackelberg_id}")

sep = singleton_fragility_check(env)
print(f"\nseparating situation weights: {np.round(sep.separating_q, 4)}")
print(f"protected payoff margin:       {sep.margin:.4f}")
print("every reaction rule an entrant could induce earns strictly less")
print("than the weighted equilibrium payoff at these weights.")

verdict = classify_stability(env, minimal_correct_model(env),
                             illusion_of_control_model(env),
                             q=(0.5, 0.5), eps_list=(0.01, 0.005, 0.001))
print(f"\nat equal weights the correct model is: {verdict.label}")
for ev in verdict.evidence:
    print(f"  invader share {ev.eps:>6}: fitness gap in "
          f"[{ev.min_gap:8.5f}, {ev.max_gap:8.5f}] across {ev.ez_count} state(s)")
