"""
Quantity-setting duopoly in closed form
=======================================

Group A knows the demand slope; group B perceives a flatter one and
fits the intercept to the prices it sees.  When A is the whole
population, a B entrant ends up committing to the quantity a Stackelberg
leader would pick, and the best possible misperception is exactly half
the true slope.
"""

import numpy as np

from zeitgeist.catalog import CournotSpec, cournot_closed_form

spec = CournotSpec(beta=10.0, c=2.0, r=1.0, r_hat=0.5)
form = cournot_closed_form(spec)

print(f"inverse demand: P = {spec.beta:g} - {spec.r:g}(q_i + q_j) + noise, "
      f"unit cost {spec.c:g}")
print(f"resident symmetric quantity a_AA = {form.a_AA:.6f}  "
      f"(= (beta-c)/3r = {(spec.beta - spec.c) / 3:.6f})")
print(f"resident fitness              = {form.resident_fitness:.6f}")
print(f"Stackelberg leader quantity   = {form.a_stack:.6f}")
print(f"entrant quantity at r_hat=1/2 = {form.a_BA:.6f}")
print(f"entrant fitness               = {form.entrant_fitness:.6f}")
print()

# sweep the perceived slope: the entrant's fitness against truthful
# residents is a parabola in its own quantity, maximized when the
# misperception makes it commit to the leader quantity
r_hats = np.linspace(0.1, 1.5, 15)
print("r_hat   entrant quantity   entrant fitness")
for rh in r_hats:
    q = form.a_BA_at(rh)
    print(f"{rh:5.2f}   {q:16.4f}   {form.entrant_fitness_at(rh):15.4f}")
best = r_hats[np.argmax([form.entrant_fitness_at(rh) for rh in r_hats])]
print(f"\nbest perceived slope on this sweep: {best:.2f} (true slope / 2)")
