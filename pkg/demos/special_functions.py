"""Tour of the Mittag-Leffler type functions behind the solver.

Shows the classical reductions of the three-parameter function, a
bivariate evaluation with its convergence discriminants, and the four
trivariate packings used by the closed-form solution.

Run with:  python3 demos/special_functions.py
"""

import math

from prabtel import (
    PrabhakarParams,
    discriminants2,
    discriminants3,
    ml2,
    ml2_tele,
    ml3,
    ml3_tele_variant,
    ml_prabhakar,
)

print("three-parameter function, classical reductions")
for z in (-2.0, -0.5, 0.5, 2.0):
    e = ml_prabhakar(1.0, 1.0, 1.0, z)
    c = ml_prabhakar(2.0, 1.0, 1.0, z * z)
    print(f"  z = {z:+.1f}   E(z) = {e: .12f}  (exp {math.exp(z): .12f})"
          f"   E2(z^2) = {c: .12f}  (cosh {math.cosh(z): .12f})")

print()
print("bivariate instance from the kernel packing")
params = PrabhakarParams(alpha=1.0, beta=0.5, gamma=0.5, delta=-1.0)
packed2 = ml2_tele(params)
d1, d2 = discriminants2(packed2)
value = ml2(packed2, -0.5, -0.25)
print(f"  E2(-0.5, -0.25) = {value:.12f}   discriminants = {d1:g}, {d2:g}")

print()
print("trivariate packings of the solution formula")
for variant in ("V1", "V2", "V3", "V4"):
    packed3 = ml3_tele_variant(variant, params)
    value = ml3(packed3, 0.5, -0.25, -0.125)
    ds = ", ".join(f"{d:g}" for d in discriminants3(packed3))
    print(f"  {variant}: E3(0.5, -0.25, -0.125) = {value:.12f}"
          f"   discriminants = {ds}")
