"""Walk through the series product on a few small generators.

Run:  python3 demos/algebra.py
"""

import numpy as np

from qs_trotter.ito_algebra import (
    adjoint,
    beta0,
    classify,
    explicit_inverse,
    sample_qc,
    series,
    weyl_generator,
    wills_check,
    zero_generator,
)

np.set_printoptions(precision=4, suppress=True)

# Two Weyl generators compose to a third one, up to a scalar drift phase.
c, d = np.array([1.0]), np.array([0.5j])
W = series(weyl_generator(c, 1), weyl_generator(d, 1))
V = weyl_generator(c + d, 1)
print("Weyl pair: K difference =", (W.K - V.K)[0, 0], " (expected -i Im<c,d> =", -1j * np.vdot(c, d).imag, ")")

# The zero generator is the unit; generic F have an explicit inverse.
F = sample_qc(2, 1, 0.3, seed=11)
print("unit law holds:", series(zero_generator(2, 1), F) == F)
print("F o F^-1 norm:", f"{series(F, explicit_inverse(F)).norm():.2e}")

# The adjoint reverses products.
G = sample_qc(2, 1, 0.0, seed=12)
gap = (adjoint(series(F, G)) - series(adjoint(G), adjoint(F))).norm()
print("adjoint reversal residual:", f"{gap:.2e}")
print("Wills residual for F:", f"{wills_check(F):.2e}")

# Growth bounds add under series products.
for name, X in [("F", F), ("G", G), ("F o G", series(F, G))]:
    print(f"beta0({name}) = {beta0(X):+.4f}")

rep = classify(weyl_generator([1.0 - 2j], 1))
print("Weyl generator:", {k: v for k, v in vars(rep).items() if k.startswith("is_") and v})
