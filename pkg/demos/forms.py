"""Form generators on proper subspaces of the initial space.

Run:  python3 demos/forms.py
"""

import numpy as np

from qs_trotter.ito_algebra import sample_qc, series
from qs_trotter.qform import (
    bounded_to_form,
    defect_margin,
    form_from_bounded_on,
    forms_allclose,
    qf_defect_check,
    qf_three_factor_residual,
    qf_series,
    qf_series_all,
    qf_wills_residual,
    random_form,
    random_frame,
    random_vector,
)

rng = np.random.default_rng(5)

# Two forms on planes in C^3 and one on the whole space. The product is
# defined on the line where the planes meet; a third generic plane would cut
# it down to {0}, which is still a legal domain.
A, B = (random_form(3, 1, rng, frame=random_frame(rng, 3, 2), scale=0.6) for _ in range(2))
C = random_form(3, 1, rng, scale=0.6)
ABC = qf_series_all([A, B, C])
print("domain dimensions:", A.m, B.m, C.m, "->", ABC.m)

xi = random_vector(ABC, rng)
print(f"three-factor expansion residual {qf_three_factor_residual(A, B, C, xi):.1e}")
print(f"Wills residual on A             {qf_wills_residual(A, random_vector(A, rng)):.1e}")

# Full-domain forms are the bounded theory in disguise.
F1, F2 = sample_qc(3, 1, 0.0, seed=1), sample_qc(3, 1, 0.0, seed=2)
same = forms_allclose(bounded_to_form(series(F1, F2)), qf_series(bounded_to_form(F1), bounded_to_form(F2)), 1e-12)
print("bounded series agrees with form series:", same)

# Level closure: factors at levels b1, b2 give a product at level b1 + b2.
Q = random_frame(rng, 3, 2)
G1 = form_from_bounded_on(sample_qc(3, 1, -0.4, seed=3), Q)
G2 = form_from_bounded_on(sample_qc(3, 1, -0.3, seed=4), Q)
# A margin of zero means the factor sits exactly on its level boundary.
print(f"margins: {defect_margin(G1, 0.4):+.2e}, {defect_margin(G2, 0.3):+.2e}, "
      f"product at 0.7: {defect_margin(qf_series(G1, G2), 0.7):+.2e}")
print("level checks:", qf_defect_check(G1, 0.4), qf_defect_check(G2, 0.3), qf_defect_check(qf_series(G1, G2), 0.7))
