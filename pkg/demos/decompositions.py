"""Factor a contractive generator three ways and rebuild it.

Run:  python3 demos/decompositions.py
"""

import numpy as np

from qs_trotter.decompositions import dilate_to_unitary, gaussian_split, left_series_decomposition
from qs_trotter.ito_algebra import classify, concat, random_unitary, rotate_noise, sample_qc, series_all, weyl_generator

rng = np.random.default_rng(3)

# A contractive generator: one non-Gaussian noise channel, one Gaussian one,
# mixed by a rotation of the noise basis so the split is not visible by eye.
F = rotate_noise(concat(sample_qc(2, 1, 0.0, seed=rng, p_unitary=0.0), weyl_generator([0.7 - 0.2j], 2)),
                 random_unitary(rng, 2))
rep = classify(F)
print(f"beta0 = {rep.beta0:.3e}, contractive = {rep.is_contractive}, gaussian = {rep.is_gaussian}")

drift, gauss, rest = left_series_decomposition(F)
print("\nleft series decomposition")
for name, X in [("drift", drift), ("pure Gaussian", gauss), ("contractive rest", rest)]:
    r = classify(X)
    print(f"  {name:17s} drift={r.is_pure_drift!s:5} pure_gaussian={r.is_pure_gaussian!s:5} contractive={r.is_contractive}")
print(f"  rebuild error {(series_all([drift, gauss, rest]) - F).norm():.1e}")

sp = gaussian_split(F)
print("\nGaussian split")
print(f"  wholly non-Gaussian part: {sp.F_wng.d_k} channel(s); maximal Gaussian part: {sp.F_mg.d_k} channel(s)")
print("  Gaussian direction in the original basis:", np.round(sp.basis_gauss[:, 0], 4))
print(f"  rebuild error {(sp.reconstruct() - F).norm():.1e}")

dl = dilate_to_unitary(F)
print("\nunitary dilation")
print(f"  noise channels {F.d_k} -> {dl.F_prime.d_k}; unitary class: {classify(dl.F_prime).is_unitary}")
print(f"  compression error {(dl.compression(F.d_k) - F).norm():.1e}")
