"""Trotter error against mesh for a pair of generators on a toy Fock space.

Run:  python3 demos/trotter_convergence.py
"""

from qs_trotter.cocycle_sim import StepFunction
from qs_trotter.ito_algebra import sample_qc, weyl_generator
from qs_trotter.toy_fock import trotter_report

F1 = sample_qc(2, 1, 0.2, seed=21, scale=0.5)
F2 = sample_qc(2, 1, -0.1, seed=22, scale=0.5)
g_prime = StepFunction([0.5], [[0.3], [-0.2j]])
g = StepFunction.constant([0.4])
meshes = [2.0**-k for k in range(2, 7)]


def show(title, rep):
    print(title)
    print(f"  {'mesh':>8} {'error':>10} {'bound':>10} {'estimate':>10}  m")
    for r in rep.rows:
        print(f"  {r.mesh:8.5f} {r.measured_error:10.3e} {r.bound:10.3e} {r.truncation_estimate:10.3e}  {r.m_used}")
    print(f"  slope {rep.slope:.3f}  verdicts {rep.verdicts((0.8, 1.2))}\n")


show("generic pair: error falls linearly with the mesh", trotter_report([F1, F2], g_prime, g, 0.0, 1.0, meshes))

# With a Weyl factor the product formula is exact; what remains is walk truncation.
W = weyl_generator([0.8 + 0.3j], 2)
show("Weyl factor: nothing but truncation error", trotter_report([W, F2], g_prime, g, 0.0, 1.0, meshes, [16, 32]))
