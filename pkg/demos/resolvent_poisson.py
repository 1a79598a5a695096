"""
Resolvents and the Poisson equation for the adaptive lattice chain
==================================================================

For a in (0, 1), the resolvent g_a(x, theta) = sum_j (1 - a)^j E[fbar(Z_j)] solves
g_a - (1 - a) P g_a = fbar exactly, where Z is the joint chain and fbar the
centred test function. The series is truncated at a length chosen from a tail
bound. The tests check the identity residual, and a * g_a shrinks as a -> 0
because fbar has mean zero under pi.
"""
import numpy as np

from adaptive_mcmc.finite_exact import ResolventSpec, exact_resolvent, poisson_residual_table, resolvent_table
from adaptive_mcmc.schedules import ConstantSchedule, harmonic
from adaptive_mcmc.targets import DiscretePmf

pmf = DiscretePmf.linear(10)
M = 5
f = np.eye(10)[-1]  # indicator of the top state

print("a      max|a g_a|   worst Poisson residual")
for a in (0.5, 0.2, 0.1, 0.05, 0.02, 0.01):
    spec = ResolventSpec(a, f, tol=1e-12)
    g = resolvent_table(spec, pmf, M, harmonic())
    res = poisson_residual_table(spec, pmf, M, harmonic())
    print(f"{a:<6g} {np.abs(a * g).max():<12.4f} {res.max():.2e}")

# A single start point, for a homogeneous chain (no adaptation).
g11 = exact_resolvent(ResolventSpec(0.05, f), pmf, M, (1, 1), ConstantSchedule(0.0))
print("\nfrozen widths, a = 0.05, start (1, 1):", g11)
