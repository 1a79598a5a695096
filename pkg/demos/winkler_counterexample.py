"""
Marginal convergence without a law of large numbers
===================================================

A two-state chain flips state with probability theta_n at step n. When
sum theta_n < infinity, the chain eventually stops flipping: neither the marginal
nor the running average settles at (1/2, 1/2). When sum theta_n = infinity but
theta_n -> 0, the marginal converges. The running averages still converge only
slowly, because long runs in one state dominate.
"""
import numpy as np

from adaptive_mcmc.finite_exact import winkler_counterexample, winkler_second_moment_enumeration
from adaptive_mcmc.schedules import PowerSchedule

N = 10**4
schedules = {
    "1/n^2": PowerSchedule(power=2.0, offset=2.0),
    "1/n": PowerSchedule(power=1.0, offset=2.0),
    "constant 0.3": PowerSchedule(scale=0.3, power=0.0),
}

print("schedule        ||law(X_N) - pi||_1   E[(avg_N - 1/2)^2]")
for name, sched in schedules.items():
    r = winkler_counterexample(sched, N)
    print(f"{name:<15s} {r.tv_to_pi[N]:<21.4g} {r.second_moment[N]:.4g}")

# With summable theta_n the distance has a closed form: the product of |1 - 2 theta_k|.
th = schedules["1/n^2"](np.arange(N))
print("\nproduct formula for 1/n^2:", np.prod(np.abs(1 - 2 * th)))

# Independent check on short horizons: enumerate all 2^N paths.
for k in (4, 8, 12):
    rec = winkler_counterexample(schedules["1/n"], k).second_moment[k]
    enum = winkler_second_moment_enumeration(schedules["1/n"], k)[k]
    print(f"N={k:2d}: recursion {rec:.12f}  enumeration {enum:.12f}")
