"""
Power against approaching alternatives
=======================================

With gamma = c / sqrt(n) the statistic is asymptotically normal with a
mean shift proportional to c. Here the shift is estimated from a large
simulated sample and the resulting power is compared with simulation.
"""

from phscore import (
    AltModelSpec,
    Bernoulli,
    Exponential,
    ExponentialCensoring,
    Normal,
    mc_power,
    plugin_limits,
    render_power,
)

spec = AltModelSpec([0.5, 0.3], [0.0], [0], Exponential(1.0), ExponentialCensoring(0.3),
                    [Bernoulli(0.5), Normal()])

# The limit quantities depend only on the null model, so compute them once.
limits = plugin_limits(spec, n_plugin=100_000, seed=0)
print(f"d / c = {limits.d_per_c:.5f} (se {limits.d_per_c_se:.1e}), D = {limits.D:.5f}")

# Two ways of turning d into the mean shift. Dividing by D makes the shift
# equal to c whatever the design; dividing by sqrt(D) is what the simulated
# statistics follow.
results = []
for scaling in ("printed", "sqrt"):
    for c in (4.0, 12.0):
        results.append(mc_power(spec, c, 500, replicates=200, seed=3, scaling=scaling,
                                limits=limits))
print(render_power(results, "text"))
