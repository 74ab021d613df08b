#!/usr/bin/env python3

# # Flows, time averages and growth rates
#
# A vector field generates a semiflow phi_t, and the transfer semigroup moves
# sections along it: K_t k(x, .) = k(phi_t(x), .). Averaging a section along a
# trajectory produces a measure I_{T,x}, which we realize with Gauss-Legendre
# nodes on the trajectory.

import numpy as np

from kernel_koopman import (
    Flow,
    embed_eval_many,
    generator_identity_check,
    growth_bound,
    harmonic_oscillator,
    linear_field,
    make_kernel,
    path_integral,
    pf_semigroup_apply,
    span_norm_derivative,
    van_der_pol,
)

# ## A periodic orbit
#
# The harmonic oscillator has period 2π. Averaging over one full period gives
# a measure that the semigroup leaves unchanged: moving every node by t only
# relabels the orbit.

k = make_kernel("gaussian", dim=2)
flow = Flow(harmonic_oscillator(), step=1e-3)
I = path_integral(k, flow, [1.0, 0.0], 2 * np.pi)
Y = k.sample(20, seed=2)
base = embed_eval_many(I.measure, k, Y)
for t in (0.5, 1.0, 3.0):
    moved = embed_eval_many(pf_semigroup_apply(flow, t, I.measure), k, Y)
    print(f"t = {t}: max change of the embedding {np.max(np.abs(moved - base)):.1e}")

# ## The generator of a time average
#
# Differentiating K_h I_{T,x} at h = 0 gives k(phi_T(x), .) - k(x, .). A
# forward difference in h approaches this at first order, so the defect
# should drop tenfold per decade of h.

rep = generator_identity_check(make_kernel("gaussian"), Flow(linear_field([[-1.0]])), [1.0], 1.0)
for h, d in zip(rep.h, rep.defects):
    print(f"h = {h:.0e}: defect {d:.3e}")
print("ratios:", np.round(rep.ratios, 3), "first order:", rep.first_order)

# ## A growth-rate certificate
#
# For the Van der Pol field we compute the largest rate at which the squared
# norm of a combination of sections can grow at t = 0, over a sampled span.
# A numerical derivative along random combinations never exceeds it.

field = van_der_pol(1.0)
X = k.sample(12, seed=7)
omega = growth_bound(k, field, X).bound
print(f"omega over the sampled span: {omega:.6f}")
rng = np.random.default_rng(0)
worst = max(
    dN / (2 * n0)
    for dN, n0 in (span_norm_derivative(k, Flow(field), X, rng.standard_normal(12)) for _ in range(200))
)
print(f"largest observed rate:       {worst:.6f}")
