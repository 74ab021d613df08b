#!/usr/bin/env python3

# # Transport along characteristics, and symmetries of a map
#
# ## Transport
#
# The equation u_t = b(x) u_x is solved by composing the initial profile with
# the flow of b: u(t, x) = u0(chi_t(x)). For b(x) = x the characteristics
# are chi_t(x) = x e^t, so a sine profile is compressed exponentially.

import numpy as np

from kernel_koopman import (
    AtomicMeasure,
    TransportProblem,
    factor_intertwiner,
    linear_map,
    make_kernel,
    rotation,
    scaling_map,
    symmetry_commutator,
    transport_residual,
    transport_solve,
)

xs = np.linspace(-3, 3, 200)
prob = TransportProblem("x", "sin(x)", step=1e-3)
for t in (0.25, 0.5, 1.0):
    u = transport_solve(prob, t, xs)
    err = np.max(np.abs(u - np.sin(xs * np.exp(t))))
    res = np.max(transport_residual(prob, t, xs))
    print(f"t = {t}: error vs closed form {err:.1e}, PDE residual {res:.1e}")

# ## Symmetry
#
# A rotation commutes with a rotation-scaling, so their transfer operators
# commute as well. Both orders move every atom to the same place, and the two
# embeddings agree to roundoff. A non-conformal stretch breaks this.

rng = np.random.default_rng(1)
mu = AtomicMeasure(rng.standard_normal((6, 2)), rng.standard_normal(6))
k = make_kernel("gaussian", dim=2)
f = linear_map(0.8 * rotation(0.4))
good = symmetry_commutator(k, f, linear_map(rotation(1.1)), mu)
bad = symmetry_commutator(k, f, linear_map(np.diag([1.0, 2.0])), mu)
print(f"rotation:  defect {good.max_defect:.1e}  pass={good.passed}")
print(f"stretch:   defect {bad.max_defect:.1e}  pass={bad.passed}")

# ## A factor system
#
# The triangular map (x1, x2) -> (x1 / 2, sin x1 + 0.3 x2) drives its first
# coordinate on its own. Projecting onto x1 therefore intertwines it with the
# scalar map x -> x / 2.

def tri(x):
    return np.array([0.5 * x[0], np.sin(x[0]) + 0.3 * x[1]])


def proj(x):
    return x[:1]


k1 = make_kernel("gaussian")
ok = factor_intertwiner(k, k1, tri, proj, scaling_map(0.5), mu)
off = factor_intertwiner(k, k1, tri, proj, scaling_map(0.6), mu)
print(f"factor x/2:   defect {ok.max_defect:.1e}")
print(f"factor 0.6 x: defect {off.max_defect:.1e}")
