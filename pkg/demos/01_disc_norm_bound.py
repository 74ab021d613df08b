#!/usr/bin/env python3

# # Norm of a composition operator on the Hardy space, estimated from samples
#
# On the unit disc the Szegő kernel k(z, w) = 1 / (1 - z conj(w)) reproduces
# the Hardy space H². A disc automorphism
#
# $$ f(z) = \lambda \frac{z - a}{1 - \bar a z}, \qquad |\lambda| = 1,\ |a| < 1 $$
#
# induces a bounded composition operator, and its squared norm is known in
# closed form: (1 + |f(0)|) / (1 - |f(0)|). For a = 0.5 this is 3.
#
# We only ever touch finitely many kernel sections. Pushing a section forward
# moves it, k(z, .) -> k(f(z), .), so on the span of n sections the quantity
#
# $$ \sup_a \frac{\| \sum_i a_i k(f(z_i), \cdot) \|^2}{\| \sum_i a_i k(z_i, \cdot) \|^2} $$
#
# is the top eigenvalue of a pair of Gram matrices. Growing the span can only
# raise this supremum, and it can never exceed the true norm.

import numpy as np

from kernel_koopman import make_kernel, mobius_map, norm_bound_estimate

k = make_kernel("szego")
f = mobius_map(1.0, 0.5)
print("f(0) =", f(np.array([0j]))[0])

# ## Nested dictionaries
#
# A scrambled Halton sequence mapped into the disc gives quasi-uniform points.
# Prefixes of one sequence are nested, which is what makes the estimates
# comparable.

P = k.sample(400, seed=0)
print(f"{'n':>5} {'estimate':>12} {'gap to 3':>12} {'rank':>5}")
for n in (10, 25, 50, 100, 200, 400):
    rep = norm_bound_estimate(k, f, P[:n])
    print(f"{n:5d} {rep.bound:12.8f} {3 - rep.bound:12.2e} {rep.pencil_rank:5d}")

# ## The maximizing combination
#
# The eigenvector of the pencil is an atomic measure whose embedding is
# stretched the most. Its atoms cluster on the left half of the disc, where f
# pushes points toward the boundary and section norms grow.

rep = norm_bound_estimate(k, f, P[:100])
w = np.abs(rep.eigvec)
top = np.argsort(w)[::-1][:5]
print("heaviest atoms:", np.round(P[:100][top, 0], 3))
