#!/usr/bin/env python3

# # Spectrum of a projected transfer operator
#
# The Perron-Frobenius operator K_f moves kernel sections. Restricting it to
# the span of a few sections and projecting back gives an n x n matrix. When
# that span is invariant the projection loses nothing, and the matrix carries
# exact eigenvalues of the operator.
#
# ## A polynomial kernel and a contraction
#
# With k(x, y) = (1 + xy)³ every section is a cubic polynomial, so six
# distinct points already span all cubics. The scaling f(x) = x / 2 acts on
# the monomial x^j by the factor 2^{-j}, so we expect 1, 1/2, 1/4 and 1/8.

import numpy as np

from kernel_koopman import make_kernel, permutation_map, pf_project, scaling_map, spectrum

k = make_kernel("polynomial", degree=3)
X = np.array([-1.0, -0.6, -0.2, 0.3, 0.7, 1.0])
op = pf_project(k, X, f=scaling_map(0.5))

print("retained rank:", op.rank)
for p in spectrum(op):
    print(f"  eigenvalue {p.value.real:+.12f}")
print("max relative residual:", f"{np.max(op.residual_norms()):.1e}")

# ## Eigen-sections
#
# Each eigenvector is a coefficient vector over the dictionary, so it defines
# the function y -> sum_j c_j k(x_j, y). For a diagonal action on monomials
# these functions must be (multiples of) 1, y, y² and y³. We check this by
# dividing by the expected monomial on a grid.

Y = np.linspace(0.2, 1.5, 5)
for j, p in enumerate(spectrum(op)):
    ratio = p.evaluate(Y).real / Y**j
    print(f"  section {j} / y^{j}: spread {np.ptp(ratio) / np.abs(ratio).max():.1e}")

# ## A permutation on a finite set
#
# On {1, 2, 3} with the identity Gram matrix, a 3-cycle permutes the sections.
# Its eigenvalues are the cube roots of unity, listed by phase.

kd = make_kernel("discrete", M=np.eye(3))
op3 = pf_project(kd, [1, 2, 3], f=permutation_map([2, 3, 1]), reg=0.0)
for p in spectrum(op3):
    print(f"  {p.value.real:+.6f} {p.value.imag:+.6f}i   phase {np.angle(p.value):+.4f}")
