"""Symmetry commutation and factor-system intertwining, measured at probe points.

Both sides of each operator identity act atomwise on an atomic measure, so the
defect is exactly zero (up to roundoff) whenever the underlying map relation
holds on the atoms. Defects are measured by evaluating the two kernel mean
embeddings at probe points, which works for every catalog kernel.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dynamics import as_map
from .errors import RelationShapeError
from .kernels import Kernel
from .operators import AtomicMeasure, embed_eval_many, pf_apply

__all__ = [
    "CommutationReport",
    "default_probes",
    "symmetry_commutator",
    "koopman_symmetry_check",
    "factor_intertwiner",
    "conjugacy_commutator",
]


@dataclass(frozen=True)
class CommutationReport:
    max_defect: float
    probes_used: int
    passed: bool
    tol: float

    def to_dict(self):
        return {"max_defect": self.max_defect, "probes_used": self.probes_used, "pass": self.passed}


def default_probes(kernel: Kernel, *point_sets, n_random=20, seed=0) -> np.ndarray:
    """Union of the given point sets and ``n_random`` quasi-random domain points."""
    sets = [kernel.domain.as_points(P) for P in point_sets if len(np.atleast_1d(P))]
    sets.append(kernel.domain.as_points(kernel.sample(n_random, seed)))
    dtype = np.result_type(*sets)
    return np.unique(np.concatenate([s.astype(dtype) for s in sets]), axis=0)


def _defect_report(kernel, left, right, probes, tol):
    a = embed_eval_many(left, kernel, probes)
    b = embed_eval_many(right, kernel, probes)
    d = float(np.max(np.abs(a - b))) if len(a) else 0.0
    return CommutationReport(d, int(len(a)), d <= tol, tol)


def symmetry_commutator(kernel: Kernel, f, psi, measure: AtomicMeasure, probes=None,
                        tol=1e-12, seed=0) -> CommutationReport:
    """``max_y |(K_psi K_f mu)(y) - (K_f K_psi mu)(y)|``."""
    left = pf_apply(psi, pf_apply(f, measure))
    right = pf_apply(f, pf_apply(psi, measure))
    if probes is None:
        probes = default_probes(kernel, measure.atoms, left.atoms, right.atoms, seed=seed)
    return _defect_report(kernel, left, right, kernel.domain.as_points(probes), tol)


def conjugacy_commutator(kernel: Kernel, f, g, phi, measure: AtomicMeasure, probes=None,
                         tol=1e-12, seed=0) -> CommutationReport:
    """``max_y |(K_f K_phi mu)(y) - (K_phi K_g mu)(y)|`` for ``phi o g = f o phi``."""
    left = pf_apply(f, pf_apply(phi, measure))
    right = pf_apply(phi, pf_apply(g, measure))
    if probes is None:
        probes = default_probes(kernel, left.atoms, right.atoms, seed=seed)
    return _defect_report(kernel, left, right, kernel.domain.as_points(probes), tol)


def koopman_symmetry_check(f, psi, g, probes, tol=1e-12) -> CommutationReport:
    """``max_x |g(psi(f(x))) - g(f(psi(x)))|``."""
    f, psi = as_map(f), as_map(psi)
    P = np.asarray(probes)
    P = P.reshape(-1, 1) if P.ndim <= 1 else P
    d = 0.0
    for x in P:
        d = max(d, float(np.abs(np.asarray(g(psi(f(x)))) - np.asarray(g(f(psi(x))))).max()))
    return CommutationReport(d, len(P), d <= tol, tol)


def factor_intertwiner(kX: Kernel, kY: Kernel, f, Pi, F, measure: AtomicMeasure, probes=None,
                       tol=1e-12, seed=0) -> CommutationReport:
    """``max_y |(K_Pi K_f mu)(y) - (K_F K_Pi mu)(y)|`` with ``K_Pi k_X(x, .) = k_Y(Pi(x), .)``."""
    kX.domain.as_points(measure.atoms)
    Pi = as_map(Pi)
    left = pf_apply(Pi, pf_apply(f, measure))
    right = pf_apply(F, pf_apply(Pi, measure))
    for side, m in (("Pi o f", left), ("F o Pi", right)):
        if len(m) and m.dim != kY.dim:
            raise RelationShapeError(
                f"{side} produces points of dimension {m.dim}, kernel on Y has dimension {kY.dim}"
            )
    if probes is None:
        probes = default_probes(kY, left.atoms, right.atoms, seed=seed)
    return _defect_report(kY, left, right, kY.domain.as_points(probes), tol)
