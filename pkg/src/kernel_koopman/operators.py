"""Perron-Frobenius and Koopman operators on kernel sections.

Elements of the span of kernel sections are stored as atomic measures
``mu = sum_i w_i delta_{x_i}``, identified with ``sum_i w_i k(x_i, .)``. The
Perron-Frobenius operator of a map ``f`` acts exactly on them by moving atoms,
``K_f k(x, .) = k(f(x), .)``, while the Koopman operator ``U_f g = g o f`` acts
on observables. The two are dual under the plain bilinear pairing
``<g, mu> = sum_i w_i g(x_i)``.

Norms use the Hermitian form ``||mu||^2 = sum_{i,j} w_i conj(w_j) k(x_i, x_j)``.
Writing ``v = conj(w)`` this is ``v^H G v``, which is how all pencils below
are assembled.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dynamics import as_map, permutation_map
from .errors import (
    CapabilityError,
    DegenerateDictionaryError,
    EvaluationError,
    KoopmanError,
    NumericalError,
    ParameterError,
    ShapeError,
)
from .kernels import Kernel, _check_matrix

__all__ = [
    "AtomicMeasure",
    "Dictionary",
    "NormBoundReport",
    "ProjectedPF",
    "Eigenpair",
    "DiscreteRepReport",
    "LinearRepReport",
    "delta",
    "embed_eval",
    "embed_eval_many",
    "pair",
    "pf_apply",
    "koopman_eval",
    "rkhs_norm",
    "section",
    "span_function",
    "norm_bound_estimate",
    "pencil_max",
    "pf_project",
    "spectrum",
    "rep_matrix_discrete",
    "rep_matrix_linear",
    "TRUNCATION",
]

TRUNCATION = 1e-12


def _as_atoms(atoms, dim=None):
    A = np.asarray(atoms)
    if A.ndim == 0:
        A = A.reshape(1, 1)
    elif A.ndim == 1:
        A = A.reshape(-1, 1) if (dim is None or dim == 1) else A.reshape(1, -1)
    elif A.ndim != 2:
        raise ShapeError(f"atoms must be at most 2-D, got shape {A.shape}")
    return A


@dataclass(frozen=True, eq=False)
class AtomicMeasure:
    """``sum_i w_i delta_{x_i}``, equivalently ``sum_i w_i k(x_i, .)``.

    ``atoms`` has shape ``(n, d)``; ``weights`` has shape ``(n,)``. The empty
    measure (``n = 0``) is the zero element.
    """

    atoms: np.ndarray
    weights: np.ndarray

    def __init__(self, atoms, weights=None):
        A = _as_atoms(atoms)
        w = np.ones(len(A)) if weights is None else np.atleast_1d(np.asarray(weights))
        if w.ndim != 1 or w.shape[0] != A.shape[0]:
            raise ShapeError(f"{A.shape[0]} atoms but {w.size} weights")
        object.__setattr__(self, "atoms", A)
        object.__setattr__(self, "weights", w)

    def __len__(self):
        return self.atoms.shape[0]

    @property
    def dim(self):
        return self.atoms.shape[1]

    def same_as(self, other: "AtomicMeasure") -> bool:
        """Atom-for-atom and weight-for-weight bitwise equality."""
        return (
            self.atoms.shape == other.atoms.shape
            and np.array_equal(self.atoms, other.atoms)
            and np.array_equal(self.weights, other.weights)
        )

    def __add__(self, other: "AtomicMeasure") -> "AtomicMeasure":
        if len(self) == 0:
            return other
        if len(other) == 0:
            return self
        return AtomicMeasure(
            np.concatenate([self.atoms, other.atoms]),
            np.concatenate([self.weights, other.weights]),
        )

    def scaled(self, c) -> "AtomicMeasure":
        return AtomicMeasure(self.atoms, c * self.weights)


def delta(x, weight=1.0) -> AtomicMeasure:
    """The one-atom measure ``weight * delta_x``."""
    return AtomicMeasure(np.atleast_1d(np.asarray(x)).reshape(1, -1), [weight])


def _kernel_values(measure, kernel, Y):
    """``sum_i w_i k(x_i, y_j)`` for every row ``y_j`` of ``Y``."""
    Yp = kernel.domain.as_points(Y)
    if len(measure) == 0:
        return np.zeros(Yp.shape[0], dtype=complex if kernel.scalar_field == "complex" else float)
    K = kernel.matrix(measure.atoms, Yp)
    return measure.weights @ K


def embed_eval(measure: AtomicMeasure, kernel: Kernel, y):
    """Evaluate the kernel mean embedding ``sum_i w_i k(x_i, y)`` at one point."""
    v = _kernel_values(measure, kernel, np.atleast_1d(np.asarray(y)).reshape(1, -1))[0]
    return complex(v) if np.iscomplexobj(v) else float(v)


def embed_eval_many(measure: AtomicMeasure, kernel: Kernel, Y) -> np.ndarray:
    """:func:`embed_eval` at every point of ``Y``."""
    return _kernel_values(measure, kernel, Y)


def _scalar(v):
    a = np.asarray(v)
    if a.size != 1:
        raise ShapeError(f"observable returned shape {a.shape}, expected a scalar")
    return a.reshape(()).item()


def pair(g, measure: AtomicMeasure):
    """Bilinear pairing ``<g, mu> = sum_i w_i g(x_i)``.

    ``g`` is called with each atom as a 1-D coordinate array.
    """
    total = 0.0
    for i, (x, w) in enumerate(zip(measure.atoms, measure.weights)):
        try:
            gx = _scalar(g(x))
        except (KoopmanError, ValueError, ArithmeticError, TypeError) as exc:
            raise EvaluationError(f"observable failed at atom {i} ({x.tolist()}): {exc}", i) from exc
        total = total + w * gx
    return total


def pf_apply(f, measure: AtomicMeasure) -> AtomicMeasure:
    """Perron-Frobenius action: every atom moves to its image, weights stay."""
    if len(measure) == 0:
        return measure
    return AtomicMeasure(as_map(f).apply_many(measure.atoms), measure.weights.copy())


def koopman_eval(f, g, x):
    """``(U_f g)(x) = g(f(x))``."""
    return _scalar(g(as_map(f)(x)))


def section(kernel: Kernel, y):
    """The observable ``x -> k(x, y)``."""
    yp = kernel.domain.as_points(np.atleast_1d(np.asarray(y)).reshape(1, -1))

    def g(x):
        return kernel.matrix(np.atleast_1d(x).reshape(1, -1), yp)[0, 0]

    return g


def span_function(kernel: Kernel, centers, coeffs):
    """The function ``x -> sum_j c_j k(z_j, x)`` of the span of sections."""
    m = AtomicMeasure(centers, coeffs)

    def g(x):
        return embed_eval(m, kernel, x)

    return g


def _hermitian_form(G, w):
    # sum_ij w_i conj(w_j) G_ij
    return np.real(w @ G @ np.conj(w))


def rkhs_norm(measure: AtomicMeasure, kernel: Kernel) -> float:
    """``sqrt(sum_{i,j} w_i conj(w_j) k(x_i, x_j))``.

    Small negative values of the form caused by roundoff (within
    ``1e-12 * trace * sum |w|^2``) are clipped to zero.
    """
    if not kernel.positive_definite:
        raise CapabilityError(f"kernel {kernel.id!r} is not positive definite; no norm")
    if len(measure) == 0:
        return 0.0
    G = kernel.matrix(measure.atoms)
    q = float(_hermitian_form(G, measure.weights))
    if q < 0:
        slack = 1e-12 * abs(np.trace(G)) * float(np.sum(np.abs(measure.weights) ** 2))
        if q < -slack:
            raise NumericalError(f"quadratic form is negative ({q:.3g}) beyond roundoff")
        q = 0.0
    return float(np.sqrt(q))


class Dictionary:
    """Sample points with cached Gram matrix and a truncated eigendecomposition.

    The Hermitian part of the Gram matrix is diagonalized; eigenvalues at or
    below ``rel_threshold * lambda_max`` are dropped. All pencils are solved on
    the retained subspace with ``G + reg I``, whose inverse square root there
    is ``W = U_r (Lambda_r + reg)^{-1/2}``.

    Parameters
    ----------
    kernel : Kernel
    points : array_like
        Pairwise distinct points, shape ``(n, d)``.
    reg : float, optional
        Tikhonov shift; defaults to ``1e-10 * trace(G) / n``.
    rel_threshold : float
        Relative eigenvalue truncation threshold.
    """

    def __init__(self, kernel: Kernel, points, reg=None, rel_threshold=TRUNCATION):
        X = kernel.domain.as_points(points)
        if len(X) == 0:
            raise DegenerateDictionaryError("dictionary has no points")
        _check_distinct(X)
        self.kernel = kernel
        self.points = X
        self.gram = kernel.matrix(X)
        Gh = 0.5 * (self.gram + self.gram.conj().T)
        lam, U = np.linalg.eigh(Gh)
        lmax = lam[-1]
        if not lmax > 0:
            raise DegenerateDictionaryError("Gram matrix has no positive eigenvalue")
        keep = lam > rel_threshold * lmax
        self.eigenvalues = lam[keep][::-1]
        self.eigenvectors = U[:, keep][:, ::-1]
        self.rank = int(keep.sum())
        n = len(X)
        if reg is None:
            reg = 1e-10 * float(np.real(np.trace(self.gram))) / n
        if reg < 0:
            raise ParameterError("reg", f"must be nonnegative, got {reg}")
        self.reg = float(reg)
        self.whiten = self.eigenvectors / np.sqrt(self.eigenvalues + self.reg)

    def __len__(self):
        return len(self.points)

    def solve_regularized(self, B):
        """``U_r (Lambda_r + reg)^{-1} U_r^H B``, the regularized pseudo-inverse of ``G``."""
        U = self.eigenvectors
        return U @ ((U.conj().T @ B) / (self.eigenvalues + self.reg)[:, None])


def _check_distinct(X):
    seen = {}
    for i, x in enumerate(X):
        key = tuple(x.tolist())
        if key in seen:
            raise ParameterError("points", f"point {i} duplicates point {seen[key]}")
        seen[key] = i


def pencil_max(A, dictionary: Dictionary):
    """Largest eigenvalue of the Hermitian pencil ``(A_h, G + reg I)`` on the retained span.

    Returns ``(value, v, eigenvalues)`` with ``v`` the maximizing vector in
    the conjugated-coefficient convention (coefficients are ``conj(v)``).
    """
    Ah = 0.5 * (A + A.conj().T)
    W = dictionary.whiten
    S = W.conj().T @ Ah @ W
    S = 0.5 * (S + S.conj().T)
    mu, Z = np.linalg.eigh(S)
    v = W @ Z[:, -1]
    return float(mu[-1]), v, mu[::-1]


@dataclass(frozen=True)
class NormBoundReport:
    """Sampled-span estimate ``M`` of ``||K_f||^2`` (or a growth rate ``omega``).

    ``eigvec`` holds the extremal coefficients ``a`` of ``sum_i a_i k(x_i, .)``.
    """

    bound: float
    eigvec: np.ndarray
    pencil_rank: int
    eigenvalues: np.ndarray
    gram: np.ndarray = field(repr=False)
    form_matrix: np.ndarray = field(repr=False)

    def forms(self, a):
        """``(sum a_i conj(a_j) A_ij, sum a_i conj(a_j) G_ij)`` for coefficients ``a``."""
        a = np.asarray(a)
        return float(_hermitian_form(self.form_matrix, a)), float(_hermitian_form(self.gram, a))

    def to_dict(self):
        return {
            "bound": self.bound,
            "pencil_rank": self.pencil_rank,
            "eigenvalues": [{"re": float(np.real(e)), "im": float(np.imag(e))} for e in self.eigenvalues],
        }


def norm_bound_estimate(kernel: Kernel, f, points, reg=None) -> NormBoundReport:
    """Largest generalized eigenvalue of ``(G_f, G + reg I)`` on the retained rank.

    ``(G_f)_ij = k(f(x_i), f(x_j))``, so the bound is the supremum of
    ``||K_f mu||^2 / ||mu||^2`` over the sampled span (up to regularization).
    """
    D = Dictionary(kernel, points, reg)
    Y = kernel.domain.as_points(as_map(f).apply_many(D.points))
    Gf = kernel.matrix(Y)
    val, v, mu = pencil_max(Gf, D)
    return NormBoundReport(val, np.conj(v), D.rank, mu, D.gram, Gf)


@dataclass(frozen=True)
class Eigenpair:
    """Eigenvalue of the projected operator with its eigen-section ``sum_j c_j k(x_j, .)``."""

    value: complex
    coeffs: np.ndarray
    kernel: Kernel = field(repr=False)
    points: np.ndarray = field(repr=False)

    def __call__(self, y):
        return embed_eval(AtomicMeasure(self.points, self.coeffs), self.kernel, y)

    def evaluate(self, Y):
        return embed_eval_many(AtomicMeasure(self.points, self.coeffs), self.kernel, Y)


class ProjectedPF:
    """Least-distance projection of ``K_f`` onto ``span{k(x_j, .)}``.

    Column ``i`` of ``coeffs`` holds the coefficients of the projection of
    ``k(y_i, .)``; the projected operator maps coefficient vectors ``a`` to
    ``coeffs @ a``.
    """

    def __init__(self, dictionary: Dictionary, images):
        k = dictionary.kernel
        self.dictionary = dictionary
        self.kernel = k
        self.points = dictionary.points
        self.images = k.domain.as_points(images)
        if self.images.shape != self.points.shape:
            raise ShapeError(f"{len(self.points)} sources but images of shape {self.images.shape}")
        # B[j, i] = k(y_i, x_j) = <k(y_i, .), k(x_j, .)>
        self.rhs = k.matrix(self.images, self.points).T
        # normal equations G^T c = b; for Hermitian G, G^T = conj(G)
        self.coeffs = np.conj(dictionary.solve_regularized(np.conj(self.rhs)))
        U = dictionary.eigenvectors
        self.reduced = (U.T @ self.rhs @ np.conj(U)) / (dictionary.eigenvalues + dictionary.reg)[:, None]
        if k.scalar_field == "real":
            self.coeffs = np.real(self.coeffs)
            self.reduced = np.real(self.reduced)

    @property
    def rank(self):
        return self.dictionary.rank

    def orthogonality_defect(self) -> np.ndarray:
        """Per column ``max_m |<r_i, k(x_m, .)>| / max_m |b_m|`` for the residual ``r_i``."""
        G = self.dictionary.gram
        R = self.rhs - G.T @ self.coeffs
        scale = np.max(np.abs(self.rhs), axis=0)
        scale[scale == 0] = 1.0
        return np.max(np.abs(R), axis=0) / scale

    def residual_norms(self, relative=True) -> np.ndarray:
        """RKHS norm of ``k(y_i, .) - sum_j c_ji k(x_j, .)`` for every column ``i``."""
        k = self.kernel
        out = np.empty(len(self.images))
        G = self.dictionary.gram
        for i, y in enumerate(self.images):
            kyy = np.real(k.matrix(y[None, :]))[0, 0]
            c = self.coeffs[:, i]
            b = self.rhs[:, i]
            q = kyy - 2.0 * np.real(np.conj(c) @ b) + np.real(c @ G @ np.conj(c))
            r = np.sqrt(max(q, 0.0))
            out[i] = r / np.sqrt(kyy) if relative and kyy > 0 else r
        return out

    def to_dict(self):
        return {
            "n": len(self.points),
            "rank": self.rank,
            "reg": self.dictionary.reg,
            "coeffs": self.coeffs,
            "orthogonality_defect": float(np.max(self.orthogonality_defect())),
        }


def pf_project(kernel: Kernel, X, Y=None, reg=None, f=None) -> ProjectedPF:
    """Project ``K_f`` onto the span of sections at ``X``; ``Y`` are the images ``f(x_i)``.

    Either pass ``Y`` directly (snapshot pairs) or a map ``f``.
    """
    D = Dictionary(kernel, X, reg)
    if Y is None:
        if f is None:
            raise ParameterError("Y", "give the images Y or a map f")
        Y = as_map(f).apply_many(D.points)
    return ProjectedPF(D, Y)


def _sort_key(lam):
    mag = float(np.abs(lam))
    # quantize the modulus so that roundoff does not break phase ordering
    q = round(mag, 9) if mag else 0.0
    return (-q, float(np.angle(lam)))


def spectrum(op: ProjectedPF):
    """Eigenpairs of the projected operator on the retained rank.

    Sorted by modulus descending, ties by ascending phase angle in (-pi, pi].
    """
    lam, Z = np.linalg.eig(op.reduced)
    V = np.conj(op.dictionary.eigenvectors) @ Z
    pairs = []
    for j in range(len(lam)):
        value = complex(lam[j])
        vec = V[:, j]
        if op.kernel.scalar_field == "real" and value.imag == 0 and np.allclose(vec.imag, 0):
            vec = vec.real
        pairs.append(Eigenpair(value, vec, op.kernel, op.points))
    pairs.sort(key=lambda p: _sort_key(p.value))
    return pairs


# -- representation matrices -------------------------------------------------


def _permutation_matrix(sigma):
    """``P e_i = e_{sigma(i)}`` for a 1-based permutation ``sigma``."""
    try:
        pm = permutation_map(sigma)
    except ParameterError as exc:
        raise ShapeError(str(exc)) from None
    s = pm.params["sigma"]
    n = s.size
    P = np.zeros((n, n))
    P[s - 1, np.arange(n)] = 1.0
    return P


@dataclass(frozen=True)
class DiscreteRepReport:
    """Representation of ``K_sigma`` on functions of {1..n} in standard coordinates."""

    matrix: np.ndarray
    closed_form: np.ndarray
    agrees: bool

    def to_dict(self):
        return {"pf_rep": self.matrix, "closed_form_Minv_P_M": self.closed_form, "agrees": self.agrees}


def rep_matrix_discrete(M, sigma, tol=1e-10) -> DiscreteRepReport:
    """Matrix of ``K_sigma k(i, .) = k(sigma(i), .)`` for the kernel ``k(i, j) = (M^{-1})_ij``.

    Section ``k(i, .)`` has value vector ``M^{-T} e_i``, so the sections form
    the columns of ``S = M^{-T}`` and ``K_sigma S = S P``. Hence the matrix is
    ``M^{-T} P M^T`` with ``P e_i = e_{sigma(i)}``. The report also carries
    ``M^{-1} P M`` for comparison; the two coincide for symmetric ``M``.
    """
    M = _check_matrix(M)
    P = _permutation_matrix(sigma)
    if P.shape != M.shape:
        raise ShapeError(f"permutation of {P.shape[0]} elements for a {M.shape[0]}x{M.shape[0]} M")
    MT = M.T
    R = np.linalg.solve(MT, P @ MT)
    closed = np.linalg.solve(M, P @ M)
    agrees = bool(np.max(np.abs(R - closed)) <= tol * max(1.0, np.max(np.abs(R))))
    return DiscreteRepReport(R, closed, agrees)


@dataclass(frozen=True)
class LinearRepReport:
    """Koopman and Perron-Frobenius matrices of ``x -> A x`` on linear forms."""

    koopman_rep: np.ndarray
    pf_rep: np.ndarray
    closed_form: np.ndarray
    agrees: bool
    duality_defect: float

    def to_dict(self):
        return {
            "koopman_rep": self.koopman_rep,
            "pf_rep": self.pf_rep,
            "closed_form_M_A_Minv": self.closed_form,
            "agrees": self.agrees,
            "duality_defect": self.duality_defect,
        }


def rep_matrix_linear(M, A, tol=1e-10) -> LinearRepReport:
    """Representations for linear forms ``g_a(x) = a^T x`` with pairing ``a^T M b``.

    Coordinates are the vectors ``a``. ``k(x, .) = g_{M^{-1} x}`` and
    ``K_A k(x, .) = g_{M^{-1} A x}``, so the Perron-Frobenius matrix is
    ``M^{-1} A M``; ``U_A g_a = g_{A^T a}`` gives the Koopman matrix ``A^T``.
    Duality ``<U g_a, g_b> = <g_a, K g_b>`` reads ``A M = M R``; its relative
    residual is reported as ``duality_defect``.
    """
    M = _check_matrix(M)
    A = np.asarray(A)
    if A.shape != M.shape:
        raise ShapeError(f"A has shape {A.shape}, M has shape {M.shape}")
    R = np.linalg.solve(M, A @ M)
    closed = M @ A @ np.linalg.inv(M)
    scale = max(1.0, np.max(np.abs(A @ M)))
    duality = float(np.max(np.abs(A @ M - M @ R)) / scale)
    agrees = bool(np.max(np.abs(R - closed)) <= tol * max(1.0, np.max(np.abs(R))))
    return LinearRepReport(A.T.copy(), R, closed, agrees, duality)
