"""Catalog of reproducing kernels.

Every kernel is an immutable object exposing scalar evaluation, a vectorized
Gram assembly and the gradient in the first argument. Points are handled as
``(n, d)`` arrays internally; a single point may be passed as a scalar, a
length-``d`` sequence, or (for the finite-set domain) an integer index.

Complex kernels follow the Hermitian convention ``k(x, y) = conj(k(y, x))``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.stats import qmc

from .errors import (
    CapabilityError,
    DomainError,
    InconsistentPairError,
    ParameterError,
)

__all__ = [
    "Domain",
    "Kernel",
    "GaussianKernel",
    "PolynomialKernel",
    "SincKernel",
    "SzegoKernel",
    "SobolevKernel",
    "AbsKernel",
    "ExpProductKernel",
    "PowerBaseKernel",
    "DiscreteKernel",
    "LinearFormKernel",
    "PullbackKernel",
    "InvarianceReport",
    "CATALOG",
    "make_kernel",
    "kernel_from_config",
    "eval_kernel",
    "grad_x_kernel",
    "gram",
    "make_pullback",
    "check_invariance",
    "fd_step",
]

COND_THRESHOLD = 1e12
_EPS = np.finfo(float).eps


def fd_step(xl):
    """Central-difference step ``cbrt(eps) * max(1, |x_l|)``."""
    return np.cbrt(_EPS) * max(1.0, abs(xl))


@dataclass(frozen=True)
class Domain:
    """Where a kernel may be evaluated.

    ``constraint`` is one of ``None`` (all of R^d or C^d), ``"open_interval"``
    (0, 1), ``"closed_interval"`` [0, 1], ``"disc"`` (open unit disc) or
    ``"finite"`` ({1, ..., size}).
    """

    dim: int = 1
    constraint: str | None = None
    size: int | None = None
    field: str = "real"

    def as_points(self, X) -> np.ndarray:
        """Coerce ``X`` to an ``(n, dim)`` array and validate membership."""
        arr = np.asarray(X)
        if self.constraint == "finite":
            if arr.dtype.kind not in "iu":
                if arr.dtype.kind == "f" and np.all(np.isfinite(arr)) and np.all(arr == np.round(arr)):
                    arr = arr.astype(np.int64)
                else:
                    raise DomainError("finite-set points must be integer indices")
            arr = arr.reshape(-1, 1)
        elif arr.ndim == 0:
            arr = arr.reshape(1, 1)
        elif arr.ndim == 1:
            arr = arr.reshape(-1, 1) if self.dim == 1 else arr.reshape(1, -1)
        elif arr.ndim != 2:
            raise DomainError(f"points must be at most 2-D, got shape {arr.shape}")
        if arr.shape[1] != self.dim:
            raise DomainError(
                f"point dimension {arr.shape[1]} does not match domain dimension {self.dim}"
            )
        self._check(arr)
        return arr

    def _check(self, arr):
        if arr.size == 0:
            return
        if arr.dtype.kind == "c" and self.field == "real":
            if np.any(arr.imag != 0):
                raise DomainError("complex coordinates given to a real-domain kernel")
        if arr.dtype.kind in "fc" and not np.all(np.isfinite(arr)):
            bad = int(np.argwhere(~np.isfinite(arr).all(axis=1))[0, 0])
            raise DomainError(f"non-finite coordinates at point index {bad}")
        c = self.constraint
        if c is None:
            return
        if c == "finite":
            bad = np.flatnonzero((arr[:, 0] < 1) | (arr[:, 0] > self.size))
            if bad.size:
                raise DomainError(
                    f"index {arr[bad[0], 0]} at point {bad[0]} outside finite set 1..{self.size}"
                )
            return
        if c == "disc":
            bad = np.flatnonzero(np.abs(arr[:, 0]) >= 1.0)
            if bad.size:
                raise DomainError(
                    f"point {bad[0]} ({arr[bad[0], 0]}) outside the open unit disc |z| < 1"
                )
            return
        vals = arr.real if arr.dtype.kind == "c" else arr
        if c == "open_interval":
            bad = np.flatnonzero(np.any((vals <= 0.0) | (vals >= 1.0), axis=1))
            if bad.size:
                raise DomainError(
                    f"point {bad[0]} ({vals[bad[0]].tolist()}) outside the open interval (0, 1)"
                )
        elif c == "closed_interval":
            bad = np.flatnonzero(np.any((vals < 0.0) | (vals > 1.0), axis=1))
            if bad.size:
                raise DomainError(
                    f"point {bad[0]} ({vals[bad[0]].tolist()}) outside the interval [0, 1]"
                )

    def sample(self, n, seed=0) -> np.ndarray:
        """Quasi-random interior points (scrambled Halton), shape ``(n, dim)``."""
        if self.constraint == "finite":
            rng = np.random.default_rng(seed)
            return rng.integers(1, self.size + 1, size=(n, 1))
        if self.constraint == "disc":
            u = qmc.Halton(d=2, scramble=True, seed=seed).random(n)
            z = 0.9 * np.sqrt(u[:, 0]) * np.exp(2j * np.pi * u[:, 1])
            return z.reshape(-1, 1)
        u = qmc.Halton(d=self.dim, scramble=True, seed=seed).random(n)
        if self.constraint in ("open_interval", "closed_interval"):
            return 0.02 + 0.96 * u
        return 4.0 * u - 2.0


class Kernel:
    """Base class for catalog kernels.

    Subclasses implement ``_k(X, Y)`` returning the ``(n, m)`` matrix of values
    and, when an analytic gradient exists, ``_dk(X, Y)`` returning the
    ``(n, m, d)`` array of first-argument partial derivatives.
    """

    id = "kernel"
    positive_definite = False
    has_analytic_gradient = False
    differentiable = True

    def __init__(self, domain: Domain, params: dict | None = None):
        self.domain = domain
        self.params = dict(params or {})

    @property
    def scalar_field(self):
        return self.domain.field

    @property
    def dim(self):
        return self.domain.dim

    def __repr__(self):
        args = ", ".join(f"{k}={v!r}" for k, v in self.params.items() if k != "base")
        return f"{type(self).__name__}({args})"

    def _scalar(self, v):
        return complex(v) if self.scalar_field == "complex" else float(np.real(v))

    def __call__(self, x, y):
        X = self.domain.as_points(x)
        Y = self.domain.as_points(y)
        if X.shape[0] != 1 or Y.shape[0] != 1:
            raise DomainError("kernel evaluation expects single points; use matrix() for sets")
        return self._scalar(self._k(X, Y)[0, 0])

    def matrix(self, X, Y=None) -> np.ndarray:
        """Matrix ``K[i, j] = k(X[i], Y[j])`` (``Y = X`` when omitted)."""
        Xp = self.domain.as_points(X)
        Yp = Xp if Y is None else self.domain.as_points(Y)
        K = self._k(Xp, Yp)
        if self.scalar_field == "real":
            K = np.real(K).astype(float)
        return K

    def _check_differentiable(self, X, Y):
        if not self.differentiable:
            raise CapabilityError(f"kernel {self.id!r} is not differentiable in its first argument")

    def grad_matrix(self, X, Y=None) -> np.ndarray:
        """``D[i, j, l] = d/dx_l k(X[i], Y[j])``, analytic or by central differences."""
        Xp = self.domain.as_points(X)
        Yp = Xp if Y is None else self.domain.as_points(Y)
        self._check_differentiable(Xp, Yp)
        if self.has_analytic_gradient:
            D = self._dk(Xp, Yp)
        else:
            D = self._fd_grad(Xp, Yp)
        if self.scalar_field == "real":
            D = np.real(D).astype(float)
        return D

    def _fd_grad(self, X, Y):
        n, d = X.shape
        dtype = complex if self.scalar_field == "complex" else float
        D = np.empty((n, Y.shape[0], d), dtype=dtype)
        for l in range(d):
            for i in range(n):
                h = fd_step(X[i, l])
                xp = X[i : i + 1].astype(dtype, copy=True)
                xm = xp.copy()
                xp[0, l] += h
                xm[0, l] -= h
                self.domain._check(xp)
                self.domain._check(xm)
                D[i, :, l] = (self._k(xp, Y)[0] - self._k(xm, Y)[0]) / (2 * h)
        return D

    def grad_x(self, x, y, l=0):
        """Partial derivative of ``k(x, y)`` in coordinate ``l`` of ``x``."""
        if not 0 <= l < self.dim:
            raise ParameterError("l", f"coordinate index {l} out of range for dimension {self.dim}")
        D = self.grad_matrix(self.domain.as_points(x), self.domain.as_points(y))
        return self._scalar(D[0, 0, l])

    def _dk(self, X, Y):
        raise NotImplementedError

    def sample(self, n, seed=0):
        return self.domain.sample(n, seed)


class GaussianKernel(Kernel):
    r"""Gauss kernel

    .. math:: k(x, y) = \frac{1}{\sigma\sqrt{2\pi}} e^{-\|x-y\|^2 / (2\sigma^2)}
    """

    id = "gaussian"
    positive_definite = True
    has_analytic_gradient = True

    def __init__(self, sigma=1.0, dim=1):
        sigma = float(sigma)
        if not sigma > 0:
            raise ParameterError("sigma", f"must be positive, got {sigma}")
        dim = _check_dim(dim)
        super().__init__(Domain(dim=dim), {"sigma": sigma, "dim": dim})
        self.sigma = sigma
        self._scale = 1.0 / (sigma * np.sqrt(2.0 * np.pi))

    def _k(self, X, Y):
        diff = X[:, None, :] - Y[None, :, :]
        return self._scale * np.exp(-np.sum(diff * diff, axis=-1) / (2.0 * self.sigma**2))

    def _dk(self, X, Y):
        diff = X[:, None, :] - Y[None, :, :]
        return -diff / self.sigma**2 * self._k(X, Y)[..., None]


class PolynomialKernel(Kernel):
    """``k(x, y) = (1 + x^T y)^d`` on R^n."""

    id = "polynomial"
    positive_definite = True
    has_analytic_gradient = True

    def __init__(self, degree=2, dim=1):
        if int(degree) != degree or degree < 1:
            raise ParameterError("degree", f"must be an integer >= 1, got {degree}")
        degree = int(degree)
        dim = _check_dim(dim)
        super().__init__(Domain(dim=dim), {"degree": degree, "dim": dim})
        self.degree = degree

    def _k(self, X, Y):
        return (1.0 + X @ Y.T) ** self.degree

    def _dk(self, X, Y):
        base = (1.0 + X @ Y.T) ** (self.degree - 1)
        return self.degree * base[..., None] * Y[None, :, :]


def _dsinc(z):
    # derivative of np.sinc; series near the removable singularity
    z = np.asarray(z, dtype=float)
    out = np.empty_like(z)
    small = np.abs(z) < 1e-3
    zs = z[small]
    out[small] = -(np.pi**2) * zs / 3.0 + np.pi**4 * zs**3 / 30.0
    zl = z[~small]
    out[~small] = (np.cos(np.pi * zl) - np.sinc(zl)) / zl
    return out


class SincKernel(Kernel):
    """Band-limited kernel ``sin(2 pi A (x - y)) / (pi (x - y))`` with ``k(x, x) = 2A``."""

    id = "sinc"
    positive_definite = True
    has_analytic_gradient = True

    def __init__(self, bandwidth=1.0):
        A = float(bandwidth)
        if not A > 0:
            raise ParameterError("bandwidth", f"must be positive, got {A}")
        super().__init__(Domain(dim=1), {"bandwidth": A})
        self.bandwidth = A

    def _k(self, X, Y):
        u = X[:, None, 0] - Y[None, :, 0]
        return 2.0 * self.bandwidth * np.sinc(2.0 * self.bandwidth * u)

    def _dk(self, X, Y):
        u = X[:, None, 0] - Y[None, :, 0]
        A = self.bandwidth
        return (4.0 * A * A * _dsinc(2.0 * A * u))[..., None]


class SzegoKernel(Kernel):
    """Szegő kernel ``1 / (1 - z conj(w))`` of the Hardy space on the unit disc.

    The gradient is the complex derivative in ``z`` (the kernel is holomorphic
    in its first argument).
    """

    id = "szego"
    positive_definite = True
    has_analytic_gradient = True

    def __init__(self):
        super().__init__(Domain(dim=1, constraint="disc", field="complex"))

    def _k(self, X, Y):
        return 1.0 / (1.0 - X[:, None, 0] * np.conj(Y[None, :, 0]))

    def _dk(self, X, Y):
        w = np.conj(Y[None, :, 0])
        return (w / (1.0 - X[:, None, 0] * w) ** 2)[..., None]


class SobolevKernel(Kernel):
    """Kernel of W^{1,2}(0, 1): ``(1 - y) x`` for ``x <= y``, ``(1 - x) y`` otherwise.

    Differentiable off the diagonal only.
    """

    id = "sobolev11"
    positive_definite = True
    has_analytic_gradient = True

    def __init__(self):
        super().__init__(Domain(dim=1, constraint="open_interval"))

    def _k(self, X, Y):
        x = X[:, None, 0]
        y = Y[None, :, 0]
        return np.where(x <= y, (1.0 - y) * x, (1.0 - x) * y)

    def _check_differentiable(self, X, Y):
        if np.any(X[:, None, 0] == Y[None, :, 0]):
            raise CapabilityError("sobolev11 kernel has a kink on the diagonal x == y")

    def _dk(self, X, Y):
        x = X[:, None, 0]
        y = Y[None, :, 0]
        return np.where(x < y, 1.0 - y, -y)[..., None]


class AbsKernel(Kernel):
    """``k(x, y) = 1 - |x - y|`` on [0, 1]; registered as not differentiable."""

    id = "abs1"
    positive_definite = True
    differentiable = False

    def __init__(self):
        super().__init__(Domain(dim=1, constraint="closed_interval"))

    def _k(self, X, Y):
        return 1.0 - np.abs(X[:, None, 0] - Y[None, :, 0])


class ExpProductKernel(Kernel):
    """``k(x, y) = exp(x y)`` on [0, 1]."""

    id = "expxy"
    positive_definite = True
    has_analytic_gradient = True

    def __init__(self):
        super().__init__(Domain(dim=1, constraint="closed_interval"))

    def _k(self, X, Y):
        return np.exp(X[:, None, 0] * Y[None, :, 0])

    def _dk(self, X, Y):
        return (Y[None, :, 0] * self._k(X, Y))[..., None]


class PowerBaseKernel(Kernel):
    """``k(x, y) = (1 + y)^x`` on [0, 1]. Not symmetric."""

    id = "powbase"
    has_analytic_gradient = True

    def __init__(self):
        super().__init__(Domain(dim=1, constraint="closed_interval"))

    def _k(self, X, Y):
        return (1.0 + Y[None, :, 0]) ** X[:, None, 0]

    def _dk(self, X, Y):
        return (np.log1p(Y[None, :, 0]) * self._k(X, Y))[..., None]


def _check_matrix(M, name="M"):
    M = np.asarray(M)
    if M.dtype.kind not in "fc":
        M = M.astype(float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ParameterError(name, f"must be a square matrix, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise ParameterError(name, "contains non-finite entries")
    cond = np.linalg.cond(M)
    if not np.isfinite(cond) or cond > COND_THRESHOLD:
        raise ParameterError(name, f"condition number {cond:.3g} exceeds {COND_THRESHOLD:.0e}")
    return M


def _is_hermitian_pd(M):
    if not np.allclose(M, M.conj().T, rtol=0, atol=1e-12 * np.abs(M).max()):
        return False
    return bool(np.linalg.eigvalsh((M + M.conj().T) / 2).min() > 0)


class DiscreteKernel(Kernel):
    """Kernel on the finite set {1, ..., n} induced by the bilinear form ``h^T M g``.

    The section ``k(., i)`` has value vector ``M^{-1} e_i``, i.e.
    ``k(i, j) = (M^{-1})_{ij}``.
    """

    id = "discrete"
    differentiable = False

    def __init__(self, M):
        M = _check_matrix(M)
        field = "complex" if M.dtype.kind == "c" else "real"
        n = M.shape[0]
        super().__init__(Domain(dim=1, constraint="finite", size=n, field=field), {"M": M})
        self.M = M
        self.Minv = np.linalg.inv(M)
        self.positive_definite = _is_hermitian_pd(M)

    def _k(self, X, Y):
        return self.Minv[np.ix_(X[:, 0] - 1, Y[:, 0] - 1)]


class LinearFormKernel(Kernel):
    """Kernel of R^n viewed as linear forms ``g_a(x) = a^T x`` with pairing ``a^T M b``.

    ``k(x, .) = g_{M^{-1} x}``, so ``k(x, y) = (M^{-1} x)^T y``. With ``M = I``
    this is the plain linear kernel ``x^T y``.
    """

    id = "linearform"
    has_analytic_gradient = True

    def __init__(self, M=None, dim=None):
        if M is None:
            M = np.eye(_check_dim(dim if dim is not None else 1))
        M = _check_matrix(M)
        field = "complex" if M.dtype.kind == "c" else "real"
        super().__init__(Domain(dim=M.shape[0], field=field), {"M": M})
        self.M = M
        self.Minv = np.linalg.inv(M)
        self.positive_definite = _is_hermitian_pd(M)

    def _k(self, X, Y):
        return (X @ self.Minv.T) @ Y.T

    def _dk(self, X, Y):
        # d/dx_l (M^{-1} x)^T y = (M^{-T} y)_l
        G = Y @ self.Minv
        return np.broadcast_to(G[None, :, :], (X.shape[0],) + G.shape).copy()


class PullbackKernel(Kernel):
    """``k_phi(y1, y2) = k(phi(y1), phi(y2))`` for a bijection ``phi``.

    The domain descriptor is inherited from the base kernel, so ``phi`` is
    expected to map that domain onto itself. Gradients use central differences.
    """

    id = "pullback"

    def __init__(self, base: Kernel, phi: Callable, phi_inv: Callable):
        super().__init__(base.domain, {"base": base})
        self.base = base
        self.phi = phi
        self.phi_inv = phi_inv
        self.positive_definite = base.positive_definite
        self.differentiable = base.differentiable

    def _map(self, X):
        out = np.array([np.atleast_1d(self.phi(x)) for x in X])
        if out.size == 0:
            return X.copy()
        out = out.reshape(X.shape[0], -1)
        try:
            self.base.domain._check(out)
        except DomainError as exc:
            raise DomainError(f"phi maps outside the base domain: {exc}") from None
        return out

    def _k(self, X, Y):
        return self.base._k(self._map(X), self._map(Y))


CATALOG = {
    "gaussian": GaussianKernel,
    "polynomial": PolynomialKernel,
    "sinc": SincKernel,
    "szego": SzegoKernel,
    "sobolev11": SobolevKernel,
    "abs1": AbsKernel,
    "expxy": ExpProductKernel,
    "powbase": PowerBaseKernel,
    "discrete": DiscreteKernel,
    "linearform": LinearFormKernel,
    "pullback": PullbackKernel,
}

_PARAM_ALIASES = {"d": "degree", "A": "bandwidth", "n": "dim"}


def _check_dim(dim):
    if int(dim) != dim or dim < 1:
        raise ParameterError("dim", f"must be a positive integer, got {dim}")
    return int(dim)


def make_kernel(kernel_id: str, **params) -> Kernel:
    """Build a catalog kernel by id.

    Examples
    --------
    >>> make_kernel("sinc", bandwidth=1.0)(0.7, 0.7)
    2.0
    """
    try:
        cls = CATALOG[kernel_id]
    except KeyError:
        raise ParameterError("id", f"unknown kernel {kernel_id!r}; known: {sorted(CATALOG)}") from None
    params = {_PARAM_ALIASES.get(k, k): v for k, v in params.items()}
    if kernel_id == "pullback":
        return make_pullback(params["base"], params["phi"], params["phi_inv"])
    try:
        return cls(**params)
    except TypeError as exc:
        raise ParameterError("params", str(exc)) from None


def kernel_from_config(cfg: dict) -> Kernel:
    """Build a kernel from ``{"id": ..., "params": {...}}`` (or ``{"kernel": {...}}``)."""
    if "kernel" in cfg and isinstance(cfg["kernel"], dict):
        cfg = cfg["kernel"]
    if "id" not in cfg:
        raise ParameterError("id", "kernel spec needs an 'id'")
    params = dict(cfg.get("params", {}))
    kid = cfg["id"]
    if kid in ("discrete", "linearform") and "M" in params:
        params["M"] = _matrix_from_json(params["M"])
    if kid == "pullback":
        from .dynamics import map_from_config

        base = kernel_from_config(params["base"])
        phi = map_from_config(params["map"])
        phi_inv = map_from_config(params["inverse"])
        return make_pullback(base, phi, phi_inv)
    return make_kernel(kid, **params)


def _matrix_from_json(M):
    from .io import parse_number

    arr = np.array([[parse_number(v) for v in row] for row in M])
    if arr.dtype.kind == "c" and np.all(arr.imag == 0):
        arr = arr.real
    return arr


def eval_kernel(kernel: Kernel, x, y):
    """``k(x, y)``; out-of-domain points raise :class:`DomainError`."""
    return kernel(x, y)


def grad_x_kernel(kernel: Kernel, x, y, l=0):
    """``d/dx_l k(x, y)``, analytic when available, else central differences."""
    return kernel.grad_x(x, y, l)


def gram(kernel: Kernel, points) -> np.ndarray:
    """Gram matrix ``G[i, j] = k(x_i, x_j)``."""
    return kernel.matrix(points)


def make_pullback(kernel: Kernel, phi, phi_inv, probes=None, tol=1e-10, seed=0) -> PullbackKernel:
    """Pull ``kernel`` back along the bijection ``phi``.

    ``phi_inv`` is checked against ``phi`` in both orders on ``probes``
    (default: 20 quasi-random domain points).
    """
    if probes is None:
        probes = kernel.sample(20, seed)
    P = kernel.domain.as_points(probes)
    for pt in P:
        for a, b, label in ((phi, phi_inv, "phi_inv(phi(y))"), (phi_inv, phi, "phi(phi_inv(y))")):
            back = np.atleast_1d(b(a(pt)))
            err = np.max(np.abs(back - pt))
            if not err <= tol * max(1.0, np.max(np.abs(pt))):
                raise InconsistentPairError(f"{label} differs from y={pt!r} by {err:.3g}")
    return PullbackKernel(kernel, phi, phi_inv)


@dataclass(frozen=True)
class InvarianceReport:
    max_defect: float
    passed: bool
    tol: float

    def to_dict(self):
        return {"max_defect": self.max_defect, "pass": self.passed, "tol": self.tol}


def check_invariance(kernel: Kernel, f, samples, tol=1e-12) -> InvarianceReport:
    """Largest ``|k(f(x), f(y)) - k(x, y)|`` over all sample pairs."""
    X = kernel.domain.as_points(samples)
    images = []
    for i, x in enumerate(X):
        fx = np.atleast_1d(f(x))
        try:
            images.append(kernel.domain.as_points(fx.reshape(1, -1))[0])
        except DomainError as exc:
            raise DomainError(f"f maps sample {i} ({x.tolist()}) outside the domain: {exc}") from None
    FX = np.array(images).reshape(X.shape[0], -1)
    defect = float(np.max(np.abs(kernel.matrix(FX) - kernel.matrix(X)))) if len(X) else 0.0
    return InvarianceReport(defect, defect <= tol, tol)
