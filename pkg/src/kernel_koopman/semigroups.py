"""Continuous-time operators: generators, path integrals, growth bounds, transport.

For a flow ``phi_t`` the Perron-Frobenius semigroup moves atoms,
``K_t k(x, .) = k(phi_t(x), .)``. Its generator acts on sections as
``C k(x, .) = sum_l f_l(x) d/dx_l k(x, .)``. Time averages of sections along a
trajectory are realized as quadrature measures, and the dissipativity
quadratic form gives a growth-rate certificate over a sampled span.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .dynamics import Flow, VectorField, compile_expression, flow_map
from .errors import CapabilityError, DivergenceError, ParameterError
from .kernels import Kernel
from .operators import AtomicMeasure, Dictionary, NormBoundReport, embed_eval_many, pencil_max

__all__ = [
    "GeneratorSection",
    "Observable",
    "PathIntegral",
    "GeneratorIdentityReport",
    "LyapunovReport",
    "TransportProblem",
    "pf_generator_section",
    "koopman_generator_eval",
    "section_observable",
    "path_integral",
    "pf_semigroup_apply",
    "generator_identity_check",
    "growth_bound",
    "growth_form_matrix",
    "span_norm_derivative",
    "lyapunov_check",
    "transport_solve",
    "transport_residual",
]


@dataclass(frozen=True)
class GeneratorSection:
    """``y -> sum_l f_l(x) d/dx_l k(x, y)`` for a base point ``x``."""

    kernel: Kernel
    x: np.ndarray
    fx: np.ndarray

    def evaluate(self, Y) -> np.ndarray:
        D = self.kernel.grad_matrix(self.x[None, :], Y)[0]
        return D @ self.fx

    def __call__(self, y):
        v = self.evaluate(np.atleast_1d(np.asarray(y)).reshape(1, -1))[0]
        return complex(v) if np.iscomplexobj(v) else float(v)


def pf_generator_section(kernel: Kernel, field: VectorField, x) -> GeneratorSection:
    """Generator of the Perron-Frobenius semigroup applied to ``k(x, .)``."""
    if not kernel.differentiable:
        raise CapabilityError(f"kernel {kernel.id!r} has no first-argument gradient")
    xp = kernel.domain.as_points(np.atleast_1d(np.asarray(x)).reshape(1, -1))[0]
    return GeneratorSection(kernel, xp, np.asarray(field(xp)))


@dataclass(frozen=True)
class Observable:
    """A scalar function of the state with an optional gradient."""

    fn: Callable
    grad: Callable | None = None

    def __call__(self, x):
        return self.fn(x)


def section_observable(kernel: Kernel, y) -> Observable:
    """``g(x) = k(y, x)`` with its gradient, for real symmetric kernels."""
    if kernel.scalar_field != "real" or not kernel.positive_definite:
        raise CapabilityError("section gradients need a real symmetric kernel")
    yp = kernel.domain.as_points(np.atleast_1d(np.asarray(y)).reshape(1, -1))

    def fn(x):
        return kernel.matrix(yp, np.atleast_1d(x).reshape(1, -1))[0, 0]

    def grad(x):
        # k(y, x) = k(x, y): differentiate in the first argument
        return kernel.grad_matrix(np.atleast_1d(x).reshape(1, -1), yp)[0, 0]

    return Observable(fn, grad)


def koopman_generator_eval(field: VectorField, g, x):
    """``(A g)(x) = grad g(x) . f(x)``."""
    grad = getattr(g, "grad", None)
    if grad is None:
        raise CapabilityError("observable has no gradient")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    return float(np.dot(np.atleast_1d(grad(x)), field(x)))


@dataclass(frozen=True)
class PathIntegral:
    """Quadrature realization of ``int_0^T k(phi_t(x), .) dt``."""

    x: np.ndarray
    T: float
    nodes: np.ndarray
    weights: np.ndarray
    measure: AtomicMeasure = field(repr=False)


def path_integral(kernel: Kernel, flow: Flow, x, T, nodes=8, panels=None) -> PathIntegral:
    """Composite Gauss-Legendre measure with ``nodes`` points on each of ``panels`` panels.

    By default ``panels = ceil(32 T / nodes)``, i.e. about 32 nodes per unit time.
    """
    if not T > 0:
        raise ParameterError("T", f"must be positive, got {T}")
    if int(nodes) != nodes or nodes < 2:
        raise ParameterError("nodes", f"must be an integer >= 2, got {nodes}")
    nodes = int(nodes)
    if panels is None:
        panels = max(1, int(np.ceil(32.0 * T / nodes)))
    if int(panels) != panels or panels < 1:
        raise ParameterError("panels", f"must be a positive integer, got {panels}")
    g, w = np.polynomial.legendre.leggauss(nodes)
    edges = np.linspace(0.0, T, int(panels) + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    t = (mid[:, None] + half[:, None] * g[None, :]).ravel()
    wq = (half[:, None] * w[None, :]).ravel()
    x = np.atleast_1d(np.asarray(x))
    kernel.domain.as_points(x.reshape(1, -1))
    atoms = flow.trajectory(x, t)
    return PathIntegral(x, float(T), t, wq, AtomicMeasure(atoms, wq))


def pf_semigroup_apply(flow: Flow, t, measure: AtomicMeasure) -> AtomicMeasure:
    """``K_t``: advance every atom by ``phi_t``; weights stay."""
    if t < 0:
        raise ParameterError("t", f"must be nonnegative, got {t}")
    if t == 0 or len(measure) == 0:
        return measure
    return AtomicMeasure(flow.advance(measure.atoms, t), measure.weights.copy())


@dataclass(frozen=True)
class GeneratorIdentityReport:
    """Defects of ``(K_h I - I)/h`` against ``k(phi_T(x), .) - k(x, .)`` on an ``h`` ladder."""

    h: np.ndarray
    defects: np.ndarray
    ratios: np.ndarray
    first_order: bool

    def to_dict(self):
        return {
            "h": self.h,
            "defects": self.defects,
            "ratios": self.ratios,
            "first_order": self.first_order,
        }


def generator_identity_check(kernel: Kernel, flow: Flow, x, T, h_ladder=(1e-2, 1e-3, 1e-4),
                             probes=None, nodes=8, seed=0, ratio_range=(8.0, 12.0),
                             zero_tol=1e-13) -> GeneratorIdentityReport:
    """Check ``C I_{T,x} = k(phi_T(x), .) - k(x, .)`` by finite differences in ``h``.

    The ladder should shrink by a factor 10 per entry; first-order decay then
    shows as consecutive defect ratios inside ``ratio_range``. Defects that
    all vanish (below ``zero_tol``) also count as passing.
    """
    I = path_integral(kernel, flow, x, T, nodes=nodes)
    x = I.x
    if probes is None:
        probes = np.concatenate([kernel.sample(20, seed), x.reshape(1, -1)])
    Y = kernel.domain.as_points(probes)
    xT = flow_map(flow, x, T)
    rhs = embed_eval_many(AtomicMeasure(np.stack([xT, x]), [1.0, -1.0]), kernel, Y)
    base = embed_eval_many(I.measure, kernel, Y)
    h = np.asarray(h_ladder, dtype=float)
    defects = np.empty(h.size)
    for i, hi in enumerate(h):
        shifted = embed_eval_many(pf_semigroup_apply(flow, hi, I.measure), kernel, Y)
        defects[i] = np.max(np.abs((shifted - base) / hi - rhs))
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = defects[:-1] / defects[1:]
    if np.all(defects <= zero_tol):
        ok = True
    else:
        lo, hi_ = ratio_range
        ok = bool(np.all((ratios >= lo) & (ratios <= hi_)))
    return GeneratorIdentityReport(h, defects, ratios, ok)


def growth_form_matrix(kernel: Kernel, field: VectorField, points) -> np.ndarray:
    """``H_ij = sum_l f_l(x_i) d/dx_l k(x_i, x_j)``."""
    X = kernel.domain.as_points(points)
    D = kernel.grad_matrix(X, X)
    F = field(X)
    return np.einsum("il,ijl->ij", F, D)


def growth_bound(kernel: Kernel, field: VectorField, points, reg=None) -> NormBoundReport:
    """Growth-rate certificate ``omega`` over the sampled span.

    ``omega`` is the largest eigenvalue of the pencil ``(Herm(H), G + reg I)``
    on the retained rank. It bounds ``Re sum a_i conj(a_j) H_ij`` by
    ``omega ||mu||^2`` on the sampled span only; no claim about the full space
    is made.
    """
    if not kernel.positive_definite:
        raise CapabilityError(f"kernel {kernel.id!r} is not positive definite")
    if not kernel.differentiable:
        raise CapabilityError(f"kernel {kernel.id!r} has no first-argument gradient")
    D = Dictionary(kernel, points, reg)
    H = growth_form_matrix(kernel, field, D.points)
    val, v, mu = pencil_max(H, D)
    return NormBoundReport(val, np.conj(v), D.rank, mu, D.gram, H)


def span_norm_derivative(kernel: Kernel, flow: Flow, points, a, h=1e-4) -> tuple[float, float]:
    """``(d/dt ||K_t mu||^2 at 0, ||mu||^2)`` for ``mu = sum a_i k(x_i, .)``.

    Uses the one-sided second-order difference ``(-3 N_0 + 4 N_h - N_2h) / 2h``.
    """
    X = kernel.domain.as_points(points)
    a = np.asarray(a)

    def N(t):
        Xt = flow.advance(X, t) if t > 0 else X
        G = kernel.matrix(Xt)
        return float(np.real(a @ G @ np.conj(a)))

    n0 = N(0.0)
    return (-3.0 * n0 + 4.0 * N(h) - N(2 * h)) / (2 * h), n0


@dataclass(frozen=True)
class LyapunovReport:
    times: np.ndarray
    values: np.ndarray
    monotone: bool
    strictly_decreasing: bool

    def to_dict(self):
        return {
            "times": self.times,
            "values": self.values,
            "monotone": self.monotone,
            "strictly_decreasing": self.strictly_decreasing,
        }


def lyapunov_check(kernel: Kernel, flow: Flow, x, horizon, samples=50, slack=1e-10) -> LyapunovReport:
    """Sample ``V(phi_t(x)) = k(phi_t(x), phi_t(x))`` on a uniform grid over ``[0, horizon]``."""
    if not horizon > 0:
        raise ParameterError("horizon", f"must be positive, got {horizon}")
    if int(samples) != samples or samples < 2:
        raise ParameterError("samples", f"must be an integer >= 2, got {samples}")
    times = np.linspace(0.0, horizon, int(samples))
    traj = flow.trajectory(x, times)
    P = kernel.domain.as_points(traj)
    V = np.array([np.real(kernel.matrix(p[None, :])[0, 0]) for p in P])
    dV = np.diff(V)
    return LyapunovReport(times, V, bool(np.all(dV <= slack)), bool(np.all(dV < 0)))


class TransportProblem:
    """``u_t - b(t, x) u_x = 0`` on the line with ``u(0, .) = u0``.

    ``b`` and ``u0`` may be callables (vectorized over arrays) or expression
    strings in ``x`` (and ``t`` for ``b``).
    """

    def __init__(self, b, u0, step=1e-3):
        if not step > 0:
            raise ParameterError("step", f"must be positive, got {step}")
        self.b_text = b if isinstance(b, str) else None
        self.u0_text = u0 if isinstance(u0, str) else None
        if isinstance(b, str):
            fb = compile_expression(b, ["x", "t"])
            b = lambda t, x: fb(x=x, t=t)  # noqa: E731
        if isinstance(u0, str):
            fu = compile_expression(u0, ["x"])
            u0 = lambda x: fu(x=x)  # noqa: E731
        self.b = b
        self.u0 = u0
        self.step = float(step)
        bb = self.b
        self.field = VectorField(
            lambda X, t: np.broadcast_to(np.asarray(bb(t, X[:, 0]), dtype=float), X.shape[:1])[:, None],
            1, "transport",
        )
        self.flow = Flow(self.field, self.step)

    def characteristics(self, t, xs) -> np.ndarray:
        """``chi_t(x)`` solving ``d chi/dt = b(t, chi)``, ``chi_0 = x``."""
        xs = np.asarray(xs, dtype=float).ravel()
        try:
            return self.flow.advance(xs[:, None], t)[:, 0]
        except DivergenceError as exc:
            p = exc.point
            where = f" from grid point x={xs[p]:.17g}" if p is not None else ""
            raise DivergenceError(f"characteristic diverged{where}: {exc}", exc.escape_time, p) from None


def transport_solve(problem: TransportProblem, t, xs) -> np.ndarray:
    """``u(t, x) = u0(chi_t(x))`` on the grid ``xs``."""
    if t < 0:
        raise ParameterError("t", f"must be nonnegative, got {t}")
    xs = np.asarray(xs, dtype=float).ravel()
    chi = problem.characteristics(t, xs) if t > 0 else xs
    return np.broadcast_to(np.asarray(problem.u0(chi), dtype=float), xs.shape).copy()


def transport_residual(problem: TransportProblem, t, xs, dt=1e-4, dx=1e-4) -> np.ndarray:
    """Pointwise ``|u_t - b u_x|`` by central differences (forward in time when ``t < dt``)."""
    xs = np.asarray(xs, dtype=float).ravel()
    if t >= dt:
        ut = (transport_solve(problem, t + dt, xs) - transport_solve(problem, t - dt, xs)) / (2 * dt)
    else:
        u0, u1, u2 = (transport_solve(problem, t + k * dt, xs) for k in range(3))
        ut = (-3 * u0 + 4 * u1 - u2) / (2 * dt)
    ux = (transport_solve(problem, t, xs + dx) - transport_solve(problem, t, xs - dx)) / (2 * dx)
    b = np.broadcast_to(np.asarray(problem.b(t, xs), dtype=float), xs.shape)
    return np.abs(ut - b * ux)
