"""Discrete maps, vector fields and their flows, and structure relations.

Maps act on single points given as 1-D coordinate arrays and return 1-D
arrays. Vector fields are vectorized: they take an ``(n, d)`` array of states
(and a time) and return an ``(n, d)`` array of velocities.
"""

from __future__ import annotations

import ast
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import (
    DivergenceError,
    ParameterError,
    RelationShapeError,
    UnknownSourceError,
)

__all__ = [
    "DiscreteMap",
    "VectorField",
    "Flow",
    "Conjugacy",
    "Symmetry",
    "Factor",
    "RelationReport",
    "SemiflowReport",
    "compile_expression",
    "linear_map",
    "translation_map",
    "affine_map",
    "scaling_map",
    "logistic_map",
    "mobius_map",
    "mobius_fixed_point",
    "disc_automorphism",
    "identity_map",
    "permutation_map",
    "power_map",
    "expression_map",
    "snapshot_map",
    "rotation",
    "map_from_config",
    "field_from_config",
    "linear_field",
    "harmonic_oscillator",
    "van_der_pol",
    "constant_field",
    "zero_field",
    "expression_field",
    "apply_map",
    "flow_map",
    "check_semiflow",
    "check_relation",
    "DIVERGENCE_GUARD",
]

DIVERGENCE_GUARD = 1e12


# -- expressions -----------------------------------------------------------

_FUNCS = {
    "sin": np.sin,
    "cos": np.cos,
    "exp": np.exp,
    "tan": np.tan,
    "tanh": np.tanh,
    "sqrt": np.sqrt,
    "log": np.log,
    "abs": np.abs,
}
_CONSTS = {"pi": np.pi, "e": np.e}
_ALLOWED = (
    ast.Expression,
    ast.BinOp,
    ast.UnaryOp,
    ast.Call,
    ast.Name,
    ast.Load,
    ast.Constant,
    ast.Add,
    ast.Sub,
    ast.Mult,
    ast.Div,
    ast.Pow,
    ast.USub,
    ast.UAdd,
)


def compile_expression(text: str, variables) -> Callable:
    """Compile an arithmetic expression over ``variables`` into a numpy function.

    Allowed: numbers, the named variables, ``+ - * / **``, and the functions
    sin, cos, exp, tan, tanh, sqrt, log, abs. The returned callable takes the
    variables as keyword arguments (arrays broadcast elementwise).
    """
    try:
        tree = ast.parse(text.strip(), mode="eval")
    except SyntaxError as exc:
        raise ParameterError("expression", f"cannot parse {text!r}: {exc.msg}") from None
    names = set(variables)
    for node in ast.walk(tree):
        if not isinstance(node, _ALLOWED):
            raise ParameterError("expression", f"{type(node).__name__} not allowed in {text!r}")
        if isinstance(node, ast.Call):
            if not isinstance(node.func, ast.Name) or node.func.id not in _FUNCS or node.keywords:
                raise ParameterError("expression", f"unsupported call in {text!r}")
        elif isinstance(node, ast.Name) and node.id not in names | set(_FUNCS) | set(_CONSTS):
            raise ParameterError("expression", f"unknown name {node.id!r} in {text!r}")
        elif isinstance(node, ast.Constant) and not isinstance(node.value, (int, float, complex)):
            raise ParameterError("expression", f"non-numeric constant in {text!r}")
    code = compile(tree, "<expression>", "eval")
    env = {"__builtins__": {}, **_FUNCS, **_CONSTS}

    def fn(**values):
        return eval(code, env, values)

    fn.text = text
    return fn


# -- discrete maps -----------------------------------------------------------


class DiscreteMap:
    """A map ``f: X -> X`` applied to single points.

    ``kind`` is ``"closed-form"`` or ``"snapshot-data"``; ``form`` names the
    catalog entry and ``params`` holds its parameters. When the inverse is known
    in closed form it is available through :meth:`inverse`.
    """

    def __init__(self, fn, form="callable", params=None, inverse=None, dim=None,
                 kind="closed-form", pairs=None):
        self._fn = fn
        self.form = form
        self.params = dict(params or {})
        self._inverse = inverse
        self.dim = dim
        self.kind = kind
        self.pairs = pairs

    def __repr__(self):
        return f"DiscreteMap({self.form!r})"

    def __call__(self, x):
        out = self._fn(np.atleast_1d(np.asarray(x)))
        return np.atleast_1d(np.asarray(out))

    def apply_many(self, X) -> np.ndarray:
        """Apply to every row of an ``(n, d)`` array."""
        X = np.asarray(X)
        if X.ndim == 1:
            X = X.reshape(-1, 1)
        if len(X) == 0:
            return X.copy()
        return np.array([self(x) for x in X]).reshape(len(X), -1)

    def compose(self, other: "DiscreteMap") -> "DiscreteMap":
        """``self o other``: apply ``other`` first."""
        inv = None
        if self.has_inverse() and other.has_inverse():
            a, b = self.inverse(), other.inverse()
            inv = lambda x: b(a(x))  # noqa: E731
        return DiscreteMap(lambda x: self(other(x)), form=f"{self.form}∘{other.form}",
                           inverse=inv, dim=self.dim or other.dim)

    def has_inverse(self):
        return self._inverse is not None

    def inverse(self) -> "DiscreteMap":
        if self._inverse is None:
            raise ParameterError("inverse", f"map {self.form!r} has no known inverse")
        inv = self._inverse
        if isinstance(inv, DiscreteMap):
            return inv
        return DiscreteMap(inv, form=f"{self.form}^-1", inverse=self._fn, dim=self.dim)


def as_map(f) -> DiscreteMap:
    return f if isinstance(f, DiscreteMap) else DiscreteMap(f)


def _matrix(A, name):
    A = np.asarray(A)
    if A.dtype.kind not in "fc":
        A = A.astype(float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ParameterError(name, f"must be a square matrix, got shape {A.shape}")
    return A


def _invertible(A):
    return np.linalg.cond(A) < 1e12


def rotation(theta):
    """2x2 rotation matrix by angle ``theta``."""
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, -s], [s, c]])


def linear_map(A) -> DiscreteMap:
    A = _matrix(A, "A")
    inv = None
    if _invertible(A):
        Ainv = np.linalg.inv(A)
        inv = DiscreteMap(lambda x: Ainv @ x, "linear", {"A": Ainv}, dim=A.shape[0])
    return DiscreteMap(lambda x: A @ x, "linear", {"A": A}, inverse=inv, dim=A.shape[0])


def translation_map(c) -> DiscreteMap:
    c = np.atleast_1d(np.asarray(c, dtype=float))
    inv = DiscreteMap(lambda x: x - c, "translation", {"c": -c}, dim=c.size)
    return DiscreteMap(lambda x: x + c, "translation", {"c": c}, inverse=inv, dim=c.size)


def affine_map(A, c) -> DiscreteMap:
    A = _matrix(A, "A")
    c = np.atleast_1d(np.asarray(c, dtype=float))
    inv = None
    if _invertible(A):
        Ainv = np.linalg.inv(A)
        inv = DiscreteMap(lambda x: Ainv @ (x - c), "affine", {"A": Ainv, "c": c}, dim=c.size)
    return DiscreteMap(lambda x: A @ x + c, "affine", {"A": A, "c": c}, inverse=inv, dim=c.size)


def scaling_map(a, dim=None) -> DiscreteMap:
    """``x -> a x`` (``a`` scalar)."""
    if a == 0:
        inv = None
    else:
        inv = DiscreteMap(lambda x: x / a, "scaling", {"a": 1 / a}, dim=dim)
    return DiscreteMap(lambda x: a * x, "scaling", {"a": a}, inverse=inv, dim=dim)


def logistic_map(r) -> DiscreteMap:
    return DiscreteMap(lambda x: r * x * (1.0 - x), "logistic", {"r": r}, dim=1)


def power_map(p) -> DiscreteMap:
    return DiscreteMap(lambda x: x**p, "power", {"p": p}, dim=1)


def identity_map(dim=None) -> DiscreteMap:
    ident = lambda x: np.array(x, copy=True)  # noqa: E731
    return DiscreteMap(ident, "identity", {}, inverse=ident, dim=dim)


def mobius_map(lam, a) -> DiscreteMap:
    """Disc automorphism ``f(z) = lam (z - a) / (1 - z conj(a))``, ``|lam| = 1``, ``|a| < 1``."""
    lam = complex(lam)
    a = complex(a)
    if abs(abs(lam) - 1.0) > 1e-12:
        raise ParameterError("lam", f"must have modulus 1, got {abs(lam)}")
    if not abs(a) < 1:
        raise ParameterError("a", f"must lie in the open unit disc, got {a}")
    ac = a.conjugate()

    def f(z):
        return lam * (z - a) / (1.0 - z * ac)

    def finv(w):
        u = w / lam
        return (u + a) / (1.0 + u * ac)

    inv = DiscreteMap(finv, "mobius^-1", {"lam": lam, "a": a}, inverse=f, dim=1)
    return DiscreteMap(f, "mobius", {"lam": lam, "a": a}, inverse=inv, dim=1)


def mobius_fixed_point(lam, a) -> complex:
    """The fixed point inside the unit disc of ``lam (z - a) / (1 - z conj(a))``.

    Fixed points solve ``conj(a) z^2 + (lam - 1) z - lam a = 0``. Raises
    :class:`ParameterError` when both lie on or outside the unit circle
    (non-elliptic maps).
    """
    lam, a = complex(lam), complex(a)
    if a == 0:
        if lam == 1:
            raise ParameterError("lam", "identity map: every point is fixed")
        return 0j
    roots = np.roots([a.conjugate(), lam - 1.0, -lam * a])
    inside = [complex(r) for r in roots if abs(r) < 1 - 1e-12]
    if not inside:
        raise ParameterError("a", f"map has no fixed point inside the disc (roots {roots})")
    return inside[0]


def disc_automorphism(gamma) -> DiscreteMap:
    """``phi(z) = (z - gamma) / (1 - z conj(gamma))``, sending ``gamma`` to 0."""
    return mobius_map(1.0, gamma)


def permutation_map(sigma) -> DiscreteMap:
    """Permutation of {1, ..., n}; ``sigma[i - 1]`` is the image of ``i``."""
    sigma = np.asarray(sigma, dtype=np.int64).ravel()
    n = sigma.size
    if sorted(sigma.tolist()) != list(range(1, n + 1)):
        raise ParameterError("sigma", f"not a permutation of 1..{n}: {sigma.tolist()}")
    inv = np.empty_like(sigma)
    inv[sigma - 1] = np.arange(1, n + 1)

    def f(i):
        return sigma[np.asarray(i, dtype=np.int64) - 1]

    def finv(i):
        return inv[np.asarray(i, dtype=np.int64) - 1]

    inv_map = DiscreteMap(finv, "permutation", {"sigma": inv}, inverse=f, dim=1)
    return DiscreteMap(f, "permutation", {"sigma": sigma}, inverse=inv_map, dim=1)


def expression_map(exprs) -> DiscreteMap:
    """Map given by one expression string per output coordinate over x1..xd."""
    if isinstance(exprs, str):
        exprs = [exprs]
    d = len(exprs)
    names = [f"x{i + 1}" for i in range(d)] + (["x"] if d == 1 else [])
    fns = [compile_expression(e, names) for e in exprs]

    def f(x):
        env = {f"x{i + 1}": x[i] for i in range(d)}
        if d == 1:
            env["x"] = x[0]
        return np.array([fn(**env) for fn in fns])

    return DiscreteMap(f, "expression", {"exprs": list(exprs)}, dim=d)


def snapshot_map(X, Y) -> DiscreteMap:
    """Map known only through pairs ``(x_i, y_i)``; refuses to extrapolate."""
    X = np.asarray(X)
    Y = np.asarray(Y)
    if X.ndim == 1:
        X = X.reshape(-1, 1)
    if Y.ndim == 1:
        Y = Y.reshape(-1, 1)
    if X.shape != Y.shape:
        raise ParameterError("pairs", f"source shape {X.shape} differs from target shape {Y.shape}")
    table = {}
    for i, (x, y) in enumerate(zip(X, Y)):
        key = tuple(x.tolist())
        if key in table:
            raise ParameterError("pairs", f"duplicate source {list(key)} at row {i}")
        table[key] = y.copy()

    def f(x):
        key = tuple(np.asarray(x).tolist())
        try:
            return table[key].copy()
        except KeyError:
            raise UnknownSourceError(f"point {list(key)} is not a stored snapshot source") from None

    return DiscreteMap(f, "snapshot", {"n_pairs": len(table)}, dim=X.shape[1],
                       kind="snapshot-data", pairs=(X.copy(), Y.copy()))


def apply_map(f: DiscreteMap, x) -> np.ndarray:
    """``f(x)``."""
    return as_map(f)(x)


def map_from_config(cfg: dict) -> DiscreteMap:
    """Build a map from ``{"id": ..., "params": {...}}``.

    Ids: identity, linear, translation, affine, scaling, logistic, power,
    mobius, disc_automorphism, permutation, rotation, expression, data
    (snapshot pairs CSV).
    """
    from .io import ingest_pairs, parse_number

    kid = cfg.get("id")
    p = dict(cfg.get("params", {}))

    def num(v):
        return parse_number(v)

    def mat(v):
        arr = np.array([[num(x) for x in row] for row in v])
        return arr.real if arr.dtype.kind == "c" and np.all(arr.imag == 0) else arr

    def vec(v):
        arr = np.array([num(x) for x in np.atleast_1d(v)])
        return arr.real if arr.dtype.kind == "c" and np.all(arr.imag == 0) else arr

    if kid == "identity":
        return identity_map(p.get("dim"))
    if kid == "linear":
        return linear_map(mat(p["A"]))
    if kid == "translation":
        return translation_map(vec(p["c"]))
    if kid == "affine":
        return affine_map(mat(p["A"]), vec(p["c"]))
    if kid == "scaling":
        return scaling_map(num(p["a"]), p.get("dim"))
    if kid == "logistic":
        return logistic_map(num(p["r"]))
    if kid == "power":
        return power_map(num(p["p"]))
    if kid == "mobius":
        return mobius_map(num(p.get("lam", 1.0)), num(p["a"]))
    if kid == "disc_automorphism":
        return disc_automorphism(num(p["gamma"]))
    if kid == "permutation":
        return permutation_map(p["sigma"])
    if kid == "rotation":
        return linear_map(num(p.get("scale", 1.0)) * rotation(num(p["theta"])))
    if kid == "expression":
        return expression_map(p["exprs"])
    if kid == "data":
        X, Y = ingest_pairs(p["pairs"])
        return snapshot_map(X, Y)
    raise ParameterError("id", f"unknown map {kid!r}")


# -- vector fields and flows -------------------------------------------------


class VectorField:
    """Right-hand side of ``dx/dt = f(t, x)``; ``f(X, t)`` maps ``(n, d) -> (n, d)``."""

    def __init__(self, fn, dim, form="callable", params=None, autonomous=True):
        self._fn = fn
        self.dim = int(dim)
        self.form = form
        self.params = dict(params or {})
        self.autonomous = autonomous

    def __repr__(self):
        return f"VectorField({self.form!r}, dim={self.dim})"

    def __call__(self, X, t=0.0):
        X = np.asarray(X)
        single = X.ndim <= 1
        Xa = X.reshape(1, -1) if single else X
        if Xa.shape[1] != self.dim:
            raise ParameterError("x", f"state dimension {Xa.shape[1]} != field dimension {self.dim}")
        out = np.asarray(self._fn(Xa, t))
        out = np.broadcast_to(out, Xa.shape).astype(np.result_type(out, Xa, float), copy=True)
        return out[0] if single else out

    def rhs(self, X, t):
        """Raw ``(n, d) -> (n, d)`` evaluation without shape normalization."""
        return self._fn(X, t)


def linear_field(A) -> VectorField:
    A = _matrix(A, "A")
    return VectorField(lambda X, t: X @ A.T, A.shape[0], "linear", {"A": A})


def harmonic_oscillator() -> VectorField:
    """``x1' = x2, x2' = -x1``."""
    return VectorField(lambda X, t: np.stack([X[:, 1], -X[:, 0]], axis=1), 2, "harmonic")


def van_der_pol(mu=1.0) -> VectorField:
    """``x1' = x2, x2' = mu (1 - x1^2) x2 - x1``."""
    def f(X, t):
        x1, x2 = X[:, 0], X[:, 1]
        return np.stack([x2, mu * (1.0 - x1 * x1) * x2 - x1], axis=1)

    return VectorField(f, 2, "vanderpol", {"mu": mu})


def constant_field(c) -> VectorField:
    c = np.atleast_1d(np.asarray(c, dtype=float))
    return VectorField(lambda X, t: np.broadcast_to(c, X.shape), c.size, "constant", {"c": c})


def zero_field(dim=1) -> VectorField:
    return VectorField(lambda X, t: np.zeros_like(X), dim, "zero", {"dim": dim})


def expression_field(exprs) -> VectorField:
    """Field from expression strings over x1..xd (and ``t``); ``x`` aliases x1 when d = 1."""
    if isinstance(exprs, str):
        exprs = [exprs]
    d = len(exprs)
    names = [f"x{i + 1}" for i in range(d)] + ["t"] + (["x"] if d == 1 else [])
    fns = [compile_expression(e, names) for e in exprs]
    autonomous = not any(_mentions(e, "t") for e in exprs)

    def f(X, t):
        env = {f"x{i + 1}": X[:, i] for i in range(d)}
        env["t"] = t
        if d == 1:
            env["x"] = X[:, 0]
        cols = [np.broadcast_to(np.asarray(fn(**env)), X.shape[:1]) for fn in fns]
        return np.stack(cols, axis=1)

    return VectorField(f, d, "expression", {"exprs": list(exprs)}, autonomous=autonomous)


def _mentions(text, name):
    return any(isinstance(n, ast.Name) and n.id == name for n in ast.walk(ast.parse(text, mode="eval")))


def field_from_config(cfg: dict) -> VectorField:
    """Build a vector field from ``{"id": ..., "params": {...}}``.

    Ids: linear, harmonic, vanderpol, constant, zero, expression.
    """
    from .io import parse_number

    kid = cfg.get("id")
    p = dict(cfg.get("params", {}))
    if kid == "linear":
        return linear_field(np.array([[parse_number(v) for v in row] for row in p["A"]], dtype=float))
    if kid == "harmonic":
        return harmonic_oscillator()
    if kid == "vanderpol":
        return van_der_pol(float(p.get("mu", 1.0)))
    if kid == "constant":
        return constant_field(p["c"])
    if kid == "zero":
        return zero_field(int(p.get("dim", 1)))
    if kid == "expression":
        return expression_field(p["exprs"])
    raise ParameterError("id", f"unknown vector field {kid!r}")


@dataclass(frozen=True)
class Flow:
    """Semiflow of a vector field, integrated by fixed-step classical RK4."""

    field: VectorField
    step: float = 1e-3
    method: str = "rk4"

    def __post_init__(self):
        if not self.step > 0:
            raise ParameterError("step", f"must be positive, got {self.step}")
        if self.method != "rk4":
            raise ParameterError("method", "only 'rk4' is supported")

    def advance(self, X, t, t0=0.0) -> np.ndarray:
        """Integrate every row of ``X`` from time ``t0`` over a span ``t >= 0``.

        Steps have size ``step``; a final shortened step lands exactly on ``t``.
        """
        if t < 0:
            raise ParameterError("t", f"must be nonnegative, got {t}")
        X = np.array(X, copy=True)
        single = X.ndim <= 1
        Y = X.reshape(1, -1) if single else X
        if Y.shape[0] and t > 0:
            Y = Y.astype(np.result_type(Y, float))
            # validate the field output once; the loop then uses the raw form
            self.field(Y, t0)
            n_full = int(t // self.step)
            rem = t - n_full * self.step
            h = self.step
            s = t0
            for k in range(n_full + (1 if rem > 1e-12 * self.step else 0)):
                if k == n_full:
                    h = rem
                Y = _rk4_step(self.field, Y, s, h)
                s = t0 + (k + 1) * self.step if k < n_full else t0 + t
                _guard(Y, s)
        return Y[0] if single else Y

    def trajectory(self, x, times) -> np.ndarray:
        """States at the nondecreasing ``times``, integrating piecewise between them."""
        times = np.asarray(times, dtype=float)
        if np.any(np.diff(times) < 0) or (times.size and times[0] < 0):
            raise ParameterError("times", "must be nonnegative and nondecreasing")
        x = np.atleast_1d(np.asarray(x))
        out = []
        cur, tc = x, 0.0
        for tq in times:
            cur = self.advance(cur, tq - tc, t0=tc)
            tc = tq
            out.append(cur)
        return np.array(out).reshape(len(times), -1)


def _rk4_step(field, Y, t, h):
    f = field.rhs
    k1 = f(Y, t)
    k2 = f(Y + 0.5 * h * k1, t + 0.5 * h)
    k3 = f(Y + 0.5 * h * k2, t + 0.5 * h)
    k4 = f(Y + h * k3, t + h)
    return Y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _guard(Y, t):
    norms = np.sqrt(np.sum(np.abs(Y) ** 2, axis=1))
    bad = ~(norms <= DIVERGENCE_GUARD)
    if np.any(bad):
        i = int(np.flatnonzero(bad)[0])
        raise DivergenceError(
            f"trajectory of point {i} exceeded norm {DIVERGENCE_GUARD:.0e} at t={t:.6g}",
            escape_time=float(t),
            point=i,
        )


def flow_map(flow: Flow, x, t) -> np.ndarray:
    """RK4 approximation of ``phi_t(x)``; ``phi_0(x) = x`` exactly."""
    return flow.advance(np.atleast_1d(np.asarray(x)), t)


@dataclass(frozen=True)
class SemiflowReport:
    defect: float
    passed: bool
    tol: float

    def to_dict(self):
        return {"defect": self.defect, "pass": self.passed, "tol": self.tol}


def check_semiflow(flow: Flow, x, t, s, tol=1e-8) -> SemiflowReport:
    """``||phi_{t+s}(x) - phi_t(phi_s(x))||``."""
    if t < 0 or s < 0:
        raise ParameterError("t", "t and s must be nonnegative")
    lhs = flow_map(flow, x, t + s)
    rhs = flow_map(flow, flow_map(flow, x, s), t)
    d = float(np.linalg.norm(lhs - rhs))
    return SemiflowReport(d, d <= tol, tol)


# -- structure relations -----------------------------------------------------


@dataclass(frozen=True)
class Conjugacy:
    """``phi o g = f o phi`` with ``phi: Y -> X`` bijective."""

    phi: Callable
    phi_inv: Callable
    g: Callable


@dataclass(frozen=True)
class Symmetry:
    """``psi o f = f o psi``."""

    psi: Callable


@dataclass(frozen=True)
class Factor:
    """``Pi o f = F o Pi`` with ``Pi: X -> Y``, ``dim Y = target_dim``."""

    Pi: Callable
    F: Callable
    target_dim: int | None = None


@dataclass(frozen=True)
class RelationReport:
    max_defect: float
    passed: bool
    tol: float
    residuals: np.ndarray = field(repr=False, default=None)

    def to_dict(self):
        return {"max_defect": self.max_defect, "pass": self.passed, "tol": self.tol}


def _pt(v):
    return np.atleast_1d(np.asarray(v))


def check_relation(rel, f, samples, tol=1e-12) -> RelationReport:
    """Largest residual norm of the relation's defining identity over ``samples``."""
    f = as_map(f)
    S = np.asarray(samples)
    if S.ndim <= 1:
        S = S.reshape(-1, 1)
    res = []
    for i, x in enumerate(S):
        if isinstance(rel, Symmetry):
            psi = as_map(rel.psi)
            lhs, rhs = psi(f(x)), f(psi(x))
        elif isinstance(rel, Conjugacy):
            phi, g = as_map(rel.phi), as_map(rel.g)
            lhs, rhs = phi(g(x)), f(phi(x))
        elif isinstance(rel, Factor):
            Pi, F = as_map(rel.Pi), as_map(rel.F)
            px = Pi(x)
            if rel.target_dim is not None and px.size != rel.target_dim:
                raise RelationShapeError(
                    f"Pi maps sample {i} to dimension {px.size}, expected {rel.target_dim}"
                )
            lhs, rhs = Pi(f(x)), F(px)
        else:
            raise ParameterError("rel", f"unknown relation {type(rel).__name__}")
        lhs, rhs = _pt(lhs), _pt(rhs)
        if lhs.shape != rhs.shape:
            raise RelationShapeError(
                f"sample {i}: sides have shapes {lhs.shape} and {rhs.shape}"
            )
        res.append(float(np.linalg.norm(lhs - rhs)))
    res = np.array(res)
    m = float(res.max()) if res.size else 0.0
    return RelationReport(m, m <= tol, tol, res)
