"""Batch command-line front end.

Usage::

    kernel-koopman <command> --config run.json [--out DIR] [--seed N] [--tol X] [--reg X]

Each command writes ``<command>.json`` (and for some commands a CSV table)
into ``--out`` and prints the JSON report. Exit status: 0 on success, 1 on
input or numerical errors, 2 when a check ran but failed its tolerance.
The configuration schema is documented in ``docs/config.md``.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import io as kio
from .dynamics import Conjugacy, Flow, check_relation, field_from_config, map_from_config
from .errors import KoopmanError, ParameterError, ParseError
from .kernels import check_invariance, gram, kernel_from_config
from .operators import (
    AtomicMeasure,
    norm_bound_estimate,
    pf_project,
    rep_matrix_discrete,
    rep_matrix_linear,
    spectrum,
)
from .semigroups import (
    TransportProblem,
    generator_identity_check,
    growth_bound,
    lyapunov_check,
    path_integral,
    span_norm_derivative,
    transport_residual,
    transport_solve,
)
from .structure import conjugacy_commutator, factor_intertwiner, symmetry_commutator

__all__ = ["main", "run", "COMMANDS"]

EXIT_OK, EXIT_ERROR, EXIT_CHECK_FAILED = 0, 1, 2
DEFAULT_TOL = 1e-10


class _Run:
    """Parsed configuration plus flag overrides."""

    def __init__(self, cfg: dict, base: Path, seed: int, tol, reg):
        self.cfg = cfg
        self.base = base
        self.seed = seed
        self.tol = tol if tol is not None else float(cfg.get("tol", DEFAULT_TOL))
        reg = reg if reg is not None else cfg.get("reg")
        self.reg = None if reg is None else float(reg)

    def need(self, key):
        if key not in self.cfg:
            raise ParameterError(key, "missing from config")
        return self.cfg[key]

    def num(self, key, default=None):
        if key not in self.cfg:
            if default is None:
                raise ParameterError(key, "missing from config")
            return default
        return kio.parse_number(self.cfg[key])

    def path(self, key):
        return self.base / self.need(key)

    def kernel(self, key="kernel"):
        return kernel_from_config(self.need(key))

    def map(self, key="map"):
        return map_from_config(self._resolve_files(self.need(key)))

    def _resolve_files(self, spec):
        spec = dict(spec)
        params = dict(spec.get("params", {}))
        if "pairs" in params:
            params["pairs"] = self.base / params["pairs"]
        spec["params"] = params
        return spec

    def flow(self):
        return Flow(field_from_config(self.need("field")), float(self.num("step", 1e-3)))

    def points(self, key="points"):
        if f"{key}_file" in self.cfg:
            return kio.ingest_points(self.base / self.cfg[f"{key}_file"])
        return _array(self.need(key))

    def point(self, key="x"):
        return np.atleast_1d(_array(self.need(key))).ravel()

    def pairs(self):
        if "pairs_file" in self.cfg:
            return kio.ingest_pairs(self.path("pairs_file"))
        X = self.points()
        return X, self.map().apply_many(X)

    def measure(self):
        if "measure" in self.cfg:
            m = self.cfg["measure"]
            return AtomicMeasure(_array(m["atoms"]), _array(m["weights"]).ravel())
        X = self.points()
        return AtomicMeasure(X, np.ones(len(X)))


def _array(v):
    def conv(e):
        if isinstance(e, list):
            return [conv(x) for x in e]
        return kio.parse_number(e)

    arr = np.array(conv(v))
    if arr.dtype.kind == "c" and np.all(arr.imag == 0):
        arr = arr.real
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    return arr


def _check(report: dict, passed: bool):
    return report, (EXIT_OK if passed else EXIT_CHECK_FAILED), {}


def cmd_gram(r: _Run):
    k = r.kernel()
    G = gram(k, r.points())
    return {"n": G.shape[0], "gram": G}, EXIT_OK, {}


def cmd_pf_project(r: _Run):
    X, Y = r.pairs()
    op = pf_project(r.kernel(), X, Y, reg=r.reg)
    return op.to_dict(), EXIT_OK, {}


def cmd_spectrum(r: _Run):
    X, Y = r.pairs()
    op = pf_project(r.kernel(), X, Y, reg=r.reg)
    pairs = spectrum(op)
    report = {
        "rank": op.rank,
        "reg": op.dictionary.reg,
        "eigenvalues": [{"re": p.value.real, "im": p.value.imag} for p in pairs],
        "eigenvectors": [p.coeffs.astype(complex) for p in pairs],
    }
    return report, EXIT_OK, {}


def cmd_norm_bound(r: _Run):
    rep = norm_bound_estimate(r.kernel(), r.map(), r.points(), reg=r.reg)
    return rep.to_dict(), EXIT_OK, {}


def cmd_growth_bound(r: _Run):
    k = r.kernel()
    X = r.points()
    rep = growth_bound(k, field_from_config(r.need("field")), X, reg=r.reg)
    report = rep.to_dict()
    if r.cfg.get("soundness_samples"):
        flow = r.flow()
        rng = np.random.default_rng(r.seed)
        worst = -np.inf
        for _ in range(int(r.cfg["soundness_samples"])):
            a = rng.standard_normal(len(X))
            dN, N0 = span_norm_derivative(k, flow, X, a)
            worst = max(worst, dN - 2 * (rep.bound + 1e-6) * N0)
        report["soundness_pass"] = bool(worst <= 0)
        return _check(report, worst <= 0)
    return report, EXIT_OK, {}


def cmd_check_invariant(r: _Run):
    rep = check_invariance(r.kernel(), r.map(), r.points(), tol=r.tol)
    return _check(rep.to_dict(), rep.passed)


def cmd_check_symmetry(r: _Run):
    probes = _array(r.cfg["probes"]) if "probes" in r.cfg else None
    rep = symmetry_commutator(r.kernel(), r.map(), r.map("psi"), r.measure(), probes, r.tol, r.seed)
    report = rep.to_dict()
    return _check(report, rep.passed)


def cmd_check_factor(r: _Run):
    probes = _array(r.cfg["probes"]) if "probes" in r.cfg else None
    rep = factor_intertwiner(r.kernel(), r.kernel("kernel_Y"), r.map(), r.map("Pi"), r.map("F"),
                             r.measure(), probes, r.tol, r.seed)
    return _check(rep.to_dict(), rep.passed)


def cmd_check_conjugacy(r: _Run):
    f, g, phi = r.map(), r.map("g"), r.map("phi")
    X = r.points()
    rel = check_relation(Conjugacy(phi, None, g), f, X, tol=r.tol)
    report = {"relation": rel.to_dict()}
    passed = rel.passed
    if "kernel" in r.cfg:
        op = conjugacy_commutator(r.kernel(), f, g, phi, r.measure(), tol=r.tol, seed=r.seed)
        report["operator"] = op.to_dict()
        passed = passed and op.passed
    return _check(report, passed)


def cmd_pathint(r: _Run):
    k, flow = r.kernel(), r.flow()
    nodes = int(r.num("nodes", 8))
    panels = r.cfg.get("panels")
    I = path_integral(k, flow, r.point(), float(r.num("T")), nodes=nodes, panels=panels)
    report = {"T": I.T, "n_nodes": len(I.nodes), "weight_sum": float(np.sum(I.weights)),
              "weights": I.weights}
    table = kio.emit_trajectory(I.nodes, I.measure.atoms)
    return report, EXIT_OK, {"pathint.csv": table}


def cmd_generator_check(r: _Run):
    ladder = r.cfg.get("h_ladder", [1e-2, 1e-3, 1e-4])
    rep = generator_identity_check(r.kernel(), r.flow(), r.point(), float(r.num("T")),
                                   h_ladder=[float(h) for h in ladder],
                                   nodes=int(r.num("nodes", 8)), seed=r.seed)
    return _check(rep.to_dict(), rep.first_order)


def cmd_lyapunov(r: _Run):
    rep = lyapunov_check(r.kernel(), r.flow(), r.point(), float(r.num("horizon")),
                         int(r.num("samples", 50)))
    return _check(rep.to_dict(), rep.monotone)


def cmd_transport(r: _Run):
    grid = r.need("grid")
    xs = np.linspace(float(grid["min"]), float(grid["max"]), int(grid["count"]))
    prob = TransportProblem(str(r.need("b")), str(r.need("u0")), float(r.num("step", 1e-3)))
    t = float(r.num("t"))
    u = transport_solve(prob, t, xs)
    table = kio.emit_table(["x", "u"], np.column_stack([xs, u]).tolist())
    report = {"t": t, "count": len(xs), "step": prob.step}
    if r.cfg.get("residual", False) and t > 0:
        report["max_residual"] = float(np.max(transport_residual(prob, t, xs)))
    return report, EXIT_OK, {"transport.csv": table}


def cmd_repmatrix(r: _Run):
    M = _array(r.need("M"))
    if "sigma" in r.cfg:
        rep = rep_matrix_discrete(M, r.cfg["sigma"])
        return rep.to_dict(), EXIT_OK, {}
    A = _array(r.need("A"))
    rep = rep_matrix_linear(M, A)
    return _check(rep.to_dict(), rep.duality_defect <= r.tol)


COMMANDS = {
    "gram": cmd_gram,
    "pf-project": cmd_pf_project,
    "spectrum": cmd_spectrum,
    "norm-bound": cmd_norm_bound,
    "growth-bound": cmd_growth_bound,
    "check-invariant": cmd_check_invariant,
    "check-symmetry": cmd_check_symmetry,
    "check-factor": cmd_check_factor,
    "check-conjugacy": cmd_check_conjugacy,
    "pathint": cmd_pathint,
    "generator-check": cmd_generator_check,
    "lyapunov": cmd_lyapunov,
    "transport": cmd_transport,
    "repmatrix": cmd_repmatrix,
}


def load_config(path) -> dict:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ParseError(f"cannot read config: {exc.strerror}", path=path) from None
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, path=path, line=exc.lineno, column=exc.colno) from None
    if not isinstance(cfg, dict):
        raise ParseError("config must be a JSON object", path=path, line=1, column=1)
    return cfg


def run(command: str, config_path, out=".", seed=0, tol=None, reg=None, stdout=None) -> int:
    """Execute one command; returns the exit status."""
    stdout = stdout or sys.stdout
    try:
        cfg = load_config(config_path)
        r = _Run(cfg, Path(config_path).resolve().parent, seed, tol, reg)
        report, status, tables = COMMANDS[command](r)
    except (KoopmanError, ValueError, KeyError, TypeError, OSError, ArithmeticError) as exc:
        msg = f"missing key {exc}" if isinstance(exc, KeyError) else str(exc)
        print(f"error: {type(exc).__name__}: {msg}", file=sys.stderr)
        return EXIT_ERROR
    outdir = Path(out)
    outdir.mkdir(parents=True, exist_ok=True)
    text = kio.write_report({"command": command, **report}, outdir / f"{command}.json")
    for name, content in tables.items():
        (outdir / name).write_text(content)
    stdout.write(text)
    return status


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="kernel-koopman", description=__doc__.split("\n\n")[0])
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--config", required=True, help="JSON run configuration")
    p.add_argument("--out", default=".", help="output directory (default: current)")
    p.add_argument("--seed", type=int, default=0, help="seed for quasi-random probes")
    p.add_argument("--tol", type=float, default=None, help="check tolerance (overrides config)")
    p.add_argument("--reg", type=float, default=None, help="Gram regularization (overrides config)")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.seed < 0:
        print("error: --seed must be nonnegative", file=sys.stderr)
        return EXIT_ERROR
    return run(args.command, args.config, args.out, args.seed, args.tol, args.reg)


if __name__ == "__main__":
    sys.exit(main())
