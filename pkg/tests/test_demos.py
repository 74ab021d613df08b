import io
import json
import runpy
from pathlib import Path

import pytest

from kernel_koopman import cli

DEMOS = Path(__file__).resolve().parent.parent / "demos"

CONFIGS = [
    ("gram", "gram.json", 0),
    ("norm-bound", "norm-bound-isometry.json", 0),
    ("norm-bound", "norm-bound-disc.json", 0),
    ("pf-project", "spectrum-linear.json", 0),
    ("spectrum", "spectrum-linear.json", 0),
    ("spectrum", "spectrum-polynomial.json", 0),
    ("growth-bound", "growth-bound.json", 0),
    ("check-invariant", "check-invariant.json", 0),
    ("check-symmetry", "check-symmetry-violation.json", 2),
    ("check-factor", "check-factor.json", 0),
    ("check-conjugacy", "check-conjugacy.json", 0),
    ("pathint", "pathint.json", 0),
    ("generator-check", "generator-check.json", 0),
    ("lyapunov", "lyapunov.json", 0),
    ("transport", "transport.json", 0),
    ("repmatrix", "repmatrix-discrete.json", 0),
    ("repmatrix", "repmatrix-linear.json", 0),
]


@pytest.mark.parametrize("command, name, status", CONFIGS)
def test_shipped_configs(tmp_path, command, name, status):
    buf = io.StringIO()
    assert cli.run(command, DEMOS / "configs" / name, tmp_path, stdout=buf) == status
    assert json.loads(buf.getvalue())["command"] == command


def test_every_config_is_exercised():
    shipped = {p.name for p in (DEMOS / "configs").glob("*.json")}
    assert shipped == {name for _, name, _ in CONFIGS}


@pytest.mark.parametrize("script", sorted(p.name for p in DEMOS.glob("*.py")))
def test_demo_script_runs(script, capsys):
    runpy.run_path(str(DEMOS / script), run_name="__main__")
    assert capsys.readouterr().out
