import json
import subprocess
import sys

import numpy as np
import pytest

from mixedmorrey import cli, oracles
from mixedmorrey.grid import GridSpec, load_grid, sample, save_grid, Constant

BOX = {"kind": "indicator_box", "lo": [0.5, 0.5], "hi": [1.0, 1.0]}
GRID = {"lo": [0, 0], "hi": [2, 2], "h": 0.125}


def run(tmp_path, command, cfg=None, *extra):
    out = tmp_path / "out"
    argv = [command, "--out", str(out), *extra]
    if cfg is not None:
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps(cfg))
        argv += ["--config", str(path)]
    return cli.main(argv), out


def test_norm_indicator_morrey(tmp_path, capsys):
    cfg = {"input": {"function": BOX, "grid": GRID}, "kind": "mixed_morrey", "p": 4, "q": [2, 3],
           "family": "exact"}
    code, out = run(tmp_path, "norm", cfg)
    assert code == 0
    rec = json.loads((out / "norm.json").read_text())
    assert rec["value"] == pytest.approx(0.25 ** 0.25, rel=1e-12)
    echoed = json.loads(capsys.readouterr().out.strip().splitlines()[-1])
    assert echoed["value"] == pytest.approx(rec["value"]) and echoed["argmax_cube"] is not None


def test_norm_zero_and_other_kinds(tmp_path):
    zero = {"input": {"function": {"kind": "zero"}, "grid": GRID}, "kind": "mixed_lebesgue", "p": [2, "inf"]}
    code, out = run(tmp_path, "norm", zero)
    assert code == 0 and json.loads((out / "norm.json").read_text())["value"] == 0
    for extra in ({"kind": "classical_morrey", "p": 4, "q": 2},
                  {"kind": "equivalent_morrey", "p": 4, "q": [2, 3], "eta": 0.5}):
        code, _ = run(tmp_path, "norm", {"input": {"function": BOX, "grid": GRID}, **extra})
        assert code == 0


def test_norm_from_file(tmp_path):
    g = GridSpec.box((0, 0), (1, 1), 0.25)
    path = save_grid(tmp_path / "c.json", sample(Constant(3.0), g))
    code, out = run(tmp_path, "norm", {"input": {"file": str(path)}, "kind": "mixed_lebesgue", "p": [1, 1]})
    assert code == 0 and json.loads((out / "norm.json").read_text())["value"] == pytest.approx(3.0)


def test_error_codes(tmp_path, capsys):
    missing = {"input": {"file": str(tmp_path / "nope.json")}, "kind": "mixed_lebesgue"}
    assert run(tmp_path, "norm", missing)[0] == cli.EXIT_IO
    bad_schema = {"input": {"function": BOX, "grid": GRID}, "kind": "sobolev"}
    assert run(tmp_path, "norm", bad_schema)[0] == cli.EXIT_CONFIG
    inadm = {"input": {"function": BOX, "grid": GRID}, "kind": "mixed_morrey", "p": 1, "q": [2, 3]}
    code, out = run(tmp_path, "norm", inadm)
    assert code == cli.EXIT_ADMISSIBILITY
    err = json.loads((out / "error.json").read_text())["error"]
    assert err["kind"] == "admissibility"
    assert '"error"' in capsys.readouterr().err
    assert run(tmp_path, "norm")[0] == cli.EXIT_CONFIG
    assert cli.main(["frobnicate"]) == cli.EXIT_CONFIG
    (tmp_path / "bad.json").write_text("{not json")
    assert cli.main(["norm", "--config", str(tmp_path / "bad.json"), "--out", str(tmp_path / "o")]) == 2
    assert run(tmp_path, "oracle-dump", None, "--tolerance-scale", "-1")[0] == cli.EXIT_CONFIG


def test_maxop_constant_and_triangle(tmp_path):
    const = {"input": {"function": {"kind": "constant", "value": 2.0}, "grid": GRID}, "op": "hl"}
    code, out = run(tmp_path, "maxop", const)
    assert code == 0 and np.allclose(load_grid(out / "maxop.json").values, 2.0)
    h = 1 / 64
    tri = {"input": {"oracle": "triangle", "grid": {"lo": [-1, -1], "hi": [3, 3], "h": h}},
           "op": "directional", "axis": 1, "format": "csv"}
    code, out = run(tmp_path, "maxop", tri)
    assert code == 0
    g = load_grid(out / "maxop.json")
    table = oracles.triangle_example()
    for x, y in [(0.25, 0.5), (2.0, 0.5), (-0.5, 0.3), (0.7, 0.2)]:
        assert abs(g.at((x, y)) - table.m1(x, y)) <= 2 * h


def test_maxop_bad_axis_order(tmp_path):
    for order in ([1, 1], [1, 2, 3]):
        cfg = {"input": {"function": BOX, "grid": GRID}, "op": "iterated", "axis_order": order}
        assert run(tmp_path, "maxop", cfg)[0] == cli.EXIT_CONFIG


def test_maxop_strong_sandwich(tmp_path):
    cfg = {"input": {"function": BOX, "grid": GRID}, "op": "strong", "mode": "sandwich"}
    code, out = run(tmp_path, "maxop", cfg)
    assert code == 0
    assert np.all(load_grid(out / "maxop_lower.json").values <= load_grid(out / "maxop_upper.json").values)


def test_frac_singular_weights(tmp_path):
    line = {"lo": [-1], "hi": [3], "h": 1 / 64}
    chi = {"kind": "indicator_box", "lo": [0], "hi": [1]}
    code, out = run(tmp_path, "frac", {"input": {"function": chi, "grid": line}, "alpha": 0.5,
                                        "quadrature": "cell-exact"})
    assert code == 0 and load_grid(out / "frac.json").values.max() > 2
    assert run(tmp_path, "frac", {"input": {"function": chi, "grid": line}, "alpha": 2.0})[0] == 4
    code, out = run(tmp_path, "singular", {"input": {"function": chi, "grid": line},
                                            "kernel": {"kind": "cz", "name": "hilbert"}})
    assert code == 0
    code, out = run(tmp_path, "weights", {"weight": {"kind": "constant", "value": 2}, "grid": line,
                                           "constant": "ap", "p": 2, "family": "exact"})
    assert code == 0 and json.loads((out / "weights.json").read_text())["value"] == pytest.approx(1.0)
    code, _ = run(tmp_path, "weights", {"weight": {"kind": "indicator_maximal", "interval": [0, 1],
                                                   "beta": 0.5}, "grid": line, "constant": "a1"})
    assert code == 0


def test_verify(tmp_path, capsys):
    code, out = run(tmp_path, "verify", {"checks": ["identities", "counterexample"], "count": 4})
    assert code == 0
    payload = json.loads((out / "report.json").read_text())
    assert payload["all_passed"] and (out / "report.csv").exists()
    lines = capsys.readouterr().out.splitlines()
    assert lines[-2].startswith("PASS identities") and lines[-1].startswith("PASS counterexample")
    assert run(tmp_path, "verify", {"checks": []})[0] == cli.EXIT_CONFIG
    assert run(tmp_path, "verify", {"checks": ["nope"]})[0] == cli.EXIT_CONFIG


def test_verify_failure_exit(tmp_path):
    code, out = run(tmp_path, "verify", {"checks": ["counterexample"]}, "--tolerance-scale", "1e-6")
    assert code == cli.EXIT_VERIFY
    assert not json.loads((out / "report.json").read_text())["all_passed"]


def test_verify_is_bit_stable(tmp_path):
    cfg = {"checks": ["iterated_maximal_mixed_lebesgue"], "count": 4}
    _, out = run(tmp_path, "verify", cfg)
    first = (out / "report.json").read_bytes()
    _, out = run(tmp_path, "verify", cfg, "--workers", "2")
    assert (out / "report.json").read_bytes() == first


def test_oracle_dump_and_entry_point(tmp_path):
    code, out = run(tmp_path, "oracle-dump")
    assert code == 0 and json.loads((out / "oracles.json").read_text())
    res = subprocess.run([sys.executable, "-m", "mixedmorrey.cli", "oracle-dump", "--out", str(tmp_path / "o2")],
                         capture_output=True, text=True)
    assert res.returncode == 0 and (tmp_path / "o2" / "oracles.json").exists()
