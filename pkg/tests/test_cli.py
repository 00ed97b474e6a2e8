import json

import numpy as np
import pytest

from bragg.cli import run
from bragg.comb import read_comb
from bragg.config import RunConfig, build_config, load_config, parse_flat
from bragg.errors import ValidationError


def test_parse_flat():
    vals = parse_flat("# comment\nvanhove.sizes = 10 20 40\n\nscheme.preset = fibonacci  # trailing\n")
    assert vals == {"vanhove.sizes": "10 20 40", "scheme.preset": "fibonacci"}
    with pytest.raises(ValidationError):
        parse_flat("no equals sign")


def test_build_config_and_hash():
    cfg = build_config({"vanhove.sizes": "10 20 40", "run.seed": "7"})
    assert cfg.sizes == (10, 20, 40) and cfg.seed == 7
    again = build_config({"run.seed": "7", "vanhove.sizes": "10,20,40"})
    assert cfg.hash() == again.hash()
    assert cfg.hash() != build_config({"vanhove.sizes": "10 20 40", "run.seed": "8"}).hash()


@pytest.mark.parametrize("values", [
    {"vanhove.sizes": "40 20 10"},
    {"vanhove.L0": "-1"},
    {"freq.lo": "5", "freq.hi": "1"},
    {"nonsense.key": "1"},
    {"scheme.colour": "red"},
    {"thresholds.delta_rel": "abc"},
])
def test_config_rejects(values):
    with pytest.raises(ValidationError):
        build_config(values)


def test_scheme_file_with_inline_override(tmp_path):
    (tmp_path / "s.txt").write_text("preset = fibonacci\nweight.kind = tent\n")
    (tmp_path / "run.cfg").write_text("scheme.path = s.txt\nscheme.weight.height = 2\n")
    cfg = load_config(tmp_path / "run.cfg")
    assert cfg.scheme == {"preset": "fibonacci", "weight.kind": "tent", "weight.height": "2"}


def test_generate_density_halves(tmp_path):
    out = tmp_path / "fib.tsv"
    assert run(["generate", "--preset", "fibonacci", "--weight", "tent", "--interval", "0", "1000",
                "--out", str(out)]) == 0
    c = read_comb(out)
    x = c.x
    left = np.sum(x <= 500) / 500
    right = np.sum(x > 500) / 500
    assert abs(left - right) <= 0.02 * right
    assert out.read_text().startswith("# config_hash ")


def test_diffract_and_plot(tmp_path):
    comb = tmp_path / "z.tsv"
    assert run(["generate", "--preset", "integer", "--out", str(comb)]) == 0
    spec = tmp_path / "z.csv"
    assert run(["diffract", str(comb), "--coeff-bound", "10", "--out", str(spec)]) == 0
    lines = spec.read_text().splitlines()
    assert lines[0].startswith("# config_hash")
    assert lines[2] == "k_exact,k_float,I_n50,I_n100,I_n200,I_n400,class,I_inf"
    report = json.loads(spec.with_suffix(".json").read_text())
    assert report["bragg_count"] == 11 and report["max_gap"] == 1.0
    svg = tmp_path / "z.svg"
    assert run(["plot", str(spec), "--out", str(svg)]) == 0
    assert "<svg" in svg.read_text()


def test_autocorr_and_decompose(tmp_path):
    comb = tmp_path / "z.tsv"
    run(["generate", "--preset", "integer", "--out", str(comb)])
    ac = tmp_path / "ac.csv"
    assert run(["autocorr", str(comb), "--radius", "3", "--out", str(ac)]) == 0
    rows = [r for r in ac.read_text().splitlines() if not r.startswith("#")]
    assert rows[0] == "z_exact,z_float,value_real,value_imag,n,volume"
    assert rows[4].split(",")[:3] == ["0", "0.0", "1.00125"]
    dec = tmp_path / "dec.csv"
    assert run(["decompose", str(comb), "--out", str(dec)]) == 0
    assert "gamma_S_real" in dec.read_text()


def test_exit_codes(tmp_path):
    empty = tmp_path / "empty.tsv"
    empty.write_text("# window -400 400\n# m 0\n")
    assert run(["diffract", str(empty)]) == 2
    assert run(["bogus"]) == 2
    assert run(["verify", "--theorem", "nope"]) == 2
    assert run(["diffract", str(tmp_path / "missing.tsv")]) == 2
    assert run(["generate", "--preset", "integer", "--interval", "0", "1e9",
                "--out", str(tmp_path / "big.tsv")]) == 3


def test_verify_failure_exit_code(tmp_path, monkeypatch):
    from bragg import cli
    from bragg.verify import VerifyReport

    def failing(*a, **k):
        r = VerifyReport("L4", "forced")
        r.add("x", False, 1.0, 0.0)
        return [r]

    monkeypatch.setattr(cli, "run_suite", failing)
    assert run(["verify", "--theorem", "L4", "--out", str(tmp_path / "r.json")]) == 1


def test_bad_threads_env(tmp_path, monkeypatch):
    monkeypatch.setenv("BRAGG_THREADS", "many")
    assert run(["verify", "--theorem", "L4", "--out", str(tmp_path / "r.json")]) == 2


def test_verify_outputs_identical(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert run(["verify", "--theorem", "L4", "--preset", "fibonacci", "--seed", "3", "--out", str(a)]) == 0
    assert run(["verify", "--theorem", "L4", "--preset", "fibonacci", "--seed", "3", "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    doc = json.loads(a.read_text())
    assert doc["config_hash"] == RunConfig(scheme={"preset": "fibonacci"}, seed=3).hash()
