import csv
import json

import pytest

from cauchyfourier.cli import KINDS, load_config, main, SchemaError


def write(path, obj):
    path.write_text(obj if isinstance(obj, str) else json.dumps(obj, indent=1))
    return str(path)


def read_rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_clark_check(tmp_path):
    cfg = write(tmp_path / "c.json", {"kind": "clark-check"})
    assert main(["run", cfg, "--out", str(tmp_path / "out")]) == 0
    summary = json.loads((tmp_path / "out" / "summary.json").read_text())
    assert summary["max_residual"] <= 1e-9
    manifest = json.loads((tmp_path / "out" / "manifest.json").read_text())
    assert manifest["config"]["atoms"] and manifest["version"]


def test_sa_run_default(tmp_path):
    cfg = write(tmp_path / "s.json", {"kind": "sa-run"})
    assert main(["run", cfg, "--out", str(tmp_path / "out")]) == 0
    rows = read_rows(tmp_path / "out" / "results.csv")
    assert float(rows[-1]["K_measure"]) >= 0.9
    K = json.loads((tmp_path / "out" / "K.json").read_text())
    assert K["lifted"]["m"]


def test_empty_config(tmp_path):
    assert main(["run", write(tmp_path / "e.json", "{}"), "--out", str(tmp_path / "o")]) == 2


def test_bad_json_reports_line(tmp_path, capsys):
    path = write(tmp_path / "b.json", '{\n  "kind": "conjugate",\n  "x_max": ,\n}')
    assert main(["run", path, "--out", str(tmp_path / "o")]) == 2
    assert "b.json:3:" in capsys.readouterr().err


def test_schema_violation_reports_line(tmp_path, capsys):
    path = write(tmp_path / "b.json", '{\n  "kind": "riesz-diag",\n  "M": "big"\n}')
    assert main(["run", path, "--out", str(tmp_path / "o")]) == 2
    assert "b.json:3:" in capsys.readouterr().err


def test_unknown_kind(tmp_path):
    with pytest.raises(SchemaError):
        load_config(write(tmp_path / "k.json", {"kind": "nope"}))


def test_precondition_exit_code(tmp_path):
    cfg = write(tmp_path / "m.json", {"kind": "majorant", "psi": {"family": "power", "params": [2]}})
    assert main(["run", cfg, "--out", str(tmp_path / "o")]) == 3


def test_deterministic_csv(tmp_path):
    cfg = write(tmp_path / "b.json", {"kind": "bloch-check", "count": 5, "degree": 32, "seed": 7})
    main(["run", cfg, "--out", str(tmp_path / "a")])
    main(["run", cfg, "--out", str(tmp_path / "b")])
    assert (tmp_path / "a" / "results.csv").read_bytes() == (tmp_path / "b" / "results.csv").read_bytes()


def test_grid_override_in_manifest(tmp_path):
    cfg = write(tmp_path / "r.json", {"kind": "riesz-diag", "frequencies": [3, 9], "amplitudes": [0.5, 0.5]})
    assert main(["run", cfg, "--out", str(tmp_path / "o"), "--grid-m", "1024"]) == 0
    manifest = json.loads((tmp_path / "o" / "manifest.json").read_text())
    assert manifest["config"]["M"] == 1024 and manifest["grid"]["grid_m_override"] == 1024


@pytest.mark.parametrize("kind", KINDS)
def test_every_kind_has_defaults(kind, tmp_path):
    cfg = load_config(write(tmp_path / "k.json", {"kind": kind}))
    assert cfg["kind"] == kind and "seed" in cfg


class TestReport:
    def _run_sa(self, tmp_path, name, M=None):
        cfg = {"kind": "sa-run", "name": name, "delta": 0.9, "gamma_seq": [0.5, 0.25], "delta_seq": [0.18, 0.18]}
        if M:
            cfg["M"] = M
        out = tmp_path / name
        assert main(["run", write(tmp_path / f"{name}.json", cfg), "--out", str(out)]) == 0
        return str(out)

    def test_two_runs_concatenate(self, tmp_path):
        a, b = self._run_sa(tmp_path, "a"), self._run_sa(tmp_path, "b")
        merged = tmp_path / "merged.csv"
        assert main(["report", a, b, "--out", str(merged)]) == 0
        rows = read_rows(merged)
        l1w = [r for r in rows if r["metric"] == "l1w_norm"]
        assert len(l1w) == 2 * 2
        assert {r["experiment"] for r in rows} == {"a", "b"}

    def test_single_run_pass_through(self, tmp_path):
        a = self._run_sa(tmp_path, "a")
        merged = tmp_path / "merged.csv"
        assert main(["report", a, "--out", str(merged)]) == 0
        src = read_rows(tmp_path / "a" / "results.csv")
        rows = read_rows(merged)
        assert len(rows) == len(src) * (len(src[0]) - 1)

    def test_different_grids_tagged(self, tmp_path):
        dirs = []
        for M in (1024, 4096):
            cfg = {"kind": "riesz-diag", "name": f"r{M}", "frequencies": [3, 9], "amplitudes": [0.5, 0.5], "M": M}
            out = tmp_path / f"r{M}"
            assert main(["run", write(tmp_path / f"r{M}.json", cfg), "--out", str(out)]) == 0
            dirs.append(str(out))
        merged = tmp_path / "merged.csv"
        assert main(["report", *dirs, "--out", str(merged)]) == 0
        tags = {(r["experiment"], r["grid_M"]) for r in read_rows(merged)}
        assert tags == {("r1024", "1024"), ("r4096", "4096")}

    def test_missing_input(self, tmp_path):
        assert main(["report", str(tmp_path / "nothing"), "--out", str(tmp_path / "m.csv")]) == 2
