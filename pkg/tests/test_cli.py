import csv
import io
import json
import math

import pytest

from kerrfock.cli import main


def _run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def _csv(text):
    return list(csv.reader(io.StringIO(text)))


def test_dist_csv(capsys):
    code, out, _ = _run(capsys, "dist", "--beta-mag", str(math.sqrt(6)), "--max-n", "6")
    assert code == 0
    rows = _csv(out)
    assert rows[0] == ["n", "probability"]
    assert [r[0] for r in rows[1:]] == [str(n) for n in range(7)]
    assert all(float(rows[1 + n][1]) < 1e-10 for n in (1, 3, 5))


def test_dist_json_both_paths(capsys):
    code, out, _ = _run(capsys, "dist", "--path", "both", "--cutoff", "10", "--port", "2",
                        "--max-n", "4", "--format", "json", "--beta-mag", "1.2")
    assert code == 0
    doc = json.loads(out)
    assert doc["metadata"]["path"] == "both"
    assert doc["metadata"]["cutoff"] == 10
    assert doc["metadata"]["path_residual"] < 1e-10
    assert "tool_version" in doc["metadata"]
    assert [d["n"] for d in doc["data"]] == list(range(5))


def test_sweep_theta_header_and_format(capsys):
    code, out, _ = _run(capsys, "sweep-theta", "--steps", "4")
    assert code == 0
    rows = _csv(out)
    assert rows[0] == ["theta", "mean_n2", "mean_n3", "odd_mass_3", "total_mean", "tail_bound"]
    assert len(rows) == 5
    # 12 significant digits
    assert rows[2][0] == f"{2 * math.pi / 3:.12g}"


def test_sweep_gamma_with_both_paths(capsys):
    code, out, _ = _run(capsys, "sweep-gamma", "--steps", "2", "--path", "both",
                        "--beta-mag", "1", "--cutoff", "15")
    assert code == 0
    assert _csv(out)[0][-1] == "path_residual"


def test_sweep_conservation_failure_exit_code(capsys):
    code, _, err = _run(capsys, "sweep-theta", "--steps", "2", "--cutoff", "5")
    assert code == 2
    assert "verification failure" in err


def test_visibility(capsys):
    code, out, _ = _run(capsys, "visibility", "--gamma3-values", "0", "0.1", "--points", "32")
    assert code == 0
    rows = _csv(out)
    assert rows[0] == ["gamma3", "visibility"]
    assert float(rows[1][1]) > 0.999 > float(rows[2][1])


def test_phase_dist(capsys, tmp_path):
    target = tmp_path / "phase.csv"
    code, out, _ = _run(capsys, "phase-dist", "--points", "8", "--port", "2", "--out", str(target))
    assert code == 0 and out == ""
    rows = _csv(target.read_text())
    assert rows[0] == ["phi", "probability"]
    assert math.fsum(float(r[1]) for r in rows[1:]) == pytest.approx(1.0, abs=1e-10)


def test_verify_quick(capsys):
    code, out, _ = _run(capsys, "verify", "--format", "json", "--seed", "5")
    assert code == 0
    doc = json.loads(out)
    assert doc["metadata"]["passed"] == 1
    assert all(row["passed"] == 1 for row in doc["data"])


def test_verify_quick_csv(capsys):
    code, out, _ = _run(capsys, "verify")
    assert code == 0
    rows = _csv(out)
    assert rows[0] == ["check", "passed", "residual", "tolerance"]
    assert rows[1][0].startswith("parity/")
    assert {r[1] for r in rows[1:]} == {"1"}


def test_usage_errors(capsys):
    assert _run(capsys, "dist", "--transmission", "1.5")[0] == 1
    assert _run(capsys, "figures")[0] == 1
    assert _run(capsys, "sweep-theta", "--steps", "1")[0] == 1
    assert _run(capsys, "dist", "--workers", "0")[0] == 1
    with pytest.raises(SystemExit) as exc:
        main(["no-such-command"])
    assert exc.value.code == 1
    with pytest.raises(SystemExit) as exc:
        main(["verify", "--seed", "-3"])
    assert exc.value.code == 1


def test_resource_bound_exit_code(capsys):
    assert _run(capsys, "dist", "--cutoff", "500")[0] == 3
    assert _run(capsys, "dist", "--beta-mag", "40")[0] == 3
