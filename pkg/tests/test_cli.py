import csv
import io
import json
import subprocess
import sys

import numpy as np
import pytest

from gnb import distribution as dist
from gnb.cli import main
from gnb.distribution import DistParams


def run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def parse_csv(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_pmf_csv_rows(capsys):
    code, out, _ = run(["pmf", "--beta", "1", "--m", "0", "--lambda", "0.5", "--coverage", "0.9"], capsys)
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "k,pmf,cdf"
    assert lines[1] == "0,0.25,0.25"
    rows = parse_csv(out)
    assert float(rows[-1]["cdf"]) >= 0.9
    assert "\r" not in out


def test_pmf_strict_constraint(capsys):
    code, out, err = run(["pmf", "--beta", "1.5", "--m", "1", "--lambda", "0.3"], capsys)
    assert code == 2
    assert out == ""
    assert err.strip() == "error: 2(beta-m) must exceed 1"


def test_pmf_json_is_bitwise(capsys):
    code, out, _ = run(["pmf", "--beta", "2.5", "--m", "1", "--lambda", "0.25", "--format", "json"], capsys)
    assert code == 0
    rows = json.loads(out)
    params = DistParams(0.25, 2.5, 1)
    table = dist.pmf_table(params)
    assert [r["k"] for r in rows] == table.k.tolist()
    assert [r["pmf"] for r in rows] == table.pmf.tolist()
    assert [r["pmf"] for r in rows] == dist.pmf(params, np.array([r["k"] for r in rows])).tolist()


@pytest.mark.parametrize("precision", [4, 8, 12, 15])
def test_csv_precision_round_trip(capsys, precision):
    argv = ["pmf", "--beta", "3.75", "--m", "2", "--lambda", "0.6", "--precision", str(precision)]
    code, out, _ = run(argv, capsys)
    assert code == 0
    params = DistParams(0.6, 3.75, 2)
    for row in parse_csv(out):
        value = dist.pmf(params, int(row["k"]))
        assert abs(float(row["pmf"]) - value) <= 10.0 ** (-precision + 1) * abs(value)


def test_z_coordinates(capsys):
    _, by_z, _ = run(["pmf", "--beta", "2.5", "--m", "1", "--z-re", "0.3", "--z-im", "0.4"], capsys)
    _, by_lam, _ = run(["pmf", "--beta", "2.5", "--m", "1", "--lambda", "0.25"], capsys)
    rows_z, rows_l = parse_csv(by_z), parse_csv(by_lam)
    assert len(rows_z) == len(rows_l)
    for a, b in zip(rows_z, rows_l):
        assert float(a["pmf"]) == pytest.approx(float(b["pmf"]), rel=1e-13)
    code, _, err = run(["pmf", "--beta", "2.5", "--m", "1", "--lambda", "0.25", "--z-re", "0.5"], capsys)
    assert code == 2 and err.startswith("error:")


def test_missing_parameter(capsys):
    code, _, err = run(["pmf", "--beta", "2.5", "--m", "1"], capsys)
    assert code == 2
    assert err.strip() == "error: --lambda is required"


def test_convergence_exit(capsys, monkeypatch):
    monkeypatch.setenv("GNB_MAX_TERMS", "10")
    code, out, err = run(["pmf", "--beta", "2.5", "--m", "1", "--lambda", "0.5"], capsys)
    assert code == 3
    assert out == ""
    assert len(err.strip().splitlines()) == 1


def test_classify_single(capsys):
    code, out, _ = run(["classify", "--beta", "2.5", "--m", "1", "--lambda", "0.1"], capsys)
    assert code == 0
    (row,) = parse_csv(out)
    assert row["verdict"] == "SubPoissonian"
    assert float(row["critical_lambda"]) == pytest.approx(2 / 7, rel=1e-11)
    assert float(row["critical_radius"]) == pytest.approx((2 / 7) ** 0.5, rel=1e-11)
    _, out, _ = run(["classify", "--beta", "2.5", "--m", "0", "--lambda", "0.5"], capsys)
    assert parse_csv(out)[0]["verdict"] == "SuperPoissonian"


@pytest.mark.parametrize("method", ["closed", "pgf", "series"])
def test_classify_scan_single_flip(capsys, method):
    code, out, _ = run(["classify", "--scan", "9", "--beta", "2.5", "--m", "1", "--method", method], capsys)
    assert code == 0
    rows = parse_csv(out)
    assert [float(r["lambda"]) for r in rows] == pytest.approx([i / 10 for i in range(1, 10)])
    verdicts = [r["verdict"] for r in rows]
    flips = sum(a != b for a, b in zip(verdicts, verdicts[1:]))
    assert flips == 1
    assert verdicts[0] == "SubPoissonian" and verdicts[-1] == "SuperPoissonian"


def test_classify_scan_rejects_lambda(capsys):
    code, _, _ = run(["classify", "--scan", "5", "--beta", "2.5", "--m", "1", "--lambda", "0.3"], capsys)
    assert code == 2


def test_moments_json(capsys):
    code, out, _ = run(["moments", "--beta", "2.5", "--m", "1", "--lambda", "0.3", "--format", "json"], capsys)
    assert code == 0
    (row,) = json.loads(out)
    params = DistParams(0.3, 2.5, 1)
    mean, var = dist.moments(params)
    assert row["mean"] == mean and row["variance"] == var
    assert row["variance_closed"] == dist.variance_closed(params)
    assert row["q_closed"] == dist.mandel_q(params)


def test_moments_degenerate_json_null(capsys):
    code, out, _ = run(["moments", "--beta", "2.5", "--m", "1", "--lambda", "0", "--format", "json"], capsys)
    assert code == 0
    (row,) = json.loads(out)
    assert row["q"] is None and row["mean"] == 1.0


def test_basis(capsys):
    code, out, _ = run(["basis", "--beta", "2.5", "--m", "1", "--lambda", "0.3", "--k-max", "6", "--format", "json"], capsys)
    assert code == 0
    rows = json.loads(out)
    assert [r["k"] for r in rows] == list(range(7))
    params = DistParams(0.3, 2.5, 1)
    for r in rows:
        assert r["weight"] == pytest.approx(dist.pmf(params, r["k"]), rel=1e-12)


def test_validate_jacobi(capsys):
    code, out, _ = run(["validate", "--suite", "jacobi"], capsys)
    assert code == 0
    rows = parse_csv(out)
    assert all(r["passed"] == "true" for r in rows)
    assert {r["check_name"] for r in rows} >= {"jacobi_identity"}


def test_validate_unknown_suite(capsys):
    code, out, err = run(["validate", "--suite", "bogus"], capsys)
    assert code == 2
    assert out == ""
    assert err.startswith("error: unknown suite")


def test_validate_all_reports_stated_claims(capsys):
    code, out, _ = run(["validate", "--suite", "all", "--format", "json"], capsys)
    reports = json.loads(out)
    failed = {r["check_name"] for r in reports if not r["passed"]}
    # only the audits of the stated variance, second moment and Mandel expressions fail
    assert failed == {"variance_closed_claim", "second_moment_claim", "mandel_q"}
    assert code == 1
    for r in reports:
        assert r["passed"] == (r["max_error"] <= r["tolerance"])


def test_usage_errors_exit_2(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["pmf", "--format", "xml"])
    assert exc.value.code == 2
    assert run(["pmf", "--beta", "1", "--m", "0", "--lambda", "0.5", "--precision", "0"], capsys)[0] == 2


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "gnb", "pmf", "--beta", "1", "--m", "0", "--lambda", "0.5", "--coverage", "0.5"],
        capture_output=True,
        text=True,
        check=False,
    )
    assert proc.returncode == 0
    assert proc.stdout.splitlines()[:2] == ["k,pmf,cdf", "0,0.25,0.25"]
