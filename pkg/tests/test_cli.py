import csv
import json
from pathlib import Path

import numpy as np
import pytest

from circlebops.bops import build_system
from circlebops.cli import main, parse_weight_spec
from circlebops.moments import closed_form_table


STRICT_SPEC = {
    "singularities": [
        {"z": [0, 0], "rho": [-1, 0]},
        {"z": [2, 0], "rho": [0.5, 0]},
        {"z": [3, 0], "rho": [1.0 / 3.0, 0]},
    ],
    "strict": True,
}

LAURENT_SPEC = {
    "singularities": [
        {"z": [0, 0], "rho": [-1, 0]},
        {"z": [-1, 0], "rho": [2, 0]},
    ],
    "strict": False,
}

RAW_MOMENTS_SPEC = {
    "moments": [[k, 0.0, 0.0] for k in range(-10, -1)]
    + [[-1, 1.0, 0.0], [0, 2.0, 0.0], [1, 1.0, 0.0]]
    + [[k, 0.0, 0.0] for k in range(2, 11)]
}

TRAJ_SPEC = {"j": 2, "path": "linear", "from": [2, 0], "to": [2.1, 0], "t0": 0.0, "t1": 0.1}


def write(tmp_path: Path, name: str, payload) -> str:
    path = tmp_path / name
    path.write_text(json.dumps(payload), encoding="utf-8")
    return str(path)


class TestParseWeightSpec:
    def test_singularity_form_round_trips(self, tmp_path):
        weight, table = parse_weight_spec(write(tmp_path, "w.json", STRICT_SPEC))
        assert table is None
        assert weight.m == 3
        assert weight.singularities[1].location == 2

    def test_raw_moments_form(self, tmp_path):
        weight, table = parse_weight_spec(write(tmp_path, "m.json", RAW_MOMENTS_SPEC))
        assert weight is None
        assert table.moment(0) == 2.0

    def test_raw_moments_reproduce_closed_form_system(self, tmp_path):
        _, table = parse_weight_spec(write(tmp_path, "m.json", RAW_MOMENTS_SPEC))
        via_raw = build_system(table, 6)
        via_closed = build_system(closed_form_table({-1: 1, 0: 2, 1: 1}, 10), 6)
        for a, b in zip(via_raw.levels, via_closed.levels):
            assert np.max(np.abs(a.c - b.c)) < 1e-12
            assert abs(a.kappa - b.kappa) < 1e-12

    def test_ambiguous_spec_rejected(self, tmp_path):
        payload = dict(STRICT_SPEC)
        payload["moments"] = [[0, 1.0, 0.0]]
        path = write(tmp_path, "both.json", payload)
        from circlebops.errors import CircleBopsError

        with pytest.raises(CircleBopsError):
            parse_weight_spec(path)


class TestExitCodes:
    def test_verify_all_laurent_passes(self, tmp_path):
        weight = write(tmp_path, "w.json", LAURENT_SPEC)
        code = main(
            ["verify-all", "--weight", weight, "--n", "3", "--out", str(tmp_path / "out")]
        )
        assert code == 0
        report = json.loads((tmp_path / "out" / "verify_report.json").read_text())
        assert report["passed"] is True
        assert report["schema"] == "v1"

    def test_malformed_json_exits_two(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{nope", encoding="utf-8")
        assert main(["build", "--weight", str(path), "--out", str(tmp_path)]) == 2

    def test_existence_failure_exits_two(self, tmp_path):
        # all-ones moments: I^0_2 = 0
        payload = {"moments": [[k, 1.0, 0.0] for k in range(-8, 9)]}
        weight = write(tmp_path, "degen.json", payload)
        assert main(["build", "--weight", weight, "--n", "4", "--out", str(tmp_path)]) == 2

    def test_window_too_small_exits_two(self, tmp_path):
        payload = {"moments": [[-1, 1.0, 0.0], [0, 2.0, 0.0], [1, 1.0, 0.0]]}
        weight = write(tmp_path, "small.json", payload)
        assert main(["build", "--weight", weight, "--n", "4", "--out", str(tmp_path)]) == 2

    def test_coeffs_on_relaxed_weight_exits_two(self, tmp_path):
        weight = write(tmp_path, "w.json", LAURENT_SPEC)
        assert main(["coeffs", "--weight", weight, "--out", str(tmp_path)]) == 2

    def test_cmd_flag_alias(self, tmp_path):
        weight = write(tmp_path, "w.json", LAURENT_SPEC)
        code = main(
            ["--cmd", "moments", "--weight", weight, "--n", "3", "--out", str(tmp_path / "m")]
        )
        assert code == 0
        with open(tmp_path / "m" / "moments.csv", newline="") as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == ["k", "re", "im"]


class TestArtifacts:
    def test_moments_csv_values(self, tmp_path):
        weight = write(tmp_path, "w.json", LAURENT_SPEC)
        main(["moments", "--weight", weight, "--n", "3", "--out", str(tmp_path / "m")])
        with open(tmp_path / "m" / "determinants.csv", newline="") as fh:
            rows = {(r[0], r[1]): complex(float(r[2]), float(r[3])) for r in list(csv.reader(fh))[1:]}
        assert abs(rows[("0", "3")] - 4.0) < 1e-9
        assert abs(rows[("1", "3")] - 1.0) < 1e-9

    def test_build_outputs_system_json(self, tmp_path):
        weight = write(tmp_path, "w.json", LAURENT_SPEC)
        main(["build", "--weight", weight, "--n", "4", "--out", str(tmp_path / "b")])
        system = json.loads((tmp_path / "b" / "system.json").read_text())
        lev1 = system["levels"][1]
        assert abs(lev1["r"][0] + 0.5) < 1e-10
        assert system["method"] == "both"

    def test_deform_flow_csv(self, tmp_path):
        weight = write(tmp_path, "w.json", STRICT_SPEC)
        traj = write(tmp_path, "t.json", TRAJ_SPEC)
        code = main(
            [
                "deform", "--weight", weight, "--trajectory", traj,
                "--n", "2", "--steps", "32", "--out", str(tmp_path / "d"),
            ]
        )
        assert code == 0
        with open(tmp_path / "d" / "flow.csv", newline="") as fh:
            rows = list(csv.reader(fh))
        assert len(rows) == 34  # header + 33 grid points
        report = json.loads((tmp_path / "d" / "deform_report.json").read_text())
        assert report["passed"] is True


class TestDeterminism:
    def test_verify_all_reports_identical(self, tmp_path):
        weight = write(tmp_path, "w.json", STRICT_SPEC)
        for sub in ("r1", "r2"):
            code = main(
                [
                    "verify-all", "--weight", weight, "--n", "2",
                    "--seed", "11", "--out", str(tmp_path / sub),
                ]
            )
            assert code == 0
        for name in (
            "verify_report.json",
            "identity_report.json",
            "coeffs_report.json",
            "matrix_report.json",
            "rhp_report.json",
        ):
            a = (tmp_path / "r1" / name).read_bytes()
            b = (tmp_path / "r2" / name).read_bytes()
            assert a == b, name


class TestIdentityFailureExit:
    def test_impossible_tolerance_exits_one(self, tmp_path):
        weight_path = tmp_path / "w.json"
        weight_path.write_text(json.dumps(LAURENT_SPEC), encoding="utf-8")
        code = main(
            [
                "build", "--weight", str(weight_path), "--n", "4",
                "--tol", "1e-9", "--out", str(tmp_path / "out"),
            ]
        )
        assert code == 1  # residuals cannot beat a 1e-18 ceiling

    def test_validation_report_emitted(self, tmp_path):
        weight_path = tmp_path / "w.json"
        weight_path.write_text(json.dumps(STRICT_SPEC), encoding="utf-8")
        main(["build", "--weight", str(weight_path), "--n", "3", "--out", str(tmp_path / "v")])
        report = json.loads((tmp_path / "v" / "validation_report.json").read_text())
        assert report["passed"] is True
        assert any(
            c["name"] == "exponents_not_nonnegative_integers" for c in report["conditions"]
        )
