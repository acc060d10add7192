import csv
import io
import json
import math
import subprocess
import sys

import pytest

from weightinit.cli import main


def invoke(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def table(text):
    lines = [ln for ln in text.splitlines() if not ln.startswith("#")]
    return list(csv.DictReader(io.StringIO("\n".join(lines))))


def metadata(text):
    return dict(ln[2:].split("=", 1) for ln in text.splitlines() if ln.startswith("# "))


class TestInit:
    def test_tanh(self, capsys):
        code, out, _ = invoke(capsys, "init", "--activation", "tanh", "--width", "100")
        assert code == 0
        (row,) = table(out)
        assert float(row["weight_stddev"]) == pytest.approx(0.1, rel=1e-15)
        assert row["engine"] == "linearized"

    def test_relu(self, capsys):
        _, out, _ = invoke(capsys, "init", "--activation", "relu", "--width", "100")
        (row,) = table(out)
        assert float(row["weight_variance"]) == pytest.approx(2 / 100, rel=1e-12)
        assert row["engine"] == "relu_exact"

    def test_identity_width_one(self, capsys):
        _, out, _ = invoke(capsys, "init", "--activation", "identity", "--width", "1")
        assert float(table(out)[0]["weight_variance"]) == 1.0

    def test_unknown_activation(self, capsys):
        code, _, err = invoke(capsys, "init", "--activation", "swish", "--width", "10")
        assert code == 2
        assert "swish" in err

    def test_custom_file(self, capsys, tmp_path):
        path = tmp_path / "act.json"
        path.write_text(json.dumps({"name": "lin", "samples": [[-2, -4], [2, 4]]}))
        _, out, _ = invoke(capsys, "init", "--activation", str(path), "--width", "4")
        (row,) = table(out)
        assert row["activation"] == "lin"
        assert float(row["weight_variance"]) == pytest.approx(1 / 16)

    def test_bad_width_is_usage_error(self, capsys):
        with pytest.raises(SystemExit) as info:
            main(["init", "--activation", "tanh", "--width", "0"])
        assert info.value.code == 2

    def test_json_layout(self, capsys):
        _, out, _ = invoke(capsys, "--format", "json", "init", "--activation", "sigmoid", "--width", "100")
        doc = json.loads(out)
        assert set(doc) == {"command", "parameters", "results", "tool_version"}
        assert doc["command"] == "init"
        assert doc["results"][0]["weight_stddev"] == pytest.approx(0.35777, rel=1e-4)


class TestPropagate:
    def test_relu_xavier_tail(self, capsys):
        _, out, _ = invoke(
            capsys, "propagate", "--activation", "relu", "--width", "100", "--depth", "31", "--weight-variance", "xavier"
        )
        rows = table(out)
        assert len(rows) == 31
        # row 31 holds the output of the 30th ReLU layer
        assert float(rows[-1]["variance"]) == pytest.approx(6.33e-10, rel=0.01)
        assert float(rows[22]["variance"]) == pytest.approx(1.62e-7, rel=0.01)

    def test_tanh_thirds(self, capsys):
        _, out, _ = invoke(
            capsys, "propagate", "--activation", "tanh", "--width", "10", "--depth", "5",
            "--weight-variance", repr(1 / 30), "--engine", "linearized",
        )
        variances = [float(r["variance"]) for r in table(out)]
        assert variances == pytest.approx([1, 1 / 3, 1 / 9, 1 / 27, 1 / 81], rel=1e-12)

    def test_depth_one(self, capsys):
        _, out, _ = invoke(capsys, "propagate", "--activation", "sigmoid", "--width", "10", "--depth", "1")
        (row,) = table(out)
        assert (row["layer"], float(row["mean"]), float(row["variance"])) == ("1", 0.0, 1.0)

    def test_incompatible_engine(self, capsys):
        code, _, err = invoke(capsys, "propagate", "--activation", "relu", "--width", "10", "--depth", "3", "--engine", "linearized")
        assert code == 2
        assert "linearized" in err

    def test_overflow_exit(self, capsys):
        code, _, err = invoke(
            capsys, "propagate", "--activation", "identity", "--width", "10", "--depth", "100", "--weight-variance", "1e100"
        )
        assert code == 3
        assert "layer" in err

    def test_csv_and_json_agree(self, capsys):
        argv = ["propagate", "--activation", "tanh", "--width", "64", "--depth", "6", "--engine", "quadrature"]
        _, out_csv, _ = invoke(capsys, *argv)
        _, out_json, _ = invoke(capsys, "--format", "json", *argv)
        rows = table(out_csv)
        results = json.loads(out_json)["results"]
        for r, j in zip(rows, results):
            for key in ("mean", "variance", "preact_variance"):
                assert float(r[key]) == j[key]

    def test_output_file(self, capsys, tmp_path):
        path = tmp_path / "p.csv"
        code, out, _ = invoke(capsys, "propagate", "--activation", "relu", "--width", "8", "--depth", "3", "--output", str(path))
        assert code == 0 and out == ""
        text = path.read_bytes()
        assert text.startswith(b"layer,mean,variance,preact_variance\n")
        assert b"\r\n" not in text


class TestSimulate:
    def test_he_relative_error(self, capsys):
        code, out, _ = invoke(
            capsys, "simulate", "--activation", "relu", "--width", "512", "--depth", "10",
            "--weight-variance", "he", "--trials", "200", "--seed", "7",
        )
        assert code == 0
        rows = table(out)
        assert len(rows) == 10
        for row in rows:
            assert float(row["rel_error"]) < 0.10

    def test_uniform_xavier_half_width(self, capsys):
        code, out, _ = invoke(
            capsys, "--format", "json", "simulate", "--activation", "tanh", "--width", "128", "--depth", "5",
            "--weights", "uniform", "--half-width", "xavier", "--trials", "60", "--seed", "3",
        )
        assert code == 0
        doc = json.loads(out)
        assert doc["parameters"]["weight_variance"] == pytest.approx(1 / (3 * 128))
        assert doc["parameters"]["engine"] == "quadrature"
        pred = [r["pred_variance"] for r in doc["results"]]
        assert all(b < a for a, b in zip(pred, pred[1:]))
        for r in doc["results"]:
            assert r["rel_error"] < 0.05

    @pytest.mark.parametrize(
        "extra",
        [
            ["--half-width", "xavier"],
            ["--weights", "uniform", "--half-width", "0.1", "--weight-variance", "0.01"],
            ["--weights", "uniform", "--half-width", "wide"],
            ["--weight-variance", "-1"],
            ["--engine", "relu_exact"],
        ],
    )
    def test_invalid_flags(self, capsys, extra):
        code, _, _ = invoke(capsys, "simulate", "--activation", "tanh", "--width", "8", "--depth", "2", "--trials", "2", *extra)
        assert code == 2

    def test_overflow_exit(self, capsys):
        code, out, err = invoke(
            capsys, "simulate", "--activation", "identity", "--width", "16", "--depth", "6",
            "--weight-variance", "1e150", "--trials", "2", "--engine", "linearized",
        )
        assert code == 3
        assert "layer" in err
        rows = table(out)
        assert any(r["overflow"] == "true" for r in rows)

    def test_repeat_is_byte_identical(self):
        argv = [sys.executable, "-m", "weightinit", "simulate", "--activation", "relu", "--width", "64",
                "--depth", "5", "--weight-variance", "xavier", "--trials", "20", "--seed", "11"]
        first = subprocess.run(argv, capture_output=True, check=True).stdout
        second = subprocess.run(argv, capture_output=True, check=True).stdout
        assert first == second
        assert first.startswith(b"layer,act_mean,")


class TestPdf:
    def test_bimodal(self, capsys):
        _, out, _ = invoke(capsys, "pdf", "--u", "2", "--grid", "1001")
        rows = [(float(r["y"]), float(r["density"])) for r in table(out)]
        centre = min(rows, key=lambda r: abs(r[0]))[1]
        edge = [d for y, d in rows if abs(y) > 0.99]
        assert edge and min(edge) > centre
        assert metadata(out)["modes"] == "2"

    def test_unimodal(self, capsys):
        _, out, _ = invoke(capsys, "pdf", "--u", "0.2")
        rows = [(float(r["y"]), float(r["density"])) for r in table(out)]
        y_max = max(rows, key=lambda r: r[1])[0]
        assert y_max == pytest.approx(0.0, abs=1e-12)

    @pytest.mark.parametrize("u", ["0.1", "1", "5"])
    def test_integral_metadata(self, capsys, u):
        _, out, _ = invoke(capsys, "pdf", "--u", u)
        assert float(metadata(out)["integral"]) == pytest.approx(1.0, abs=1e-4)

    def test_saturation_metadata(self, capsys):
        _, out, _ = invoke(capsys, "--format", "json", "pdf", "--u", "1", "--threshold", "0.9", "--grid", "11")
        doc = json.loads(out)
        assert doc["metadata"]["saturation_fraction"] == pytest.approx(0.14096, abs=1e-4)
        assert len(doc["results"]) == 11

    @pytest.mark.parametrize("u", ["0", "-1"])
    def test_nonpositive_u(self, capsys, u):
        code, _, _ = invoke(capsys, "pdf", "--u", u)
        assert code == 2

    def test_csv_and_json_agree(self, capsys):
        _, out_csv, _ = invoke(capsys, "pdf", "--u", "1.5", "--grid", "21")
        _, out_json, _ = invoke(capsys, "pdf", "--u", "1.5", "--grid", "21", "--format", "json")
        doc = json.loads(out_json)
        for r, j in zip(table(out_csv), doc["results"]):
            assert (float(r["y"]), float(r["density"])) == (j["y"], j["density"])
        meta = metadata(out_csv)
        for key, value in doc["metadata"].items():
            assert float(meta[key]) == value


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "weightinit", "init", "--activation", "tanh", "--width", "4"],
                         capture_output=True, text=True)
    assert res.returncode == 0
    assert res.stdout.splitlines()[0].startswith("activation,")
    assert not math.isnan(float(res.stdout.splitlines()[1].split(",")[2]))
