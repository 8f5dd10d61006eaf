import json

import jsonschema
import pytest

from brent_deflation.brent import BilinearScheme, natural_algorithm, strassen_scheme
from brent_deflation.cli import main
from brent_deflation.solutions_io import load_schema, parse_solution, read_report_csv, write_solution


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def strassen_file(tmp_path):
    return str(write_solution(tmp_path / "strassen.json", strassen_scheme(), {"label": "strassen"}))


@pytest.fixture
def broken_file(tmp_path):
    sch = strassen_scheme()
    x = sch.flatten().copy()
    x[5] += 1
    return str(write_solution(tmp_path / "broken.json", BilinearScheme.from_vector(sch.shape, x)))


class TestExamples:
    def test_cusp(self, capsys):
        code, out, _ = run(capsys, "examples", "cusp")
        assert code == 0
        assert "cusp at (0, 0): ok  sequence (2, 1, 1, 0)" in out
        assert "cusp at (1, 1): ok  sequence (1, 1, 1, 1)" in out

    def test_whitney(self, capsys):
        code, out, _ = run(capsys, "examples", "whitney")
        assert code == 0
        for seq in ("(2, 2, 2, 2)", "(3, 2, 1, 1)", "(3, 2, 2, 1)"):
            assert seq in out

    def test_strassen(self, capsys):
        code, out, err = run(capsys, "examples", "strassen")
        assert code == 0
        assert "sequence (23, 23, 23, 23)" in out and "orbit bound 23" in out and "gap 0" in out
        assert "level 3" in err

    def test_natural(self, capsys):
        code, out, _ = run(capsys, "examples", "natural:1x1x2", "--format", "json")
        assert code == 0
        assert json.loads(out)["records"][0]["label"] == "N(1,1,2)"

    def test_unknown_fixture(self, capsys):
        code, _, err = run(capsys, "examples", "klein-bottle")
        assert code == 64 and "cusp, whitney, strassen" in err

    def test_malformed_natural(self, capsys):
        code, _, _ = run(capsys, "examples", "natural:2x2")
        assert code == 64

    def test_user_system(self, tmp_path, capsys):
        path = tmp_path / "node.txt"
        path.write_text("# a node\nx1^2 - x2^2\n")
        code, out, _ = run(capsys, "examples", "--system", str(path), "--point", "0,0", "--point", "1,1")
        assert code == 0
        assert "node at (0, 0): ok  sequence (2, 1, 0, 0)" in out
        assert "node at (1, 1): ok  sequence (1, 1, 1, 1)" in out

    def test_user_system_bad_text(self, tmp_path, capsys):
        path = tmp_path / "bad.txt"
        path.write_text("x1 +* 2\n")
        code, _, err = run(capsys, "examples", "--system", str(path), "--point", "0")
        assert code == 4 and "line 1" in err

    def test_user_system_not_a_solution(self, tmp_path, capsys):
        path = tmp_path / "line.txt"
        path.write_text("x1 - 1\n")
        code, _, _ = run(capsys, "examples", "--system", str(path), "--point", "0")
        assert code == 2


class TestDeflate:
    def test_strassen_seed_7(self, strassen_file, capsys):
        code, out, _ = run(capsys, "deflate", strassen_file, "--steps", "3", "--seed", "7", "--format", "json")
        assert code == 0
        (rec,) = json.loads(out)["records"]
        assert rec["sequence"] == [23, 23, 23, 23] and rec["seed"] == 7 and rec["gap"] == 0

    def test_json_validates(self, strassen_file, capsys):
        _, out, _ = run(capsys, "deflate", strassen_file, "--steps", "1", "--format", "json")
        jsonschema.validate(json.loads(out), load_schema("report"))

    def test_two_seeds_same_sequence(self, strassen_file, capsys):
        recs = []
        for seed in ("1", "2"):
            _, out, _ = run(capsys, "deflate", strassen_file, "--seed", seed, "--format", "json")
            recs.append(json.loads(out)["records"][0])
        assert recs[0]["sequence"] == recs[1]["sequence"]
        assert recs[0]["seed"] != recs[1]["seed"]

    def test_env_seed(self, strassen_file, capsys, monkeypatch):
        monkeypatch.setenv("DEFLATE_SEED", "31")
        _, out, _ = run(capsys, "deflate", strassen_file, "--steps", "0", "--format", "json")
        assert json.loads(out)["records"][0]["seed"] == 31
        _, out, _ = run(capsys, "deflate", strassen_file, "--steps", "0", "--seed", "5", "--format", "json")
        assert json.loads(out)["records"][0]["seed"] == 5

    def test_deterministic_output(self, strassen_file, capsys):
        outs = []
        for _ in range(2):
            _, out, _ = run(capsys, "deflate", strassen_file, "--seed", "3", "--format", "csv")
            rec = read_report_csv(out)[0]
            rec.pop("timings")
            outs.append(rec)
        assert outs[0] == outs[1]

    def test_not_a_solution(self, broken_file, capsys):
        code, out, err = run(capsys, "deflate", broken_file, "--format", "json")
        assert code == 2
        doc = json.loads(out)
        assert doc["exit_code"] == 2 and doc["residual"] == pytest.approx(1.0)
        assert "residual" in err

    def test_builtin(self, capsys):
        code, out, _ = run(capsys, "deflate", "builtin:natural:2x2x2", "--format", "json")
        assert code == 0 and json.loads(out)["records"][0]["sequence"] == [40, 40, 32, 22]

    def test_missing_file(self, tmp_path, capsys):
        code, _, _ = run(capsys, "deflate", str(tmp_path / "nothing.json"))
        assert code == 4

    def test_numerical_failure(self, strassen_file, capsys):
        # a rank tolerance that swallows the whole spectrum makes the border check fail
        code, out, _ = run(capsys, "deflate", strassen_file, "--rank-tol", "10", "--format", "json")
        assert code == 3 and json.loads(out)["exit_code"] == 3

    def test_out_file(self, strassen_file, tmp_path, capsys):
        target = tmp_path / "r.csv"
        code, out, _ = run(capsys, "deflate", strassen_file, "--steps", "1", "--format", "csv", "--out", str(target))
        assert code == 0 and out == ""
        assert read_report_csv(target.read_text())[0]["sequence"] == [23, 23]


class TestBound:
    @pytest.mark.parametrize("shape,orbit", [("2x2x2:7", 23), ("3x3x3:23", 70), ("4x4x4:49", 143)])
    def test_values(self, shape, orbit, capsys):
        code, out, _ = run(capsys, "bound", shape, "--format", "json")
        assert code == 0 and json.loads(out)["orbit_lower_bound"] == orbit

    def test_strassen_text(self, capsys):
        _, out, _ = run(capsys, "bound", "2x2x2:7")
        assert "84 variables, 64 equations" in out and "= 23" in out and "= 20" in out

    @pytest.mark.parametrize("bad", ["2x2x2", "2x2:7", "0x2x2:7", "axbxc:d"])
    def test_malformed(self, bad, capsys):
        code, _, _ = run(capsys, "bound", bad)
        assert code == 64


class TestOther:
    def test_gen_natural(self, tmp_path, capsys):
        out = tmp_path / "n.json"
        code, printed, _ = run(capsys, "gen-natural", "2x3x2", "--out", str(out))
        assert code == 0 and printed.strip() == str(out)
        assert parse_solution(out) == natural_algorithm(2, 3, 2)

    def test_verify(self, strassen_file, broken_file, capsys):
        code, out, _ = run(capsys, "verify", strassen_file, "--format", "json")
        assert code == 0 and json.loads(out)["is_solution"]
        code, out, _ = run(capsys, "verify", broken_file)
        assert code == 2 and "NOT A SOLUTION" in out

    def test_batch(self, tmp_path, capsys, strassen_file):
        write_solution(tmp_path / "n.json", natural_algorithm(2, 2, 2), {"label": "n222"})
        code, out, _ = run(capsys, "batch", str(tmp_path), "--format", "json", "--workers", "1")
        assert code == 0
        doc = json.loads(out)
        jsonschema.validate(doc, load_schema("report"))
        assert {r["label"]: r["sequence"] for r in doc["records"]} == {
            "n222": [40, 40, 32, 22], "strassen": [23, 23, 23, 23]}

    def test_batch_text_histogram(self, tmp_path, capsys, strassen_file):
        _, out, _ = run(capsys, "batch", str(tmp_path), "--shared-borders")
        assert "d1 = n_0 - n_1: 0: 1" in out

    def test_batch_missing_dir(self, tmp_path, capsys):
        code, _, _ = run(capsys, "batch", str(tmp_path / "none"))
        assert code == 4

    @pytest.mark.parametrize("argv", [[], ["frobnicate"], ["deflate"], ["deflate", "x.json", "--steps", "-1"],
                                      ["deflate", "x.json", "--seed", "banana"], ["bound", "2x2x2:7", "--bogus"]])
    def test_usage_errors(self, argv, capsys):
        with pytest.raises(SystemExit) as info:
            main(argv)
        assert info.value.code == 64

    def test_bad_env_seed(self, strassen_file, capsys, monkeypatch):
        monkeypatch.setenv("DEFLATE_SEED", "-4")
        code, _, _ = run(capsys, "deflate", strassen_file)
        assert code == 64
