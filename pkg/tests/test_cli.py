import json

import pytest

from subtree_distance.main import main
from subtree_distance.schemas.diagnostics import ConditionViolation
from subtree_distance.services.conditions import check_four_point
from subtree_distance.services.dissim import read_matrix, serialize_matrix
from subtree_distance.services.gen import perturb_entry


@pytest.fixture
def write_matrix(tmp_path):
    def _write(d, name="m.csv", fmt="csv"):
        path = tmp_path / name
        path.write_text(serialize_matrix(d, fmt))
        return str(path)

    return _write


@pytest.fixture
def generated(tmp_path):
    """gen output pair for a fixed seed"""
    prefix = tmp_path / "inst"
    code = main(["gen", "--seed", "3", "--vertices", "15", "--objects", "7", "--out-prefix", str(prefix)])
    assert code == 0
    return tmp_path / "inst.csv", tmp_path / "inst.json"


class TestReconstructCommand:
    """Tests for subtree-distance reconstruct"""

    def test_quartet_json(self, write_matrix, quartet, capsys):
        """Accepted quartet prints a six-vertex representation"""
        code = main(["reconstruct", write_matrix(quartet)])
        assert code == 0
        document = json.loads(capsys.readouterr().out)
        assert len(document["vertices"]) == 6
        assert sorted(document["phi"]) == ["a", "b", "c", "d"]

    def test_violating_matrix(self, write_matrix, violating, capsys):
        """Rejection exits 2 and prints the report with its stage"""
        code = main(["reconstruct", write_matrix(violating)])
        assert code == 2
        captured = capsys.readouterr()
        report = json.loads(captured.out)
        assert report["accepted"] is False
        assert report["stage"] == "verify_distances"
        assert "rejected at verify_distances" in captured.err

    def test_missing_file(self, tmp_path, capsys):
        """Unreadable input exits 1"""
        assert main(["reconstruct", str(tmp_path / "nope.csv")]) == 1
        assert "error:" in capsys.readouterr().err

    def test_parse_error(self, tmp_path):
        """Malformed input exits 1"""
        path = tmp_path / "bad.csv"
        path.write_text("a,b\n0,1\n2,0\n")
        assert main(["reconstruct", str(path)]) == 1

    def test_not_utf8(self, tmp_path, capsys):
        """Binary input exits 1 with a one-line diagnostic"""
        path = tmp_path / "m.csv"
        path.write_bytes(b"\xff\xfe,a\n\x80,0\n")
        assert main(["reconstruct", str(path)]) == 1
        assert "not UTF-8" in capsys.readouterr().err

    def test_dot_output_and_report(self, write_matrix, interval_instance, tmp_path):
        """DOT goes to --output and the report to --report-path"""
        out, report_path = tmp_path / "rep.dot", tmp_path / "report.json"
        code = main([
            "reconstruct", write_matrix(interval_instance),
            "--out", "dot", "--output", str(out), "--report-path", str(report_path),
        ])
        assert code == 0
        assert out.read_text().startswith("graph representation {")
        assert json.loads(report_path.read_text())["accepted"] is True

    def test_phylip_input(self, write_matrix, quartet):
        """Format is taken from the file suffix"""
        assert main(["reconstruct", write_matrix(quartet, "m.phy", "phylip-square")]) == 0

    def test_bad_tolerance(self, write_matrix, quartet):
        """Malformed --tol exits 1"""
        assert main(["reconstruct", write_matrix(quartet), "--tol", "x:y"]) == 1


class TestCheckCommand:
    """Tests for subtree-distance check"""

    def test_generated_instance_both(self, generated, capsys):
        """Both methods accept a generator instance"""
        matrix_path, _ = generated
        assert main(["check", str(matrix_path), "--method", "both"]) == 0
        out = capsys.readouterr().out
        assert "ext4pc: accept" in out
        assert "pipeline: accept" in out

    def test_violating_both(self, write_matrix, violating, capsys):
        """Both methods reject and the witness is printed"""
        assert main(["check", write_matrix(violating)]) == 2
        out = capsys.readouterr().out
        assert "EXT4PC violated at (x,y,z,w): lhs=20, rhs=10" in out
        assert "pipeline: reject at verify_distances" in out

    def test_tree_metric_ext4pc(self, write_matrix, quartet):
        """Tree metrics pass the extended condition alone"""
        assert main(["check", write_matrix(quartet), "--method", "ext4pc"]) == 0

    def test_disagreement(self, write_matrix, quartet, monkeypatch, capsys):
        """Disagreeing methods exit 3"""
        fake = ConditionViolation(quadruple=("a", "b", "c", "d"), lhs=2.0, rhs=1.0, condition="extended_four_point")
        monkeypatch.setattr("subtree_distance.main.check_extended_four_point", lambda d, tol: fake)
        assert main(["check", write_matrix(quartet)]) == 3
        assert "disagree" in capsys.readouterr().err


class TestGenCommand:
    """Tests for subtree-distance gen"""

    def test_deterministic(self, tmp_path):
        """Same flags produce byte-identical files"""
        outputs = []
        for name in ("first", "second"):
            prefix = tmp_path / name
            assert main(["gen", "--seed", "11", "--out-prefix", str(prefix)]) == 0
            outputs.append(((tmp_path / f"{name}.csv").read_bytes(), (tmp_path / f"{name}.json").read_bytes()))
        assert outputs[0] == outputs[1]

    def test_single_object(self, tmp_path):
        """--objects 1 writes a 1x1 matrix"""
        prefix = tmp_path / "one"
        assert main(["gen", "--objects", "1", "--out-prefix", str(prefix)]) == 0
        assert read_matrix(tmp_path / "one.csv").n == 1

    def test_tree_metric(self, tmp_path):
        """--singleton-fraction 1 emits a tree metric"""
        prefix = tmp_path / "tm"
        code = main([
            "gen", "--seed", "4", "--vertices", "30", "--objects", "6",
            "--singleton-fraction", "1", "--weights", "int:5", "--out-prefix", str(prefix),
        ])
        assert code == 0
        assert check_four_point(read_matrix(tmp_path / "tm.csv")) is None

    def test_tsv_output(self, tmp_path):
        """--format picks the matrix file suffix"""
        prefix = tmp_path / "t"
        assert main(["gen", "--format", "tsv", "--out-prefix", str(prefix)]) == 0
        assert (tmp_path / "t.tsv").exists()

    def test_infeasible(self, tmp_path):
        """Too many singleton objects exits 1"""
        code = main([
            "gen", "--vertices", "3", "--objects", "5", "--singleton-fraction", "1",
            "--out-prefix", str(tmp_path / "x"),
        ])
        assert code == 1

    def test_bad_weights(self, tmp_path):
        """Invalid --weights exits 1"""
        assert main(["gen", "--weights", "5:1", "--out-prefix", str(tmp_path / "x")]) == 1


class TestVerifyCommand:
    """Tests for subtree-distance verify"""

    def test_ground_truth(self, generated):
        """Generator output verifies without the minimality audit"""
        matrix_path, rep_path = generated
        assert main(["verify", str(matrix_path), str(rep_path), "--no-minimality"]) == 0

    def test_reconstruction(self, write_matrix, interval_instance, tmp_path):
        """A reconstruction verifies against its input, audit included"""
        matrix_path = write_matrix(interval_instance)
        rep_path = tmp_path / "rep.json"
        assert main(["reconstruct", matrix_path, "--output", str(rep_path)]) == 0
        assert main(["verify", matrix_path, str(rep_path)]) == 0

    def test_perturbed(self, generated, write_matrix, capsys):
        """A perturbed matrix fails verification"""
        matrix_path, rep_path = generated
        d = read_matrix(matrix_path)
        perturbed = perturb_entry(d, d.labels[0], d.labels[1], 1.0)
        assert main(["verify", write_matrix(perturbed, "p.csv"), str(rep_path), "--no-minimality"]) == 2
        assert "expected" in capsys.readouterr().out

    def test_disconnected_image(self, write_matrix, quartet, tmp_path, capsys):
        """An image that skips a vertex exits 1"""
        rep_path = tmp_path / "rep.json"
        rep_path.write_text(
            '{"vertices": [0, 1, 2], "edges": [{"u": 0, "v": 1, "w": 1}, {"u": 1, "v": 2, "w": 1}],'
            ' "phi": {"a": [0, 2]}}'
        )
        assert main(["verify", write_matrix(quartet), str(rep_path), "--no-minimality"]) == 1
        assert "not connected" in capsys.readouterr().err

    def test_forest(self, write_matrix, quartet, tmp_path, capsys):
        """A tree with an isolated vertex exits 1"""
        rep_path = tmp_path / "rep.json"
        rep_path.write_text('{"vertices": [0, 1, 2], "edges": [{"u": 0, "v": 1, "w": 1}], "phi": {"a": [2]}}')
        assert main(["verify", write_matrix(quartet), str(rep_path)]) == 1
        assert "Not a tree" in capsys.readouterr().err

    def test_unknown_vertex(self, write_matrix, quartet, tmp_path, capsys):
        """An image naming a missing vertex exits 1"""
        rep_path = tmp_path / "rep.json"
        rep_path.write_text('{"vertices": [0, 1], "edges": [{"u": 0, "v": 1, "w": 1}], "phi": {"b": [7]}}')
        assert main(["verify", write_matrix(quartet), str(rep_path)]) == 1
        assert "unknown vertex 7" in capsys.readouterr().err

    def test_bad_representation(self, write_matrix, quartet, tmp_path):
        """Invalid JSON exits 1"""
        rep_path = tmp_path / "rep.json"
        rep_path.write_text('{"vertices": [0, 0], "edges": [], "phi": {}}')
        assert main(["verify", write_matrix(quartet), str(rep_path)]) == 1


class TestBenchCommand:
    """Tests for subtree-distance bench"""

    def test_csv_rows(self, tmp_path):
        """One row per size"""
        out = tmp_path / "bench.csv"
        assert main(["bench", "--sizes", "20,40", "--seeds", "2", "--csv", str(out)]) == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "size,median_seconds"
        assert [line.split(",")[0] for line in lines[1:]] == ["20", "40"]

    def test_stdout(self, capsys):
        """Without --csv the table goes to stdout"""
        assert main(["bench", "--sizes", "10", "--seeds", "1"]) == 0
        assert capsys.readouterr().out.startswith("size,median_seconds")

    def test_bad_sizes(self):
        """Non-numeric sizes exit 1"""
        assert main(["bench", "--sizes", "a,b"]) == 1


class TestUsage:
    """Tests for argument handling"""

    def test_no_command(self):
        """A subcommand is required"""
        assert main([]) == 1

    def test_help(self, capsys):
        """--help exits 0"""
        assert main(["--help"]) == 0
        assert "reconstruct" in capsys.readouterr().out
