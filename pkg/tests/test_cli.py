import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from consensus_kit import cli
from consensus_kit.graph import UndirectedGraph
from consensus_kit.shaping import CouplingSolution, Problem

DATA = Path(cli.__file__).parent / "data"
BALANCED = DATA / "balanced.json"
CLUSTERED = DATA / "clustered.json"


def run(argv, capsys):
    code = cli.main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def write(path, doc):
    path.write_text(json.dumps(doc))
    return path


@pytest.fixture
def shaped(tmp_path, capsys):
    out = tmp_path / "bal.json"
    code, _, _ = run(["shape", BALANCED, "--least-communication", "--compensate", "-o", out], capsys)
    assert code == 0
    return out


class TestRegions:
    @pytest.mark.parametrize(
        "graph, family, r0",
        [(UndirectedGraph.cycle(5), "cycle", 4), (UndirectedGraph.complete(4), "complete", 6),
         (UndirectedGraph(5, ((1, 2), (1, 3), (3, 4), (3, 5))), "tree", 1)],
    )
    def test_counts(self, tmp_path, capsys, graph, family, r0):
        path = write(tmp_path / "g.json", graph.to_json())
        code, out, _ = run(["regions", path, "--closed-form", family], capsys)
        doc = json.loads(out)
        assert code == 0
        assert doc["r0"] == r0 and doc["closed_form"]["agrees"]

    def test_k4_acyclic_count(self, tmp_path, capsys):
        path = write(tmp_path / "g.json", UndirectedGraph.complete(4).to_json())
        out_path = tmp_path / "r.json"
        code, out, _ = run(["regions", path, "-o", out_path], capsys)
        assert json.loads(out) == {"n_acyclic": 24, "n_cyclic": 40, "r0": 6}
        assert json.loads(Path(str(out_path) + ".manifest.json").read_text())["command"] == "regions"

    def test_accepts_problem_file(self, capsys):
        code, out, _ = run(["regions", BALANCED], capsys)
        assert code == 0 and json.loads(out)["r0"] == 1

    def test_closed_form_mismatch(self, tmp_path, capsys):
        path = write(tmp_path / "g.json", UndirectedGraph.cycle(5).to_json())
        code, _, _ = run(["regions", path, "--closed-form", "complete"], capsys)
        assert code == cli.EXIT_CHECK_FAILED

    def test_parse_error(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text("{not json")
        assert run(["regions", bad], capsys)[0] == cli.EXIT_PARSE
        assert run(["regions", tmp_path / "missing.json"], capsys)[0] == cli.EXIT_PARSE

    def test_too_large(self, tmp_path, capsys):
        path = write(tmp_path / "g.json", UndirectedGraph.complete(8).to_json())
        assert run(["regions", path], capsys)[0] == cli.EXIT_TOO_LARGE


class TestShape:
    @pytest.mark.parametrize("problem, row3, row7", [
        (BALANCED, "0.010   0.010       .   0.623", "1.038"),
        (CLUSTERED, "0.010   0.010       .   2.990", "9.992"),
    ])
    def test_tables(self, capsys, problem, row3, row7):
        code, out, _ = run(["shape", problem, "--least-communication"], capsys)
        assert code == 0
        lines = out.splitlines()
        assert row3 in next(line for line in lines if line.startswith("     3"))
        assert row7 in next(line for line in lines if line.startswith("     7"))
        assert "directed links: 1->3 2->3 3->4 4->5 5->4 6->3 7->6" in out
        assert "count=7" in out

    def test_writes_solution_and_manifest(self, shaped):
        s = CouplingSolution.load(shaped)
        assert s.compensated and s.omega_bar == 0.1
        manifest = json.loads(Path(str(shaped) + ".manifest.json").read_text())
        assert manifest["command"] == "shape" and len(manifest["input_hash"]) == 64

    def test_pi_edge_is_not_solvable(self, tmp_path, capsys):
        doc = {"n": 2, "omega": [0, 1], "edges": [{"i": 1, "j": 2, "delta": 3.141592653589793}], "mode": "mixed"}
        code, _, err = run(["shape", write(tmp_path / "p.json", doc)], capsys)
        assert code == cli.EXIT_NOT_SOLVABLE
        assert "1-2" in err


class TestVerify:
    def test_compensated(self, shaped, capsys):
        code, out, _ = run(["verify", BALANCED, shaped], capsys)
        assert code == 0
        worst = float(next(line for line in out.splitlines() if line.startswith("max,")).split(",")[1])
        assert worst < 1e-12

    def test_uncompensated_balanced(self, tmp_path, capsys):
        sol = tmp_path / "s.json"
        run(["shape", BALANCED, "--least-communication", "-o", sol], capsys)
        code, out, _ = run(["verify", BALANCED, sol], capsys)
        rows = dict(line.split(",") for line in out.splitlines()[1:8])
        assert code == 0
        assert float(rows["3"]) == pytest.approx(-0.0265, abs=1e-4)
        assert run(["verify", BALANCED, sol, "--tol", "0.01"], capsys)[0] == cli.EXIT_CHECK_FAILED

    def test_mismatched_files(self, tmp_path, capsys, shaped):
        small = write(tmp_path / "p.json", {"n": 2, "omega": [0, 1], "edges": [{"i": 1, "j": 2, "delta": 1.0}],
                                            "mode": "attractive_only"})
        assert run(["verify", small, shaped], capsys)[0] == cli.EXIT_INCONSISTENT


class TestSimulate:
    def test_balanced_run(self, tmp_path, shaped, capsys):
        csv = tmp_path / "run.csv"
        code, out, _ = run(["simulate", BALANCED, shaped, "--seed", "1", "--t-end", "200", "--csv", csv,
                            "--plot", tmp_path / "run"], capsys)
        assert code == 0
        header, row = out.strip().splitlines()
        summary = dict(zip(header.split(","), row.split(",")))
        assert summary["locked"] == "true"
        assert abs(float(summary["omega_est"]) - 0.1) < 1e-3
        assert (tmp_path / "run_phases.png").stat().st_size > 0
        assert (tmp_path / "run_formation.png").exists()
        manifest = json.loads(Path(str(csv) + ".manifest.json").read_text())
        assert manifest["seed"] == 1 and manifest["config"]["t_end"] == 200.0

    def test_deterministic_csv(self, tmp_path, shaped, capsys):
        paths = [tmp_path / "a.csv", tmp_path / "b.csv"]
        for path in paths:
            run(["simulate", BALANCED, shaped, "--seed", "3", "--t-end", "5", "--csv", path], capsys)
        assert paths[0].read_bytes() == paths[1].read_bytes()

    def test_sweep_order_and_threads(self, tmp_path, shaped, capsys, monkeypatch):
        outs = []
        for threads in ("1", "3"):
            monkeypatch.setenv(cli.THREADS_ENV, threads)
            code, out, _ = run(["simulate", BALANCED, shaped, "--sweep", "4", "--seed", "10", "--t-end", "30",
                                "--csv", tmp_path / f"s{threads}.csv"], capsys)
            assert code == 0
            outs.append(out)
        assert outs[0] == outs[1]
        assert [line.split(",")[1] for line in outs[0].splitlines()[1:]] == ["10", "11", "12", "13"]
        for k in range(4):
            assert (tmp_path / f"s1_run{k}.csv").read_bytes() == (tmp_path / f"s3_run{k}.csv").read_bytes()

    def test_creates_output_directories(self, tmp_path, shaped, capsys):
        nested = tmp_path / "runs" / "deep"
        code, _, _ = run(["simulate", BALANCED, shaped, "--t-end", "2", "--sweep", "2",
                          "--csv", nested / "bal.csv", "--plot", nested / "bal"], capsys)
        assert code == 0
        assert (nested / "bal_run1.csv").exists() and (nested / "bal_run1_phases.png").exists()

    def test_unwritable_output_exits_2(self, tmp_path, shaped, capsys):
        blocker = tmp_path / "file"
        blocker.write_text("")
        code, _, err = run(["simulate", BALANCED, shaped, "--t-end", "1", "--csv", blocker / "x.csv"], capsys)
        assert code == cli.EXIT_PARSE and err.startswith("error:")

    def test_single_agent_line(self, tmp_path, capsys):
        p = write(tmp_path / "p.json", {"n": 1, "omega": [0.25], "edges": [], "mode": "attractive_only"})
        s = write(tmp_path / "s.json", {"omega_bar": 0.25, "epsilon": 0.01, "alpha": [], "beta": []})
        init = tmp_path / "init.txt"
        init.write_text("0.0\n")
        csv = tmp_path / "line.csv"
        code, _, _ = run(["simulate", p, s, "--init", "file", "--init-file", init, "--t-end", "2",
                          "--run-through", "--csv", csv], capsys)
        assert code == 0
        data = np.loadtxt(csv, delimiter=",", skiprows=1)
        assert np.allclose(data[:, 1], 0.25 * data[:, 0], atol=1e-12)

    def test_init_file_wrong_length(self, tmp_path, shaped, capsys):
        init = write(tmp_path / "init.json", [0.0, 1.0])
        code, _, _ = run(["simulate", BALANCED, shaped, "--init", "file", "--init-file", init], capsys)
        assert code == cli.EXIT_INCONSISTENT

    def test_step_collapse_exit_code(self, tmp_path, capsys):
        p = write(tmp_path / "p.json", {"n": 2, "omega": [1.0, -1.0], "edges": [{"i": 1, "j": 2, "delta": 0.5}],
                                        "mode": "mixed"})
        s = write(tmp_path / "s.json", {"omega_bar": 0.0, "epsilon": 0.01, "beta": [{"i": 1, "j": 2, "value": 1e-9}]})
        init = write(tmp_path / "init.json", [0.0, 0.5])
        code, _, err = run(["simulate", p, s, "--init", "file", "--init-file", init, "--t-end", "2"], capsys)
        assert code == cli.EXIT_COLLAPSE
        assert "last valid t=" in err


class TestDemo:
    def test_directed_reports_crossing(self, tmp_path, capsys):
        code, out, _ = run(["demo-fig2", "--csv", tmp_path / "f.csv", "--plot", tmp_path / "f"], capsys)
        assert code == 0
        assert "OrderingChange" in out
        assert (tmp_path / "f_phases.png").exists()

    def test_bidirectional_keeps_order(self, capsys):
        code, out, _ = run(["demo-fig2", "--bidirectional"], capsys)
        assert code == 0
        assert "0 ordering change(s)" in out and "OrderingChange" not in out


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "consensus_kit.cli", "--version"], capture_output=True, text=True)
    assert proc.returncode == 0 and "consensus-kit" in proc.stdout


def test_argparse_errors_exit_2():
    with pytest.raises(SystemExit) as info:
        cli.main(["simulate"])
    assert info.value.code == 2
