import json
import subprocess
import sys

import pytest

from qlap import corpus
from qlap.cli import run


def cli(capsys, *argv):
    code = run([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, (json.loads(out) if code == 0 and out else None), err


def test_spectrum_classical_c4(capsys):
    code, rep, _ = cli(capsys, "spectrum", corpus.path("c4"), "--no-timestamp")
    assert code == 0
    assert rep["spectrum"]["eigenvalues"] == pytest.approx([0, 2, 2, 4], abs=1e-12)
    assert "eigenvectors" not in rep["spectrum"]
    code, rep, _ = cli(capsys, "spectrum", corpus.path("c4"), "--full", "--no-timestamp")
    assert len(rep["spectrum"]["eigenvectors"]) == 4


def test_spectrum_quantum_uniform_c4(capsys):
    code, rep, _ = cli(capsys, "spectrum", corpus.path("c4"), "--engine", "quantum",
                       "--delta", "0.125", "--shots", "4096", "--state-prep", "uniform",
                       "--no-timestamp")
    assert code == 0
    assert rep["histogram"]["bins"] == [{"bin": 0, "count": 4096, "eigenvalue": 0.0}]
    assert rep["total_qubits"] == 2 + 5


def test_missing_file_exit_2(capsys, tmp_path):
    code, _, err = cli(capsys, "spectrum", tmp_path / "missing.edges")
    assert code == 2 and "missing.edges" in err


def test_malformed_file_exit_2(capsys, tmp_path):
    p = tmp_path / "bad.edges"
    p.write_text("0 1\n2 2\n")
    code, _, err = cli(capsys, "partition", p)
    assert code == 2 and "line 2" in err


def test_bad_arguments_exit_2(capsys):
    with pytest.raises(SystemExit) as exc:
        run(["estimate", str(corpus.path("p3")), "--delta", "2"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        run(["spectrum", str(corpus.path("p3")), "--engine", "analog"])
    assert exc.value.code == 2
    capsys.readouterr()


def test_partition_classical_barbell(capsys):
    code, rep, _ = cli(capsys, "partition", corpus.path("barbell"), "--no-timestamp")
    assert code == 0 and rep["partition"]["cut_edges"] == 1


def test_partition_quantum_barbell(capsys):
    code, rep, _ = cli(capsys, "partition", corpus.path("barbell"), "--engine", "quantum",
                       "--backend", "exact", "--readout", "trace", "--seed", "7", "--no-timestamp")
    assert code == 0
    blocks = rep["partition"]["assignment"]
    assert blocks[:3] == [blocks[0]] * 3 and blocks[3:] == [1 - blocks[0]] * 3
    assert rep["diagnostics"]["oracle"]["agreement"] is True


def test_partition_quantum_disconnected_exit_1(capsys):
    code, _, err = cli(capsys, "partition", corpus.path("two_triangles"), "--engine", "quantum")
    assert code == 1 and "ComponentSplitAdvised" in err


def test_partition_quantum_k3_exit_1(capsys):
    code, _, err = cli(capsys, "partition", corpus.path("barbell"), "--engine", "quantum", "--k", "3")
    assert code == 1 and "UnsupportedK" in err


def test_partition_classical_k_too_big(capsys):
    code, _, _ = cli(capsys, "partition", corpus.path("p3"), "--k", "4")
    assert code == 2


def test_starvation_exit_1(capsys, monkeypatch):
    from qlap import cli as cli_module
    from qlap.errors import PostSelectionStarved

    def starve(*a, **kw):
        raise PostSelectionStarved(14, 100)

    monkeypatch.setattr(cli_module, "quantum_fiedler_partition", starve)
    code, _, err = cli(capsys, "partition", corpus.path("barbell"), "--engine", "quantum")
    assert code == 1 and "PostSelectionStarved" in err


@pytest.mark.parametrize("name,count", [("two_triangles", 2), ("barbell", 1)])
def test_components_three_way(capsys, name, count):
    code, rep, _ = cli(capsys, "components", corpus.path(name), "--no-timestamp")
    assert code == 0
    assert rep["union_find"] == rep["oracle_num_zero"] == rep["quantum"] == count
    assert rep["agree_all"] is True


def test_components_edgeless(capsys, tmp_path):
    p = tmp_path / "e.edges"
    p.write_text("N 4\n")
    code, rep, _ = cli(capsys, "components", p, "--no-timestamp")
    assert rep["union_find"] == rep["oracle_num_zero"] == rep["quantum"] == 4


def test_estimate(capsys, tmp_path):
    p = tmp_path / "five.edges"
    p.write_text("0 1\n1 2\n2 3\n3 4\n")
    code, rep, _ = cli(capsys, "estimate", p, "--delta", "0.25", "--no-timestamp")
    est = rep["estimate"]
    assert (est["n_system"], est["m_ancilla"], est["total_qubits"]) == (3, 4, 7)
    assert est["controlled_u_applications"] == 15


def test_compare_barbell(capsys):
    code, rep, _ = cli(capsys, "compare", corpus.path("barbell"), "--no-timestamp")
    assert code == 0
    ev = rep["eigenvalues"]
    assert ev["within_bound"] and ev["bound"] == 8 / 256
    assert rep["dyadic_spectrum"] is False
    assert rep["partition"]["agreement"] is True


def test_compare_dyadic_deviation_zero(capsys):
    code, rep, _ = cli(capsys, "compare", corpus.path("p3"), "--no-timestamp")
    assert rep["dyadic_spectrum"] is True
    assert rep["eigenvalues"]["max_deviation"] < 1e-12


def test_compare_p3_trotter(capsys):
    code, rep, _ = cli(capsys, "compare", corpus.path("p3"), "--backend", "trotter",
                       "--trotter-steps", "256", "--shots", "256", "--no-timestamp")
    assert code == 0 and rep["trotter"]["modal_bins_match"] is True


def test_compare_k4_degenerate(capsys):
    code, rep, _ = cli(capsys, "compare", corpus.path("k4"), "--no-timestamp")
    part = rep["partition"]
    assert part["degenerate"] and part["compared_on"] == "cut_size"
    assert part["cut_size_delta"] == 0 and part["agreement"]


def test_compare_disconnected_skips_partition(capsys):
    code, rep, _ = cli(capsys, "compare", corpus.path("two_triangles"), "--no-timestamp")
    assert code == 0 and "skipped" in rep["partition"]


def test_corpus_commands(capsys, tmp_path):
    code, rep, _ = cli(capsys, "corpus", "list")
    assert code == 0 and len(rep["graphs"]) == len(corpus.names())
    code, rep, _ = cli(capsys, "corpus", "export", tmp_path / "out")
    assert len(rep["exported"]) == len(corpus.names())
    code, rep, _ = cli(capsys, "corpus", "show", "k4")
    assert rep["num_vertices"] == 4 and len(rep["edges"]) == 6
    code, _, _ = cli(capsys, "corpus", "show", "nope")
    assert code == 2


def test_timestamp_and_out(capsys, tmp_path):
    out = tmp_path / "r.json"
    code = run(["spectrum", str(corpus.path("p3")), "--out", str(out)])
    assert code == 0 and capsys.readouterr().out == ""
    rep = json.loads(out.read_text())
    assert "generated_at" in rep and "total" in rep["wall_clock_s"]


def test_deterministic_output_bytes(tmp_path):
    args = ["partition", str(corpus.path("barbell")), "--engine", "quantum", "--readout",
            "sampling", "--n-samples", "150", "--seed", "5", "--no-timestamp"]
    runs = [subprocess.run([sys.executable, "-m", "qlap", *args], capture_output=True)
            for _ in range(2)]
    assert runs[0].returncode == 0
    assert runs[0].stdout == runs[1].stdout


def test_trotter_order_aliases(capsys):
    for order in ("2", "symmetric"):
        code, rep, _ = cli(capsys, "spectrum", corpus.path("p2"), "--engine", "quantum",
                           "--backend", "trotter", "--trotter-order", order, "--shots", "16",
                           "--no-timestamp")
        assert rep["config"]["backend"]["trotter_order"] == "symmetric"
