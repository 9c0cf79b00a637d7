"""Network file format and the command-line interface."""

from __future__ import annotations

import json

import numpy as np
import pytest

from ktbn import (
    build_junction_tree,
    generate_synthetic_net,
    load_csv,
    load_network,
    sample_from_network,
    save_csv,
    save_network,
)
from ktbn.cli import main

from conftest import joint_table


# -----------------------------------------------------------------------
# network files
# -----------------------------------------------------------------------

def test_network_roundtrip_preserves_everything(tmp_path):
    net = generate_synthetic_net(7, 2, 3, 13)
    p = str(tmp_path / "net.json")
    save_network(net, p, metadata={"note": "hello"})
    back, meta = load_network(p)
    assert meta == {"note": "hello"}
    assert back.variables == net.variables
    assert back.states == net.states
    assert back.parents == net.parents
    for a, b in zip(back.cpts, net.cpts):
        np.testing.assert_array_equal(a, b)
    assert back.ktree is not None
    assert back.ktree.cliques == net.ktree.cliques
    assert back.ktree.parent_clique == net.ktree.parent_clique


def test_network_file_bytes_are_canonical(tmp_path):
    net = generate_synthetic_net(5, 2, 2, 3)
    p1 = str(tmp_path / "a.json")
    p2 = str(tmp_path / "b.json")
    save_network(net, p1)
    back, _ = load_network(p1)
    save_network(back, p2)
    assert open(p1, "rb").read() == open(p2, "rb").read()


def test_network_roundtrip_queries_identical(tmp_path):
    net = generate_synthetic_net(6, 2, 2, 17)
    p = str(tmp_path / "net.json")
    save_network(net, p)
    back, _ = load_network(p)
    a = build_junction_tree(net)
    b = build_junction_tree(back)
    for v in range(6):
        np.testing.assert_array_equal(a.marginal({0: 0}, v) if v else
                                      a.marginal({1: 0}, v),
                                      b.marginal({0: 0}, v) if v else
                                      b.marginal({1: 0}, v))


def test_network_without_ktree_roundtrips(tmp_path):
    from ktbn.inference import BayesNet
    net = generate_synthetic_net(4, 1, 2, 2)
    bare = BayesNet(variables=net.variables, states=net.states,
                    parents=net.parents, cpts=net.cpts, ktree=None)
    p = str(tmp_path / "bare.json")
    save_network(bare, p)
    back, _ = load_network(p)
    assert back.ktree is None
    assert back.parents == net.parents


def test_load_network_rejects_foreign_documents(tmp_path):
    p = tmp_path / "x.json"
    p.write_text(json.dumps({"format": "something-else", "version": 1}))
    with pytest.raises(ValueError):
        load_network(str(p))
    net = generate_synthetic_net(3, 1, 2, 1)
    good = tmp_path / "good.json"
    save_network(net, str(good))
    doc = json.loads(good.read_text())
    doc["version"] = 999
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(doc))
    with pytest.raises(ValueError):
        load_network(str(bad))


# -----------------------------------------------------------------------
# CLI
# -----------------------------------------------------------------------

def _gen(tmp_path, n=6, k=2, seed=3, rows=150):
    netp = str(tmp_path / "net.json")
    datap = str(tmp_path / "data.csv")
    assert main(["gen-net", "--n", str(n), "--k", str(k), "--seed", str(seed),
                 "--out", netp]) == 0
    assert main(["sample", "--net", netp, "--rows", str(rows), "--seed", "4",
                 "--out", datap]) == 0
    return netp, datap


def test_cli_gen_sample_learn_score_infer(tmp_path, capsys):
    netp, datap = _gen(tmp_path)
    learned = str(tmp_path / "learned.json")
    assert main(["learn", "--data", datap, "--k", "2", "--max-iter", "5",
                 "--seed", "0", "--out", learned]) == 0
    capsys.readouterr()
    assert main(["score", "--net", learned, "--data", datap]) == 0
    out = capsys.readouterr().out
    assert "bic\t" in out and "loglik\t" in out
    assert main(["infer", "--net", learned, "--target", "X0"]) == 0
    out = capsys.readouterr().out
    probs = [float(line.split("\t")[1]) for line in out.strip().splitlines()]
    assert sum(probs) == pytest.approx(1.0, abs=1e-9)
    assert main(["infer", "--net", learned, "--prob", "--evidence", "X1=s0"]) == 0
    out = capsys.readouterr().out
    assert "p_evidence\t" in out
    assert main(["infer", "--net", learned, "--mpe"]) == 0
    out = capsys.readouterr().out
    assert len(out.strip().splitlines()) == 6


def test_cli_learn_report_and_cache_flow(tmp_path, capsys):
    netp, datap = _gen(tmp_path)
    cachep = str(tmp_path / "cache.txt")
    assert main(["parentsets", "--data", datap, "--k", "2",
                 "--out", cachep]) == 0
    learned = str(tmp_path / "learned.json")
    report = str(tmp_path / "iters.tsv")
    assert main(["learn", "--data", datap, "--k", "2", "--cache", cachep,
                 "--max-iter", "4", "--out", learned,
                 "--report", report]) == 0
    lines = open(report).read().splitlines()
    assert lines[0] == "iteration\tscore"
    assert len(lines) == 5


def test_cli_inject_and_sem_impute(tmp_path, capsys):
    netp, datap = _gen(tmp_path)
    deg = str(tmp_path / "deg.csv")
    maskp = str(tmp_path / "mask.tsv")
    assert main(["inject-missing", "--data", datap, "--rate", "0.1",
                 "--seed", "1", "--out", deg, "--mask-out", maskp]) == 0
    degraded = load_csv(deg)
    assert not degraded.is_complete()
    mask_lines = open(maskp).read().splitlines()
    hidden = (degraded.cells == -1).sum()
    assert len(mask_lines) == 1 + hidden
    imputed_p = str(tmp_path / "imp.csv")
    netout = str(tmp_path / "semnet.json")
    assert main(["sem-impute", "--data", deg, "--k", "2", "--t", "0.2",
                 "--max-sem-iter", "2", "--out", imputed_p,
                 "--net-out", netout]) == 0
    imputed = load_csv(imputed_p)
    assert imputed.is_complete()
    net, meta = load_network(netout)
    assert meta["mode"] == "joint"


def test_cli_bench(tmp_path, capsys):
    _, datap = _gen(tmp_path, rows=100)
    outp = str(tmp_path / "report.tsv")
    longp = str(tmp_path / "long.tsv")
    assert main(["bench", "--data", datap, "--ks", "2", "--max-iter", "3",
                 "--seeds", "0,1", "--out", outp, "--long-out", longp]) == 0
    lines = open(outp).read().splitlines()
    assert lines[0].split("\t")[0] == "dataset"
    assert len(lines) == 1 + 2 * 2  # two algorithms, two seeds
    assert len(open(longp).read().splitlines()) == 1 + 3 * 4


def test_cli_error_paths_return_3(tmp_path, capsys):
    missing = str(tmp_path / "nope.csv")
    assert main(["learn", "--data", missing, "--k", "2", "--max-iter", "1",
                 "--out", str(tmp_path / "x.json")]) == 3
    err = capsys.readouterr().err
    assert "error:" in err
    netp, datap = _gen(tmp_path)
    assert main(["infer", "--net", netp, "--target", "NOPE"]) == 3
    assert main(["infer", "--net", netp, "--evidence", "X0=zzz",
                 "--prob"]) == 3
    assert main(["infer", "--net", netp]) == 3  # no query selected
    bad = str(tmp_path / "bad.csv")
    open(bad, "w").write("A,B\n0,1\n0\n")
    assert main(["parentsets", "--data", bad, "--k", "1",
                 "--out", str(tmp_path / "c.txt")]) == 3


def test_cli_usage_errors_exit_2():
    with pytest.raises(SystemExit) as exc:
        main(["learn"])  # missing required arguments
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        main(["no-such-command"])
    assert exc.value.code == 2


def test_cli_sample_roundtrip_consistency(tmp_path):
    netp, datap = _gen(tmp_path, seed=9)
    ds = load_csv(datap)
    net, _ = load_network(netp)
    assert ds.n_rows == 150
    assert tuple(ds.variables) == net.variables
    # sampled frequencies should be consistent with the source joint
    full = joint_table(net)
    for v in range(len(net.variables)):
        axes = tuple(a for a in range(len(net.variables)) if a != v)
        want = full.sum(axis=axes)
        # identify states by label, since csv order is first-occurrence
        freq = np.zeros(len(net.states[v]))
        for r in range(ds.n_rows):
            label = ds.states[v][ds.cells[r, v]]
            freq[net.states[v].index(label)] += 1
        freq /= ds.n_rows
        np.testing.assert_allclose(freq, want, atol=0.15)
