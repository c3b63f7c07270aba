import csv
import json
import pathlib

import numpy as np
import pytest

import oracle

DATA = pathlib.Path(__file__).resolve().parents[1] / "data"
FIX = DATA / "fixture"
GOLD = DATA / "golden"


def rows(name):
    lines = [l for l in (GOLD / name).read_text().splitlines() if not l.startswith("#")]
    return list(csv.DictReader(lines))


def summary(name):
    return dict(l[1:].split(",", 1) for l in (GOLD / name).read_text().splitlines()
                if l.startswith("#") and "," in l)


@pytest.fixture(scope="module")
def ref():
    manifest = json.loads((FIX / "manifest.json").read_text())
    acts = [oracle.read_actv(FIX / m["activations"]) for m in manifest["models"]]
    t = oracle.build(acts, manifest["pcs"], manifest["corr_percentile"], manifest["data_percentile"])
    t["preds"] = [oracle.read_pred(FIX / m["predictions"]) for m in manifest["models"]]
    t["labels"] = oracle.read_pred(FIX / manifest["labels"])
    return t


def test_tensor(ref):
    got = oracle.read_itns(GOLD / "omega.itns")
    assert got["dims"] == ref["dims"]
    assert got["gamma_corr"] == ref["gamma_corr"]
    assert got["gamma_data"] == ref["gamma_data"]
    assert got["triples"] == ref["triples"]


def test_planted_clusters(ref):
    # every model's k-th component tracks the k-th latent
    assert ref["ids"] == [[0, 1, 2, 3]] * 3


def test_o1_o3(ref):
    df = oracle.data_features(ref)
    mf = oracle.model_features(ref)
    counts = df.sum(axis=0)
    o1 = rows("o1.csv")
    assert [int(r["data_count"]) for r in o1] == sorted(counts.tolist(), reverse=True)
    for r in o1:
        assert counts[int(r["feature_id"])] == int(r["data_count"])
    for r in rows("o3.csv"):
        t = int(r["feature_id"])
        assert int(r["data_count"]) == counts[t]
        assert int(r["model_count"]) == mf[:, t].sum()


def test_o2(ref):
    df = oracle.data_features(ref)
    conf = np.mean([p == ref["labels"] for p in ref["preds"]], axis=0)
    table = rows("o2.csv")
    assert len(table) == len(conf)
    for r in table:
        n = int(r["datum"])
        assert float(r["confidence"]) == pytest.approx(conf[n], abs=1e-11)
        assert int(r["n_features"]) == df[n].sum()
    high = conf == 1.0
    s = summary("o2_density.csv")
    assert int(s["high_size"]) == high.sum()
    assert int(s["low_size"]) == (~high).sum()
    for r in rows("o2_density.csv"):
        t = int(r["feature_id"])
        assert float(r["high_density"]) == pytest.approx(df[high, t].sum() / df[high].sum(), abs=1e-11)
        assert float(r["low_density"]) == pytest.approx(df[~high, t].sum() / df[~high].sum(), abs=1e-11)


@pytest.mark.parametrize("name,mode", [("o4.csv", "identical"), ("o4_joint.csv", "joint")])
def test_o4(ref, name, mode):
    mf = oracle.model_features(ref)
    expected = oracle.shared_error(ref["preds"], ref["labels"], mode)
    table = rows(name)
    assert len(table) == len(expected)
    for r in table:
        i, j = int(r["model_i"]), int(r["model_j"])
        assert int(r["shared_features"]) == (mf[i] & mf[j]).sum()
        assert float(r["shared_error"]) == pytest.approx(expected[(i, j)], abs=1e-11)


def test_neighbors_and_perclass(ref):
    df = oracle.data_features(ref)
    sets = [np.flatnonzero(r).tolist() for r in df]
    query = int(summary("neighbors.csv")["query"])
    sims = sorted(((-oracle.dice(sets[query], sets[n]), n) for n in range(len(sets)) if n != query))
    table = rows("neighbors.csv")
    assert [int(r["datum"]) for r in table] == [n for _, n in sims[: len(table)]]
    for r, (s, _) in zip(table, sims):
        assert float(r["similarity"]) == pytest.approx(-s, abs=1e-11)
    for r in rows("perclass.csv"):
        t = int(r["feature_id"])
        for c in range(3):
            assert int(r[f"class_{c}"]) == (df[:, t] & (ref["labels"] == c)).sum()
