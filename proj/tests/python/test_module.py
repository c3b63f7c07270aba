import json
import math
import os
import pathlib
from fractions import Fraction

import numpy as np
import pytest

if os.environ.get("IFL_REQUIRE_MODULE"):
    import ifl
else:
    ifl = pytest.importorskip("ifl")

DATA = pathlib.Path(__file__).resolve().parents[1] / "data"


def test_defaults():
    p = ifl.FrameworkParams()
    assert p.capacities() == (7, 3)
    assert ifl.exact_accuracy(p) == Fraction(1390920071, 1646628160)
    assert abs(ifl.expected_accuracy(p) - 0.84471) < 1e-4
    q = ifl.q_components(p)
    assert math.isclose(q["q1"] + sum(q["q2"]) + q["q3"], 1.0, rel_tol=1e-12)
    agr = ifl.expected_agreement(p, "constant:0.9")
    assert float(ifl.exact_agreement(p, ifl.AgreementFn.constant(0.9))) == pytest.approx(agr, rel=1e-12)


def test_enumeration_and_guard():
    tiny = ifl.FrameworkParams(p_d=1.0, c=2, t_d=2, t_r=2, n_d=1, n_r=1)
    assert ifl.enum_accuracy(tiny) == Fraction(3, 4)
    small = ifl.FrameworkParams(p_d=0.6, c=4, t_d=4, t_r=5, n_d=2, n_r=2)
    zeta = ifl.AgreementFn.step(1, 0.75)
    assert ifl.enum_agreement(small, zeta) == ifl.exact_agreement(small, zeta)
    with pytest.raises(ifl.ResourceError):
        ifl.enum_accuracy(ifl.FrameworkParams())
    with pytest.raises(ifl.ValidationError, match="c must be even"):
        ifl.expected_accuracy(ifl.FrameworkParams(c=21))
    with pytest.raises(ValueError):
        ifl.AgreementFn("constant:0.1")


def test_monte_carlo():
    p = ifl.FrameworkParams()
    a = ifl.mc_accuracy(p, samples=200_000, seed=3)
    assert a == ifl.mc_accuracy(p, samples=200_000, seed=3, threads=2)
    assert abs(a["mean"] - ifl.expected_accuracy(p)) <= 4 * a["stderr"]
    g = ifl.mc_agreement(p, "constant:0.9", samples=200_000, seed=3)
    assert abs(g["mean"] - ifl.expected_agreement(p, "constant:0.9")) <= 4 * g["stderr"]


def test_sweeps():
    rows = ifl.sweep("t_r", "60:300:20", couple="0.2")
    assert len(rows) == 13
    assert [r["coupled"] for r in rows] == [int(0.2 * r["param"]) for r in rows]
    odd = ifl.sweep("c", "10:13:1")
    assert [r["skipped"] for r in odd] == [False, True, False, True]
    assert ifl.parse_grid("0.1:0.9:0.4") == [0.1, 0.5, 0.9]
    assert ifl.coverage_bound(ifl.FrameworkParams(), 0.0, 0.0) == 0.5
    assert ifl.coverage_bound(ifl.FrameworkParams(), 1.0, 1.0) == 1.0


def test_pipeline_matches_golden(tmp_path):
    manifest = json.loads((DATA / "fixture" / "manifest.json").read_text())
    acts = [ifl.read_activations(DATA / "fixture" / m["activations"]) for m in manifest["models"]]
    assert acts[0].dtype == np.float32
    t = ifl.build_interaction_tensor(acts, pcs=manifest["pcs"], corr_percentile=manifest["corr_percentile"],
                                     data_percentile=manifest["data_percentile"])
    assert t["shape"] == (3, 48, 4)
    assert t["assignment"].tolist() == [[0, 1, 2, 3]] * 3
    out = tmp_path / "omega.itns"
    ifl.write_tensor(out, t)
    assert out.read_bytes() == (DATA / "golden" / "omega.itns").read_bytes()
    golden = ifl.read_tensor(DATA / "golden" / "omega.itns")
    assert np.array_equal(golden["triples"], t["triples"])
    assert ifl.feature_frequency_csv(golden) == (DATA / "golden" / "o1.csv").read_text()
    assert ifl.data_model_csv(golden) == (DATA / "golden" / "o3.csv").read_text()


def test_scale_invariance():
    acts = [ifl.read_activations(DATA / "fixture" / f"m{i}.actv") for i in range(3)]
    base = ifl.build_interaction_tensor(acts, pcs=4, corr_percentile=75, data_percentile=80)
    scaled = ifl.build_interaction_tensor([a * np.float32(3.5) for a in acts], pcs=4, corr_percentile=75,
                                          data_percentile=80)
    assert np.array_equal(base["triples"], scaled["triples"])


def test_analytics():
    assert ifl.feature_similarity([1, 2, 3], [2, 3, 4]) == pytest.approx(2 / 3, abs=0)
    assert ifl.ensemble_confidence([[0, 1], [0, 0], [1, 1], [0, 2]], [0, 1]) == [0.75, 0.5]
    t = {"shape": (1, 3, 2), "triples": np.array([[0, 0, 0], [0, 1, 0], [0, 1, 1], [0, 2, 1]])}
    assert ifl.feature_frequency(t) == [(0, 2), (1, 2)]
    assert ifl.nearest_neighbors(t, 1, 2) == [(0, pytest.approx(2 / 3)), (2, pytest.approx(2 / 3))]
    with pytest.raises(ValueError):
        ifl.feature_frequency({"shape": (1, 1, 1), "triples": np.array([[0, 5, 0]])})


def test_file_round_trip(tmp_path):
    values = np.arange(12, dtype=np.float32).reshape(4, 3) / 7
    ifl.write_activations(tmp_path / "a.actv", values)
    assert np.array_equal(ifl.read_activations(tmp_path / "a.actv"), values)
    ifl.write_predictions(tmp_path / "p.pred", [3, 1, 4])
    assert ifl.read_predictions(tmp_path / "p.pred") == [3, 1, 4]
    (tmp_path / "bad.actv").write_bytes(b"NOPE" + bytes(12))
    with pytest.raises(ifl.FormatError, match="bad ACTV header"):
        ifl.read_activations(tmp_path / "bad.actv")
