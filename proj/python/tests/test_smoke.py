import json
from pathlib import Path

import pytest

import slideeval as se

DATA = Path(__file__).resolve().parents[2] / "tests" / "data"


def slide(**kw):
    base = {
        "size": {"w": 960, "h": 540},
        "background": "#FFFFFF",
        "texts": [
            {
                "x": 40,
                "y": 30,
                "w": 600,
                "h": 80,
                "text": "Quarterly results",
                "font": {"name": "Arial", "size": 32, "bold": True, "color": "#1F2937"},
            }
        ],
        "rects": [{"x": 40, "y": 140, "w": 400, "h": 200, "fill": "#2563EB"}],
        "lines": [],
        "images": [],
        "tables": [],
    }
    base.update(kw)
    return base


def test_validate_roundtrip():
    doc = se.validate(slide())
    assert doc["size"] == {"w": 960, "h": 540}
    assert se.validate(doc) == doc


def test_validate_rejects_unknown_field():
    with pytest.raises(se.ValidationError):
        se.validate(slide(extra=1))
    se.validate(slide(extra=1), strict=False)


def test_delta_e_black_white():
    assert se.delta_e2000("#000000", "#FFFFFF") == pytest.approx(100.0, abs=1e-6)
    assert se.delta_e2000("#3366CC", "#3366CC") == 0.0


def test_match_identity():
    m = se.match(slide(), slide())
    assert m["text"]["false_positives"] == []
    assert m["text"]["false_negatives"] == []
    assert len(m["text"]["matches"]) == 1


def test_score_counts_failed_runs():
    s = se.score_extraction([slide(), slide()], [slide(), None], n_resamples=50)
    assert s["parse_rate"] == pytest.approx(0.5)
    assert s["parsed_only"]["matching"]["f1"] == pytest.approx(1.0)
    assert s["e2e"]["matching"]["f1"] < 1.0


def test_rank_metrics():
    r = se.rank_metrics([1, 2, 3, 4], [1, 2, 3, 4])
    assert r["kendall_tau"] == pytest.approx(1.0)
    assert r["exact_match"]
    r = se.rank_metrics([4, 3, 2, 1], [1, 2, 3, 4])
    assert r["spearman_rho"] == pytest.approx(-1.0)
    with pytest.raises(se.InvalidPermutation):
        se.rank_metrics([1, 1, 2], [1, 2, 3])


def test_pava_pools_violators():
    assert se.pava([1.0, 3.0, 2.0, 4.0]) == pytest.approx([1.0, 2.5, 2.5, 4.0])


def test_perturb_is_deterministic_and_replayable():
    a, rec = se.perturb(slide(), "geometry", 0.6)
    b, _ = se.perturb(slide(), "geometry", 0.6)
    assert a == b
    assert se.replay(slide(), rec) == a
    same, _ = se.perturb(slide(), "geometry", 0.0)
    assert same == se.validate(slide())


def test_render_png():
    png = se.render_png(slide(), scale=0.5, mode="test")
    assert png[:8] == b"\x89PNG\r\n\x1a\n"


def test_ingest_fixture():
    slides, manifest = se.ingest(DATA / "fixture.pptx")
    assert slides
    assert all("id" in s for s in slides)
    assert json.dumps(manifest)


def test_judge_reply_parsing():
    assert se.parse_judge_reply("4", 1, 5) == 4
    assert se.parse_judge_reply("```\n3\n```", 1, 5) == 3
    assert se.parse_judge_reply("Score: 4", 1, 5) is None
    assert se.parse_judge_reply("6", 1, 5) is None


def test_run_pipeline_offline(tmp_path):
    out = se.run_pipeline(
        DATA / "hermetic.json",
        ["ingest", "render", "extract", "match", "score"],
        output_root=tmp_path,
        run_id="py",
        offline=True,
    )
    assert out["exit_code"] == 0, out["stages"]
    assert out["network_requests"] == 0
    summary = json.loads((Path(out["run_dir"]) / "score" / "oracle" / "summary.json").read_text())
    assert summary["e2e"]["matching"]["f1"] == pytest.approx(1.0)
