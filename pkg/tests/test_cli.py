"""End-to-end CLI runs on toy corpora: pipeline, verify, perturb, analyze, fixtures."""
import hashlib
import json
import random

import pytest

from perturblab import cli
from perturblab.curves import LearningCurve, write_curve
from perturblab.engine import Variant

LANGS = ("alpha", "beta")


def _make_inputs(root, n_sentences=60):
    rng = random.Random(11)
    words = [f"w{i}" for i in range(30)]
    tags = ["NOUN", "VERB", "ADJ", "ADV", "DET"]
    (root / "corpora").mkdir()
    (root / "tags").mkdir()
    for lang in LANGS:
        with open(root / "corpora" / f"{lang}.txt", "w") as fc, \
                open(root / "tags" / f"{lang}.tags", "w") as ft:
            for _ in range(n_sentences):
                n = rng.randint(1, 12)
                fc.write(" ".join(rng.choice(words) for _ in range(n)) + "\n")
                ft.write(" ".join(rng.choice(tags) for _ in range(n)) + "\n")


def _write_config(root, out_dir, **overrides):
    cfg = {
        "languages": list(LANGS),
        "global_seed": 42,
        "vocab_size": 50,
        "train_fraction": 0.6,
        "valid_fraction": 0.2,
        "test_fraction": 0.2,
        "corpus_dir": str(root / "corpora"),
        "annotations_dir": str(root / "tags"),
        "out_dir": str(out_dir),
    }
    cfg.update(overrides)
    p = root / "config.json"
    p.write_text(json.dumps(cfg))
    return p


def _tree_hashes(d, skip=("provenance.json",)):
    return {p.name: hashlib.sha256(p.read_bytes()).hexdigest()
            for p in sorted(d.iterdir()) if p.name not in skip}


def test_pipeline_writes_expected_tree(tmp_path, capsys):
    _make_inputs(tmp_path)
    cfg = _write_config(tmp_path, tmp_path / "out")
    assert cli.main(["pipeline", "--config", str(cfg)]) == 0
    out = tmp_path / "out"
    for lang in LANGS:
        for v in Variant:
            for split in ("train", "valid", "test"):
                assert (out / f"{lang}.{v}.{split}.txt").exists()
        for split in ("train", "valid", "test"):
            assert (out / f"{lang}.{split}.manifest.json").exists()
        assert (out / f"{lang}.vocab.tsv").exists()
    prov = json.loads((out / "provenance.json").read_text())
    assert prov["config"]["global_seed"] == 42
    assert len(prov["files"]) == len(_tree_hashes(out))
    assert prov["files"] == _tree_hashes(out)


def test_pipeline_determinism_byte_identical(tmp_path):
    _make_inputs(tmp_path)
    cfg1 = _write_config(tmp_path, tmp_path / "out1")
    assert cli.main(["pipeline", "--config", str(cfg1)]) == 0
    cfg2 = _write_config(tmp_path, tmp_path / "out2")
    assert cli.main(["pipeline", "--config", str(cfg2)]) == 0
    assert _tree_hashes(tmp_path / "out1") == _tree_hashes(tmp_path / "out2")


def test_pipeline_verify_passes_on_own_output(tmp_path):
    _make_inputs(tmp_path)
    cfg = _write_config(tmp_path, tmp_path / "out")
    assert cli.main(["pipeline", "--config", str(cfg), "--verify"]) == 0


def test_verify_detects_corruption(tmp_path, capsys):
    _make_inputs(tmp_path)
    cfg = _write_config(tmp_path, tmp_path / "out")
    assert cli.main(["pipeline", "--config", str(cfg)]) == 0
    victim = tmp_path / "out" / "alpha.reverse_partial.train.txt"
    lines = victim.read_text().splitlines()
    lines[0] = lines[0] + " sneaky"
    victim.write_text("\n".join(lines) + "\n")
    assert cli.main(["verify", str(tmp_path / "out")]) == 1
    assert "alpha/reverse_partial/train" in capsys.readouterr().err


def test_pipeline_hop_without_annotations_is_config_error(tmp_path, capsys):
    _make_inputs(tmp_path)
    cfg = _write_config(tmp_path, tmp_path / "out", annotations_dir=None)
    assert cli.main(["pipeline", "--config", str(cfg)]) == 2


def test_pipeline_subset_without_hop(tmp_path):
    _make_inputs(tmp_path)
    cfg = _write_config(
        tmp_path, tmp_path / "out", annotations_dir=None, token_budget=200,
        variants=["no_perturb", "shuffle_global", "reverse_baseline", "reverse_partial"],
    )
    assert cli.main(["pipeline", "--config", str(cfg)]) == 0
    files = list((tmp_path / "out").glob("*.txt"))
    assert len(files) == len(LANGS) * 4 * 3


def test_pipeline_rejects_unknown_config_key(tmp_path, capsys):
    _make_inputs(tmp_path)
    cfg = _write_config(tmp_path, tmp_path / "out", mystery_key=1)
    assert cli.main(["pipeline", "--config", str(cfg)]) == 2
    assert "mystery_key" in capsys.readouterr().err


def test_pipeline_missing_corpus_is_io_error(tmp_path):
    _make_inputs(tmp_path)
    cfg = _write_config(tmp_path, tmp_path / "out", languages=["gamma"])
    assert cli.main(["pipeline", "--config", str(cfg)]) == 2


def test_pipeline_flag_overrides(tmp_path):
    _make_inputs(tmp_path)
    cfg = _write_config(tmp_path, tmp_path / "ignored")
    out = tmp_path / "flagged"
    rc = cli.main(["pipeline", "--config", str(cfg), "--out", str(out),
                   "--languages", "alpha", "--variants", "no_perturb,switch",
                   "--seed", "7"])
    assert rc == 0
    prov = json.loads((out / "provenance.json").read_text())
    assert prov["config"]["languages"] == ["alpha"]
    assert prov["config"]["variants"] == ["no_perturb", "switch"]
    assert prov["config"]["global_seed"] == 7
    assert len(list(out.glob("*.txt"))) == 6


def test_perturb_single_file_with_manifest_reuse(tmp_path):
    (tmp_path / "c.txt").write_text("a b c d e\nf g h\n")
    out1 = tmp_path / "p1.txt"
    m = tmp_path / "m.json"
    rc = cli.main(["perturb", str(tmp_path / "c.txt"), "--variant", "reverse_partial",
                   "--out", str(out1), "--seed", "5", "--save-manifest", str(m)])
    assert rc == 0 and out1.exists() and m.exists()
    out2 = tmp_path / "p2.txt"
    rc = cli.main(["perturb", str(tmp_path / "c.txt"), "--variant", "reverse_partial",
                   "--out", str(out2), "--manifest", str(m)])
    assert rc == 0
    assert out1.read_bytes() == out2.read_bytes()
    # every line gained exactly the marker token
    for orig, got in zip(["a b c d e", "f g h"], out1.read_text().splitlines()):
        assert sorted(got.split()) == sorted(orig.split() + ["<rev>"])


def test_perturb_hop_needs_annotations(tmp_path, capsys):
    (tmp_path / "c.txt").write_text("a b c\n")
    rc = cli.main(["perturb", str(tmp_path / "c.txt"), "--variant", "hop",
                   "--out", str(tmp_path / "o.txt")])
    assert rc == 2
    (tmp_path / "c.tags").write_text("VERB X X\n")
    rc = cli.main(["perturb", str(tmp_path / "c.txt"), "--variant", "hop",
                   "--out", str(tmp_path / "o.txt"),
                   "--annotations", str(tmp_path / "c.tags")])
    assert rc == 0
    assert (tmp_path / "o.txt").read_text() == "a b c ˌ\n"


def test_perturb_unknown_variant(tmp_path):
    (tmp_path / "c.txt").write_text("a\n")
    rc = cli.main(["perturb", str(tmp_path / "c.txt"), "--variant", "scramble",
                   "--out", str(tmp_path / "o.txt")])
    assert rc == 2


def _toy_curves(tmp_path, langs=("alpha",), drop=None, only=None):
    rng = random.Random(13)
    manifest = {}
    for lang in langs:
        manifest[lang] = {}
        base = {v: rng.uniform(50, 60) for v in Variant}
        for v in Variant:
            if drop and (lang, v) == drop:
                continue
            if only is not None and v not in only:
                continue
            pts = [(100 * (i + 1), base[v] + 10 / (i + 1) + rng.random())
                   for i in range(5)]
            path = tmp_path / f"{lang}.{v}.csv"
            write_curve(LearningCurve(lang, v, tuple(pts)), path)
            manifest[lang][str(v)] = path.name
    mp = tmp_path / "runs.json"
    mp.write_text(json.dumps(manifest))
    return mp


def test_analyze_single_language_warns_and_succeeds(tmp_path, capsys):
    mp = _toy_curves(tmp_path)
    out = tmp_path / "reports"
    assert cli.main(["analyze", "--curves", str(mp), "--out", str(out)]) == 0
    captured = capsys.readouterr()
    assert "binomial test skipped" in captured.err
    assert "variance decomposition skipped" in captured.err
    payload = json.loads((out / "analysis.json").read_text())
    assert payload["n_pairs"] == 6
    assert payload["p_value"] is None
    assert payload["variance"] == {}
    assert (out / "pairs.tsv").exists()
    assert (out / "alpha_curves.svg").exists()
    # one language cannot support a variance decomposition
    assert not (out / "variances.tsv").exists()
    assert not (out / "min_perplexity_scatter.svg").exists()


def test_analyze_missing_curve_fails_nonzero(tmp_path, capsys):
    mp = _toy_curves(tmp_path, drop=("alpha", Variant.HOP_BASELINE))
    rc = cli.main(["analyze", "--curves", str(mp), "--out", str(tmp_path / "r")])
    assert rc == 1
    assert "hop_baseline" in capsys.readouterr().err


def test_analyze_pairs_only_the_variants_present(tmp_path, capsys):
    # a two-curve run (baseline + one perturbation) is a legitimate analysis
    mp = _toy_curves(tmp_path, only={Variant.NO_PERTURB, Variant.SHUFFLE_GLOBAL})
    out = tmp_path / "r"
    assert cli.main(["analyze", "--curves", str(mp), "--out", str(out)]) == 0
    payload = json.loads((out / "analysis.json").read_text())
    assert payload["n_pairs"] == 1
    assert payload["pairs"][0]["perturbation"] == "shuffle_global"


def test_analyze_baselines_alone_fail(tmp_path, capsys):
    mp = _toy_curves(tmp_path, only={Variant.NO_PERTURB, Variant.REVERSE_BASELINE})
    rc = cli.main(["analyze", "--curves", str(mp), "--out", str(tmp_path / "r")])
    assert rc == 1
    assert "no perturbed-variant curves" in capsys.readouterr().err


def test_analyze_reports_are_deterministic(tmp_path):
    mp = _toy_curves(tmp_path, langs=("alpha", "beta"))
    out1, out2 = tmp_path / "r1", tmp_path / "r2"
    assert cli.main(["analyze", "--curves", str(mp), "--out", str(out1)]) == 0
    assert cli.main(["analyze", "--curves", str(mp), "--out", str(out2)]) == 0
    assert _tree_hashes(out1, skip=()) == _tree_hashes(out2, skip=())


def test_fixtures_command_reproduces_headline_numbers(tmp_path, capsys):
    out = tmp_path / "fx"
    assert cli.main(["fixtures", "--out", str(out)]) == 0
    stdout = capsys.readouterr().out
    assert "expected direction: 28/54" in stdout
    payload = json.loads((out / "analysis.json").read_text())
    assert payload["direction_count"] == 28
    assert payload["n_pairs"] == 54
    assert payload["p_value"] == pytest.approx(0.892, abs=1e-3)
    for metric in ("min_perplexity", "auc"):
        block = payload["variance"][metric]
        assert block["within"] < block["across"]
    assert len(list(out.glob("*_curves.svg"))) == 9


def test_verify_on_empty_directory_is_config_error(tmp_path):
    assert cli.main(["verify", str(tmp_path)]) == 2


def test_cli_entry_point_installed():
    import shutil
    assert shutil.which("perturblab") is not None
