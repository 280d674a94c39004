"""Command-line orchestration: pipeline, perturb, analyze, fixtures, verify.

Exit codes: 0 success, 1 validation failure, 2 IO or configuration error.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

from perturblab import corpus as corpus_mod
from perturblab import curves as curves_mod
from perturblab import fixtures as fixtures_mod
from perturblab import report as report_mod
from perturblab.corpus import Corpus, SplitSpec
from perturblab.engine import (
    ALL_VARIANTS,
    BASELINE_FOR,
    HOP_FAMILY,
    HOP_MARKER,
    MARKER_VARIANTS,
    REV_MARKER,
    REVERSE_FAMILY,
    MarkerManifest,
    Variant,
    VariantSpec,
    apply_variant,
    build_manifest,
    validate_marker,
)
from perturblab.errors import ConfigError, ParseError, PerturbLabError, ValidationError

SPLIT_NAMES = ("train", "valid", "test")
MIN_PAIRS_FOR_BINOMIAL = 10


@dataclass
class RunConfig:
    """Pipeline settings, loadable from a single JSON document.

    Flags override file values; the effective config is echoed into the
    provenance record of every run.
    """

    languages: list[str] = field(default_factory=list)
    variants: list[Variant] = field(default_factory=lambda: list(ALL_VARIANTS))
    global_seed: int = 0
    vocab_size: int = 50000
    token_budget: int | None = None
    unknown_threshold: float = 0.05
    train_fraction: float = 0.8
    valid_fraction: float = 0.1
    test_fraction: float = 0.1
    rev_marker: str = REV_MARKER
    hop_marker: str = HOP_MARKER
    corpus_dir: str = "."
    annotations_dir: str | None = None
    out_dir: str = "dataset"

    def __post_init__(self):
        self.variants = [Variant(v) for v in self.variants]
        if self.global_seed < 0 or self.global_seed >= 2 ** 64:
            raise ConfigError("global_seed must fit in an unsigned 64-bit integer")
        if self.vocab_size < 1:
            raise ConfigError("vocab_size must be >= 1")
        if self.token_budget is not None and self.token_budget < 1:
            raise ConfigError("token_budget must be >= 1 when set")

    @classmethod
    def from_file(cls, path: str | Path) -> "RunConfig":
        try:
            payload = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        if not isinstance(payload, dict):
            raise ConfigError(f"config {path} must hold a JSON object")
        known = set(cls.__dataclass_fields__)
        unknown = sorted(set(payload) - known)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        try:
            return cls(**payload)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad config {path}: {exc}") from exc

    def marker_for(self, kind: Variant) -> str | None:
        if kind in REVERSE_FAMILY:
            return self.rev_marker
        if kind in HOP_FAMILY:
            return self.hop_marker
        return None

    def echo(self) -> dict:
        payload = asdict(self)
        payload["variants"] = [str(v) for v in self.variants]
        return payload


def _load_config(args: argparse.Namespace) -> RunConfig:
    config = RunConfig.from_file(args.config) if args.config else RunConfig()
    if args.seed is not None:
        config.global_seed = args.seed
    if args.languages:
        config.languages = [x for x in args.languages.split(",") if x]
    if args.variants:
        try:
            config.variants = [Variant(x) for x in args.variants.split(",") if x]
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
    if args.out is not None:
        config.out_dir = str(args.out)
    if not config.languages:
        raise ConfigError("no languages configured (use --languages or the config file)")
    if not config.variants:
        raise ConfigError("no variants configured")
    return config


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


# --- pipeline ----------------------------------------------------------------

def _prepare_language(config: RunConfig, language: str, out: Path):
    """Vocab, filter, shuffle/subset, split, manifests for one language."""
    src = Path(config.corpus_dir) / f"{language}.txt"
    if not src.exists():
        raise ConfigError(f"corpus file {src} does not exist")
    full = corpus_mod.read_corpus(src)

    needs_verbs = any(v in HOP_FAMILY for v in config.variants)
    annotations = None
    if needs_verbs:
        if config.annotations_dir is None:
            raise ConfigError("hop variants requested but annotations_dir is not set")
        tag_path = Path(config.annotations_dir) / f"{language}.tags"
        if not tag_path.exists():
            raise ConfigError(f"annotation file {tag_path} does not exist")
        annotations = corpus_mod.read_annotations(tag_path, full)

    vocab = corpus_mod.build_vocabulary(full, config.vocab_size)
    for kind in config.variants:
        marker = config.marker_for(kind)
        if marker is not None:
            validate_marker(marker, vocab)
    vocab_path = out / f"{language}.vocab.tsv"
    corpus_mod.write_vocabulary(vocab, vocab_path)

    filtered = corpus_mod.filter_unknown(full, vocab, config.unknown_threshold)
    if config.token_budget is not None:
        working = corpus_mod.subset_tokens(filtered, config.token_budget, config.global_seed)
    else:
        working = corpus_mod.shuffle_sentences(filtered, config.global_seed)

    spec = SplitSpec(config.train_fraction, config.valid_fraction,
                     config.test_fraction, config.global_seed)
    parts = corpus_mod.split(working, spec)

    hashes = {vocab_path.name: _sha256(vocab_path)}
    jobs = []
    for split_name, part in zip(SPLIT_NAMES, parts):
        manifest = build_manifest(part, config.global_seed, annotations)
        manifest_path = out / f"{language}.{split_name}.manifest.json"
        manifest.save(manifest_path)
        hashes[manifest_path.name] = _sha256(manifest_path)
        jobs.append((language, split_name, part, manifest))
    return jobs, hashes


def _write_variant(config: RunConfig, out: Path, language: str, split_name: str,
                   part: Corpus, manifest: MarkerManifest, kind: Variant) -> tuple[str, str]:
    spec = VariantSpec(kind, config.marker_for(kind))
    result = apply_variant(part, spec, manifest=manifest, global_seed=config.global_seed)
    path = out / f"{language}.{kind}.{split_name}.txt"
    corpus_mod.write_corpus(result, path)
    return path.name, _sha256(path)


def cmd_pipeline(config: RunConfig, run_verify: bool = False) -> int:
    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    hashes: dict[str, str] = {}
    workers = min(8, max(1, os.cpu_count() or 1))
    with ThreadPoolExecutor(max_workers=workers) as pool:
        prepared = list(pool.map(lambda lang: _prepare_language(config, lang, out),
                                 config.languages))
        variant_jobs = []
        for jobs, lang_hashes in prepared:
            hashes.update(lang_hashes)
            for language, split_name, part, manifest in jobs:
                for kind in config.variants:
                    variant_jobs.append((language, split_name, part, manifest, kind))
        for name, digest in pool.map(
            lambda job: _write_variant(config, out, job[0], job[1], job[2], job[3], job[4]),
            variant_jobs,
        ):
            hashes[name] = digest

    provenance = {"config": config.echo(), "files": dict(sorted(hashes.items()))}
    (out / "provenance.json").write_text(
        json.dumps(provenance, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    print(f"pipeline: wrote {len(hashes)} files for {len(config.languages)} language(s) to {out}")
    if run_verify:
        return cmd_verify(out)
    return 0


# --- verify -------------------------------------------------------------------

def _strip_marker(tokens: tuple[str, ...], marker: str) -> tuple[str, ...]:
    return tuple(t for t in tokens if t != marker)


def _expected_from(base, manifest: MarkerManifest, seed: int, kind: Variant,
                   rev_marker: str, hop_marker: str) -> Corpus:
    marker = rev_marker if kind in REVERSE_FAMILY else hop_marker if kind in HOP_FAMILY else None
    return apply_variant(base, VariantSpec(kind, marker), manifest=manifest, global_seed=seed)


def cmd_verify(dataset: Path) -> int:
    """Re-derive every variant file from its NO_PERTURB sibling and compare.

    Also checks structural parity facts that hold independently of the
    transform definitions: line counts, token-count deltas, marker-strip
    recovery and token multisets.
    """
    if not dataset.is_dir():
        raise ConfigError(f"{dataset} is not a directory")
    rev_marker, hop_marker = REV_MARKER, HOP_MARKER
    seed = None
    prov_path = dataset / "provenance.json"
    if prov_path.exists():
        prov = json.loads(prov_path.read_text(encoding="utf-8"))
        rev_marker = prov["config"].get("rev_marker", rev_marker)
        hop_marker = prov["config"].get("hop_marker", hop_marker)
        seed = prov["config"].get("global_seed")

    groups: dict[tuple[str, str], dict[Variant, Path]] = {}
    for path in sorted(dataset.glob("*.txt")):
        parts = path.name.split(".")
        if len(parts) != 4:
            continue
        language, variant_name, split_name, _ = parts
        try:
            kind = Variant(variant_name)
        except ValueError:
            continue
        groups.setdefault((language, split_name), {})[kind] = path
    if not groups:
        raise ConfigError(f"no variant files found under {dataset}")

    problems = []
    for (language, split_name), files in sorted(groups.items()):
        if Variant.NO_PERTURB not in files:
            problems.append(f"{language}/{split_name}: no_perturb file missing")
            continue
        base = corpus_mod.read_corpus(files[Variant.NO_PERTURB])
        manifest_path = dataset / f"{language}.{split_name}.manifest.json"
        manifest = MarkerManifest.load(manifest_path) if manifest_path.exists() else None
        run_seed = seed if seed is not None else (manifest.global_seed if manifest else None)

        for kind, path in sorted(files.items(), key=lambda kv: str(kv[0])):
            got = corpus_mod.read_corpus(path)
            where = f"{language}/{kind}/{split_name}"
            if len(got) != len(base):
                problems.append(f"{where}: {len(got)} lines, expected {len(base)}")
                continue
            marker = rev_marker if kind in REVERSE_FAMILY else hop_marker
            for b, g in zip(base, got):
                if kind in MARKER_VARIANTS:
                    added = len(g) - len(b)
                    markers = sum(1 for t in g.tokens if t == marker)
                    if added != markers:
                        problems.append(f"{where}: line {b.index} token delta {added} "
                                        f"!= marker count {markers}")
                        break
                    if kind not in (Variant.REVERSE_PARTIAL, Variant.REVERSE_FULL):
                        if _strip_marker(g.tokens, marker) != b.tokens:
                            problems.append(f"{where}: line {b.index} does not strip "
                                            "back to no_perturb")
                            break
                    elif sorted(_strip_marker(g.tokens, marker)) != sorted(b.tokens):
                        problems.append(f"{where}: line {b.index} token multiset changed")
                        break
                else:
                    if sorted(g.tokens) != sorted(b.tokens):
                        problems.append(f"{where}: line {b.index} token multiset changed")
                        break
            else:
                if kind is Variant.NO_PERTURB:
                    continue
                if manifest is None and kind in MARKER_VARIANTS:
                    problems.append(f"{where}: manifest missing, cannot re-derive")
                    continue
                if run_seed is None and kind is Variant.SHUFFLE_GLOBAL:
                    problems.append(f"{where}: seed unknown, cannot re-derive")
                    continue
                expected = _expected_from(base, manifest, run_seed, kind,
                                          rev_marker, hop_marker)
                if corpus_mod.serialize_corpus(expected) != corpus_mod.serialize_corpus(got):
                    problems.append(f"{where}: content differs from re-derivation")

    if problems:
        for problem in problems:
            print(f"verify: FAIL {problem}", file=sys.stderr)
        return 1
    print(f"verify: OK ({len(groups)} language/split groups)")
    return 0


# --- perturb ------------------------------------------------------------------

def cmd_perturb(args: argparse.Namespace) -> int:
    try:
        kind = Variant(args.variant)
    except ValueError:
        raise ConfigError(f"unknown variant {args.variant!r}; choose from "
                          + ", ".join(str(v) for v in ALL_VARIANTS)) from None
    corpus = corpus_mod.read_corpus(args.input)
    manifest = None
    if args.manifest:
        manifest = MarkerManifest.load(args.manifest)
    elif kind in MARKER_VARIANTS:
        annotations = None
        if args.annotations:
            annotations = corpus_mod.read_annotations(args.annotations, corpus)
        elif kind in HOP_FAMILY:
            raise ConfigError(f"{kind} needs --annotations (or a prebuilt --manifest)")
        manifest = build_manifest(corpus, args.seed, annotations)
    spec = VariantSpec(kind, args.marker) if args.marker else VariantSpec(kind)
    result = apply_variant(corpus, spec, manifest=manifest, global_seed=args.seed)
    corpus_mod.write_corpus(result, args.out)
    if args.save_manifest and manifest is not None:
        manifest.save(args.save_manifest)
    print(f"perturb: {kind} -> {args.out} ({len(result)} sentences, "
          f"{result.token_count} tokens)")
    return 0


# --- analyze / fixtures ---------------------------------------------------------

def _format_float(x: float) -> str:
    return f"{x:.4f}"


def _analyze_curves(curves: list[curves_mod.LearningCurve], out: Path) -> int:
    out.mkdir(parents=True, exist_ok=True)
    # Pair only the perturbed variants that were actually run; a perturbed
    # curve whose baseline is absent still fails inside pair_all.
    present = {curve.variant for curve in curves}
    scheme = {pert: base for pert, base in BASELINE_FOR.items() if pert in present}
    if not scheme:
        raise ValidationError("no perturbed-variant curves to pair against a baseline")
    results = curves_mod.pair_all(curves, scheme)
    n = len(results)
    k = curves_mod.direction_count(results)
    fragile = sum(1 for r in results if r.fragile)
    p_value = None
    if n >= MIN_PAIRS_FOR_BINOMIAL:
        p_value = curves_mod.binomial_two_sided(k, n)
    else:
        print(f"warning: only {n} pairs; binomial test skipped "
              f"(needs >= {MIN_PAIRS_FOR_BINOMIAL})", file=sys.stderr)

    reports = {}
    if len({c.language for c in curves}) >= 2:
        for metric_name in curves_mod.METRICS:
            matrix = curves_mod.metric_matrix(curves, metric_name)
            reports[metric_name] = curves_mod.variance_report(matrix, metric_name)
    else:
        print("warning: variance decomposition skipped (needs >= 2 languages)",
              file=sys.stderr)

    payload = {
        "n_pairs": n,
        "direction_count": k,
        "fragile_count": fragile,
        "p_value": p_value,
        "pairs": [
            {
                "language": r.language,
                "perturbation": str(r.perturbation),
                "mean_error": r.mean_error,
                "expected_direction": r.expected_direction,
                "fragile": r.fragile,
            }
            for r in results
        ],
        "variance": {
            name: {
                "across": rep.across_variance,
                "within": rep.within_variance,
                "values": {
                    lang: {str(v): rep.values[lang][v] for v in rep.variants}
                    for lang in rep.languages
                },
            }
            for name, rep in reports.items()
        },
    }
    (out / "analysis.json").write_text(
        json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )

    with open(out / "pairs.tsv", "w", encoding="utf-8") as fh:
        fh.write("language\tperturbation\tmean_error\texpected_direction\tfragile\n")
        for r in results:
            fh.write(f"{r.language}\t{r.perturbation}\t{_format_float(r.mean_error)}\t"
                     f"{int(r.expected_direction)}\t{int(r.fragile)}\n")
    if reports:
        with open(out / "variances.tsv", "w", encoding="utf-8") as fh:
            fh.write("metric\tacross_language\twithin_language\n")
            for name, rep in reports.items():
                fh.write(f"{name}\t{_format_float(rep.across_variance)}\t"
                         f"{_format_float(rep.within_variance)}\n")

    me_by_key = {(r.language, r.perturbation): r.mean_error for r in results}
    by_language: dict[str, list[curves_mod.LearningCurve]] = {}
    for curve in curves:
        by_language.setdefault(curve.language, []).append(curve)
    for language, group in sorted(by_language.items()):
        ordered = sorted(group, key=lambda c: ALL_VARIANTS.index(c.variant))
        series = []
        for curve in ordered:
            me = me_by_key.get((language, curve.variant))
            if me is None:
                style, annotation = "baseline", None
            else:
                style = "negative" if me < 0 else "positive"
                annotation = f"ME {me:+.2f}"
            series.append(report_mod.Series(
                label=str(curve.variant),
                points=tuple((float(s), v) for s, v in curve.points),
                style=style,
                annotation=annotation,
            ))
        chart = report_mod.ChartSpec(title=f"{language}: validation perplexity",
                                     series=tuple(series))
        report_mod.emit_curve_chart(chart, out / f"{language}_curves.svg")
    for name, rep in reports.items():
        report_mod.emit_scatter(rep, out / f"{name}_scatter.svg")

    print(f"pairs: {n}")
    print(f"expected direction: {k}/{n} (fragile: {fragile})")
    if p_value is not None:
        print(f"binomial p-value: {p_value:.4f}")
    for name, rep in reports.items():
        print(f"{name} variance: across={_format_float(rep.across_variance)} "
              f"within={_format_float(rep.within_variance)}")
    return 0


def cmd_analyze(curves_manifest: Path, out: Path) -> int:
    curves = curves_mod.load_curveset(curves_manifest)
    return _analyze_curves(curves, out)


def cmd_fixtures(out: Path) -> int:
    return _analyze_curves(fixtures_mod.load_all(), out)


# --- entry point ----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="perturblab",
        description="Deterministic corpus perturbations and learning-curve analytics.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("pipeline", help="vocab, filter, shuffle, split, all variant files")
    p.add_argument("--config", type=Path, help="JSON run config")
    p.add_argument("--seed", type=int, help="override global_seed")
    p.add_argument("--languages", help="comma-separated language names")
    p.add_argument("--variants", help="comma-separated variant names")
    p.add_argument("--out", type=Path, help="output directory")
    p.add_argument("--verify", action="store_true", help="re-check parity invariants after writing")

    p = sub.add_parser("perturb", help="apply a single variant to one corpus file")
    p.add_argument("input", type=Path)
    p.add_argument("--variant", required=True)
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--manifest", type=Path, help="existing marker manifest JSON")
    p.add_argument("--annotations", type=Path, help="line-parallel POS tag file")
    p.add_argument("--marker", help="override the default marker token")
    p.add_argument("--save-manifest", type=Path, help="write the manifest that was used")

    p = sub.add_parser("analyze", help="pair curves, run the statistics, emit reports")
    p.add_argument("--curves", type=Path, required=True,
                   help="run manifest JSON: {language: {variant: csv path}}")
    p.add_argument("--out", type=Path, required=True)

    p = sub.add_parser("fixtures", help="run the analysis over the embedded reference curves")
    p.add_argument("--out", type=Path, required=True)

    p = sub.add_parser("verify", help="check parity invariants of a pipeline output directory")
    p.add_argument("dataset", type=Path)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "pipeline":
            return cmd_pipeline(_load_config(args), run_verify=args.verify)
        if args.command == "perturb":
            return cmd_perturb(args)
        if args.command == "analyze":
            return cmd_analyze(args.curves, args.out)
        if args.command == "fixtures":
            return cmd_fixtures(args.out)
        if args.command == "verify":
            return cmd_verify(args.dataset)
        raise ConfigError(f"unknown command {args.command!r}")
    except (ValidationError, ParseError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except PerturbLabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
