"""Learning-curve parsing and statistics.

A curve log is a CSV with header ``step,perplexity`` holding validation
perplexity at increasing training steps. Pairs of curves (baseline vs
perturbed) are compared on identical step grids; nothing is interpolated.
"""
from __future__ import annotations

import csv
import json
import math
import statistics
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from perturblab.engine import BASELINE_FOR, PERTURBED_VARIANTS, Variant
from perturblab.errors import ConfigError, ParseError, ValidationError

#: |ME| below this is flagged as fragile: source tables round to two decimals,
#: so the sign of a tiny mean difference is not trustworthy.
FRAGILE_ME = 0.5

METRICS = ("min_perplexity", "auc")


@dataclass(frozen=True)
class LearningCurve:
    """Validation perplexity checkpoints for one (language, variant) run."""

    language: str
    variant: Variant
    points: tuple[tuple[int, float], ...]

    def __post_init__(self):
        prev = 0
        for step, ppl in self.points:
            if step <= prev:
                raise ValidationError(
                    f"{self.language}/{self.variant}: steps must increase strictly "
                    f"(saw {step} after {prev})"
                )
            if not math.isfinite(ppl) or ppl <= 0:
                raise ValidationError(
                    f"{self.language}/{self.variant}: perplexity {ppl} at step {step} "
                    "must be positive and finite"
                )
            prev = step

    def __len__(self) -> int:
        return len(self.points)

    @property
    def steps(self) -> tuple[int, ...]:
        return tuple(step for step, _ in self.points)

    @property
    def values(self) -> tuple[float, ...]:
        return tuple(ppl for _, ppl in self.points)


@dataclass(frozen=True)
class CurvePair:
    baseline: LearningCurve
    perturbed: LearningCurve

    def __post_init__(self):
        if self.baseline.steps != self.perturbed.steps:
            raise ValidationError(
                f"step grids differ between {self.baseline.language}/{self.baseline.variant} "
                f"and {self.perturbed.language}/{self.perturbed.variant}"
            )

    @property
    def n_points(self) -> int:
        return len(self.baseline)


@dataclass(frozen=True)
class PairResult:
    """Mean error of one language x perturbation comparison."""

    language: str
    perturbation: Variant
    mean_error: float

    @property
    def expected_direction(self) -> bool:
        """True when the unperturbed curve sits below its perturbed counterpart."""
        return self.mean_error < 0

    @property
    def fragile(self) -> bool:
        return abs(self.mean_error) < FRAGILE_ME


@dataclass(frozen=True)
class TypologyReport:
    metric_name: str
    languages: tuple[str, ...]
    variants: tuple[Variant, ...]
    values: Mapping[str, Mapping[Variant, float]]
    across_variance: float
    within_variance: float


def parse_curve(lines: Iterable[str], language: str, variant: Variant | str) -> LearningCurve:
    """Parse a ``step,perplexity`` CSV stream into a validated curve."""
    variant = Variant(variant)
    reader = csv.reader(lines)
    try:
        header = next(reader)
    except StopIteration:
        raise ParseError(f"{language}/{variant}: empty curve file") from None
    if [h.strip() for h in header] != ["step", "perplexity"]:
        raise ParseError(f"expected header 'step,perplexity', got {','.join(header)!r}", line=1)
    points = []
    for lineno, row in enumerate(reader, start=2):
        if not row:
            continue
        try:
            step, ppl = int(row[0]), float(row[1])
        except (ValueError, IndexError) as exc:
            raise ParseError(f"bad curve row {row!r}", line=lineno) from exc
        points.append((step, ppl))
    try:
        return LearningCurve(language, variant, tuple(points))
    except ValidationError as exc:
        raise ParseError(str(exc)) from None


def read_curve(path: str | Path, language: str, variant: Variant | str) -> LearningCurve:
    with open(path, encoding="utf-8") as fh:
        return parse_curve(fh, language, variant)


def write_curve(curve: LearningCurve, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("step,perplexity\n")
        for step, ppl in curve.points:
            fh.write(f"{step},{ppl}\n")


def mean_error(pair: CurvePair) -> float:
    """Average of pointwise (baseline - perturbed) differences."""
    diffs = [b - m for (_, b), (_, m) in zip(pair.baseline.points, pair.perturbed.points)]
    return math.fsum(diffs) / len(diffs)


def min_perplexity(curve: LearningCurve) -> tuple[int, float]:
    """The lowest checkpoint; the earliest step wins ties."""
    if not curve.points:
        raise ValidationError("cannot take the minimum of an empty curve")
    return min(curve.points, key=lambda point: (point[1], point[0]))


def auc(curve: LearningCurve) -> float:
    """Area under the curve by the composite trapezoidal rule (perplexity x steps)."""
    if len(curve) < 2:
        raise ValidationError("AUC needs at least two points")
    return float(np.trapezoid(curve.values, curve.steps))


def pair_all(
    curves: Iterable[LearningCurve],
    scheme: Mapping[Variant, Variant] = BASELINE_FOR,
) -> list[PairResult]:
    """One PairResult per (language, perturbed variant) under the pairing scheme.

    Every language present must supply both curves of every scheme pair.
    """
    by_key: dict[tuple[str, Variant], LearningCurve] = {}
    for curve in curves:
        key = (curve.language, curve.variant)
        if key in by_key:
            raise ValidationError(f"duplicate curve for {key[0]}/{key[1]}")
        by_key[key] = curve
    languages = sorted({language for language, _ in by_key})
    results = []
    for language in languages:
        for perturbed in (v for v in PERTURBED_VARIANTS if v in scheme):
            baseline = scheme[perturbed]
            try:
                pair = CurvePair(by_key[(language, baseline)], by_key[(language, perturbed)])
            except KeyError as exc:
                missing = next(v for v in (baseline, perturbed) if (language, v) not in by_key)
                raise ValidationError(f"missing curve for ({language}, {missing})") from exc
            results.append(PairResult(language, perturbed, mean_error(pair)))
    return results


def direction_count(results: Sequence[PairResult]) -> int:
    return sum(1 for r in results if r.expected_direction)


def binomial_two_sided(k: int, n: int, p: float = 0.5) -> float:
    """Exact two-sided binomial p-value via the method of small p-values.

    Sums P(X = k') over every k' whose probability does not exceed
    P(X = k) * (1 + 1e-7); the slack absorbs floating-point ties. Evaluated
    in log space so large n cannot overflow.
    """
    if n < 0 or not 0 <= k <= n:
        raise ValidationError(f"need 0 <= k <= n, got k={k}, n={n}")
    if not 0 <= p <= 1:
        raise ValidationError(f"probability {p} outside [0, 1]")
    if p == 0.0:
        return 1.0 if k == 0 else 0.0
    if p == 1.0:
        return 1.0 if k == n else 0.0

    log_p, log_q = math.log(p), math.log1p(-p)
    lgamma_n1 = math.lgamma(n + 1)

    def log_pmf(i: int) -> float:
        return (
            lgamma_n1 - math.lgamma(i + 1) - math.lgamma(n - i + 1)
            + i * log_p + (n - i) * log_q
        )

    cutoff = log_pmf(k) + math.log1p(1e-7)
    total = math.fsum(math.exp(lp) for lp in map(log_pmf, range(n + 1)) if lp <= cutoff)
    return min(1.0, max(0.0, total))


def metric_matrix(
    curves: Iterable[LearningCurve], metric_name: str
) -> dict[str, dict[Variant, float]]:
    """Per-(language, variant) metric values, for variance_report."""
    if metric_name not in METRICS:
        raise ValidationError(f"unknown metric {metric_name!r}; expected one of {METRICS}")
    values: dict[str, dict[Variant, float]] = {}
    for curve in curves:
        cell = min_perplexity(curve)[1] if metric_name == "min_perplexity" else auc(curve)
        values.setdefault(curve.language, {})[curve.variant] = cell
    return values


def variance_report(
    values: Mapping[str, Mapping[Variant, float]], metric_name: str
) -> TypologyReport:
    """Across-language vs within-language sample variances of a metric matrix.

    Across: variance over languages at a fixed variant, averaged over
    variants. Within: variance over variants at a fixed language, averaged
    over languages. Both use the n-1 denominator.
    """
    if metric_name not in METRICS:
        raise ValidationError(f"unknown metric {metric_name!r}; expected one of {METRICS}")
    languages = tuple(sorted(values))
    if len(languages) < 2:
        raise ValidationError("variance report needs at least two languages")
    variants = tuple(v for v in Variant if any(v in values[lang] for lang in languages))
    if len(variants) < 2:
        raise ValidationError("variance report needs at least two variants")
    missing = [
        f"({lang}, {variant})"
        for lang in languages for variant in variants if variant not in values[lang]
    ]
    if missing:
        raise ValidationError("incomplete metric matrix; missing cells: " + ", ".join(missing))

    across = statistics.mean(
        statistics.variance(values[lang][variant] for lang in languages) for variant in variants
    )
    within = statistics.mean(
        statistics.variance(values[lang][variant] for variant in variants) for lang in languages
    )
    matrix = {lang: {variant: values[lang][variant] for variant in variants} for lang in languages}
    return TypologyReport(metric_name, languages, variants, matrix, across, within)


def load_curveset(manifest_path: str | Path) -> list[LearningCurve]:
    """Read every curve named by a run manifest {language: {variant: csv path}}.

    Relative paths resolve against the manifest's directory.
    """
    manifest_path = Path(manifest_path)
    try:
        mapping = json.loads(manifest_path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read run manifest {manifest_path}: {exc}") from exc
    curves = []
    for language, by_variant in mapping.items():
        for variant_name, rel in by_variant.items():
            try:
                variant = Variant(variant_name)
            except ValueError:
                raise ConfigError(f"unknown variant {variant_name!r} in {manifest_path}") from None
            path = manifest_path.parent / rel
            if not path.exists():
                raise ConfigError(f"curve file {path} ({language}/{variant}) does not exist")
            curves.append(read_curve(path, language, variant))
    return curves
