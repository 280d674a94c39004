"""Embedded validation-perplexity reference tables.

Nine languages, each with curves for all nine dataset variants over the
step grid 100..3000. They drive the ``fixtures`` CLI command and the
statistical reproduction tests without any external data.
"""
from __future__ import annotations

import csv
from importlib.resources import files

from perturblab.curves import LearningCurve
from perturblab.engine import Variant

LANGUAGES = (
    "danish", "english", "finnish", "french", "german",
    "greek", "hebrew", "italian", "russian",
)


def load_language(language: str) -> list[LearningCurve]:
    """All nine variant curves for one language."""
    resource = files(__package__).joinpath(f"data/{language}.csv")
    with resource.open(encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    curves = []
    for column in rows[0]:
        if column == "step":
            continue
        points = tuple((int(r["step"]), float(r[column])) for r in rows)
        curves.append(LearningCurve(language, Variant(column), points))
    return curves


def load_all() -> list[LearningCurve]:
    """The full 81-curve fixture set."""
    return [curve for language in LANGUAGES for curve in load_language(language)]
