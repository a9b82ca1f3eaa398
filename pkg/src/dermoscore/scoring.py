"""Total dermoscopy score: weighted ABCD combination and the three-way
clinical category, plus the binary mapping used for evaluation."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .color import ColorResult
from .geometry import AsymmetryResult, BorderResult
from .structures import StructuresResult

BENIGN_BELOW = 4.75
MALIGNANT_ABOVE = 5.45

SCORE_RANGES = {"a": (0, 2), "b": (0, 8), "c": (1, 6), "d": (0, 4)}


class Category(Enum):
    BENIGN = "Benign"
    SUSPICIOUS = "Suspicious"
    MALIGNANT = "Malignant"


@dataclass(frozen=True)
class AbcdFeatures:
    a: int
    b: int
    c: int
    d: int
    asymmetry: AsymmetryResult | None = None
    border: BorderResult | None = None
    color: ColorResult | None = None
    structures: StructuresResult | None = None


@dataclass(frozen=True)
class TdsAssessment:
    tds: float
    category: Category


def compute_tds(a: int, b: int, c: int, d: int) -> float:
    """1.3*A + 0.1*B + 0.5*C + 0.5*D.

    Evaluated as an integer numerator over 10 so the result is the correctly
    rounded double of the exact decimal value.
    """
    for name, value in (("a", a), ("b", b), ("c", c), ("d", d)):
        lo, hi = SCORE_RANGES[name]
        if not isinstance(value, (int,)) or not lo <= value <= hi:
            raise ValueError(f"score {name}={value!r} outside [{lo}, {hi}]")
    return (13 * a + b + 5 * c + 5 * d) / 10.0


def classify_tds(tds: float) -> Category:
    """Benign below 4.75, Malignant above 5.45, Suspicious between (inclusive)."""
    if not isinstance(tds, (int, float)) or tds != tds:
        raise ValueError(f"tds must be a finite number, got {tds!r}")
    if tds < BENIGN_BELOW:
        return Category.BENIGN
    if tds <= MALIGNANT_ABOVE:
        return Category.SUSPICIOUS
    return Category.MALIGNANT


def assess_tds(features: AbcdFeatures) -> TdsAssessment:
    tds = compute_tds(features.a, features.b, features.c, features.d)
    return TdsAssessment(tds, classify_tds(tds))


def binary_from_assessment(assessment: TdsAssessment | Category) -> str:
    """Collapse the three-way category to a binary label.

    Suspicious maps to malignant: in a screening setting a missed malignancy
    is the costly error, so anything not clearly benign is flagged.
    """
    category = (
        assessment.category if isinstance(assessment, TdsAssessment) else assessment
    )
    return "benign" if category is Category.BENIGN else "malignant"
