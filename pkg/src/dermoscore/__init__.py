"""Rule-based ABCD scoring of dermoscopic skin-lesion images.

Pipeline: noise filtering -> grayscale -> Otsu segmentation -> asymmetry,
border, color, and structure features -> total dermoscopy score -> three-way
category, plus an evaluation harness comparing the rule with a trained
logistic-regression baseline.
"""

from .config import PipelineConfig, load_config
from .imaging import FilterKind, apply_filter, rgb_to_lab, to_grayscale
from .pipeline import Assessment, assess_image, extract_features
from .scoring import (
    AbcdFeatures,
    Category,
    TdsAssessment,
    binary_from_assessment,
    classify_tds,
    compute_tds,
)
from .segmentation import SegmentationError, otsu_threshold, segment_lesion

__version__ = "0.1.0"

__all__ = [
    "AbcdFeatures",
    "Assessment",
    "Category",
    "FilterKind",
    "PipelineConfig",
    "SegmentationError",
    "TdsAssessment",
    "apply_filter",
    "assess_image",
    "binary_from_assessment",
    "classify_tds",
    "compute_tds",
    "extract_features",
    "load_config",
    "otsu_threshold",
    "rgb_to_lab",
    "segment_lesion",
    "to_grayscale",
    "__version__",
]
