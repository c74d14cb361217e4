"""Circle and circular-arc detection in binary raster images.

The detector certifies curve stretches by the constancy of the angle a
chord subtends along them, estimates each arc's circle from its sagitta,
and refines the parameters with a locally restricted Hough accumulator.
Randomized Hough and edge-vector-matching baselines, pixel metrics, and
a synthetic scene generator round out the toolkit.
"""

from .baselines import EvmConfig, RhtConfig, evm_detect, rht_detect
from .csa import (
    ArcRecord,
    CsaConfig,
    absorb_thick_pixels,
    detect,
    estimate_params,
    merge_adjacent,
    records_to_json,
    remove_straight,
    restricted_hough,
    verify_circularity,
)
from .curves import CurveSegment, SegmentEntry, SegmentList, extract_segments, partition_regions
from .digigeom import (
    ChordAngles,
    CircleParams,
    CollinearError,
    RealPoint,
    SagittaEstimate,
    care,
    chord_angles,
    chord_deviation_bound,
    circumcircle,
    corresponding_real_point,
    digital_arc,
    is_digitally_straight,
    isothetic_distance,
    midpoint_circle,
    ordered_ring,
    sagitta_estimate,
    subtended_angle,
    triangle_area2,
)
from .metrics import (
    GroundTruth,
    MetricsReport,
    ScenePrimitive,
    bresenham_line,
    compute_metrics,
    detection_mask,
    load_ground_truth,
    match_primitives,
    random_scene_spec,
    save_ground_truth,
    synth_scene,
)
from .raster import BinaryImage, Pixel, add_salt_pepper, load_binary, rotate, save_binary, thin

__version__ = "0.1.0"

__all__ = [
    "ArcRecord", "BinaryImage", "ChordAngles", "CircleParams", "CollinearError",
    "CsaConfig", "CurveSegment", "EvmConfig", "GroundTruth", "MetricsReport",
    "Pixel", "RealPoint", "RhtConfig", "SagittaEstimate", "ScenePrimitive",
    "SegmentEntry", "SegmentList", "absorb_thick_pixels", "add_salt_pepper",
    "bresenham_line", "care", "chord_angles", "chord_deviation_bound",
    "circumcircle", "compute_metrics", "corresponding_real_point", "detect",
    "detection_mask", "digital_arc", "estimate_params", "evm_detect",
    "extract_segments", "is_digitally_straight", "isothetic_distance",
    "load_binary", "load_ground_truth", "match_primitives", "merge_adjacent",
    "midpoint_circle", "ordered_ring", "partition_regions", "random_scene_spec",
    "records_to_json", "remove_straight", "restricted_hough", "rht_detect",
    "rotate", "sagitta_estimate", "save_binary", "save_ground_truth",
    "subtended_angle", "synth_scene", "thin", "triangle_area2",
    "verify_circularity", "__version__",
]
