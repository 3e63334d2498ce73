"""Closed-form optics for an attack lens stacked in front of a fixed camera.

Sign conventions, chosen to match the combined-lens model this toolkit
implements throughout:

* focal length ``f`` is signed: negative for a diverging (concave) lens,
  positive for a converging (convex) lens;
* image distance is positive for a virtual image (same side as the object)
  and negative for a real image;
* magnification is positive for an upright image.

The two-lens stack is evaluated in stages: the attack lens images the object,
then the camera lens images that intermediate image. The object distance fed
to the camera stage depends on where the intermediate image falls relative to
the lens gap ``d_b``, which is what splits the convex attack into three
scenarios. Perceived depth scales by ``|m_ori / m_total|``: halve the formed
size and the object reads as twice as far.

All distances are meters. Pure functions over frozen value types; safe to
call concurrently.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .errors import SingularConfiguration


class ScenarioKind(Enum):
    """Which lens combination geometry applies.

    Only the concave attack and the convex near-lens arrangement survive
    physical constraints (short lens gap, distant objects): a convex lens
    whose intermediate image forms behind the camera plane needs either an
    object closer than the focal length or a conspicuously large gap.
    """

    CONCAVE = "concave"
    CONVEX_NEAR_OBJECT = "convex_near_object"
    CONVEX_FAR_LENS = "convex_far_lens"
    CONVEX_NEAR_LENS = "convex_near_lens"

    @property
    def feasible_in_ad(self) -> bool:
        return self in (ScenarioKind.CONCAVE, ScenarioKind.CONVEX_NEAR_LENS)


@dataclass(frozen=True)
class LensSpec:
    """Attack lens. ``focal_length_m`` < 0 means concave, > 0 convex."""

    focal_length_m: float

    def __post_init__(self):
        if self.focal_length_m == 0:
            raise ValueError("lens focal length must be nonzero")

    @property
    def is_concave(self) -> bool:
        return self.focal_length_m < 0


@dataclass(frozen=True)
class CameraSpec:
    """Victim camera: its own focal length and the gap to the attack lens."""

    focal_length_m: float
    lens_gap_m: float

    def __post_init__(self):
        if self.focal_length_m <= 0:
            raise ValueError("camera focal length must be positive")
        if self.lens_gap_m <= 0:
            raise ValueError("lens gap must be positive")


@dataclass(frozen=True)
class AttackGeometry:
    """One object / attack-lens / camera arrangement.

    ``lens=None`` is the explicit pass-through mode (no attack lens mounted):
    the perceived depth equals the true distance and no scenario applies.
    """

    object_distance_m: float
    lens: LensSpec | None
    camera: CameraSpec

    def __post_init__(self):
        if self.object_distance_m <= 0:
            raise ValueError("object distance must be positive")


@dataclass(frozen=True)
class OpticsResult:
    """Everything the two-stage evaluation produces.

    ``scenario`` is None only in pass-through mode. ``depth_ratio`` is the
    multiplier applied to the true object distance to get the perceived one.
    """

    d_i1_m: float
    m1: float
    d_i2_m: float
    m2: float
    m_total: float
    m_ori: float
    depth_ratio: float
    scenario: ScenarioKind | None


def thin_lens_image_distance(focal_length_m: float, object_distance_m: float) -> float:
    """Image distance for a single thin lens, virtual-positive convention.

    Raises SingularConfiguration when the object sits exactly at the focal
    point of a converging lens (rays exit parallel, no image forms).
    """
    denom = object_distance_m - focal_length_m
    if denom == 0:
        raise SingularConfiguration(
            f"object at the focal point (d_o = f = {focal_length_m} m) forms no image"
        )
    return -object_distance_m * focal_length_m / denom


def magnification(focal_length_m: float, object_distance_m: float) -> float:
    """Single-lens magnification; positive = upright image."""
    denom = object_distance_m - focal_length_m
    if denom == 0:
        raise SingularConfiguration(
            f"object at the focal point (d_o = f = {focal_length_m} m) forms no image"
        )
    return -focal_length_m / denom


def baseline_magnification(camera: CameraSpec, object_distance_m: float) -> float:
    """Magnification of the camera alone (no attack lens), a negative number
    for any object beyond the camera's focal length."""
    denom = object_distance_m + camera.lens_gap_m - camera.focal_length_m
    if denom == 0:
        raise SingularConfiguration(
            "object distance plus lens gap equals the camera focal length"
        )
    return -camera.focal_length_m / denom


def classify_scenario(geometry: AttackGeometry) -> ScenarioKind:
    """Dispatch a lensed geometry to its combination-lens case.

    Concave lenses always image the same way. For convex lenses the split is
    on where the attack-lens image lands: in front of the object (object
    inside the focal length), behind the camera plane (gap >= image
    distance), or between lens and camera. The boundary gap == image
    distance resolves to the far-lens case.
    """
    if geometry.lens is None:
        raise ValueError("pass-through geometry has no attack scenario")
    f = geometry.lens.focal_length_m
    if f < 0:
        return ScenarioKind.CONCAVE
    d_o1 = geometry.object_distance_m
    if d_o1 == f:
        raise SingularConfiguration(
            f"object at the focal point (d_o1 = f = {f} m) forms no image"
        )
    if d_o1 < f:
        return ScenarioKind.CONVEX_NEAR_OBJECT
    image_dist = abs(thin_lens_image_distance(f, d_o1))
    if geometry.camera.lens_gap_m >= image_dist:
        return ScenarioKind.CONVEX_FAR_LENS
    return ScenarioKind.CONVEX_NEAR_LENS


def _camera_object_distance(scenario: ScenarioKind, image_dist: float, gap: float) -> float:
    if scenario in (ScenarioKind.CONCAVE, ScenarioKind.CONVEX_NEAR_OBJECT):
        return image_dist + gap
    if scenario is ScenarioKind.CONVEX_FAR_LENS:
        return gap - image_dist
    return image_dist - gap


def combined_magnification(geometry: AttackGeometry) -> OpticsResult:
    """Evaluate the full two-lens stack.

    Per-stage quantities come from the staged evaluation; ``m_total`` is
    computed from the single closed-form rational expression for the active
    scenario, so the ``m_total == m1 * m2`` identity is a genuine
    cross-check between two floating-point paths rather than a tautology.
    """
    camera = geometry.camera
    d_o1 = geometry.object_distance_m
    f_c, d_b = camera.focal_length_m, camera.lens_gap_m
    m_ori = baseline_magnification(camera, d_o1)

    if geometry.lens is None:
        return OpticsResult(
            d_i1_m=0.0, m1=1.0, d_i2_m=0.0, m2=m_ori,
            m_total=m_ori, m_ori=m_ori, depth_ratio=1.0, scenario=None,
        )

    scenario = classify_scenario(geometry)
    f = geometry.lens.focal_length_m
    d_i1 = thin_lens_image_distance(f, d_o1)
    m1 = magnification(f, d_o1)

    d_o2 = _camera_object_distance(scenario, abs(d_i1), d_b)
    den2 = d_o2 - f_c
    if den2 == 0:
        raise SingularConfiguration(
            "intermediate image sits exactly one camera focal length from the camera"
        )
    d_i2 = -d_o2 * f_c / den2
    m2 = -f_c / den2

    if scenario in (ScenarioKind.CONCAVE, ScenarioKind.CONVEX_NEAR_OBJECT):
        m_total = f * f_c / ((d_o1 - f) * (abs(d_i1) + d_b - f_c))
    elif scenario is ScenarioKind.CONVEX_FAR_LENS:
        m_total = f * f_c / ((d_o1 - f) * (d_b - abs(d_i1) - f_c))
    else:
        m_total = f * f_c / ((d_o1 - f) * (abs(d_i1) - d_b - f_c))

    return OpticsResult(
        d_i1_m=d_i1, m1=m1, d_i2_m=d_i2, m2=m2,
        m_total=m_total, m_ori=m_ori,
        depth_ratio=abs(m_ori / m_total), scenario=scenario,
    )


def expected_depth(geometry: AttackGeometry) -> float:
    """Perceived object distance under the attack, in meters.

    The size-to-depth inversion scales the true object distance by
    ``|m_ori / m_total|``; pass-through mode returns the distance unchanged.
    """
    if geometry.lens is None:
        return geometry.object_distance_m
    return combined_magnification(geometry).depth_ratio * geometry.object_distance_m


def pinhole_apparent_size(object_height_m: float, distance_m: float,
                          sensor_gap_m: float) -> float:
    """Projected size on a pinhole camera's sensor plane: h * b / d."""
    if object_height_m <= 0 or distance_m <= 0 or sensor_gap_m <= 0:
        raise ValueError("pinhole projection needs positive height, distance, gap")
    return object_height_m * sensor_gap_m / distance_m


# Grid used by the CLI table report: the lens strengths, gaps and object
# distances the physical experiments swept.
TABLE_FOCAL_LENGTHS_M = (0.20, 0.30, 0.50)
TABLE_LENS_GAPS_M = (0.02, 0.04, 0.08, 0.12)
TABLE_OBJECT_DISTANCES_M = (6.0, 9.0, 12.0)


def expected_depth_grid(concave: bool, camera_focal_length_m: float,
                        focal_lengths_m=TABLE_FOCAL_LENGTHS_M,
                        lens_gaps_m=TABLE_LENS_GAPS_M,
                        object_distances_m=TABLE_OBJECT_DISTANCES_M):
    """Expected-depth sweep over an (f, d_b, d_o1) grid.

    Yields one ``(f_m, d_b_m, d_o1_m, OpticsResult)`` tuple per cell, f
    reported with its sign.
    """
    sign = -1.0 if concave else 1.0
    for f in focal_lengths_m:
        for d_b in lens_gaps_m:
            camera = CameraSpec(focal_length_m=camera_focal_length_m, lens_gap_m=d_b)
            for d_o1 in object_distances_m:
                geom = AttackGeometry(d_o1, LensSpec(sign * abs(f)), camera)
                yield sign * abs(f), d_b, d_o1, combined_magnification(geom)
