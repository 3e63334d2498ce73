"""Raster synthesis of the lens attack.

A mounted lens shows a rescaled view of the scene inside its outline and,
depending on lens type, defocuses one side of that boundary. This module
reproduces both effects on 8-bit rasters:

* ``scale_region`` resamples the in-lens content about the region center
  (bilinear, inverse-mapped, edge-replicated where sources fall off-frame);
* ``box_blur`` replaces masked pixels with the mean of a square window
  (clipped at frame edges, integer round-half-up, so output is bit-exact
  across platforms);
* ``apply_attack_transform`` composes the two per an ``AttackProfile``;
* ``level_to_profile`` maps the discretized lens strength 1..9 onto a
  (scale, blur) pair; strength 1 adds the least blur, 9 the most.

Everything is deterministic and pure; identical inputs give bit-identical
outputs.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import BadLevel, DegenerateRegion
from . import formats


@dataclass(frozen=True)
class RasterImage:
    """8-bit raster, gray (h, w) or RGB (h, w, 3), row-major."""

    data: np.ndarray

    def __post_init__(self):
        arr = self.data
        if arr.dtype != np.uint8:
            raise ValueError(f"raster must be uint8, got {arr.dtype}")
        if arr.ndim == 2:
            pass
        elif arr.ndim == 3 and arr.shape[2] == 3:
            pass
        else:
            raise ValueError(f"raster must be (h, w) or (h, w, 3), got {arr.shape}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError("raster needs at least one pixel")

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def channels(self) -> int:
        return 1 if self.data.ndim == 2 else 3

    def copy(self) -> "RasterImage":
        return RasterImage(self.data.copy())

    def to_gray(self) -> "RasterImage":
        """Luma conversion (0.299, 0.587, 0.114), rounded half-up."""
        if self.channels == 1:
            return self.copy()
        rgb = self.data.astype(np.float64)
        luma = 0.299 * rgb[..., 0] + 0.587 * rgb[..., 1] + 0.114 * rgb[..., 2]
        return RasterImage(np.floor(luma + 0.5).astype(np.uint8))

    @classmethod
    def load(cls, path) -> "RasterImage":
        return cls(formats.read_pnm(path))

    def save(self, path) -> None:
        formats.write_pnm(path, self.data)


class RegionKind(Enum):
    FULL_FRAME = "full_frame"
    CIRCLE = "circle"


@dataclass(frozen=True)
class LensRegion:
    """Footprint of the lens in the image: the whole frame or a circle.

    A circle may extend past the frame; only the intersection counts.
    """

    kind: RegionKind
    center_x: float = 0.0
    center_y: float = 0.0
    radius: float = 0.0

    @classmethod
    def full_frame(cls) -> "LensRegion":
        return cls(RegionKind.FULL_FRAME)

    @classmethod
    def circle(cls, center_x: float, center_y: float, radius: float) -> "LensRegion":
        if radius < 1:
            raise ValueError(f"circle radius must be >= 1 px, got {radius}")
        return cls(RegionKind.CIRCLE, center_x, center_y, radius)


@dataclass(frozen=True)
class RegionMasks:
    """Boolean partition of the frame into in-lens and out-of-lens pixels."""

    in_lens: np.ndarray
    out_of_lens: np.ndarray


def region_masks(width: int, height: int, region: LensRegion) -> RegionMasks:
    """Pixel (x, y) is in-lens iff its center lies within the region."""
    if width < 1 or height < 1:
        raise ValueError("mask dimensions must be positive")
    if region.kind is RegionKind.FULL_FRAME:
        inside = np.ones((height, width), dtype=bool)
    else:
        ys = np.arange(height, dtype=np.float64)[:, None]
        xs = np.arange(width, dtype=np.float64)[None, :]
        inside = ((xs - region.center_x) ** 2 + (ys - region.center_y) ** 2
                  <= region.radius ** 2)
    return RegionMasks(in_lens=inside, out_of_lens=~inside)


def _region_center(image: RasterImage, region: LensRegion) -> tuple[float, float]:
    if region.kind is RegionKind.CIRCLE:
        return float(region.center_x), float(region.center_y)
    return (image.width - 1) / 2.0, (image.height - 1) / 2.0


def _bilinear(data: np.ndarray, sx: np.ndarray, sy: np.ndarray) -> np.ndarray:
    """Sample at float coords (already clamped into the frame)."""
    h, w = data.shape[:2]
    x0 = np.floor(sx).astype(np.intp)
    y0 = np.floor(sy).astype(np.intp)
    x1 = np.minimum(x0 + 1, w - 1)
    y1 = np.minimum(y0 + 1, h - 1)
    fx = sx - x0
    fy = sy - y0
    if data.ndim == 3:
        fx = fx[:, None]
        fy = fy[:, None]
    v00 = data[y0, x0].astype(np.float64)
    v01 = data[y0, x1].astype(np.float64)
    v10 = data[y1, x0].astype(np.float64)
    v11 = data[y1, x1].astype(np.float64)
    top = v00 * (1 - fx) + v01 * fx
    bot = v10 * (1 - fx) + v11 * fx
    return top * (1 - fy) + bot * fy


def scale_region(image: RasterImage, region: LensRegion, scale: float) -> RasterImage:
    """Resample the in-region content by ``scale`` about the region center.

    Inverse mapping: an output pixel at offset v from the center samples the
    source at offset v / scale, so enlarging pulls from a shrunken footprint
    (content pushed past a circle boundary is simply clipped) and shrinking
    pulls from a widened one, edge-replicating wherever sources leave the
    frame. Pixels outside the region are untouched; scale == 1 is identity.
    """
    if scale <= 0:
        raise ValueError(f"scale must be positive, got {scale}")
    masks = region_masks(image.width, image.height, region)
    sel = masks.in_lens
    if not sel.any():
        raise DegenerateRegion("lens region does not intersect the frame")
    if scale == 1.0:
        return image.copy()
    cx, cy = _region_center(image, region)
    ys, xs = np.nonzero(sel)
    sx = cx + (xs - cx) / scale
    sy = cy + (ys - cy) / scale
    np.clip(sx, 0.0, image.width - 1.0, out=sx)
    np.clip(sy, 0.0, image.height - 1.0, out=sy)
    sampled = _bilinear(image.data, sx, sy)
    out = image.data.copy()
    out[ys, xs] = np.floor(sampled + 0.5).astype(np.uint8)
    return RasterImage(out)


def box_blur(image: RasterImage, mask: np.ndarray, radius: int) -> RasterImage:
    """Mean filter over a (2r+1)^2 window, applied to masked pixels only.

    The window is clipped at frame edges and averaged over the in-frame
    samples, so borders do not darken. Unmasked pixels pass through
    untouched; radius 0 is identity. Rounding is half-up in exact integer
    arithmetic.
    """
    if mask.shape != (image.height, image.width):
        raise ValueError(
            f"mask shape {mask.shape} does not match image "
            f"{(image.height, image.width)}"
        )
    if radius < 0:
        raise ValueError("blur radius must be non-negative")
    if radius == 0 or not mask.any():
        return image.copy()

    data = image.data if image.data.ndim == 3 else image.data[:, :, None]
    h, w = data.shape[:2]
    integral = np.zeros((h + 1, w + 1, data.shape[2]), dtype=np.int64)
    np.cumsum(np.cumsum(data, axis=0, dtype=np.int64), axis=1, out=integral[1:, 1:])

    ys = np.arange(h)
    xs = np.arange(w)
    y0 = np.maximum(ys - radius, 0)
    y1 = np.minimum(ys + radius, h - 1) + 1
    x0 = np.maximum(xs - radius, 0)
    x1 = np.minimum(xs + radius, w - 1) + 1
    window_sum = (integral[y1[:, None], x1[None, :]]
                  - integral[y0[:, None], x1[None, :]]
                  - integral[y1[:, None], x0[None, :]]
                  + integral[y0[:, None], x0[None, :]])
    count = ((y1 - y0)[:, None] * (x1 - x0)[None, :])[:, :, None]
    mean = (2 * window_sum + count) // (2 * count)  # round half-up

    out = data.copy()
    out[mask] = mean[mask].astype(np.uint8)
    out = out[:, :, 0] if image.data.ndim == 2 else out
    return RasterImage(np.ascontiguousarray(out))


class LensKind(Enum):
    CONCAVE = "concave"
    CONVEX = "convex"


class BlurPlacement(Enum):
    IN_LENS = "in_lens"
    OUT_OF_LENS = "out_of_lens"


@dataclass(frozen=True)
class AttackProfile:
    """One renderable attack: region, rescale factor, and defocus placement.

    Defaults follow the physical behavior: a concave lens shrinks the
    in-lens view and throws the out-of-lens area out of focus; a convex lens
    enlarges and defocuses inside its own outline. Both are overridable.
    """

    lens_kind: LensKind
    level: int
    region: LensRegion
    scale_factor: float
    blur_radius: int
    blur_placement: BlurPlacement

    def __post_init__(self):
        if not 1 <= self.level <= 9:
            raise BadLevel(f"level must be in 1..9, got {self.level}")
        if self.scale_factor <= 0:
            raise ValueError("scale factor must be positive")
        if self.blur_radius < 0:
            raise ValueError("blur radius must be non-negative")


# Default level calibration: blur radius grows one pixel per level; the
# rescale factor sweeps linearly from a barely-visible change at level 1 to
# the strongest change at level 9.
BLUR_PX_PER_LEVEL = 1
CONCAVE_SCALE_SPAN = (0.95, 0.55)
CONVEX_SCALE_SPAN = (1.1, 3.0)


def level_to_profile(lens_kind: LensKind, level: int,
                     region: LensRegion | None = None,
                     calibration: dict | None = None) -> AttackProfile:
    """Turn a discrete attack level into a renderable profile.

    ``calibration`` maps level -> {"scale_factor": s, "blur_radius": r} and
    overrides the defaults verbatim for the levels it lists.
    """
    if not isinstance(level, int) or not 1 <= level <= 9:
        raise BadLevel(f"level must be an integer in 1..9, got {level!r}")
    if region is None:
        region = LensRegion.full_frame()
    span = CONCAVE_SCALE_SPAN if lens_kind is LensKind.CONCAVE else CONVEX_SCALE_SPAN
    scale = span[0] + (span[1] - span[0]) * (level - 1) / 8.0
    blur = BLUR_PX_PER_LEVEL * level
    if calibration and level in calibration:
        entry = calibration[level]
        scale = float(entry.get("scale_factor", scale))
        blur = int(entry.get("blur_radius", blur))
    placement = (BlurPlacement.OUT_OF_LENS if lens_kind is LensKind.CONCAVE
                 else BlurPlacement.IN_LENS)
    return AttackProfile(lens_kind=lens_kind, level=level, region=region,
                         scale_factor=scale, blur_radius=blur,
                         blur_placement=placement)


def apply_attack_transform(image: RasterImage, profile: AttackProfile) -> RasterImage:
    """Render the attack: rescale the in-lens content, then defocus the side
    selected by the profile's blur placement."""
    scaled = scale_region(image, profile.region, profile.scale_factor)
    masks = region_masks(image.width, image.height, profile.region)
    blur_mask = (masks.in_lens if profile.blur_placement is BlurPlacement.IN_LENS
                 else masks.out_of_lens)
    return box_blur(scaled, blur_mask, profile.blur_radius)
