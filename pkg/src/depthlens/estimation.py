"""Depth-estimator abstraction and map plumbing.

Neural monocular estimators stay out of this package; what lives here is
everything around them:

* conversion between disparity and metric depth (``baseline * focal_px /
  value``) plus constant rescaling for estimators that emit another scale;
* a geometric proxy estimator that reads depth off a calibrated fiducial of
  known physical height (apparent size is inversely proportional to
  distance, so depth = focal_px * height_m / height_px);
* loaders for externally produced maps (PFM, 16-bit PGM + sidecar scale) and
  for bounding-box text files;
* masked means, the reduction every metric in this toolkit starts from.

Invalid pixels (holes, zero disparity) are marked NaN rather than raised:
maps from real estimators contain them routinely.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from .errors import (DimensionMismatch, EmptyMask, FiducialNotFound, ParseError)
from . import formats
from .imaging import RasterImage


@dataclass(frozen=True)
class DepthMap:
    """Per-pixel depth in meters; NaN marks invalid pixels."""

    values: np.ndarray

    def __post_init__(self):
        if self.values.ndim != 2:
            raise ValueError(f"map must be 2-d, got shape {self.values.shape}")

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def valid_mask(self) -> np.ndarray:
        return np.isfinite(self.values)


@dataclass(frozen=True)
class DisparityMap:
    """Per-pixel disparity (non-negative); NaN marks invalid pixels."""

    values: np.ndarray

    def __post_init__(self):
        if self.values.ndim != 2:
            raise ValueError(f"map must be 2-d, got shape {self.values.shape}")

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def valid_mask(self) -> np.ndarray:
        return np.isfinite(self.values)


@dataclass(frozen=True)
class CameraIntrinsics:
    """Stereo baseline (m) and focal length (px) used for the conversion."""

    baseline_m: float
    focal_px: float

    def __post_init__(self):
        if self.baseline_m <= 0 or self.focal_px <= 0:
            raise ValueError("baseline and focal length must be positive")


@dataclass(frozen=True)
class Box:
    """Pixel rectangle, inclusive-exclusive bounds."""

    x_min: int
    y_min: int
    x_max: int
    y_max: int

    def __post_init__(self):
        if self.x_min >= self.x_max or self.y_min >= self.y_max:
            raise ValueError(f"empty box {self}")

    def to_mask(self, width: int, height: int) -> np.ndarray:
        mask = np.zeros((height, width), dtype=bool)
        mask[max(self.y_min, 0):max(self.y_max, 0),
             max(self.x_min, 0):max(self.x_max, 0)] = True
        return mask


@dataclass(frozen=True)
class FiducialSpec:
    """Calibrated dark target: physical height plus the detection threshold.

    ``reference_box`` optionally restricts the blob search to a window, the
    way an object detector's output would.
    """

    physical_height_m: float
    detection_threshold: int = 96
    reference_box: Box | None = None

    def __post_init__(self):
        if self.physical_height_m <= 0:
            raise ValueError("fiducial height must be positive")
        if not 0 <= self.detection_threshold <= 255:
            raise ValueError("detection threshold must be an 8-bit level")


def disparity_to_depth(disparity: DisparityMap, k: CameraIntrinsics) -> DepthMap:
    """depth = baseline * focal_px / disparity; zero disparity goes invalid."""
    vals = disparity.values.astype(np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        depth = (k.baseline_m * k.focal_px) / vals
    depth[~np.isfinite(depth)] = np.nan
    depth[vals <= 0] = np.nan
    return DepthMap(depth)


def depth_to_disparity(depth: DepthMap, k: CameraIntrinsics) -> DisparityMap:
    """Inverse of ``disparity_to_depth`` (same reciprocal formula)."""
    vals = depth.values.astype(np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        disp = (k.baseline_m * k.focal_px) / vals
    disp[~np.isfinite(disp)] = np.nan
    disp[vals <= 0] = np.nan
    return DisparityMap(disp)


def rescale_disparity(disparity: DisparityMap, constant: float) -> DisparityMap:
    """Divide every pixel by a constant (different estimators emit different
    disparity scales; this normalizes them onto one)."""
    if constant <= 0:
        raise ValueError("rescale constant must be positive")
    return DisparityMap(disparity.values / constant)


def _find_blob(image: RasterImage, fiducial: FiducialSpec):
    """Row/column indices of the thresholded fiducial blob."""
    gray = image.to_gray().data
    if fiducial.reference_box is not None:
        window = fiducial.reference_box.to_mask(image.width, image.height)
        hits = (gray <= fiducial.detection_threshold) & window
    else:
        hits = gray <= fiducial.detection_threshold
    ys, xs = np.nonzero(hits)
    if ys.size < 4:
        raise FiducialNotFound(
            f"thresholding at {fiducial.detection_threshold} found "
            f"{ys.size} px (need >= 4)"
        )
    return ys, xs


def proxy_estimate_depth(image: RasterImage, fiducial: FiducialSpec,
                         k: CameraIntrinsics) -> float:
    """Depth from the fiducial's apparent height (bounding extent)."""
    ys, _ = _find_blob(image, fiducial)
    height_px = int(ys.max() - ys.min() + 1)
    return k.focal_px * fiducial.physical_height_m / height_px


def load_depth_map(path, kind: str = "depth", expected_dims=None):
    """Load an externally produced map.

    The format is sniffed from the magic bytes: ``Pf`` float PFM or a 16-bit
    PGM with its sidecar scale file. ``kind`` selects the wrapper type
    ("depth" or "disparity"); ``expected_dims`` is an optional (width,
    height) check. Non-positive depth / negative disparity samples are
    marked invalid.
    """
    with open(path, "rb") as fh:
        magic = fh.read(2)
    if magic == b"Pf" or magic == b"PF":
        values = formats.read_pfm(path)
    elif magic == b"P5":
        values = formats.read_pgm16(path)
    else:
        raise ParseError(f"unrecognized map format (magic {magic!r})", byte_offset=0)
    values = np.asarray(values, dtype=np.float64)
    if expected_dims is not None:
        w, h = expected_dims
        if values.shape != (h, w):
            raise DimensionMismatch(
                f"{path}: got {values.shape[1]}x{values.shape[0]}, expected {w}x{h}"
            )
    if kind == "depth":
        values = values.copy()
        values[~(values > 0)] = np.nan
        return DepthMap(values)
    if kind == "disparity":
        values = values.copy()
        values[values < 0] = np.nan
        return DisparityMap(values)
    raise ValueError(f"kind must be 'depth' or 'disparity', got {kind!r}")


def masked_mean(map_or_values, mask: np.ndarray) -> float:
    """Arithmetic mean over the valid masked pixels."""
    values = getattr(map_or_values, "values", map_or_values)
    values = np.asarray(values, dtype=np.float64)
    if mask.shape != values.shape:
        raise ValueError(f"mask shape {mask.shape} does not match map {values.shape}")
    selected = values[mask]
    selected = selected[np.isfinite(selected)]
    if selected.size == 0:
        raise EmptyMask("no valid pixel under the mask")
    return float(selected.mean())


def load_boxes(path) -> list[Box]:
    """Bounding-box text file: one ``x_min y_min x_max y_max`` line per box,
    integer pixels, inclusive-exclusive."""
    boxes = []
    with open(path, "r", encoding="ascii") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 4:
                raise ParseError(f"{path}:{lineno}: expected 4 integers, got {line!r}")
            try:
                x0, y0, x1, y1 = (int(p) for p in parts)
            except ValueError:
                raise ParseError(f"{path}:{lineno}: bad integer in {line!r}") from None
            boxes.append(Box(x0, y0, x1, y1))
    return boxes


class ProxyDepthMapper:
    """Built-in image -> depth-map estimator around the fiducial proxy.

    The detected fiducial's bounding box is filled with the pinhole depth
    estimate; every other pixel gets a brightness-derived pseudo-depth
    (linear ramp from ``near_m`` at black to ``far_m`` at white). The ramp is
    what makes the estimator honest about image quality: defocusing a
    textured area moves its estimates, exactly the sensitivity the
    out-of-lens consistency loss is meant to police.
    """

    def __init__(self, fiducial: FiducialSpec, intrinsics: CameraIntrinsics,
                 near_m: float = 4.0, far_m: float = 40.0):
        if near_m <= 0 or far_m <= near_m:
            raise ValueError("need 0 < near_m < far_m")
        self.fiducial = fiducial
        self.intrinsics = intrinsics
        self.near_m = near_m
        self.far_m = far_m

    def estimate_map(self, image: RasterImage, tag: str | None = None) -> np.ndarray:
        gray = image.to_gray().data.astype(np.float64)
        depth = self.near_m + (self.far_m - self.near_m) * gray / 255.0
        ys, xs = _find_blob(image, self.fiducial)
        height_px = int(ys.max() - ys.min() + 1)
        vehicle_depth = self.intrinsics.focal_px * self.fiducial.physical_height_m / height_px
        depth[ys.min():ys.max() + 1, xs.min():xs.max() + 1] = vehicle_depth
        return depth


class DirectoryMapEstimator:
    """File-backed estimator: one pre-computed map per evaluation tag.

    Expects ``<tag>.pfm`` (or 16-bit ``<tag>.pgm``) in the directory, e.g.
    ``benign.pfm`` and ``level_1.pfm`` .. ``level_9.pfm`` produced offline by
    whatever estimator is under attack. ``rescale`` divides disparity maps by
    a constant on load.
    """

    def __init__(self, directory, kind: str = "disparity",
                 rescale: float | None = None):
        self.directory = directory
        self.kind = kind
        self.rescale = rescale

    def estimate_map(self, image: RasterImage, tag: str | None = None) -> np.ndarray:
        if tag is None:
            raise ValueError("file-backed estimator needs an evaluation tag")
        for ext in ("pfm", "pgm"):
            candidate = os.path.join(str(self.directory), f"{tag}.{ext}")
            if os.path.exists(candidate):
                loaded = load_depth_map(candidate, kind=self.kind)
                values = loaded.values
                if self.rescale is not None:
                    values = values / self.rescale
                return values
        raise FileNotFoundError(
            f"no {tag}.pfm / {tag}.pgm in {self.directory}"
        )
