"""Binary image and float-map file formats.

Three interchange formats, all chosen for bit-exactness across platforms:

* 8-bit binary PGM (P5) / PPM (P6), maxval 255 — raster interchange;
* PFM ("Pf", float32, scale line whose sign encodes endianness, rows stored
  bottom-up) — float maps such as externally produced depth/disparity;
* 16-bit binary PGM (maxval 65535, big-endian) plus a sidecar ``<path>.scale``
  text file holding the meters-per-count factor.

Writers emit a canonical single-whitespace header; readers tolerate runs of
whitespace and ``#`` comments in PNM headers.
"""

from __future__ import annotations

import numpy as np

from .errors import ParseError


def _read_token(buf: bytes, pos: int) -> tuple[bytes, int]:
    """Next whitespace-delimited header token, skipping comments."""
    n = len(buf)
    while pos < n:
        c = buf[pos:pos + 1]
        if c == b"#":
            while pos < n and buf[pos:pos + 1] not in (b"\n", b"\r"):
                pos += 1
        elif c.isspace():
            pos += 1
        else:
            break
    if pos >= n:
        raise ParseError("truncated header", byte_offset=pos)
    start = pos
    while pos < n and not buf[pos:pos + 1].isspace():
        pos += 1
    return buf[start:pos], pos


def _read_int_token(buf: bytes, pos: int, what: str) -> tuple[int, int]:
    token, end = _read_token(buf, pos)
    try:
        return int(token), end
    except ValueError:
        raise ParseError(f"bad {what} {token!r}", byte_offset=pos) from None


def read_pnm(path) -> np.ndarray:
    """Load a binary PGM/PPM. Returns uint8 (h, w) or (h, w, 3)."""
    with open(path, "rb") as fh:
        buf = fh.read()
    magic, pos = _read_token(buf, 0)
    if magic == b"P5":
        channels = 1
    elif magic == b"P6":
        channels = 3
    else:
        raise ParseError(f"not a binary PGM/PPM (magic {magic!r})", byte_offset=0)
    width, pos = _read_int_token(buf, pos, "width")
    height, pos = _read_int_token(buf, pos, "height")
    maxval, pos = _read_int_token(buf, pos, "maxval")
    if width < 1 or height < 1:
        raise ParseError(f"bad dimensions {width}x{height}", byte_offset=pos)
    if maxval != 255:
        raise ParseError(f"unsupported maxval {maxval} (only 255)", byte_offset=pos)
    pos += 1  # single whitespace byte separates header from raster
    need = width * height * channels
    raster = buf[pos:pos + need]
    if len(raster) != need:
        raise ParseError(
            f"raster truncated: expected {need} bytes, got {len(raster)}",
            byte_offset=pos + len(raster),
        )
    data = np.frombuffer(raster, dtype=np.uint8)
    if channels == 1:
        return data.reshape(height, width).copy()
    return data.reshape(height, width, 3).copy()


def write_pnm(path, data: np.ndarray) -> None:
    """Write uint8 gray (h, w) or RGB (h, w, 3) as binary PGM/PPM."""
    arr = np.ascontiguousarray(data, dtype=np.uint8)
    if arr.ndim == 2:
        magic = b"P5"
        h, w = arr.shape
    elif arr.ndim == 3 and arr.shape[2] == 3:
        magic = b"P6"
        h, w = arr.shape[:2]
    else:
        raise ValueError(f"expected (h, w) or (h, w, 3) uint8, got shape {arr.shape}")
    with open(path, "wb") as fh:
        fh.write(magic + b"\n%d %d\n255\n" % (w, h))
        fh.write(arr.tobytes())


def read_pgm16(path, scale_path=None) -> np.ndarray:
    """Load a 16-bit PGM and apply the sidecar scale, returning float32 (h, w).

    The sidecar defaults to ``<path>.scale`` and holds one float: physical
    units per raw count.
    """
    with open(path, "rb") as fh:
        buf = fh.read()
    magic, pos = _read_token(buf, 0)
    if magic != b"P5":
        raise ParseError(f"not a binary PGM (magic {magic!r})", byte_offset=0)
    width, pos = _read_int_token(buf, pos, "width")
    height, pos = _read_int_token(buf, pos, "height")
    maxval, pos = _read_int_token(buf, pos, "maxval")
    if maxval != 65535:
        raise ParseError(f"expected 16-bit PGM (maxval 65535), got {maxval}",
                         byte_offset=pos)
    pos += 1
    need = width * height * 2
    raster = buf[pos:pos + need]
    if len(raster) != need:
        raise ParseError(
            f"raster truncated: expected {need} bytes, got {len(raster)}",
            byte_offset=pos + len(raster),
        )
    raw = np.frombuffer(raster, dtype=">u2").reshape(height, width)
    if scale_path is None:
        scale_path = str(path) + ".scale"
    try:
        with open(scale_path, "r", encoding="ascii") as fh:
            scale = float(fh.read().strip())
    except FileNotFoundError:
        raise ParseError(f"missing sidecar scale file {scale_path}") from None
    except ValueError:
        raise ParseError(f"bad scale value in {scale_path}") from None
    return (raw.astype(np.float32) * np.float32(scale)).astype(np.float32)


def write_pgm16(path, values: np.ndarray, scale: float, scale_path=None) -> None:
    """Write float values as 16-bit PGM counts of ``scale`` units each."""
    if scale <= 0:
        raise ValueError("scale must be positive")
    counts = np.round(np.asarray(values, dtype=np.float64) / scale)
    if counts.min() < 0 or counts.max() > 65535:
        raise ValueError("values do not fit 16-bit counts at this scale")
    arr = counts.astype(">u2")
    h, w = arr.shape
    with open(path, "wb") as fh:
        fh.write(b"P5\n%d %d\n65535\n" % (w, h))
        fh.write(arr.tobytes())
    if scale_path is None:
        scale_path = str(path) + ".scale"
    with open(scale_path, "w", encoding="ascii") as fh:
        fh.write(f"{scale!r}\n")


def read_pfm(path) -> np.ndarray:
    """Load a grayscale PFM as float32 (h, w), top-down row order."""
    with open(path, "rb") as fh:
        buf = fh.read()
    magic, pos = _read_token(buf, 0)
    if magic == b"PF":
        raise ParseError("color PFM not supported (grayscale 'Pf' only)", byte_offset=0)
    if magic != b"Pf":
        raise ParseError(f"not a PFM file (magic {magic!r})", byte_offset=0)
    width, pos = _read_int_token(buf, pos, "width")
    height, pos = _read_int_token(buf, pos, "height")
    token, pos = _read_token(buf, pos)
    try:
        scale = float(token)
    except ValueError:
        raise ParseError(f"bad scale token {token!r}", byte_offset=pos) from None
    if scale == 0:
        raise ParseError("scale must be nonzero", byte_offset=pos)
    pos += 1
    need = width * height * 4
    raster = buf[pos:pos + need]
    if len(raster) != need:
        raise ParseError(
            f"raster truncated: expected {need} bytes, got {len(raster)}",
            byte_offset=pos + len(raster),
        )
    dtype = "<f4" if scale < 0 else ">f4"
    data = np.frombuffer(raster, dtype=dtype).reshape(height, width)
    return data[::-1].astype(np.float32)  # stored bottom-up


def write_pfm(path, values: np.ndarray) -> None:
    """Write float32 (h, w) as grayscale PFM, little-endian, bottom-up."""
    arr = np.asarray(values, dtype="<f4")
    if arr.ndim != 2:
        raise ValueError(f"expected a 2-d map, got shape {arr.shape}")
    h, w = arr.shape
    with open(path, "wb") as fh:
        fh.write(b"Pf\n%d %d\n-1.0\n" % (w, h))
        fh.write(np.ascontiguousarray(arr[::-1]).tobytes())
