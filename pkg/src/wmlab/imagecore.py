"""Float image type, PNG boundaries, and binary mask helpers.

Images travel through the library as float64 RGB planes.  Values may leave
[0, 1] mid-pipeline (some attacks work on a slightly wider range); they are
clamped only when a PNG is written.  Masks are plain bool arrays where true
means foreground / preserved.
"""

import io
from dataclasses import dataclass

import numpy as np
from PIL import Image, UnidentifiedImageError
from scipy import ndimage

from .errors import (
    DimensionMismatch,
    EmptyMask,
    InvalidParameter,
    MalformedFile,
    UnsupportedFormat,
)

# ITU-R 601 luma weights.
_LUMA = np.array([0.299, 0.587, 0.114])


@dataclass(frozen=True)
class ImageF:
    """RGB image, float64, shape (height, width, 3), finite values."""

    data: np.ndarray

    def __post_init__(self):
        d = self.data
        if d.ndim != 3 or d.shape[2] != 3:
            raise DimensionMismatch(f"expected (H, W, 3), got {d.shape}")
        if d.shape[0] < 1 or d.shape[1] < 1:
            raise DimensionMismatch("empty image")
        if d.dtype != np.float64:
            raise InvalidParameter("ImageF requires float64 data")
        if not np.isfinite(d).all():
            raise InvalidParameter("non-finite pixel values")

    @property
    def height(self):
        return self.data.shape[0]

    @property
    def width(self):
        return self.data.shape[1]

    @staticmethod
    def from_array(arr):
        """Validate and wrap an array, copying to float64."""
        return ImageF(np.ascontiguousarray(arr, dtype=np.float64))

    @staticmethod
    def zeros(height, width):
        return ImageF(np.zeros((height, width, 3)))


def luminance(img):
    """Rec. 601 luma plane of an ImageF, shape (H, W)."""
    return img.data @ _LUMA


def add_luminance(img, plane):
    """Add a luma offset plane equally to all three channels.

    Adding w to each channel raises the 601 luma by exactly w, so the
    luminance plane of the result is luminance(img) + plane.
    """
    if plane.shape != img.data.shape[:2]:
        raise DimensionMismatch("plane shape differs from image")
    return ImageF(img.data + plane[:, :, None])


def clamp01(img):
    """Clip all channels to [0, 1]."""
    return ImageF(np.clip(img.data, 0.0, 1.0))


def composite(fg, bg, mask):
    """Mask-true pixels taken bit-for-bit from fg, the rest from bg."""
    _check_mask(mask, fg.data.shape[:2])
    if fg.data.shape != bg.data.shape:
        raise DimensionMismatch("image shapes differ")
    return ImageF(np.where(mask[:, :, None], fg.data, bg.data))


# ---------------------------------------------------------------------------
# PNG boundaries.  8-bit only ever exists here.


def _to_bytes_u8(values):
    # Round half up: 0.5/255 must land on byte 128, not banker's 127.
    v = np.clip(values, 0.0, 1.0)
    return np.floor(v * 255.0 + 0.5).astype(np.uint8)


def encode_png(img):
    """Serialize an ImageF to PNG bytes (values clamped to [0, 1])."""
    buf = io.BytesIO()
    Image.fromarray(_to_bytes_u8(img.data), mode="RGB").save(buf, format="PNG")
    return buf.getvalue()


def decode_png(data):
    """Parse PNG (or other Pillow-readable raster) bytes into an ImageF."""
    try:
        pil = Image.open(io.BytesIO(data))
        pil.load()
    except (UnidentifiedImageError, OSError, SyntaxError) as exc:
        raise MalformedFile(f"cannot decode image: {exc}") from None
    if pil.mode in ("I", "I;16", "I;16B", "I;16L", "F"):
        raise UnsupportedFormat(f"unsupported bit depth: mode {pil.mode}")
    if pil.mode != "RGB":
        pil = pil.convert("RGB")
    arr = np.asarray(pil, dtype=np.float64) / 255.0
    return ImageF(arr)


def write_png(path, img):
    with open(path, "wb") as fh:
        fh.write(encode_png(img))


def read_png(path):
    with open(path, "rb") as fh:
        return decode_png(fh.read())


def encode_mask_png(mask):
    """Serialize a bool mask as 8-bit grayscale PNG, true -> 255."""
    _check_mask(mask, mask.shape)
    buf = io.BytesIO()
    arr = np.where(mask, 255, 0).astype(np.uint8)
    Image.fromarray(arr, mode="L").save(buf, format="PNG")
    return buf.getvalue()


def decode_mask_png(data):
    """Parse a grayscale PNG into a bool mask; values >= 128 read true."""
    try:
        pil = Image.open(io.BytesIO(data))
        pil.load()
    except (UnidentifiedImageError, OSError, SyntaxError) as exc:
        raise MalformedFile(f"cannot decode mask: {exc}") from None
    if pil.mode != "L":
        pil = pil.convert("L")
    return np.asarray(pil) >= 128


def write_mask_png(path, mask):
    with open(path, "wb") as fh:
        fh.write(encode_mask_png(mask))


def read_mask_png(path):
    with open(path, "rb") as fh:
        return decode_mask_png(fh.read())


# ---------------------------------------------------------------------------
# Mask operations.


def _check_mask(mask, shape):
    if not isinstance(mask, np.ndarray) or mask.dtype != np.bool_ or mask.ndim != 2:
        raise InvalidParameter("mask must be a 2-D bool array")
    if mask.shape != tuple(shape):
        raise DimensionMismatch("mask shape differs from image")


def mask_coverage(mask):
    """Fraction of true pixels."""
    return float(np.count_nonzero(mask)) / mask.size


def invert_mask(mask):
    return ~mask


def dilate_mask(mask, iterations=1):
    """Dilate with the 3x3 box, the given number of times."""
    if iterations < 0:
        raise InvalidParameter("iterations must be >= 0")
    if iterations == 0:
        return mask.copy()
    return ndimage.binary_dilation(
        mask, structure=np.ones((3, 3), dtype=bool), iterations=iterations
    )


def largest_component(mask):
    """Largest 4-connected true component.

    Ties break to the component whose first pixel comes earliest in
    row-major scan order.  Raises EmptyMask if no pixel is true.
    """
    if not mask.any():
        raise EmptyMask("mask has no true pixels")
    labels, count = ndimage.label(mask)  # default structure = 4-connectivity
    sizes = ndimage.sum_labels(mask, labels, index=np.arange(1, count + 1))
    # scipy assigns label numbers in raster-scan order of first occurrence,
    # so argmax's first-wins tie break matches the scan-order rule.
    best = int(np.argmax(sizes)) + 1
    return labels == best


def connected_components(mask):
    """All 4-connected true components, largest first.

    Ties keep raster-scan order of first occurrence.  Empty mask gives an
    empty list.
    """
    if not mask.any():
        return []
    labels, count = ndimage.label(mask)
    sizes = ndimage.sum_labels(mask, labels, index=np.arange(1, count + 1))
    order = np.argsort(-sizes, kind="stable")
    return [labels == int(i) + 1 for i in order]


def ellipse_mask(height, width, coverage):
    """Centered axis-aligned ellipse covering roughly the given fraction."""
    if not 0.0 < coverage < 1.0:
        raise InvalidParameter("coverage must be in (0, 1)")
    s = np.sqrt(coverage / np.pi)
    ry, rx = height * s, width * s
    cy, cx = (height - 1) / 2.0, (width - 1) / 2.0
    y = (np.arange(height) - cy) / ry
    x = (np.arange(width) - cx) / rx
    return (y[:, None] ** 2 + x[None, :] ** 2) <= 1.0
