"""Watermark key types, seeded derivation, and the key file format.

Keys are small parameter records; the bulky material (coefficient pairs,
patterns, complex bin values) is re-derived from the seed on use, so a
serialized key is short and canonical.

File format: first line "wmlab-key <version>", then "name = value" lines
with numbers in plain decimal.  Version 1 is current.
"""

from dataclasses import dataclass, fields

from ..errors import (
    ImageTooSmall,
    InvalidParameter,
    MalformedFile,
    NotPowerOfTwo,
    UnsupportedFormat,
)
from .fourier import half_plane_annulus_bins
from .messages import MESSAGE_BITS

KEY_FORMAT = "wmlab-key"
KEY_VERSION = 1

# Mid-band limits (Manhattan index sum) for DWT/DCT coefficient pairs.
MIDBAND_LOW = 6
MIDBAND_HIGH = 24


@dataclass(frozen=True)
class DwtDctKey:
    seed: int
    delta: float = 0.04

    codec = "dwtdct"

    def __post_init__(self):
        if self.delta < 0:
            raise InvalidParameter("delta must be >= 0")


@dataclass(frozen=True)
class SpreadKey:
    seed: int
    width: int = 256
    height: int = 256
    alpha: float = 0.015

    codec = "spread"

    def __post_init__(self):
        if self.alpha < 0:
            raise InvalidParameter("alpha must be >= 0")
        if self.width < 64 or self.height < 64:
            raise InvalidParameter("pattern size must be >= 64")


def _check_fourier_geometry(size, r_inner, r_outer):
    if size < 64:
        raise ImageTooSmall("size must be >= 64")
    if size & (size - 1):
        raise NotPowerOfTwo(f"size {size} is not a power of two")
    if not 2 <= r_inner < r_outer <= size // 2 - 2:
        raise InvalidParameter("annulus radii out of range")


@dataclass(frozen=True)
class RingKey:
    seed: int
    size: int = 256
    gamma: float = 0.08
    inversion_sigma: float = 2.0
    r_inner: float = 10.0
    r_outer: float = 14.0

    codec = "ring"

    def __post_init__(self):
        if self.gamma < 0:
            raise InvalidParameter("gamma must be >= 0")
        if self.inversion_sigma <= 0:
            raise InvalidParameter("inversion_sigma must be > 0")
        _check_fourier_geometry(self.size, self.r_inner, self.r_outer)


@dataclass(frozen=True)
class LatentBitKey:
    seed: int
    size: int = 256
    gamma: float = 0.08
    inversion_sigma: float = 2.0
    r_inner: float = 16.0
    r_outer: float = 22.0
    value_scale: float = 2.5
    group_size: int = 8

    codec = "latentbit"

    def __post_init__(self):
        if self.gamma < 0:
            raise InvalidParameter("gamma must be >= 0")
        if self.inversion_sigma <= 0:
            raise InvalidParameter("inversion_sigma must be > 0")
        if self.value_scale <= 0:
            raise InvalidParameter("value_scale must be > 0")
        if self.group_size < 1:
            raise InvalidParameter("group_size must be >= 1")
        _check_fourier_geometry(self.size, self.r_inner, self.r_outer)


def _scaled_radius(base, size):
    return base * size / 256.0


def derive_dwtdct_key(seed, delta=0.04):
    return DwtDctKey(seed=int(seed), delta=float(delta))


def derive_spread_key(seed, width=256, height=256, alpha=0.015):
    return SpreadKey(seed=int(seed), width=int(width), height=int(height), alpha=float(alpha))


def derive_ring_key(seed, size=256, gamma=0.08, inversion_sigma=2.0, r_inner=None, r_outer=None):
    r_in = _scaled_radius(10.0, size) if r_inner is None else float(r_inner)
    r_out = _scaled_radius(14.0, size) if r_outer is None else float(r_outer)
    return RingKey(
        seed=int(seed),
        size=int(size),
        gamma=float(gamma),
        inversion_sigma=float(inversion_sigma),
        r_inner=r_in,
        r_outer=r_out,
    )


def derive_latentbit_key(
    seed,
    size=256,
    gamma=0.08,
    inversion_sigma=2.0,
    r_inner=None,
    r_outer=None,
    value_scale=2.5,
    group_size=8,
):
    r_in = _scaled_radius(16.0, size) if r_inner is None else float(r_inner)
    r_out = _scaled_radius(22.0, size) if r_outer is None else float(r_outer)
    key = LatentBitKey(
        seed=int(seed),
        size=int(size),
        gamma=float(gamma),
        inversion_sigma=float(inversion_sigma),
        r_inner=r_in,
        r_outer=r_out,
        value_scale=float(value_scale),
        group_size=int(group_size),
    )
    available = half_plane_annulus_bins(key.size, key.r_inner, key.r_outer)[0].shape[0]
    if available < MESSAGE_BITS * key.group_size:
        raise InvalidParameter("annulus too thin for 32 disjoint groups")
    return key


KEY_TYPES = {
    "dwtdct": DwtDctKey,
    "spread": SpreadKey,
    "ring": RingKey,
    "latentbit": LatentBitKey,
}


def serialize_key(key):
    """Render a key as versioned name = value text."""
    lines = [f"{KEY_FORMAT} {KEY_VERSION}", f"codec = {key.codec}"]
    for f in fields(key):
        lines.append(f"{f.name} = {getattr(key, f.name)!r}")
    return "\n".join(lines) + "\n"


def parse_key(text):
    """Parse serialize_key output back into the right key type."""
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise MalformedFile("empty key file")
    head = lines[0].split()
    if len(head) != 2 or head[0] != KEY_FORMAT:
        raise MalformedFile(f"bad key header: {lines[0]!r}")
    if head[1] != str(KEY_VERSION):
        raise UnsupportedFormat(f"unsupported key version {head[1]}")
    values = {}
    for ln in lines[1:]:
        if "=" not in ln:
            raise MalformedFile(f"bad key line: {ln!r}")
        name, _, raw = ln.partition("=")
        values[name.strip()] = raw.strip()
    codec = values.pop("codec", None)
    if codec not in KEY_TYPES:
        raise MalformedFile(f"unknown codec {codec!r}")
    cls = KEY_TYPES[codec]
    kwargs = {}
    for f in fields(cls):
        if f.name not in values:
            raise MalformedFile(f"missing key field {f.name!r}")
        raw = values.pop(f.name)
        try:
            kwargs[f.name] = (int if f.type is int else float)(raw)
        except ValueError:
            raise MalformedFile(f"bad value for {f.name!r}: {raw!r}") from None
    if values:
        raise MalformedFile(f"unexpected key fields: {sorted(values)}")
    return cls(**kwargs)


def write_key(path, key):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(serialize_key(key))


def read_key(path):
    with open(path, "r", encoding="utf-8") as fh:
        return parse_key(fh.read())
