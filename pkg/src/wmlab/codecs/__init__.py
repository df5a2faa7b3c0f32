"""Watermark codec families and their shared detection statistics."""

from .chi2 import ncx2_cdf
from .dwtdct import dwtdct_embed, dwtdct_extract, midband_pairs
from .fourier import (
    half_plane_annulus_bins,
    latentbit_embed,
    latentbit_extract,
    latentbit_groups,
    ring_detect,
    ring_embed,
    ring_key_values,
)
from .keys import (
    DwtDctKey,
    LatentBitKey,
    RingKey,
    SpreadKey,
    derive_dwtdct_key,
    derive_latentbit_key,
    derive_ring_key,
    derive_spread_key,
    parse_key,
    read_key,
    serialize_key,
    write_key,
)
from .messages import MESSAGE_BITS, BitMessage, bit_accuracy
from .outcomes import BitOutcome, PValueOutcome
from .spread import spread_embed, spread_extract, spread_patterns

__all__ = [
    "ncx2_cdf",
    "dwtdct_embed",
    "dwtdct_extract",
    "midband_pairs",
    "half_plane_annulus_bins",
    "latentbit_embed",
    "latentbit_extract",
    "latentbit_groups",
    "ring_detect",
    "ring_embed",
    "ring_key_values",
    "DwtDctKey",
    "LatentBitKey",
    "RingKey",
    "SpreadKey",
    "derive_dwtdct_key",
    "derive_latentbit_key",
    "derive_ring_key",
    "derive_spread_key",
    "parse_key",
    "read_key",
    "serialize_key",
    "write_key",
    "MESSAGE_BITS",
    "BitMessage",
    "bit_accuracy",
    "BitOutcome",
    "PValueOutcome",
    "spread_embed",
    "spread_extract",
    "spread_patterns",
]
