"""Procedural test scenes: one salient blob on a textured background.

Scenes are built entirely from a seeded stream, so a seed is a complete
scene identifier.  The background uses smooth multi-octave value noise and
the foreground blob gets a contrasting palette plus fine (high-frequency)
speckle, which keeps the mid-frequency bands that the Fourier-domain
watermarks occupy close to quiet on unwatermarked content.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ImageTooSmall
from .imagecore import ImageF, clamp01
from .rng import RngStream
from .transforms import blur_plane

OBJECT_WORDS = (
    "fox", "heron", "beetle", "lantern", "kettle",
    "orchid", "turtle", "falcon", "acorn", "anchor",
)
BACKGROUND_WORDS = (
    "meadow", "dunes", "tundra", "harbor", "orchard",
    "canyon", "glacier", "marsh", "prairie", "reef",
)
STYLE_WORDS = (
    "watercolor", "charcoal", "mosaic", "woodcut", "pastel",
    "ink", "fresco", "linocut", "gouache", "stipple",
)

MIN_SIZE = 64


@dataclass(frozen=True)
class SceneDescriptor:
    """Ground-truth words behind a scene: what, where, and in what style."""

    object_name: str
    background_name: str
    style_name: str


@dataclass(frozen=True)
class Scene:
    image: ImageF
    gt_mask: np.ndarray
    descriptor: SceneDescriptor
    seed: int
    size: int


def _smoothstep(t):
    return t * t * (3.0 - 2.0 * t)


def value_noise(size, cell, stream):
    """Lattice value noise in [-1, 1] with smoothstep interpolation."""
    grid = size // cell + 2
    lattice = stream.uniform(grid * grid).reshape(grid, grid) * 2.0 - 1.0
    t = np.arange(size) / cell
    i0 = t.astype(np.int64)
    f = _smoothstep(t - i0)
    v00 = lattice[np.ix_(i0, i0)]
    v01 = lattice[np.ix_(i0, i0 + 1)]
    v10 = lattice[np.ix_(i0 + 1, i0)]
    v11 = lattice[np.ix_(i0 + 1, i0 + 1)]
    fy, fx = f[:, None], f[None, :]
    top = v00 * (1 - fx) + v01 * fx
    bot = v10 * (1 - fx) + v11 * fx
    return top * (1 - fy) + bot * fy


def fbm_noise(size, base_cell, octaves, persistence, stream):
    """Sum of value-noise octaves with halving cell size."""
    total = np.zeros((size, size))
    amp, norm, cell = 1.0, 0.0, base_cell
    for _ in range(octaves):
        if cell < 2:
            break
        total += amp * value_noise(size, cell, stream)
        norm += amp
        amp *= persistence
        cell //= 2
    return total / norm


_LUMA_VEC = np.array([0.299, 0.587, 0.114])


def _pick_colors(stream):
    """Background color plus a foreground that contrasts in chroma only.

    The foreground offset is built luminance-neutral (the green channel
    cancels the red/blue shifts) with a small random luma lift, so the
    blob edge stays quiet in the mid-frequency luminance bands that the
    Fourier-domain detectors read.
    """
    bg = 0.2 + 0.5 * stream.uniform(3)
    for _ in range(32):
        dr, db = stream.uniform(2) * 1.1 - 0.55
        if max(abs(dr), abs(db)) < 0.33:
            continue
        dg = -(_LUMA_VEC[0] * dr + _LUMA_VEC[2] * db) / _LUMA_VEC[1]
        lift = (float(stream.uniform(1)[0]) - 0.5) * 0.1
        fg = bg + np.array([dr, dg, db]) + lift
        if np.all((fg >= 0.03) & (fg <= 0.97)):
            return fg, bg
    # Degenerate draw streak: force a red/blue swing and clip.
    dr = 0.38 if bg[0] <= 0.5 else -0.38
    db = -0.33 if bg[2] > 0.5 else 0.33
    dg = -(_LUMA_VEC[0] * dr + _LUMA_VEC[2] * db) / _LUMA_VEC[1]
    fg = np.clip(bg + np.array([dr, dg, db]), 0.02, 0.98)
    return fg, bg


def _blob_geometry(size, stream):
    """Center, radii, and radial harmonics for the foreground blob."""
    target_cov = 0.12 + 0.26 * float(stream.uniform(1)[0])
    aspect = 0.8 + 0.45 * float(stream.uniform(1)[0])
    n_harm = int(stream.integers(2, 4, 1)[0])
    amps = np.zeros(3)
    phases = np.zeros(3)
    for h in range(n_harm):
        amps[h] = (0.04 + 0.08 * float(stream.uniform(1)[0])) / (h + 1)
        phases[h] = 2.0 * np.pi * float(stream.uniform(1)[0])
    # Perturbed-ellipse area is pi*Rx*Ry*(1 + sum(a^2)/2).
    area_gain = 1.0 + 0.5 * float(np.sum(amps**2))
    r_base = size * np.sqrt(target_cov / (np.pi * area_gain))
    rx = r_base * aspect
    ry = r_base / aspect
    cy = size / 2.0 + size * 0.08 * (float(stream.uniform(1)[0]) - 0.5)
    cx = size / 2.0 + size * 0.08 * (float(stream.uniform(1)[0]) - 0.5)
    return cy, cx, ry, rx, amps, phases


def _blob_fields(size, cy, cx, ry, rx, amps, phases):
    """Crisp inside-the-boundary mask and feathered compositing alpha."""
    y = (np.arange(size) - cy)[:, None] / ry
    x = (np.arange(size) - cx)[None, :] / rx
    rho = np.sqrt(y * y + x * x)
    theta = np.arctan2(np.broadcast_to(y, rho.shape), np.broadcast_to(x, rho.shape))
    thr = np.ones_like(rho)
    for h in range(3):
        if amps[h] != 0.0:
            thr += amps[h] * np.sin((h + 1) * theta + phases[h])
    mask = rho <= thr
    feather = 5.0 / np.sqrt(rx * ry)
    alpha = _smoothstep(np.clip((thr - rho) / feather + 0.5, 0.0, 1.0))
    return mask, alpha


def generate_scene(seed, size=256):
    """Deterministic scene for a seed: image, ground-truth mask, words."""
    if size < MIN_SIZE:
        raise ImageTooSmall(f"size must be >= {MIN_SIZE}")
    root = RngStream(seed)
    words = root.child("words")
    descriptor = SceneDescriptor(
        object_name=words.pick(OBJECT_WORDS),
        background_name=words.pick(BACKGROUND_WORDS),
        style_name=words.pick(STYLE_WORDS),
    )
    fg_color, bg_color = _pick_colors(root.child("palette"))

    bg_stream = root.child("background")
    # Base cell of 2*size keeps the finest octave's lattice frequency at
    # four cycles per image, below the detectors' reading bands.
    shade = fbm_noise(size, 2 * size, 4, 0.5, bg_stream)
    shade_vec = 0.05 + 0.1 * bg_stream.uniform(3)
    bg_tex = bg_color[None, None, :] + shade[:, :, None] * shade_vec[None, None, :]

    fg_stream = root.child("foreground")
    speckle = value_noise(size, 3, fg_stream)
    # Two highpass passes square the low-frequency rolloff, so the
    # speckle's leakage into the detectors' mid bands is negligible while
    # its fine grain is untouched.
    speckle = speckle - blur_plane(speckle, 1.5)
    speckle = speckle - blur_plane(speckle, 1.5)
    fg_amp = 0.22 + 0.08 * float(fg_stream.uniform(1)[0])
    tone = fbm_noise(size, size // 2, 2, 0.5, fg_stream)
    fg_tex = (
        fg_color[None, None, :]
        + speckle[:, :, None] * fg_amp
        + tone[:, :, None] * 0.05
    )

    cy, cx, ry, rx, amps, phases = _blob_geometry(size, root.child("blob"))
    gt_mask, alpha = _blob_fields(size, cy, cx, ry, rx, amps, phases)
    blended = bg_tex * (1.0 - alpha[:, :, None]) + fg_tex * alpha[:, :, None]
    image = clamp01(ImageF.from_array(blended))
    return Scene(image=image, gt_mask=gt_mask, descriptor=descriptor, seed=int(seed), size=size)


def describe_scene(scene):
    """Ground-truth answers for the three caption questions.

    Returns (object, background, style) words; an oracle stand-in for a
    vision-language captioner.
    """
    return (
        scene.descriptor.object_name,
        scene.descriptor.background_name,
        scene.descriptor.style_name,
    )
