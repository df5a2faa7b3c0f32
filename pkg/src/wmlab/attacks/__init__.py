"""Attack suite: distortions, regeneration proxies, and the semantic
pipeline, all behind one `apply_attack` entry point."""

import time

import numpy as np

from ..errors import InvalidParameter
from ..imagecore import ImageF
from .distort import apply_distortion
from .external import (
    DEFAULT_TIMEOUT,
    PROTOCOL_VERSION,
    ExternalBackend,
    call_external_stage,
    external_stage_backends,
)
from .inpaint import builtin_inpaint
from .regen import regen_proxy, rinse
from .segment import builtin_segment, otsu_threshold, saliency_map
from .semantic import (
    CAPTION_QUESTIONS,
    DEFAULT_TAU,
    DEFAULT_TAU_MAX,
    SUMMARY_TEMPLATE,
    AttackResult,
    StageBackends,
    accumulate_masks,
    build_summary_prompt,
    builtin_stage_backends,
    semantic_regen,
)
from .specs import (
    Blur,
    Identity,
    JpegProxy,
    Noise,
    RegenProxy,
    Resize,
    Rinse,
    SemanticRegen,
    format_attack_spec,
    parse_attack_spec,
)

_DISTORTIONS = (Blur, JpegProxy, Resize, Noise)


def apply_attack(img, spec, rng, backends=None):
    """Run any attack spec and wrap the outcome as an AttackResult.

    Distortions guarantee nothing about preserved pixels (all-false
    mask); identity preserves everything.  For SemanticRegen an explicit
    `backends` wins over the spec's backend field, letting a harness
    reuse one external process across many images.
    """
    h, w = img.data.shape[:2]
    t0 = time.perf_counter()
    if isinstance(spec, SemanticRegen):
        if backends is not None:
            return semantic_regen(img, backends, spec.tau, spec.tau_max, rng)
        if spec.backend == "builtin":
            return semantic_regen(
                img, builtin_stage_backends(), spec.tau, spec.tau_max, rng
            )
        if spec.backend.startswith("exec:"):
            with ExternalBackend(spec.backend[len("exec:"):]) as proc:
                return semantic_regen(
                    img,
                    external_stage_backends(proc),
                    spec.tau,
                    spec.tau_max,
                    rng,
                )
        raise InvalidParameter(f"unknown backend {spec.backend!r}")
    if isinstance(spec, Identity):
        image = ImageF.from_array(img.data.copy())
        preserved = np.ones((h, w), dtype=bool)
    elif isinstance(spec, RegenProxy):
        image = regen_proxy(img, spec.strength, spec.steps, rng)
        preserved = np.zeros((h, w), dtype=bool)
    elif isinstance(spec, Rinse):
        image = rinse(img, spec.cycles, spec.strength, spec.steps, rng)
        preserved = np.zeros((h, w), dtype=bool)
    elif isinstance(spec, _DISTORTIONS):
        image = apply_distortion(img, spec, rng)
        preserved = np.zeros((h, w), dtype=bool)
    else:
        raise InvalidParameter(f"unknown attack spec {spec!r}")
    name = format_attack_spec(spec).partition(":")[0]
    return AttackResult(
        image=image,
        preserved_mask=preserved,
        prompt_used="",
        stage_log=((name, time.perf_counter() - t0),),
    )
