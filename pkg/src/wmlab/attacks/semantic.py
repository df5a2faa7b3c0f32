"""The caption -> segment -> summarize -> inpaint attack pipeline.

Each stage is a swappable callable, so the same orchestration runs
against the deterministic built-ins or an external model server.  The
pipeline regenerates the background while compositing the original
foreground back pixel-for-pixel; on excessive masking the roles swap
and the object region is regenerated instead.
"""

import time
from dataclasses import dataclass

import numpy as np

from ..errors import (
    BackendFailure,
    DimensionMismatch,
    EmptyCandidates,
    FullMask,
    InvalidParameter,
)
from ..imagecore import composite, ellipse_mask, invert_mask, mask_coverage
from .inpaint import builtin_inpaint
from .segment import builtin_segment

CAPTION_QUESTIONS = (
    "What is the prominent object in this image?",
    "What is the background?",
    "What is the artistic direction of the image?",
)
SUMMARY_TEMPLATE = (
    "Given the following sentences that describe an image, write in one "
    "sentence what the background setting is and in what art style."
)

DEFAULT_TAU = 0.5
DEFAULT_TAU_MAX = 0.85
_FALLBACK_COVERAGE = 0.25


@dataclass(frozen=True)
class StageBackends:
    """The four pipeline stages as callables.

    caption(image, questions) -> three answer strings;
    segment(image, object_phrase) -> ranked list of masks;
    summarize(answers) -> inpainting prompt;
    inpaint(image, region_mask, prompt) -> image.
    """

    caption: object
    segment: object
    summarize: object
    inpaint: object


@dataclass(frozen=True)
class AttackResult:
    image: object
    preserved_mask: np.ndarray
    prompt_used: str
    stage_log: tuple


def build_summary_prompt(answers):
    """Deterministic stand-in for the LLM rewriter: apply the template
    to the background and style answers."""
    return f"{SUMMARY_TEMPLATE} The background is {answers[1]}. The style is {answers[2]}."


def builtin_stage_backends(caption_answers=None):
    """Fully in-process backends; `caption_answers` overrides the three
    generic answers (the harness passes scene ground truth here)."""
    answers = (
        tuple(caption_answers)
        if caption_answers is not None
        else ("the prominent object", "a textured field", "abstract")
    )
    if len(answers) != 3:
        raise InvalidParameter("caption_answers must have three entries")
    return StageBackends(
        caption=lambda img, questions: answers,
        segment=lambda img, phrase: builtin_segment(img),
        summarize=build_summary_prompt,
        inpaint=builtin_inpaint,
    )


def accumulate_masks(candidates, tau, tau_max):
    """Union candidates in rank order under the coverage budget.

    The first candidate is always taken, so the foreground is never
    empty; growth stops before coverage would exceed tau.  A union still
    above tau_max flags the caller to swap inpainting roles.
    """
    if not candidates:
        raise EmptyCandidates("accumulate_masks needs at least one mask")
    if not 0.0 < tau < tau_max <= 1.0:
        raise InvalidParameter("need 0 < tau < tau_max <= 1")
    shape = candidates[0].shape
    for c in candidates[1:]:
        if c.shape != shape:
            raise DimensionMismatch("candidate masks differ in shape")
    union = candidates[0].copy()
    for c in candidates[1:]:
        grown = union | c
        if mask_coverage(grown) > tau:
            break
        union = grown
    return union, mask_coverage(union) > tau_max


def semantic_regen(img, backends, tau=DEFAULT_TAU, tau_max=DEFAULT_TAU_MAX, rng=None):
    """Run the full pipeline; see the module docstring for the flow.

    `rng` is accepted for attack-signature uniformity; the built-in
    stages are deterministic and do not draw from it.
    """
    del rng
    if not 0.0 < tau < tau_max <= 1.0:
        raise InvalidParameter("need 0 < tau < tau_max <= 1")
    h, w = img.data.shape[:2]
    log = []

    t0 = time.perf_counter()
    answers = tuple(backends.caption(img, CAPTION_QUESTIONS))
    if len(answers) != 3:
        raise BackendFailure("caption", f"expected 3 answers, got {len(answers)}")
    log.append(("caption", time.perf_counter() - t0))

    t0 = time.perf_counter()
    candidates = backends.segment(img, answers[0])
    if candidates:
        foreground, fallback_used = accumulate_masks(candidates, tau, tau_max)
    else:
        # Segmentation came back empty; assume a centered subject.
        foreground = ellipse_mask(h, w, _FALLBACK_COVERAGE)
        fallback_used = False
    log.append(("segment", time.perf_counter() - t0))

    t0 = time.perf_counter()
    prompt = backends.summarize(answers)
    log.append(("summarize", time.perf_counter() - t0))

    region = foreground if fallback_used else invert_mask(foreground)
    if region.all():
        raise FullMask("nothing left to preserve")

    t0 = time.perf_counter()
    repainted = backends.inpaint(img, region, prompt)
    if repainted.data.shape != img.data.shape:
        raise BackendFailure("inpaint", "backend changed the image size")
    log.append(("inpaint", time.perf_counter() - t0))

    preserved = invert_mask(region)
    out = composite(img, repainted, preserved)
    return AttackResult(
        image=out,
        preserved_mask=preserved,
        prompt_used=prompt,
        stage_log=tuple(log),
    )
