"""wmlab: a desk-scale laboratory for image watermark robustness.

Embed four watermark families into procedural scenes, attack them with
distortions, regeneration proxies, and a caption/segment/inpaint pipeline,
then measure detection survival and masked perceptual quality.
"""

__version__ = "0.1.0"
