"""Benchmark harness: the (watermark x attack x seed) grid.

Every work item owns a sub-stream hashed from (base_seed, scene_seed,
watermark, attack), so the grid produces identical records no matter how
many workers execute it or in which order results arrive.
"""

import hashlib
import time
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass

import numpy as np

from . import __version__
from .attacks import (
    Identity,
    SemanticRegen,
    apply_attack,
    format_attack_spec,
    parse_attack_spec,
)
from .codecs import (
    BitMessage,
    derive_dwtdct_key,
    derive_latentbit_key,
    derive_ring_key,
    derive_spread_key,
    dwtdct_embed,
    dwtdct_extract,
    latentbit_embed,
    latentbit_extract,
    ring_detect,
    ring_embed,
    spread_embed,
    spread_extract,
)
from .errors import BackendFailure, ConfigError, InvalidParameter
from .metrics import masked_quality_report, mssim, quality_report
from .rng import RngStream
from .scenegen import MIN_SIZE, generate_scene

WATERMARKS = ("dwtdct", "spread", "ring", "latentbit")

CONFIG_HEADER = "wmlab-bench v1"

# Codec override keys the config file accepts, mapped to derive kwargs.
_OVERRIDE_FIELDS = {
    "dwtdct": {"delta": float},
    "spread": {"alpha": float},
    "ring": {"gamma": float, "inversion_sigma": float, "r_inner": float, "r_outer": float},
    "latentbit": {
        "gamma": float,
        "inversion_sigma": float,
        "r_inner": float,
        "r_outer": float,
        "value_scale": float,
        "group_size": int,
    },
}


@dataclass(frozen=True)
class BenchConfig:
    """One benchmark run: grid axes, determinism root, and output knobs."""

    image_size: int = 256
    seed_count: int = 100
    base_seed: int = 0
    watermarks: tuple = WATERMARKS
    attacks: tuple = (Identity(),)
    overrides: tuple = ()  # (("ring.gamma", 0.1), ...)
    outdir: str = "bench-out"
    workers: int = 1

    def validate(self):
        if self.seed_count < 1:
            raise ConfigError("seed_count must be >= 1")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        if not self.watermarks:
            raise ConfigError("at least one watermark required")
        for w in self.watermarks:
            if w not in WATERMARKS:
                raise ConfigError(f"unknown watermark {w!r}")
        if len(set(self.watermarks)) != len(self.watermarks):
            raise ConfigError("duplicate watermark")
        if not self.attacks:
            raise ConfigError("at least one attack required")
        ids = [format_attack_spec(a) for a in self.attacks]
        if len(set(ids)) != len(ids):
            raise ConfigError("duplicate attack spec")
        if self.image_size < MIN_SIZE:
            raise ConfigError(f"image_size must be >= {MIN_SIZE}")
        needs_pow2 = {"ring", "latentbit"} & set(self.watermarks)
        if needs_pow2 and self.image_size & (self.image_size - 1):
            raise ConfigError(
                f"image_size {self.image_size} must be a power of two for "
                + "/".join(sorted(needs_pow2))
            )
        for key, _value in self.overrides:
            codec, _, fname = key.partition(".")
            if codec not in _OVERRIDE_FIELDS or fname not in _OVERRIDE_FIELDS[codec]:
                raise ConfigError(f"unknown codec override {key!r}")
        try:
            build_keys(self)
        except (InvalidParameter, ValueError) as exc:
            # Key derivation is the authority on size/parameter fit
            # (e.g. the latentbit annulus needs room for 32 groups).
            raise ConfigError(str(exc)) from exc

    def attack_ids(self):
        return tuple(format_attack_spec(a) for a in self.attacks)

    def override_map(self, codec):
        out = {}
        for key, value in self.overrides:
            name, _, fname = key.partition(".")
            if name == codec:
                out[fname] = _OVERRIDE_FIELDS[codec][fname](value)
        return out


@dataclass(frozen=True)
class BenchCell:
    """One (watermark, attack) cell: per-seed records plus aggregates."""

    watermark: str
    attack: str
    records: tuple
    aggregates: dict
    failed: bool = False
    error: str = ""


@dataclass(frozen=True)
class BenchReport:
    version: str
    config: BenchConfig
    cells: tuple
    started: str
    finished: str
    duration_s: float

    def cell(self, watermark, attack):
        for c in self.cells:
            if c.watermark == watermark and c.attack == attack:
                return c
        raise KeyError(f"no cell ({watermark}, {attack})")


def derive_subseed(*parts):
    """Stable 64-bit seed hashed from mixed components."""
    text = "\x1f".join(str(p) for p in parts)
    digest = hashlib.blake2b(text.encode(), digest_size=8).digest()
    return int.from_bytes(digest, "big")


def build_keys(config):
    """Derive one key per enabled watermark, honoring codec overrides."""
    keys = {}
    for name in config.watermarks:
        seed = derive_subseed(config.base_seed, "key", name)
        over = config.override_map(name)
        if name == "dwtdct":
            keys[name] = derive_dwtdct_key(seed, **over)
        elif name == "spread":
            keys[name] = derive_spread_key(
                seed, width=config.image_size, height=config.image_size, **over
            )
        elif name == "ring":
            keys[name] = derive_ring_key(seed, size=config.image_size, **over)
        else:
            keys[name] = derive_latentbit_key(seed, size=config.image_size, **over)
    return keys


def _embed(name, key, scene_img, message, noise_seed):
    if name == "dwtdct":
        return dwtdct_embed(scene_img, key, message)
    if name == "spread":
        return spread_embed(scene_img, key, message)
    if name == "ring":
        return ring_embed(scene_img, key, noise_seed=noise_seed)
    return latentbit_embed(scene_img, key, message, noise_seed=noise_seed)


def _detect(name, key, img, message):
    if name == "dwtdct":
        return dwtdct_extract(img, key).scored(message)
    if name == "spread":
        return spread_extract(img, key).scored(message)
    if name == "ring":
        return ring_detect(img, key)
    return latentbit_extract(img, key).scored(message)


def _detection_record(outcome):
    if hasattr(outcome, "p_value"):
        return {
            "kind": "pvalue",
            "p_value": float(outcome.p_value),
            "eta": float(outcome.eta),
            "dof": int(outcome.dof),
            "noncentrality": float(outcome.noncentrality),
        }
    return {
        "kind": "bits",
        "bits": outcome.extracted.to_string(),
        "bit_accuracy": float(outcome.bit_accuracy),
    }


def _quality_record(q):
    rec = {"mse": float(q.mse), "psnr": float(q.psnr), "ssim": float(q.ssim)}
    if q.mssim is not None:
        rec["mssim"] = float(q.mssim)
    return rec


def run_seed(config, index):
    """All cells for one scene seed.

    Returns {(watermark, attack_id): record-or-failure}; failures carry
    an "error" key instead of metric fields.
    """
    scene_seed = config.base_seed + index
    scene = generate_scene(scene_seed, config.image_size)
    keys = build_keys(config)
    out = {}
    for name in config.watermarks:
        message = BitMessage.random(
            RngStream(derive_subseed(config.base_seed, scene_seed, name, "message"))
        )
        noise_seed = derive_subseed(config.base_seed, scene_seed, name, "carrier")
        marked = _embed(name, keys[name], scene.image, message, noise_seed)
        for spec in config.attacks:
            attack_id = format_attack_spec(spec)
            rng = RngStream(
                derive_subseed(config.base_seed, scene_seed, name, attack_id)
            )
            try:
                result = apply_attack(marked, spec, rng)
            except BackendFailure as exc:
                out[(name, attack_id)] = {"seed": scene_seed, "error": str(exc)}
                continue
            detection = _detect(name, keys[name], result.image, message)
            quality = quality_report(marked, result.image, mask=scene.gt_mask)
            masked = masked_quality_report(marked, result.image, scene.gt_mask)
            record = {
                "seed": scene_seed,
                "detection": _detection_record(detection),
                "quality": _quality_record(quality),
                "masked_quality": _quality_record(masked),
                "preserved_coverage": float(result.preserved_mask.mean()),
            }
            if isinstance(spec, SemanticRegen):
                record["mssim_preserved"] = (
                    float(mssim(marked, result.image, result.preserved_mask))
                    if result.preserved_mask.any()
                    else 0.0
                )
            out[(name, attack_id)] = record
    return out


def _cell_aggregates(watermark, records):
    agg = {}
    if watermark == "ring":
        ps = [r["detection"]["p_value"] for r in records]
        agg["ave_p"] = float(np.mean(ps))
        agg["median_p"] = float(np.median(ps))
    else:
        agg["ave_bitacc"] = float(
            np.mean([r["detection"]["bit_accuracy"] for r in records])
        )
    agg["ave_mssim"] = float(np.mean([r["quality"]["mssim"] for r in records]))
    agg["ave_ssim"] = float(np.mean([r["quality"]["ssim"] for r in records]))
    agg["ave_psnr"] = float(np.mean([r["quality"]["psnr"] for r in records]))
    agg["ave_mse"] = float(np.mean([r["quality"]["mse"] for r in records]))
    agg["ave_masked_mse"] = float(
        np.mean([r["masked_quality"]["mse"] for r in records])
    )
    agg["ave_masked_ssim"] = float(
        np.mean([r["masked_quality"]["ssim"] for r in records])
    )
    agg["ave_masked_psnr"] = float(
        np.mean([r["masked_quality"]["psnr"] for r in records])
    )
    if all("mssim_preserved" in r for r in records):
        agg["ave_mssim_preserved"] = float(
            np.mean([r["mssim_preserved"] for r in records])
        )
    return agg


def assemble_cells(config, seed_results):
    """Fold per-seed result maps into sorted BenchCells."""
    cells = []
    for name in sorted(config.watermarks):
        for attack_id in sorted(config.attack_ids()):
            records = []
            errors = []
            for res in seed_results:
                rec = res[(name, attack_id)]
                if "error" in rec:
                    errors.append((rec["seed"], rec["error"]))
                else:
                    records.append(rec)
            records.sort(key=lambda r: r["seed"])
            if errors:
                errors.sort()
                cells.append(
                    BenchCell(
                        watermark=name,
                        attack=attack_id,
                        records=tuple(records),
                        aggregates=_cell_aggregates(name, records) if records else {},
                        failed=True,
                        error=f"seed {errors[0][0]}: {errors[0][1]}",
                    )
                )
            else:
                cells.append(
                    BenchCell(
                        watermark=name,
                        attack=attack_id,
                        records=tuple(records),
                        aggregates=_cell_aggregates(name, records),
                    )
                )
    return tuple(cells)


def run_bench(config, progress=None):
    """Run the full grid and return a BenchReport.

    `progress` is an optional callable(done_seeds, total_seeds) used by
    the CLI for its one-line status display.
    """
    config.validate()
    started = time.time()
    indices = list(range(config.seed_count))
    results = [None] * config.seed_count
    if config.workers == 1:
        for i in indices:
            results[i] = run_seed(config, i)
            if progress:
                progress(i + 1, config.seed_count)
    else:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            futures = {pool.submit(run_seed, config, i): i for i in indices}
            done = 0
            for future in as_completed(futures):
                results[futures[future]] = future.result()
                done += 1
                if progress:
                    progress(done, config.seed_count)
    cells = assemble_cells(config, results)
    finished = time.time()
    return BenchReport(
        version=__version__,
        config=config,
        cells=cells,
        started=_iso(started),
        finished=_iso(finished),
        duration_s=finished - started,
    )


def _iso(stamp):
    return time.strftime("%Y-%m-%dT%H:%M:%S", time.gmtime(stamp)) + "Z"


def calibrate_null(config, trials):
    """Detector honesty check: ring p-values on unwatermarked scenes.

    Returns a record with the 20-bin histogram, mean, fraction below
    0.05, and a warning flag when either leaves its calibrated band.
    """
    if trials < 100:
        raise ConfigError("calibration needs at least 100 trials")
    config.validate()
    if "ring" not in config.watermarks:
        raise ConfigError("calibration requires the ring watermark")
    key = build_keys(config)["ring"]
    ps = []
    for i in range(trials):
        scene = generate_scene(config.base_seed + i, config.image_size)
        ps.append(ring_detect(scene.image, key).p_value)
    ps = np.asarray(ps)
    hist, edges = np.histogram(ps, bins=20, range=(0.0, 1.0))
    mean = float(ps.mean())
    frac_low = float((ps < 0.05).mean())
    return {
        "trials": int(trials),
        "mean_p": mean,
        "frac_below_0.05": frac_low,
        "histogram": [int(c) for c in hist],
        "bin_edges": [float(e) for e in edges],
        "warning": not (0.45 <= mean <= 0.55) or not (0.02 <= frac_low <= 0.09),
    }


def parse_config(text):
    """Parse the versioned flat key=value config format."""
    lines = text.splitlines()
    if not lines or lines[0].strip() != CONFIG_HEADER:
        raise ConfigError(f"config must start with {CONFIG_HEADER!r}")
    fields = {}
    for lineno, raw in enumerate(lines[1:], start=2):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigError(f"line {lineno}: expected key = value")
        key = key.strip()
        value = value.strip()
        if key in fields:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        fields[key] = value
    kwargs = {}
    overrides = []
    for key, value in fields.items():
        try:
            if key in ("image_size", "seed_count", "base_seed", "workers"):
                kwargs[key] = int(value)
            elif key == "watermarks":
                kwargs[key] = tuple(
                    w.strip() for w in value.split(",") if w.strip()
                )
            elif key == "attacks":
                kwargs[key] = tuple(
                    parse_attack_spec(a.strip())
                    for a in value.split(";")
                    if a.strip()
                )
            elif key == "outdir":
                kwargs[key] = value
            elif key.startswith("codec."):
                overrides.append((key[len("codec."):], value))
            else:
                raise ConfigError(f"unknown config key {key!r}")
        except ConfigError:
            raise
        except (ValueError, InvalidParameter) as exc:
            raise ConfigError(f"bad value for {key!r}: {exc}") from exc
    if overrides:
        kwargs["overrides"] = tuple(overrides)
    config = BenchConfig(**kwargs)
    config.validate()
    return config


def format_config(config):
    """Render a BenchConfig back to the flat config format."""
    lines = [
        CONFIG_HEADER,
        f"image_size = {config.image_size}",
        f"seed_count = {config.seed_count}",
        f"base_seed = {config.base_seed}",
        f"watermarks = {', '.join(config.watermarks)}",
        f"attacks = {'; '.join(config.attack_ids())}",
        f"outdir = {config.outdir}",
        f"workers = {config.workers}",
    ]
    for key, value in config.overrides:
        lines.append(f"codec.{key} = {value}")
    return "\n".join(lines) + "\n"
