"""Command-line surface: embed/detect/attack/metric/scenegen/bench/calibrate.

Exit codes: 0 success, 1 configuration or parameter error, 2 partial
failure (some bench cells failed), 3 I/O error.
"""

import argparse
import json
import sys
from dataclasses import replace

from .attacks import SemanticRegen, apply_attack, parse_attack_spec
from .bench import calibrate_null, parse_config, run_bench
from .codecs import (
    BitMessage,
    DwtDctKey,
    LatentBitKey,
    RingKey,
    SpreadKey,
    derive_dwtdct_key,
    derive_latentbit_key,
    derive_ring_key,
    derive_spread_key,
    dwtdct_embed,
    dwtdct_extract,
    latentbit_embed,
    latentbit_extract,
    read_key,
    ring_detect,
    ring_embed,
    spread_embed,
    spread_extract,
    write_key,
)
from .errors import ConfigError, IoError, MalformedFile, WmlabError
from .imagecore import read_mask_png, read_png, write_mask_png, write_png
from .metrics import quality_report
from .report import FORMATS, emit_report
from .rng import RngStream
from .scenegen import describe_scene, generate_scene

_CODECS = ("dwtdct", "spread", "ring", "latentbit")

_KEY_TYPES = {
    "dwtdct": DwtDctKey,
    "spread": SpreadKey,
    "ring": RingKey,
    "latentbit": LatentBitKey,
}


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on bad usage, which collides with the
    # "partial failure" exit code; route usage problems to status 1.
    def error(self, message):
        raise _UsageError(message)


def _build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="deterministic seed")
    common.add_argument("--size", type=int, default=256, help="image size in pixels")
    common.add_argument("--out", default=None, help="output file path")

    parser = _Parser(prog="wmlab", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("keygen", parents=[common], help="derive and write a codec key")
    p.add_argument("codec", choices=_CODECS)

    p = sub.add_parser("embed", parents=[common], help="embed a watermark")
    p.add_argument("codec", choices=_CODECS)
    p.add_argument("input", help="scene PNG")
    p.add_argument("key", help="key file from keygen")
    p.add_argument("--message", help="32-bit payload as 0/1 string (bit codecs)")

    p = sub.add_parser("detect", parents=[common], help="detect a watermark")
    p.add_argument("codec", choices=_CODECS)
    p.add_argument("input", help="image PNG")
    p.add_argument("key", help="key file from keygen")
    p.add_argument("--truth", help="true payload for bit-accuracy scoring")

    p = sub.add_parser("attack", parents=[common], help="apply an attack")
    p.add_argument("spec", help="compact attack string, e.g. blur:sigma=1.0")
    p.add_argument("input", help="image PNG")
    p.add_argument("--mask-out", help="write the preserved mask PNG here")

    p = sub.add_parser("metric", parents=[common], help="compare two images")
    p.add_argument("a", help="reference PNG")
    p.add_argument("b", help="test PNG")
    p.add_argument("--mask", help="foreground mask PNG for mSSIM")

    p = sub.add_parser("scenegen", parents=[common], help="generate a test scene")
    p.add_argument("scene_seed", type=int, help="scene seed")
    p.add_argument("--mask-out", help="write the ground-truth mask PNG here")

    p = sub.add_parser("bench", parents=[common], help="run a benchmark grid")
    p.add_argument("config", help="bench config file")
    p.add_argument("--workers", type=int, default=None, help="override worker count")
    p.add_argument("--outdir", default=None, help="override output directory")
    p.add_argument(
        "--formats",
        default=",".join(FORMATS),
        help="comma list from csv,markdown,structured,svg",
    )

    p = sub.add_parser("calibrate", parents=[common], help="null-calibrate the ring detector")
    p.add_argument("config", help="bench config file")
    p.add_argument("--trials", type=int, required=True, help="unwatermarked scenes to score")
    return parser


def _emit(text, out_path):
    print(text)
    if out_path:
        with open(out_path, "w", encoding="utf-8") as f:
            f.write(text + "\n")


def _load_key(path, codec):
    key = read_key(path)
    expected = _KEY_TYPES[codec]
    if not isinstance(key, expected):
        raise MalformedFile(
            f"key file holds a {type(key).__name__}, not a {expected.__name__}"
        )
    return key


def _message_from(args):
    if args.message is not None:
        return BitMessage.from_string(args.message)
    return BitMessage.random(RngStream(args.seed).child("message"))


def _cmd_keygen(args):
    if args.out is None:
        raise ConfigError("keygen needs --out")
    if args.codec == "dwtdct":
        key = derive_dwtdct_key(args.seed)
    elif args.codec == "spread":
        key = derive_spread_key(args.seed, width=args.size, height=args.size)
    elif args.codec == "ring":
        key = derive_ring_key(args.seed, size=args.size)
    else:
        key = derive_latentbit_key(args.seed, size=args.size)
    write_key(args.out, key)
    print(f"wrote {args.codec} key {args.out}")
    return 0


def _cmd_embed(args):
    if args.out is None:
        raise ConfigError("embed needs --out")
    img = read_png(args.input)
    key = _load_key(args.key, args.codec)
    if args.codec == "dwtdct":
        message = _message_from(args)
        out = dwtdct_embed(img, key, message)
        print(f"message {message.to_string()}")
    elif args.codec == "spread":
        message = _message_from(args)
        out = spread_embed(img, key, message)
        print(f"message {message.to_string()}")
    elif args.codec == "ring":
        out = ring_embed(img, key, noise_seed=args.seed)
        print(f"carrier seed {args.seed}")
    else:
        message = _message_from(args)
        out = latentbit_embed(img, key, message, noise_seed=args.seed)
        print(f"message {message.to_string()} carrier seed {args.seed}")
    write_png(args.out, out)
    print(f"wrote {args.out}")
    return 0


def _cmd_detect(args):
    img = read_png(args.input)
    key = _load_key(args.key, args.codec)
    if args.codec == "ring":
        outcome = ring_detect(img, key)
        text = "\n".join(
            [
                f"p_value {outcome.p_value!r}",
                f"eta {outcome.eta!r}",
                f"dof {outcome.dof}",
                f"noncentrality {outcome.noncentrality!r}",
                f"removed {'true' if outcome.p_value > 0.05 else 'false'}",
            ]
        )
    else:
        extract = {
            "dwtdct": dwtdct_extract,
            "spread": spread_extract,
            "latentbit": latentbit_extract,
        }[args.codec]
        outcome = extract(img, key)
        lines = [f"bits {outcome.extracted.to_string()}"]
        if args.truth is not None:
            scored = outcome.scored(BitMessage.from_string(args.truth))
            lines.append(f"bit_accuracy {scored.bit_accuracy!r}")
            lines.append(
                f"removed {'true' if scored.bit_accuracy < 0.75 else 'false'}"
            )
        text = "\n".join(lines)
    _emit(text, args.out)
    return 0


def _cmd_attack(args):
    if args.out is None:
        raise ConfigError("attack needs --out")
    spec = parse_attack_spec(args.spec)
    img = read_png(args.input)
    result = apply_attack(img, spec, RngStream(args.seed).child("attack"))
    write_png(args.out, result.image)
    if args.mask_out:
        write_mask_png(args.mask_out, result.preserved_mask)
    for stage, duration in result.stage_log:
        print(f"stage {stage}: {duration:.3f}s")
    if isinstance(spec, SemanticRegen):
        print(f"prompt: {result.prompt_used}")
        print(f"preserved coverage {result.preserved_mask.mean():.4f}")
    print(f"wrote {args.out}")
    return 0


def _cmd_metric(args):
    a = read_png(args.a)
    b = read_png(args.b)
    mask = read_mask_png(args.mask) if args.mask else None
    q = quality_report(a, b, mask=mask)
    lines = [f"mse {q.mse!r}", f"psnr {q.psnr!r}", f"ssim {q.ssim!r}"]
    if q.mssim is not None:
        lines.append(f"mssim {q.mssim!r}")
    _emit("\n".join(lines), args.out)
    return 0


def _cmd_scenegen(args):
    if args.out is None:
        raise ConfigError("scenegen needs --out")
    scene = generate_scene(args.scene_seed, args.size)
    write_png(args.out, scene.image)
    if args.mask_out:
        write_mask_png(args.mask_out, scene.gt_mask)
    obj, background, style = describe_scene(scene)
    print(f"object {obj}")
    print(f"background {background}")
    print(f"style {style}")
    print(f"wrote {args.out}")
    return 0


def _read_config(path):
    try:
        with open(path, "r", encoding="utf-8") as f:
            return parse_config(f.read())
    except OSError as exc:
        raise IoError(str(exc)) from exc


def _cmd_bench(args):
    config = _read_config(args.config)
    if args.workers is not None:
        config = replace(config, workers=args.workers)
    if args.outdir is not None:
        config = replace(config, outdir=args.outdir)
    formats = tuple(f.strip() for f in args.formats.split(",") if f.strip())

    def progress(done, total):
        print(f"\rseed {done}/{total}", end="", file=sys.stderr, flush=True)

    report = run_bench(config, progress=progress)
    print(file=sys.stderr)
    paths = emit_report(report, formats=formats)
    for fmt in formats:
        print(f"wrote {paths[fmt]}")
    failed = [c for c in report.cells if c.failed]
    for cell in failed:
        print(f"cell ({cell.watermark}, {cell.attack}) failed: {cell.error}")
    return 2 if failed else 0


def _cmd_calibrate(args):
    config = _read_config(args.config)
    record = calibrate_null(config, args.trials)
    lines = [
        f"trials {record['trials']}",
        f"mean_p {record['mean_p']!r}",
        f"frac_below_0.05 {record['frac_below_0.05']!r}",
        f"warning {'true' if record['warning'] else 'false'}",
        "histogram " + " ".join(str(c) for c in record["histogram"]),
    ]
    print("\n".join(lines))
    if args.out:
        with open(args.out, "w", encoding="utf-8") as f:
            json.dump(record, f, sort_keys=True, indent=2)
            f.write("\n")
        print(f"wrote {args.out}")
    return 0


_COMMANDS = {
    "keygen": _cmd_keygen,
    "embed": _cmd_embed,
    "detect": _cmd_detect,
    "attack": _cmd_attack,
    "metric": _cmd_metric,
    "scenegen": _cmd_scenegen,
    "bench": _cmd_bench,
    "calibrate": _cmd_calibrate,
}


def main(argv=None):
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (IoError, OSError) as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 3
    except WmlabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
