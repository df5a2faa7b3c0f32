"""Report emitters: CSV, markdown tables, structured records, SVG scatter.

The structured file is the determinism contract: identical runs produce
byte-identical JSON except for the "timing" entry.  CSV and markdown are
projections of the same aggregates; the SVG plots removal success
against masked quality with one series per attack.
"""

import csv
import json
import math
import os

from matplotlib import rc_context
from matplotlib.backends.backend_svg import FigureCanvasSVG
from matplotlib.figure import Figure

from .attacks import SemanticRegen
from .bench import _cell_aggregates
from .errors import IoError, MalformedFile

FORMATS = ("csv", "markdown", "structured", "svg")

P_REMOVED = 0.05
BITACC_REMOVED = 0.75

_CSV_COLUMNS = (
    "watermark",
    "attack",
    "failed",
    "error",
    "metric",
    "ave_p",
    "median_p",
    "ave_bitacc",
    "ave_mssim",
    "ave_ssim",
    "ave_psnr",
    "ave_mse",
    "ave_masked_mse",
    "ave_masked_ssim",
    "ave_masked_psnr",
    "ave_mssim_preserved",
    "removed",
)


def cell_removed(cell):
    """The removal criterion: p > 0.05 for ring, bit accuracy < 0.75."""
    if "ave_p" in cell.aggregates:
        return cell.aggregates["ave_p"] > P_REMOVED
    if "ave_bitacc" in cell.aggregates:
        return cell.aggregates["ave_bitacc"] < BITACC_REMOVED
    return False


def emit_report(report, formats=FORMATS, outdir=None):
    """Write the selected formats; returns {format: path}."""
    for fmt in formats:
        if fmt not in FORMATS:
            raise IoError(f"unknown report format {fmt!r}")
    outdir = outdir or report.config.outdir
    writers = {
        "csv": ("report.csv", write_csv),
        "markdown": ("report.md", write_markdown),
        "structured": ("report.json", write_structured),
        "svg": ("report.svg", write_svg),
    }
    paths = {}
    try:
        os.makedirs(outdir, exist_ok=True)
        for fmt in formats:
            name, writer = writers[fmt]
            path = os.path.join(outdir, name)
            writer(report, path)
            paths[fmt] = path
    except OSError as exc:
        raise IoError(str(exc)) from exc
    return paths


def _fmt(value):
    # repr keeps full precision so every output format agrees exactly.
    return repr(float(value))


def write_csv(report, path):
    """One RFC-4180 row per cell with every aggregate."""
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(_CSV_COLUMNS)
        for cell in report.cells:
            agg = cell.aggregates
            row = [
                cell.watermark,
                cell.attack,
                "true" if cell.failed else "false",
                cell.error,
                "p" if cell.watermark == "ring" else "bitacc",
            ]
            for col in _CSV_COLUMNS[5:-1]:
                row.append(_fmt(agg[col]) if col in agg else "")
            row.append("" if cell.failed else ("true" if cell_removed(cell) else "false"))
            writer.writerow(row)


def _detect_text(cell):
    if cell.failed and not cell.aggregates:
        return "failed"
    if "ave_p" in cell.aggregates:
        text = f"{cell.aggregates['ave_p']:.3g}"
    else:
        text = f"{cell.aggregates['ave_bitacc']:.4f}"
    if cell_removed(cell):
        text += " (removed)"
    if cell.failed:
        text += " (partial)"
    return text


def _md_table(header, rows):
    lines = ["| " + " | ".join(header) + " |"]
    lines.append("| " + " | ".join("---" for _ in header) + " |")
    for row in rows:
        lines.append("| " + " | ".join(row) + " |")
    return lines


def write_markdown(report, path):
    """Three tables: detection, masked quality, pre/post-mask quality."""
    config = report.config
    watermarks = list(config.watermarks)
    lines = [
        "# wmlab bench report",
        "",
        f"wmlab {report.version}; {config.seed_count} seeds at "
        f"{config.image_size}x{config.image_size}, base seed {config.base_seed}.",
        "",
        "## Detection",
        "",
        "Ring column: average p-value; other columns: average bit accuracy.",
        "`removed` marks p > 0.05 or bit accuracy < 0.75.",
        "",
    ]
    rows = []
    for attack_id in config.attack_ids():
        row = [f"`{attack_id}`"]
        for wm in watermarks:
            row.append(_detect_text(report.cell(wm, attack_id)))
        rows.append(row)
    rows.append(["# of Prompts"] + [str(config.seed_count)] * len(watermarks))
    lines += _md_table(["Attack"] + watermarks, rows)

    lines += ["", "## Masked quality (ave mSSIM, ground-truth foreground)", ""]
    rows = []
    for attack_id in config.attack_ids():
        row = [f"`{attack_id}`"]
        for wm in watermarks:
            cell = report.cell(wm, attack_id)
            if "ave_mssim" in cell.aggregates:
                row.append(f"{cell.aggregates['ave_mssim']:.4f}")
            else:
                row.append("failed")
        rows.append(row)
    lines += _md_table(["Attack"] + watermarks, rows)

    lines += ["", "## Semantic attack quality before and after masking", ""]
    semregen_ids = [
        aid for spec, aid in zip(config.attacks, config.attack_ids())
        if isinstance(spec, SemanticRegen)
    ]
    if not semregen_ids:
        lines.append("_no semantic-regeneration attack in this run_")
    else:
        attack_id = semregen_ids[0]
        lines.append(f"Attack: `{attack_id}`; masked = foreground-multiplied images.")
        lines.append("")
        rows = []
        for wm in watermarks:
            cell = report.cell(wm, attack_id)
            agg = cell.aggregates
            if not agg:
                rows.append([wm] + ["failed"] * 6)
                continue
            rows.append(
                [
                    wm,
                    f"{agg['ave_mse']:.3g}",
                    f"{agg['ave_masked_mse']:.3g}",
                    f"{agg['ave_ssim']:.4f}",
                    f"{agg['ave_masked_ssim']:.4f}",
                    f"{agg['ave_psnr']:.2f}",
                    f"{agg['ave_masked_psnr']:.2f}",
                ]
            )
        lines += _md_table(
            [
                "Watermark",
                "MSE",
                "MSE (masked)",
                "SSIM",
                "SSIM (masked)",
                "PSNR",
                "PSNR (masked)",
            ],
            rows,
        )
    lines.append("")
    with open(path, "w", encoding="utf-8") as f:
        f.write("\n".join(lines))


def _config_record(config):
    # Grid-defining fields only: workers and outdir change where and how
    # fast the run happens, never what it computes.
    return {
        "image_size": config.image_size,
        "seed_count": config.seed_count,
        "base_seed": config.base_seed,
        "watermarks": list(config.watermarks),
        "attacks": list(config.attack_ids()),
        "overrides": [[k, v] for k, v in config.overrides],
    }


def structured_record(report):
    """The full JSON-ready record, per-seed data included."""
    return {
        "version": report.version,
        "config": _config_record(report.config),
        "cells": [
            {
                "watermark": c.watermark,
                "attack": c.attack,
                "failed": c.failed,
                "error": c.error,
                "aggregates": c.aggregates,
                "records": list(c.records),
            }
            for c in report.cells
        ],
        "timing": {
            "started": report.started,
            "finished": report.finished,
            "duration_s": report.duration_s,
        },
    }


def write_structured(report, path):
    with open(path, "w", encoding="utf-8") as f:
        json.dump(structured_record(report), f, sort_keys=True, indent=2)
        f.write("\n")


def load_structured(path):
    """Read a structured report back, re-verifying every aggregate.

    The stored aggregates are redundant; any drift from the per-seed
    records means the file was edited or truncated.
    """
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
    except OSError as exc:
        raise IoError(str(exc)) from exc
    except ValueError as exc:
        raise MalformedFile(f"not a structured report: {exc}") from exc
    for key in ("version", "config", "cells", "timing"):
        if key not in data:
            raise MalformedFile(f"missing {key!r}")
    for cell in data["cells"]:
        if not cell["records"]:
            continue
        expected = _cell_aggregates(cell["watermark"], cell["records"])
        stored = cell["aggregates"]
        if set(expected) != set(stored):
            raise MalformedFile(
                f"cell ({cell['watermark']}, {cell['attack']}): aggregate keys differ"
            )
        for key, value in expected.items():
            if not _close(stored[key], value):
                raise MalformedFile(
                    f"cell ({cell['watermark']}, {cell['attack']}): "
                    f"{key} stored {stored[key]} != recomputed {value}"
                )
    return data


def _close(a, b):
    if math.isinf(a) or math.isinf(b):
        return a == b
    return abs(a - b) <= 1e-12 * max(1.0, abs(a), abs(b))


def removal_success(cell):
    """Scatter ordinate: ave p for ring, 1 - ave bitacc for bit codecs."""
    if "ave_p" in cell.aggregates:
        return cell.aggregates["ave_p"]
    return 1.0 - cell.aggregates["ave_bitacc"]


def write_svg(report, path):
    """Removal success vs masked quality, one series per attack."""
    config = report.config
    markers = ["o", "s", "^", "D", "v", "P", "X", "*"]
    with rc_context({"svg.hashsalt": "wmlab"}):
        fig = Figure(figsize=(6.4, 4.8))
        FigureCanvasSVG(fig)
        ax = fig.add_subplot(111)
        for i, attack_id in enumerate(config.attack_ids()):
            xs, ys = [], []
            for wm in config.watermarks:
                cell = report.cell(wm, attack_id)
                if not cell.aggregates:
                    continue
                xs.append(cell.aggregates["ave_mssim"])
                ys.append(removal_success(cell))
            ax.scatter(xs, ys, marker=markers[i % len(markers)], label=attack_id)
        ax.axhline(P_REMOVED, linestyle="--", linewidth=0.8, color="0.5")
        ax.set_xlabel("ave mSSIM (ground-truth foreground)")
        ax.set_ylabel("removal success")
        ax.set_title("Removal success vs preserved quality")
        ax.legend(
            title="y: ave p (ring) / 1 - ave bitacc (bit codecs)",
            fontsize=8,
            title_fontsize=8,
        )
        fig.tight_layout()
        fig.savefig(path, format="svg", metadata={"Date": None})
