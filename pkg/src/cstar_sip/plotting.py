"""Figures and CSV summaries for run reports (headless, Agg backend)."""

from __future__ import annotations

import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

CSV_FIELDS = ("suite", "construction", "status", "mandatory", "trials", "failures", "worst_margin", "vacuous")
STATUS_COLORS = {"pass": "tab:green", "fail": "tab:red", "skipped": "tab:gray"}


def summary_rows(run_json):
    rows = []
    for entry in run_json["suites"]:
        rep = entry["report"]
        rows.append({
            "suite": entry["suite"],
            "construction": entry["construction"],
            "status": entry["status"],
            "mandatory": entry.get("mandatory", True),
            "trials": rep["trials"],
            "failures": rep["failures"],
            "worst_margin": rep["worst_margin"],
            "vacuous": rep.get("vacuous", 0),
        })
    return rows


def write_summary_csv(run_json, path):
    rows = summary_rows(run_json)
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=CSV_FIELDS)
        writer.writeheader()
        writer.writerows(rows)
    return rows


def plot_margins(run_json, path):
    """Worst margin per (suite, construction) on a symlog axis, colored by status."""
    rows = summary_rows(run_json)
    labels = [f"{r['suite']} | {r['construction']}" for r in rows]
    margins = np.array([r["worst_margin"] for r in rows], dtype=float)
    colors = [STATUS_COLORS[r["status"]] for r in rows]
    fig, ax = plt.subplots(figsize=(9, max(2.5, 0.22 * len(rows) + 1)))
    y = np.arange(len(rows))
    ax.barh(y, np.clip(margins, -1e6, 1e6), color=colors)
    ax.set_yticks(y, labels, fontsize=6)
    ax.invert_yaxis()
    ax.set_xscale("symlog", linthresh=1e-12)
    ax.axvline(0.0, color="black", lw=0.8)
    ax.set_xlabel("worst margin (negative beyond tolerance = failure)")
    ax.set_title(f"overall: {run_json['overall']}  seed={run_json['seed']}  trials={run_json['trials']}")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def render_report(run_json, out_dir):
    """Write ``summary.csv`` and ``margins.png`` into ``out_dir``; returns the paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    csv_path, png_path = out / "summary.csv", out / "margins.png"
    write_summary_csv(run_json, csv_path)
    plot_margins(run_json, png_path)
    return csv_path, png_path


def plot_line_profile(alphas, norms, result, path):
    """``||x + alpha y||`` along real ``alpha`` with the located minimum."""
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(alphas, norms, lw=1.2, label="||x + a y||, a real")
    ax.axhline(result.base_norm, color="gray", ls="--", lw=0.8, label="||x||")
    ax.plot([result.alpha_star.real], [result.min_norm], "o", color="tab:red",
            label=f"minimum {result.min_norm:.6g}")
    ax.set_xlabel("Re a")
    ax.set_ylabel("norm")
    ax.set_title("orthogonal" if result.is_orthogonal else "not orthogonal")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
