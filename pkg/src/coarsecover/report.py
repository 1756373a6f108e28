"""Report writing: JSON summaries, delimited side files, and figures.

Figures are rendered with the Agg backend next to the CSV output, one
PNG per plottable result.  All JSON output is key-sorted so that a
fixed config and seed reproduce byte-identical reports.
"""
from __future__ import annotations

import csv
import json
import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt


def write_json(path, payload):
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_rows_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)


def growth_figure(path, profile, classification=None):
    fig, ax = plt.subplots(figsize=(5, 4))
    radii = [r for r in profile.radii if r >= 1]
    sizes = profile.sizes[len(profile.radii) - len(radii):]
    ax.loglog(radii, sizes, "o-", ms=3)
    ax.set_xlabel("radius r")
    ax.set_ylabel("ball size")
    title = profile.source
    if classification is not None:
        if classification.kind == "polynomial":
            title += f"  (polynomial, degree {classification.degree:.2f})"
        elif classification.kind == "exponential":
            title += f"  (exponential, rate {classification.rate:.3f})"
        else:
            title += f"  ({classification.kind})"
    ax.set_title(title, fontsize=9)
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def delta_figure(path, profile, trend=None):
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.plot(profile.radii, profile.deltas, "s-", ms=4)
    ax.set_xlabel("ball radius r")
    ax.set_ylabel("four-point delta")
    title = profile.source
    if trend is not None:
        title += f"  ({trend.kind}, slope {trend.slope:.2f})"
    ax.set_title(title, fontsize=9)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def locals_figure(path, locals_dict, title=""):
    fig, ax = plt.subplots(figsize=(6, 4))
    labels = [str(i) for i in locals_dict]
    vals = list(locals_dict.values())
    ax.bar(range(len(vals)), vals)
    step = max(1, len(labels) // 16)
    ax.set_xticks(range(0, len(labels), step))
    ax.set_xticklabels(labels[::step], rotation=60, fontsize=7)
    ax.set_xlabel("covering index")
    ax.set_ylabel("local norm")
    if title:
        ax.set_title(title, fontsize=9)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def ensure_dir(path):
    os.makedirs(path, exist_ok=True)
    return path
