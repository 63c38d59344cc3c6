"""Report figures written next to the delimited outputs."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def save_training_curves(log: dict, path: str) -> None:
    fig, ax_loss = plt.subplots(figsize=(7, 4))
    ax_loss.plot(np.arange(1, len(log["loss"]) + 1), log["loss"], lw=0.7, color="tab:blue")
    ax_loss.set_xlabel("iteration")
    ax_loss.set_ylabel("loss", color="tab:blue")
    ax_loss.set_yscale("log")
    if log["eval"]:
        ax_psnr = ax_loss.twinx()
        its = [e["iteration"] for e in log["eval"]]
        ax_psnr.plot(its, [e["psnr"] for e in log["eval"]], "o-", color="tab:red", ms=3)
        ax_psnr.set_ylabel("train PSNR (dB)", color="tab:red")
    ax_loss.set_title("training")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def save_popping_figure(reports: dict, path: str) -> None:
    """Overlay the per-frame delta series of both renderers."""
    fig, ax = plt.subplots(figsize=(7, 4))
    colors = {"sorted": "tab:red", "wsr": "tab:blue"}
    for name, report in reports.items():
        deltas = np.asarray(report["deltas"])
        ax.plot(np.arange(1, deltas.size + 1), deltas, label=name,
                color=colors.get(name), lw=1.2)
    ax.set_xlabel("frame")
    ax.set_ylabel("max |pixel delta|")
    ax.set_yscale("log")
    ax.set_title("temporal popping probe")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def save_eval_figure(rows: list, path: str) -> None:
    """Per-view PSNR bars with the SSIM series on a twin axis."""
    fig, ax = plt.subplots(figsize=(7, 4))
    idx = np.arange(len(rows))
    ax.bar(idx, [r["psnr"] for r in rows], color="tab:blue", alpha=0.8)
    ax.set_xticks(idx)
    ax.set_xticklabels([r["view"] for r in rows], rotation=60, fontsize=7)
    ax.set_ylabel("PSNR (dB)", color="tab:blue")
    ax2 = ax.twinx()
    ax2.plot(idx, [r["ssim"] for r in rows], "o-", color="tab:orange", ms=3)
    ax2.set_ylabel("SSIM", color="tab:orange")
    ax.set_title("per-view quality")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
