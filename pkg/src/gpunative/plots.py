"""Report figures rendered to files with the non-interactive Agg backend."""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .cost import CostReport, p_success  # noqa: E402

STYLE = {
    "figure.figsize": (6.0, 3.8),
    "figure.dpi": 120,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "font.size": 9,
    "legend.fontsize": 8,
    "legend.frameon": False,
}


def _save(fig, out_dir: str | Path, name: str) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    path = out / f"{name}.png"
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return path


def success_curves(out_dir, p_values: Sequence[float] = (0.01, 0.1, 0.5, 0.9), k_max: int = 500,
                   target: float | None = 0.99) -> Path:
    """P(at least one correct candidate) against k, one curve per p_correct."""
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        ks = list(range(0, k_max + 1))
        for p in p_values:
            ax.plot(ks, [p_success(k, p) for k in ks], label=f"p_correct={p:g}")
        if target is not None:
            ax.axhline(target, color="0.4", lw=0.8, ls="--", label=f"target {target:g}")
        ax.set_xscale("symlog", linthresh=10)
        ax.set_xlabel("candidates k")
        ax.set_ylabel("P_success")
        ax.set_ylim(0, 1.02)
        ax.legend(loc="lower right")
        return _save(fig, out_dir, "success_curves")


def cost_breakdown(report: CostReport, out_dir) -> Path:
    """Horizontal bars of every millisecond-valued entry in a cost report."""
    entries = [e for e in report.entries if e.unit == "ms"]
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        if entries:
            names = [e.name for e in entries]
            ax.barh(names, [e.value for e in entries], color="tab:blue")
            for y, e in enumerate(entries):
                ax.annotate(f"{e.value:g}", (e.value, y), xytext=(3, 0),
                            textcoords="offset points", va="center")
            ax.invert_yaxis()
        else:
            ax.text(0.5, 0.5, "no millisecond entries", ha="center", va="center",
                    transform=ax.transAxes)
        ax.set_xlabel("ms")
        return _save(fig, out_dir, "latency_breakdown")


def verify_trials(empirical: float, theory: float, trials: int, tolerance: float, out_dir) -> Path:
    """Empirical success rate with its tolerance band beside the closed-form value."""
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(4.0, 3.4))
        ax.bar(["empirical", "theory"], [empirical, theory], color=["tab:orange", "tab:blue"],
               yerr=[tolerance, 0], capsize=6)
        lo = max(0.0, min(empirical, theory) - 2 * tolerance - 0.01)
        ax.set_ylim(lo, 1.0)
        ax.set_ylabel("success rate")
        ax.set_title(f"{trials} trials", fontsize=9)
        return _save(fig, out_dir, "verify_trials")


def warp_divergence(batch, out_dir) -> Path:
    """Per-warp divergence and cycle counts of a lockstep batch."""
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        xs = [w.warp for w in batch.warps]
        ax.bar(xs, [w.divergence for w in batch.warps], color="tab:red", label="divergence")
        ax.axhline(batch.divergence, color="0.3", lw=0.8, ls="--", label="batch")
        ax.set_xlabel("warp")
        ax.set_ylabel("divergence")
        ax.set_ylim(0, 1)
        twin = ax.twinx()
        twin.plot(xs, [w.cycles for w in batch.warps], "o-", color="tab:gray", ms=3, label="cycles")
        twin.set_ylabel("lockstep cycles")
        handles = ax.get_legend_handles_labels()
        more = twin.get_legend_handles_labels()
        ax.legend(handles[0] + more[0], handles[1] + more[1], loc="upper right")
        return _save(fig, out_dir, "warp_divergence")
