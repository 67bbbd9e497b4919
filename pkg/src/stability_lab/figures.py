"""Sweep figures rendered next to the delimited output."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .reporting import BOUND_3_64

# Fixed salt keeps the ids inside saved SVGs stable across runs.
_RC = {"svg.hashsalt": "stability-lab", "figure.dpi": 110}


def render_sweep_figure(rows: list[dict], path: Path) -> None:
    """Plot gap-event frequency and mean gap against n for one sweep.

    Top panel: measured gap-event frequency with its 5-sigma interval and
    the 3/64 probability floor.  Bottom panel: mean generalization gap and
    the per-n threshold gamma/4 + l/(32*sqrt(n)).
    """
    path = Path(path)
    ns = [row["n"] for row in rows]
    freq = [row["freq_gap_event"] for row in rows]
    ci_lo = [row["ci_lo"] for row in rows]
    ci_hi = [row["ci_hi"] for row in rows]
    mean_gap = [row["mean_gap"] for row in rows]
    threshold = [row["threshold"] for row in rows]

    with plt.rc_context(_RC):
        fig, (ax_freq, ax_gap) = plt.subplots(
            2, 1, figsize=(7.0, 6.5), sharex=True, constrained_layout=True
        )
        ax_freq.plot(ns, freq, marker="o", color="tab:blue", label="gap-event frequency")
        ax_freq.fill_between(
            ns, ci_lo, ci_hi, color="tab:blue", alpha=0.2, label="5-sigma interval"
        )
        ax_freq.axhline(
            BOUND_3_64, color="tab:red", linestyle="--", label="3/64 probability floor"
        )
        ax_freq.set_ylabel("frequency")
        ax_freq.set_ylim(bottom=0.0)
        ax_freq.legend(loc="best")
        ax_freq.grid(True, alpha=0.3)

        ax_gap.plot(ns, mean_gap, marker="o", color="tab:green", label="mean gap")
        ax_gap.plot(
            ns,
            threshold,
            marker="s",
            color="tab:orange",
            linestyle="--",
            label="threshold gamma/4 + l/(32*sqrt(n))",
        )
        ax_gap.set_xlabel("n")
        ax_gap.set_ylabel("gap")
        if len(ns) > 1:
            ax_gap.set_xscale("log")
        ax_gap.legend(loc="best")
        ax_gap.grid(True, alpha=0.3)

        path.parent.mkdir(parents=True, exist_ok=True)
        if path.suffix.lower() == ".svg":
            # Dropping the date stamp keeps repeated renders byte-identical.
            fig.savefig(path, metadata={"Date": None})
        else:
            fig.savefig(path)
        plt.close(fig)
