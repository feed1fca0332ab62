"""Matplotlib figures for benchmark results."""

from __future__ import annotations

from pathlib import Path
from typing import Sequence


def plot_benchmark(rows: Sequence[dict], out_dir: str | Path) -> list[Path]:
    """Ratio histogram and ratio-by-size scatter, one PNG each."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    algos = sorted({r["algo"] for r in rows})
    paths = []

    fig, ax = plt.subplots(figsize=(6, 4))
    for algo in algos:
        ax.hist([r["ratio"] for r in rows if r["algo"] == algo], bins=20, alpha=0.6, label=algo)
    ax.set_xlabel("weight / exact weight")
    ax.set_ylabel("instances")
    ax.legend()
    fig.tight_layout()
    p = out / "ratio_hist.png"
    fig.savefig(p, dpi=100, metadata={"Software": None})
    plt.close(fig)
    paths.append(p)

    fig, ax = plt.subplots(figsize=(6, 4))
    for algo in algos:
        sel = [r for r in rows if r["algo"] == algo]
        ax.scatter([r["n"] for r in sel], [r["ratio"] for r in sel], s=12, label=algo)
    ax.set_xlabel("disks")
    ax.set_ylabel("weight / exact weight")
    ax.legend()
    fig.tight_layout()
    p = out / "ratio_by_n.png"
    fig.savefig(p, dpi=100, metadata={"Software": None})
    plt.close(fig)
    paths.append(p)
    return paths
