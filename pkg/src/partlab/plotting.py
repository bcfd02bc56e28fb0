"""Figure rendering for run outputs.

Reads the delimited series a run wrote next to its reports and renders
matplotlib figures into <out>/figures/.  Figures are diagnostics for the
measured-constant ledger; nothing here gates a run.
"""

from __future__ import annotations

import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def _read_csv(path: Path) -> list[dict]:
    if not path.exists():
        return []
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def _cheeger_figure(rows: list[dict], out: Path) -> None:
    fig, ax = plt.subplots(figsize=(7, 4.5))
    families = sorted({r["family"] for r in rows})
    for fam in families:
        pts = [(int(r["n"]), float(r["ratio"])) for r in rows
               if r["family"] == fam and r["ratio"]]
        pts.sort()
        ax.plot([p[0] for p in pts], [p[1] for p in pts],
                marker="o", ms=3, lw=0.8, label=fam)
    ax.axhline(1.0, color="k", lw=0.8, ls="--")
    ax.set_xscale("log", base=2)
    ax.set_xlabel("n")
    ax.set_ylabel(r"$\phi_{\mathrm{sweep}} / \sqrt{2\lambda_2}$")
    ax.set_title("Sweep-cut quality against the upper Cheeger bound")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(out, dpi=150)
    plt.close(fig)


def _constants_figure(rows: list[dict], out: Path) -> None:
    bounds = sorted({r["bound"] for r in rows})
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for i, bound in enumerate(bounds):
        vals = [float(r["value"]) for r in rows
                if r["bound"] == bound and r["value"]]
        ax.scatter([i] * len(vals), vals, s=12, alpha=0.7)
    ax.set_xticks(range(len(bounds)))
    ax.set_xticklabels(bounds, rotation=20, ha="right", fontsize=7)
    ax.set_yscale("log")
    ax.set_ylabel("measured constant")
    ax.set_title("Empirical constants of the O(.) bounds (recorded, not gated)")
    fig.tight_layout()
    fig.savefig(out, dpi=150)
    plt.close(fig)


def render_run_figures(out_dir: str | Path) -> list[Path]:
    out_dir = Path(out_dir)
    fig_dir = out_dir / "figures"
    made: list[Path] = []
    cheeger = _read_csv(out_dir / "cheeger_ratios.csv")
    constants = _read_csv(out_dir / "measured_constants.csv")
    if cheeger:
        fig_dir.mkdir(parents=True, exist_ok=True)
        path = fig_dir / "cheeger_ratios.png"
        _cheeger_figure(cheeger, path)
        made.append(path)
    if constants:
        fig_dir.mkdir(parents=True, exist_ok=True)
        path = fig_dir / "measured_constants.png"
        _constants_figure(constants, path)
        made.append(path)
    return made


def render_sweep_figure(sizes, phis, out_path: str | Path,
                        title: str = "Sweep profile") -> Path:
    """Expansion of each prefix along one ordering; used by the CLI."""
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(sizes, phis, lw=1.0)
    best = min(range(len(phis)), key=phis.__getitem__)
    ax.scatter([sizes[best]], [phis[best]], color="crimson", zorder=3,
               label=f"best: |S|={sizes[best]}, phi={phis[best]:.4g}")
    ax.set_xlabel("prefix size")
    ax.set_ylabel("phi(prefix)")
    ax.set_yscale("log")
    ax.set_title(title)
    ax.legend(fontsize=8)
    fig.tight_layout()
    out_path = Path(out_path)
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    return out_path
