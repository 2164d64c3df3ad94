"""Render per-k extinction figures from grid results.

Each figure plots measured extinction probability against r on log-log
axes, with error bars from the reflected confidence interval and the
r^(-k) power law as a reference line.  Files land next to the delimited
output so a report directory is self-contained.
"""

from __future__ import annotations

import os
from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from .experiments import ResultRow


def render_extinction_figures(rows: Sequence[ResultRow], out_dir: str,
                              prefix: str = "extinction") -> list:
    """Write one `<prefix>_k<k>.png` per k value; returns the paths.

    Rows with failures or with a zero extinction estimate (not drawable on
    a log axis) are skipped.
    """
    os.makedirs(out_dir, exist_ok=True)
    paths = []
    for k in sorted({row.cell.k for row in rows}):
        krows = sorted((row for row in rows
                        if row.cell.k == k and row.error is None
                        and row.extinction_hat > 0),
                       key=lambda row: row.cell.r)
        if not krows:
            continue
        rs = [row.cell.r for row in krows]
        ext = [row.extinction_hat for row in krows]
        err_lo, err_hi = [], []
        for row in krows:
            lo, hi = row.extinction_ci
            err_lo.append(max(row.extinction_hat - lo, 0.0))
            err_hi.append(max(hi - row.extinction_hat, 0.0))
        fig, ax = plt.subplots(figsize=(5.0, 3.75))
        ax.errorbar(rs, ext, yerr=[err_lo, err_hi], fmt="o", capsize=3,
                    label="measured extinction")
        ax.plot(rs, [float(r) ** (-k) for r in rs], "-",
                label=f"$r^{{-{k}}}$")
        ax.set_xscale("log")
        ax.set_yscale("log")
        ax.set_xlabel("fitness r")
        ax.set_ylabel("extinction probability")
        ax.set_title(f"superstar k={k}")
        ax.legend()
        fig.tight_layout()
        path = os.path.join(out_dir, f"{prefix}_k{k}.png")
        fig.savefig(path, dpi=120)
        plt.close(fig)
        paths.append(path)
    return paths
