"""Figure rendering for experiment reports.

Every run writes its curves as CSV; this module draws the matching
matplotlib figures next to them.  Rendering is deterministic (fixed Agg
backend, fixed dpi, no timestamps in the PNG metadata).
"""
from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

_STYLE = {
    "figure.figsize": (6.0, 4.0),
    "figure.dpi": 120,
    "savefig.dpi": 150,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "font.size": 10,
}

_PNG_METADATA = {"Software": "dualion"}


def render_curve(path, records, xlabel: str, ylabel: str, title: str, fit=None, logy: bool = False) -> None:
    """Error-bar plot of one curve, with an optional fitted-model overlay.

    `fit` is (callable x -> y, label) evaluated on a dense grid.
    """
    x = np.array([r.sweep_value for r in records])
    y = np.array([r.mean for r in records])
    err = np.array([r.stderr for r in records])
    with plt.rc_context(_STYLE):
        fig, ax = plt.subplots()
        ax.errorbar(x, y, yerr=err, fmt="o", ms=4, capsize=2, label="simulated")
        if fit is not None:
            fn, label = fit
            xs = np.linspace(x.min(), x.max(), 400)
            ax.plot(xs, fn(xs), "-", lw=1.2, label=label)
        if logy:
            ax.set_yscale("log")
        ax.set_xlabel(xlabel)
        ax.set_ylabel(ylabel)
        ax.set_title(title)
        ax.legend(loc="best")
        fig.tight_layout()
        fig.savefig(path, metadata=_PNG_METADATA)
        plt.close(fig)
