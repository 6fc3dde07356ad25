"""Figure rendering for the command line reports. Matplotlib is imported
lazily and pinned to the Agg backend so runs stay headless."""

from __future__ import annotations

from pathlib import Path
from typing import Optional, Sequence

import numpy as np


def _plt():
    import matplotlib

    matplotlib.use("Agg", force=False)
    import matplotlib.pyplot as plt

    return plt


def _save(fig, path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, dpi=130, bbox_inches="tight")
    plt = _plt()
    plt.close(fig)
    return path


def histogram(values: Sequence[float], title: str, xlabel: str, path: Path,
              reference: Optional[float] = None) -> Path:
    plt = _plt()
    fig, ax = plt.subplots(figsize=(6.0, 3.6))
    vals = np.asarray(list(values), dtype=float)
    bins = min(60, max(10, vals.size // 10))
    ax.hist(vals, bins=bins, color="#32648e", alpha=0.85)
    if reference is not None:
        ax.axvline(reference, color="#c23b22", lw=1.2, ls="--")
    ax.set_title(title)
    ax.set_xlabel(xlabel)
    ax.set_ylabel("count")
    return _save(fig, path)


def convergence(history: Sequence[float], title: str, path: Path,
                floor: Optional[float] = None) -> Path:
    plt = _plt()
    fig, ax = plt.subplots(figsize=(6.0, 3.6))
    h = np.asarray(list(history), dtype=float)
    ax.plot(np.arange(h.size), h, color="#32648e", lw=1.4)
    if floor is not None and np.all(h - floor > 0):
        ax.set_yscale("log")
        ax.plot(np.arange(h.size), h - floor, color="#777777", lw=0.9, ls=":")
    ax.set_title(title)
    ax.set_xlabel("accepted step")
    ax.set_ylabel("enclosing radius")
    return _save(fig, path)


def spectrum_stem(values: Sequence[float], threshold: float, title: str,
                  path: Path) -> Path:
    plt = _plt()
    fig, ax = plt.subplots(figsize=(6.0, 3.6))
    vals = np.maximum(np.asarray(list(values), dtype=float), 1e-18)
    ax.stem(np.arange(vals.size), vals)
    ax.set_yscale("log")
    ax.axhline(threshold, color="#c23b22", lw=1.2, ls="--")
    ax.set_title(title)
    ax.set_xlabel("eigenvalue index")
    ax.set_ylabel("commutation energy")
    return _save(fig, path)


def eigen_paths(ts: Sequence[float], curves: np.ndarray, title: str,
                path: Path) -> Path:
    # curves: (len(ts), n) eigenvalues along the path
    plt = _plt()
    fig, ax = plt.subplots(figsize=(6.0, 3.6))
    arr = np.asarray(curves, dtype=float)
    for j in range(arr.shape[1]):
        ax.plot(ts, arr[:, j], lw=1.4)
    ax.set_title(title)
    ax.set_xlabel("t")
    ax.set_ylabel("eigenvalue")
    return _save(fig, path)


def sandwich_bars(labels: Sequence[str], lams_minus: Sequence[float],
                  lams_plus: Sequence[float], title: str, path: Path) -> Path:
    plt = _plt()
    fig, ax = plt.subplots(figsize=(6.0, 3.6))
    idx = np.arange(len(labels))
    ax.bar(idx - 0.18, lams_minus, width=0.34, label="largest scalar below",
           color="#32648e")
    ax.bar(idx + 0.18, lams_plus, width=0.34, label="smallest scalar above",
           color="#c23b22")
    ax.set_xticks(idx)
    ax.set_xticklabels(labels, rotation=12)
    ax.set_title(title)
    ax.legend(fontsize=8)
    return _save(fig, path)
