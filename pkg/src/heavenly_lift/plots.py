"""Figure rendering for the CLI report path.

Each helper writes one PNG next to the delimited output; the CSV stays the
machine-readable contract, the figures are the quick-look companions.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def save_residual_histogram(residuals: dict, path) -> None:
    """Log-histogram of per-point relative residuals, one series per equation."""
    fig, ax = plt.subplots(figsize=(7, 4))
    for name, vals in sorted(residuals.items()):
        vals = np.asarray([v for v in vals if v is not None and v > 0.0])
        if len(vals) == 0:
            continue
        ax.hist(np.log10(vals), bins=30, alpha=0.55, label=name)
    ax.set_xlabel("log10 relative residual")
    ax.set_ylabel("points")
    ax.legend(fontsize=8)
    ax.set_title("verification residuals")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_eigenvalue_plot(eigenvalues: np.ndarray, path) -> None:
    """Sorted metric eigenvalues across sample points (signature at a glance)."""
    ev = np.asarray(eigenvalues)
    fig, ax = plt.subplots(figsize=(7, 4))
    idx = np.arange(ev.shape[0])
    for j in range(ev.shape[1]):
        ax.plot(idx, ev[:, j], ".", ms=3, label=f"eigenvalue {j + 1}")
    ax.axhline(0.0, color="k", lw=0.8)
    ax.set_xlabel("sample point")
    ax.set_ylabel("metric eigenvalue")
    ax.legend(fontsize=8)
    ax.set_title("metric eigenvalues (ultra-hyperbolic split)")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_singular_values(per_degree: dict, path) -> None:
    """Singular-value spectra of the invariance-condition matrix per degree."""
    fig, ax = plt.subplots(figsize=(7, 4))
    for deg, sv in sorted(per_degree.items()):
        sv = np.asarray(sv)
        ax.semilogy(np.arange(1, len(sv) + 1), sv / sv[0], ".-", ms=4,
                    label=f"degree {deg}")
    ax.set_xlabel("index")
    ax.set_ylabel("singular value / largest")
    ax.legend(fontsize=8)
    ax.set_title("invariance-condition spectrum")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
