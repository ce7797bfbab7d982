"""Static figures written next to the CLI's delimited output."""

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

# 800 x 600 SVG user units at 72 units per inch
FIGSIZE = (800 / 72, 600 / 72)

plt.rcParams.update(
    {
        "svg.hashsalt": "stablefold",
        "font.size": 12,
        "axes.grid": True,
        "grid.alpha": 0.3,
    }
)


def _new(title, xlabel, ylabel):
    fig, ax = plt.subplots(figsize=FIGSIZE)
    ax.set_title(title)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    return fig, ax


def save(fig, path):
    """Write ``fig`` to ``path``; format follows the extension. No timestamps."""
    fmt = str(path).rsplit(".", 1)[-1].lower()
    metadata = {"Date": None} if fmt in ("svg", "pdf") else None
    fig.savefig(path, metadata=metadata)
    plt.close(fig)


def density_figure(grid, title):
    fig, ax = _new(title, "u", "density")
    ax.plot(grid.nodes, grid.values, lw=1.5)
    ax.set_ylim(bottom=0.0)
    return fig


def mixing_figure(report):
    fig, ax = _new(
        f"distance to uniform, alpha={report.alpha:g}", "t", "sup-norm distance"
    )
    ax.semilogy(report.times, report.distances, "o-", label="measured")
    ok = np.isfinite(report.bounds)
    ax.semilogy(report.times[ok], report.bounds[ok], "s--", label="geometric bound")
    ax.legend()
    return fig


def table_figure(table):
    fig, ax = _new("S(t) deviation from uniformity", "t", "S(t)")
    for j, a in enumerate(table.alphas):
        ax.semilogy(table.times, table.S[:, j], "o-", label=f"alpha={a:g}")
    ax.legend()
    return fig


def slice_figure(y1, y2, values, title):
    fig, ax = _new(title, "y1", "y2")
    mesh = ax.pcolormesh(y1, y2, values.T, shading="auto")
    fig.colorbar(mesh, ax=ax)
    ax.set_aspect("equal")
    return fig


def decay_figure(times, distances, slope, title):
    fig, ax = _new(title, "t", "sup-norm distance")
    ax.semilogy(times, distances, "o", label="measured")
    fit = distances[0] * np.exp(slope * (np.asarray(times) - times[0]))
    ax.semilogy(times, fit, "-", label=f"slope {slope:.4f}")
    ax.legend()
    return fig
