"""Deterministic SVG rendering of run results (matplotlib, Agg backend)."""

import math

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

matplotlib.rcParams["svg.hashsalt"] = "nmbloch"
matplotlib.rcParams["svg.fonttype"] = "none"

RATE_STYLE = {"gamma_plus": ("-.", "tab:blue", r"$\gamma_+$"),
              "gamma_minus": ("--", "tab:red", r"$\gamma_-$"),
              "gamma_0": ("-", "black", r"$\gamma_0$")}
COMPONENT_STYLE = {"x": ("-", "tab:blue"), "y": ("--", "tab:red"), "z": ("-", "black")}


def _panels(n):
    cols = 3 if n >= 3 else n
    rows = math.ceil(n / cols)
    fig, axes = plt.subplots(rows, cols, figsize=(4.2 * cols, 3.2 * rows), squeeze=False)
    for ax in axes.ravel()[n:]:
        ax.set_visible(False)
    return fig, axes.ravel()[:n]


def _inset(ax, T, series, T_max):
    mask = T <= T_max
    if mask.sum() < 2:
        return
    sub = ax.inset_axes([0.55, 0.55, 0.4, 0.38])
    for y, (ls, color) in series:
        sub.plot(T[mask], y[mask], ls, color=color, lw=0.8)
    sub.tick_params(labelsize=6)


def _save(fig, path):
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def rates_figure(cells, path):
    """``gamma_xi / norm`` against dimensionless time, one panel per cell."""
    fig, axes = _panels(len(cells))
    for ax, cell in zip(axes, cells):
        cols, norm = cell["rates"], cell["rate_norm"]
        T = cols["T_dimensionless"]
        series = []
        for key, (ls, color, label) in RATE_STYLE.items():
            ax.plot(T, cols[key] / norm, ls, color=color, label=label, lw=1.0)
            series.append((cols[key] / norm, (ls, color)))
        if cell.get("inset_T_max"):
            _inset(ax, T, series, cell["inset_T_max"])
        ax.set_xlabel("T")
        ax.set_ylabel(cell["rate_label"])
        ax.set_title(cell["title"], fontsize=9)
    axes[0].legend(fontsize=7, loc="lower right")
    _save(fig, path)


def bloch_figure(cells, path, components=("x", "y", "z")):
    fig, axes = _panels(len(cells))
    for ax, cell in zip(axes, cells):
        cols = cell["bloch"]
        T = cols["T_dimensionless"]
        series = []
        for comp in components:
            ls, color = COMPONENT_STYLE[comp]
            y = cols["R" + comp]
            ax.plot(T, y, ls, color=color, lw=1.0, label=f"$R_{comp}$")
            series.append((y, (ls, color)))
        inset = cell.get("bloch_inset")
        if inset is not None:
            sub = ax.inset_axes([0.55, 0.55, 0.4, 0.38])
            for comp in components:
                ls, color = COMPONENT_STYLE[comp]
                sub.plot(inset["T_dimensionless"], inset["R" + comp], ls, color=color, lw=0.8)
            sub.tick_params(labelsize=6)
        ax.set_xlabel("T")
        ax.set_title(cell["title"], fontsize=9)
        ax.legend(fontsize=7, loc="lower left")
    _save(fig, path)


def cp_figure(cells, path):
    fig, axes = _panels(len(cells))
    for ax, cell in zip(axes, cells):
        cols = cell["cp"]
        T = cell["bloch"]["T_dimensionless"]
        for key, ls in (("m1", "-"), ("m2", "--"), ("m3", "-."), ("m4", ":")):
            ax.plot(T, cols[key], ls, lw=1.0, label=key)
        ax.axhline(0.0, color="grey", lw=0.5)
        ax.set_xlabel("T")
        ax.set_title(cell["title"], fontsize=9)
        ax.legend(fontsize=7)
    _save(fig, path)
