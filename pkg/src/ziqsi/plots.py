"""Figure rendering for the report paths.

The delimited outputs are the data contract; these figures are rendered
alongside them for quick inspection.  PNG metadata is stripped so a rerun
with identical data produces identical bytes.
"""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

_METHOD_STYLE = {
    "ziqsi": ("tab:blue", "ZIQSI"),
    "ziq-linear": ("tab:orange", "ZIQ-linear"),
    "qsi": ("tab:green", "Quantile single-index"),
}

_SAVE_KW = {"dpi": 130, "metadata": {"Software": None}}


def save_benchmark_figures(report, out_dir):
    """One figure per subject profile: oracle curve, per-method mean curves,
    and the 95% empirical band of the first method."""
    taus = report["tau_grid"]
    paths = []
    for name in report["profiles"]:
        fig, ax = plt.subplots(figsize=(7.0, 4.4))
        ax.plot(taus, report["oracle_curves"][name], color="black", lw=1.8,
                label="true curve")
        for i, (method, per_profile) in enumerate(report["methods"].items()):
            color, label = _METHOD_STYLE.get(method, (f"C{i}", method))
            entry = per_profile[name]
            ax.plot(taus, entry["mean_curve"], color=color, lw=1.3, label=label)
            if i == 0:
                ax.fill_between(taus, entry["band_lower"], entry["band_upper"],
                                color=color, alpha=0.18,
                                label=f"{label} 95% band")
        ax.set_xlabel("quantile level")
        ax.set_ylabel("conditional quantile")
        ax.set_title(f"Estimated quantile curves: {name}")
        ax.legend(loc="upper left", fontsize=8)
        fig.tight_layout()
        path = f"{out_dir}/curves_{name}.png"
        fig.savefig(path, **_SAVE_KW)
        plt.close(fig)
        paths.append(path)
    return paths


def save_curve_figure(taus, values, regions, path, title="Predicted quantile curve"):
    """Single-subject predicted curve with the zero/interpolation regions
    shaded."""
    fig, ax = plt.subplots(figsize=(7.0, 4.4))
    ax.plot(taus, values, color="tab:blue", lw=1.5)
    in_zero = [r == "zero" for r in regions]
    in_interp = [r == "interpolation" for r in regions]
    if any(in_zero):
        ax.axvspan(min(t for t, z in zip(taus, in_zero) if z),
                   max(t for t, z in zip(taus, in_zero) if z),
                   color="grey", alpha=0.15, label="zero region")
    if any(in_interp):
        ax.axvspan(min(t for t, z in zip(taus, in_interp) if z),
                   max(t for t, z in zip(taus, in_interp) if z),
                   color="tab:orange", alpha=0.15, label="interpolation region")
    ax.set_xlabel("quantile level")
    ax.set_ylabel("conditional quantile")
    ax.set_title(title)
    if any(in_zero) or any(in_interp):
        ax.legend(loc="upper left", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)
    return path
