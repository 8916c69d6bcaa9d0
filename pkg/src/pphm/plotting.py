"""Report figures written next to the CSV outputs of the CLI."""
from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .monitor import ThresholdBand, TrendModel, forecast_value  # noqa: E402
from .recovery import FitResult, eval_recovery, recovery_time  # noqa: E402

FIGSIZE = (7.0, 4.3)
DPI = 120


def _finish(fig, ax, path):
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=DPI)
    plt.close(fig)
    return path


def plot_recovery(t, values, result: FitResult, path, hrrt_fraction=0.05):
    fig, ax = plt.subplots(figsize=FIGSIZE)
    ax.plot(t, values, "o", ms=3, color="0.4", label="measured")
    tt = np.linspace(0.0, float(np.max(t)), 400)
    m = result.model
    ax.plot(tt, eval_recovery(m, tt), color="C3", lw=2,
            label=f"fit: a={m.a:.1f}, d={m.d:.1f}, theta={m.theta:.4g}/s")
    ax.axhline(m.a, color="C0", ls="--", lw=1, label="resting level a")
    hrrt = recovery_time(m, hrrt_fraction)
    if hrrt <= tt[-1]:
        ax.axvline(hrrt, color="C2", ls=":", lw=1.5,
                   label=f"HRRT ({hrrt_fraction:g} of elevation) = {hrrt:.1f} s")
    ax.set_xlabel("time since end of exercise [s]")
    ax.set_ylabel("heart rate [bpm]")
    ax.legend(loc="upper right", fontsize=8)
    return _finish(fig, ax, path)


def _band_lines(ax, band: ThresholdBand):
    styles = {"lower_normal": ("C1", "--"), "upper_normal": ("C1", "--"),
              "lower_risk": ("C3", "-"), "upper_risk": ("C3", "-")}
    for name, v in band.limits().items():
        color, ls = styles[name]
        ax.axhline(v, color=color, ls=ls, lw=1, label=name.replace("_", " "))


def plot_trend(t, values, trend: TrendModel | None, band: ThresholdBand, horizon, path,
               title=""):
    fig, ax = plt.subplots(figsize=FIGSIZE)
    ax.plot(t, values, ".", ms=4, color="0.3", label="measured")
    if trend is not None:
        tf = np.linspace(trend.window_start_t, trend.window_end_t + horizon, 200)
        pts = [forecast_value(trend, max(x, trend.window_end_t), band.confidence) for x in tf]
        centre = trend.intercept + trend.slope * (tf - trend.window_start_t)
        half = np.array([h for _, h in pts])
        ax.plot(tf, centre, color="C0", lw=1.5, label="trend")
        fut = tf >= trend.window_end_t
        ax.fill_between(tf[fut], centre[fut] - half[fut], centre[fut] + half[fut],
                        color="C0", alpha=0.15,
                        label=f"{band.confidence:.0%} prediction interval")
    _band_lines(ax, band)
    ax.set_xlabel("t [s]")
    ax.set_ylabel(band.channel)
    if title:
        ax.set_title(title, fontsize=10)
    ax.legend(loc="best", fontsize=8)
    return _finish(fig, ax, path)


def plot_coefficients(terms, coefs, min_abs, path):
    order = np.argsort(-np.abs(coefs), kind="stable")
    fig, ax = plt.subplots(figsize=FIGSIZE)
    y = np.arange(len(order))
    colors = ["C3" if abs(coefs[i]) >= min_abs else "0.6" for i in order]
    ax.barh(y, [coefs[i] for i in order], color=colors)
    ax.set_yticks(y, [terms[i] for i in order])
    ax.invert_yaxis()
    for x in (-min_abs, min_abs):
        ax.axvline(x, color="k", ls=":", lw=1)
    ax.set_xlabel("standardized coefficient")
    return _finish(fig, ax, path)


def plot_correlation(names, corr, path):
    fig, ax = plt.subplots(figsize=(5.5, 4.8))
    im = ax.imshow(corr, vmin=-1, vmax=1, cmap="RdBu_r")
    ax.set_xticks(range(len(names)), names, rotation=45, ha="right")
    ax.set_yticks(range(len(names)), names)
    fig.colorbar(im, ax=ax, label="Pearson r")
    fig.tight_layout()
    fig.savefig(path, dpi=DPI)
    plt.close(fig)
    return path


def plot_load(ranking, path):
    fig, ax = plt.subplots(figsize=FIGSIZE)
    labels = [loc for loc, _ in ranking]
    ax.bar(labels, [s for _, s in ranking], color="C0")
    ax.set_ylabel("mean load score [g^2]")
    ax.set_xlabel("body location")
    return _finish(fig, ax, path)


def plot_clusters(features, labels, path):
    x = np.array([f.vector() for f in features])
    fig, ax = plt.subplots(figsize=FIGSIZE)
    sc = ax.scatter(x[:, 1], x[:, 2], c=labels, cmap="tab10", s=14)
    ax.set_xlabel("magnitude variance [g^2]")
    ax.set_ylabel("rms jerk [g/s]")
    ax.legend(*sc.legend_elements(), title="cluster", fontsize=8)
    return _finish(fig, ax, path)
