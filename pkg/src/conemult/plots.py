"""Figure rendering for report directories.

matplotlib is an optional extra: everything here imports it lazily, and the
CLI only calls in when --plot is passed.  Each function reads the delimited
detail files a subcommand wrote and drops PNGs next to them.
"""

import math
import os

from .errors import ConfigError
from .report import read_csv_columns


def _plt():
    try:
        import matplotlib
        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
        return plt
    except ImportError:
        raise ConfigError(
            "plotting requires matplotlib; install the [plot] extra") from None


def _save(fig, outdir, name):
    path = os.path.join(outdir, name)
    fig.savefig(path, dpi=150, bbox_inches="tight")
    return path


def plot_wave_check(outdir, summary):
    plt = _plt()
    written = []
    fig, ax = plt.subplots(figsize=(6, 4))
    for n in summary["scales"]:
        cols = read_csv_columns(os.path.join(outdir, f"omega_n{n}.csv"))
        rho = [float(x) for x in cols["rho"]]
        mag = [math.hypot(float(a), float(b))
               for a, b in zip(cols["re"], cols["im"])]
        ax.plot(rho, mag, lw=0.8, label=f"n={n}")
    ax.set_xlabel("rho")
    ax.set_ylabel("|omega_n|")
    ax.legend(fontsize=7)
    written.append(_save(fig, outdir, "omega_profiles.png"))
    plt.close(fig)

    fig, ax = plt.subplots(figsize=(5, 3.5))
    ns = summary["scales"]
    sups = [summary["error_sup"][str(n)] for n in ns]
    ax.semilogy(ns, sups, "o-")
    ax.set_xlabel("n")
    ax.set_ylabel("error region sup")
    ax.set_title(f"decay rate {summary['decay_rate']:.2f} dyadic/step")
    written.append(_save(fig, outdir, "error_decay.png"))
    plt.close(fig)
    return written


def plot_br_scan(outdir, summary):
    plt = _plt()
    written = []
    for entry in summary["per_p"]:
        cols = read_csv_columns(os.path.join(
            outdir, f"scan_p{entry['p']:.6g}.csv"))
        lam = [float(x) for x in cols["lam"]]
        val = [float(x) for x in cols["tail_value_at_R"]]
        div = [x == "True" for x in cols["divergent"]]
        fig, ax = plt.subplots(figsize=(5.5, 3.5))
        ax.semilogy(lam, val, "o-", ms=3)
        for x, v, d in zip(lam, val, div):
            if d:
                ax.semilogy([x], [v], "rx", ms=6)
        ax.axvline(entry["prediction"], color="k", ls="--", lw=0.8,
                   label=f"prediction {entry['prediction']:.4f}")
        ax.axvline(entry["estimate"], color="g", ls=":", lw=0.8,
                   label=f"estimate {entry['estimate']:.2f}")
        ax.set_xlabel("lambda")
        ax.set_ylabel("tail quantity at R")
        ax.legend(fontsize=7)
        written.append(_save(fig, outdir, f"scan_p{entry['p']:.6g}.png"))
        plt.close(fig)
    return written


def plot_characterize(outdir, summary):
    plt = _plt()
    written = []
    path = os.path.join(outdir, "per_t.csv")
    if os.path.exists(path):
        cols = read_csv_columns(path)
        t = [float(x) for x in cols["t"]]
        q = [float(x) for x in cols["quantity"]]
        fig, ax = plt.subplots(figsize=(5.5, 3.5))
        ax.loglog(t, q, ".-", ms=3)
        ax.set_xlabel("dilation t")
        ax.set_ylabel("windowed symbol quantity")
        written.append(_save(fig, outdir, "per_t.png"))
        plt.close(fig)
    path = os.path.join(outdir, "truncation.csv")
    if os.path.exists(path):
        cols = read_csv_columns(path)
        fig, ax = plt.subplots(figsize=(5, 3.5))
        for side in sorted(set(cols["side"])):
            rs = [float(r) for r, s in zip(cols["truncation"], cols["side"])
                  if s == side]
            vs = [float(v) for v, s in zip(cols["value"], cols["side"])
                  if s == side]
            ax.loglog(rs, vs, "o-", label=side)
        ax.set_xlabel("truncation R")
        ax.set_ylabel("quantity")
        ax.legend(fontsize=8)
        written.append(_save(fig, outdir, "truncation.png"))
        plt.close(fig)
    return written


def plot_opnorm(outdir, summary):
    plt = _plt()
    hist = summary.get("improvements") or []
    fig, ax = plt.subplots(figsize=(5, 3.5))
    if hist:
        ax.step([h[0] for h in hist], [h[1] for h in hist], where="post")
    ax.set_xlabel("evaluation")
    ax.set_ylabel("best ratio")
    out = _save(fig, outdir, "search_history.png")
    _plt().close(fig)
    return [out]


def plot_field(outdir, field):
    plt = _plt()
    import numpy as np
    if field.ndim != 2:
        return []
    fig, ax = plt.subplots(figsize=(4.5, 4))
    im = ax.imshow(np.abs(field.values).T, origin="lower",
                   extent=[-field.axes[0].extent / 2, field.axes[0].extent / 2,
                           -field.axes[1].extent / 2, field.axes[1].extent / 2])
    fig.colorbar(im, ax=ax, shrink=0.8)
    ax.set_xlabel("x1")
    ax.set_ylabel("x2")
    out = _save(fig, outdir, "field_magnitude.png")
    plt.close(fig)
    return [out]
