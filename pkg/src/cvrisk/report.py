"""Deterministic CSV and SVG artifact emission.

CSV is RFC-4180 (CRLF, '.' decimal) with a leading comment line recording
the package version and seed; exact rationals appear both as "p/q" strings
and as float columns.  SVG figures are rendered with matplotlib using a
fixed hash salt and no timestamp metadata, so artifacts are byte-stable
functions of their inputs.
"""

from __future__ import annotations

import csv
import io
import os
from fractions import Fraction

from . import __version__


def format_cell(v) -> str:
    if isinstance(v, Fraction):
        return f"{v.numerator}/{v.denominator}"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return f"{v:.12g}"
    return str(v)


def render_csv(header: list[str], rows: list[list], seed=None) -> bytes:
    buf = io.StringIO()
    seed_str = "-" if seed is None else str(seed)
    buf.write(f"# cvrisk {__version__} seed={seed_str}\r\n")
    writer = csv.writer(buf, lineterminator="\r\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_cell(v) for v in row])
    return buf.getvalue().encode("utf-8")


def write_csv(path: str, header: list[str], rows: list[list], seed=None) -> None:
    data = render_csv(header, rows, seed)
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "wb") as fh:
        fh.write(data)


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    matplotlib.rcParams["svg.hashsalt"] = "cvrisk"
    import matplotlib.pyplot as plt

    return plt


def save_figure(fig, path: str) -> None:
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    fig.savefig(path, format="svg", metadata={"Date": None})


def figure_cov_vs_m(rows, path: str, title: str) -> None:
    """Log-log fold covariance against fold size, exact vs approximation."""
    plt = _pyplot()
    ms = [r.m for r in rows]
    exact = [float(r.cov_exact) for r in rows]
    approx = [r.cov_approx for r in rows]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.loglog(ms, exact, "o-", label="exact")
    ax.loglog(ms, approx, "s--", label="approximation")
    best = min(rows, key=lambda r: r.cov_exact)
    ax.axvline(best.m, color="grey", lw=0.8, ls=":", label=f"argmin m={best.m}")
    ax.set_xlabel("fold size m")
    ax.set_ylabel("Cov(Lhat1, Lhat2)")
    ax.set_title(title)
    ax.legend()
    fig.tight_layout()
    save_figure(fig, path)
    plt.close(fig)


def figure_scaled_cov(rows, c0: float, path: str) -> None:
    """m * Cov against m with the limiting constant."""
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6, 4))
    by_R: dict = {}
    for r in rows:
        by_R.setdefault(r["R"], []).append(r)
    for R, rs in sorted(by_R.items()):
        ms = [r["m"] for r in rs]
        vals = [r["m"] * float(r["cov_exact"]) for r in rs]
        ax.plot(ms, vals, "o-", label=f"R={R}")
    ax.axhline(c0, color="k", lw=0.8, ls="--", label="c0")
    ax.set_xlabel("fold size m")
    ax.set_ylabel("m * Cov")
    ax.set_title("square-wave fold covariance scaling")
    ax.legend()
    fig.tight_layout()
    save_figure(fig, path)
    plt.close(fig)


def figure_decomposition(rows, path: str) -> None:
    """Bar chart of the decomposition terms for each row."""
    from .types import float_of

    plt = _pyplot()
    terms = ["mse", "sls", "inter_fold_cov", "per_fold_noise", "corr_hold", "corr_risk"]
    fig, ax = plt.subplots(figsize=(7, 4))
    width = 0.8 / max(len(rows), 1)
    for i, row in enumerate(rows):
        vals = [float_of(row[t]) for t in terms]
        xs = [j + i * width for j in range(len(terms))]
        ax.bar(xs, vals, width=width, label=f"{row['rule']} n={row['n']} k={row['k']}")
    ax.set_xticks([j + 0.4 - width / 2 for j in range(len(terms))])
    ax.set_xticklabels(terms, rotation=20)
    ax.set_ylabel("value")
    ax.set_title("CV error decomposition")
    ax.legend(fontsize=7)
    fig.tight_layout()
    save_figure(fig, path)
    plt.close(fig)


def figure_minimax(rows, path: str) -> None:
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6, 4))
    ks = [r["k"] for r in rows]
    scaled = [r["scaled_mse"] for r in rows]
    ax.semilogx(ks, scaled, "o-")
    ax.set_xlabel("folds k")
    ax.set_ylabel("MSE * n / sqrt(k)")
    ax.set_title("majority family: scaled worst-case MSE")
    fig.tight_layout()
    save_figure(fig, path)
    plt.close(fig)


def figure_linear(rows, path: str) -> None:
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6, 4))
    xs = range(len(rows))
    mse = [r["mse_mc"] for r in rows]
    bound = [float(r["bound"]) for r in rows]
    ax.semilogy(xs, mse, "o", label="MC estimate")
    ax.semilogy(xs, bound, "_", ms=14, label="leading order")
    ax.set_xticks(list(xs))
    ax.set_xticklabels(
        [f"q={r['q']},d={r['d']}\nn={r['n']},m={r['m']}" for r in rows], fontsize=7
    )
    ax.set_ylabel("CV MSE")
    ax.set_title("linear learner: MC MSE vs leading order")
    ax.legend()
    fig.tight_layout()
    save_figure(fig, path)
    plt.close(fig)
