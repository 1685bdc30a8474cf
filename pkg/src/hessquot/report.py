"""Delimited output and figures for the command-line report paths.

CSV files are RFC-4180 (CRLF, minimal quoting) with floats at 17 significant
digits; JSON is sorted-key with native float repr, so identical runs produce
byte-identical files.  Figures are rendered with the Agg backend next to the
delimited output.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

FLOAT_FMT = "%.17g"
_PNG_META = {"Software": "hessquot"}


def fmt(x) -> str:
    if isinstance(x, (float, np.floating)):
        return FLOAT_FMT % float(x)
    return str(x)


def sanitize(obj):
    """Make reports JSON-serializable (numpy scalars/arrays to plain types)."""
    if isinstance(obj, dict):
        return {str(k): sanitize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [sanitize(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [sanitize(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


def write_json(path: str | Path, obj) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(sanitize(obj), fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_csv(path: str | Path, header: list[str], rows) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([fmt(v) for v in row])


def write_dat(path: str | Path, header: list[str], rows) -> None:
    """Whitespace-delimited table for gnuplot."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("# " + " ".join(header) + "\n")
        for row in rows:
            fh.write(" ".join(fmt(v) for v in row) + "\n")


def _save(fig, path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, dpi=130, metadata=_PNG_META)
    plt.close(fig)


def profile_figure(path, r, psi, excess, m, amplitude_limit, beta):
    """psi(r) plus the scaled excess (psi-1) r^m against its two bounds."""
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9.0, 3.6))
    ax1.semilogx(r, psi, lw=1.5)
    ax1.set_xlabel("r")
    ax1.set_ylabel("psi(r)")
    ax1.set_title("profile")
    ax1.grid(True, ls=":", alpha=0.5)
    scaled = np.asarray(excess) * np.asarray(r) ** m
    ax2.semilogx(r, scaled, lw=1.5, label="(psi-1) r^m")
    ax2.axhline(beta - 1.0, color="gray", ls="--", lw=1, label="beta - 1")
    ax2.axhline(amplitude_limit, color="black", ls=":", lw=1, label="B/(k-l)")
    ax2.set_xlabel("r")
    ax2.set_title("scaled excess and bounds")
    ax2.legend(fontsize=8)
    ax2.grid(True, ls=":", alpha=0.5)
    fig.tight_layout()
    _save(fig, Path(path))


def tail_figure(path, R, mu_vals, slope, expected_slope):
    fig, ax = plt.subplots(figsize=(5.0, 3.6))
    ax.loglog(R, mu_vals, "o-", ms=3, lw=1.2, label="mu_R")
    anchor = mu_vals[0] * (np.asarray(R) / R[0]) ** expected_slope
    ax.loglog(R, anchor, "--", color="gray", lw=1,
              label=f"slope {expected_slope:.3g}")
    ax.set_xlabel("R")
    ax.set_ylabel("mu_R(beta)")
    ax.set_title(f"tail integral decay (fit slope {slope:.4g})")
    ax.legend(fontsize=8)
    ax.grid(True, which="both", ls=":", alpha=0.4)
    fig.tight_layout()
    _save(fig, Path(path))


def decay_figure(path, radii, w, slope, expected_slope):
    fig, ax = plt.subplots(figsize=(5.0, 3.6))
    ax.loglog(radii, w, "o-", ms=4, lw=1.2, label="max |u_lower - quadratic|")
    anchor = w[0] * (np.asarray(radii) / radii[0]) ** expected_slope
    ax.loglog(radii, anchor, "--", color="gray", lw=1,
              label=f"slope {expected_slope:.3g}")
    ax.set_xlabel("ellipsoidal radius")
    ax.set_title(f"approach to the asymptote (fit slope {slope:.4g})")
    ax.legend(fontsize=8)
    ax.grid(True, which="both", ls=":", alpha=0.4)
    fig.tight_layout()
    _save(fig, Path(path))


def margins_figure(path, radii, quotient_margins):
    fig, ax = plt.subplots(figsize=(5.0, 3.6))
    vals = np.maximum(np.asarray(quotient_margins), 1e-300)
    ax.loglog(radii, vals, ".", ms=2, alpha=0.5)
    ax.set_xlabel("ellipsoidal radius")
    ax.set_ylabel("sigma_k - sigma_l")
    ax.set_title("subsolution margin (must stay >= 0)")
    ax.grid(True, which="both", ls=":", alpha=0.4)
    fig.tight_layout()
    _save(fig, Path(path))


def envelope_figure(path, shifts, margin_ratios):
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9.0, 3.4))
    ax1.hist(np.log2(shifts), bins=20, color="#2c5282")
    ax1.set_xlabel("log2 shift t")
    ax1.set_title("touching shifts")
    ax2.hist(np.log10(np.maximum(margin_ratios, 1e-300)), bins=30, color="#2c5282")
    ax2.set_xlabel("log10 margin ratio")
    ax2.set_title("touching margins / d^2")
    for ax in (ax1, ax2):
        ax.grid(True, ls=":", alpha=0.4)
    fig.tight_layout()
    _save(fig, Path(path))
