#!/usr/bin/env python3
"""Render static figures from an nhrotor artifact directory.

Usage:
    plot_run.py RUN_DIR [RUN_DIR ...] [--out DIR]

Reads the CSV/JSON artifacts written by `nhrotor run` / `preset` / `scan`
and writes PNGs next to them (or into --out). Every run directory gets:
momentum growth, entropy decay, final momentum profile, Schmidt spectrum,
and (when present) the fidelity series and quasienergy plane. A directory
containing scan.csv instead gets the saturation-vs-lambda summary.
"""

import argparse
import json
import re
import sys
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import pandas as pd


def read_csv(path: Path) -> pd.DataFrame:
    # first line is a "# schema=... config=..." comment
    return pd.read_csv(path, comment="#")


def save(fig, path: Path):
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    print(f"wrote {path}")


def plot_timeseries(run: Path, out: Path):
    ts = read_csv(run / "timeseries.csv")

    fig, ax = plt.subplots(figsize=(5, 3.4))
    ax.plot(ts["step"], ts["p1_sq"], label="quantum")
    if "classical_p1_sq" in ts.columns:
        ax.plot(ts["step"], ts["classical_p1_sq"], "--", label="classical ensemble")
        ax.legend()
    ax.set_xlabel("kick number")
    ax.set_ylabel(r"$\langle p_1^2\rangle$")
    save(fig, out / "p1_sq.png")

    if ts["entropy"].notna().any():
        fig, ax = plt.subplots(figsize=(5, 3.4))
        ax.plot(ts["step"], ts["entropy"])
        ax.set_xlabel("kick number")
        ax.set_ylabel("linear entropy S")
        ax.set_ylim(-0.02, 1.02)
        save(fig, out / "entropy.png")

    if "fidelity" in ts.columns and ts["fidelity"].notna().any():
        fig, ax = plt.subplots(figsize=(5, 3.4))
        ax.plot(ts["step"], ts["fidelity"])
        ax.set_xlabel("kick number")
        ax.set_ylabel("overlap with dominant mode")
        save(fig, out / "fidelity.png")


def latest(run: Path, pattern: str):
    best, best_t = None, -1
    for f in run.glob(pattern):
        m = re.search(r"_t(\d+)\.csv$", f.name)
        if m and int(m.group(1)) > best_t:
            best, best_t = f, int(m.group(1))
    return best, best_t


def plot_marginal(run: Path, out: Path):
    f, t = latest(run, "marginal_t*.csv")
    if f is None:
        return
    marg = read_csv(f)
    fig, ax = plt.subplots(figsize=(5, 3.4))
    ax.semilogy(marg["p"], marg["prob"].clip(lower=1e-18), lw=0.8)
    ax.set_xlabel(r"$p_1$")
    ax.set_ylabel(f"P(p) at t={t}")
    save(fig, out / "marginal.png")


def plot_rho_spectrum(run: Path, out: Path):
    f, t = latest(run, "rho_spectrum_t*.csv")
    if f is None:
        return
    spec = read_csv(f)
    fig, ax = plt.subplots(figsize=(5, 3.4))
    ax.semilogy(spec["rank"], spec["xi"].clip(lower=1e-18), "o", ms=3)
    ax.set_xlabel("rank")
    ax.set_ylabel(rf"Schmidt weight $\xi$ at t={t}")
    save(fig, out / "rho_spectrum.png")


def plot_spectral(run: Path, out: Path):
    f = run / "spectral.json"
    if not f.exists():
        return
    data = json.loads(f.read_text())
    pairs = data.get("eigenpairs", [])
    if not pairs:
        return
    fig, ax = plt.subplots(figsize=(5, 3.8))
    ax.scatter([p["eps_r"] for p in pairs], [p["eps_i"] for p in pairs], s=6)
    ax.set_xlabel(r"quasienergy $\varepsilon_r$")
    ax.set_ylabel(r"growth rate $\varepsilon_i$")
    save(fig, out / "quasienergies.png")


def plot_scan(scan_csv: Path, out: Path):
    scan = read_csv(scan_csv)
    ok = scan[scan["status"] == "ok"]
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(7.5, 3.2))
    ax1.plot(ok["lambda"], ok["saturation_entropy"], "o-")
    ax1.set_xlabel(r"$\lambda$")
    ax1.set_ylabel("saturation S")
    ax2.plot(ok["lambda"], ok["zeta"], "s-")
    ax2.set_xlabel(r"$\lambda$")
    ax2.set_ylabel(r"localization length $\zeta$")
    save(fig, out / "scan.png")


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("runs", nargs="+", type=Path, help="artifact directories")
    ap.add_argument("--out", type=Path, help="write PNGs here instead of into each run dir")
    args = ap.parse_args()

    status = 0
    for run in args.runs:
        out = args.out or run
        out.mkdir(parents=True, exist_ok=True)
        if (run / "scan.csv").exists():
            plot_scan(run / "scan.csv", out)
            continue
        if not (run / "timeseries.csv").exists():
            print(f"{run}: no timeseries.csv or scan.csv, skipping", file=sys.stderr)
            status = 1
            continue
        plot_timeseries(run, out)
        plot_marginal(run, out)
        plot_rho_spectrum(run, out)
        plot_spectral(run, out)
    return status


if __name__ == "__main__":
    sys.exit(main())
