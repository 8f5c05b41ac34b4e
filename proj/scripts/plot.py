#!/usr/bin/env python3
"""Plot the CSVs written by `mimodpd run` / `compare` / `train`.

usage: plot.py OUT_DIR [--save DIR]
"""
import argparse
import pathlib

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
import pandas as pd  # noqa: E402


def read(path):
    return pd.read_csv(path, comment="#")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("out_dir", type=pathlib.Path)
    ap.add_argument("--save", type=pathlib.Path, default=None)
    args = ap.parse_args()
    save = args.save or args.out_dir
    save.mkdir(parents=True, exist_ok=True)

    if (args.out_dir / "psd.csv").exists():
        df = read(args.out_dir / "psd.csv")
        fig, ax = plt.subplots()
        for name, g in df.groupby("scheme", sort=False):
            ax.plot(g.freq_hz / 1e6, g.pa_out_dbm, label=name)
        ax.set(xlabel="frequency (MHz)", ylabel="dBm per bin", title="PA output PSD (Welch)")
        ax.legend()
        fig.savefig(save / "psd.png", dpi=120)

    if (args.out_dir / "beampattern.csv").exists():
        df = read(args.out_dir / "beampattern.csv")
        fig, ax = plt.subplots()
        for name, g in df.groupby("scheme", sort=False):
            ax.plot(g.theta_deg, g.oob_dbm, label=f"{name} oob")
        first = df[df.scheme == df.scheme.iloc[0]]
        ax.plot(first.theta_deg, first.inband_dbm, "k", lw=1, label="in-band")
        ax.set(xlabel="angle (deg)", ylabel="dBm", ylim=(first.inband_dbm.max() - 80, None))
        ax.legend(fontsize=7)
        fig.savefig(save / "beampattern.png", dpi=120)

    if (args.out_dir / "loss.csv").exists():
        df = read(args.out_dir / "loss.csv")
        fig, ax = plt.subplots()
        for name, g in df.groupby("scheme", sort=False):
            ax.semilogy(g.batch, g.mse, label=name, lw=0.8)
        ax.set(xlabel="batch", ylabel="MSE")
        ax.legend()
        fig.savefig(save / "loss.png", dpi=120)

    if (args.out_dir / "victims.csv").exists():
        df = read(args.out_dir / "victims.csv")
        fig, ax = plt.subplots()
        for name, g in df.groupby("scheme", sort=False):
            v = np.sort(g.mimo_oob_dbm.to_numpy())
            ax.plot(v, np.linspace(0, 1, len(v)), label=f"{name} MIMO")
        s = np.sort(df[df.scheme == df.scheme.iloc[0]].siso_oob_dbm.to_numpy())
        ax.plot(s, np.linspace(0, 1, len(s)), "k--", label="SISO")
        ax.set(xlabel="victim OOB power (dBm)", ylabel="CDF")
        ax.legend(fontsize=7)
        fig.savefig(save / "victims.png", dpi=120)


if __name__ == "__main__":
    main()
