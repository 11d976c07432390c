#!/usr/bin/env python3
"""Plot the CSV written by `dicke fig1` or `dicke fig2`.

    dicke fig1 --output fig1.csv && python3 scripts/plot.py fig1 fig1.csv
    dicke fig2 --output fig2.csv && python3 scripts/plot.py fig2 fig2.csv
"""
import argparse

import matplotlib.pyplot as plt
import pandas as pd


def fig1(df, ax):
    x = df["y_over_ycrit"]
    ax.plot(x, df["alpha0_sq"], "r--", lw=2, label=r"$\alpha_0^2$")
    ax.plot(x, df["beta0_sq"], "b-", lw=2, label=r"$\beta_0^2$")
    ax.plot(x, df["n_photon_incoh"], "r--", lw=0.8, label=r"$\langle a^\dagger a\rangle$")
    ax.plot(x, df["n_atom_incoh"], "b-", lw=0.8, label=r"$\langle b^\dagger b\rangle$")
    ax.set_yscale("log")
    ax.set_ylim(1e-4, 10)
    ax.set_ylabel("excitation number")


def fig2(df, ax):
    x = df["y_over_ycrit"]
    ax.plot(x, df["rate_modes"], "k--", label="normal modes")
    ax.plot(x, df["rate_populations"], "k-", label="populations")
    ax.plot(x, df["rate_adiabatic"], "k-.", label="adiabatic elimination")
    ax.set_ylim(0, 3 * df["rate_populations"].max())
    ax.set_ylabel(r"diffusion rate $[\omega_R]$")


def main():
    p = argparse.ArgumentParser()
    p.add_argument("kind", choices=["fig1", "fig2"])
    p.add_argument("csv")
    p.add_argument("--save", help="write the figure to this path instead of showing it")
    args = p.parse_args()

    df = pd.read_csv(args.csv, na_values=["nan"])
    fig, ax = plt.subplots(figsize=(5, 3.5))
    {"fig1": fig1, "fig2": fig2}[args.kind](df, ax)
    ax.set_xlabel(r"$y/y_{\rm crit}$")
    ax.legend()
    fig.tight_layout()
    if args.save:
        fig.savefig(args.save, dpi=150)
    else:
        plt.show()


if __name__ == "__main__":
    main()
