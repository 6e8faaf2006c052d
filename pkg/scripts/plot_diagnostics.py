#!/usr/bin/env python3
"""Quick-look plots for a run's diagnostics.csv (not part of the package).

Usage: python scripts/plot_diagnostics.py OUT_DIR/diagnostics.csv [out.png]
"""

import csv
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt


def main():
    if len(sys.argv) < 2:
        print(__doc__)
        return 1
    rows = list(csv.DictReader(open(sys.argv[1])))
    t = [float(r["t"]) for r in rows]

    fig, axes = plt.subplots(2, 2, figsize=(11, 7), sharex=True)

    ax = axes[0][0]
    for col in ("v_l2", "v_linf", "grad_v_l2"):
        ax.plot(t, [float(r[col]) for r in rows], label=col)
    ax.set_title("velocity norms")
    ax.legend()

    ax = axes[0][1]
    for col in ("omega_l2", "omega_over_r_l2", "omega_over_r_linf"):
        ax.plot(t, [float(r[col]) for r in rows], label=col)
    ax.set_yscale("log")
    ax.set_title("vorticity and its axis quotient")
    ax.legend()

    ax = axes[1][0]
    for col in ("rho_l2", "rho_linf", "rho_over_r_l2"):
        ax.plot(t, [float(r[col]) for r in rows], label=col)
    ax.set_title("density norms")
    ax.set_xlabel("t")
    ax.legend()

    ax = axes[1][1]
    dist = [float(r["support_dist_to_axis"]) for r in rows]
    diam = [float(r["support_z_diameter"]) for r in rows]
    ax.plot(t, dist, label="support distance to axis")
    ax.plot(t, diam, label="support z-diameter")
    ax.set_title("support geometry")
    ax.set_xlabel("t")
    ax.legend()

    fig.tight_layout()
    out = sys.argv[2] if len(sys.argv) > 2 else "diagnostics.png"
    fig.savefig(out, dpi=140)
    print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
