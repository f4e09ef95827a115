"""Builds reference_table.csv: 16 detector rows whose metric/DS and
metric/#Col. Pearson correlations equal a fixed set of target values.

Each column is an affine image of a unit vector built from an orthonormal,
zero-mean basis (u, v, w_1..w_5): DS is u, #Col. is rho*u + sqrt(1-rho^2)*v
and metric m is alpha*u + beta*v + gamma*w_m with alpha = s_ds*r_ds,
beta = (s_col*r_col - rho*alpha) / sqrt(1-rho^2), gamma = sqrt(1-alpha^2-beta^2).
"""

import csv
import math
import sys

import numpy as np

RHO = -0.8
N = 16
# name, |r| with DS, |r| with #Col., sign with DS, mean, spread
METRICS = [
    ("nds", 0.852, 0.907, 1.0, 0.55, 0.06),
    ("ap", 0.805, 0.903, 1.0, 0.60, 0.08),
    ("ade", 0.784, 0.770, -1.0, 1.20, 0.30),
    ("aos", 0.742, 0.894, 1.0, 0.58, 0.08),
    ("fde", 0.703, 0.653, -1.0, 2.00, 0.50),
]


def basis(k, seed):
    rng = np.random.default_rng(seed)
    m = np.column_stack([np.ones(N), rng.standard_normal((N, k))])
    q, _ = np.linalg.qr(m)
    return [q[:, i] for i in range(1, k + 1)]


def main(path):
    u, v, *ws = basis(2 + len(METRICS), 20240)
    s = math.sqrt(1.0 - RHO * RHO)
    cols = {"ds": 45.0 + 8.0 * u * math.sqrt(N - 1)}
    cols["collisions"] = 3.0 + 0.8 * (RHO * u + s * v) * math.sqrt(N - 1)
    for (name, r_ds, r_col, sign, mean, spread), w in zip(METRICS, ws):
        alpha = sign * r_ds
        beta = (-sign * r_col - RHO * alpha) / s
        gamma = math.sqrt(1.0 - alpha * alpha - beta * beta)
        x = alpha * u + beta * v + gamma * w
        cols[name] = mean + spread * x * math.sqrt(N - 1)
    order = [m[0] for m in METRICS] + ["ds", "collisions"]
    with open(path, "w", newline="") as f:
        out = csv.writer(f, lineterminator="\n")
        out.writerow(["detector_id", "route_id"] + order)
        for i in range(N):
            out.writerow([f"model_{i + 1:02d}", "all"] + [f"{cols[c][i]:.6f}" for c in order])


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "reference_table.csv")
