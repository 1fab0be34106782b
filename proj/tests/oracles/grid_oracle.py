"""Exhaustive grid-search oracle for the marginal DPD objective.

Generates 20 contaminated n = 20 instances (y = x + e, three responses shifted
by -30), evaluates the mean DPD loss on the grid
(gamma, beta, sigma) in [-2, 2] x [-2, 2] x [0.05, 5] at step 0.01, and writes
the instances plus the grid minimum to tests/data/grid_oracle.tsv.

Run: python3 tests/oracles/grid_oracle.py
"""
import pathlib

import numpy as np

N = 20
INSTANCES = 20
ALPHAS = (0.5, 0.3)

gammas = np.round(np.arange(-200, 201) * 0.01, 10)
betas = np.round(np.arange(-200, 201) * 0.01, 10)
sigmas = np.round(np.arange(5, 501) * 0.01, 10)


def grid_min(y, x, alpha):
    # residuals for every (gamma, beta) pair: shape (G, B, n)
    r = y[None, None, :] - gammas[:, None, None] - betas[None, :, None] * x[None, None, :]
    r2 = r * r
    best = (np.inf, None)
    for s in sigmas:
        k = s ** (-alpha) * (2 * np.pi) ** (-alpha / 2)
        mean_exp = np.exp(-alpha * r2 / (2 * s * s)).mean(axis=2)
        obj = k * (1 / np.sqrt(1 + alpha) - (1 + alpha) / alpha * mean_exp) + 1 / alpha
        idx = np.unravel_index(np.argmin(obj), obj.shape)
        if obj[idx] < best[0]:
            best = (float(obj[idx]), (gammas[idx[0]], betas[idx[1]], s))
    return best


def main():
    rng = np.random.default_rng(20200501)
    out = pathlib.Path(__file__).resolve().parents[1] / "data" / "grid_oracle.tsv"
    rows = []
    for inst in range(INSTANCES):
        alpha = ALPHAS[inst % 2]
        x = rng.standard_normal(N)
        y = x + rng.standard_normal(N)
        shifted = rng.choice(N, size=3, replace=False)
        y[shifted] -= 30.0
        obj, (g, b, s) = grid_min(y, x, alpha)
        rows.append((inst, alpha, obj, g, b, s, x, y))
        print(f"instance {inst}: alpha={alpha} min={obj:.12f} at ({g:.2f}, {b:.2f}, {s:.2f})", flush=True)
    with open(out, "w") as fh:
        fh.write("# instance\talpha\tgrid_min\tgamma\tbeta\tsigma\tx(20)\ty(20)\n")
        for inst, alpha, obj, g, b, s, x, y in rows:
            cells = [str(inst), repr(alpha), repr(obj), f"{g:.2f}", f"{b:.2f}", f"{s:.2f}"]
            cells += [repr(float(v)) for v in x] + [repr(float(v)) for v in y]
            fh.write("\t".join(cells) + "\n")


if __name__ == "__main__":
    main()
