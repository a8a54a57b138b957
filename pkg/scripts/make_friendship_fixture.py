"""Generate the synthetic friendship panel shipped in data/friendship/.

32 students with gender, smoker and program attributes, rated on a six-point
scale 0..5 in seven waves.  Raw code 1 means "unknown person" and code 9 a
missing questionnaire entry; both are meant to be declared missing on
ingestion.  Higher codes are closer relationships.
"""

import argparse
import csv
from pathlib import Path

import numpy as np
from scipy.special import expit

BETA = {"gender": 0.8, "smokers": 1.6, "program": 0.6}
# cutoffs on the latent scale between retained categories 0 | 2 | 3 | 4 | 5
CUTS = np.array([-2.5, 1.2, 2.6, 4.2])
UNKNOWN_SHARE = (0.6, 0.57, 0.54, 0.52, 0.5, 0.48, 0.46)


def make(outdir, seed=20240501, n=32):
    rng = np.random.default_rng(seed)
    gender = (rng.random(n) < 0.65).astype(int)
    smoker = (rng.random(n) < 0.33).astype(int)
    program = rng.choice([1, 2, 3], size=n, p=[0.55, 0.3, 0.15])
    ids = [f"s{a + 1:02d}" for a in range(n)]
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    with open(outdir / "nodes.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["node_id", "gender", "smoker", "program"])
        w.writerows(zip(ids, gender, smoker, program))

    xb = (BETA["gender"] * (gender[:, None] == gender[None, :])
          + BETA["smokers"] * (smoker[:, None] & smoker[None, :])
          + BETA["program"] * (program[:, None] == program[None, :]))
    send = rng.normal(0.0, 0.8, n)
    recv = rng.normal(0.0, 0.8, n)
    for wave, share in enumerate(UNKNOWN_SHARE, start=1):
        # ties firm up over the year
        drift = 0.15 * (wave - 1)
        u = rng.random((n, n))
        p = expit(xb[:, :, None] + send[:, None, None] + recv[None, :, None] + drift - CUTS[None, None, :])
        level = (u[:, :, None] <= p).sum(axis=2)
        raw = np.array([0, 2, 3, 4, 5])[level]
        know = rng.random((n, n)) >= share
        with open(outdir / f"wave{wave}.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["sender", "receiver", "outcome"])
            for i in range(n):
                for j in range(n):
                    if i == j:
                        continue
                    code = raw[i, j] if know[i, j] else 1
                    if rng.random() < 0.01:
                        code = 9
                    w.writerow([ids[i], ids[j], code])


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--outdir", default=str(Path(__file__).resolve().parents[1] / "data" / "friendship"))
    ap.add_argument("--seed", type=int, default=20240501)
    args = ap.parse_args()
    make(args.outdir, args.seed)
