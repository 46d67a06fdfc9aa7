#!/usr/bin/env python3
"""Critical-intensity scaling study for fixed-radius balls.

For balls of deterministic radius r in dimension d, rescaling space by 1/r
maps the model onto radius-1 balls with intensity lam * r**d, so the critical
intensity must satisfy lambda_c(r) * r**d == const. This script estimates
lambda_c for several radii with matched (window / bracket / tolerance)
geometry and prints the rescaled products, which should agree within
bisection tolerance.

Example:
    python3 scripts/lambda_c_scaling.py --radii 0.5 1.0 2.0 --replicas 300
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

from boolperc.cli import write_csv
from boolperc.distributions import RadiusLaw
from boolperc.experiments import find_lambda_c
from boolperc.field import FieldConfig

# reference bracket for radius-1 balls in d=2; other radii are rescaled copies
BASE_BRACKET = (0.2, 0.6)
BASE_LADDER = (8.0, 16.0)


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--dimension", type=int, default=2)
    ap.add_argument("--radii", type=float, nargs="+", default=[0.5, 1.0, 2.0])
    ap.add_argument("--replicas", type=int, default=300, help="replicas per bisection evaluation")
    ap.add_argument("--tolerance", type=float, default=0.02, help="bracket width target at radius 1")
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--out", type=Path, default=Path("out/lambda_c_scaling"))
    args = ap.parse_args(argv)

    rows = []
    for r in args.radii:
        scale = r ** (-args.dimension)
        cfg = FieldConfig(args.dimension, 1.0, RadiusLaw.dirac(r), seed=args.seed)
        t0 = time.monotonic()
        res = find_lambda_c(
            cfg,
            R_ladder=tuple(R * r for R in BASE_LADDER),
            tolerance=args.tolerance * scale,
            replicas_per_eval=args.replicas,
            bracket=(BASE_BRACKET[0] * scale, BASE_BRACKET[1] * scale),
        )
        rows.append({
            "radius": r,
            "lambda_c_hat": res.estimate,
            "bracket_lo": res.bracket[0],
            "bracket_hi": res.bracket[1],
            "rescaled": res.estimate * r ** args.dimension,
            "evaluations": res.evaluations,
            "seconds": round(time.monotonic() - t0, 2),
        })
        print(f"r={r:<5g} lambda_c_hat={res.estimate:.4f}  rescaled={rows[-1]['rescaled']:.4f}  ({rows[-1]['seconds']}s)")

    rescaled = [row["rescaled"] for row in rows]
    spread = max(rescaled) - min(rescaled)
    print(f"rescaled spread: {spread:.4f} (tolerance per estimate: {args.tolerance})")

    args.out.mkdir(parents=True, exist_ok=True)
    write_csv(args.out / "lambda_c_scaling.csv", "lambda-c-scaling", rows)
    print(f"wrote {args.out / 'lambda_c_scaling.csv'}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
