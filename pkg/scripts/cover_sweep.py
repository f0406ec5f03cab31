#!/usr/bin/env python3
"""Build verified ball covers for every radius pair at each word length
and tabulate achieved sizes against the volume lower bound and the n^5
cap.

Example:
    python3 scripts/cover_sweep.py --max-n 12 --out-dir runs/covers
"""
import argparse
import sys
from fractions import Fraction
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from ardtk.cli import write_csv
from ardtk.cover import cover_ball
from ardtk.distortion import DistortionSpec, ball_cardinality


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--max-n", type=int, default=12)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out-dir", default="runs/covers")
    args = ap.parse_args(argv)

    rows = []
    worst = 0.0
    print(f"{'n':>3} {'delta':>6} {'d':>6} {'size':>7} {'volume':>7} "
          f"{'ratio':>7} {'verified':>8}")
    for n in range(1, args.max_n + 1):
        spec = DistortionSpec("hamming", n)
        for deltan in range(n // 2 + 1):
            for dn in range(deltan + 1):
                delta, d = Fraction(deltan, n), Fraction(dn, n)
                res = cover_ball(spec, delta, d,
                                 seed=args.seed + 1000 * n + 10 * deltan + dn)
                volume = -(-ball_cardinality(spec, delta) // ball_cardinality(spec, d))
                ratio = res.size / volume
                worst = max(worst, ratio)
                rows.append([n, deltan, dn, res.size, volume,
                             f"{ratio:.12g}", res.verified])
                print(f"{n:>3} {str(delta):>6} {str(d):>6} {res.size:>7} "
                      f"{volume:>7} {ratio:>7.2f} {str(res.verified):>8}")

    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_csv(out / "cover_sweep.csv",
              ["n", "delta_n", "d_n", "size", "volume_lower", "ratio", "verified"],
              rows)
    print(f"\nworst size/volume ratio {worst:.2f}; table in "
          f"{out / 'cover_sweep.csv'}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
