#!/usr/bin/env python3
"""Denoise a noisy cross bitmap across several seeds and tabulate the
results: residual distance to the clean image, knee rate, and the rate a
clairvoyant reader of the clean image would have picked.

Example:
    python3 scripts/denoise_cross.py --side 32 --flip 1/10 --seeds 10 \
        --out-dir runs/cross
"""
import argparse
import sys
from fractions import Fraction
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from ardtk.cli import parse_fraction, write_csv, write_pbm
from ardtk.denoise import best_rate_against, denoise, make_noisy_cross
from ardtk.distortion import DistortionSpec


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--side", type=int, default=32)
    ap.add_argument("--flip", type=parse_fraction, default=Fraction(1, 10))
    ap.add_argument("--seeds", type=int, default=10)
    ap.add_argument("--budget", type=int, default=160)
    ap.add_argument("--out-dir", default="runs/cross")
    ap.add_argument("--save-images", action="store_true",
                    help="also write clean/noisy/denoised PBMs per seed")
    args = ap.parse_args(argv)

    n = args.side * args.side
    spec = DistortionSpec("hamming", n)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)

    rows = []
    print(f"{'seed':>4} {'flips':>6} {'residual':>9} {'knee':>6} {'r*':>6}")
    for seed in range(args.seeds):
        clean, noisy = make_noisy_cross(args.side, args.flip, seed)
        res = denoise(noisy, spec, budget=args.budget, seed=seed,
                      image_width=args.side)
        frac = Fraction(res.denoised.hamming(clean), n)
        rstar = best_rate_against(res.curve, clean)
        rows.append([seed, clean.hamming(noisy), frac.numerator,
                     frac.denominator, f"{res.knee.rate:.12g}",
                     f"{rstar:.12g}"])
        print(f"{seed:>4} {clean.hamming(noisy):>6} {float(frac):>9.4f} "
              f"{res.knee.rate:>6.0f} {rstar:>6.0f}")
        if args.save_images:
            write_pbm(out / f"clean_{seed}.pbm", clean, args.side)
            write_pbm(out / f"noisy_{seed}.pbm", noisy, args.side)
            write_pbm(out / f"denoised_{seed}.pbm", res.denoised, args.side)

    write_csv(out / "summary.csv",
              ["seed", "flips", "residual_num", "residual_den", "knee_rate",
               "best_rate_vs_clean"],
              rows)
    hits = sum(1 for r in rows if Fraction(int(r[2]), int(r[3])) <= Fraction(3, 100))
    print(f"\n{hits}/{args.seeds} runs within 3% of the clean image; "
          f"summary in {out / 'summary.csv'}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
