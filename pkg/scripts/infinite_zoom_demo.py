"""Zoom-out video from repeated 2x extrapolation, using zero padding as the extrapolator.

Writes PPM frames of a synthetic gradient image and reports how much of each
extrapolation the original content covers.

    python3 scripts/infinite_zoom_demo.py --out-dir /tmp/zoom --steps 3 --frames 16
"""

import argparse
import os

import numpy as np

from extrapkit.formats import write_image_pnm
from extrapkit.zoomplan import build_schedule, check_images, pad_stub, recursive_extrapolate, render_frame


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out-dir", required=True)
    ap.add_argument("--height", type=int, default=64)
    ap.add_argument("--width", type=int, default=128)
    ap.add_argument("--steps", type=int, default=6)
    ap.add_argument("--frames", type=int, default=64)
    ap.add_argument("--intro", type=int, default=30)
    args = ap.parse_args()

    H, W = args.height, args.width
    rr, cc = np.mgrid[0:H, 0:W]
    base = np.stack([255.0 * rr / (H - 1), 255.0 * cc / (W - 1), np.full((H, W), 128.0)], axis=2)
    outs = recursive_extrapolate(pad_stub, base, args.steps)
    # Coverage is measured on a constant image; textured content rings past the threshold.
    masks = recursive_extrapolate(pad_stub, np.ones((H, W)), args.steps)
    for t, m in enumerate(masks, 1):
        rows = np.nonzero((m > 0.5).any(axis=1))[0]
        print(f"step {t}: content spans {rows[-1] + 1 - rows[0]} of {m.shape[0]} rows "
              f"(expected {m.shape[0] / 2 ** t:g})")

    images = [base] + outs
    sched = build_schedule((H, W), args.steps, args.frames, args.intro)
    check_images(sched, images)
    os.makedirs(args.out_dir, exist_ok=True)
    for i, spec in enumerate(sched.frames):
        frame = np.clip(np.rint(render_frame(spec, images)), 0, 255).astype(np.uint8)
        write_image_pnm(frame, os.path.join(args.out_dir, f"frame_{i:05d}.ppm"))
    print(f"wrote {len(sched)} frames to {args.out_dir}")


if __name__ == "__main__":
    main()
