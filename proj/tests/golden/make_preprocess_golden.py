# SPDX-License-Identifier: Apache-2.0
"""Writes preprocess_golden.json from a numpy model of the validation transform.

The input is a synthetic 64x64 pattern defined by formula (mirrored in the C++
acceptance test), so no image file is needed:
    R = (3x + 5y) mod 256, G = (x*y) mod 256, B = (x*x + 2y) mod 256
"""
import json
from pathlib import Path

import numpy as np

SIZE, CROP, OUT = 64, 60, 224
MEAN = np.array([0.485, 0.456, 0.406])
STD = np.array([0.229, 0.224, 0.225])
STEP = 7


def pattern():
    y, x = np.mgrid[0:SIZE, 0:SIZE]
    return np.stack([(3 * x + 5 * y) % 256, (x * y) % 256, (x * x + 2 * y) % 256], axis=-1).astype(np.float64)


def round_half_away(v):
    return np.clip(np.sign(v) * np.floor(np.abs(v) + 0.5), 0, 255)


def bilinear_resize(img, out):
    n = img.shape[0]
    src = (np.arange(out) + 0.5) * (n / out) - 0.5
    src = np.clip(src, 0, n - 1)
    i0 = np.floor(src).astype(int)
    i1 = np.minimum(i0 + 1, n - 1)
    f = src - i0
    rows = img[i0] * (1 - f)[:, None, None] + img[i1] * f[:, None, None]
    cols = rows[:, i0] * (1 - f)[None, :, None] + rows[:, i1] * f[None, :, None]
    return round_half_away(cols)


def main():
    off = (SIZE - CROP) // 2
    crop = pattern()[off:off + CROP, off:off + CROP]
    resized = bilinear_resize(crop, OUT)
    tensor = ((resized / 255.0 - MEAN) / STD).transpose(2, 0, 1)
    samples = []
    for c in range(3):
        for yy in range(0, OUT, STEP):
            for xx in range(0, OUT, STEP):
                samples.append([c, yy, xx, float(tensor[c, yy, xx])])
    doc = {
        "input": "pattern64",
        "crop_offset": off,
        "samples": samples,
    }
    Path(__file__).with_name("preprocess_golden.json").write_text(json.dumps(doc) + "\n")


if __name__ == "__main__":
    main()
