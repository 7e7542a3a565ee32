#!/usr/bin/env python3
"""Regenerate the shipped model files in models/.

All three are linearized approximations of published MCU-scale CNN
backbones: residual adds are dropped (the planner handles plain chains),
and the two MCUNet-style nets are reconstructed from their reported
input sizes and overall stage layout rather than exact NAS tables.
See README for the full list of liberties taken.
"""

import json
from pathlib import Path

OUT = Path(__file__).resolve().parents[1] / "models"


def conv(c_in, c_out, k=1, s=1, p=0):
    return {"kind": "conv2d", "k": k, "s": s, "p": p, "c_in": c_in, "c_out": c_out}


def dw(c, k=3, s=1, p=1):
    return {"kind": "dwconv2d", "k": k, "s": s, "p": p, "c_in": c, "c_out": c}


def inverted_block(c_in, c_out, hidden, s):
    """MobileNetV2 bottleneck, linearized: expand 1x1, dw 3x3, project 1x1."""
    layers = []
    if hidden != c_in:
        layers.append(conv(c_in, hidden))
    layers.append(dw(hidden, s=s))
    layers.append(conv(hidden, c_out))
    return layers


def mbv2_w035_144():
    # width multiplier 0.35 with the usual divisible-by-8 channel rounding
    layers = [conv(3, 16, k=3, s=2, p=1)]
    layers += inverted_block(16, 8, 16, 1)
    stages = [  # (c_out, repeats, first stride), expansion 6
        (8, 2, 2),
        (16, 3, 2),
        (24, 4, 2),
        (32, 3, 1),
        (56, 3, 2),
        (112, 1, 1),
    ]
    c_in = 8
    for c_out, repeats, stride in stages:
        for r in range(repeats):
            layers += inverted_block(c_in, c_out, c_in * 6, stride if r == 0 else 1)
            c_in = c_out
    layers.append(conv(112, 1280))
    layers.append({"kind": "global_pool", "c_in": 1280, "c_out": 1280})
    layers.append({"kind": "dense", "c_in": 1280, "c_out": 1000})
    return {
        "name": "mbv2-w0.35-144",
        "input": {"h": 144, "w": 144, "c": 3},
        "element_bytes": 1,
        "layers": layers,
    }


def mn2_vww5_80():
    # visual-wake-words scale: stride-1 stem at 80x80, shallow tail, 2 classes
    layers = [conv(3, 12, k=3, s=1, p=1), dw(12, s=2)]
    layers += [conv(12, 8)]
    stages = [
        (16, 2, 2),
        (24, 2, 2),
        (40, 2, 2),
        (48, 1, 1),
    ]
    c_in = 8
    for c_out, repeats, stride in stages:
        for r in range(repeats):
            layers += inverted_block(c_in, c_out, c_in * 4, stride if r == 0 else 1)
            c_in = c_out
    layers.append(conv(48, 160))
    layers.append({"kind": "global_pool", "c_in": 160, "c_out": 160})
    layers.append({"kind": "dense", "c_in": 160, "c_out": 2})
    return {
        "name": "mn2-vww5-80",
        "input": {"h": 80, "w": 80, "c": 3},
        "element_bytes": 1,
        "layers": layers,
    }


def mn2_320k_176():
    # ImageNet-scale variant: wide stem at 176x176, deeper tail, 1000 classes
    layers = [conv(3, 20, k=3, s=2, p=1), dw(20, s=1)]
    layers += [conv(20, 16)]
    stages = [
        (24, 2, 2),
        (40, 3, 2),
        (80, 3, 2),
        (96, 2, 1),
        (160, 2, 2),
    ]
    c_in = 16
    for c_out, repeats, stride in stages:
        for r in range(repeats):
            layers += inverted_block(c_in, c_out, c_in * 5, stride if r == 0 else 1)
            c_in = c_out
    layers.append(conv(160, 1280))
    layers.append({"kind": "global_pool", "c_in": 1280, "c_out": 1280})
    layers.append({"kind": "dense", "c_in": 1280, "c_out": 1000})
    return {
        "name": "mn2-320k-176",
        "input": {"h": 176, "w": 176, "c": 3},
        "element_bytes": 1,
        "layers": layers,
    }


def main():
    OUT.mkdir(exist_ok=True)
    for fname, doc in [
        ("mbv2_w035_144.json", mbv2_w035_144()),
        ("mn2_vww5_80.json", mn2_vww5_80()),
        ("mn2_320k_176.json", mn2_320k_176()),
    ]:
        (OUT / fname).write_text(json.dumps(doc, indent=2) + "\n")
        print(f"wrote models/{fname} ({len(doc['layers'])} layers)")


if __name__ == "__main__":
    main()
