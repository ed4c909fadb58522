"""Scalar curvature on a 50 x 50 interior mesh under step halving."""

import argparse

import numpy as np

from toric_sfk import NutParameter, build
from toric_sfk.catalog import hwang_singer
from toric_sfk.conical import conical_construct
from toric_sfk.geometry import interior_mesh, scalar_curvature_many


def variants():
    yield "cusp", build(hwang_singer(), NutParameter())
    yield "smooth", build(hwang_singer(cusp=False), NutParameter())
    yield "conical 1/2", conical_construct(hwang_singer(cusp=False), {1: 0.5})


if __name__ == "__main__":
    p = argparse.ArgumentParser()
    p.add_argument("--mesh", type=int, default=50)
    p.add_argument("--levels", type=int, default=3)
    args = p.parse_args()
    for name, a in variants():
        x = interior_mesh(a, args.mesh)
        prev = None
        for k in range(args.levels):
            h = 1e-3 / 2**k
            s = float(np.abs(scalar_curvature_many(x, a, h)).max())
            ratio = "" if prev is None else f"ratio {prev / s:.3f}"
            print(f"{name:12} points={len(x)} h={h:.2e} max|s|={s:.3e} {ratio}")
            prev = s
