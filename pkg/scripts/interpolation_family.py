"""Degeneration of the interpolating potentials u^theta and curvature at theta = 1/2."""

import numpy as np

from toric_sfk.catalog import hwang_singer
from toric_sfk.conical import InterpolationFamily, degeneration_profile

if __name__ == "__main__":
    fam = InterpolationFamily(hwang_singer())
    mesh = np.array([[1.0, 0.5], [0.5, 1.0], [2.0, 2.0], [0.8, 0.8], [3.0, 0.3], [0.3, 3.0]])
    prof = degeneration_profile(fam, mesh)
    for t, v in prof["toward_smooth"].items():
        print(f"theta={t:<6} max|u^theta - u_AS| = {v:.3e}")
    for t, v in prof["toward_cusp"].items():
        print(f"theta={t:<6} max|u^theta - u| mod constants = {v:.3e}")
    x = np.array([[1.0, 0.5]])
    s1 = fam.scalar_curvature(x, 0.5, 1e-3)[0]
    s2 = fam.scalar_curvature(x, 0.5, 5e-4)[0]
    print(f"s(u^1/2) at {x[0].tolist()}: {s2:.6f} (h^2 estimator {abs(s1 - s2) * 4 / 3:.1e})")
