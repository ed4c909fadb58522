"""det D xi > 0 on 256 x 256 log-graded grids over the reference battery."""

import time

from toric_sfk import NutParameter, build
from toric_sfk.ansatz import GridSpec, positivity_scan
from toric_sfk.catalog import BATTERY

if __name__ == "__main__":
    t0 = time.perf_counter()
    for name, (factory, nuts) in BATTERY.items():
        for nu in nuts:
            a = build(factory(), NutParameter(nu))
            res = positivity_scan(a, GridSpec.default(a, 256))
            print(f"{name:6} nu={str(nu):8} pass={res.passed!s:5} min det={res.details['min_det']:.3e}")
    print(f"total {time.perf_counter() - t0:.2f} s")
