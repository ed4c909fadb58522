"""Momentum profile of the Hwang-Singer cusp metric against 2 tau^2 / (2 + tau)."""

import time

from toric_sfk import NutParameter, build
from toric_sfk.catalog import hwang_singer, hwang_singer_profile
from toric_sfk.geometry import momentum_profile

TAUS = (0.01, 0.1, 1, 2, 4, 10, 100)

if __name__ == "__main__":
    t0 = time.perf_counter()
    ansatz = build(hwang_singer(), NutParameter(), recenter=1)
    rows = momentum_profile(ansatz, TAUS)
    elapsed = time.perf_counter() - t0
    print(f"{'tau':>8} {'|X|^2':>22} {'closed form':>22} {'rel err':>10}")
    for tau, val in rows:
        ref = hwang_singer_profile(tau)
        print(f"{tau:8g} {val:22.15g} {ref:22.15g} {abs(val - ref) / ref:10.2e}")
    print(f"elapsed {elapsed:.3f} s")
