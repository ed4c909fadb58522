"""Log-log decay slopes of the asymptotic residual for each end model."""

import json

from toric_sfk import NutParameter, build
from toric_sfk.asymptotics import decay_fit
from toric_sfk.catalog import BATTERY

if __name__ == "__main__":
    for name, (factory, nuts) in BATTERY.items():
        for nu in nuts:
            rep = decay_fit(build(factory(), NutParameter(nu)))
            slopes = [round(r["slope"], 3) for r in rep.rays]
            print(f"{name:6} nu={str(nu):8} {rep.kind:15} pass={rep.passed!s:5} {json.dumps(slopes)}")
