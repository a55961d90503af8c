# scripts/smoke_simulate.py
from __future__ import annotations

import argparse
import logging
from pathlib import Path

from phumobcal_core.domain.params import DeviceGeometry, ParamVector, PhuMobParams
from phumobcal_core.physics.sbd import pre_turn_on_mask, simulate
from phumobcal_core.ports.artifact_store import RunStamp
from phumobcal_infra.storage.files import read_params_json, write_curve_csv


def main() -> None:
    parser = argparse.ArgumentParser(description="Simulate one I-V curve and write it as CSV.")
    parser.add_argument("--params", type=Path, default=None, help="Parameter JSON; defaults to a 300 K device.")
    parser.add_argument("--out", type=Path, default=Path("runs/smoke/curve.csv"))
    args = parser.parse_args()

    logging.basicConfig(level="INFO")

    if args.params is not None:
        params = read_params_json(args.params)
    else:
        params = ParamVector(
            temperature=300.0,
            workfunction=5.2,
            phumob=PhuMobParams(mu_max=153.0, mu_min=55.0, n_ref=10**17.4, alpha=2.8, theta=2.3),
        )

    geom = DeviceGeometry()
    curve = simulate(params, geom)
    # currents are stored from the first non-zero bias point on
    for voltage, current in ((curve.voltages[1], curve.currents[0]), (curve.voltages[-1], curve.currents[-1])):
        print(f"I({voltage:.3f} V) = {current:.6e} A")
    print("Pre-turn-on points:", int(pre_turn_on_mask(params, geom).sum()), "of", curve.currents.size)
    print("Wrote", write_curve_csv(args.out, curve, RunStamp(config_digest="smoke", seed=0)))


if __name__ == "__main__":
    main()
