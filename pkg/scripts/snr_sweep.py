"""Transmit-SNR sweep of all five rules at the 12-cell, 10-channel scale.

Writes one mean/std file per (metric, rule) into --out, ready for plotting
NWCF, P_SD, P_FA, P_MD and chi-square against transmit SNR.
"""
import argparse
import os
from dataclasses import replace
from pathlib import Path

from mclds.cli import SweepSpec, cmd_sweep
from mclds.config import ScenarioConfig


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", type=Path, default=Path("out/snr_sweep"))
    ap.add_argument("--seeds", type=int, default=20)
    ap.add_argument("--horizon", type=int, default=60)
    ap.add_argument("--seed", type=int, default=2024)
    args = ap.parse_args()
    cfg = replace(ScenarioConfig(), horizon=args.horizon, seed=args.seed)
    spec = SweepSpec("tx_snr_db", tuple(float(x) for x in range(-70, 111, 20)), args.seeds)
    return cmd_sweep(cfg, spec, args.out, int(os.environ.get("MCLDS_WORKERS", "1")))


if __name__ == "__main__":
    raise SystemExit(main())
