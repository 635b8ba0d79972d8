"""Static against adaptive temporal parameters across transmit SNR.

Prints mean max(P_FA, P_MD) for both MC-LDS variants at each SNR point,
optionally over a range of database error probabilities.
"""
import argparse
import os
from dataclasses import replace

import numpy as np

from mclds.cli import SweepSpec, run_sweep
from mclds.config import RULES, ScenarioConfig
from mclds.export import METRICS


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seeds", type=int, default=10)
    ap.add_argument("--horizon", type=int, default=60)
    ap.add_argument("--error-prob", type=float, nargs="+", default=[0.03])
    args = ap.parse_args()
    workers = int(os.environ.get("MCLDS_WORKERS", "1"))
    snr = tuple(float(x) for x in range(-70, 111, 20))
    fa, md = METRICS.index("p_fa"), METRICS.index("p_md")
    for q in args.error_prob:
        cfg = replace(ScenarioConfig(), horizon=args.horizon, seed=2024)
        cfg = replace(cfg, database=replace(cfg.database, error_prob=q))
        summaries, _ = run_sweep(cfg, SweepSpec("tx_snr_db", snr, args.seeds), workers)
        worst = np.maximum(summaries[..., fa], summaries[..., md]).mean(axis=1)
        print(f"database error_prob {q}")
        for p, value in enumerate(snr):
            s, a = worst[p, RULES.index("MC-LDS")], worst[p, RULES.index("MC-LDS-adaptive")]
            print(f"  {value:6.0f} dB  static {s:.4f}  adaptive {a:.4f}")


if __name__ == "__main__":
    main()
