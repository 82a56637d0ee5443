"""Locate where the best zero-bias bound changes along a t-grid.

For each (sigma2, c) pair the scan reports the t values at which the
winning bound switches, next to the predicted one-sided/two-sided
threshold 4 sigma2 / (3c). With --mu it also reports the switch between
the doubled one-sided bound at c = 8 and the Chatterjee bound, next to
(2 mu - sigma2) / 7.

    python scripts/crossover_scan.py --sigma2 1 4 --c 0.5 1 --t-max 60
"""

import argparse
import json
from dataclasses import asdict, dataclass, field

import numpy as np

from zbconc import bounds
from zbconc.bounds import BoundInput


@dataclass
class Config:
    sigma2: list[float] = field(default_factory=lambda: [1.0])
    c: list[float] = field(default_factory=lambda: [1.0])
    mu: list[float] = field(default_factory=list)
    t_max: float = 50.0
    points: int = 2000


def switches(ts, winners):
    return [{"t": float(ts[k]), "from": winners[k - 1], "to": winners[k]}
            for k in range(1, len(ts)) if winners[k] != winners[k - 1]]


def scan_pair(sigma2, c, ts) -> dict:
    kinds = bounds.KIND_ORDER[:4]
    winners = [bounds.best_bound(BoundInput(sigma2, c, t), kinds)[0].value for t in ts]
    return {"sigma2": sigma2, "c": c, "predicted_regime": bounds.regime_threshold(sigma2, c),
            "switches": switches(ts, winners)}


def scan_chatterjee(mu, sigma2, ts) -> dict:
    winners = ["hoeffding-zb" if bounds.zb_hoeffding_two_sided(sigma2, t).raw <= bounds.chatterjee(mu, t).raw
               else "chatterjee" for t in ts]
    return {"mu": mu, "sigma2": sigma2, "predicted": bounds.chatterjee_crossover(mu, sigma2),
            "switches": switches(ts, winners)}


def main(argv=None) -> None:
    parser = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--sigma2", type=float, nargs="+", default=Config().sigma2)
    parser.add_argument("--c", type=float, nargs="+", default=Config().c)
    parser.add_argument("--mu", type=float, nargs="*", default=[])
    parser.add_argument("--t-max", type=float, default=Config.t_max)
    parser.add_argument("--points", type=int, default=Config.points)
    cfg = Config(**vars(parser.parse_args(argv)))
    ts = np.linspace(cfg.t_max / cfg.points, cfg.t_max, cfg.points)
    out = {"config": asdict(cfg),
           "pairs": [scan_pair(s, c, ts) for s in cfg.sigma2 for c in cfg.c],
           "chatterjee": [scan_chatterjee(m, s, ts) for m in cfg.mu for s in cfg.sigma2]}
    print(json.dumps(out, indent=2))


if __name__ == "__main__":
    main()
