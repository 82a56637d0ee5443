"""Average sigma_A^2 and mu_A over random matrices with iid [0, 1] entries.

Compares the averages with (n - 1) Var(U) and n E[U] for a few entry
laws and several n.

    python scripts/expected_variance.py --reps 10000 --seed 3
"""

import argparse
import json
from dataclasses import asdict, dataclass, field

from zbconc import oracle
from zbconc.zerobias import DiscreteDist

ENTRY_LAWS = {
    "uniform01": "uniform01",
    "bernoulli0.3": DiscreteDist.from_atoms([(0.0, 0.7), (1.0, 0.3)]),
    "three-point": DiscreteDist.from_atoms([(0.0, 0.25), (0.5, 0.5), (1.0, 0.25)]),
}


@dataclass
class Config:
    sizes: list[int] = field(default_factory=lambda: [4, 10, 25])
    laws: list[str] = field(default_factory=lambda: list(ENTRY_LAWS))
    reps: int = 10_000
    seed: int = 0


def run(cfg: Config) -> list[dict]:
    out = []
    for j, name in enumerate(cfg.laws):
        for n in cfg.sizes:
            res = oracle.expected_variance_experiment(n, ENTRY_LAWS[name], cfg.reps, cfg.seed + 1000 * j + n)
            out.append({"law": name, "n": n, **res.to_dict()})
    return out


def main(argv=None) -> None:
    parser = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--sizes", type=int, nargs="+", default=Config().sizes)
    parser.add_argument("--laws", nargs="+", choices=list(ENTRY_LAWS), default=Config().laws)
    parser.add_argument("--reps", type=int, default=Config.reps)
    parser.add_argument("--seed", type=int, default=Config.seed)
    cfg = Config(**vars(parser.parse_args(argv)))
    print(json.dumps({"config": asdict(cfg), "results": run(cfg)}, indent=2))


if __name__ == "__main__":
    main()
