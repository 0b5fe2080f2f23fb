"""Run the reduction checks over every sequence pair of each depth and tabulate.

    python scripts/claims_sweep.py --depths 2 3 4 --modes integer paper
"""

import argparse
import time
from dataclasses import dataclass, field

from gromovlab.reduction_lab import ConstructionConfig, verify_claims


@dataclass
class SweepConfig:
    depths: list = field(default_factory=lambda: [2, 3])
    modes: list = field(default_factory=lambda: ["integer"])
    max_dev: int | None = None


def sweep(cfg: SweepConfig):
    rows = []
    for mode in cfg.modes:
        for depth in cfg.depths:
            t = time.perf_counter()
            result = verify_claims(depth, ConstructionConfig(mode), cfg.max_dev)
            elapsed = time.perf_counter() - t
            for r in result:
                rows.append((mode, depth, r.claim, r.passed, r.checked, elapsed))
    return rows


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--depths", type=int, nargs="+", default=[2, 3])
    p.add_argument("--modes", nargs="+", choices=("integer", "paper"), default=["integer"])
    p.add_argument("--max-dev", type=int)
    args = p.parse_args()
    rows = sweep(SweepConfig(args.depths, args.modes, args.max_dev))
    print(f"{'mode':<8} {'depth':>5}  {'check':<22} {'result':<6} {'cases':>6}  {'sweep s':>8}")
    for mode, depth, claim, ok, n, s in rows:
        print(f"{mode:<8} {depth:>5}  {claim:<22} {'pass' if ok else 'FAIL':<6} {n:>6}  {s:>8.2f}")
    return 0 if all(r[3] for r in rows) else 1


if __name__ == "__main__":
    raise SystemExit(main())
