"""Compare the exact GH / pointed-GH searches with the MILP oracle on random small spaces.

Prints the worst gap in units of the grid step.  The oracle restricts cross
distances to be at least one grid step, so gaps up to 1 step are expected.
"""

import argparse
import random
import time
from dataclasses import dataclass

from gromovlab import PointedSpace, gh_distance
from gromovlab.gromov_space import oracle_gh_distance, oracle_min_objective, pointed_gh_bounds
from gromovlab.metric_core import FiniteMetricSpace


@dataclass
class AgreementConfig:
    instances: int = 30
    max_points: int = 3
    max_weight: int = 12
    grid_divisor: int = 200
    seed: int = 0


def random_space(rng, n, hi):
    w = [[0] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            w[i][j] = w[j][i] = rng.randint(1, hi)
    for k in range(n):  # shortest-path closure
        for i in range(n):
            for j in range(n):
                w[i][j] = min(w[i][j], w[i][k] + w[k][j])
    return FiniteMetricSpace(range(n), w)


def run(cfg: AgreementConfig):
    rng = random.Random(cfg.seed)
    worst_gh = worst_pgh = 0.0
    for _ in range(cfg.instances):
        M = random_space(rng, rng.randint(1, cfg.max_points), cfg.max_weight)
        N = random_space(rng, rng.randint(1, cfg.max_points), cfg.max_weight)
        x, y = rng.choice(M.points), rng.choice(N.points)
        grid = float(max(M.diameter(), N.diameter(), 1)) / cfg.grid_divisor
        gh = float(gh_distance(M, N))
        worst_gh = max(worst_gh, abs(gh - oracle_gh_distance(M, N, grid)) / grid)
        R = M.diameter() + N.diameter() + 1
        upper = float(pointed_gh_bounds(PointedSpace(M, x), PointedSpace(N, y)).upper)
        oracle = oracle_min_objective(PointedSpace(M, x), PointedSpace(N, y), R, grid)
        worst_pgh = max(worst_pgh, abs(upper - oracle) / grid)
    return worst_gh, worst_pgh


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--instances", type=int, default=30)
    p.add_argument("--max-points", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args()
    cfg = AgreementConfig(args.instances, args.max_points, seed=args.seed)
    t = time.perf_counter()
    gh, pgh = run(cfg)
    print(f"{cfg.instances} instances, {time.perf_counter() - t:.1f}s")
    print(f"worst |gh - oracle|        = {gh:.3f} grid steps")
    print(f"worst |pointed - oracle|   = {pgh:.3f} grid steps")
    return 0 if max(gh, pgh) <= 2 else 1


if __name__ == "__main__":
    raise SystemExit(main())
