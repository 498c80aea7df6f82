"""Run the canonical experiments through the CLI and write one CSV each.

    python scripts/run_experiments.py --outdir results --workers 4 --seed 1
"""

import argparse
import time
from pathlib import Path

from rmtlaws.cli import main as cli

EXPERIMENTS = {
    "metric": ["metric-check", "--spaces", "6", "--dims", "1-8", "--samples", "10000"],
    "lsd_wigner": ["lsd", "--ensemble", "wigner", "--sizes", "200,500,1000", "--reps", "10"],
    "lsd_mp": ["lsd", "--ensemble", "covariance", "--h", "1:1", "--y", "0.5", "--sizes", "250,500,1000",
               "--reps", "5"],
    "lsd_deformed": ["lsd", "--ensemble", "deformed", "--h", "0.5:1.0,0.5:4.0", "--sizes", "200,400,800",
                     "--reps", "3"],
    "spiked": ["spiked", "--lambdas", "5,1", "--mult", "1,2", "--n", "2000", "--reps", "2000"],
    "clt": ["clt", "--n", "400", "--reps", "800", "--z", "2i,1.5i"],
}
PARALLEL = {"lsd", "spiked", "clt"}


def run(outdir: Path, seed: int, workers: int, only: list[str] | None) -> int:
    outdir.mkdir(parents=True, exist_ok=True)
    worst = 0
    for name, argv in EXPERIMENTS.items():
        if only and name not in only:
            continue
        extra = ["--seed", str(seed), "--out", str(outdir / f"{name}.csv")]
        if argv[0] in PARALLEL:
            extra += ["--workers", str(workers)]
        t0 = time.perf_counter()
        code = cli(argv + extra)
        print(f"{name:14s} exit={code} {time.perf_counter() - t0:7.1f}s -> {outdir / (name + '.csv')}")
        worst = max(worst, code)
    return worst


if __name__ == "__main__":
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--outdir", type=Path, default=Path("results"))
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--only", nargs="*", choices=sorted(EXPERIMENTS))
    args = p.parse_args()
    raise SystemExit(run(args.outdir, args.seed, args.workers, args.only))
