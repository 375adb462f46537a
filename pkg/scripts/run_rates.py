"""Run the convergence studies behind the rate checks and write one CSV per study.

Usage: python scripts/run_rates.py [--out DIR] [--only NAME ...]
"""

from __future__ import annotations

import argparse
import json
import time
from pathlib import Path

from hoqmc import __version__
from hoqmc.analysis import StudyConfig, convergence_study

NIED = {"construction": "niederreiter", "b": 2}

STUDIES = {
    "l2_interlaced3_s2": StudyConfig({**NIED, "s": 6, "alpha": 3}, "l2", range(4, 15)),
    "shift_anchored_s2": StudyConfig({**NIED, "s": 2}, "wce_shift", range(4, 13), R=32, seed=0),
    "shift_sobolev2_interlaced4_s1": StudyConfig({**NIED, "s": 4, "alpha": 4}, "wce_shift", range(3, 10),
                                                 kernel="sobolev", alpha=2, R=32, seed=0),
    "shift_sobolev2_interlaced4_s2": StudyConfig({**NIED, "s": 8, "alpha": 4}, "wce_shift", range(3, 10),
                                                 kernel="sobolev", alpha=2, R=32, seed=0),
    "wce_sobolev2_interlaced5_s1": StudyConfig({**NIED, "s": 5, "alpha": 5}, "wce", range(3, 10),
                                               kernel="sobolev", alpha=2),
    "integration_x2_interlaced2_s2": StudyConfig({**NIED, "s": 4, "alpha": 2}, "integration", range(3, 11),
                                                 integrand_params={"c": 2}),
    "mc_x2_s2": StudyConfig({**NIED, "s": 2}, "mc_integration", range(3, 11), integrand_params={"c": 2}),
}


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="results", help="output directory")
    ap.add_argument("--only", nargs="*", choices=sorted(STUDIES), help="subset of studies")
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for name in args.only or STUDIES:
        cfg = STUDIES[name]
        t0 = time.perf_counter()
        res = convergence_study(cfg)
        header = [f"hoqmc {__version__} study {name}", "config " + json.dumps(cfg.to_dict(), sort_keys=True)]
        (out / f"{name}.csv").write_text(res.to_csv(header))
        slope = "none" if res.slope is None else f"{res.slope:.3f}"
        print(f"{name:34s} slope {slope:>7s}  [{time.perf_counter() - t0:.1f}s]", flush=True)


if __name__ == "__main__":
    main()
