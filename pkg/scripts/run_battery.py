"""Classify every config in configs/ and print one summary line each.

    python3 scripts/run_battery.py [--out-dir reports/]

With ``--out-dir`` the full JSON report of each run is written there.
"""

import argparse
import time
from pathlib import Path

from jacobi_deficiency.cli import classify, load_config

ROOT = Path(__file__).resolve().parent.parent


def main():
    ap = argparse.ArgumentParser(description="run the classification battery")
    ap.add_argument("--configs", type=Path, default=ROOT / "configs")
    ap.add_argument("--out-dir", type=Path)
    args = ap.parse_args()
    if args.out_dir:
        args.out_dir.mkdir(parents=True, exist_ok=True)

    t_all = time.perf_counter()
    for path in sorted(args.configs.glob("*.ini")):
        t0 = time.perf_counter()
        rep = classify(load_config(path))
        verdicts = ", ".join(f"{v.criterion_id}={v.verdict}" for v in rep.verdicts)
        print(f"{path.stem:14s} final={rep.final:22s} n_plus={rep.oracle.get('n_plus_estimate')} "
              f"contradictions={len(rep.contradictions)} [{time.perf_counter() - t0:.1f}s]")
        print(f"{'':14s} {verdicts}")
        if args.out_dir:
            (args.out_dir / f"{path.stem}.json").write_text(rep.to_json())
    print(f"total {time.perf_counter() - t_all:.1f}s")


if __name__ == "__main__":
    main()
