"""Run the pipeline on SWaT historian exports and set the per-size signature
counts beside the published table.

    python scripts/swat_compare.py NORMAL.csv ATTACK.csv --out runs/swat

The dataset is not redistributed; request it from iTrust (SUTD).  Mining the
full normal period at the default 0.7% support takes a while and a few GB.
"""

import argparse
import sys

from attackrules.cli import main as cli_main


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("normal")
    ap.add_argument("attack")
    ap.add_argument("--out", default="runs/swat")
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--config", help="flat key = value overrides")
    args = ap.parse_args()
    argv = ["pipeline", "--normal", args.normal, "--attack", args.attack, "--out", args.out,
            "--workers", str(args.workers), "--compare-published"]
    if args.config:
        argv += ["--config", args.config]
    return cli_main(argv)


if __name__ == "__main__":
    sys.exit(main())
