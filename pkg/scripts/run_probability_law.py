"""Sweep the Fourier-gadget pixel probability against the 2*eta*sigma/sqrt(pi) law.

Writes probability_law.csv next to this script (override with --out) and
prints the table.  Runs on the same grid the acceptance suite uses.

    python scripts/run_probability_law.py [--out probability_law.csv]
"""

import argparse
from pathlib import Path

from cviqp.cli import main as cviqp_main


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default=str(Path(__file__).with_name("probability_law.csv")))
    args = ap.parse_args()
    rc = cviqp_main(
        [
            "fourier-gadget",
            "--sigma",
            "0.1",
            "--eta",
            "0.005,0.01,0.02,0.04",
            "--grid-points",
            "4096",
            "--extent",
            "256",
            "--out",
            args.out,
        ]
    )
    if rc == 0:
        print(Path(args.out).read_text(), end="")
    return rc


if __name__ == "__main__":
    raise SystemExit(main())
