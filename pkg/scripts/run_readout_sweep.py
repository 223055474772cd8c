"""GKP readout error mass vs the closed-form misidentification bound.

Sweeps the spike width of a |-> comb, reads out with sqrt(pi)/8 pixels, and
prints the measured wrong-window mass next to (2 delta/pi) exp(-pi/(4 delta^2)).

    python scripts/run_readout_sweep.py [--out readout_sweep.csv]
"""

import argparse
import math
from pathlib import Path

from cviqp.cli import main as cviqp_main


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default=str(Path(__file__).with_name("readout_sweep.csv")))
    args = ap.parse_args()
    rc = cviqp_main(
        [
            "readout",
            "--delta",
            "0.15,0.2,0.25,0.3",
            "--eta",
            str(math.sqrt(math.pi) / 8.0),
            "--state",
            "minus",
            "--out",
            args.out,
        ]
    )
    if rc == 0:
        print(Path(args.out).read_text(), end="")
    return rc


if __name__ == "__main__":
    raise SystemExit(main())
