"""Print the squeezing scaling table over four decades of circuit size and the
squeezing level at which one error-corrected Fourier transform fails with
probability 1e-6.

    python scripts/run_scaling_table.py
"""

from cviqp.cli import main as cviqp_main

if __name__ == "__main__":
    raise SystemExit(
        cviqp_main(["scaling", "--n", "1,2,5,10,20,50,100,1000,10000", "--solve-ft-error", "1e-6"])
    )
