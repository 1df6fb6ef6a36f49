"""Reference values of J_nu(x) at 50 significant digits.

Writes crates/core/tests/data/bessel_reference.csv, read by the Bessel
accuracy test. Run from the repository root:

    python3 scripts/bessel_reference.py
"""
import csv
import mpmath

mpmath.mp.dps = 50

ORDERS = [1, 3, 5, 7, 9, 11, 13, 15, 17, 19]
POINTS = ["1e-6", "0.001", "0.1", "0.5", "1", "2.5", "5", "8", "11.9", "12.1", "15", "20", "30",
          "39.5", "40.5", "60", "100", "250", "361", "500", "1000", "5000", "1e5"]

with open("crates/core/tests/data/bessel_reference.csv", "w", newline="") as fh:
    out = csv.writer(fh)
    out.writerow(["nu", "x", "j"])
    for nu in ORDERS:
        for x in POINTS:
            out.writerow([nu, x, mpmath.nstr(mpmath.besselj(nu, mpmath.mpf(x)), 50)])
